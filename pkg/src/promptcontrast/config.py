"""Run configuration: JSON file schema, loading, and client/metric wiring.

A config file declares the service endpoints (HTTP or mock), search defaults,
metric parameters, and file paths. Unknown keys are rejected so typos fail
loudly instead of silently using defaults.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

import jsonschema

from .cache import ResponseCache
from .clients import (
    CachedEmbedder,
    CachedGenerator,
    CachedInfiller,
    CachedJudgeScorer,
    CachedNliScorer,
    CachedPreferenceScorer,
    MockEmbedder,
    MockGenerator,
    MockInfiller,
    MockJudgeScorer,
    MockNliScorer,
    MockPreferenceScorer,
)
from .errors import ConfigError
from .evaluation import DEFAULT_BASELINE_TEMPLATE
from .http import (
    HttpEmbedder,
    HttpEndpoint,
    HttpGenerator,
    HttpInfiller,
    HttpJudgeScorer,
    HttpNliScorer,
    HttpPreferenceScorer,
)
from .metrics import (
    DIRECTION_DECREASE,
    DIRECTION_INCREASE,
    ContrastMetric,
    bleu_composite_metric,
    contradiction_metric,
    preference_metric,
    rubric_judge_metric,
)
from .types import SearchConfig

DEFAULT_DEGRADE_DIRECTIVE = (
    "Consider the following conversation between a human user and an AI "
    "assistant. Assume the role of the assistant and provide a response to "
    "the user's most recent statement. Please restrict your response to 50 "
    "words or less and be as concise as possible."
)

METRIC_IDS = ("contradiction", "preference", "bleu", "rubric")

_HTTP_ENDPOINT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["type", "url"],
    "properties": {
        "type": {"const": "http"},
        "url": {"type": "string"},
        "model": {"type": "string"},
        "auth_env": {"type": ["string", "null"]},
        "temperature": {"type": "number"},
        "max_tokens": {"type": "integer", "minimum": 1},
        "timeout_s": {"type": "number", "exclusiveMinimum": 0},
        "max_retries": {"type": "integer", "minimum": 0},
    },
}

_PROBS = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}

_MOCK_SCHEMAS = {
    "generator": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type", "default"],
        "properties": {
            "type": {"const": "mock"},
            "rules": {
                "type": "array",
                "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["contains", "response"],
                    "properties": {
                        "contains": {"type": "string"},
                        "response": {"type": "string"},
                    },
                },
            },
            "default": {"type": "string"},
        },
    },
    "infiller": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type"],
        "properties": {
            "type": {"const": "mock"},
            "table": {
                "type": "object",
                "additionalProperties": {"type": "array", "items": {"type": "string"}},
            },
            "seed": {"type": "integer"},
        },
    },
    "nli": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type"],
        "properties": {
            "type": {"const": "mock"},
            "pairs": {
                "type": "array",
                "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["premise", "hypothesis", "probs"],
                    "properties": {
                        "premise": {"type": "string"},
                        "hypothesis": {"type": "string"},
                        "probs": _PROBS,
                    },
                },
            },
            "identical": _PROBS,
            "default": _PROBS,
        },
    },
    "preference": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type"],
        "properties": {
            "type": {"const": "mock"},
            "pairs": {
                "type": "array",
                "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["a", "b", "p"],
                    "properties": {
                        "a": {"type": "string"},
                        "b": {"type": "string"},
                        "p": {"type": "number", "minimum": 0, "maximum": 1},
                    },
                },
            },
            "default": {"type": "number", "minimum": 0, "maximum": 1},
        },
    },
    "judge": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type"],
        "properties": {
            "type": {"const": "mock"},
            "rules": {
                "type": "array",
                "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["contains", "score"],
                    "properties": {
                        "contains": {"type": "string"},
                        "score": {"type": "number", "minimum": 0, "maximum": 1},
                    },
                },
            },
            "default": {"type": "number", "minimum": 0, "maximum": 1},
            "sequence": {"type": "array", "items": {"type": "number"}},
        },
    },
    "embedder": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type"],
        "properties": {
            "type": {"const": "mock"},
            "vectors": {
                "type": "object",
                "additionalProperties": {"type": "array", "items": {"type": "number"}},
            },
            "dim": {"type": "integer", "minimum": 1},
        },
    },
}

_ROLES = ("generator", "infiller", "nli", "preference", "judge", "embedder")

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["endpoints"],
    "properties": {
        "endpoints": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                role: {"oneOf": [_HTTP_ENDPOINT_SCHEMA, _MOCK_SCHEMAS[role]]}
                for role in _ROLES
            },
        },
        "search": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "delta": {"type": ["number", "null"]},
                "budget": {"type": "integer", "minimum": 2},
                "max_iters": {"type": "integer", "minimum": 1},
                "alpha": {"type": "number", "minimum": 0, "maximum": 1},
                "split_k": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "metric_id": {"enum": list(METRIC_IDS)},
                "anchor": {"enum": ["original", "current", None]},
                "budget_mode": {"enum": ["strict", "memoized"]},
                "parallelism": {"type": "integer", "minimum": 1},
            },
        },
        "metric_params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "bleu_response_weight": {"type": "number", "minimum": 0, "maximum": 1},
                "bleu_prompt_weight": {"type": "number", "minimum": 0, "maximum": 1},
                "rubric_path": {"type": ["string", "null"]},
                "rubric_repeats": {"type": "integer", "minimum": 1},
                "rubric_direction": {"enum": [DIRECTION_INCREASE, DIRECTION_DECREASE]},
                "judge_examples_path": {"type": ["string", "null"]},
            },
        },
        "cache_path": {"type": ["string", "null"]},
        "output_path": {"type": ["string", "null"]},
        "baseline_template": {"type": "string"},
        "degrade": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"directive": {"type": "string"}},
        },
    },
}


@dataclass(frozen=True)
class MetricParams:
    bleu_response_weight: float = 0.75
    bleu_prompt_weight: float = 0.25
    rubric_path: Optional[str] = None
    rubric_repeats: int = 3
    rubric_direction: str = DIRECTION_INCREASE
    judge_examples_path: Optional[str] = None


@dataclass(frozen=True)
class RunConfig:
    endpoints: dict
    search: SearchConfig = field(default_factory=SearchConfig)
    metric_params: MetricParams = field(default_factory=MetricParams)
    cache_path: Optional[str] = None
    output_path: Optional[str] = None
    baseline_template: str = DEFAULT_BASELINE_TEMPLATE
    degrade_directive: str = DEFAULT_DEGRADE_DIRECTIVE
    base_dir: str = "."

    def resolve_path(self, path: str) -> str:
        """Paths in a config file are relative to the file itself."""
        if os.path.isabs(path):
            return path
        return os.path.normpath(os.path.join(self.base_dir, path))


def parse_config(data: dict, base_dir: str = ".") -> RunConfig:
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message} (at {'/'.join(map(str, exc.absolute_path))})")
    search = SearchConfig(**data.get("search", {}))
    params = MetricParams(**data.get("metric_params", {}))
    degrade = data.get("degrade", {})
    return RunConfig(
        endpoints=data["endpoints"],
        search=search,
        metric_params=params,
        cache_path=data.get("cache_path"),
        output_path=data.get("output_path"),
        baseline_template=data.get("baseline_template", DEFAULT_BASELINE_TEMPLATE),
        degrade_directive=degrade.get("directive", DEFAULT_DEGRADE_DIRECTIVE),
        base_dir=base_dir,
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}")
    return parse_config(data, base_dir=os.path.dirname(os.path.abspath(path)))


def _http_endpoint(spec: dict) -> HttpEndpoint:
    return HttpEndpoint(
        url=spec["url"],
        model=spec.get("model", ""),
        auth_env=spec.get("auth_env"),
        temperature=spec.get("temperature", 0.0),
        max_tokens=spec.get("max_tokens", 256),
        timeout_s=spec.get("timeout_s", 30.0),
        max_retries=spec.get("max_retries", 3),
    )


@dataclass
class ClientBundle:
    """Instantiated clients for one run; roles missing from the config stay None."""

    generator: object = None
    infiller: object = None
    nli: object = None
    preference: object = None
    judge: object = None
    embedder: object = None
    cache: Optional[ResponseCache] = None


def _build_client(role: str, spec: dict, config: RunConfig):
    if spec["type"] == "http":
        endpoint = _http_endpoint(spec)
        if role == "generator":
            return HttpGenerator(endpoint)
        if role == "infiller":
            return HttpInfiller(endpoint)
        if role == "nli":
            return HttpNliScorer(endpoint)
        if role == "preference":
            return HttpPreferenceScorer(endpoint)
        if role == "judge":
            examples: list[str] = []
            if config.metric_params.judge_examples_path:
                examples = _load_examples(config.resolve_path(config.metric_params.judge_examples_path))
            return HttpJudgeScorer(endpoint, examples=examples)
        if role == "embedder":
            return HttpEmbedder(endpoint)
    if role == "generator":
        return MockGenerator(
            rules=[(r["contains"], r["response"]) for r in spec.get("rules", [])],
            default=spec["default"],
        )
    if role == "infiller":
        return MockInfiller(table=spec.get("table", {}), seed=spec.get("seed", config.search.seed))
    if role == "nli":
        return MockNliScorer(
            pairs={
                (p["premise"], p["hypothesis"]): tuple(p["probs"]) for p in spec.get("pairs", [])
            },
            identical=tuple(spec.get("identical", (0.9, 0.1, 0.0))),
            default=tuple(spec.get("default", (0.7, 0.2, 0.1))),
        )
    if role == "preference":
        return MockPreferenceScorer(
            pairs={(p["a"], p["b"]): p["p"] for p in spec.get("pairs", [])},
            default=spec.get("default", 0.5),
        )
    if role == "judge":
        return MockJudgeScorer(
            rules=[(r["contains"], r["score"]) for r in spec.get("rules", [])],
            default=spec.get("default", 0.5),
            sequence=spec.get("sequence"),
        )
    if role == "embedder":
        return MockEmbedder(vectors=spec.get("vectors", {}), dim=spec.get("dim", 8))
    raise ConfigError(f"unknown endpoint role {role!r}")


_CACHE_WRAPPERS = {
    "generator": CachedGenerator,
    "infiller": CachedInfiller,
    "nli": CachedNliScorer,
    "preference": CachedPreferenceScorer,
    "judge": CachedJudgeScorer,
    "embedder": CachedEmbedder,
}


def build_clients(config: RunConfig, cache: Optional[ResponseCache] = None) -> ClientBundle:
    """Instantiate every configured endpoint, wrapping each in the cache if one is set."""
    if cache is None and config.cache_path:
        cache = ResponseCache(config.resolve_path(config.cache_path))
    bundle = ClientBundle(cache=cache)
    for role in _ROLES:
        spec = config.endpoints.get(role)
        if spec is None:
            continue
        client = _build_client(role, spec, config)
        if cache is not None:
            client = _CACHE_WRAPPERS[role](client, cache)
        setattr(bundle, role, client)
    return bundle


def _load_examples(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        blocks = fh.read().split("\n\n")
    return [b.strip() for b in blocks if b.strip()]


def _load_rubric(config: RunConfig) -> str:
    if not config.metric_params.rubric_path:
        raise ConfigError("the rubric metric needs metric_params.rubric_path")
    path = config.resolve_path(config.metric_params.rubric_path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read().strip()
    except OSError as exc:
        raise ConfigError(f"cannot read rubric {path}: {exc}")


def build_metric(config: RunConfig, bundle: ClientBundle, metric_id: Optional[str] = None) -> ContrastMetric:
    """Build the configured contrast metric, checking its client dependencies."""
    metric_id = metric_id or config.search.metric_id
    if metric_id == "contradiction":
        if bundle.nli is None:
            raise ConfigError("the contradiction metric needs an nli endpoint")
        return contradiction_metric(bundle.nli)
    if metric_id == "preference":
        if bundle.preference is None:
            raise ConfigError("the preference metric needs a preference endpoint")
        return preference_metric(bundle.preference)
    if metric_id == "bleu":
        return bleu_composite_metric(
            w_resp=config.metric_params.bleu_response_weight,
            w_prompt=config.metric_params.bleu_prompt_weight,
        )
    if metric_id == "rubric":
        if bundle.judge is None:
            raise ConfigError("the rubric metric needs a judge endpoint")
        return rubric_judge_metric(
            bundle.judge,
            rubric=_load_rubric(config),
            repeats=config.metric_params.rubric_repeats,
            direction=config.metric_params.rubric_direction,
        )
    raise ConfigError(f"unknown metric {metric_id!r}")
