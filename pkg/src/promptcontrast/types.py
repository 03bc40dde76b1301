"""Core value types shared by the search, metric, and reporting layers.

Everything here is an immutable value object except :class:`BudgetLedger` and
:class:`BestTracker`, which are mutated by concurrent scoring workers and guard
their state with locks.
"""
from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, replace
from typing import Optional

from .errors import EmptyPromptError, MaskTokenError

MASK_TOKEN = "<mask>"

FOUND_THRESHOLD = "threshold_met"
FOUND_BUDGET = "budget_exhausted"
FOUND_EXHAUSTED = "search_exhausted"
FOUND_ERROR = "error"

ANCHOR_ORIGINAL = "original"
ANCHOR_CURRENT = "current"

MODE_STRICT = "strict"
MODE_MEMOIZED = "memoized"

_WS = re.compile(r"\s+")


def normalize_text(raw: str) -> str:
    """Collapse whitespace runs to single spaces and trim both ends."""
    return _WS.sub(" ", raw).strip()


@dataclass(frozen=True)
class PromptText:
    """A whitespace-normalized prompt: words separated by single spaces.

    Construct via :func:`normalize_prompt` unless the text is already
    normalized; the constructor validates rather than repairs.
    """

    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise EmptyPromptError("prompt has no words")
        if self.text != normalize_text(self.text):
            raise ValueError("PromptText requires normalized text; use normalize_prompt()")
        if MASK_TOKEN in self.text:
            raise MaskTokenError(f"prompt must not contain the literal {MASK_TOKEN!r}")

    @property
    def words(self) -> list[str]:
        return self.text.split(" ")

    def __str__(self) -> str:
        return self.text


def normalize_prompt(raw: str) -> PromptText:
    """Normalize raw text into a :class:`PromptText`.

    Raises EmptyPromptError when nothing but whitespace remains.
    """
    text = normalize_text(raw)
    if not text:
        raise EmptyPromptError("prompt is empty after whitespace normalization")
    return PromptText(text)


@dataclass(frozen=True)
class SpanSplit:
    """An ordered span decomposition of a prompt; the search's coordinate system.

    Spans are 1-indexed everywhere in this package. Joining the spans with
    single spaces reproduces the normalized source prompt.
    """

    spans: tuple[str, ...]
    split_k: int

    def __post_init__(self) -> None:
        if self.split_k < 1:
            raise ValueError("split_k must be >= 1")
        if not self.spans:
            raise ValueError("a span split needs at least one span")

    @property
    def n_e(self) -> int:
        return len(self.spans)

    def join(self) -> str:
        return " ".join(self.spans)

    def all_indices(self) -> frozenset[int]:
        return frozenset(range(1, self.n_e + 1))


@dataclass(frozen=True)
class ModificationRecord:
    """One span replacement: what the search swapped in for the original text."""

    span_index: int
    original_text: str
    replacement_text: str


@dataclass(frozen=True)
class Candidate:
    """A perturbed prompt plus its remaining-unmasked index set and provenance.

    ``score`` stays None until the candidate has been scored; unset is a
    distinct state from 0.0.
    """

    prompt: PromptText
    remaining: frozenset[int]
    score: Optional[float]
    provenance: tuple[ModificationRecord, ...]

    def __post_init__(self) -> None:
        touched = [m.span_index for m in self.provenance]
        if len(touched) != len(set(touched)):
            raise ValueError("provenance touches a span index twice")
        if set(touched) & self.remaining:
            raise ValueError("perturbed span indices must leave the remaining set")


@dataclass(frozen=True)
class SearchConfig:
    """Every tunable the two searches need.

    ``delta`` of None means "use the metric's default threshold"; ``anchor`` of
    None means "use the algorithm's native anchoring" (the greedy search scores
    against the current chain head, the budgeted search against the original).
    """

    delta: Optional[float] = None
    budget: int = 100
    max_iters: int = 10
    alpha: float = 0.5
    split_k: int = 1
    seed: int = 42
    metric_id: str = "contradiction"
    anchor: Optional[str] = None
    budget_mode: str = MODE_MEMOIZED
    parallelism: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.budget < 2:
            raise ValueError("budget must be >= 2")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.split_k < 1:
            raise ValueError("split_k must be >= 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.anchor not in (None, ANCHOR_ORIGINAL, ANCHOR_CURRENT):
            raise ValueError(f"unknown anchor {self.anchor!r}")
        if self.budget_mode not in (MODE_STRICT, MODE_MEMOIZED):
            raise ValueError(f"unknown budget mode {self.budget_mode!r}")

    def with_overrides(self, **kwargs) -> "SearchConfig":
        return replace(self, **kwargs)


class BudgetLedger:
    """Thread-safe counter of charged generator calls.

    ``budget`` of None disables the cap (the greedy search is documented as
    unbounded). Strict mode charges every generation request; memoized mode
    charges only requests the per-search memo cannot serve.
    """

    def __init__(self, mode: str = MODE_MEMOIZED, budget: Optional[int] = None) -> None:
        if mode not in (MODE_STRICT, MODE_MEMOIZED):
            raise ValueError(f"unknown budget mode {mode!r}")
        self.mode = mode
        self.budget = budget
        self.n_b = 0
        self.cache_hits = 0
        self._lock = threading.Lock()

    def reserve(self) -> bool:
        """Charge one call if the cap allows it; reservation precedes the call."""
        with self._lock:
            if self.budget is not None and self.n_b >= self.budget:
                return False
            self.n_b += 1
            return True

    def record_hit(self) -> None:
        with self._lock:
            self.cache_hits += 1

    @property
    def exhausted(self) -> bool:
        return self.budget is not None and self.n_b >= self.budget


class BestTracker:
    """Thread-safe record of the best-scoring candidate seen so far.

    Initialized to the original prompt/response at score 0; only strictly
    greater scores displace the incumbent, so the first candidate to reach a
    given score wins ties.
    """

    def __init__(self, prompt: PromptText, response: str) -> None:
        self.best_prompt = prompt
        self.best_response = response
        self.best_score = 0.0
        self.best_candidate: Optional[Candidate] = None
        self._lock = threading.Lock()

    def offer(self, candidate: Candidate, response: str, score: float) -> bool:
        with self._lock:
            if score > self.best_score:
                self.best_prompt = candidate.prompt
                self.best_response = response
                self.best_score = score
                self.best_candidate = candidate
                return True
            return False

    @property
    def improved(self) -> bool:
        return self.best_candidate is not None


@dataclass(frozen=True)
class ScheduleState:
    """Snapshot of the budgeted search's sampling schedule at one inner step."""

    q: int
    t: int
    n_c: int
    m: int
    n_s: int
    inner_j: int


@dataclass(frozen=True)
class ExplanationRecord:
    """The output row: one contrastive explanation attempt for one prompt.

    ``elapsed_ms`` is wall-clock diagnostics and is deliberately excluded from
    the serialized JSONL row so identical runs produce identical bytes.
    """

    id: str
    input_prompt: PromptText
    input_response: str
    contrast_prompt: Optional[PromptText]
    contrast_response: Optional[str]
    score: float
    found: str
    modifications: tuple[ModificationRecord, ...]
    generator_calls: int
    elapsed_ms: int
    edit_distance: float
    metric_id: str
    delta: float
    algo: str
    config: SearchConfig
    error: Optional[str] = None

    def __post_init__(self) -> None:
        if self.found == FOUND_THRESHOLD and self.score < self.delta:
            raise ValueError("threshold_met requires score >= delta")
        if self.found == FOUND_THRESHOLD and self.contrast_prompt is None:
            raise ValueError("threshold_met requires a contrast prompt")

    def to_row(self) -> dict:
        """Stable JSONL row; key order is part of the published schema."""
        return {
            "id": self.id,
            "algo": self.algo,
            "metric_id": self.metric_id,
            "delta": self.delta,
            "found": self.found,
            "score": self.score,
            "input_prompt": self.input_prompt.text,
            "input_response": self.input_response,
            "contrast_prompt": self.contrast_prompt.text if self.contrast_prompt else None,
            "contrast_response": self.contrast_response,
            "modifications": [
                {
                    "span_index": m.span_index,
                    "original_text": m.original_text,
                    "replacement_text": m.replacement_text,
                }
                for m in self.modifications
            ],
            "generator_calls": self.generator_calls,
            "edit_distance": self.edit_distance,
            "error": self.error,
            "search": {
                "budget": self.config.budget,
                "max_iters": self.config.max_iters,
                "alpha": self.config.alpha,
                "split_k": self.config.split_k,
                "seed": self.config.seed,
                "anchor": self.config.anchor,
                "budget_mode": self.config.budget_mode,
                "parallelism": self.config.parallelism,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_row(), ensure_ascii=False)
