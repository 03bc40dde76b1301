"""Service client interfaces, deterministic mocks, and cache/budget wrappers.

Mock clients are pure functions of (inputs, seed): repeated calls with the
same input always return the same output, which keeps them cacheable and keeps
whole runs reproducible. Each mock records the requests it receives so tests
can assert on transport-level traffic.
"""
from __future__ import annotations

import hashlib
import threading
from typing import NamedTuple, Optional, Protocol, Sequence, runtime_checkable

from .cache import ResponseCache, fingerprint
from .errors import BudgetExhaustedError
from .textops import MaskedPrompt
from .types import MASK_TOKEN, BudgetLedger, MODE_MEMOIZED, PromptText, normalize_text


class NliProbs(NamedTuple):
    entailment: float
    neutral: float
    contradiction: float

    def validate(self) -> "NliProbs":
        total = self.entailment + self.neutral + self.contradiction
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"NLI probabilities must sum to 1, got {total}")
        if any(not 0.0 <= p <= 1.0 for p in self):
            raise ValueError(f"NLI probabilities must lie in [0, 1], got {self}")
        return self


@runtime_checkable
class GeneratorClient(Protocol):
    identity: str

    def generate(self, prompt: PromptText) -> str: ...


@runtime_checkable
class InfillerClient(Protocol):
    identity: str

    def infill(self, masked: MaskedPrompt) -> str: ...


@runtime_checkable
class NliClient(Protocol):
    identity: str

    def nli(self, premise: str, hypothesis: str) -> NliProbs: ...


@runtime_checkable
class PreferenceClient(Protocol):
    identity: str

    def preference(self, context: str, response_a: str, response_b: str) -> float: ...


@runtime_checkable
class JudgeClient(Protocol):
    identity: str

    def judge(self, conversation: str, rubric: str, salt: int = 0) -> float: ...


@runtime_checkable
class EmbedderClient(Protocol):
    identity: str

    def embed(self, text: str) -> tuple[float, ...]: ...


def _stable_pick(seed: int, key: str, n: int) -> int:
    digest = hashlib.sha256(f"{seed}|{key}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % n


def _rules_tag(parts: Sequence[str]) -> str:
    return hashlib.sha256("\x1f".join(parts).encode("utf-8")).hexdigest()[:12]


class MockGenerator:
    """Rule-table generator: the first rule whose keyword occurs in the prompt wins."""

    def __init__(self, rules: Sequence[tuple[str, str]], default: str) -> None:
        self.rules = list(rules)
        self.default = default
        self.calls: list[str] = []
        self._lock = threading.Lock()
        tag = _rules_tag([f"{k}=>{v}" for k, v in self.rules] + [default])
        self.identity = f"mock-generator-{tag}"

    def generate(self, prompt: PromptText) -> str:
        with self._lock:
            self.calls.append(prompt.text)
        for keyword, response in self.rules:
            if keyword in prompt.text:
                return response
        return self.default


class MockInfiller:
    """Substitution-table infiller with a seeded but stateless choice rule.

    The option picked for a masked prompt is a pure hash of (seed, masked
    text), so the same request always infills the same way. Spans without a
    table entry are deleted (empty infill), which downstream treats as a
    no-op perturbation.
    """

    def __init__(self, table: dict[str, Sequence[str]], seed: int = 0) -> None:
        self.table = {k: list(v) for k, v in table.items()}
        self.seed = seed
        self.calls: list[str] = []
        self._lock = threading.Lock()
        tag = _rules_tag([f"{k}=>{'|'.join(v)}" for k, v in sorted(self.table.items())])
        self.identity = f"mock-infiller-{tag}-s{seed}"

    def infill(self, masked: MaskedPrompt) -> str:
        with self._lock:
            self.calls.append(masked.text)
        options = self.table.get(masked.span_text)
        if not options:
            replacement = ""
        else:
            replacement = options[_stable_pick(self.seed, masked.text, len(options))]
        return normalize_text(masked.text.replace(MASK_TOKEN, replacement, 1))


class MockNliScorer:
    """Exact-pair NLI lookup; orderings are independent keys so mocks can be asymmetric."""

    def __init__(
        self,
        pairs: Optional[dict[tuple[str, str], tuple[float, float, float]]] = None,
        identical: tuple[float, float, float] = (0.9, 0.1, 0.0),
        default: tuple[float, float, float] = (0.7, 0.2, 0.1),
    ) -> None:
        self.pairs = dict(pairs or {})
        self.identical = identical
        self.default = default
        self.calls: list[tuple[str, str]] = []
        self._lock = threading.Lock()
        self.identity = f"mock-nli-{_rules_tag([repr(sorted(self.pairs.items())), repr(identical), repr(default)])}"

    def nli(self, premise: str, hypothesis: str) -> NliProbs:
        with self._lock:
            self.calls.append((premise, hypothesis))
        if premise == hypothesis:
            return NliProbs(*self.identical).validate()
        probs = self.pairs.get((premise, hypothesis), self.default)
        return NliProbs(*probs).validate()


class MockPreferenceScorer:
    """Pairwise preference table with complement consistency built in.

    P(a over b) comes from the table; the reversed pair answers 1 - p, so
    P(a over b) + P(b over a) = 1 holds for every pair. Identical responses
    score 0.5.
    """

    def __init__(
        self, pairs: Optional[dict[tuple[str, str], float]] = None, default: float = 0.5
    ) -> None:
        self.pairs = dict(pairs or {})
        self.default = default
        self.calls: list[tuple[str, str, str]] = []
        self._lock = threading.Lock()
        self.identity = f"mock-preference-{_rules_tag([repr(sorted(self.pairs.items())), repr(default)])}"

    def preference(self, context: str, response_a: str, response_b: str) -> float:
        with self._lock:
            self.calls.append((context, response_a, response_b))
        if response_a == response_b:
            return 0.5
        if (response_a, response_b) in self.pairs:
            return self.pairs[(response_a, response_b)]
        if (response_b, response_a) in self.pairs:
            return 1.0 - self.pairs[(response_b, response_a)]
        return self.default


class MockJudgeScorer:
    """Substring-rule judge; an optional value sequence is indexed by the call salt."""

    def __init__(
        self,
        rules: Optional[Sequence[tuple[str, float]]] = None,
        default: float = 0.5,
        sequence: Optional[Sequence[float]] = None,
    ) -> None:
        self.rules = list(rules or [])
        self.default = default
        self.sequence = list(sequence) if sequence else None
        self.calls: list[tuple[str, int]] = []
        self._lock = threading.Lock()
        self.identity = f"mock-judge-{_rules_tag([repr(self.rules), repr(default), repr(self.sequence)])}"

    def judge(self, conversation: str, rubric: str, salt: int = 0) -> float:
        with self._lock:
            self.calls.append((conversation, salt))
        if self.sequence:
            return self.sequence[salt % len(self.sequence)]
        for keyword, score in self.rules:
            if keyword in conversation:
                return score
        return self.default


class MockEmbedder:
    """Table-backed embedder; unknown texts get a stable hash-derived unit vector."""

    def __init__(self, vectors: Optional[dict[str, Sequence[float]]] = None, dim: int = 8) -> None:
        self.vectors = {k: tuple(v) for k, v in (vectors or {}).items()}
        self.dim = dim
        self.calls: list[str] = []
        self._lock = threading.Lock()
        self.identity = f"mock-embedder-{_rules_tag([repr(sorted(self.vectors.items())), str(dim)])}"

    def embed(self, text: str) -> tuple[float, ...]:
        with self._lock:
            self.calls.append(text)
        known = self.vectors.get(text)
        if known is not None:
            return known
        digest = hashlib.sha256(text.encode("utf-8")).digest()
        raw = [digest[i % len(digest)] / 255.0 - 0.5 for i in range(self.dim)]
        norm = sum(x * x for x in raw) ** 0.5 or 1.0
        return tuple(x / norm for x in raw)


class CachedGenerator:
    def __init__(self, inner: GeneratorClient, cache: ResponseCache) -> None:
        self.inner = inner
        self.cache = cache
        self.identity = inner.identity

    def generate(self, prompt: PromptText) -> str:
        fp = fingerprint({"op": "generate", "prompt": prompt.text})
        return self.cache.get_or_call(self.identity, fp, lambda: self.inner.generate(prompt))


class CachedInfiller:
    def __init__(self, inner: InfillerClient, cache: ResponseCache) -> None:
        self.inner = inner
        self.cache = cache
        self.identity = inner.identity

    def infill(self, masked: MaskedPrompt) -> str:
        fp = fingerprint(
            {"op": "infill", "text": masked.text, "index": masked.masked_index, "span": masked.span_text}
        )
        return self.cache.get_or_call(self.identity, fp, lambda: self.inner.infill(masked))


class CachedNliScorer:
    def __init__(self, inner: NliClient, cache: ResponseCache) -> None:
        self.inner = inner
        self.cache = cache
        self.identity = inner.identity

    def nli(self, premise: str, hypothesis: str) -> NliProbs:
        fp = fingerprint({"op": "nli", "premise": premise, "hypothesis": hypothesis})
        stored = self.cache.get_or_call(
            self.identity, fp, lambda: list(self.inner.nli(premise, hypothesis))
        )
        return NliProbs(*stored)


class CachedPreferenceScorer:
    def __init__(self, inner: PreferenceClient, cache: ResponseCache) -> None:
        self.inner = inner
        self.cache = cache
        self.identity = inner.identity

    def preference(self, context: str, response_a: str, response_b: str) -> float:
        fp = fingerprint({"op": "preference", "context": context, "a": response_a, "b": response_b})
        return self.cache.get_or_call(
            self.identity, fp, lambda: self.inner.preference(context, response_a, response_b)
        )


class CachedJudgeScorer:
    def __init__(self, inner: JudgeClient, cache: ResponseCache) -> None:
        self.inner = inner
        self.cache = cache
        self.identity = inner.identity

    def judge(self, conversation: str, rubric: str, salt: int = 0) -> float:
        fp = fingerprint({"op": "judge", "conversation": conversation, "rubric": rubric, "salt": salt})
        return self.cache.get_or_call(
            self.identity, fp, lambda: self.inner.judge(conversation, rubric, salt)
        )


class CachedEmbedder:
    def __init__(self, inner: EmbedderClient, cache: ResponseCache) -> None:
        self.inner = inner
        self.cache = cache
        self.identity = inner.identity

    def embed(self, text: str) -> tuple[float, ...]:
        fp = fingerprint({"op": "embed", "text": text})
        stored = self.cache.get_or_call(self.identity, fp, lambda: list(self.inner.embed(text)))
        return tuple(stored)


class GeneratorSession:
    """Budget-charging view of a generator for one search run.

    Charging is decided by the per-search memo, not by any transport cache
    below, so a warm disk cache changes network traffic but never the charged
    call count; records stay byte-identical across cold and warm runs.

    ``admit`` performs the charge/reservation bookkeeping without fetching;
    searches admit candidates sequentially in batch order (deterministic under
    any parallelism) and then fetch admitted prompts concurrently.
    """

    def __init__(self, generator: GeneratorClient, ledger: BudgetLedger) -> None:
        self._generator = generator
        self.ledger = ledger
        self._memo: dict[str, str] = {}
        self._lock = threading.Lock()

    def admit(self, prompt: PromptText) -> bool:
        if self.ledger.mode == MODE_MEMOIZED:
            with self._lock:
                known = prompt.text in self._memo
            if known:
                self.ledger.record_hit()
                return True
            return self.ledger.reserve()
        return self.ledger.reserve()

    def fetch(self, prompt: PromptText) -> str:
        with self._lock:
            cached = self._memo.get(prompt.text)
        if cached is not None:
            return cached
        response = self._generator.generate(prompt)
        with self._lock:
            self._memo[prompt.text] = response
        return response

    def generate(self, prompt: PromptText) -> str:
        """Admit-and-fetch in one step; raises when the budget refuses the call."""
        if not self.admit(prompt):
            raise BudgetExhaustedError("generator call budget exhausted")
        return self.fetch(prompt)
