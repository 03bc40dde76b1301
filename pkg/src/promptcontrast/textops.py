"""Pure text kernels: span splitting, masking, edit distance, BLEU, diffs.

Everything here is a pure function of its arguments and safe for unrestricted
parallel use.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import DuplicateSpanError, IndexNotRemainingError, PromptContrastError
from .types import MASK_TOKEN, ModificationRecord, PromptText, SpanSplit


@dataclass(frozen=True)
class MaskedPrompt:
    """A prompt with exactly one span replaced by the mask token.

    ``span_text`` is the surface text the mask displaced; re-inserting it at
    the mask position reproduces the parent prompt.
    """

    text: str
    masked_index: int
    span_text: str


def split_tokens(prompt: PromptText, split_k: int) -> SpanSplit:
    """Group the prompt's words left to right into spans of ``split_k`` words.

    The final span holds the remainder (between 1 and split_k words).
    """
    if split_k < 1:
        raise ValueError("split_k must be >= 1")
    words = prompt.words
    spans = tuple(" ".join(words[i : i + split_k]) for i in range(0, len(words), split_k))
    return SpanSplit(spans=spans, split_k=split_k)


def span_surfaces(split: SpanSplit, provenance: Sequence[ModificationRecord]) -> list[str]:
    """Current surface text per span: replacements where perturbed, else originals."""
    surfaces = list(split.spans)
    seen: set[int] = set()
    for mod in provenance:
        if mod.span_index in seen:
            raise DuplicateSpanError(f"span {mod.span_index} perturbed twice")
        if not 1 <= mod.span_index <= split.n_e:
            raise ValueError(f"span index {mod.span_index} outside [1, {split.n_e}]")
        seen.add(mod.span_index)
        surfaces[mod.span_index - 1] = mod.replacement_text
    return surfaces


def join_surfaces(surfaces: Iterable[str]) -> str:
    """Join span surfaces with single spaces, dropping deleted (empty) spans."""
    return " ".join(s for s in surfaces if s)


def mask(
    candidate_prompt: PromptText,
    split: SpanSplit,
    provenance: Sequence[ModificationRecord],
    j: int,
) -> MaskedPrompt:
    """Replace span ``j``'s current surface text with the mask token.

    ``j`` must not have been perturbed yet; spans leave the searchable set the
    moment they are replaced, so the surface under the mask is always the
    original span text.
    """
    if any(mod.span_index == j for mod in provenance):
        raise IndexNotRemainingError(f"span {j} was already perturbed")
    if not 1 <= j <= split.n_e:
        raise ValueError(f"span index {j} outside [1, {split.n_e}]")
    surfaces = span_surfaces(split, provenance)
    if join_surfaces(surfaces) != candidate_prompt.text:
        raise PromptContrastError(
            "provenance does not reconstruct the candidate prompt; "
            "split/provenance drifted from the prompt text"
        )
    span_text = surfaces[j - 1]
    surfaces[j - 1] = MASK_TOKEN
    return MaskedPrompt(text=join_surfaces(surfaces), masked_index=j, span_text=span_text)


def _words(text: Union[str, PromptText]) -> list[str]:
    raw = text.text if isinstance(text, PromptText) else text
    return raw.split()


def word_levenshtein(a: Union[str, PromptText], b: Union[str, PromptText]) -> tuple[int, float]:
    """Word-level edit distance between two texts.

    Returns ``(raw, normalized)`` where raw counts the minimum word
    insertions, deletions, and substitutions turning ``a`` into ``b`` and
    normalized divides by ``a``'s word count (1 when ``a`` is empty).
    """
    wa, wb = _words(a), _words(b)
    prev = list(range(len(wb) + 1))
    for i, word_a in enumerate(wa, start=1):
        cur = [i] + [0] * len(wb)
        for j, word_b in enumerate(wb, start=1):
            cost = 0 if word_a == word_b else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    raw = prev[len(wb)]
    return raw, raw / max(1, len(wa))


def _ngram_counts(words: Sequence[str], n: int) -> Counter:
    return Counter(tuple(words[i : i + n]) for i in range(len(words) - n + 1))


def bleu(reference: str, hypothesis: str) -> float:
    """Sentence BLEU over whitespace words, n-grams up to 4.

    Modified precisions use add-one smoothing for n >= 2 (numerator and
    denominator), which keeps identical sentences at exactly 1.0 while
    avoiding the degenerate zero unsmoothed BLEU gives short single
    sentences. Unigram precision is unsmoothed, so fully disjoint texts
    score 0.
    """
    ref = reference.split()
    hyp = hypothesis.split()
    if not ref or not hyp:
        raise ValueError("bleu requires non-empty reference and hypothesis")
    log_sum = 0.0
    for n in range(1, 5):
        hyp_counts = _ngram_counts(hyp, n)
        ref_counts = _ngram_counts(ref, n)
        total = sum(hyp_counts.values())
        clipped = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
        if n == 1:
            if clipped == 0:
                return 0.0
            precision = clipped / total
        else:
            precision = (clipped + 1) / (total + 1)
        log_sum += math.log(precision)
    c, r = len(hyp), len(ref)
    brevity = 1.0 if c > r else math.exp(1 - r / c)
    return brevity * math.exp(log_sum / 4)


def diff_modifications(
    split: SpanSplit, provenance: Sequence[ModificationRecord]
) -> list[tuple[str, str]]:
    """(original, replacement) pairs ordered by span index.

    Raises DuplicateSpanError if the provenance chain violates the
    one-perturbation-per-span contract.
    """
    seen: set[int] = set()
    for mod in provenance:
        if mod.span_index in seen:
            raise DuplicateSpanError(f"span {mod.span_index} appears twice")
        seen.add(mod.span_index)
    ordered = sorted(provenance, key=lambda m: m.span_index)
    return [(m.original_text, m.replacement_text) for m in ordered]
