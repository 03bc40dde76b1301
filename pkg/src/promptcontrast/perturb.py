"""Mask-and-infill perturbation: building child candidates from a parent.

The child prompt is reconstructed canonically from span surfaces rather than
taken verbatim from the infiller, so the span-join invariant holds exactly no
matter how the infiller formats whitespace.
"""
from __future__ import annotations

from typing import Optional

from .clients import InfillerClient
from .errors import MalformedResponseError
from .textops import MaskedPrompt, join_surfaces, mask, span_surfaces
from .types import MASK_TOKEN, Candidate, ModificationRecord, PromptText, SpanSplit, normalize_text


def extract_replacement(masked: MaskedPrompt, filled: str) -> str:
    """Pull the infilled text back out of the full filled string.

    The infiller contract is to replace only the mask token; if the words
    around the mask changed, the response is unusable.
    """
    if MASK_TOKEN in filled:
        raise MalformedResponseError("infill output still contains the mask token")
    prefix, suffix = masked.text.split(MASK_TOKEN)
    filled_words = normalize_text(filled).split()
    pre_words = prefix.split()
    suf_words = suffix.split()
    if len(filled_words) < len(pre_words) + len(suf_words):
        raise MalformedResponseError("infill output dropped words outside the mask")
    if filled_words[: len(pre_words)] != pre_words:
        raise MalformedResponseError("infill output rewrote words before the mask")
    if suf_words and filled_words[len(filled_words) - len(suf_words) :] != suf_words:
        raise MalformedResponseError("infill output rewrote words after the mask")
    middle = filled_words[len(pre_words) : len(filled_words) - len(suf_words)]
    return " ".join(middle)


def perturb_candidate(
    parent: Candidate,
    split: SpanSplit,
    j: int,
    infiller: InfillerClient,
) -> Optional[Candidate]:
    """Mask span ``j`` of ``parent``, infill it, and build the child candidate.

    Returns None for no-op infills (empty or unchanged replacement); the
    searches skip those without spending any generator budget.
    """
    masked = mask(parent.prompt, split, parent.provenance, j)
    filled = infiller.infill(masked)
    replacement = extract_replacement(masked, filled)
    if not replacement or replacement == masked.span_text:
        return None
    mod = ModificationRecord(
        span_index=j, original_text=split.spans[j - 1], replacement_text=replacement
    )
    provenance = parent.provenance + (mod,)
    text = join_surfaces(span_surfaces(split, provenance))
    prompt = PromptText(text)
    if prompt == parent.prompt:
        return None
    return Candidate(
        prompt=prompt,
        remaining=parent.remaining - {j},
        score=None,
        provenance=provenance,
    )
