"""Shared machinery for the two searches: batch scoring and record assembly."""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .clients import GeneratorSession
from .metrics import ContrastMetric
from .textops import word_levenshtein
from .types import (
    BestTracker,
    Candidate,
    ExplanationRecord,
    FOUND_ERROR,
    FOUND_THRESHOLD,
    PromptText,
    SearchConfig,
    SpanSplit,
)


@dataclass(frozen=True)
class ScoredCandidate:
    candidate: Candidate
    response: str
    score: float


def resolve_delta(config: SearchConfig, metric: ContrastMetric) -> float:
    return metric.default_delta if config.delta is None else config.delta


def initial_indices(split: SpanSplit, allowed: Optional[frozenset[int]]) -> frozenset[int]:
    """The searchable index set: all spans, optionally restricted to ``allowed``."""
    indices = split.all_indices()
    if allowed is None:
        return indices
    if not allowed <= indices:
        raise ValueError("allowed indices must be a subset of the span indices")
    return frozenset(allowed)


def dedup_by_prompt(candidates: Sequence[Candidate]) -> list[Candidate]:
    seen: set[str] = set()
    out: list[Candidate] = []
    for cand in candidates:
        if cand.prompt.text in seen:
            continue
        seen.add(cand.prompt.text)
        out.append(cand)
    return out


def score_candidates(
    candidates: Sequence[Candidate],
    session: GeneratorSession,
    metric: ContrastMetric,
    anchor_prompt: PromptText,
    anchor_response: str,
    parallelism: int,
) -> tuple[list[ScoredCandidate], bool]:
    """Generate responses and metric scores for a batch of candidates.

    Budget admission runs sequentially in batch order before anything is
    dispatched, so which candidates run is independent of thread scheduling;
    only the response/score fetches themselves are parallel. Returns admitted
    candidates in input order plus whether the budget cut the batch short.
    """
    admitted: list[Candidate] = []
    truncated = False
    for cand in candidates:
        if not session.admit(cand.prompt):
            truncated = True
            break
        admitted.append(cand)

    def run_one(cand: Candidate) -> ScoredCandidate:
        response = session.fetch(cand.prompt)
        score = metric.score(anchor_prompt, cand.prompt, anchor_response, response)
        return ScoredCandidate(replace(cand, score=score), response, score)

    if parallelism > 1 and len(admitted) > 1:
        with ThreadPoolExecutor(max_workers=min(parallelism, len(admitted))) as pool:
            scored = list(pool.map(run_one, admitted))
    else:
        scored = [run_one(cand) for cand in admitted]
    return scored, truncated


def elapsed_ms(started: float) -> int:
    return int((time.monotonic() - started) * 1000)


def finish_record(
    record_id: str,
    algo: str,
    x0: PromptText,
    y0: str,
    found: str,
    winner: Optional[ScoredCandidate],
    tracker: Optional[BestTracker],
    config: SearchConfig,
    metric: ContrastMetric,
    delta: float,
    generator_calls: int,
    started: float,
    error: Optional[str] = None,
) -> ExplanationRecord:
    """Assemble the output record from the winning candidate or the tracker.

    A contrast is reported for threshold hits and whenever the tracker
    improved on the initial zero score; otherwise the contrast fields stay
    absent and the score falls back to the best seen (0 when nothing scored).
    """
    if found == FOUND_THRESHOLD and winner is not None:
        contrast: Optional[Candidate] = winner.candidate
        contrast_response: Optional[str] = winner.response
        score = winner.score
    elif tracker is not None and tracker.improved:
        contrast = tracker.best_candidate
        contrast_response = tracker.best_response
        score = tracker.best_score
    else:
        contrast = None
        contrast_response = None
        score = tracker.best_score if tracker is not None else 0.0
    if contrast is not None:
        _, edit = word_levenshtein(x0, contrast.prompt)
        modifications = contrast.provenance
    else:
        edit = 0.0
        modifications = ()
    return ExplanationRecord(
        id=record_id,
        input_prompt=x0,
        input_response=y0,
        contrast_prompt=contrast.prompt if contrast else None,
        contrast_response=contrast_response,
        score=score,
        found=found,
        modifications=modifications,
        generator_calls=generator_calls,
        elapsed_ms=elapsed_ms(started),
        edit_distance=edit,
        metric_id=metric.metric_id,
        delta=delta,
        algo=algo,
        config=config,
        error=error,
    )
