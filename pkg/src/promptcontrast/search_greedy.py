"""Greedy full-scan contrast search.

Each pass masks and infills every remaining span of the current prompt,
scores every perturbation, and either returns the first threshold-meeting one
or continues from the best-scoring perturbation with that span consumed.

Worst-case generator traffic is one current-response call per pass plus one
call per remaining span: n + (n + (n-1) + ... + 1) requests for n spans. This
search is deliberately not bounded by the query budget; use the budgeted
search when calls are expensive.
"""
from __future__ import annotations

import hashlib
import time
from typing import Optional

from .clients import GeneratorClient, InfillerClient, GeneratorSession
from .errors import ClientError
from .metrics import ContrastMetric
from .perturb import perturb_candidate
from .scoring import (
    ScoredCandidate,
    finish_record,
    initial_indices,
    resolve_delta,
    score_candidates,
)
from .textops import split_tokens
from .types import (
    ANCHOR_CURRENT,
    BestTracker,
    BudgetLedger,
    Candidate,
    ExplanationRecord,
    FOUND_ERROR,
    FOUND_EXHAUSTED,
    FOUND_THRESHOLD,
    PromptText,
    SearchConfig,
)

ALGO_NAME = "myopic"


def _default_id(prompt: PromptText) -> str:
    return f"{ALGO_NAME}-{hashlib.sha256(prompt.text.encode('utf-8')).hexdigest()[:12]}"


def greedy_search(
    x0: PromptText,
    generator: GeneratorClient,
    infiller: InfillerClient,
    metric: ContrastMetric,
    config: SearchConfig,
    allowed_indices: Optional[frozenset[int]] = None,
    record_id: Optional[str] = None,
    trace: Optional[list] = None,
) -> ExplanationRecord:
    """Run the greedy search and return its explanation record.

    ``allowed_indices`` restricts which spans may ever be masked (1-indexed).
    ``trace`` collects per-perturbation events for conformance testing.
    """
    started = time.monotonic()
    record_id = record_id or _default_id(x0)
    split = split_tokens(x0, config.split_k)
    searchable = initial_indices(split, allowed_indices)
    anchor = config.anchor or ANCHOR_CURRENT
    delta = resolve_delta(config, metric)
    ledger = BudgetLedger(mode=config.budget_mode, budget=None)
    session = GeneratorSession(generator, ledger)

    current = Candidate(prompt=x0, remaining=searchable, score=None, provenance=())
    tracker: Optional[BestTracker] = None
    y0 = ""
    try:
        dropped: set[int] = set()
        skip_counts: dict[int, int] = {}
        pass_no = 0
        while True:
            effective = sorted(current.remaining - dropped)
            if not effective:
                break
            pass_no += 1
            y_current = session.generate(current.prompt)
            if tracker is None:
                # the first pass's current prompt is the original, so its
                # response doubles as the record's input response
                y0 = y_current
                tracker = BestTracker(x0, y0)
            batch: list[tuple[int, Candidate]] = []
            noops: list[int] = []
            for j in effective:
                child = perturb_candidate(current, split, j, infiller)
                if child is None:
                    noops.append(j)
                    if trace is not None:
                        trace.append({"event": "noop", "pass": pass_no, "span": j})
                else:
                    batch.append((j, child))
            if anchor == ANCHOR_CURRENT:
                anchor_prompt, anchor_response = current.prompt, y_current
            else:
                anchor_prompt, anchor_response = x0, y0
            scored, _ = score_candidates(
                [c for _, c in batch], session, metric, anchor_prompt, anchor_response,
                config.parallelism,
            )
            winner: Optional[ScoredCandidate] = None
            winner_j = -1
            for (j, _), sc in zip(batch, scored):
                tracker.offer(sc.candidate, sc.response, sc.score)
                if winner is None or sc.score > winner.score:
                    winner, winner_j = sc, j
                if trace is not None:
                    trace.append(
                        {"event": "score", "pass": pass_no, "span": j,
                         "prompt": sc.candidate.prompt.text, "score": sc.score}
                    )
            if winner is None:
                # a full pass of no-op infills; drop spans that never produce
                # a genuine perturbation so the search always terminates
                for j in noops:
                    skip_counts[j] = skip_counts.get(j, 0) + 1
                exhausted_spans = {j for j in noops if skip_counts[j] >= split.n_e}
                dropped |= exhausted_spans
                continue
            if trace is not None:
                trace.append(
                    {"event": "pick", "pass": pass_no, "span": winner_j, "score": winner.score}
                )
            skip_counts.clear()
            if winner.score >= delta:
                return finish_record(
                    record_id, ALGO_NAME, x0, y0, FOUND_THRESHOLD, winner, tracker,
                    config, metric, delta, ledger.n_b, started,
                )
            current = winner.candidate
        if tracker is None:
            # nothing was ever searchable; still report the input response
            y0 = session.generate(x0)
            tracker = BestTracker(x0, y0)
        return finish_record(
            record_id, ALGO_NAME, x0, y0, FOUND_EXHAUSTED, None, tracker,
            config, metric, delta, ledger.n_b, started,
        )
    except ClientError as exc:
        return finish_record(
            record_id, ALGO_NAME, x0, y0, FOUND_ERROR, None, tracker,
            config, metric, delta, ledger.n_b, started,
            error=f"{type(exc).__name__}: {exc}",
        )
