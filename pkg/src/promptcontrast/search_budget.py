"""Budget-limited contrast search with explore/exploit center scheduling.

Each outer iteration picks a center count from the budget-derived schedule,
seeds centers partly from the archive of already-scored perturbations
(exploit) and partly from fresh single-span perturbations of the original
prompt (explore), then runs a halving inner loop: sample around the centers,
score everything, keep the best half as the next centers with more samples
each. Scoring charges a hard ledger; the search returns the moment the ledger
refuses a call.

All logarithms in the schedule are base 2, consistent with the power-of-two
center counts and the halving step.
"""
from __future__ import annotations

import hashlib
import math
import random
import time
from typing import Optional, Sequence

from .clients import GeneratorClient, InfillerClient, GeneratorSession
from .errors import BudgetExhaustedError, ClientError, ConfigError
from .metrics import ContrastMetric
from .perturb import perturb_candidate
from .scoring import (
    ScoredCandidate,
    dedup_by_prompt,
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
    FOUND_BUDGET,
    FOUND_ERROR,
    FOUND_EXHAUSTED,
    FOUND_THRESHOLD,
    PromptText,
    ScheduleState,
    SearchConfig,
    SpanSplit,
)

ALGO_NAME = "budget"


def sampling_quota(budget: int) -> int:
    """q = floor(B / log2(B)): the per-outer-iteration sampling allowance."""
    return math.floor(budget / math.log2(budget))


def num_centers(t: int, budget: int) -> int:
    """Center count for outer iteration t: doubles while the quota affords it.

    Returns 2^(t+1) while (t+1) * 2^t fits inside the sampling quota and 2^t
    afterwards; nondecreasing in t for a fixed budget.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if budget < 2:
        raise ValueError("budget must be >= 2")
    q = sampling_quota(budget)
    if (t + 1) * 2**t <= q:
        return 2 ** (t + 1)
    return 2**t


def generate_centers(
    m: int,
    archive: Sequence[Candidate],
    index_pool: frozenset[int],
    alpha: float,
    root: Candidate,
    split: SpanSplit,
    infiller: InfillerClient,
    rng: random.Random,
) -> list[Candidate]:
    """Seed up to ``m`` unscored centers, balancing exploit vs explore by alpha.

    floor(alpha * m) parents are drawn without replacement from the archive
    entries that still have maskable spans; each contributes one child with
    one more span perturbed. The remainder masks fresh spans of the original
    prompt directly. Either pool may come up short; an empty result just
    advances the outer iteration.
    """
    eligible = [c for c in archive if c.remaining]
    m1 = min(math.floor(alpha * m), len(eligible))
    centers: list[Candidate] = []
    for parent in rng.sample(eligible, m1) if m1 > 0 else []:
        j = rng.choice(sorted(parent.remaining))
        child = perturb_candidate(parent, split, j, infiller)
        if child is not None:
            centers.append(child)
    m2 = min(m - m1, len(index_pool))
    for j in rng.sample(sorted(index_pool), m2) if m2 > 0 else []:
        child = perturb_candidate(root, split, j, infiller)
        if child is not None:
            centers.append(child)
    return dedup_by_prompt(centers)


def sample_centers(
    centers: Sequence[Candidate],
    split: SpanSplit,
    n_s: int,
    infiller: InfillerClient,
    rng: random.Random,
) -> list[Candidate]:
    """Children around every center plus the centers themselves.

    Each center contributes up to ``n_s`` children, masking distinct spans
    drawn without replacement from its remaining set (fewer when the set runs
    out). Duplicate prompts are dropped, keeping the first occurrence.
    """
    if n_s < 0:
        raise ValueError("n_s must be >= 0")
    out: list[Candidate] = []
    for center in centers:
        pool = sorted(center.remaining)
        for j in rng.sample(pool, min(n_s, len(pool))):
            child = perturb_candidate(center, split, j, infiller)
            if child is not None:
                out.append(child)
    out.extend(centers)
    return dedup_by_prompt(out)


def best_subset(scored: Sequence[ScoredCandidate], m: int) -> list[ScoredCandidate]:
    """Top-m by score, descending; ties keep insertion order."""
    ranked = sorted(scored, key=lambda sc: sc.score, reverse=True)
    return ranked[:m]


def _default_id(prompt: PromptText) -> str:
    return f"{ALGO_NAME}-{hashlib.sha256(prompt.text.encode('utf-8')).hexdigest()[:12]}"


def _threshold_winner(tracker: BestTracker, root: Candidate, y0: str) -> ScoredCandidate:
    # With delta <= 0 the threshold can be met before any candidate improves
    # on the initial zero score; the best pair is then the original itself.
    if tracker.best_candidate is not None:
        return ScoredCandidate(tracker.best_candidate, tracker.best_response, tracker.best_score)
    return ScoredCandidate(root, y0, tracker.best_score)


def budgeted_search(
    x0: PromptText,
    generator: GeneratorClient,
    infiller: InfillerClient,
    metric: ContrastMetric,
    config: SearchConfig,
    allowed_indices: Optional[frozenset[int]] = None,
    record_id: Optional[str] = None,
    trace: Optional[list] = None,
) -> ExplanationRecord:
    """Run the budgeted search and return its explanation record.

    Scores are always anchored to the original prompt and response; this
    search has no current-chain to anchor against.
    """
    if config.anchor == ANCHOR_CURRENT:
        raise ConfigError("the budgeted search only supports the original anchor")
    started = time.monotonic()
    record_id = record_id or _default_id(x0)
    split = split_tokens(x0, config.split_k)
    index_pool = initial_indices(split, allowed_indices)
    delta = resolve_delta(config, metric)
    ledger = BudgetLedger(mode=config.budget_mode, budget=config.budget)
    session = GeneratorSession(generator, ledger)
    rng = random.Random(config.seed)
    q = sampling_quota(config.budget)
    inner_rounds = max(1, math.ceil(math.log2(split.n_e)))
    root = Candidate(prompt=x0, remaining=index_pool, score=None, provenance=())

    tracker: Optional[BestTracker] = None
    y0 = ""
    try:
        y0 = session.generate(x0)
        tracker = BestTracker(x0, y0)
        archive: list[Candidate] = []
        archived_prompts: set[str] = set()
        for t in range(1, config.max_iters + 1):
            n_c = num_centers(t, config.budget)
            m = n_c
            centers = generate_centers(
                m, archive, index_pool, config.alpha, root, split, infiller, rng
            )
            if not centers:
                continue
            for inner_j in range(1, inner_rounds + 1):
                n_s = q // (m * max(1, math.ceil(math.log2(max(n_c, 2)))))
                samples = sample_centers(centers, split, n_s, infiller, rng)
                scored, truncated = score_candidates(
                    samples, session, metric, x0, y0, config.parallelism
                )
                for sc in scored:
                    tracker.offer(sc.candidate, sc.response, sc.score)
                    if sc.candidate.prompt.text not in archived_prompts:
                        archived_prompts.add(sc.candidate.prompt.text)
                        archive.append(sc.candidate)
                if trace is not None:
                    trace.append(
                        {
                            "event": "inner",
                            "state": ScheduleState(q=q, t=t, n_c=n_c, m=m, n_s=n_s, inner_j=inner_j),
                            "sampled": len(samples),
                            "scored": len(scored),
                            "archive_size": len(archive),
                            "n_b": ledger.n_b,
                        }
                    )
                if truncated or ledger.exhausted:
                    found = FOUND_THRESHOLD if tracker.best_score >= delta else FOUND_BUDGET
                    winner = _threshold_winner(tracker, root, y0) if found == FOUND_THRESHOLD else None
                    return finish_record(
                        record_id, ALGO_NAME, x0, y0, found, winner, tracker,
                        config, metric, delta, ledger.n_b, started,
                    )
                if tracker.best_score >= delta:
                    return finish_record(
                        record_id, ALGO_NAME, x0, y0, FOUND_THRESHOLD,
                        _threshold_winner(tracker, root, y0), tracker,
                        config, metric, delta, ledger.n_b, started,
                    )
                m = math.ceil(m / 2)
                centers = [sc.candidate for sc in best_subset(scored, m)]
                if not centers:
                    break
        return finish_record(
            record_id, ALGO_NAME, x0, y0, FOUND_EXHAUSTED, None, tracker,
            config, metric, delta, ledger.n_b, started,
        )
    except BudgetExhaustedError:
        return finish_record(
            record_id, ALGO_NAME, x0, y0, FOUND_BUDGET, None, tracker,
            config, metric, delta, ledger.n_b, started,
        )
    except ClientError as exc:
        return finish_record(
            record_id, ALGO_NAME, x0, y0, FOUND_ERROR, None, tracker,
            config, metric, delta, ledger.n_b, started,
            error=f"{type(exc).__name__}: {exc}",
        )
