"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. Tolerances and limits are pinned here, not configurable.
"""
import json
import random
import time

import pytest

from promptcontrast import (
    FOUND_BUDGET,
    FOUND_EXHAUSTED,
    FOUND_THRESHOLD,
    MockJudgeScorer,
    MockNliScorer,
    MockPreferenceScorer,
    ResponseCache,
    CachedGenerator,
    CachedInfiller,
    CachedNliScorer,
    SearchConfig,
    bleu,
    bleu_composite_metric,
    budgeted_search,
    contradiction_metric,
    greedy_search,
    normalize_prompt,
    num_centers,
    preference_metric,
    rubric_judge_metric,
    word_levenshtein,
)
from promptcontrast.cli import main

from conftest import make_constant_world, make_flip_world, make_trace_world
from test_cli import flip_config, flip_prompt, write_batch_input
from test_textops import oracle_levenshtein

X0 = normalize_prompt("anchor prompt for metric checks")
XC = normalize_prompt("anchor prompt for metric tests")


def report(n: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {n:2d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_criterion_1_schedule_conformance():
    started = time.monotonic()
    expected = {1: 4, 2: 8, 3: 8, 4: 16}
    actual = {t: num_centers(t, 100) for t in expected}
    elapsed = time.monotonic() - started
    report(
        1,
        actual == expected and elapsed < 1.0,
        f"num_centers(t, B=100) = {actual}, expected {expected}, {elapsed:.3f}s < 1s",
    )


def test_criterion_2_budget_safety():
    started = time.monotonic()
    violations = 0
    for seed in range(1000):
        world = make_constant_world(n_words=12)
        record = budgeted_search(
            world.prompt, world.generator, world.infiller, world.metric,
            SearchConfig(delta=0.5, budget=20, budget_mode="strict", seed=seed),
        )
        if record.generator_calls > 20:
            violations += 1
        world = make_constant_world(n_words=12)
        budgeted_search(
            world.prompt, world.generator, world.infiller, world.metric,
            SearchConfig(delta=0.5, budget=20, budget_mode="memoized", seed=seed),
        )
        if len(set(world.generator.calls)) > 20:
            violations += 1
    elapsed = time.monotonic() - started
    report(
        2,
        violations == 0 and elapsed < 30.0,
        f"0 required, {violations} violations over 1000 seeds x 2 modes (B=20), {elapsed:.1f}s < 30s",
    )


def test_criterion_3_flip_completeness():
    started = time.monotonic()
    flips = 0
    edits = []
    for i in range(50):
        world = make_flip_world(n_words=6, magic_pos=i % 6)
        record = greedy_search(
            world.prompt, world.generator, world.infiller, world.metric,
            SearchConfig(delta=0.5),
        )
        flips += record.found == FOUND_THRESHOLD
        edits.append(record.edit_distance)
    greedy_rate = flips / 50
    mean_edit = sum(edits) / len(edits)

    budget_hits = budget_total = 0
    for seed in range(20):
        for i in range(50):
            world = make_flip_world(n_words=6, magic_pos=i % 6)
            record = budgeted_search(
                world.prompt, world.generator, world.infiller, world.metric,
                SearchConfig(delta=0.5, budget=30, seed=seed),
            )
            budget_total += 1
            budget_hits += record.found == FOUND_THRESHOLD
    budget_rate = budget_hits / budget_total
    elapsed = time.monotonic() - started
    report(
        3,
        greedy_rate == 1.0 and mean_edit <= 0.2 and budget_rate >= 0.95 and elapsed < 10.0,
        f"greedy flip rate {greedy_rate:.2f} (need 1.00), mean edit {mean_edit:.3f} (need <= 0.2), "
        f"budget flip rate {budget_rate:.3f} over 20 seeds (need >= 0.95), {elapsed:.1f}s < 10s",
    )


def test_criterion_4_levenshtein_oracle_equivalence():
    started = time.monotonic()
    rng = random.Random(12345)
    vocab = ["v0", "v1", "v2", "v3", "v4"]
    mismatches = 0
    for _ in range(10_000):
        a = [rng.choice(vocab) for _ in range(rng.randint(0, 20))]
        b = [rng.choice(vocab) for _ in range(rng.randint(0, 20))]
        raw, _ = word_levenshtein(" ".join(a), " ".join(b))
        if raw != oracle_levenshtein(a, b):
            mismatches += 1
    elapsed = time.monotonic() - started
    report(
        4,
        mismatches == 0 and elapsed < 10.0,
        f"{mismatches} mismatches over 10000 random pairs vs DP oracle, {elapsed:.1f}s < 10s",
    )


def test_criterion_5_bleu_checks():
    rng = random.Random(777)
    vocab = ["w0", "w1", "w2", "w3", "w4", "w5"]
    worst = 0.0
    for _ in range(100):
        s = " ".join(rng.choice(vocab) for _ in range(rng.randint(4, 16)))
        worst = max(worst, abs(bleu(s, s) - 1.0))
    case_a = abs(bleu("a b c d", "a b c") - 0.7165313105737893)
    case_b = abs(bleu("the cat sat on the mat", "completely different words here now ok") - 0.0)
    report(
        5,
        worst <= 1e-9 and case_a <= 1e-9 and case_b <= 1e-9,
        f"bleu(s,s) max |err| {worst:.2e}, brevity-penalty case |err| {case_a:.2e}, "
        f"disjoint case |err| {case_b:.2e} (all <= 1e-9)",
    )


def test_criterion_6_determinism(tmp_path, capsys):
    config = flip_config(tmp_path, cache_path="cache.jsonl")
    rows = [{"id": f"r{i}", "prompt": flip_prompt(i % 6)} for i in range(5)]
    inp = write_batch_input(tmp_path, rows)
    outs = []
    for run in (1, 2):
        out = str(tmp_path / f"run{run}.jsonl")
        code = main(
            ["batch", "--input", inp, "--config", config, "--out", out,
             "--algo", "budget", "--parallelism", "3"]
        )
        assert code == 0
        with open(out, "rb") as fh:
            outs.append(fh.read())
    capsys.readouterr()
    report(
        6,
        outs[0] == outs[1] and len(outs[0]) > 0,
        f"two parallel (3-worker) runs produced byte-identical JSONL ({len(outs[0])} bytes)",
    )


def test_criterion_7_cache_contract(tmp_path):
    cache_path = str(tmp_path / "cache.jsonl")
    prompts = [flip_prompt(i) for i in range(3)]

    def run_batch():
        world = make_flip_world(n_words=6, magic_pos=0)
        cache = ResponseCache(cache_path)
        generator = CachedGenerator(world.generator, cache)
        infiller = CachedInfiller(world.infiller, cache)
        nli = CachedNliScorer(world.nli, cache)
        metric = contradiction_metric(nli)
        for i, text in enumerate(prompts):
            budgeted_search(
                normalize_prompt(text), generator, infiller, metric,
                SearchConfig(delta=0.5, budget=30, seed=i),
            )
        return world

    run_batch()
    warm_world = run_batch()
    transport_calls = (
        len(warm_world.generator.calls)
        + len(warm_world.infiller.calls)
        + len(warm_world.nli.calls)
    )
    report(
        7,
        transport_calls == 0,
        f"warm-cache rerun issued {transport_calls} transport calls (generator + infiller + nli); need 0",
    )


def test_criterion_8_myopic_trace_conformance():
    world = make_trace_world()
    trace = []
    record = greedy_search(
        world.prompt, world.generator, world.infiller, world.metric,
        SearchConfig(delta=0.8), trace=trace,
    )
    scores = [(e["pass"], e["span"], round(e["score"], 6)) for e in trace if e["event"] == "score"]
    picks = [(e["pass"], e["span"]) for e in trace if e["event"] == "pick"]
    hand_scores = [(1, 1, 0.0), (1, 2, 0.4), (1, 3, 0.6), (2, 1, 0.0), (2, 2, 0.9)]
    hand_picks = [(1, 3), (2, 2)]
    record_ok = (
        record.found == FOUND_THRESHOLD
        and record.score == pytest.approx(0.9)
        and record.contrast_prompt.text == "the dog slept"
        and record.contrast_response == "R_dog"
        and [(m.span_index, m.original_text, m.replacement_text) for m in record.modifications]
        == [(3, "sat", "slept"), (2, "cat", "dog")]
    )
    report(
        8,
        scores == hand_scores and picks == hand_picks and record_ok,
        f"masked/scored sequence {scores} and picks {picks} match the hand trace; "
        f"final record matches (smallest-index tie-break included)",
    )


def test_criterion_9_metric_range_property():
    rng = random.Random(424242)
    failures = 0
    asymmetries = 0
    for _ in range(1000):
        y0 = " ".join(rng.choice("abcde") for _ in range(rng.randint(1, 6)))
        yc = " ".join(rng.choice("abcde") for _ in range(rng.randint(1, 6)))

        def probs():
            cuts = sorted((rng.random(), rng.random()))
            return (cuts[0], cuts[1] - cuts[0], 1.0 - cuts[1])

        nli = MockNliScorer(
            pairs={(y0, yc): probs(), (yc, y0): probs()}, identical=probs(), default=probs()
        )
        pref = MockPreferenceScorer(pairs={(y0, yc): rng.random()}, default=rng.random())
        judge = MockJudgeScorer(sequence=[rng.random() for _ in range(3)])
        metrics = [
            contradiction_metric(nli),
            preference_metric(pref),
            bleu_composite_metric(),
            rubric_judge_metric(judge, rubric="r", repeats=2),
        ]
        for metric in metrics:
            if not 0.0 <= metric.score(X0, XC, y0, yc) <= 1.0:
                failures += 1
        contra = contradiction_metric(nli)
        if contra.score(X0, XC, y0, yc) != contra.score(X0, XC, yc, y0):
            asymmetries += 1
    report(
        9,
        failures == 0 and asymmetries == 0,
        f"{failures} out-of-range scores and {asymmetries} contradiction asymmetries "
        f"over 1000 randomized scorer outputs (need 0 and 0)",
    )


def test_criterion_10_no_contrast_behavior():
    checks = []
    world = make_constant_world(n_words=4)
    greedy_contra = greedy_search(
        world.prompt, world.generator, world.infiller, world.metric, SearchConfig(delta=0.5)
    )
    checks.append(greedy_contra.found == FOUND_EXHAUSTED and greedy_contra.score == 0.0)
    # greedy worst case for 4 spans: 4 current-response requests + 4+3+2+1 scores
    checks.append(greedy_contra.generator_calls <= 14)

    world = make_constant_world(n_words=4)
    pref_metric = preference_metric(MockPreferenceScorer())
    greedy_pref = greedy_search(
        world.prompt, world.generator, world.infiller, pref_metric, SearchConfig(delta=0.9)
    )
    checks.append(greedy_pref.found == FOUND_EXHAUSTED and greedy_pref.score == 0.5)

    world = make_constant_world(n_words=12)
    budget_contra = budgeted_search(
        world.prompt, world.generator, world.infiller, world.metric,
        SearchConfig(delta=0.5, budget=20, seed=0),
    )
    checks.append(
        budget_contra.found in (FOUND_BUDGET, FOUND_EXHAUSTED)
        and budget_contra.score == 0.0
        and budget_contra.generator_calls <= 20
    )

    world = make_constant_world(n_words=12)
    budget_pref = budgeted_search(
        world.prompt, world.generator, world.infiller, pref_metric,
        SearchConfig(delta=0.9, budget=20, seed=0),
    )
    checks.append(
        budget_pref.found in (FOUND_BUDGET, FOUND_EXHAUSTED)
        and budget_pref.score == 0.5
        and budget_pref.generator_calls <= 20
    )
    report(
        10,
        all(checks),
        "constant generator: both searches end without threshold_met, scores sit at the "
        f"metric null values (0.0 contradiction, 0.5 preference), calls within bounds {checks}",
    )
