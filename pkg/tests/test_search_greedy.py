import pytest

from promptcontrast import (
    FOUND_ERROR,
    FOUND_EXHAUSTED,
    FOUND_THRESHOLD,
    MockGenerator,
    MockInfiller,
    MockNliScorer,
    SearchConfig,
    contradiction_metric,
    greedy_search,
    normalize_prompt,
    preference_metric,
    MockPreferenceScorer,
)

from conftest import (
    RESPONSE_FLIPPED,
    RESPONSE_STEADY,
    make_constant_world,
    make_flip_world,
    make_trace_world,
)


class TestTraceConformance:
    """Step-by-step check against the hand-traced 3-span execution."""

    def run(self, mode="memoized"):
        world = make_trace_world()
        trace = []
        record = greedy_search(
            world.prompt,
            world.generator,
            world.infiller,
            world.metric,
            SearchConfig(delta=0.8, budget_mode=mode),
            trace=trace,
        )
        return record, trace

    def test_masked_index_and_score_sequence(self):
        record, trace = self.run()
        scores = [(e["pass"], e["span"], e["score"]) for e in trace if e["event"] == "score"]
        assert scores == [
            (1, 1, 0.0),
            (1, 2, pytest.approx(0.4)),
            (1, 3, pytest.approx(0.6)),
            (2, 1, 0.0),
            (2, 2, pytest.approx(0.9)),
        ]
        picks = [(e["pass"], e["span"]) for e in trace if e["event"] == "pick"]
        assert picks == [(1, 3), (2, 2)]

    def test_final_record(self):
        record, _ = self.run()
        assert record.found == FOUND_THRESHOLD
        assert record.score == pytest.approx(0.9)
        assert record.contrast_prompt.text == "the dog slept"
        assert record.contrast_response == "R_dog"
        assert record.input_response == "R_base"
        chain = [(m.span_index, m.original_text, m.replacement_text) for m in record.modifications]
        assert chain == [(3, "sat", "slept"), (2, "cat", "dog")]
        assert record.edit_distance == pytest.approx(2 / 3)

    def test_generator_call_accounting(self):
        memoized, _ = self.run("memoized")
        assert memoized.generator_calls == 6
        strict, _ = self.run("strict")
        # one current-response request per pass plus one per scored span
        assert strict.generator_calls == 7


class TestTieBreak:
    def test_smallest_index_wins(self):
        prompt = normalize_prompt("aa bb cc")
        infiller = MockInfiller({"aa": ["ax"], "bb": ["bx"], "cc": ["cx"]}, seed=0)
        generator = MockGenerator(
            rules=[("ax", "R_a"), ("bx", "R_b"), ("cx", "R_c")], default="R_0"
        )
        # spans 2 and 3 tie; span 1 is worse
        nli = MockNliScorer(
            pairs={
                ("R_0", "R_a"): (0.8, 0.1, 0.1),
                ("R_0", "R_b"): (0.3, 0.1, 0.6),
                ("R_0", "R_c"): (0.3, 0.1, 0.6),
            },
            default=(0.9, 0.1, 0.0),
        )
        trace = []
        record = greedy_search(
            prompt, generator, infiller, contradiction_metric(nli),
            SearchConfig(delta=0.95), trace=trace,
        )
        picks = [(e["pass"], e["span"]) for e in trace if e["event"] == "pick"]
        assert picks[0] == (1, 2)
        assert record.found == FOUND_EXHAUSTED

    def test_rerun_stability(self, trace_world):
        cfg = SearchConfig(delta=0.8)
        r1 = greedy_search(
            trace_world.prompt, trace_world.generator, trace_world.infiller,
            trace_world.metric, cfg,
        )
        world2 = make_trace_world()
        r2 = greedy_search(world2.prompt, world2.generator, world2.infiller, world2.metric, cfg)
        assert r1.to_json() == r2.to_json()


class TestOutcomes:
    def test_flip_world_first_pass(self, flip_world):
        record = greedy_search(
            flip_world.prompt, flip_world.generator, flip_world.infiller,
            flip_world.metric, SearchConfig(delta=0.5),
        )
        assert record.found == FOUND_THRESHOLD
        assert record.score == pytest.approx(1.0)
        assert len(record.modifications) == 1
        assert record.modifications[0].original_text == "signal"
        assert record.contrast_response == RESPONSE_FLIPPED
        assert record.edit_distance == pytest.approx(1 / 6)

    def test_delta_zero_returns_first_scored_winner(self, constant_world):
        trace = []
        record = greedy_search(
            constant_world.prompt, constant_world.generator, constant_world.infiller,
            constant_world.metric, SearchConfig(delta=0.0), trace=trace,
        )
        assert record.found == FOUND_THRESHOLD
        assert record.score == 0.0
        assert len(record.modifications) == 1
        assert len([e for e in trace if e["event"] == "pick"]) == 1

    def test_no_contrast_world_exhausts(self):
        world = make_constant_world(n_words=4)
        record = greedy_search(
            world.prompt, world.generator, world.infiller, world.metric,
            SearchConfig(delta=0.5),
        )
        assert record.found == FOUND_EXHAUSTED
        assert record.score == 0.0
        assert record.contrast_prompt is None
        assert record.contrast_response is None
        assert record.modifications == ()

    def test_constant_world_preference_reports_null(self):
        world = make_constant_world(n_words=4)
        metric = preference_metric(MockPreferenceScorer())
        record = greedy_search(
            world.prompt, world.generator, world.infiller, metric,
            SearchConfig(delta=0.9),
        )
        assert record.found == FOUND_EXHAUSTED
        assert record.score == 0.5

    def test_each_pass_consumes_exactly_one_span(self):
        world = make_constant_world(n_words=5)
        trace = []
        record = greedy_search(
            world.prompt, world.generator, world.infiller, world.metric,
            SearchConfig(delta=0.5), trace=trace,
        )
        picks = [e for e in trace if e["event"] == "pick"]
        assert len(picks) == 5
        by_pass = {}
        for e in trace:
            if e["event"] == "score":
                by_pass.setdefault(e["pass"], []).append(e["span"])
        # pass i scores exactly the remaining spans, in ascending order
        assert sorted(by_pass) == [1, 2, 3, 4, 5]
        assert len(by_pass[1]) == 5 and len(by_pass[5]) == 1
        for spans in by_pass.values():
            assert spans == sorted(spans)

    def test_threshold_met_implies_score_at_least_delta(self, flip_world):
        record = greedy_search(
            flip_world.prompt, flip_world.generator, flip_world.infiller,
            flip_world.metric, SearchConfig(delta=0.5),
        )
        assert record.found == FOUND_THRESHOLD and record.score >= record.delta


class TestNoopHandling:
    def test_all_noop_terminates_without_generator_calls(self):
        prompt = normalize_prompt("aa bb cc")
        infiller = MockInfiller({}, seed=0)  # deletes everything: all no-ops
        generator = MockGenerator(rules=[], default="R")
        nli = MockNliScorer()
        trace = []
        record = greedy_search(
            prompt, generator, infiller, contradiction_metric(nli),
            SearchConfig(delta=0.5), trace=trace,
        )
        assert record.found == FOUND_EXHAUSTED
        assert record.contrast_prompt is None
        # the current response is fetched, but no perturbation is ever scored
        assert all(e["event"] == "noop" for e in trace)

    def test_mixed_noops_still_flip(self):
        # only the magic span has a substitution; everything else deletes
        prompt = normalize_prompt("aa signal cc dd")
        infiller = MockInfiller({"signal": ["flipped"]}, seed=0)
        generator = MockGenerator(rules=[("flipped", RESPONSE_FLIPPED)], default=RESPONSE_STEADY)
        nli = MockNliScorer(pairs={(RESPONSE_STEADY, RESPONSE_FLIPPED): (0.0, 0.0, 1.0)})
        record = greedy_search(
            prompt, generator, infiller, contradiction_metric(nli), SearchConfig(delta=0.5)
        )
        assert record.found == FOUND_THRESHOLD
        assert record.generator_calls == 2  # the original plus the single real candidate


class TestAnchorModes:
    def test_original_anchor_scores_against_input(self):
        # with the original anchor, pass-2 scores compare against R_base, not
        # the chain head's response
        world = make_trace_world()
        trace = []
        record = greedy_search(
            world.prompt, world.generator, world.infiller, world.metric,
            SearchConfig(delta=0.8, anchor="original"), trace=trace,
        )
        pass2 = [(e["span"], e["score"]) for e in trace if e["event"] == "score" and e["pass"] == 2]
        # "the dog slept" vs R_base reads the (R_base, R_dog) entry: 0.4
        assert (2, pytest.approx(0.4)) in pass2
        assert record.found == FOUND_EXHAUSTED

    def test_restricted_indices(self):
        world = make_flip_world(n_words=6, magic_pos=2)
        allowed = frozenset({1, 2})  # excludes the magic span (index 3)
        record = greedy_search(
            world.prompt, world.generator, world.infiller, world.metric,
            SearchConfig(delta=0.5), allowed_indices=allowed,
        )
        assert record.found == FOUND_EXHAUSTED
        assert all(m.span_index in allowed for m in record.modifications)


class TestErrorHandling:
    def test_client_error_yields_error_record(self):
        class FailingGenerator:
            identity = "boom"

            def generate(self, prompt):
                from promptcontrast import NetworkError

                raise NetworkError("endpoint down")

        world = make_trace_world()
        record = greedy_search(
            world.prompt, FailingGenerator(), world.infiller, world.metric, SearchConfig()
        )
        assert record.found == FOUND_ERROR
        assert "endpoint down" in record.error
