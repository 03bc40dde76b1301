"""Shared mock worlds for the search tests.

Each world is a small closed universe: an infiller substitution table, a
rule-table generator, and an NLI table wired so specific perturbations flip
the generator into a canned contradicting response.
"""
from dataclasses import dataclass

import pytest

from promptcontrast import (
    ContrastMetric,
    MockGenerator,
    MockInfiller,
    MockNliScorer,
    PromptText,
    contradiction_metric,
    normalize_prompt,
)

BASE_WORDS = [
    "amber", "birch", "cedar", "dusty", "ember", "frost",
    "gleam", "haven", "ionic", "jolly", "koala", "lunar",
]

RESPONSE_STEADY = "the committee kept its original schedule"
RESPONSE_FLIPPED = "the committee scrapped the schedule entirely"


@dataclass
class MockWorld:
    prompt: PromptText
    generator: MockGenerator
    infiller: MockInfiller
    nli: MockNliScorer
    metric: ContrastMetric


def make_flip_world(n_words: int = 6, magic_pos: int = 0, seed: int = 0) -> MockWorld:
    """One word is magic: infilling it flips the generator into a contradiction.

    Every other word has a harmless substitution so searches still burn real
    generator calls while hunting for the magic span.
    """
    assert 1 <= n_words <= len(BASE_WORDS)
    assert 0 <= magic_pos < n_words
    words = BASE_WORDS[:n_words]
    words[magic_pos] = "signal"
    prompt = normalize_prompt(" ".join(words))
    table = {w: [w + "x"] for w in BASE_WORDS[:n_words]}
    table["signal"] = ["flipped"]
    generator = MockGenerator(rules=[("flipped", RESPONSE_FLIPPED)], default=RESPONSE_STEADY)
    infiller = MockInfiller(table, seed=seed)
    nli = MockNliScorer(
        pairs={(RESPONSE_STEADY, RESPONSE_FLIPPED): (0.0, 0.0, 1.0)},
        identical=(0.9, 0.1, 0.0),
        default=(0.7, 0.2, 0.1),
    )
    return MockWorld(prompt, generator, infiller, nli, contradiction_metric(nli))


def make_constant_world(n_words: int = 12, seed: int = 0) -> MockWorld:
    """Every span can be perturbed but the generator never changes its answer."""
    assert 1 <= n_words <= len(BASE_WORDS)
    words = BASE_WORDS[:n_words]
    prompt = normalize_prompt(" ".join(words))
    table = {w: [w + "x"] for w in words}
    generator = MockGenerator(rules=[], default=RESPONSE_STEADY)
    infiller = MockInfiller(table, seed=seed)
    nli = MockNliScorer(identical=(0.9, 0.1, 0.0), default=(0.7, 0.2, 0.1))
    return MockWorld(prompt, generator, infiller, nli, contradiction_metric(nli))


def make_trace_world() -> MockWorld:
    """The 3-span world used for step-by-step conformance checks.

    Hand-traced behaviour at delta 0.8, current-anchored greedy search:
    pass 1 scores spans 1..3 at 0.0, 0.4, 0.6 and consumes span 3; pass 2
    scores spans 1..2 at 0.0, 0.9 and meets the threshold on span 2.
    """
    prompt = normalize_prompt("the cat sat")
    infiller = MockInfiller({"the": ["a"], "cat": ["dog"], "sat": ["slept"]}, seed=0)
    generator = MockGenerator(
        rules=[("dog", "R_dog"), ("slept", "R_slept")], default="R_base"
    )
    nli = MockNliScorer(
        pairs={
            ("R_base", "R_dog"): (0.5, 0.1, 0.4),
            ("R_base", "R_slept"): (0.3, 0.1, 0.6),
            ("R_slept", "R_dog"): (0.05, 0.05, 0.9),
        },
        identical=(0.9, 0.1, 0.0),
        default=(0.7, 0.2, 0.1),
    )
    return MockWorld(prompt, generator, infiller, nli, contradiction_metric(nli))


@pytest.fixture
def flip_world() -> MockWorld:
    return make_flip_world()


@pytest.fixture
def constant_world() -> MockWorld:
    return make_constant_world()


@pytest.fixture
def trace_world() -> MockWorld:
    return make_trace_world()
