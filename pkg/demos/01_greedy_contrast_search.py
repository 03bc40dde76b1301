"""Walk through the greedy contrast search on a small closed mock world.

The world is wired so that replacing one specific word flips the generator
into a response that contradicts the original one. The greedy search masks
and infills every remaining span each pass, scores all perturbations, and
keeps digging from the best one until the contradiction threshold is met.
"""
from promptcontrast import (
    MockGenerator,
    MockInfiller,
    MockNliScorer,
    SearchConfig,
    contradiction_metric,
    greedy_search,
    normalize_prompt,
)
from promptcontrast.cli import render_human

# ---------------------------------------------------------------------------
# 1. A tiny universe: one generator, one infiller, one NLI scorer.
# ---------------------------------------------------------------------------
# The generator answers "R_base" unless the prompt mentions a dog or sleeping.
generator = MockGenerator(
    rules=[("dog", "the dog chased the ball outside"),
           ("slept", "everyone stayed quiet and rested")],
    default="the cat watched the garden all day",
)

# The infiller proposes one replacement per maskable span.
infiller = MockInfiller({"the": ["a"], "cat": ["dog"], "sat": ["slept"]}, seed=0)

# The NLI table says which canned responses contradict which: drifting from
# the original response alone never crosses the 0.8 threshold, but the pair
# reached after two perturbations does.
nli = MockNliScorer(
    pairs={
        ("the cat watched the garden all day", "the dog chased the ball outside"): (0.4, 0.2, 0.4),
        ("the cat watched the garden all day", "everyone stayed quiet and rested"): (0.2, 0.2, 0.6),
        ("everyone stayed quiet and rested", "the dog chased the ball outside"): (0.0, 0.1, 0.9),
    },
    identical=(0.9, 0.1, 0.0),
    default=(0.7, 0.2, 0.1),
)
metric = contradiction_metric(nli)

# ---------------------------------------------------------------------------
# 2. Run the search and watch each pass.
# ---------------------------------------------------------------------------
prompt = normalize_prompt("the cat sat")
trace = []
record = greedy_search(
    prompt, generator, infiller, metric,
    SearchConfig(delta=0.8, metric_id="contradiction"),
    trace=trace,
)

print("Per-perturbation trace:")
for event in trace:
    if event["event"] == "score":
        print(f"  pass {event['pass']}: span {event['span']} -> "
              f"{event['prompt']!r} scored {event['score']:.2f}")
    elif event["event"] == "pick":
        print(f"  pass {event['pass']}: best perturbation is span {event['span']} "
              f"(score {event['score']:.2f})")

# ---------------------------------------------------------------------------
# 3. The explanation record.
# ---------------------------------------------------------------------------
print()
print(render_human(record))
print()
print("As JSONL row:")
print(record.to_json())
