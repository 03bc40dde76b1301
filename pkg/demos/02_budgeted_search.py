"""The budgeted search: explore/exploit centers under a hard query cap.

Where the greedy search happily spends O(n^2) generator calls, the budgeted
search never charges more than its budget. This demo shows the center
schedule, the halving inner loop, and both budget accounting modes.
"""
from promptcontrast import (
    MockGenerator,
    MockInfiller,
    MockNliScorer,
    SearchConfig,
    budgeted_search,
    contradiction_metric,
    normalize_prompt,
    num_centers,
    sampling_quota,
)

# ---------------------------------------------------------------------------
# 1. The sampling schedule, before any search runs.
# ---------------------------------------------------------------------------
budget = 100
print(f"budget B = {budget}, sampling quota q = floor(B / log2(B)) = {sampling_quota(budget)}")
for t in range(1, 6):
    print(f"  outer iteration {t}: {num_centers(t, budget)} centers")

# ---------------------------------------------------------------------------
# 2. A 12-span world where nothing ever flips: the budget must hold.
# ---------------------------------------------------------------------------
words = "amber birch cedar dusty ember frost gleam haven ionic jolly koala lunar".split()
prompt = normalize_prompt(" ".join(words))
infiller = MockInfiller({w: [w + "x"] for w in words}, seed=0)
generator = MockGenerator(rules=[], default="the answer does not change")
metric = contradiction_metric(MockNliScorer())

trace = []
record = budgeted_search(
    prompt, generator, infiller, metric,
    SearchConfig(delta=0.5, budget=20, seed=7),
    trace=trace,
)
print()
print("Inner-loop schedule actually used (B=20):")
for event in trace:
    s = event["state"]
    print(f"  t={s.t} inner={s.inner_j}: m={s.m} centers, n_s={s.n_s} samples each, "
          f"{event['scored']} scored, n_b={event['n_b']}")
print(f"outcome: {record.found} after {record.generator_calls} charged calls (cap 20)")

# ---------------------------------------------------------------------------
# 3. Strict vs memoized accounting.
# ---------------------------------------------------------------------------
# Memoized mode (the default) charges each distinct prompt once; strict mode
# charges every scoring request, matching the worst-case arithmetic exactly.
for mode in ("memoized", "strict"):
    generator = MockGenerator(rules=[], default="the answer does not change")
    infiller = MockInfiller({w: [w + "x"] for w in words}, seed=0)
    record = budgeted_search(
        prompt, generator, infiller, metric,
        SearchConfig(delta=0.5, budget=20, seed=7, budget_mode=mode),
    )
    distinct = len(set(generator.calls))
    print(f"{mode:>8}: {record.generator_calls} charged, {distinct} distinct prompts hit the generator")
