"""Batch evaluation: flip rate, edit distance, preservation, preference columns.

Runs a small batch at the library level, generates baseline contrasts (ask the
same generator for a deliberately worse answer), and aggregates everything
into a report with means and standard errors for both the full batch and the
flipped-only subset.
"""
from promptcontrast import (
    MockEmbedder,
    MockGenerator,
    MockInfiller,
    MockNliScorer,
    MockPreferenceScorer,
    SearchConfig,
    aggregate,
    baseline_contrast,
    budgeted_search,
    contradiction_metric,
    flip_rate,
    normalize_prompt,
    plot_data,
)

steady = "the committee kept its original schedule"
flipped = "the committee scrapped the schedule entirely"
worse = "the committee refuses to say anything at all"

words = "amber birch cedar dusty ember frost".split()
generator = MockGenerator(
    rules=[("flipped", flipped), ("less preferable", worse)], default=steady
)
infiller = MockInfiller({**{w: [w + "x"] for w in words}, "signal": ["flipped"]}, seed=0)
nli = MockNliScorer(pairs={(steady, flipped): (0.0, 0.0, 1.0)})
metric = contradiction_metric(nli)

prompts = []
for i in range(6):
    row = list(words)
    if i < 4:  # two prompts have no magic word and cannot flip
        row[i % len(row)] = "signal"
    prompts.append(normalize_prompt(" ".join(row)))

records = []
baselines = {}
for i, prompt in enumerate(prompts):
    record = budgeted_search(
        prompt, generator, infiller, metric,
        SearchConfig(delta=0.5, budget=25, seed=i), record_id=f"row{i}",
    )
    records.append(record)
    baselines[record.id] = baseline_contrast(generator, prompt)

print(f"flip rate: {flip_rate(records):.2f}")

preference = MockPreferenceScorer(
    pairs={(steady, flipped): 0.8, (worse, flipped): 0.35}, default=0.5
)
report = aggregate(
    records,
    embedder=MockEmbedder(dim=8),
    preference=preference,
    baselines=baselines,
)
print()
print(report.to_csv())
print("binned efficiency data:", plot_data(records, bin_width=5))
