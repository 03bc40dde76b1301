"""A tour of the four contrast metrics and the reporting distance.

Every metric maps (anchor prompt, contrast prompt, anchor response, contrast
response) to [0, 1]; higher means the perturbed outcome differs more in the
metric's sense. The searches only ever compare scores against a threshold.
"""
from promptcontrast import (
    MockJudgeScorer,
    MockNliScorer,
    MockPreferenceScorer,
    bleu,
    bleu_composite_metric,
    contradiction_metric,
    normalize_prompt,
    preference_metric,
    report_distance,
    rubric_judge_metric,
)

x0 = normalize_prompt("what is the best way to store fresh basil")
xc = normalize_prompt("what is the best way to store dried basil")
y0 = "keep the stems in a glass of water on the counter"
yc = "seal it in an airtight jar away from light"

# --- contradiction: max P(contradiction) over both NLI orderings ------------
nli = MockNliScorer(pairs={(y0, yc): (0.2, 0.3, 0.5), (yc, y0): (0.1, 0.2, 0.7)})
contr = contradiction_metric(nli)
print(f"contradiction: {contr.score(x0, xc, y0, yc):.2f}  (max of 0.5 and 0.7)")
print(f"  on identical responses: {contr.score(x0, x0, y0, y0):.2f}  (the null value)")

# --- preference: P(original response preferred over contrast) ---------------
pref = MockPreferenceScorer(pairs={(y0, yc): 0.8})
prefm = preference_metric(pref)
print(f"preference:    {prefm.score(x0, xc, y0, yc):.2f}  (higher = contrast is worse)")

# --- BLEU composite: responses should drift, prompts should not -------------
comp = bleu_composite_metric()  # 0.75 * (1 - bleu(y0, yc)) + 0.25 * bleu(x0, xc)
print(f"bleu composite: {comp.score(x0, xc, y0, yc):.2f}")
print(f"  raw bleu(y0, yc) = {bleu(y0, yc):.3f}, bleu(x0, xc) = {bleu(x0.text, xc.text):.3f}")

# --- rubric judge: shift in an averaged judged score -------------------------
judge = MockJudgeScorer(rules=[("airtight", 0.9), ("glass of water", 0.3)])
rubric = rubric_judge_metric(judge, rubric="rate how cautious the advice is", repeats=3)
print(f"rubric judge:  {rubric.score(x0, xc, y0, yc):.2f}  (0.5 + shift/2, clamped)")

# --- reporting distance ------------------------------------------------------
print(f"edit distance: {report_distance(x0, xc):.3f}  (normalized word Levenshtein)")
