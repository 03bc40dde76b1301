"""Contrast metrics: how different is the perturbed outcome from the anchor.

Every metric maps (anchor prompt, contrast prompt, anchor response, contrast
response) to a score in [0, 1]; higher means a stronger contrast. Metrics are
stateless wrappers over scorer clients and safe for parallel scoring.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .clients import JudgeClient, NliClient, PreferenceClient
from .textops import bleu, word_levenshtein
from .types import PromptText

DIRECTION_INCREASE = "increase_violation"
DIRECTION_DECREASE = "decrease_violation"


@dataclass(frozen=True)
class ContrastMetric:
    """A named scoring rule plus the thresholds reporting needs.

    ``null_value`` is the score of a do-nothing perturbation (identical
    prompts and responses); ``default_delta`` is the threshold used when the
    search config leaves delta unset.
    """

    metric_id: str
    default_delta: float
    null_value: float
    _score: Callable[[PromptText, PromptText, str, str], float]

    def score(self, x0: PromptText, xc: PromptText, y0: str, yc: str) -> float:
        return self._score(x0, xc, y0, yc)


def contradiction_metric(nli: NliClient) -> ContrastMetric:
    """Probability that the two responses contradict each other.

    Takes the max over both premise/hypothesis orderings, which makes the
    score symmetric in the responses. Prompts are ignored.
    """

    def score(x0: PromptText, xc: PromptText, y0: str, yc: str) -> float:
        forward = nli.nli(y0, yc).contradiction
        backward = nli.nli(yc, y0).contradiction
        return max(forward, backward)

    return ContrastMetric("contradiction", default_delta=0.5, null_value=0.0, _score=score)


def preference_metric(pref: PreferenceClient) -> ContrastMetric:
    """P(anchor response preferred over contrast response) given the anchor prompt.

    Higher means the contrast is less preferable, i.e. a stronger contrast.
    """

    def score(x0: PromptText, xc: PromptText, y0: str, yc: str) -> float:
        return pref.preference(x0.text, y0, yc)

    return ContrastMetric("preference", default_delta=0.75, null_value=0.5, _score=score)


def bleu_composite_metric(w_resp: float = 0.75, w_prompt: float = 0.25) -> ContrastMetric:
    """Weighted blend of response divergence and prompt overlap.

    score = w_resp * (1 - bleu(y0, yc)) + w_prompt * bleu(x0, xc): it rewards
    responses that drift from the original while the prompts stay close.
    """
    if w_resp < 0 or w_prompt < 0 or abs(w_resp + w_prompt - 1.0) > 1e-9:
        raise ValueError("weights must be nonnegative and sum to 1")

    def score(x0: PromptText, xc: PromptText, y0: str, yc: str) -> float:
        return w_resp * (1.0 - bleu(y0, yc)) + w_prompt * bleu(x0.text, xc.text)

    return ContrastMetric("bleu", default_delta=0.7, null_value=w_prompt, _score=score)


def rubric_judge_metric(
    judge: JudgeClient,
    rubric: str,
    repeats: int = 3,
    direction: str = DIRECTION_INCREASE,
) -> ContrastMetric:
    """Shift in a rubric judge's average score between the two responses.

    Each response is judged ``repeats`` times (the repeat index is passed as a
    salt so stochastic judges actually resample) and the averages are mapped
    to [0, 1] around 0.5: for ``increase_violation`` a contrast that raises
    the judged score maps above 0.5, for ``decrease_violation`` the sign
    flips.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if direction not in (DIRECTION_INCREASE, DIRECTION_DECREASE):
        raise ValueError(f"unknown direction {direction!r}")

    def judged_average(prompt: PromptText, response: str) -> float:
        conversation = f"{prompt.text}\n{response}"
        scores = [judge.judge(conversation, rubric, salt=i) for i in range(repeats)]
        return sum(scores) / repeats

    def score(x0: PromptText, xc: PromptText, y0: str, yc: str) -> float:
        avg_contrast = judged_average(xc, yc)
        avg_original = judged_average(x0, y0)
        shift = avg_contrast - avg_original
        if direction == DIRECTION_DECREASE:
            shift = -shift
        return min(1.0, max(0.0, 0.5 + shift / 2.0))

    return ContrastMetric("rubric", default_delta=0.75, null_value=0.5, _score=score)


def report_distance(x0: PromptText, xc: PromptText) -> float:
    """Normalized word-level edit distance between two prompts.

    Reporting only: the searches keep prompts close by masking incrementally,
    not by optimizing this number directly.
    """
    _, normalized = word_levenshtein(x0, xc)
    return normalized
