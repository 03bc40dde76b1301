"""Batch-level evaluation: flip rate, edit distance, preservation, efficiency.

Reports follow the shape of contrastive-explanation papers: per-batch means
with standard errors (sample std / sqrt(n)). Because averaging over only the
flipped records is a judgment call, every report carries two scopes: ``all``
records and ``flipped`` (threshold-met) records.
"""
from __future__ import annotations

import csv
import io
import json
import math
import statistics
from dataclasses import dataclass
from typing import Optional, Sequence

from .clients import EmbedderClient, GeneratorClient, PreferenceClient
from .errors import EmptyBatchError
from .types import ExplanationRecord, FOUND_THRESHOLD, PromptText, normalize_prompt

DEFAULT_BASELINE_TEMPLATE = (
    "Give a response to the following prompt that is less preferable than "
    "the response '<y0>'. Prompt: <x0>"
)


def flip_rate(records: Sequence[ExplanationRecord]) -> float:
    """Fraction of records whose search met its threshold."""
    if not records:
        raise EmptyBatchError("flip_rate needs at least one record")
    return sum(1 for r in records if r.found == FOUND_THRESHOLD) / len(records)


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) != len(b):
        raise ValueError("vectors must share a dimension")
    dot = sum(x * y for x, y in zip(a, b))
    norm_a = math.sqrt(sum(x * x for x in a))
    norm_b = math.sqrt(sum(y * y for y in b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def content_preservation(embedder: EmbedderClient, x0: PromptText, xc: PromptText) -> float:
    """Cosine similarity between the two prompts' embeddings, in [-1, 1]."""
    return cosine_similarity(embedder.embed(x0.text), embedder.embed(xc.text))


def baseline_contrast(
    generator: GeneratorClient,
    x0: PromptText,
    template: str = DEFAULT_BASELINE_TEMPLATE,
) -> str:
    """Two-step baseline: generate normally, then ask for a worse response.

    The template's ``<y0>`` and ``<x0>`` markers receive the first response
    and the original prompt.
    """
    y0 = generator.generate(x0)
    request = template.replace("<y0>", y0).replace("<x0>", x0.text)
    return generator.generate(normalize_prompt(request))


@dataclass(frozen=True)
class ColumnStats:
    mean: float
    se: float
    n: int


def column_stats(values: Sequence[float]) -> Optional[ColumnStats]:
    if not values:
        return None
    mean = statistics.mean(values)
    se = statistics.stdev(values) / math.sqrt(len(values)) if len(values) > 1 else 0.0
    return ColumnStats(mean=mean, se=se, n=len(values))


@dataclass(frozen=True)
class EvalRow:
    """One scope's worth of aggregate statistics."""

    label: str
    scope: str
    n: int
    flip_rate: Optional[ColumnStats]
    edit_distance: Optional[ColumnStats]
    content_preservation: Optional[ColumnStats]
    generator_calls: Optional[ColumnStats]
    elapsed_ms: Optional[ColumnStats]
    pref_original_raw: Optional[ColumnStats]
    pref_original_shifted: Optional[ColumnStats]
    pref_baseline_raw: Optional[ColumnStats]
    pref_baseline_shifted: Optional[ColumnStats]


_COLUMNS = (
    "flip_rate",
    "edit_distance",
    "content_preservation",
    "generator_calls",
    "elapsed_ms",
    "pref_original_raw",
    "pref_original_shifted",
    "pref_baseline_raw",
    "pref_baseline_shifted",
)


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[EvalRow, ...]

    def to_json(self) -> str:
        payload = []
        for row in self.rows:
            entry: dict = {"label": row.label, "scope": row.scope, "n": row.n}
            for name in _COLUMNS:
                stats: Optional[ColumnStats] = getattr(row, name)
                entry[name] = (
                    None if stats is None else {"mean": stats.mean, "se": stats.se, "n": stats.n}
                )
            payload.append(entry)
        return json.dumps(payload, indent=2, ensure_ascii=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        header = ["label", "scope", "n"]
        for name in _COLUMNS:
            header += [f"{name}_mean", f"{name}_se"]
        writer = csv.writer(buf)
        writer.writerow(header)
        for row in self.rows:
            cells: list = [row.label, row.scope, row.n]
            for name in _COLUMNS:
                stats: Optional[ColumnStats] = getattr(row, name)
                cells += ["", ""] if stats is None else [stats.mean, stats.se]
            writer.writerow(cells)
        return buf.getvalue()


def _scope_row(
    label: str,
    scope: str,
    records: Sequence[ExplanationRecord],
    flips: Optional[Sequence[float]],
    embedder: Optional[EmbedderClient],
    preference: Optional[PreferenceClient],
    baselines: Optional[dict[str, str]],
) -> EvalRow:
    with_contrast = [r for r in records if r.contrast_prompt is not None]
    preservation = (
        [content_preservation(embedder, r.input_prompt, r.contrast_prompt) for r in with_contrast]
        if embedder is not None
        else []
    )
    pref_raw: list[float] = []
    pref_base: list[float] = []
    if preference is not None:
        for r in with_contrast:
            p = preference.preference(r.input_prompt.text, r.input_response, r.contrast_response)
            pref_raw.append(p)
            if baselines and r.id in baselines:
                pref_base.append(
                    preference.preference(r.input_prompt.text, baselines[r.id], r.contrast_response)
                )
    return EvalRow(
        label=label,
        scope=scope,
        n=len(records),
        flip_rate=column_stats(flips) if flips is not None else None,
        edit_distance=column_stats([r.edit_distance for r in records]),
        content_preservation=column_stats(preservation),
        generator_calls=column_stats([float(r.generator_calls) for r in records]),
        elapsed_ms=column_stats([float(r.elapsed_ms) for r in records]),
        pref_original_raw=column_stats(pref_raw),
        pref_original_shifted=column_stats([p - 0.5 for p in pref_raw]),
        pref_baseline_raw=column_stats(pref_base),
        pref_baseline_shifted=column_stats([p - 0.5 for p in pref_base]),
    )


def aggregate(
    records: Sequence[ExplanationRecord],
    embedder: Optional[EmbedderClient] = None,
    preference: Optional[PreferenceClient] = None,
    baselines: Optional[dict[str, str]] = None,
    label: str = "batch",
) -> EvalReport:
    """Means and standard errors for every available column.

    Preference columns compare the original response against each contrast
    (raw probability and the same shifted by -0.5), and optionally a baseline
    contrast response (``baselines`` maps record id to baseline response).
    Rows are emitted for both the full batch and the flipped-only subset;
    aggregation is order-independent.
    """
    if not records:
        raise EmptyBatchError("aggregate needs at least one record")
    flips = [1.0 if r.found == FOUND_THRESHOLD else 0.0 for r in records]
    flipped = [r for r in records if r.found == FOUND_THRESHOLD]
    rows = [_scope_row(label, "all", records, flips, embedder, preference, baselines)]
    if flipped:
        rows.append(_scope_row(label, "flipped", flipped, None, embedder, preference, baselines))
    return EvalReport(rows=tuple(rows))


def plot_data(records: Sequence[ExplanationRecord], bin_width: int = 10) -> list[dict]:
    """Call counts and elapsed time binned by input prompt word count."""
    if bin_width < 1:
        raise ValueError("bin_width must be >= 1")
    bins: dict[int, list[ExplanationRecord]] = {}
    for r in records:
        start = (len(r.input_prompt.words) // bin_width) * bin_width
        bins.setdefault(start, []).append(r)
    out = []
    for start in sorted(bins):
        group = bins[start]
        out.append(
            {
                "words_min": start,
                "words_max": start + bin_width - 1,
                "n": len(group),
                "mean_calls": statistics.mean(float(r.generator_calls) for r in group),
                "mean_elapsed_ms": statistics.mean(float(r.elapsed_ms) for r in group),
            }
        )
    return out
