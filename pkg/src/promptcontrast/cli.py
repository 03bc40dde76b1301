"""Command-line entry points: explain, batch, redteam, degrade.

Rows stream in and out as JSONL. Per-row failures become diagnostic rows and
never abort the batch; only setup problems (bad config, unreadable files)
exit nonzero.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

from .config import ClientBundle, RunConfig, build_clients, build_metric, load_config
from .errors import ConfigError, EmptyBatchError, PromptContrastError
from .evaluation import aggregate, plot_data
from .metrics import ContrastMetric
from .search_budget import budgeted_search
from .search_greedy import greedy_search
from .textops import diff_modifications, split_tokens
from .types import (
    ExplanationRecord,
    FOUND_ERROR,
    PromptText,
    SearchConfig,
    normalize_prompt,
)

log = logging.getLogger("promptcontrast")

_SEARCHES = {"myopic": greedy_search, "budget": budgeted_search}


def run_search(
    algo: str,
    x0: PromptText,
    bundle: ClientBundle,
    metric: ContrastMetric,
    search: SearchConfig,
    allowed_indices: Optional[frozenset[int]] = None,
    record_id: Optional[str] = None,
) -> ExplanationRecord:
    if bundle.generator is None or bundle.infiller is None:
        raise ConfigError("searches need generator and infiller endpoints")
    try:
        fn = _SEARCHES[algo]
    except KeyError:
        raise ConfigError(f"unknown algorithm {algo!r}")
    return fn(
        x0,
        bundle.generator,
        bundle.infiller,
        metric,
        search,
        allowed_indices=allowed_indices,
        record_id=record_id,
    )


def render_human(record: ExplanationRecord) -> str:
    """Table-style rendering of one record for terminal output."""
    split = split_tokens(record.input_prompt, record.config.split_k)
    pairs = diff_modifications(split, record.modifications)
    mods = ", ".join(f"{orig} -> {repl}" for orig, repl in pairs) or "(none)"
    lines = [
        f"Input Prompt:      {record.input_prompt.text}",
        f"Input Response:    {record.input_response}",
        f"Contrast Prompt:   {record.contrast_prompt.text if record.contrast_prompt else '(none)'}",
        f"Contrast Response: {record.contrast_response if record.contrast_response else '(none)'}",
        f"Modifications:     {mods}",
        f"Score:             {record.score:.4f} (threshold {record.delta:.4f}, metric {record.metric_id})",
        f"Status:            {record.found} | calls: {record.generator_calls}"
        f" | edit distance: {record.edit_distance:.4f}",
    ]
    if record.error:
        lines.append(f"Error:             {record.error}")
    return "\n".join(lines)


def _diagnostic_row(row_id: Optional[str], message: str) -> dict:
    log.warning("row %s skipped: %s", row_id if row_id is not None else "?", message)
    return {"id": row_id, "found": FOUND_ERROR, "error": message}


def _read_jsonl(path: str) -> list[tuple[Optional[dict], Optional[str]]]:
    """Each line becomes (row, None) or (None, parse-error message)."""
    out: list[tuple[Optional[dict], Optional[str]]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                if not isinstance(row, dict):
                    raise ValueError("row is not a JSON object")
                out.append((row, None))
            except ValueError as exc:
                out.append((None, f"line {lineno}: {exc}"))
    return out


def _write_jsonl(path: str, rows: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def run_batch_rows(
    rows: Sequence[tuple[Optional[dict], Optional[str]]],
    bundle: ClientBundle,
    metric: ContrastMetric,
    config: RunConfig,
    algo: str,
    row_runner=None,
) -> tuple[list[dict], list[ExplanationRecord]]:
    """Process rows with bounded parallelism, output rows in input order.

    Each row owns an independent ledger and a row-derived seed; failures turn
    into diagnostic rows while the rest of the batch continues.
    ``row_runner(index, row)`` may be supplied to customize how one row runs
    (the degrade command restricts the searchable spans per conversation).
    """

    def default_runner(index: int, row: dict) -> ExplanationRecord:
        row_id = row["id"]
        x0 = normalize_prompt(row["prompt"])
        search = config.search.with_overrides(seed=config.search.seed + index)
        return run_search(algo, x0, bundle, metric, search, record_id=row_id)

    runner = row_runner or default_runner

    def process(indexed) -> tuple[int, dict, Optional[ExplanationRecord]]:
        index, (row, parse_error) = indexed
        if parse_error is not None:
            return index, _diagnostic_row(None, parse_error), None
        row_id = row.get("id")
        if not isinstance(row_id, str) or not row_id:
            return index, _diagnostic_row(None, "row is missing a string 'id'"), None
        try:
            record = runner(index, row)
        except PromptContrastError as exc:
            return index, _diagnostic_row(row_id, f"{type(exc).__name__}: {exc}"), None
        except (KeyError, TypeError, ValueError) as exc:
            return index, _diagnostic_row(row_id, f"malformed row: {exc}"), None
        return index, record.to_row(), record

    indexed_rows = list(enumerate(rows))
    workers = config.search.parallelism
    if workers > 1 and len(indexed_rows) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(process, indexed_rows))
    else:
        results = [process(ir) for ir in indexed_rows]
    results.sort(key=lambda item: item[0])
    out_rows = [row for _, row, _ in results]
    records = [rec for _, _, rec in results if rec is not None]
    return out_rows, records


def _apply_flag_overrides(search: SearchConfig, args: argparse.Namespace) -> SearchConfig:
    overrides = {}
    for name in (
        "delta", "budget", "max_iters", "alpha", "split_k", "seed",
        "anchor", "budget_mode", "parallelism",
    ):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "metric", None) is not None:
        overrides["metric_id"] = args.metric
    return search.with_overrides(**overrides) if overrides else search


def _setup(args: argparse.Namespace, preset: Optional[dict] = None) -> tuple[RunConfig, ClientBundle, ContrastMetric, str]:
    preset = dict(preset or {})
    preset_algo = preset.pop("_algo", None)
    config = load_config(args.config)
    search = config.search
    if preset:
        search = search.with_overrides(**preset)
    search = _apply_flag_overrides(search, args)
    config = RunConfig(
        endpoints=config.endpoints,
        search=search,
        metric_params=config.metric_params,
        cache_path=config.cache_path,
        output_path=config.output_path,
        baseline_template=config.baseline_template,
        degrade_directive=config.degrade_directive,
        base_dir=config.base_dir,
    )
    bundle = build_clients(config)
    metric = build_metric(config, bundle)
    algo = getattr(args, "algo", None) or preset_algo or "myopic"
    return config, bundle, metric, algo


def cmd_explain(args: argparse.Namespace) -> int:
    config, bundle, metric, algo = _setup(args)
    if args.prompt_file:
        with open(args.prompt_file, "r", encoding="utf-8") as fh:
            raw = fh.read()
    else:
        raw = args.prompt
    if raw is None:
        raise ConfigError("explain needs a prompt argument or --prompt-file")
    x0 = normalize_prompt(raw)
    record = run_search(algo, x0, bundle, metric, config.search)
    print(record.to_json())
    print()
    print(render_human(record))
    if args.out:
        _write_jsonl(args.out, [record.to_row()])
    return 1 if record.found == FOUND_ERROR else 0


def _finish_batch(args, config, bundle, out_rows, records) -> None:
    out = args.out or config.output_path
    if not out:
        raise ConfigError("no output path: pass --out or set output_path in the config")
    _write_jsonl(out, out_rows)
    log.info("wrote %d rows to %s", len(out_rows), out)
    try:
        report = aggregate(records, embedder=bundle.embedder, preference=bundle.preference)
    except EmptyBatchError:
        log.warning("no successful records; skipping the report")
        return
    with open(out + ".report.json", "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    with open(out + ".report.csv", "w", encoding="utf-8") as fh:
        fh.write(report.to_csv())
    if getattr(args, "plot_data", None):
        with open(args.plot_data, "w", encoding="utf-8") as fh:
            json.dump(plot_data(records), fh, ensure_ascii=False, indent=2)


def cmd_batch(args: argparse.Namespace) -> int:
    config, bundle, metric, algo = _setup(args)
    rows = _read_jsonl(args.input)
    out_rows, records = run_batch_rows(rows, bundle, metric, config, algo)
    _finish_batch(args, config, bundle, out_rows, records)
    return 0


REDTEAM_PRESET = {"metric_id": "contradiction", "budget": 100, "split_k": 3, "_algo": "budget"}


def cmd_redteam(args: argparse.Namespace) -> int:
    config, bundle, metric, algo = _setup(args, preset=dict(REDTEAM_PRESET))
    rows = _read_jsonl(args.input)
    out_rows, records = run_batch_rows(rows, bundle, metric, config, algo)
    findings = [row for row in out_rows if row.get("found") == "threshold_met"]
    out = args.out or config.output_path
    if not out:
        raise ConfigError("no output path: pass --out or set output_path in the config")
    _write_jsonl(out, findings)
    log.info("%d findings out of %d rows written to %s", len(findings), len(out_rows), out)
    return 0


def degrade_prompt(
    directive: str, turns: Sequence[dict], target_turn: int, split_k: int
) -> tuple[PromptText, frozenset[int]]:
    """Render a conversation into one prompt and fence off the target turn.

    The prompt is the directive followed by "role: text" turns. Only spans
    lying fully inside the target assistant turn's text are searchable, so
    every modification stays within that turn.
    """
    if not turns:
        raise ValueError("conversation has no turns")
    if not 0 <= target_turn < len(turns):
        raise ValueError(f"target_turn {target_turn} outside the conversation")
    if turns[target_turn].get("role") != "assistant":
        raise ValueError(f"target_turn {target_turn} is not an assistant turn")
    pieces: list[str] = directive.split()
    target_range: Optional[tuple[int, int]] = None
    for i, turn in enumerate(turns):
        role = turn.get("role")
        if role not in ("user", "assistant"):
            raise ValueError(f"turn {i} has unknown role {role!r}")
        text_words = str(turn.get("text", "")).split()
        pieces.append(f"{role}:")
        start = len(pieces)
        pieces.extend(text_words)
        if i == target_turn:
            target_range = (start, len(pieces))
    x0 = normalize_prompt(" ".join(pieces))
    assert target_range is not None
    start, end = target_range
    total = len(pieces)
    k = split_k
    allowed = frozenset(
        i
        for i in range(1, (total + k - 1) // k + 1)
        if (i - 1) * k >= start and min(i * k, total) <= end
    )
    return x0, allowed


DEGRADE_PRESET = {"metric_id": "rubric", "budget": 100, "_algo": "budget"}


def cmd_degrade(args: argparse.Namespace) -> int:
    config, bundle, metric, algo = _setup(args, preset=dict(DEGRADE_PRESET))
    rows = _read_jsonl(args.input)

    def degrade_runner(index: int, row: dict) -> ExplanationRecord:
        turns = row["turns"]
        target = row["target_turn"]
        x0, allowed = degrade_prompt(
            config.degrade_directive, turns, target, config.search.split_k
        )
        if not allowed:
            raise ConfigError(
                f"target turn {target} has no spans fully inside it at split_k="
                f"{config.search.split_k}"
            )
        search = config.search.with_overrides(seed=config.search.seed + index)
        return run_search(algo, x0, bundle, metric, search, allowed_indices=allowed, record_id=row["id"])

    out_rows, records = run_batch_rows(rows, bundle, metric, config, algo, row_runner=degrade_runner)
    _finish_batch(args, config, bundle, out_rows, records)
    return 0


def _add_search_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="path to the JSON run config")
    parser.add_argument("--algo", choices=("myopic", "budget"), default=None)
    parser.add_argument(
        "--metric", choices=("contradiction", "preference", "bleu", "rubric"), default=None
    )
    parser.add_argument("--delta", type=float, default=None)
    parser.add_argument("--budget", type=int, default=None)
    parser.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--split-k", dest="split_k", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--anchor", choices=("original", "current"), default=None)
    parser.add_argument("--budget-mode", dest="budget_mode", choices=("strict", "memoized"), default=None)
    parser.add_argument("--parallelism", type=int, default=None)
    parser.add_argument("--out", default=None, help="output path (JSONL)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="promptcontrast",
        description="Search for minimally perturbed prompts that change a generator's response.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_explain = sub.add_parser("explain", help="explain a single prompt")
    p_explain.add_argument("prompt", nargs="?", default=None)
    p_explain.add_argument("--prompt-file", default=None)
    _add_search_flags(p_explain)
    p_explain.set_defaults(func=cmd_explain)

    p_batch = sub.add_parser("batch", help="explain a JSONL batch of prompts")
    p_batch.add_argument("--input", required=True)
    p_batch.add_argument("--plot-data", dest="plot_data", default=None)
    _add_search_flags(p_batch)
    p_batch.set_defaults(func=cmd_batch)

    p_red = sub.add_parser("redteam", help="contradiction-hunting preset over a JSONL batch")
    p_red.add_argument("--input", required=True)
    _add_search_flags(p_red)
    p_red.set_defaults(func=cmd_redteam)

    p_deg = sub.add_parser("degrade", help="perturb one assistant turn of each conversation")
    p_deg.add_argument("--input", required=True)
    _add_search_flags(p_deg)
    p_deg.set_defaults(func=cmd_degrade)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PromptContrastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
