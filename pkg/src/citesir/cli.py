"""Command line interface.

Subcommands:

* ``ingest``  -- raw metadata + citation-pair CSVs -> monthly series CSV
* ``fit``     -- monthly series CSV -> per-paper parameter records (JSONL)
* ``impact``  -- closed-form ultimate impact for one parameter set
* ``rank``    -- fitted records -> journal summary table + rank correlations
* ``synth``   -- synthetic cohort generator (series + ground truth)

Exit codes: 0 success, 1 usage or schema errors, 2 data errors
(malformed rows over threshold, too-few points, and similar), 3 numerical
failures (non-convergence, unstable integration).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import zlib
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .cohort import RankTable, kendall_counts, rank_journals, summarize
from .errors import (
    CiteSirError,
    ConvergenceError,
    DataError,
    DomainError,
    InsufficientDataError,
    NumericalError,
    SchemaError,
)
from .fitting import FitConfig, FitResult, fit, result_record
from .impact import ImpactEstimate, solve_ultimate_impact
from .ingest import build_all_series, parse_events, select_hit_papers
from .series import read_series_csv, write_series_csv
from .sir import EpidemicParams
from .synth import generate_cohort, load_cohort_spec, write_cohort

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

_FIT_RECORD_KEYS = ("paper_id", "s0", "beta", "gamma", "i0", "r0", "rho",
                    "upsilon_inf", "upsilon_rel", "rmse", "converged",
                    "restarts_used")
_RANK_METRICS = ("s0", "beta", "gamma", "r0", "upsilon")
_IF_HEADER = ["journal", "if_rank"]


class _UsageError(Exception):
    """Bad command line; printed to stderr and mapped to exit code 1."""


class _ArgumentParser(argparse.ArgumentParser):
    """argparse parser that raises instead of calling sys.exit(2)."""

    def error(self, message: str) -> None:  # noqa: A003 - argparse API
        raise _UsageError(f"{self.prog}: {message}")


def _paper_seed(base_seed: int, paper_id: str) -> int:
    """Deterministic per-paper seed, stable across runs and worker counts."""
    return base_seed * 0x1_0000_0000 + zlib.crc32(paper_id.encode("utf-8"))


def _fit_one(task: tuple[str, str, tuple[int, ...], dict]) -> tuple:
    """Worker body for ``fit``: one paper in, one JSON-ready record out.

    Papers that cannot be fit at all (too few citations, or every restart
    failed outright) yield a skip marker instead of aborting the batch.
    Mere non-convergence is recorded in-line with converged=false.
    """
    paper_id, journal, counts, config_kwargs = task
    config = FitConfig(**config_kwargs)
    try:
        result = fit(list(counts), config)
    except InsufficientDataError as exc:
        return ("skip", paper_id, str(exc))
    except ConvergenceError as exc:
        if exc.result is None:
            return ("skip", paper_id, str(exc))
        result = exc.result
    return ("ok", paper_id, result_record(paper_id, result, journal=journal))


def cmd_ingest(args: argparse.Namespace) -> int:
    if args.horizon < 12:
        raise DomainError(f"horizon must be >= 12 months, got {args.horizon}")
    metas, events, report = parse_events(args.metadata, args.citations)
    series_list, clock_skew = build_all_series(metas, events,
                                               horizon=args.horizon)
    report = dataclasses.replace(report, clock_skew=clock_skew)
    if args.journal is not None:
        window = (args.window_start, args.window_end)
        keep = select_hit_papers(metas, series_list, args.journal,
                                 window, args.top)
        kept_ids = set(keep)
        series_list = [s for s in series_list if s.paper_id in kept_ids]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_series_csv(series_list, out_dir / "series.csv")
    with open(out_dir / "ingest_report.json", "w", encoding="utf-8") as fh:
        json.dump(report.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(series_list)} series to {out_dir / 'series.csv'}")
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    series_list = read_series_csv(args.series)
    out_path = Path(args.out)
    if out_path.parent != Path(""):
        out_path.parent.mkdir(parents=True, exist_ok=True)
    if not series_list:
        out_path.write_text("", encoding="utf-8")
        print("warning: no series in input, wrote empty output",
              file=sys.stderr)
        return EXIT_OK

    base_kwargs = dict(i0=args.i0, restarts=args.restarts, seed=0)
    tasks = []
    for series in series_list:
        kwargs = dict(base_kwargs)
        kwargs["seed"] = _paper_seed(args.seed, series.paper_id)
        tasks.append((series.paper_id, series.journal,
                      tuple(series.counts), kwargs))

    workers = args.workers if args.workers is not None else os.cpu_count() or 1
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_fit_one, tasks))
    else:
        outcomes = [_fit_one(task) for task in tasks]

    records = []
    for status, paper_id, payload in sorted(outcomes, key=lambda o: o[1]):
        if status == "skip":
            print(f"warning: skipping {paper_id}: {payload}",
                  file=sys.stderr)
        else:
            records.append(payload)
    with open(out_path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    n_converged = sum(1 for r in records if r["converged"])
    print(f"fitted {len(records)} of {len(tasks)} papers "
          f"({n_converged} converged) -> {out_path}")
    return EXIT_OK


def cmd_impact(args: argparse.Namespace) -> int:
    params = EpidemicParams(s0=args.s0, beta=args.beta, gamma=args.gamma,
                            i0=args.i0)
    estimate = solve_ultimate_impact(params)
    payload = {
        "upsilon_inf": estimate.upsilon_inf,
        "upsilon_rel": estimate.upsilon_rel,
        "r0": estimate.r0,
        "rho": estimate.rho,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _read_fit_records(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{line_no}: invalid JSON "
                                  f"({exc.msg})") from None
            missing = [key for key in (*_FIT_RECORD_KEYS, "journal")
                       if key not in record]
            if missing:
                raise SchemaError(f"{path}:{line_no}: record missing "
                                  f"{', '.join(missing)}")
            records.append(record)
    return records


def _result_from_record(record: dict) -> FitResult:
    params = EpidemicParams(s0=float(record["s0"]),
                            beta=float(record["beta"]),
                            gamma=float(record["gamma"]),
                            i0=float(record["i0"]))
    impact = ImpactEstimate(upsilon_inf=float(record["upsilon_inf"]),
                            upsilon_rel=float(record["upsilon_rel"]),
                            r0=float(record["r0"]),
                            rho=float(record["rho"]))
    return FitResult(params=params, loss=math.nan,
                     rmse=float(record["rmse"]), impact=impact,
                     converged=bool(record["converged"]),
                     restarts_used=int(record["restarts_used"]))


def _read_if_ranks(path: str | Path) -> RankTable:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _IF_HEADER:
            raise SchemaError(f"{path}: expected header "
                              f"{','.join(_IF_HEADER)}")
        journals, ranks = [], []
        for row in reader:
            if len(row) != 2:
                raise SchemaError(f"{path}: malformed row {row!r}")
            journals.append(row[0])
            try:
                ranks.append(int(row[1]))
            except ValueError:
                raise SchemaError(f"{path}: non-integer rank "
                                  f"{row[1]!r}") from None
    if len(set(journals)) != len(journals):
        raise SchemaError(f"{path}: duplicate journal rows")
    tied = [ranks.count(rank) > 1 for rank in ranks]
    return RankTable(metric="if_rank", journals=list(journals),
                     ranks=list(ranks), tied=tied)


def cmd_rank(args: argparse.Namespace) -> int:
    records = _read_fit_records(args.fits)
    if args.converged_only:
        records = [r for r in records if r["converged"]]
    by_journal: dict[str, list[FitResult]] = {}
    for record in records:
        by_journal.setdefault(record["journal"], []).append(
            _result_from_record(record))
    if len(by_journal) < 2:
        raise DataError(f"need >= 2 journals to rank, "
                        f"got {len(by_journal)}")

    summaries = [summarize(journal, fits)
                 for journal, fits in sorted(by_journal.items())]
    tables = {metric: rank_journals(summaries, metric)
              for metric in _RANK_METRICS}

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    s0_order = sorted(summaries,
                      key=lambda s: tables["s0"].rank_of(s.journal))
    fmt = (lambda x: f"{x:.6g}") if args.pretty else repr
    with open(out_dir / "journal_summary.csv", "w", encoding="utf-8",
              newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["journal", "n", "median_s0", "median_beta",
                         "median_gamma", "median_r0", "median_upsilon"])
        for s in s0_order:
            writer.writerow([s.journal, s.n_papers, fmt(s.median_s0),
                             fmt(s.median_beta), fmt(s.median_gamma),
                             fmt(s.median_r0), fmt(s.median_upsilon)])

    correlations = []
    metric_tables = list(tables.items())
    for i, (name_a, table_a) in enumerate(metric_tables):
        for name_b, table_b in metric_tables[i + 1:]:
            correlations.append(_correlation_entry(name_a, table_a,
                                                   name_b, table_b))
    if args.impact_factors is not None:
        if_table = _read_if_ranks(args.impact_factors)
        for name, table in metric_tables:
            correlations.append(_correlation_entry(name, table,
                                                   "if_rank", if_table))

    with open(out_dir / "rank_correlations.json", "w",
              encoding="utf-8") as fh:
        json.dump(correlations, fh, indent=2)
        fh.write("\n")
    print(f"ranked {len(summaries)} journals -> {out_dir}")
    return EXIT_OK


def _correlation_entry(name_a: str, table_a: RankTable,
                       name_b: str, table_b: RankTable) -> dict:
    concordant, discordant, total = kendall_counts(table_a, table_b)
    return {
        "metric_a": name_a,
        "metric_b": name_b,
        "tau": (concordant - discordant) / total,
        "pair_counts": {"concordant": concordant,
                        "discordant": discordant,
                        "total": total},
    }


def cmd_synth(args: argparse.Namespace) -> int:
    spec = load_cohort_spec(args.spec)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    papers = generate_cohort(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_cohort(papers, out_dir / "series.csv",
                 out_dir / "ground_truth.csv")
    print(f"generated {len(papers)} synthetic papers -> {out_dir}")
    return EXIT_OK


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="citesir",
                             description="SIR modeling of citation histories")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p_ingest = sub.add_parser("ingest",
                              help="build monthly series from raw CSVs")
    p_ingest.add_argument("--metadata", required=True,
                          help="paper metadata CSV")
    p_ingest.add_argument("--citations", required=True,
                          help="citation pair CSV")
    p_ingest.add_argument("--out-dir", required=True)
    p_ingest.add_argument("--horizon", type=int, default=180,
                          help="months of history per paper (default 180)")
    p_ingest.add_argument("--journal", default=None,
                          help="restrict to top cited papers of one journal")
    p_ingest.add_argument("--window-start", type=int, default=1990,
                          help="first publication year for --journal")
    p_ingest.add_argument("--window-end", type=int, default=1999,
                          help="last publication year for --journal")
    p_ingest.add_argument("--top", type=int, default=100,
                          help="papers to keep per journal (default 100)")
    p_ingest.set_defaults(func=cmd_ingest)

    p_fit = sub.add_parser("fit", help="fit epidemic parameters per paper")
    p_fit.add_argument("--series", required=True, help="monthly series CSV")
    p_fit.add_argument("--out", required=True, help="output JSONL path")
    p_fit.add_argument("--i0", type=float, default=1.0)
    p_fit.add_argument("--restarts", type=int, default=32)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--workers", type=int, default=None,
                       help="parallel workers (default: cpu count)")
    p_fit.set_defaults(func=cmd_fit)

    p_impact = sub.add_parser("impact",
                              help="closed-form ultimate impact")
    p_impact.add_argument("--s0", type=float, required=True)
    p_impact.add_argument("--beta", type=float, required=True)
    p_impact.add_argument("--gamma", type=float, required=True)
    p_impact.add_argument("--i0", type=float, default=1.0)
    p_impact.set_defaults(func=cmd_impact)

    p_rank = sub.add_parser("rank",
                            help="summarize and rank fitted journals")
    p_rank.add_argument("--fits", required=True, help="fit JSONL path")
    p_rank.add_argument("--out-dir", required=True)
    p_rank.add_argument("--impact-factors", default=None,
                        help="journal,if_rank CSV for external comparison")
    p_rank.add_argument("--converged-only", action="store_true",
                        help="drop non-converged fits before ranking")
    p_rank.add_argument("--pretty", action="store_true",
                        help="round table values for display")
    p_rank.set_defaults(func=cmd_rank)

    p_synth = sub.add_parser("synth", help="generate a synthetic cohort")
    p_synth.add_argument("--spec", required=True,
                         help="cohort spec JSON path")
    p_synth.add_argument("--out-dir", required=True)
    p_synth.add_argument("--seed", type=int, default=None,
                         help="override the seed in the spec file")
    p_synth.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"file not found: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CiteSirError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
