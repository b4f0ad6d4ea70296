"""Command-line entry point: ``spt-decomp {simulate,decompose,convergence,leapfrog}``.

Exit codes: 0 success, 1 a numerical check failed, 2 invalid input or
configuration, 3 numerical failure during computation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path
from typing import List, Optional

from .config import ExperimentConfig, load_config
from .decomposition import DecompositionReport, WeightMismatchWarning, decompose
from .exceptions import NumericalError, SptError, ValidationError
from .generators import parse_generator
from .market import caps_csv_text, ingest_caps_csv, simulate_gbm
from .scenarios import leapfrog_experiment, weight_rule
from .studies import prop1_study, prop2_study, strictly_decreasing, trading_sup_study

EXIT_OK, EXIT_CHECK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3

IDENTITY_TOL = 1e-12
EXACT_FLOOR = 1e-12
TV_RELATIVE_BAND = (1.25, 1.60)
TV_TRADING_BAND = (0.75, 1.25)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _prepare_out(cfg: ExperimentConfig) -> Path:
    out = cfg.output
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "config.ini", cfg.resolved_text())
    return out


def _write_report(report: DecompositionReport, out: Path, stem: str, fmt: str) -> List[Path]:
    written = []
    if fmt in ("json", "both"):
        _write(out / f"{stem}.json", report.to_json())
        written.append(out / f"{stem}.json")
    if fmt in ("csv", "both"):
        _write(out / f"{stem}.csv", report.to_csv())
        written.append(out / f"{stem}.csv")
    return written


def _require_gbm(cfg: ExperimentConfig, command: str):
    if cfg.gbm is None:
        raise ValidationError(f"{command} needs a simulated (gbm) market")
    return cfg.gbm


def cmd_simulate(cfg: ExperimentConfig) -> int:
    """Simulate GBM markets and write them as capitalization CSV files."""
    _require_gbm(cfg, "simulate")
    out = _prepare_out(cfg)
    for seed in cfg.seeds:
        market = simulate_gbm(cfg.gbm_for(seed))
        path = out / f"market_seed{seed}.csv"
        _write(path, caps_csv_text(market))
        print(f"wrote {path} ({market.n_stocks} stocks x {len(market.grid)} dates)")
    return EXIT_OK


def _markets(cfg: ExperimentConfig):
    if cfg.csv_path is not None:
        try:
            with open(cfg.csv_path, "rb") as fh:
                yield "decomposition", ingest_caps_csv(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read {cfg.csv_path}: {exc}") from None
        return
    for seed in cfg.seeds:
        yield f"decomposition_seed{seed}", simulate_gbm(cfg.gbm_for(seed))


def cmd_decompose(cfg: ExperimentConfig) -> int:
    """Decompose relative return of the configured portfolio."""
    generator = parse_generator(cfg.generator) if cfg.generator else None
    rule = weight_rule(cfg.rule, generator)
    out = _prepare_out(cfg)
    status = EXIT_OK
    for stem, market in _markets(cfg):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", WeightMismatchWarning)
            report = decompose(market, rule(market), generator)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        for path in _write_report(report, out, stem, cfg.format):
            print(f"wrote {path}")
        d = report.diagnostics
        print(
            f"{stem}: rel={report.relative_log_return.final():+.6g} "
            f"structural={report.structural_log.final():+.6g} "
            f"trading={report.trading.final():+.6g} sup|trading|={d['sup_abs_trading']:.3g}"
        )
        if d["sup_abs_identity_residual"] > IDENTITY_TOL:
            print(f"FAIL {stem}: decomposition identity residual {d['sup_abs_identity_residual']:.3g}")
            status = EXIT_CHECK
    return status


def _decreasing_or_exact(medians) -> str:
    if max(medians) <= EXACT_FLOOR:
        return "exact"
    return "decreasing" if strictly_decreasing(medians) else "not_decreasing"


def _within(values, band) -> bool:
    return all(band[0] <= v <= band[1] for v in values)


def _write_table(path: Path, tables) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = [t.name for t in tables]
    writer.writerow(["seed", "steps", *names])
    rows = zip(*(t.rows() for t in tables))
    for group in rows:
        seed, steps = group[0][0], group[0][1]
        writer.writerow([seed, steps, *(repr(r[2]) for r in group)])
    _write(path, buf.getvalue())


def cmd_convergence(cfg: ExperimentConfig) -> int:
    """Refinement study of residuals and total variations across seeds."""
    spec = _require_gbm(cfg, "convergence")
    generator = parse_generator(cfg.generator) if cfg.generator else None
    rule = weight_rule(cfg.rule, generator)
    levels = list(cfg.refinements)
    out = _prepare_out(cfg)
    summary = {"meta": {"seeds": list(cfg.seeds), "steps": levels}, "tables": {}, "checks": {}}

    tv = prop1_study(spec, rule, cfg.seeds, levels)
    _write_table(out / "convergence_tv.csv", [tv["tv_relative"], tv["tv_trading"]])
    tables = dict(tv)
    if generator is not None and cfg.rule == "generator":
        summary["meta"]["generator"] = generator.name
        p2 = prop2_study(spec, generator, cfg.seeds, levels)
        _write_table(out / "convergence_prop2.csv", [p2["r1"], p2["r2"]])
        tables.update(p2)
        for name in ("r1", "r2"):
            state = _decreasing_or_exact(p2[name].medians)
            summary["checks"][f"{name}_median"] = state
    else:
        sup = trading_sup_study(spec, rule, cfg.seeds, levels)
        _write_table(out / "convergence_trading.csv", [sup])
        tables["sup_trading"] = sup

    rel_ratios = tv["tv_relative"].median_ratios
    trade_ratios = tv["tv_trading"].median_ratios
    if max(tv["tv_relative"].medians) > 0:
        summary["checks"]["tv_relative_ratio"] = (
            "ok" if _within(rel_ratios, TV_RELATIVE_BAND) else "out_of_band"
        )
        if min(tv["tv_trading"].medians) > EXACT_FLOOR:
            summary["checks"]["tv_trading_ratio"] = (
                "ok" if _within(trade_ratios, TV_TRADING_BAND) else "out_of_band"
            )

    for name, table in tables.items():
        summary["tables"][name] = {
            "medians": table.medians,
            "median_ratios": [r if r == r else None for r in table.median_ratios],
        }
    _write(out / "convergence_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")

    failed = False
    for name, state in summary["checks"].items():
        good = state in ("ok", "decreasing", "exact")
        failed |= not good
        print(f"{'PASS' if good else 'FAIL'} {name}: {state}")
    for name, table in tables.items():
        meds = ", ".join(f"{v:.4g}" for v in table.medians)
        print(f"{name} medians by steps {levels}: {meds}")
    return EXIT_CHECK if failed else EXIT_OK


def cmd_leapfrog(cfg: ExperimentConfig) -> int:
    """Rank-swap scenario for a top-m cap-weighted index."""
    caps = cfg.leapfrog_caps
    m = cfg.leapfrog_m
    if not 1 <= m < len(caps):
        raise ValidationError(f"leapfrog index size m must satisfy 1 <= m < n={len(caps)}, got {m}")
    out = _prepare_out(cfg)
    report, summary = leapfrog_experiment(caps, m)
    report.meta["leapfrog"] = summary
    for key in ("structural_share", "trading_share"):
        if summary[key] is not None:
            report.diagnostics[key] = summary[key]
    for path in _write_report(report, out, "leapfrog", cfg.format):
        print(f"wrote {path}")
    print(
        f"top-{m} index, ranks {m} and {m + 1} swap: relative log-return "
        f"{summary['relative_log_return']:+.6g}, structural {summary['structural']:+.6g}, "
        f"trading {summary['trading']:+.6g}"
    )
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "decompose": cmd_decompose,
    "convergence": cmd_convergence,
    "leapfrog": cmd_leapfrog,
}


def _seed_list(text: str) -> List[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not seeds:
        raise argparse.ArgumentTypeError("at least one seed is required")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spt-decomp",
        description="Structural/trading decomposition of portfolio relative return.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        p = sub.add_parser(name, help=func.__doc__)
        p.add_argument("--config", type=Path, help="INI config file (defaults to a 5-stock demo)")
        p.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
        p.add_argument("--seed", type=_seed_list, help="comma-separated seeds")
        p.add_argument("--format", choices=("json", "csv", "both"))
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_overrides(args.out, args.seed, args.format)
        return COMMANDS[args.command](cfg)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SptError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
