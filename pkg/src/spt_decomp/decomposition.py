"""Structural/trading decomposition of relative log-return.

The structural process integrates portfolio weights against log market
weights with midpoint-averaged weights; the trading process is whatever is
left of the relative log-return. Because the trading process is defined as
that residual, ``relative == structural + trading`` holds to rounding for
any weight path.
"""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from .exceptions import DomainError, ValidationError
from .generators import (
    INTERIOR_FLOOR,
    Generator,
    drift_process,
    generated_weights,
    generator_log_change,
)
from .market import MarketPath, WeightPath, market_weights
from .paths import CumulativePath, check_aligned
from .portfolio import market_value, relative_log_return, value_process

WEIGHT_MISMATCH_TOL = 1e-9

WeightRule = Callable[[MarketPath], WeightPath]


class WeightMismatchWarning(UserWarning):
    """Weights passed with a generator differ from the generated weights."""


@dataclass(frozen=True, eq=False)
class DecompositionReport:
    relative_log_return: CumulativePath
    structural_log: CumulativePath
    trading: CumulativePath
    drift: Optional[CumulativePath] = None
    generator_log_change: Optional[CumulativePath] = None
    diagnostics: Dict[str, float] = field(default_factory=dict)
    meta: Dict[str, object] = field(default_factory=dict)

    @property
    def grid(self):
        return self.relative_log_return.grid

    def paths(self) -> Dict[str, np.ndarray]:
        out = {
            "rel": self.relative_log_return.values,
            "structural": self.structural_log.values,
            "trading": self.trading.values,
        }
        if self.drift is not None:
            out["drift"] = self.drift.values
        if self.generator_log_change is not None:
            out["generator_log_change"] = self.generator_log_change.values
        return out

    def to_dict(self) -> dict:
        return {
            "meta": dict(self.meta),
            "paths": {k: v.tolist() for k, v in self.paths().items()},
            "grid": self.grid.times.tolist(),
            "diagnostics": {k: _json_float(v) for k, v in self.diagnostics.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        paths = self.paths()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["time", *paths])
        cols = [self.grid.times, *paths.values()]
        for row in zip(*cols):
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def _json_float(v):
    v = float(v)
    return v if np.isfinite(v) else None


def structural_process(w: WeightPath, mu: WeightPath) -> CumulativePath:
    """Sum over stocks of the midpoint-weight integral against ``log mu_i``."""
    grid = check_aligned(w, mu)
    if w.n_stocks != mu.n_stocks:
        raise ValidationError("weight paths have different numbers of stocks")
    if np.min(mu.weights) < INTERIOR_FLOOR:
        raise DomainError("market weights touch the simplex boundary")
    mid = 0.5 * (w.weights[:, :-1] + w.weights[:, 1:])
    dlog_mu = np.diff(np.log(mu.weights), axis=1)
    return CumulativePath.from_increments(grid, np.sum(mid * dlog_mu, axis=0))


def trading_process(rel: CumulativePath, structural: CumulativePath) -> CumulativePath:
    return rel - structural


def total_variation(p) -> float:
    values = p.values if hasattr(p, "values") else np.asarray(p, dtype=np.float64)
    return float(np.sum(np.abs(np.diff(values))))


def decompose(
    m: MarketPath, w: WeightPath, g: Optional[Generator] = None
) -> DecompositionReport:
    """Split the relative log-return of ``w`` against the market.

    With a generator, also reports the drift process and the log-change of the
    generating function, and warns if ``w`` is not the generated portfolio.
    """
    check_aligned(m, w)
    mu = market_weights(m)
    rel = relative_log_return(value_process(m, w), market_value(m))
    structural = structural_process(w, mu)
    trading = trading_process(rel, structural)

    diagnostics = {
        "sup_abs_identity_residual": float(
            np.max(np.abs(rel.values - structural.values - trading.values))
        ),
        "sup_abs_relative": rel.sup_norm(),
        "sup_abs_structural": structural.sup_norm(),
        "sup_abs_trading": trading.sup_norm(),
        "tv_relative": total_variation(rel),
        "tv_structural": total_variation(structural),
        "tv_trading": total_variation(trading),
    }
    meta = {"n_stocks": m.n_stocks, "steps": m.grid.steps, "tickers": list(m.tickers)}

    drift = log_change = None
    if g is not None:
        expected = generated_weights(g, mu)
        mismatch = float(np.max(np.abs(expected.weights - w.weights)))
        if mismatch > WEIGHT_MISMATCH_TOL:
            warnings.warn(
                f"weights differ from those generated by {g.name} by up to {mismatch:.3g}",
                WeightMismatchWarning,
                stacklevel=2,
            )
        drift = drift_process(g, mu)
        log_change = generator_log_change(g, mu)
        diagnostics.update(
            {
                "weight_mismatch": mismatch,
                "structural_vs_generator": (structural - log_change).sup_norm(),
                "trading_vs_drift": (trading - drift).sup_norm(),
                "tv_drift": total_variation(drift),
            }
        )
        meta["generator"] = g.name

    return DecompositionReport(rel, structural, trading, drift, log_change, diagnostics, meta)


def generator_rule(g: Generator) -> WeightRule:
    def rule(m: MarketPath) -> WeightPath:
        return generated_weights(g, market_weights(m))

    return rule


def _ratios(values: Sequence[float]) -> list:
    out = []
    for a, b in zip(values, values[1:]):
        out.append(b / a if a != 0 else float("nan"))
    return out


@dataclass(frozen=True)
class Prop1Report:
    """Total variations across refinement levels of one underlying path."""

    steps: tuple
    tv_relative: tuple
    tv_trading: tuple

    @property
    def relative_ratios(self) -> list:
        return _ratios(self.tv_relative)

    @property
    def trading_ratios(self) -> list:
        return _ratios(self.tv_trading)


def verify_prop1(markets: Sequence[MarketPath], rule: Union[WeightRule, Generator]) -> Prop1Report:
    """Total variation of relative return and trading process per level.

    ``markets`` are views of one path at increasing resolution (see
    :func:`spt_decomp.market.refinement_levels`). Trading TV should settle
    while relative-return TV keeps growing like the square root of the step
    count.
    """
    if isinstance(rule, Generator):
        rule = generator_rule(rule)
    tv_rel, tv_trade = [], []
    for m in markets:
        report = decompose(m, rule(m))
        tv_rel.append(total_variation(report.relative_log_return))
        tv_trade.append(total_variation(report.trading))
    return Prop1Report(
        tuple(m.grid.steps for m in markets), tuple(tv_rel), tuple(tv_trade)
    )


@dataclass(frozen=True)
class Prop2Report:
    """Sup-norm residuals of a generated portfolio at each refinement level.

    ``r1`` compares the structural process with the log-change of the
    generating function, ``r2`` the trading process with the drift process.
    """

    steps: tuple
    r1: tuple
    r2: tuple

    @property
    def r1_ratios(self) -> list:
        return _ratios(self.r1)

    @property
    def r2_ratios(self) -> list:
        return _ratios(self.r2)


def verify_prop2(
    markets: Union[MarketPath, Sequence[MarketPath]], g: Generator
) -> Prop2Report:
    if isinstance(markets, MarketPath):
        markets = [markets]
    r1, r2 = [], []
    for m in markets:
        mu = market_weights(m)
        report = decompose(m, generated_weights(g, mu), g)
        r1.append(report.diagnostics["structural_vs_generator"])
        r2.append(report.diagnostics["trading_vs_drift"])
    return Prop2Report(tuple(m.grid.steps for m in markets), tuple(r1), tuple(r2))
