"""Multi-seed refinement studies."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence

import numpy as np

from .decomposition import decompose, generator_rule, verify_prop1, verify_prop2
from .generators import Generator
from .market import GbmSpec, refinement_levels
from .paths import fs_chain_rule_residual, ScalarPath
from .portfolio import excess_growth_rate

THREADS_ENV = "SPT_DECOMP_THREADS"


def max_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def map_seeds(func: Callable[[int], object], seeds: Sequence[int]) -> list:
    """``[func(s) for s in seeds]``, run on a thread pool; order is preserved."""
    workers = min(max_workers(), len(seeds))
    if workers <= 1:
        return [func(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, seeds))


def median_ratios(table: np.ndarray) -> List[float]:
    """Ratios of successive column medians of a (seeds x levels) table."""
    med = np.median(table, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (med[1:] / med[:-1]).tolist()


def strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


@dataclass(frozen=True)
class RefinementTable:
    """Per-seed, per-level values of one named quantity."""

    name: str
    seeds: tuple
    steps: tuple
    values: np.ndarray  # (seeds, levels)

    @property
    def medians(self) -> List[float]:
        return np.median(self.values, axis=0).tolist()

    @property
    def median_ratios(self) -> List[float]:
        return median_ratios(self.values)

    def rows(self):
        for i, seed in enumerate(self.seeds):
            for j, steps in enumerate(self.steps):
                yield seed, steps, float(self.values[i, j])


def _table(name, seeds, steps, rows) -> RefinementTable:
    return RefinementTable(name, tuple(seeds), tuple(steps), np.array(rows, dtype=np.float64))


def prop2_study(spec: GbmSpec, g: Generator, seeds, levels) -> Dict[str, RefinementTable]:
    def one(seed):
        return verify_prop2(refinement_levels(spec.with_(seed=seed), levels), g)

    reports = map_seeds(one, list(seeds))
    return {
        "r1": _table("r1", seeds, levels, [r.r1 for r in reports]),
        "r2": _table("r2", seeds, levels, [r.r2 for r in reports]),
    }


def prop1_study(spec: GbmSpec, rule, seeds, levels) -> Dict[str, RefinementTable]:
    def one(seed):
        return verify_prop1(refinement_levels(spec.with_(seed=seed), levels), rule)

    reports = map_seeds(one, list(seeds))
    return {
        "tv_relative": _table("tv_relative", seeds, levels, [r.tv_relative for r in reports]),
        "tv_trading": _table("tv_trading", seeds, levels, [r.tv_trading for r in reports]),
    }


def trading_sup_study(spec: GbmSpec, rule, seeds, levels, against_growth: bool = False) -> RefinementTable:
    """sup |T| per level, or sup |T - cumulative excess growth| when
    ``against_growth`` is set."""
    if isinstance(rule, Generator):
        rule = generator_rule(rule)

    def one(seed):
        row = []
        for m in refinement_levels(spec.with_(seed=seed), levels):
            w = rule(m)
            trading = decompose(m, w).trading
            if against_growth:
                trading = trading - excess_growth_rate(m, w).cumulative()
            row.append(trading.sup_norm())
        return row

    name = "sup_trading_minus_growth" if against_growth else "sup_trading"
    return _table(name, seeds, levels, map_seeds(one, list(seeds)))


def log_chain_rule_study(spec: GbmSpec, seeds, levels, stock: int = 0) -> RefinementTable:
    """sup-norm of the chain-rule residual for ``F = log`` on one stock's cap."""

    def one(seed):
        row = []
        for m in refinement_levels(spec.with_(seed=seed), levels):
            x = ScalarPath(m.grid, m.caps[stock])
            row.append(fs_chain_rule_residual(np.log, lambda v: 1.0 / v, x).sup_norm())
        return row

    return _table("log_chain_rule_residual", seeds, levels, map_seeds(one, list(seeds)))
