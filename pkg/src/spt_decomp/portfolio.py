"""Self-financing value processes, relative return and excess growth."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NonPositiveValueError, ValidationError
from .market import MarketPath, WeightPath, market_weights
from .paths import CumulativePath, TimeGrid, _frozen_array, check_aligned


@dataclass(frozen=True, eq=False)
class ValuePath:
    """Portfolio wealth normalized to start at 1."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen_array(self.values, "values")
        if values.size != len(self.grid):
            raise ValidationError("value path length does not match grid")
        if values[0] != 1.0:
            raise ValidationError("value path must start at 1")
        if np.any(values <= 0):
            raise ValidationError("value path must stay positive")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class RatePath:
    """Per-interval increments of a rate process (``len(grid) - 1`` entries)."""

    grid: TimeGrid
    increments: np.ndarray

    def __post_init__(self):
        inc = _frozen_array(self.increments, "increments")
        if inc.size != self.grid.steps:
            raise ValidationError(f"expected {self.grid.steps} increments, got {inc.size}")
        object.__setattr__(self, "increments", inc)

    def cumulative(self) -> CumulativePath:
        return CumulativePath.from_increments(self.grid, self.increments)


def value_process(m: MarketPath, w: WeightPath) -> ValuePath:
    """Wealth of a portfolio rebalanced to ``w`` at the start of every interval."""
    check_aligned(m, w)
    if w.n_stocks != m.n_stocks:
        raise ValidationError("weight path and market have different numbers of stocks")
    # 1 + sum w_i (R_i - 1) equals sum w_i R_i for weights summing to one, and is
    # exactly 1 when nothing moves
    net = m.caps[:, 1:] / m.caps[:, :-1] - 1.0
    step_growth = 1.0 + np.einsum("ik,ik->k", w.weights[:, :-1], net)
    bad = np.flatnonzero(step_growth <= 0)
    values = np.empty(len(m.grid))
    values[0] = 1.0
    np.cumprod(step_growth, out=values[1:])
    if bad.size:
        k = int(bad[0])
        raise NonPositiveValueError(k, float(values[k + 1]))
    return ValuePath(m.grid, values)


def market_value(m: MarketPath) -> ValuePath:
    """Value of the market portfolio, ``X(t) / X(0)`` up to rounding.

    Built with the same recursion as :func:`value_process` so that the market
    portfolio's relative log-return is exactly zero.
    """
    return value_process(m, market_weights(m))


def relative_log_return(zp: ValuePath, zm: ValuePath) -> CumulativePath:
    grid = check_aligned(zp, zm)
    rel = np.log(zp.values) - np.log(zm.values)
    rel[0] = 0.0
    return CumulativePath(grid, rel)


def excess_growth_rate(m: MarketPath, w: WeightPath) -> RatePath:
    """Realized excess growth, weights taken at the left endpoint.

    Per interval: half of (weighted average of squared log-cap increments
    minus the square of the weighted average log-cap increment).
    """
    check_aligned(m, w)
    if w.n_stocks != m.n_stocks:
        raise ValidationError("weight path and market have different numbers of stocks")
    dlog = np.diff(m.log_caps(), axis=1)
    wl = w.weights[:, :-1]
    avg_var = np.sum(wl * dlog**2, axis=0)
    port = np.sum(wl * dlog, axis=0)
    return RatePath(m.grid, 0.5 * (avg_var - port**2))


def constant_weights(grid: TimeGrid, weights) -> WeightPath:
    w = np.asarray(weights, dtype=np.float64)
    return WeightPath(grid, np.repeat(w[:, None], len(grid), axis=1))


def buy_and_hold_weights(m: MarketPath, shares) -> WeightPath:
    """Weights of a portfolio holding fixed share counts of each stock's cap."""
    shares = np.asarray(shares, dtype=np.float64)
    if shares.shape != (m.n_stocks,) or np.any(shares < 0) or not np.any(shares > 0):
        raise ValidationError("shares must be non-negative, one per stock, not all zero")
    held = shares[:, None] * m.caps
    return WeightPath(m.grid, held / held.sum(axis=0))
