"""Named portfolio rules and the rank-swap ("leapfrog") scenario."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .decomposition import DecompositionReport, WeightRule, decompose, generator_rule
from .exceptions import ValidationError
from .generators import Generator
from .market import MarketPath, WeightPath, market_weights
from .paths import TimeGrid
from .portfolio import buy_and_hold_weights, constant_weights


def weight_rule(spec: str, generator: Optional[Generator] = None) -> WeightRule:
    """Build a weight rule from a config string.

    ``generator`` uses the generated portfolio of ``generator``; the others are
    ``market``, ``equal``, ``constant:w1,...`` and ``buyhold:h1,...``.
    """
    kind, _, arg = spec.strip().partition(":")
    if kind == "generator":
        if generator is None:
            raise ValidationError("rule 'generator' needs a generator")
        return generator_rule(generator)
    if kind == "market":
        return market_weights
    if kind == "equal":
        return lambda m: constant_weights(m.grid, np.full(m.n_stocks, 1.0 / m.n_stocks))
    try:
        values = [float(v) for v in arg.split(",")] if arg else []
    except ValueError:
        raise ValidationError(f"cannot parse weight rule {spec!r}") from None
    if kind == "constant":
        return lambda m: constant_weights(m.grid, values)
    if kind == "buyhold":
        return lambda m: buy_and_hold_weights(m, values)
    raise ValidationError(f"unknown weight rule {spec!r}")


def top_m_weights(m: MarketPath, size: int) -> WeightPath:
    """Cap-weighted index of the ``size`` largest stocks at each time.

    Members are weighted in proportion to their caps, renormalized over the
    members. Ties in cap keep the lower stock index first.
    """
    if not 1 <= size <= m.n_stocks:
        raise ValidationError(f"index size must be between 1 and {m.n_stocks}")
    order = np.argsort(-m.caps, axis=0, kind="stable")
    member = np.zeros(m.caps.shape, dtype=bool)
    np.put_along_axis(member, order[:size], True, axis=0)
    held = np.where(member, m.caps, 0.0)
    return WeightPath(m.grid, held / held.sum(axis=0))


def leapfrog_market(caps, swap_rank: int, swap: bool = True, steps_after: int = 2) -> MarketPath:
    """Static market in which the stocks ranked ``swap_rank`` and
    ``swap_rank + 1`` exchange capitalizations in a single step.

    The path is: initial caps, swapped caps, then ``steps_after - 1`` more
    copies of the swapped caps. Nothing else moves, so total market cap is
    constant. With ``swap=False`` every point equals the initial caps.
    """
    caps = np.asarray(caps, dtype=np.float64)
    n = caps.size
    if n < 2:
        raise ValidationError("need at least two stocks")
    if not 1 <= swap_rank < n:
        raise ValidationError(f"swap rank must be between 1 and {n - 1}")
    if steps_after < 1:
        raise ValidationError("steps_after must be >= 1")
    order = np.argsort(-caps, kind="stable")
    upper, lower = order[swap_rank - 1], order[swap_rank]
    if not caps[upper] > caps[lower]:
        raise ValidationError("stocks at the swapped ranks must have distinct caps")
    after = caps.copy()
    if swap:
        after[[upper, lower]] = caps[[lower, upper]]
    columns = [caps] + [after] * steps_after
    grid = TimeGrid.uniform(steps_after / 252.0, steps_after)
    return MarketPath(grid, np.column_stack(columns))


def leapfrog_experiment(caps, m: int, swap: bool = True, swap_rank: Optional[int] = None):
    """Run the rank-swap scenario for a top-``m`` index.

    Returns the decomposition report and a summary with the share of the
    relative log-return attributed to each process.
    """
    caps = np.asarray(caps, dtype=np.float64)
    if swap_rank is None:
        swap_rank = m
    market = leapfrog_market(caps, swap_rank, swap=swap)
    report: DecompositionReport = decompose(market, top_m_weights(market, m))
    rel = report.relative_log_return.final()
    structural = report.structural_log.final()
    trading = report.trading.final()
    summary = {
        "n": int(caps.size),
        "m": int(m),
        "swap_rank": int(swap_rank),
        "swap": bool(swap),
        "relative_log_return": rel,
        "structural": structural,
        "trading": trading,
        "structural_share": structural / rel if rel != 0 else None,
        "trading_share": trading / rel if rel != 0 else None,
    }
    return report, summary
