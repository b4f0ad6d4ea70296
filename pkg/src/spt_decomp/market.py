"""Market capitalization paths: simulation, CSV I/O and market weights."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .exceptions import IngestionError, ValidationError
from .paths import TimeGrid

DAYS_PER_YEAR = 365.25
CSV_HEADER = ("date", "ticker", "cap")
DEFAULT_START_DATE = date(2000, 1, 3)


def _matrix(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be a 2-d (stocks x times) matrix")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MarketPath:
    """Capitalizations ``caps[i, k]`` of stock ``i`` at ``grid.times[k]``."""

    grid: TimeGrid
    caps: np.ndarray
    tickers: Optional[tuple] = None
    start_date: Optional[date] = None

    def __post_init__(self):
        caps = _matrix(self.caps, "caps")
        n, nt = caps.shape
        if n < 2:
            raise ValidationError("a market needs more than one stock")
        if nt != len(self.grid):
            raise ValidationError(f"caps have {nt} columns for a grid of {len(self.grid)} points")
        if np.any(caps <= 0):
            i, k = np.argwhere(caps <= 0)[0]
            raise ValidationError(f"non-positive capitalization for stock {i} at time index {k}")
        object.__setattr__(self, "caps", caps)
        tickers = self.tickers
        if tickers is None:
            tickers = tuple(f"S{i + 1}" for i in range(n))
        tickers = tuple(str(t) for t in tickers)
        if len(tickers) != n or len(set(tickers)) != n:
            raise ValidationError("tickers must be unique, one per stock")
        object.__setattr__(self, "tickers", tickers)

    @property
    def n_stocks(self) -> int:
        return self.caps.shape[0]

    def total(self) -> np.ndarray:
        return self.caps.sum(axis=0)

    def log_caps(self) -> np.ndarray:
        return np.log(self.caps)

    def subsample(self, stride: int) -> "MarketPath":
        """Every ``stride``-th grid point; a coarser view of the same path."""
        return MarketPath(
            self.grid.subsample(stride), self.caps[:, ::stride], self.tickers, self.start_date
        )


@dataclass(frozen=True, eq=False)
class WeightPath:
    """Weights ``weights[i, k]``; each column sums to one."""

    grid: TimeGrid
    weights: np.ndarray

    def __post_init__(self):
        w = _matrix(self.weights, "weights")
        if w.shape[1] != len(self.grid):
            raise ValidationError(
                f"weights have {w.shape[1]} columns for a grid of {len(self.grid)} points"
            )
        sums = w.sum(axis=0)
        bad = np.flatnonzero(np.abs(sums - 1.0) > 1e-9)
        if bad.size:
            raise ValidationError(
                f"weights at time index {bad[0]} sum to {sums[bad[0]]!r}, not 1"
            )
        object.__setattr__(self, "weights", w)

    @property
    def n_stocks(self) -> int:
        return self.weights.shape[0]

    def is_interior(self, floor: float = 0.0) -> bool:
        return bool(np.all(self.weights > floor))


@dataclass(frozen=True)
class GbmSpec:
    """Correlated geometric Brownian motion market.

    ``drift`` is the per-stock log-drift coefficient and ``covariance`` the
    log-cap covariance, both per year. Log-caps move by
    ``(drift - diag(covariance)/2) dt`` plus a N(0, covariance dt) shock.
    """

    n: int
    drift: Sequence[float]
    covariance: Sequence[Sequence[float]]
    initial_caps: Sequence[float]
    horizon: float = 1.0
    steps: int = 252
    seed: int = 0
    _factor: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = int(self.n)
        drift = np.asarray(self.drift, dtype=np.float64)
        cov = np.asarray(self.covariance, dtype=np.float64)
        x0 = np.asarray(self.initial_caps, dtype=np.float64)
        if n < 2:
            raise ValidationError("GBM market needs n >= 2")
        if drift.shape != (n,) or x0.shape != (n,) or cov.shape != (n, n):
            raise ValidationError("drift, initial_caps and covariance must match n")
        if not (np.all(np.isfinite(cov)) and np.all(np.isfinite(drift))):
            raise ValidationError("drift and covariance must be finite")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12):
            raise ValidationError("covariance must be symmetric")
        if int(self.steps) < 1:
            raise ValidationError("steps must be >= 1")
        if not self.horizon > 0:
            raise ValidationError("horizon must be positive")
        if not np.all(x0 > 0):
            raise ValidationError("initial caps must be positive")
        eigval, eigvec = np.linalg.eigh(cov)
        tol = 1e-12 * max(1.0, float(np.max(np.abs(eigval))))
        if eigval[0] < -tol:
            raise ValidationError(
                f"covariance is not positive semidefinite (min eigenvalue {eigval[0]:.3g})"
            )
        factor = eigvec * np.sqrt(np.clip(eigval, 0.0, None))
        object.__setattr__(self, "_factor", factor)

    @classmethod
    def diagonal(
        cls, n: int, variance: float, initial_caps=None, drift: float = 0.0, **kw
    ) -> "GbmSpec":
        if initial_caps is None:
            initial_caps = [100.0] * n
        return cls(
            n=n,
            drift=[drift] * n,
            covariance=(variance * np.eye(n)).tolist(),
            initial_caps=list(initial_caps),
            **kw,
        )

    def with_(self, **changes) -> "GbmSpec":
        kw = {
            "n": self.n,
            "drift": self.drift,
            "covariance": self.covariance,
            "initial_caps": self.initial_caps,
            "horizon": self.horizon,
            "steps": self.steps,
            "seed": self.seed,
        }
        kw.update(changes)
        return GbmSpec(**kw)


def simulate_gbm(spec: GbmSpec) -> MarketPath:
    """Exact log-Euler simulation of ``spec`` on a uniform grid."""
    grid = TimeGrid.uniform(spec.horizon, spec.steps)
    dt = spec.horizon / spec.steps
    cov_diag = np.diag(np.asarray(spec.covariance, dtype=np.float64))
    mean = (np.asarray(spec.drift, dtype=np.float64) - 0.5 * cov_diag) * dt
    rng = np.random.default_rng(spec.seed)
    shocks = rng.standard_normal((spec.steps, spec.n)) @ spec._factor.T
    dlog = mean + np.sqrt(dt) * shocks
    growth = np.ones((spec.n, spec.steps + 1))
    growth[:, 1:] = np.exp(np.cumsum(dlog, axis=0).T)
    # scaling rather than exp(log(c0) + ...) keeps the initial caps exact
    caps0 = np.asarray(spec.initial_caps, dtype=np.float64)
    return MarketPath(grid, caps0[:, None] * growth)


def refinement_levels(spec: GbmSpec, levels: Sequence[int]) -> list:
    """Markets at each step count in ``levels`` driven by one Brownian path.

    The path is simulated once at the finest level and subsampled, so every
    level is an exact GBM sample of the same realization.
    """
    levels = [int(s) for s in levels]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValidationError("refinement levels must be strictly increasing")
    finest = levels[-1]
    for s in levels:
        if finest % s:
            raise ValidationError(f"level {s} does not divide finest level {finest}")
    fine = simulate_gbm(spec.with_(steps=finest))
    return [fine.subsample(finest // s) for s in levels]


def market_weights(m: MarketPath) -> WeightPath:
    return WeightPath(m.grid, m.caps / m.total())


def _parse_cap(text: str, row: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise IngestionError(f"unparseable cap {text!r}", row) from None
    if not np.isfinite(value) or value <= 0:
        raise IngestionError(f"cap must be a positive finite number, got {text!r}", row)
    return value


def ingest_caps_csv(source: Union[bytes, str, io.IOBase, Iterable[str]]) -> MarketPath:
    """Read a long-format ``date,ticker,cap`` file into a MarketPath.

    Times are year fractions from the first date (actual/365.25). Tickers keep
    their order of first appearance.
    """
    if isinstance(source, bytes):
        source = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        source = io.StringIO(source)
    elif isinstance(source, io.BufferedIOBase) or (
        hasattr(source, "mode") and "b" in getattr(source, "mode", "")
    ):
        source = io.TextIOWrapper(source, encoding="utf-8")

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestionError("empty file", 1) from None
    if tuple(h.strip().lstrip("﻿") for h in header) != CSV_HEADER:
        raise IngestionError(f"expected header {','.join(CSV_HEADER)}", 1)

    cells = {}
    tickers = {}
    dates = set()
    for row, record in enumerate(reader, start=2):
        if not record or all(not c.strip() for c in record):
            continue
        if len(record) != 3 or any(not c.strip() for c in record):
            raise IngestionError("expected 3 non-empty cells (date,ticker,cap)", row)
        d_text, ticker, cap_text = (c.strip() for c in record)
        try:
            day = date.fromisoformat(d_text)
        except ValueError:
            raise IngestionError(f"unparseable date {d_text!r}", row) from None
        cap = _parse_cap(cap_text, row)
        if (day, ticker) in cells:
            raise IngestionError(f"duplicate entry for {ticker} on {day}", row)
        cells[(day, ticker)] = (cap, row)
        tickers.setdefault(ticker, len(tickers))
        dates.add(day)

    if len(dates) < 2:
        raise IngestionError("need at least 2 dates")
    if len(tickers) < 2:
        raise IngestionError("need at least 2 tickers")
    days = sorted(dates)
    names = list(tickers)
    caps = np.empty((len(names), len(days)))
    for k, day in enumerate(days):
        for i, name in enumerate(names):
            try:
                caps[i, k] = cells[(day, name)][0]
            except KeyError:
                raise IngestionError(f"missing cap for {name} on {day}") from None
    start = days[0]
    times = np.array([(d - start).days for d in days], dtype=np.float64) / DAYS_PER_YEAR
    return MarketPath(TimeGrid(times), caps, tuple(names), start)


def grid_dates(m: MarketPath) -> list:
    """Calendar dates for the grid, rounding year fractions to whole days."""
    start = m.start_date or DEFAULT_START_DATE
    offsets = np.rint((m.grid.times - m.grid.times[0]) * DAYS_PER_YEAR).astype(int)
    if np.any(np.diff(offsets) <= 0):
        raise ValidationError(
            "grid is finer than one day; cannot be written with calendar dates"
        )
    return [start + timedelta(days=int(o)) for o in offsets]


def write_caps_csv(m: MarketPath, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for k, day in enumerate(grid_dates(m)):
        iso = day.isoformat()
        for i, ticker in enumerate(m.tickers):
            writer.writerow((iso, ticker, repr(float(m.caps[i, k]))))


def caps_csv_text(m: MarketPath) -> str:
    buf = io.StringIO()
    write_caps_csv(m, buf)
    return buf.getvalue()
