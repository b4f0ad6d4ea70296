"""scikit-learn compatible wrappers.

Arrays follow the scikit-learn layout: one row per time point and one column
per stock, i.e. the transpose of :class:`~spt_decomp.market.MarketPath.caps`.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .decomposition import decompose
from .exceptions import ValidationError
from .generators import Generator, generated_weights, parse_generator
from .market import MarketPath, WeightPath, market_weights
from .paths import TimeGrid

STEPS_PER_YEAR = 252


def check_caps(X, times=None) -> MarketPath:
    """Validate a (times x stocks) capitalization array and wrap it."""
    X = check_array(X, dtype=np.float64, ensure_min_samples=2, ensure_min_features=2)
    if np.any(X <= 0):
        raise ValidationError("capitalizations must be strictly positive")
    if times is None:
        times = np.arange(X.shape[0]) / STEPS_PER_YEAR
    return MarketPath(TimeGrid(times), X.T)


def check_weights(W, market: MarketPath) -> WeightPath:
    W = check_array(W, dtype=np.float64, ensure_min_samples=2, ensure_min_features=2)
    if W.shape != market.caps.T.shape:
        raise ValidationError(f"weights have shape {W.shape}, caps have {market.caps.T.shape}")
    return WeightPath(market.grid, W.T)


def _resolve(generator) -> Generator:
    if isinstance(generator, Generator):
        return generator
    return parse_generator(str(generator))


class GeneratedPortfolio(TransformerMixin, BaseEstimator):
    """Map capitalizations to the weights of a functionally generated portfolio.

    Stateless apart from input validation; ``fit`` only records the number of
    stocks.

    Parameters
    ----------
    generator : str or Generator, default="entropy"
        Generator spec such as ``"entropy"``, ``"diversity:p=0.76"`` or
        ``"constweight:w=0.2,0.3,0.5"``.
    """

    def __init__(self, generator="entropy"):
        self.generator = generator

    def fit(self, X, y=None):
        market = check_caps(X)
        self.generator_ = _resolve(self.generator)
        self.n_features_in_ = market.n_stocks
        return self

    def transform(self, X):
        check_is_fitted(self, "generator_")
        market = check_caps(X)
        if market.n_stocks != self.n_features_in_:
            raise ValidationError(
                f"X has {market.n_stocks} stocks, fitted with {self.n_features_in_}"
            )
        return generated_weights(self.generator_, market_weights(market)).weights.T.copy()


class ReturnDecomposer(BaseEstimator):
    """Decompose relative log-return into structural and trading parts.

    ``fit(X, weights=None)`` takes capitalizations ``X`` and optional
    portfolio ``weights`` of the same shape. Without weights, the portfolio
    generated by ``generator`` is used. Fitted attributes hold the
    cumulative paths as 1-d arrays.

    Parameters
    ----------
    generator : str, Generator or None
        Needed when weights are omitted; when given together with weights,
        drift and generating-function paths are reported as well.
    times : array-like or None
        Grid times in years. Defaults to daily steps of 1/252.
    """

    def __init__(self, generator=None, times=None):
        self.generator = generator
        self.times = times

    def _run(self, X, weights):
        market = check_caps(X, self.times)
        g = None if self.generator is None else _resolve(self.generator)
        if weights is None:
            if g is None:
                raise ValidationError("either weights or a generator is required")
            w = generated_weights(g, market_weights(market))
        else:
            w = check_weights(weights, market)
        return decompose(market, w, g)

    def fit(self, X, y=None, weights=None):
        report = self._run(X, weights)
        self.report_ = report
        self.n_features_in_ = report.meta["n_stocks"]
        self.relative_log_return_ = report.relative_log_return.values
        self.structural_ = report.structural_log.values
        self.trading_ = report.trading.values
        self.drift_ = None if report.drift is None else report.drift.values
        self.diagnostics_ = dict(report.diagnostics)
        return self

    def transform(self, X, weights=None):
        """Columns: relative log-return, structural, trading, and when a
        generator is set, drift and generator log-change."""
        check_is_fitted(self, "report_")
        report = self._run(X, weights)
        return np.column_stack(list(report.paths().values()))

    def fit_transform(self, X, y=None, weights=None):
        self.fit(X, weights=weights)
        return np.column_stack(list(self.report_.paths().values()))

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "report_")
        return np.array(list(self.report_.paths()), dtype=object)
