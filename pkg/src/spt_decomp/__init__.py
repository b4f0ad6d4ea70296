"""Structural/trading decomposition of portfolio relative log-return."""
from .decomposition import (
    DecompositionReport,
    decompose,
    structural_process,
    total_variation,
    trading_process,
    verify_prop1,
    verify_prop2,
)
from .exceptions import (
    AlignmentError,
    DomainError,
    IngestionError,
    NonPositiveValueError,
    NumericalError,
    SptError,
    ValidationError,
)
from .generators import (
    Generator,
    builtin_generator,
    drift_process,
    generated_weights,
    parse_generator,
)
from .market import (
    GbmSpec,
    MarketPath,
    WeightPath,
    ingest_caps_csv,
    market_weights,
    refinement_levels,
    simulate_gbm,
)
from .paths import (
    CumulativePath,
    ScalarPath,
    TimeGrid,
    cross_variation,
    fs_chain_rule_residual,
    fs_integral,
    ito_integral,
    quadratic_variation,
)
from .portfolio import (
    RatePath,
    ValuePath,
    excess_growth_rate,
    market_value,
    relative_log_return,
    value_process,
)

__version__ = "0.1.0"


def __getattr__(name):
    # scikit-learn is slow to import; load the estimators on first use
    if name in ("GeneratedPortfolio", "ReturnDecomposer"):
        from . import estimators

        return getattr(estimators, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")

__all__ = [
    "GeneratedPortfolio",
    "ReturnDecomposer",
    "DecompositionReport",
    "decompose",
    "structural_process",
    "total_variation",
    "trading_process",
    "verify_prop1",
    "verify_prop2",
    "AlignmentError",
    "DomainError",
    "IngestionError",
    "NonPositiveValueError",
    "NumericalError",
    "SptError",
    "ValidationError",
    "Generator",
    "builtin_generator",
    "drift_process",
    "generated_weights",
    "parse_generator",
    "GbmSpec",
    "MarketPath",
    "WeightPath",
    "ingest_caps_csv",
    "market_weights",
    "refinement_levels",
    "simulate_gbm",
    "CumulativePath",
    "ScalarPath",
    "TimeGrid",
    "cross_variation",
    "fs_chain_rule_residual",
    "fs_integral",
    "ito_integral",
    "quadratic_variation",
    "RatePath",
    "ValuePath",
    "excess_growth_rate",
    "market_value",
    "relative_log_return",
    "value_process",
]
