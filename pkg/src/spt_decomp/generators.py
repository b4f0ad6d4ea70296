"""Generating functions on the unit simplex and the portfolios they generate.

A generator bundles a positive function ``S`` on the open simplex with
``log S``, the gradient of ``log S`` and the Hessian of ``S``. Every
callable takes points as columns: ``x`` has shape ``(n,)`` or ``(n, K)``;
values come back with shape ``()``/``(K,)``, gradients ``(n, ...)`` and
Hessians ``(n, n, ...)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import DomainError, ValidationError
from .market import WeightPath
from .paths import CumulativePath

INTERIOR_FLOOR = 1e-12

DriftPath = CumulativePath


def _check_interior(x: np.ndarray, n: Optional[int]) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2):
        raise DomainError("points must have shape (n,) or (n, K)")
    if n is not None and x.shape[0] != n:
        raise DomainError(f"generator is defined for n={n}, got points of dimension {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise DomainError("points contain non-finite entries")
    low = float(np.min(x))
    if low < INTERIOR_FLOOR:
        raise DomainError(
            f"point outside the simplex interior (min coordinate {low:.3g} < {INTERIOR_FLOOR:g})"
        )
    return x


def _eye(n: int, like: np.ndarray) -> np.ndarray:
    eye = np.eye(n)
    return eye if like.ndim == 1 else eye[:, :, None]


def _outer(g: np.ndarray) -> np.ndarray:
    return g[:, None] * g[None, :]


def _diag(v: np.ndarray) -> np.ndarray:
    return _eye(v.shape[0], v) * v[None, :]


@dataclass(frozen=True)
class Generator:
    """A positive C^2 function on the simplex, with the derivatives we need.

    ``n`` is None when the generator works in any dimension.
    """

    name: str
    log_value_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    log_gradient_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    hessian_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    n: Optional[int] = None

    def value(self, x) -> np.ndarray:
        return np.exp(self.log_value(x))

    def log_value(self, x) -> np.ndarray:
        return self.log_value_fn(_check_interior(x, self.n))

    def log_gradient(self, x) -> np.ndarray:
        return self.log_gradient_fn(_check_interior(x, self.n))

    def hessian(self, x) -> np.ndarray:
        return self.hessian_fn(_check_interior(x, self.n))


def _market() -> Generator:
    return Generator(
        "market",
        lambda x: np.zeros(x.shape[1:]),
        np.zeros_like,
        lambda x: np.zeros((x.shape[0],) + x.shape),
    )


def _geometric_mean() -> Generator:
    def log_value(x):
        return np.mean(np.log(x), axis=0)

    def log_gradient(x):
        return 1.0 / (x.shape[0] * x)

    def hessian(x):
        n = x.shape[0]
        g = log_gradient(x)
        s = np.exp(log_value(x))
        return s * (_outer(g) - _diag(1.0 / (n * x * x)))

    return Generator("geometric_mean", log_value, log_gradient, hessian)


def _entropy() -> Generator:
    def value(x):
        return -np.sum(x * np.log(x), axis=0)

    def log_value(x):
        return np.log(value(x))

    def log_gradient(x):
        return -(np.log(x) + 1.0) / value(x)

    def hessian(x):
        return _diag(-1.0 / x)

    return Generator("entropy", log_value, log_gradient, hessian)


def _diversity(p: float) -> Generator:
    if not 0.0 < p < 1.0:
        raise ValidationError(f"diversity parameter must satisfy 0 < p < 1, got {p}")

    def power_sum(x):
        return np.sum(x**p, axis=0)

    def log_value(x):
        return np.log(power_sum(x)) / p

    def log_gradient(x):
        return x ** (p - 1.0) / power_sum(x)

    def hessian(x):
        g = log_gradient(x)
        s = np.exp(log_value(x))
        return s * (1.0 - p) * (_outer(g) - _diag(x ** (p - 2.0) / power_sum(x)))

    return Generator(f"diversity(p={p:g})", log_value, log_gradient, hessian)


def _constant_weighted(w) -> Generator:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size < 2:
        raise ValidationError("constant weights must be a vector of length >= 2")
    if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ValidationError("constant weights must lie in the open simplex")
    w = w / w.sum()
    wc = w.reshape(-1, 1)

    def _w(x):
        return w if x.ndim == 1 else wc

    def log_value(x):
        return np.sum(_w(x) * np.log(x), axis=0)

    def log_gradient(x):
        return _w(x) / x

    def hessian(x):
        g = log_gradient(x)
        s = np.exp(log_value(x))
        return s * (_outer(g) - _diag(_w(x) / (x * x)))

    label = ",".join(f"{v:g}" for v in w)
    return Generator(f"constant_weighted(w={label})", log_value, log_gradient, hessian, n=w.size)


def builtin_generator(kind: str, *, p: float = None, w=None) -> Generator:
    """One of ``market``, ``geometric_mean``, ``entropy``, ``diversity``,
    ``constant_weighted``. ``diversity`` needs ``p``; ``constant_weighted``
    needs ``w``."""
    if kind == "market":
        return _market()
    if kind in ("geometric_mean", "geom"):
        return _geometric_mean()
    if kind == "entropy":
        return _entropy()
    if kind == "diversity":
        if p is None:
            raise ValidationError("diversity generator needs p")
        return _diversity(float(p))
    if kind in ("constant_weighted", "constweight"):
        if w is None:
            raise ValidationError("constant_weighted generator needs w")
        return _constant_weighted(w)
    raise ValidationError(f"unknown generator kind {kind!r}")


def parse_generator(text: str) -> Generator:
    """Parse CLI strings such as ``entropy``, ``diversity:p=0.76`` or
    ``constweight:w=0.2,0.3,0.5``."""
    text = text.strip()
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    params = {}
    if rest:
        key, eq, val = rest.partition("=")
        if not eq:
            raise ValidationError(f"malformed generator parameter in {text!r}")
        params[key.strip()] = val.strip()
    try:
        if kind == "diversity":
            if set(params) != {"p"}:
                raise ValidationError("diversity expects 'diversity:p=<value>'")
            return builtin_generator("diversity", p=float(params["p"]))
        if kind == "constweight":
            if set(params) != {"w"}:
                raise ValidationError("constweight expects 'constweight:w=<w1>,<w2>,...'")
            return builtin_generator("constweight", w=[float(v) for v in params["w"].split(",")])
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"cannot parse generator {text!r}: {exc}") from None
    if params:
        raise ValidationError(f"generator {kind!r} takes no parameters")
    if kind in ("market", "geom", "entropy"):
        return builtin_generator(kind)
    raise ValidationError(f"unknown generator {text!r}")


def generated_weights(g: Generator, mu: WeightPath) -> WeightPath:
    """Portfolio weights generated by ``g`` along the market weight path ``mu``."""
    x = mu.weights
    grad = g.log_gradient(x)
    shift = 1.0 - np.sum(x * grad, axis=0)
    return WeightPath(mu.grid, (grad + shift) * x)


def drift_process(g: Generator, mu: WeightPath) -> CumulativePath:
    """Cumulative drift, with S and its Hessian taken at each interval's left end.

    ``d<mu_i, mu_j>`` is realized as the product of market weight increments.
    """
    x = mu.weights
    left = x[:, :-1]
    hess = g.hessian(left)
    s = g.value(left)
    dmu = np.diff(x, axis=1)
    quad = np.einsum("ijk,ik,jk->k", hess, dmu, dmu)
    return CumulativePath.from_increments(mu.grid, -0.5 * quad / s)


def generator_log_change(g: Generator, mu: WeightPath) -> CumulativePath:
    log_s = g.log_value(mu.weights)
    change = log_s - log_s[0]
    return CumulativePath(mu.grid, change)


def sample_simplex(n: int, size: int, rng: np.random.Generator, floor: float = 1e-6) -> np.ndarray:
    """Uniform (Dirichlet(1)) interior points as columns, clipped away from faces."""
    pts = rng.dirichlet(np.ones(n), size=size).T
    pts = np.clip(pts, floor, None)
    return pts / pts.sum(axis=0)


def validate_generator(g: Generator, n: int, points: int = 10_000, seed: int = 0) -> dict:
    """Check positivity, Hessian symmetry and bounded ``x_i D_i log S`` on a
    random interior lattice. Raises ValidationError on failure."""
    if g.n is not None:
        n = g.n
    x = sample_simplex(n, points, np.random.default_rng(seed))
    value = g.value(x)
    xgrad = x * g.log_gradient(x)
    hess = g.hessian(x)
    asym = float(np.max(np.abs(hess - np.swapaxes(hess, 0, 1)))) if hess.size else 0.0
    report = {
        "min_value": float(np.min(value)),
        "max_abs_x_log_gradient": float(np.max(np.abs(xgrad))),
        "max_hessian_asymmetry": asym,
    }
    if not report["min_value"] > 0:
        raise ValidationError(f"{g.name}: generator is not positive on the interior")
    if not np.all(np.isfinite(xgrad)):
        raise ValidationError(f"{g.name}: x_i D_i log S is not finite on the lattice")
    if asym > 1e-10 * max(1.0, float(np.max(np.abs(hess)))):
        raise ValidationError(f"{g.name}: Hessian is not symmetric")
    return report
