"""Scalable continuous benchmark functions.

Every function is written against a 2-D array of points (one row per point)
so that batch evaluation during local search and landscape sampling is a
single numpy call. :func:`evaluate` is the checked single-point entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

# x sin(sqrt|x|) peaks at 420.968746...; this is that peak value, so the
# Schwefel optimum is zero to machine precision (418.9829 leaves 1.3e-5/dim).
SCHWEFEL_CONSTANT = 418.9828872724338
SCHWEFEL_ARGMAX = 420.9687463599820
HAPPYCAT_EXPONENT = 1.0 / 8.0
ACKLEY_A = 20.0


def _ackley(x: np.ndarray) -> np.ndarray:
    n = x.shape[1]
    s1 = np.sqrt(np.sum(x * x, axis=1) / n)
    s2 = np.sum(np.cos(2.0 * np.pi * x), axis=1) / n
    return -ACKLEY_A * np.exp(-0.2 * s1) - np.exp(s2) + ACKLEY_A + np.e


def _eggholder(x: np.ndarray) -> np.ndarray:
    a, b = x[:, :-1], x[:, 1:]
    t = -a * np.sin(np.sqrt(np.abs(a - b - 47.0))) - (b + 47.0) * np.sin(
        np.sqrt(np.abs(0.5 * a + b + 47.0))
    )
    return np.sum(t, axis=1)


def _griewank(x: np.ndarray) -> np.ndarray:
    i = np.arange(1, x.shape[1] + 1)
    return 1.0 + np.sum(x * x, axis=1) / 4000.0 - np.prod(np.cos(x / np.sqrt(i)), axis=1)


def _happycat(x: np.ndarray) -> np.ndarray:
    n = x.shape[1]
    r2 = np.sum(x * x, axis=1)
    return ((r2 - n) ** 2) ** HAPPYCAT_EXPONENT + (0.5 * r2 + np.sum(x, axis=1)) / n + 0.5


def _rana(x: np.ndarray) -> np.ndarray:
    # Summation form with the first coordinate as the shared partner.
    x1 = x[:, :1]
    t1 = np.sqrt(np.abs(x1 + x + 1.0))
    t2 = np.sqrt(np.abs(x1 - x + 1.0))
    t = x * np.sin(t2) * np.cos(t1) + (x1 + 1.0) * np.sin(t1) * np.cos(t2)
    return np.sum(t, axis=1)


def _rastrigin(x: np.ndarray) -> np.ndarray:
    return 10.0 * x.shape[1] + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x), axis=1)


def _rosenbrock(x: np.ndarray) -> np.ndarray:
    a, b = x[:, :-1], x[:, 1:]
    return np.sum(100.0 * (b - a * a) ** 2 + (1.0 - a) ** 2, axis=1)


def _salomon(x: np.ndarray) -> np.ndarray:
    r = np.sqrt(np.sum(x * x, axis=1))
    return 1.0 - np.cos(2.0 * np.pi * r) + 0.1 * r


def _sargan(x: np.ndarray) -> np.ndarray:
    n = x.shape[1]
    sq = np.sum(x * x, axis=1)
    s = np.sum(x, axis=1)
    # sum_i sum_{j != i} x_i x_j == s^2 - sum x_i^2
    return n * (sq + 0.4 * (s * s - sq))


def _schaffer_f6(x: np.ndarray) -> np.ndarray:
    r2 = x[:, :-1] ** 2 + x[:, 1:] ** 2
    t = 0.5 + (np.sin(np.sqrt(r2)) ** 2 - 0.5) / (1.0 + 0.001 * r2) ** 2
    return np.sum(t, axis=1)


def _schwefel226(x: np.ndarray) -> np.ndarray:
    return SCHWEFEL_CONSTANT * x.shape[1] - np.sum(x * np.sin(np.sqrt(np.abs(x))), axis=1)


def _schwefel226_penalized(x: np.ndarray) -> np.ndarray:
    # 1-based even indices are 0-based odd positions
    penalty = np.abs(np.sum(x[:, 1::2], axis=1) - np.sum(x[:, 0::2], axis=1))
    return _schwefel226(x) + penalty


def _qing(x: np.ndarray) -> np.ndarray:
    i = np.arange(1, x.shape[1] + 1)
    return np.sum((x * x - i) ** 2, axis=1)


@dataclass(frozen=True)
class _Entry:
    fn: Callable[[np.ndarray], np.ndarray]
    bound: tuple[float, float]
    separable: bool = False


_CATALOG: dict[str, _Entry] = {
    "ackley": _Entry(_ackley, (-32.0, 32.0)),
    "eggholder": _Entry(_eggholder, (-512.0, 512.0)),
    "griewank": _Entry(_griewank, (-600.0, 600.0)),
    "happycat": _Entry(_happycat, (-2.0, 2.0)),
    "rana": _Entry(_rana, (-500.0, 500.0)),
    "rastrigin": _Entry(_rastrigin, (-5.12, 5.12), separable=True),
    "rosenbrock": _Entry(_rosenbrock, (-5.0, 10.0)),
    "salomon": _Entry(_salomon, (-100.0, 100.0)),
    "sargan": _Entry(_sargan, (-100.0, 100.0)),
    "schaffer_f6": _Entry(_schaffer_f6, (-100.0, 100.0)),
    "schwefel226": _Entry(_schwefel226, (-500.0, 500.0), separable=True),
    "schwefel226_penalized": _Entry(_schwefel226_penalized, (-500.0, 500.0)),
    "qing": _Entry(_qing, (-500.0, 500.0)),
}

FUNCTION_NAMES: tuple[str, ...] = tuple(_CATALOG)


def _known_optimum(name: str, n: int) -> tuple[Optional[np.ndarray], Optional[float], float]:
    """Return (point, value, tolerance) or (None, None, nan) when unknown."""
    if name in ("ackley", "griewank", "rastrigin", "salomon", "sargan", "schaffer_f6"):
        return np.zeros(n), 0.0, 1e-6
    if name == "happycat":
        return np.full(n, -1.0), 0.0, 1e-6
    if name == "rosenbrock":
        return np.ones(n), 0.0, 1e-6
    if name in ("schwefel226", "schwefel226_penalized"):
        return np.full(n, SCHWEFEL_ARGMAX), 0.0, 1e-6
    if name == "qing":
        return np.sqrt(np.arange(1, n + 1, dtype=float)), 0.0, 1e-6
    if name == "eggholder" and n == 2:
        return np.array([512.0, 404.2319]), -959.64, 0.01
    return None, None, float("nan")


@dataclass(frozen=True, eq=False)
class ObjectiveFunction:
    """A named box-constrained objective to be minimized."""

    name: str
    dimension: int
    lower: np.ndarray
    upper: np.ndarray
    separable: bool
    optimum_value: Optional[float]
    optimum_point: Optional[np.ndarray]
    optimum_tolerance: float = 1e-6
    _fn: Callable[[np.ndarray], np.ndarray] = field(default=None, repr=False)

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def batch(self, points: np.ndarray) -> np.ndarray:
        """Evaluate an (m, n) array of in-domain points without validation."""
        return self._fn(points)

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dimension": self.dimension,
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "separable": self.separable,
            "optimum": self.optimum_value,
        }


def make_function(name: str, dimension: int) -> ObjectiveFunction:
    if name not in _CATALOG:
        raise ValueError(f"unknown benchmark function {name!r}")
    if dimension < 2:
        raise ValueError(f"dimension must be >= 2, got {dimension}")
    if name == "schwefel226_penalized" and dimension % 2:
        raise ValueError("schwefel226_penalized requires an even dimension")
    entry = _CATALOG[name]
    lo, hi = entry.bound
    point, value, tol = _known_optimum(name, dimension)
    return ObjectiveFunction(
        name=name,
        dimension=dimension,
        lower=np.full(dimension, lo),
        upper=np.full(dimension, hi),
        separable=entry.separable,
        optimum_value=value,
        optimum_point=point,
        optimum_tolerance=tol,
        _fn=entry.fn,
    )


def evaluate(f: ObjectiveFunction, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (f.dimension,):
        raise ValueError(f"{f.name} expects a vector of length {f.dimension}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite coordinate")
    return float(f._fn(x[None, :])[0])


def catalog(dimension: int) -> list[dict]:
    """JSON-ready description of every function at ``dimension``.

    Odd dimensions skip the penalized Schwefel variant.
    """
    out = []
    for name in FUNCTION_NAMES:
        if name == "schwefel226_penalized" and dimension % 2:
            continue
        out.append(make_function(name, dimension).to_dict())
    return out
