"""Fitness landscape metrics from random walks and uniform samples.

Ruggedness (FEM), smoothness (SEM) and partial information content (PIC)
are read off the symbol string of a walk's fitness differences; the
dispersion metric (DM) compares elite and uniform samples.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Union

import numpy as np
from scipy.spatial.distance import pdist

from .benchmarks import ObjectiveFunction

MICRO = 0.01
MACRO = 0.10
WALK_LENGTH = 1000
EPS_GRID_SIZE = 100
EPS_GRID_FLOOR = 1e-8
DISPERSION_SAMPLE = 1000
DISPERSION_SUBSET = 50

FEATURES = (
    "fem_micro",
    "fem_macro",
    "sem_micro",
    "sem_macro",
    "pic_micro",
    "pic_macro",
    "dm",
    "dimension",
    "separable",
)


@dataclass
class RandomWalk:
    positions: np.ndarray
    fitness: np.ndarray
    step_fraction: float
    kind: str = "progressive"

    def __len__(self) -> int:
        # number of steps, one less than the number of visited points
        return len(self.fitness) - 1


WalkLike = Union[RandomWalk, np.ndarray]


def _fitness(walk: WalkLike) -> np.ndarray:
    return walk.fitness if isinstance(walk, RandomWalk) else np.asarray(walk, dtype=float)


def _reflect(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    over = x > hi
    under = x < lo
    x = np.where(over, 2 * hi - x, x)
    x = np.where(under, 2 * lo - x, x)
    return x, over | under


def random_walk(
    f: ObjectiveFunction,
    step_fraction: float,
    length: int,
    rng: np.random.Generator,
    kind: str = "progressive",
) -> RandomWalk:
    """Walk ``length`` steps through the domain and record fitness at every point.

    ``progressive`` (default) keeps a direction per coordinate: every step moves
    each coordinate by U(0, s) that way and the direction flips when the
    coordinate reflects off a bound. The walk starts on the side of the box
    opposite to its direction with one coordinate pinned to the bound.
    ``uniform`` adds U(-s, s) to every coordinate, reflecting at the bounds.
    """
    if not 0.0 < step_fraction < 1.0:
        raise ValueError("step_fraction must lie in (0, 1)")
    if length < 2:
        raise ValueError("walk length must be at least 2")
    lo, hi = f.lower, f.upper
    s = step_fraction * (hi - lo)
    d = f.dimension
    pos = np.empty((length + 1, d))
    if kind == "progressive":
        start_low = rng.random(d) < 0.5
        offset = rng.uniform(0.0, 0.5, d) * (hi - lo)
        x = np.where(start_low, lo + offset, hi - offset)
        j = int(rng.integers(d))
        x[j] = lo[j] if start_low[j] else hi[j]
        direction = np.where(start_low, 1.0, -1.0)
        pos[0] = x
        for k in range(1, length + 1):
            x, bounced = _reflect(x + direction * rng.uniform(0.0, s), lo, hi)
            direction = np.where(bounced, -direction, direction)
            pos[k] = x
    elif kind == "uniform":
        x = rng.uniform(lo, hi)
        pos[0] = x
        for k in range(1, length + 1):
            x, _ = _reflect(x + rng.uniform(-s, s), lo, hi)
            pos[k] = x
    else:
        raise ValueError(f"unknown walk kind {kind!r}")
    return RandomWalk(pos, f.batch(pos), step_fraction, kind)


def encode(walk: WalkLike, epsilon: float) -> np.ndarray:
    """Symbols in {-1, 0, 1} for each consecutive fitness difference."""
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    diff = np.diff(_fitness(walk))
    return np.where(diff > epsilon, 1, np.where(diff < -epsilon, -1, 0)).astype(np.int8)


def epsilon_grid(walk: WalkLike) -> np.ndarray:
    diff = np.abs(np.diff(_fitness(walk)))
    eps_max = float(diff.max()) if diff.size else 0.0
    if eps_max == 0.0:
        return np.zeros(1)
    return np.concatenate([[0.0], np.geomspace(eps_max * EPS_GRID_FLOOR, eps_max, EPS_GRID_SIZE)])


def _encode_many(diff: np.ndarray, eps: np.ndarray) -> np.ndarray:
    e = eps[:, None]
    return np.where(diff > e, 1, np.where(diff < -e, -1, 0)).astype(np.int8)


def _block_frequencies(strings: np.ndarray) -> np.ndarray:
    """Relative frequency of each consecutive block [pq]; shape (rows, 3, 3)."""
    rows, m = strings.shape
    if m < 2:
        return np.zeros((rows, 3, 3))
    codes = 3 * (strings[:, :-1] + 1) + (strings[:, 1:] + 1)
    codes = codes.astype(np.int64) + 9 * np.arange(rows)[:, None]
    counts = np.bincount(codes.ravel(), minlength=9 * rows).reshape(rows, 3, 3)
    return counts / (m - 1)


def _entropy(freq: np.ndarray, mask: np.ndarray, base: int) -> np.ndarray:
    p = freq[:, mask]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(p), 0.0)
    return terms.sum(axis=1) / np.log(base)


_OFF_DIAGONAL = ~np.eye(3, dtype=bool)
_DIAGONAL = np.eye(3, dtype=bool)


def _strings(walk: WalkLike, epsilons) -> np.ndarray:
    fit = _fitness(walk)
    eps = epsilon_grid(fit) if epsilons is None else np.atleast_1d(np.asarray(epsilons, dtype=float))
    return _encode_many(np.diff(fit), eps)


def fem(walk: WalkLike, epsilons=None) -> float:
    """First entropic measure: max over epsilon of the entropy of rugged blocks."""
    h = _entropy(_block_frequencies(_strings(walk, epsilons)), _OFF_DIAGONAL, 6)
    return float(np.clip(h.max(), 0.0, 1.0))


def sem(walk: WalkLike, epsilons=None) -> float:
    """Second entropic measure: max over epsilon of the entropy of smooth blocks."""
    h = _entropy(_block_frequencies(_strings(walk, epsilons)), _DIAGONAL, 3)
    return float(np.clip(h.max(), 0.0, 1.0))


def _pic_of(s: np.ndarray) -> float:
    if s.size == 0:
        return 0.0
    nz = s[s != 0]
    mu = 0 if nz.size == 0 else 1 + int(np.count_nonzero(nz[1:] != nz[:-1]))
    return mu / s.size


def pic(walk: WalkLike, epsilon: float = 0.0) -> float:
    """Partial information content: length of the compressed string over the original."""
    return _pic_of(encode(walk, epsilon))


def pic_sweep_max(walk: WalkLike) -> float:
    return max(_pic_of(s) for s in _strings(walk, None))


def _dispersion_of(points: np.ndarray) -> float:
    return float(np.mean(pdist(points)))


def dispersion(
    f: ObjectiveFunction,
    sample_n: int = DISPERSION_SAMPLE,
    subset_s: int = DISPERSION_SUBSET,
    rng: np.random.Generator | None = None,
    per_dimension: bool = False,
) -> float:
    """Dispersion of the ``subset_s`` best of ``sample_n`` uniform points minus
    that of ``subset_s`` fresh uniform points, in unit-cube coordinates.

    Distances are plain Euclidean in the unit cube; ``per_dimension`` divides
    them by sqrt(d) instead.
    """
    if subset_s > sample_n:
        raise ValueError("subset_s must not exceed sample_n")
    if subset_s < 2:
        raise ValueError("dispersion needs at least two points in the subset")
    rng = np.random.default_rng() if rng is None else rng
    d = f.dimension
    sample = rng.uniform(0.0, 1.0, (sample_n, d))
    values = f.batch(f.lower + sample * f.width)
    elite = sample[np.argsort(values, kind="stable")[:subset_s]]
    comparison = rng.uniform(0.0, 1.0, (subset_s, d))
    dm = _dispersion_of(elite) - _dispersion_of(comparison)
    return dm / np.sqrt(d) if per_dimension else dm


@dataclass
class MetricSet:
    fem_micro: float
    fem_macro: float
    sem_micro: float
    sem_macro: float
    pic_micro: float
    pic_macro: float
    dm: float
    dimension: int
    separable: bool

    def features(self) -> list[float]:
        return [float(getattr(self, k)) for k in FEATURES]

    def as_dict(self) -> dict:
        return asdict(self)


def metric_set(
    f: ObjectiveFunction,
    runs: int = 30,
    rng: np.random.Generator | None = None,
    walk_length: int = WALK_LENGTH,
    pic_mode: str = "zero",
    walk_kind: str = "progressive",
) -> MetricSet:
    """Mean of every metric over ``runs`` independent walks and samples."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if pic_mode not in ("zero", "sweep"):
        raise ValueError("pic_mode must be 'zero' or 'sweep'")
    rng = np.random.default_rng() if rng is None else rng
    acc = np.zeros(7)
    for _ in range(runs):
        row = []
        for frac in (MICRO, MACRO):
            w = random_walk(f, frac, walk_length, rng, walk_kind)
            p = pic(w) if pic_mode == "zero" else pic_sweep_max(w)
            row.append((fem(w), sem(w), p))
        (fm, sm, pm), (fM, sM, pM) = row
        acc += [fm, fM, sm, sM, pm, pM, dispersion(f, rng=rng)]
    acc /= runs
    return MetricSet(*[float(v) for v in acc], dimension=f.dimension, separable=f.separable)
