"""Performance aggregation, best-topology labels and CART trees."""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .landscape import FEATURES, MetricSet

DIMENSIONS = ("error", "convergence", "messages", "searches")
STATISTICS = ("mean", "mps")

HIGHLY_MESHED = "highly_meshed"
WEAKLY_MESHED = "weakly_meshed"
VARIOUS = "various"
DYNAMIC = "dynamic"

_HIGH = {"complete", "small_world", "grid"}
_WEAK = {"ring", "random_tree", "path"}

MAX_LISTED = 3
RELATIVE_TOLERANCE = 0.01
ZERO_TOLERANCE = 0.01


def _is_dynamic(label: str) -> bool:
    return label == DYNAMIC or label.startswith(DYNAMIC + "_")


def meshing(label: str) -> str:
    if label in _HIGH or _is_dynamic(label):
        return HIGHLY_MESHED
    if label in _WEAK:
        return WEAKLY_MESHED
    raise ValueError(f"unknown topology label {label!r}")


def normalize(values: Sequence[float]) -> np.ndarray:
    """Min-max rescale to [0, 1]; a constant group maps to zeros."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("cannot normalize an empty group")
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


@dataclass
class Stat:
    mean: float
    std: float

    @property
    def mps(self) -> float:
        return self.mean + self.std

    def get(self, statistic: str) -> float:
        if statistic == "mean":
            return self.mean
        if statistic == "mps":
            return self.mps
        raise ValueError(f"unknown statistic {statistic!r}")


@dataclass
class PerformanceSummary:
    function: str
    dim: int
    topology: str
    runs: int
    stats: dict[str, Stat] = field(default_factory=dict)


def _raw_dimensions(rec: Mapping) -> dict[str, float]:
    return {
        "error": float(rec["error_raw"]),
        "convergence": float(rec["ticks"]),
        "messages": float(rec["messages"]),
        "searches": float(rec["local_searches"]),
    }


def normalize_records(records: Iterable[Mapping]) -> list[dict]:
    """Attach the four normalized performance dimensions to every record.

    Each record needs ``function``, ``dim``, ``topology`` (the label, e.g.
    ``dynamic_0.1``) and the raw measures ``error_raw``, ``ticks``,
    ``messages`` and ``local_searches``. Scaling is min-max within each
    (function, dim) group; errors with an unknown optimum are raw fitness, so
    the scaling anchors them at the best value found.
    """
    groups: dict[tuple[str, int], list[Mapping]] = defaultdict(list)
    for rec in records:
        groups[(rec["function"], int(rec["dim"]))].append(rec)
    out = []
    for (fn, dim), recs in sorted(groups.items()):
        raw = [_raw_dimensions(r) for r in recs]
        scaled = {d: normalize([r[d] for r in raw]) for d in DIMENSIONS}
        for k, r in enumerate(recs):
            row = {"function": fn, "dim": dim, "topology": r["topology"]}
            row.update({d: float(scaled[d][k]) for d in DIMENSIONS})
            out.append(row)
    return out


def summarize(records: Iterable[Mapping]) -> list[PerformanceSummary]:
    """Normalize per (function, dim) and summarize per topology label."""
    cells: dict[tuple[str, int, str], list[dict]] = defaultdict(list)
    for row in normalize_records(records):
        cells[(row["function"], row["dim"], row["topology"])].append(row)
    out = []
    for (fn, dim, label), rows in sorted(cells.items()):
        stats = {}
        for d in DIMENSIONS:
            v = np.array([r[d] for r in rows])
            stats[d] = Stat(float(v.mean()), float(v.std()))
        out.append(PerformanceSummary(fn, dim, label, len(rows), stats))
    return out


def best_list(values: Mapping[str, float]) -> list[str]:
    """Topologies within 1% of the best value, collapsed into categories when long.

    Dynamic variants collapse to ``dynamic`` when every evaluated variant
    qualifies; a list still longer than three becomes a meshing category.
    """
    if not values:
        raise ValueError("best_list needs at least one topology")
    best = min(values.values())
    limit = best * (1.0 + RELATIVE_TOLERANCE) if best > 0 else best + ZERO_TOLERANCE
    chosen = sorted((v, k) for k, v in values.items() if v <= limit)
    labels = [k for _, k in chosen]

    dynamic_all = [k for k in values if _is_dynamic(k)]
    dynamic_in = [k for k in labels if _is_dynamic(k)]
    if len(dynamic_all) > 1 and len(dynamic_in) == len(dynamic_all):
        first = labels.index(dynamic_in[0])
        labels = [k for k in labels if not _is_dynamic(k)]
        labels.insert(first, DYNAMIC)

    if len(labels) > MAX_LISTED:
        kinds = {meshing(k) for k in labels}
        return [kinds.pop()] if len(kinds) == 1 else [VARIOUS]
    return labels


def label_of(best: Sequence[str]) -> str:
    return "|".join(best)


def best_labels(summaries: Sequence[PerformanceSummary], dimension: str, statistic: str) -> dict[tuple[str, int], str]:
    grouped: dict[tuple[str, int], dict[str, float]] = defaultdict(dict)
    for s in summaries:
        grouped[(s.function, s.dim)][s.topology] = s.stats[dimension].get(statistic)
    return {key: label_of(best_list(vals)) for key, vals in sorted(grouped.items())}


# --- CART -------------------------------------------------------------------

@dataclass
class Leaf:
    label: str


@dataclass
class Split:
    feature: str
    threshold: float
    left: "Node"
    right: "Node"


Node = Union[Leaf, Split]


@dataclass
class DecisionTree:
    root: Node
    features: tuple[str, ...]
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1

    def to_dict(self) -> dict:
        return _node_to_dict(self.root)

    def to_json(self) -> str:
        return json.dumps({"features": list(self.features), "tree": self.to_dict()}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DecisionTree":
        data = json.loads(text)
        return cls(_node_from_dict(data["tree"]), tuple(data["features"]))

    def render(self) -> str:
        lines: list[str] = []
        _render(self.root, 0, lines)
        return "\n".join(lines) + "\n"

    def depth(self) -> int:
        return _depth(self.root)


def _node_to_dict(node: Node) -> dict:
    if isinstance(node, Leaf):
        return {"label": node.label}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(data: dict) -> Node:
    if "label" in data:
        return Leaf(data["label"])
    return Split(data["feature"], float(data["threshold"]), _node_from_dict(data["left"]), _node_from_dict(data["right"]))


def _render(node: Node, indent: int, lines: list[str]) -> None:
    pad = "    " * indent
    if isinstance(node, Leaf):
        lines.append(f"{pad}-> {node.label}")
        return
    lines.append(f"{pad}{node.feature} <= {node.threshold:.6g}")
    _render(node.left, indent + 1, lines)
    lines.append(f"{pad}{node.feature} > {node.threshold:.6g}")
    _render(node.right, indent + 1, lines)


def _depth(node: Node) -> int:
    return 0 if isinstance(node, Leaf) else 1 + max(_depth(node.left), _depth(node.right))


def gini(labels: Sequence[str]) -> float:
    n = len(labels)
    if n == 0:
        return 0.0
    p = np.array(list(Counter(labels).values()), dtype=float) / n
    return float(1.0 - np.sum(p * p))


def _majority(labels: Sequence[str]) -> str:
    counts = Counter(labels)
    top = max(counts.values())
    return min(k for k, c in counts.items() if c == top)


_GAIN_TIE = 1e-12


def _best_split(X: np.ndarray, y: list[str], min_leaf: int) -> Optional[tuple[int, float]]:
    n = len(y)
    parent = gini(y)
    best: Optional[tuple[float, int, float]] = None
    for j in range(X.shape[1]):
        col = X[:, j]
        uniq = np.unique(col)
        for a, b in zip(uniq[:-1], uniq[1:]):
            t = 0.5 * (a + b)
            mask = col <= t
            nl = int(mask.sum())
            if nl < min_leaf or n - nl < min_leaf:
                continue
            left = [y[k] for k in range(n) if mask[k]]
            right = [y[k] for k in range(n) if not mask[k]]
            gain = parent - (nl * gini(left) + (n - nl) * gini(right)) / n
            if best is None or gain > best[0] + _GAIN_TIE:
                best = (gain, j, float(t))
    return None if best is None else (best[1], best[2])


def train_cart(
    X: Sequence[Sequence[float]],
    y: Sequence[str],
    features: Sequence[str] = FEATURES,
    max_depth: Optional[int] = None,
    min_samples_leaf: int = 1,
) -> DecisionTree:
    """Greedy Gini CART with midpoint thresholds and ``<=`` going left.

    Ties in impurity decrease go to the earlier feature, then the lower threshold.
    """
    X = np.asarray(X, dtype=float)
    y = list(y)
    if X.ndim != 2 or X.shape[0] != len(y) or X.shape[1] != len(features):
        raise ValueError("feature matrix does not match labels/feature names")
    if not y:
        raise ValueError("cannot train on an empty dataset")

    def grow(idx: np.ndarray, depth: int) -> Node:
        labels = [y[k] for k in idx]
        if len(set(labels)) == 1 or (max_depth is not None and depth >= max_depth):
            return Leaf(_majority(labels))
        found = _best_split(X[idx], labels, min_samples_leaf)
        if found is None:
            return Leaf(_majority(labels))
        j, t = found
        mask = X[idx, j] <= t
        return Split(features[j], t, grow(idx[mask], depth + 1), grow(idx[~mask], depth + 1))

    root = grow(np.arange(len(y)), 0)
    return DecisionTree(root, tuple(features), max_depth, min_samples_leaf)


def predict(tree: DecisionTree, metrics: Union[MetricSet, Mapping[str, float], Sequence[float]]) -> str:
    if isinstance(metrics, MetricSet):
        row = dict(zip(FEATURES, metrics.features()))
    elif isinstance(metrics, Mapping):
        row = metrics
    else:
        row = dict(zip(tree.features, metrics))
    node = tree.root
    while isinstance(node, Split):
        node = node.left if float(row[node.feature]) <= node.threshold else node.right
    return node.label


def training_error(tree: DecisionTree, X: Sequence[Sequence[float]], y: Sequence[str]) -> float:
    wrong = sum(predict(tree, list(row)) != label for row, label in zip(X, y))
    return wrong / len(y)


def is_consistent(X: Sequence[Sequence[float]], y: Sequence[str]) -> bool:
    """True when no two identical feature rows carry different labels."""
    seen: dict[tuple, str] = {}
    for row, label in zip(X, y):
        key = tuple(float(v) for v in row)
        if seen.setdefault(key, label) != label:
            return False
    return True


# --- distribution summaries -------------------------------------------------

QUANTILE_NAMES = ("min", "q1", "median", "q3", "max")


def summary_stats(values: Sequence[float]) -> dict[str, float]:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("summary of an empty group")
    q = np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0])
    out = dict(zip(QUANTILE_NAMES, (float(x) for x in q)))
    out["mean"] = float(v.mean())
    out["std"] = float(v.std())
    return out


def metric_distribution(metric_sets: Sequence[MetricSet]) -> dict[str, dict[str, float]]:
    """Quantile table of each landscape metric across functions."""
    cols = ("dm", "fem_macro", "fem_micro", "sem_macro", "sem_micro", "pic_macro", "pic_micro")
    return {c: summary_stats([getattr(m, c) for m in metric_sets]) for c in cols}
