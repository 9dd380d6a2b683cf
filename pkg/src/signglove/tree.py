"""From-scratch CART classifier over the 11 motion features.

Greedy recursive binary splitting on Gini impurity, with deterministic
tie-breaking (lowest feature index, then lowest threshold) so training is
reproducible. Candidate thresholds are midpoints of consecutive distinct
sorted feature values; rows with feature <= threshold go left.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

MODEL_SCHEMA_VERSION = "dtree;v1"


class EmptyDataset(ValueError):
    """Training requires at least 2 samples with at least one label."""


class SchemaMismatch(ValueError):
    """Model document written by an incompatible schema version."""


class MalformedModel(ValueError):
    """Model document is truncated or violates the schema."""


@dataclass(frozen=True)
class Leaf:
    label: str
    class_counts: dict[str, int]

    @property
    def confidence(self) -> float:
        total = sum(self.class_counts.values())
        return self.class_counts[self.label] / total if total else 0.0


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "Node"
    right: "Node"


Node = Union[Leaf, Split]


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = 8  # None removes the depth cap
    min_leaf: int = 5

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 (or None)")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")


@dataclass(frozen=True)
class DecisionTreeModel:
    root: Node
    params: TreeParams
    n_features: int


def gini(counts: Sequence[int]) -> float:
    """Gini impurity 1 - sum(p^2) of a class-count vector."""
    total = sum(counts)
    if total == 0:
        return 0.0
    sumsq = sum(c * c for c in counts)
    return 1.0 - sumsq / (total * total)


def _majority_leaf(labels: Sequence[str]) -> Leaf:
    counts = Counter(labels)
    # Highest count wins; ties break toward the lexicographically smallest
    # label for determinism.
    label = min(counts, key=lambda k: (-counts[k], k))
    return Leaf(label=label, class_counts=dict(sorted(counts.items())))


def best_split(
    X: np.ndarray, y: np.ndarray, min_leaf: int = 1
) -> tuple[int, float, float] | None:
    """Minimum weighted-Gini split as (feature, threshold, score), or None.

    Scans every feature's midpoints between consecutive distinct sorted
    values; only splits leaving >= min_leaf rows on both sides qualify.
    """
    n = len(y)
    best: tuple[float, int, float] | None = None
    for feature in range(X.shape[1]):
        order = np.argsort(X[:, feature], kind="stable")
        xs = X[order, feature]
        ys = y[order]

        left_counts: Counter = Counter()
        right_counts = Counter(ys.tolist())
        left_sumsq = 0
        right_sumsq = sum(c * c for c in right_counts.values())

        for i in range(1, n):
            label = ys[i - 1]
            c = left_counts[label]
            left_sumsq += 2 * c + 1
            left_counts[label] = c + 1
            c = right_counts[label]
            right_sumsq -= 2 * c - 1
            right_counts[label] = c - 1

            if xs[i] == xs[i - 1]:
                continue
            if i < min_leaf or n - i < min_leaf:
                continue
            gini_left = 1.0 - left_sumsq / (i * i)
            gini_right = 1.0 - right_sumsq / ((n - i) * (n - i))
            score = (i * gini_left + (n - i) * gini_right) / n
            if best is None or score < best[0]:
                threshold = (xs[i - 1] + xs[i]) / 2.0
                best = (score, feature, threshold)
    if best is None:
        return None
    score, feature, threshold = best
    return feature, float(threshold), float(score)


def train(
    features: Sequence[Sequence[float]],
    labels: Sequence[str],
    params: TreeParams = TreeParams(),
) -> DecisionTreeModel:
    """Grow a CART tree; stops at max_depth, min_leaf or pure nodes."""
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=object)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("features must be 2-D and aligned with labels")
    if len(X) < 2 or len(set(y.tolist())) < 1:
        raise EmptyDataset("need at least 2 labeled samples")
    if not np.isfinite(X).all():
        raise ValueError("features must be finite")

    def build(indices: np.ndarray, depth: int) -> Node:
        node_labels = y[indices].tolist()
        pure = len(set(node_labels)) == 1
        depth_capped = params.max_depth is not None and depth >= params.max_depth
        if pure or depth_capped or len(indices) < 2 * params.min_leaf:
            return _majority_leaf(node_labels)
        found = best_split(X[indices], y[indices], params.min_leaf)
        if found is None:
            return _majority_leaf(node_labels)
        feature, threshold, _ = found
        mask = X[indices, feature] <= threshold
        return Split(
            feature=feature,
            threshold=threshold,
            left=build(indices[mask], depth + 1),
            right=build(indices[~mask], depth + 1),
        )

    root = build(np.arange(len(X)), 0)
    return DecisionTreeModel(root=root, params=params, n_features=X.shape[1])


def predict(model: DecisionTreeModel, features: Sequence[float]) -> tuple[str, float]:
    """Root-to-leaf traversal; returns (label, leaf majority fraction)."""
    node = model.root
    while isinstance(node, Split):
        node = node.left if features[node.feature] <= node.threshold else node.right
    return node.label, node.confidence


def _count_nodes(node: Node) -> int:
    if isinstance(node, Leaf):
        return 1
    return 1 + _count_nodes(node.left) + _count_nodes(node.right)


def save_model(model: DecisionTreeModel) -> str:
    """Serialize to the .dtree text schema (version, params, preorder nodes)."""
    lines = [
        MODEL_SCHEMA_VERSION,
        f"max_depth={'none' if model.params.max_depth is None else model.params.max_depth}",
        f"min_leaf={model.params.min_leaf}",
        f"n_features={model.n_features}",
        f"nodes={_count_nodes(model.root)}",
    ]

    def emit(node: Node) -> None:
        if isinstance(node, Leaf):
            counts = ",".join(f"{k}:{v}" for k, v in sorted(node.class_counts.items()))
            lines.append(f"L;{node.label};{counts}")
        else:
            lines.append(f"S;{node.feature};{node.threshold!r}")
            emit(node.left)
            emit(node.right)

    emit(model.root)
    return "\n".join(lines) + "\n"


def load_model(text: str) -> DecisionTreeModel:
    """Parse a .dtree document; load(save(m)) is structurally equal to m."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedModel("empty model document")
    if lines[0] != MODEL_SCHEMA_VERSION:
        raise SchemaMismatch(f"expected {MODEL_SCHEMA_VERSION!r}, got {lines[0]!r}")

    header: dict[str, str] = {}
    try:
        for ln in lines[1:5]:
            key, _, value = ln.partition("=")
            header[key] = value
        max_depth = None if header["max_depth"] == "none" else int(header["max_depth"])
        params = TreeParams(max_depth=max_depth, min_leaf=int(header["min_leaf"]))
        n_features = int(header["n_features"])
        n_nodes = int(header["nodes"])
    except (KeyError, ValueError) as exc:
        raise MalformedModel(f"bad header: {exc}") from exc

    node_lines = lines[5:]
    if len(node_lines) != n_nodes:
        raise MalformedModel(f"expected {n_nodes} node lines, found {len(node_lines)}")

    def read(it: Iterator[str]) -> Node:
        try:
            line = next(it)
        except StopIteration:
            raise MalformedModel("truncated node list") from None
        kind, _, rest = line.partition(";")
        if kind == "L":
            label, _, counts_text = rest.partition(";")
            counts: dict[str, int] = {}
            try:
                for item in counts_text.split(","):
                    name, _, count = item.partition(":")
                    counts[name] = int(count)
            except ValueError as exc:
                raise MalformedModel(f"bad leaf counts: {line!r}") from exc
            if not label or label not in counts:
                raise MalformedModel(f"bad leaf: {line!r}")
            return Leaf(label=label, class_counts=counts)
        if kind == "S":
            feature_text, _, threshold_text = rest.partition(";")
            try:
                feature = int(feature_text)
                threshold = float(threshold_text)
            except ValueError as exc:
                raise MalformedModel(f"bad split: {line!r}") from exc
            if not 0 <= feature < n_features:
                raise MalformedModel(f"feature index out of range: {line!r}")
            left = read(it)
            right = read(it)
            return Split(feature=feature, threshold=threshold, left=left, right=right)
        raise MalformedModel(f"unknown node kind: {line!r}")

    it = iter(node_lines)
    root = read(it)
    if next(it, None) is not None:
        raise MalformedModel("trailing node lines")
    return DecisionTreeModel(root=root, params=params, n_features=n_features)


def save_model_file(model: DecisionTreeModel, path: str | Path) -> None:
    Path(path).write_text(save_model(model), encoding="ascii")


def load_model_file(path: str | Path) -> DecisionTreeModel:
    return load_model(Path(path).read_text(encoding="ascii"))


class GestureTreeClassifier(BaseEstimator, ClassifierMixin):
    """sklearn-style face of the CART trainer for the 11-feature windows."""

    def __init__(self, max_depth: int | None = 8, min_leaf: int = 5):
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=object)
        self.tree_ = train(X, y, TreeParams(self.max_depth, self.min_leaf))
        self.classes_ = np.unique(y)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "tree_")
        X = np.asarray(X, dtype=float)
        return np.array([predict(self.tree_, row)[0] for row in X], dtype=object)

    def predict_confidence(self, X) -> np.ndarray:
        check_is_fitted(self, "tree_")
        X = np.asarray(X, dtype=float)
        return np.array([predict(self.tree_, row)[1] for row in X], dtype=float)
