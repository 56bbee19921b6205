"""Relative safety classification from the frozen c values.

The threshold is the lower end of the largest gap in the sorted c values when
that gap falls in the middle of the ordering, and the lower median otherwise.
A cell is safe when its c value is at most the threshold and its estimate is
at least 1/2.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

GAP = "gap"
MEDIAN = "median"
SAFE = "safe"
UNSAFE = "unsafe"


class Threshold(NamedTuple):
    c_threshold: float
    k_star: int
    route: str
    sort_order: np.ndarray


def threshold(c_values):
    """Compute the threshold c_T.

    ``k_star`` is the 1-based sorted position ``k`` maximizing
    ``c_(k+1) - c_(k)`` (lowest position on ties). ``sort_order[i]`` is the
    cell at sorted position ``i + 1``.
    """
    c = np.asarray(c_values, dtype=float).reshape(-1)
    m = len(c)
    if m < 2:
        raise ValueError("classification needs at least 2 cells")
    order = np.argsort(c, kind="stable")
    sorted_c = c[order]
    gaps = np.diff(sorted_c)
    k_star = int(np.argmax(gaps)) + 1
    if math.ceil(m / 4) <= k_star <= math.ceil(3 * m / 4):
        return Threshold(float(sorted_c[k_star - 1]), k_star, GAP, order)
    return Threshold(float(sorted_c[(m - 1) // 2]), k_star, MEDIAN, order)


@dataclass(frozen=True)
class ClassificationResult:
    sort_order: tuple
    gaps: tuple
    k_star: int
    route: str
    c_threshold: float
    labels: tuple
    safe_set: frozenset

    def to_dict(self):
        """Serializable form; cells are numbered from 1 as in reports."""
        return {
            "c_threshold": self.c_threshold,
            "route": self.route,
            "k_star": self.k_star,
            "sort_order": [k + 1 for k in self.sort_order],
            "gaps": list(self.gaps),
            "labels": {str(k + 1): label for k, label in enumerate(self.labels)},
            "safe_set": sorted(k + 1 for k in self.safe_set),
        }

    @classmethod
    def from_dict(cls, data):
        labels = [data["labels"][str(k + 1)] for k in range(len(data["labels"]))]
        return cls(tuple(k - 1 for k in data["sort_order"]), tuple(data["gaps"]),
                   int(data["k_star"]), data["route"], float(data["c_threshold"]),
                   tuple(labels), frozenset(k - 1 for k in data["safe_set"]))


def classify(c_values, final_estimates):
    c = np.asarray(c_values, dtype=float).reshape(-1)
    p = np.asarray(final_estimates, dtype=float).reshape(-1)
    if len(c) != len(p):
        raise ValueError("c_values and final_estimates lengths differ")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("estimates must lie in [0, 1]")
    t = threshold(c)
    safe = (c <= t.c_threshold) & (p >= 0.5)
    labels = tuple(SAFE if s else UNSAFE for s in safe)
    return ClassificationResult(
        sort_order=tuple(int(k) for k in t.sort_order),
        gaps=tuple(float(g) for g in np.diff(c[t.sort_order])),
        k_star=t.k_star,
        route=t.route,
        c_threshold=t.c_threshold,
        labels=labels,
        safe_set=frozenset(int(k) for k in np.flatnonzero(safe)),
    )


def true_safe_set(true_p):
    """Safe set obtained by classifying the true parameters themselves."""
    p = np.asarray(true_p, dtype=float)
    return classify(p * (1.0 - p), p).safe_set


class SafeRegionClassifier(ClassifierMixin, BaseEstimator):
    """Fit the threshold on per-cell ``[c, p]`` rows, then label cells.

    ``X`` has one row per cell with columns ``c_k`` and ``p_k``. A single
    column is read as estimates and ``c = p(1 - p)`` is derived from it.
    ``predict`` returns 1 for safe and 0 for unsafe.
    """

    def _validate(self, X):
        X = check_array(X, ensure_min_samples=1)
        if X.shape[1] == 1:
            X = np.column_stack([X[:, 0] * (1.0 - X[:, 0]), X[:, 0]])
        if X.shape[1] != 2:
            raise ValueError("X must have columns [c, p] or a single column of estimates")
        return X

    def fit(self, X, y=None):
        X = self._validate(X)
        self.result_ = classify(X[:, 0], X[:, 1])
        self.threshold_ = self.result_.c_threshold
        self.route_ = self.result_.route
        self.k_star_ = self.result_.k_star
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "threshold_")
        X = self._validate(X)
        return ((X[:, 0] <= self.threshold_) & (X[:, 1] >= 0.5)).astype(int)
