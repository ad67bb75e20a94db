"""Threshold selection, confusion counts, F1, ROC/AUC and PR/AVPR.

Every function takes a :class:`~adeval.detectors.ScoredSet`. Predictions use
the rule ``anomalous iff score >= threshold``. Samples sharing a score are
always handled as one block: AUC gives ties half credit and AVPR takes one
precision step per distinct score.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .data import DataError

INF = math.inf


class MetricError(DataError):
    """A metric is undefined for the given input (e.g. a single class)."""


class ConfusionCounts(NamedTuple):
    tp: int
    fp: int
    fn: int
    tn: int


class BinaryMetrics(NamedTuple):
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class Threshold:
    value: float
    rule: str = "explicit"

    def predict(self, scores):
        return np.asarray(scores) >= self.value


@dataclass(frozen=True, eq=False)
class Curve:
    """Piecewise curve with one point per distinct score plus endpoints."""

    x: np.ndarray
    y: np.ndarray
    kind: str
    thresholds: np.ndarray

    def area(self):
        """Trapezoidal area under the curve."""
        dx = np.diff(self.x)
        return float(math.fsum(dx * (self.y[1:] + self.y[:-1]) / 2.0))

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x,y\n")
            for a, b in zip(self.x, self.y):
                fh.write(f"{a!r},{b!r}\n")


def _sorted_blocks(scored):
    order = np.argsort(-scored.scores, kind="stable")
    return _kernels.tie_blocks(scored.scores[order], scored.labels[order])


def _require_nonempty(scored):
    if len(scored) == 0:
        raise MetricError("empty scored set")


def _require_both_classes(scored, what):
    _require_nonempty(scored)
    if scored.n_pos == 0 or scored.n_neg == 0:
        raise MetricError(f"{what} is undefined: need at least one anomaly and one normal sample")


def rate_rank(alpha_hat, n):
    """Number of samples to flag: ``round(alpha_hat * n)``, halves rounded up."""
    return int(math.floor(alpha_hat * n + 0.5))


def threshold_from_rate(scored, alpha_hat):
    """Threshold flagging a fraction ``alpha_hat`` of the scored samples.

    Returns the k-th largest score with ``k = round(alpha_hat * N)``, or +inf
    when ``k == 0``. Ties at the k-th score make more than k samples pass.
    """
    _require_nonempty(scored)
    if not 0.0 <= alpha_hat <= 1.0:
        raise MetricError(f"alpha_hat must lie in [0, 1], got {alpha_hat}")
    k = rate_rank(alpha_hat, len(scored))
    if k == 0:
        return Threshold(INF, "from_rate")
    # k-th largest without a full sort
    n = len(scored)
    value = np.partition(scored.scores, n - k)[n - k]
    return Threshold(float(value), "from_rate")


def confusion_at(scored, threshold):
    t = threshold.value if isinstance(threshold, Threshold) else float(threshold)
    pred = scored.scores >= t
    pos = scored.labels == 1
    tp = int(np.count_nonzero(pred & pos))
    fp = int(np.count_nonzero(pred & ~pos))
    n_pos = int(np.count_nonzero(pos))
    return ConfusionCounts(tp, fp, n_pos - tp, len(scored) - n_pos - fp)


def binary_metrics(counts):
    """Precision, recall and F1, with 0/0 taken as 0."""
    tp, fp, fn = counts.tp, counts.fp, counts.fn
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
    return BinaryMetrics(precision, recall, f1)


def f1_at(scored, threshold):
    return binary_metrics(confusion_at(scored, threshold)).f1


def auc(scored):
    """Probability that a random anomaly outscores a random normal (ties 1/2)."""
    _require_both_classes(scored, "AUC")
    _, tp, fp = _sorted_blocks(scored)
    pos_b = np.diff(tp, prepend=0)
    neg_b = np.diff(fp, prepend=0)
    tp_above = tp - pos_b
    twice = int(np.sum(neg_b * (2 * tp_above + pos_b)))
    return twice / (2 * scored.n_pos * scored.n_neg)


def roc_curve(scored):
    _require_both_classes(scored, "ROC curve")
    thr, tp, fp = _sorted_blocks(scored)
    x = np.concatenate([[0.0], fp / scored.n_neg])
    y = np.concatenate([[0.0], tp / scored.n_pos])
    return Curve(x, y, "roc", np.concatenate([[INF], thr]))


def pr_curve(scored):
    """Precision against recall; starts at (0, 1) and ends at recall 1."""
    _require_nonempty(scored)
    if scored.n_pos == 0:
        raise MetricError("PR curve is undefined without anomalies")
    thr, tp, fp = _sorted_blocks(scored)
    x = np.concatenate([[0.0], tp / scored.n_pos])
    y = np.concatenate([[1.0], tp / (tp + fp)])
    return Curve(x, y, "pr", np.concatenate([[INF], thr]))


def avpr(scored):
    """Non-interpolated average precision, one step per distinct score."""
    _require_nonempty(scored)
    if scored.n_pos == 0:
        raise MetricError("AVPR is undefined without anomalies")
    _, tp, fp = _sorted_blocks(scored)
    pos_b = np.diff(tp, prepend=0)
    keep = pos_b > 0
    terms = pos_b[keep] * (tp[keep] / (tp[keep] + fp[keep]))
    return math.fsum(terms) / scored.n_pos


def optimal_f1_threshold(scored):
    """Best achievable F1 over all thresholds (distinct scores and +inf).

    Among F1-maximising thresholds the smallest one is returned.
    """
    _require_nonempty(scored)
    n_pos = scored.n_pos
    if n_pos == 0:
        raise MetricError("optimal F1 is undefined without anomalies")
    thr, tp, fp = _sorted_blocks(scored)
    num = 2 * tp
    den = 2 * tp + fp + (n_pos - tp)
    f1 = num / den
    best = int(np.argmax(f1))
    # exact ties: num_i * den_best == num_best * den_i
    tied = np.flatnonzero(num * den[best] == num[best] * den)
    best = int(tied.max())
    return Threshold(float(thr[best]), "optimal_f1"), float(f1[best])
