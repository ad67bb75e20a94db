"""Closed-form contamination-bias models.

A fixed-threshold detector is summarised by two rates: ``p_plus``, the
probability an anomaly scores at or above the threshold (the recall), and
``p_minus``, the probability a normal sample scores below it. With a test
contamination ``alpha`` the expected confusion fractions are

    tp = alpha * p_plus          fn = alpha * (1 - p_plus)
    fp = (1 - alpha) * (1 - p_minus)

so recall does not move with ``alpha`` while precision does.

The toy model has triangular score densities on [0, 1]:
anomalies ``2 s`` and normals ``2 (1 - s)``.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .data import DataError


@dataclass(frozen=True)
class RatesModel:
    p_plus: float
    p_minus: float

    def __post_init__(self):
        for name in ("p_plus", "p_minus"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DataError(f"{name} must lie in [0, 1], got {v}")

    def __iter__(self):
        return iter((self.p_plus, self.p_minus))

    def f1(self, alpha):
        return f1_closed_form(self.p_plus, self.p_minus, alpha)


def f1_closed_form(p_plus, p_minus, alpha):
    """Expected F1 of a fixed-threshold detector at contamination ``alpha``.

    ``2 a p+ / (a (1 + p+) + (1 - a)(1 - p-))``; 0 when the denominator
    vanishes. Accepts scalars or broadcastable arrays.
    """
    p_plus, p_minus, alpha = np.broadcast_arrays(
        np.asarray(p_plus, dtype=float), np.asarray(p_minus, dtype=float), np.asarray(alpha, dtype=float)
    )
    num = 2.0 * alpha * p_plus
    den = alpha * (1.0 + p_plus) + (1.0 - alpha) * (1.0 - p_minus)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


def f1_surface(p_plus_grid, p_minus_grid, alpha_grid):
    """Rows ``(alpha, p_plus, p_minus, f1)`` over the grid cross-product."""
    rows = []
    for pp in p_plus_grid:
        for pm in p_minus_grid:
            for a in alpha_grid:
                rows.append((float(a), float(pp), float(pm), f1_closed_form(pp, pm, a)))
    return rows


def write_table(rows, header, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) for v in r])


class ToyModel:
    """Triangular score densities on [0, 1]."""

    support = (0.0, 1.0)

    @staticmethod
    def anomaly_density(s):
        s = np.asarray(s, dtype=float)
        return np.where((s >= 0) & (s <= 1), 2.0 * s, 0.0)

    @staticmethod
    def normal_density(s):
        s = np.asarray(s, dtype=float)
        return np.where((s >= 0) & (s <= 1), 2.0 * (1.0 - s), 0.0)

    @staticmethod
    def anomaly_tail(t):
        """P(anomaly score >= t)."""
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return 1.0 - t**2

    @staticmethod
    def normal_cdf(t):
        """P(normal score < t)."""
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return 1.0 - (1.0 - t) ** 2

    @staticmethod
    def sample(n_anomaly, n_normal, rng):
        """Draw scores by inverse-CDF sampling; returns ``(scores, labels)``."""
        pos = np.sqrt(rng.uniform(size=n_anomaly))
        neg = 1.0 - np.sqrt(rng.uniform(size=n_normal))
        scores = np.concatenate([pos, neg])
        labels = np.concatenate([np.ones(n_anomaly, np.int64), np.zeros(n_normal, np.int64)])
        return scores, labels


def _check_unit(name, v):
    if not 0.0 <= v <= 1.0:
        raise DataError(f"{name} must lie in [0, 1], got {v}")


def toy_rates(t):
    """``(p_plus, p_minus) = (1 - t^2, 1 - (1 - t)^2)``."""
    _check_unit("t", t)
    return RatesModel(1.0 - t * t, 1.0 - (1.0 - t) ** 2)


def toy_f1(t, alpha):
    _check_unit("t", t)
    _check_unit("alpha", alpha)
    tp = alpha * (1.0 - t * t)
    fp = (1.0 - alpha) * (1.0 - t) ** 2
    fn = alpha * t * t
    den = 2.0 * tp + fp + fn
    return 2.0 * tp / den if tp > 0 else 0.0


def toy_f1_curve(alpha, t_grid):
    """Rows ``(t, f1)`` for each threshold in ``t_grid``."""
    return [(float(t), toy_f1(float(t), alpha)) for t in t_grid]


def toy_fpfn_threshold(alpha):
    """Threshold where expected false positives equal expected false negatives."""
    if not 0.0 < alpha < 1.0:
        raise DataError(f"alpha must lie in (0, 1), got {alpha}")
    a, b = math.sqrt(alpha), math.sqrt(1.0 - alpha)
    return b / (a + b)


def toy_optimal_threshold(alpha, grid_size=100_001, tol=1e-8):
    """F1-maximising threshold: coarse grid, then golden-section refinement."""
    if not 0.0 < alpha <= 1.0:
        raise DataError(f"alpha must lie in (0, 1], got {alpha}")
    ts = np.linspace(0.0, 1.0, grid_size)
    tp = alpha * (1.0 - ts**2)
    den = 2 * tp + (1.0 - alpha) * (1.0 - ts) ** 2 + alpha * ts**2
    f = np.where(tp > 0, 2 * tp / den, 0.0)
    i = int(np.argmax(f))
    step = ts[1] - ts[0]
    lo, hi = max(0.0, ts[i] - step), min(1.0, ts[i] + step)
    t_best = _golden_max(lambda t: toy_f1(t, alpha), lo, hi, tol)
    if toy_f1(t_best, alpha) < f[i]:
        t_best = float(ts[i])
    return float(t_best), float(toy_f1(t_best, alpha))


def _golden_max(fn, lo, hi, tol):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    return (a + b) / 2.0


def toy_auc():
    """AUC of the toy model: the integral of 2(1 - t)(1 - t^2) over [0, 1] = 5/6."""
    return 5.0 / 6.0


def analytic_auc(p_plus_tail, p_minus_density, support=(-np.inf, np.inf), tol=1e-9):
    """AUC from the anomaly tail ``P(S+ >= t)`` and the normal density.

    Integrates ``p_minus_density(t) * p_plus_tail(t)`` over ``support`` with
    adaptive quadrature. Raises if the normal density does not integrate to
    one or the tail does not run from 1 to 0 across the support.
    """
    lo, hi = support
    mass, _ = integrate.quad(lambda t: float(p_minus_density(t)), lo, hi, epsabs=tol, epsrel=tol, limit=200)
    if abs(mass - 1.0) > 1e-6:
        raise DataError(f"normal density integrates to {mass:.9f}, not 1")
    t_lo = -1e300 if lo == -np.inf else lo
    t_hi = 1e300 if hi == np.inf else hi
    if abs(float(p_plus_tail(t_lo)) - 1.0) > 1e-6 or abs(float(p_plus_tail(t_hi))) > 1e-6:
        raise DataError("anomaly tail must equal 1 at the lower end of the support and 0 at the upper end")
    val, _ = integrate.quad(
        lambda t: float(p_minus_density(t)) * float(p_plus_tail(t)), lo, hi, epsabs=tol, epsrel=tol, limit=200
    )
    return val


def analytic_auc_from_densities(p_plus_density, p_minus_density, support):
    """AUC as the double integral of ``P+(s) P-(t)`` over ``s >= t``."""
    lo, hi = support
    val, _ = integrate.dblquad(
        lambda s, t: float(p_plus_density(s)) * float(p_minus_density(t)),
        lo, hi, lambda t: t, lambda t: hi, epsabs=1e-10, epsrel=1e-10,
    )
    return val
