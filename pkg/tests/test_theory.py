import math

import numpy as np
import pytest
from scipy import integrate

from adeval import theory
from adeval.data import DataError
from adeval.detectors import ScoredSet
from adeval.metrics import auc

import oracles


@pytest.mark.parametrize(
    "pp, pm, alpha, expected",
    [
        (1.0, 1.0, 0.3, 1.0),
        (1.0, 1.0, 0.01, 1.0),
        (0.8, 0.8, 0.5, 2 * 0.5 * 0.8 / (0.5 * 1.8 + 0.5 * 0.2)),
        (0.8, 0.8, 0.05, 0.08 / 0.28),
    ],
)
def test_f1_closed_form_values(pp, pm, alpha, expected):
    assert theory.f1_closed_form(pp, pm, alpha) == pytest.approx(expected, abs=1e-12)
    assert theory.f1_closed_form(pp, pm, alpha) == pytest.approx(oracles.expected_count_f1(pp, pm, alpha), abs=1e-9)


def test_f1_closed_form_against_count_arithmetic(rng):
    for pp, pm, a in rng.uniform(0.01, 0.99, (200, 3)):
        assert theory.f1_closed_form(pp, pm, a) == pytest.approx(oracles.expected_count_f1(pp, pm, a), abs=1e-8)


def test_f1_closed_form_degenerate():
    assert theory.f1_closed_form(0.5, 0.5, 0.0) == 0.0
    assert theory.f1_closed_form(0.0, 1.0, 0.0) == 0.0


def test_surface_rows_and_consistency():
    alphas = np.linspace(0.01, 0.99, 25)
    rows = theory.f1_surface([0.5, 0.8, 1.0], [0.8, 1.0], alphas)
    assert len(rows) == 3 * 2 * 25
    for a, pp, pm, f in rows:
        assert f == theory.f1_closed_form(pp, pm, a)
    for pp in (0.5, 0.8):
        col = [f for a, p, m, f in rows if p == pp and m == 0.8]
        assert np.all(np.diff(col) > 0)
    ones = [f for a, p, m, f in rows if p == 1.0 and m == 1.0]
    assert ones == [1.0] * 25


def test_surface_not_symmetric():
    a = theory.f1_closed_form(0.9, 0.5, 0.3)
    b = theory.f1_closed_form(0.5, 0.9, 0.3)
    assert a == pytest.approx(0.54 / (0.57 + 0.35)) and b == pytest.approx(0.3 / (0.45 + 0.07))
    assert a != b


def test_surface_csv(tmp_path):
    rows = theory.f1_surface([0.8], [0.8], [0.1, 0.5])
    theory.write_table(rows, ("alpha", "p_plus", "p_minus", "f1"), tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "alpha,p_plus,p_minus,f1" and len(lines) == 3


def test_toy_densities_integrate_to_one():
    for dens in (theory.ToyModel.anomaly_density, theory.ToyModel.normal_density):
        assert integrate.quad(dens, 0, 1)[0] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("t, expected", [(0.0, (1.0, 0.0)), (1.0, (0.0, 1.0)), (0.5, (0.75, 0.75))])
def test_toy_rates(t, expected):
    assert tuple(theory.toy_rates(t)) == pytest.approx(expected)


def test_toy_rates_match_quadrature():
    for t in np.linspace(0, 1, 11):
        pp = integrate.quad(theory.ToyModel.anomaly_density, t, 1)[0]
        pm = integrate.quad(theory.ToyModel.normal_density, 0, t)[0]
        assert tuple(theory.toy_rates(t)) == pytest.approx((pp, pm), abs=1e-12)


def test_toy_f1_values():
    assert theory.toy_f1(0.5, 0.5) == pytest.approx(2 * 0.375 / (0.75 + 0.25))
    for a in (0.05, 0.3, 0.9):
        assert theory.toy_f1(1.0, a) == 0.0


def test_toy_curve_rows():
    rows = theory.toy_f1_curve(0.2, [0.0, 0.5, 1.0])
    assert [r[0] for r in rows] == [0.0, 0.5, 1.0] and rows[2][1] == 0.0


def test_toy_fpfn_threshold():
    assert theory.toy_fpfn_threshold(0.5) == 0.5
    assert theory.toy_fpfn_threshold(1e-10) > 0.9999
    t = theory.toy_fpfn_threshold(0.2)
    ref = oracles.bisect_root(lambda x: 0.8 * (1 - x) ** 2 - 0.2 * x * x, 0.0, 1.0)
    assert t == pytest.approx(ref, abs=1e-12) and t == pytest.approx(2 / 3, abs=1e-12)
    with pytest.raises(DataError):
        theory.toy_fpfn_threshold(0.0)


def test_toy_optimal_threshold():
    for a in (0.01, 0.05, 0.2, 0.5, 0.8, 0.99):
        t, f1 = theory.toy_optimal_threshold(a)
        t0 = theory.toy_fpfn_threshold(a)
        assert f1 > theory.toy_f1(t0, a)
        grid = np.linspace(0, 1, 1_000_001)
        brute = grid[np.argmax(_toy_f1_vec(grid, a))]
        assert abs(t - brute) < 1e-4
    t, _ = theory.toy_optimal_threshold(0.5)
    assert t < 0.5


def _toy_f1_vec(t, a):
    tp = a * (1 - t**2)
    return np.where(tp > 0, 2 * tp / (2 * tp + (1 - a) * (1 - t) ** 2 + a * t**2), 0.0)


def test_toy_auc():
    assert theory.toy_auc() == pytest.approx(5 / 6, abs=1e-15)
    q = integrate.quad(lambda t: 2 * (1 - t) * (1 - t * t), 0, 1)[0]
    assert q == pytest.approx(5 / 6, abs=1e-12)
    tm = theory.ToyModel
    assert theory.analytic_auc(tm.anomaly_tail, tm.normal_density, tm.support) == pytest.approx(5 / 6, abs=1e-9)
    assert theory.analytic_auc_from_densities(tm.anomaly_density, tm.normal_density, tm.support) == pytest.approx(
        5 / 6, abs=1e-9
    )


def _uniform(lo, hi):
    dens = lambda s: (1.0 / (hi - lo)) if lo <= s <= hi else 0.0  # noqa: E731
    tail = lambda t: min(1.0, max(0.0, (hi - t) / (hi - lo)))  # noqa: E731
    return dens, tail


def test_analytic_auc_identical_and_disjoint():
    dens, tail = _uniform(0.0, 1.0)
    assert theory.analytic_auc(tail, dens, (0.0, 1.0)) == pytest.approx(0.5, abs=1e-9)
    hi_dens, hi_tail = _uniform(2.0, 3.0)
    assert theory.analytic_auc(hi_tail, dens, (0.0, 3.0)) == pytest.approx(1.0, abs=1e-9)


def test_analytic_auc_rejects_unnormalised():
    with pytest.raises(DataError):
        theory.analytic_auc(lambda t: 1 - t, lambda t: 2.0, (0.0, 1.0))


def test_analytic_auc_reflection_symmetry():
    # swap classes and negate scores: anomalies take the reflected normal density
    tm = theory.ToyModel
    direct = theory.analytic_auc(tm.anomaly_tail, tm.normal_density, (0.0, 1.0))
    refl_tail = lambda t: float(tm.normal_cdf(-t))  # noqa: E731  P(-S- >= t)
    refl_dens = lambda t: float(tm.anomaly_density(-t))  # noqa: E731
    assert theory.analytic_auc(refl_tail, refl_dens, (-1.0, 0.0)) == pytest.approx(direct, abs=1e-9)


def test_gaussian_scores_analytic_auc():
    from scipy.stats import norm

    # AUC of N(1,1) vs N(0,1) is Phi(1/sqrt(2))
    got = theory.analytic_auc(lambda t: norm.sf(t, loc=1.0), norm.pdf)
    assert got == pytest.approx(norm.cdf(1 / math.sqrt(2)), abs=1e-8)


def test_recall_independent_of_alpha():
    assert theory.toy_rates(0.3) == theory.toy_rates(0.3)
    for a in (0.1, 0.4):
        tp = a * theory.toy_rates(0.3).p_plus
        assert tp / a == pytest.approx(theory.toy_rates(0.3).p_plus)


def test_monte_carlo_toy_auc(rng):
    s, y = theory.ToyModel.sample(50_000, 50_000, rng)
    assert abs(auc(ScoredSet(s, y)) - 5 / 6) < 0.01
