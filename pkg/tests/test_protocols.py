import json
import math
from dataclasses import replace

import numpy as np
import pytest

from adeval import metrics
from adeval.data import Dataset, generate_gaussian_circle
from adeval.detectors import DetectorSpec, _OracleDetector
from adeval.protocols import (
    EvalResult,
    ProtocolConfig,
    ProtocolFailure,
    prepare,
    run_estimate_sweep,
    run_injection_sweep,
    run_recycling,
    run_unbiased,
)


def circle(n_normal=1600, n_anomaly=400, radius=2.5, seed=0):
    return generate_gaussian_circle(n_normal, n_anomaly, radius, 0.1, seed=seed)


def labelled_feature_dataset(n=400, n_anom=40, seed=0):
    rng = np.random.default_rng(seed)
    y = np.r_[np.zeros(n - n_anom, int), np.ones(n_anom, int)]
    return Dataset("oracle", np.column_stack([y.astype(float), rng.normal(size=n)]), y)


def oracle_config(**kw):
    return ProtocolConfig(detector=_OracleDetector(), **kw)


def test_unbiased_easy_circle():
    r = run_unbiased(circle(), ProtocolConfig(beta=0.2, seed=1))
    assert r.auc > 0.95 and r.protocol == "unbiased"
    assert r.alpha_test_actual == r.n_test_anomalous / (r.n_test_anomalous + r.n_test_normal)
    c = r.counts
    assert c.tp + c.fn == r.n_test_anomalous and c.fp + c.tn == r.n_test_normal
    assert (r.precision, r.recall, r.f1) == metrics.binary_metrics(c)


@pytest.mark.parametrize("run", [run_unbiased, run_recycling])
def test_oracle_detector_is_perfect(run):
    r = run(labelled_feature_dataset(), oracle_config(beta=0.25, seed=3))
    assert r.f1 == r.auc == r.avpr == 1.0


def test_unbiased_without_train_anomalies():
    ds = labelled_feature_dataset(n=200, n_anom=2, seed=1)
    for seed in range(200):
        cfg = oracle_config(beta=0.5, seed=seed)
        prep = prepare(ds, replace(cfg, protocol="unbiased"))
        if prep.train_scores.n_pos == 0:
            break
    else:
        pytest.fail("no seed put both anomalies in the test set")
    r = run_unbiased(ds, cfg)
    assert math.isinf(r.threshold) and r.alpha_train_estimate == 0.0
    assert r.f1 == 0.0 and r.recall == 0.0 and r.auc == 1.0


def test_recycling_moves_all_anomalies_to_test():
    ds = circle()
    r = run_recycling(ds, ProtocolConfig(beta=0.2, seed=4))
    assert r.n_test_anomalous == ds.n_anomalies


def test_recycling_estimated_policy_gives_fp_equal_fn():
    for seed in range(10):
        r = run_recycling(circle(seed=seed), ProtocolConfig(beta=0.2, seed=seed))
        assert r.counts.fp == r.counts.fn
        assert r.precision == r.recall == r.f1


def test_optimal_policy_dominates():
    for seed in range(10):
        ds = circle(1900, 100, seed=seed)
        est = run_recycling(ds, ProtocolConfig(beta=0.2, seed=seed))
        opt = run_recycling(ds, ProtocolConfig(beta=0.2, seed=seed, threshold_policy="optimal"))
        assert opt.f1 >= est.f1
        assert opt.avpr == est.avpr and opt.auc == est.auc


def test_reproducible():
    cfg = ProtocolConfig(protocol="unbiased", beta=0.2, seed=11, detector=DetectorSpec("knn", k=3))
    a = run_unbiased(circle(400, 50, seed=2), cfg)
    b = run_unbiased(circle(400, 50, seed=2), cfg)
    assert a == b


def test_degenerate_splits_are_reported():
    one_class = Dataset("x", np.zeros((10, 2)) + np.arange(10)[:, None], np.zeros(10, int))
    with pytest.raises(ProtocolFailure) as exc:
        run_recycling(one_class, ProtocolConfig())
    assert exc.value.reason == "single_class_dataset"
    tiny = Dataset("t", np.arange(8.0).reshape(4, 2), [0, 0, 0, 1])
    reasons = set()
    for seed in range(30):
        try:
            run_unbiased(tiny, ProtocolConfig(beta=0.25, seed=seed))
        except ProtocolFailure as e:
            reasons.add(e.reason)
    assert "single_class_test" in reasons
    heavy = Dataset("h", np.arange(8.0).reshape(4, 2), [1, 1, 1, 0])
    with pytest.raises(ProtocolFailure, match="anomaly_majority"):
        run_recycling(heavy, ProtocolConfig())


def test_eval_result_json_roundtrip():
    r = run_recycling(circle(400, 50), ProtocolConfig(seed=2))
    assert EvalResult.from_dict(json.loads(r.to_json())) == r


def test_config_kv_roundtrip(tmp_path):
    cfg = ProtocolConfig("unbiased", 0.05, "optimal", DetectorSpec("knn", 7, 1e-3), 42, True, False)
    cfg.save(tmp_path / "c.cfg")
    assert ProtocolConfig.load(tmp_path / "c.cfg") == cfg


# -- sweeps ---------------------------------------------------------------------

def test_injection_sweep_shape_and_nesting():
    ds = circle(2000, 100, seed=1)
    res = run_injection_sweep(ds, 0.2, [0, 10, 50, 100], ProtocolConfig(seed=1))
    assert [c for c, _ in res] == [0, 10, 50, 100]
    assert res[0][1] is None
    for c, r in res[1:]:
        assert r.n_test_anomalous == c and r.n_test_normal == 400
        assert r.n_train_clean == 1600


def test_injection_sweep_rejects_too_many():
    with pytest.raises(ValueError):
        run_injection_sweep(circle(100, 10), 0.2, [11], ProtocolConfig())


def test_injection_sweep_trends():
    counts = [10, 50, 100, 200, 400]
    runs = [run_injection_sweep(circle(8000, 400, seed=s), 0.2, counts, ProtocolConfig(seed=s)) for s in range(30)]
    mean = {m: [np.mean([getattr(run[i][1], m) for run in runs]) for i in range(len(counts))]
            for m in ("f1", "avpr", "auc")}
    assert np.all(np.diff(mean["f1"]) >= 0) and np.all(np.diff(mean["avpr"]) > 0)
    assert np.ptp(mean["auc"]) < 0.02


def test_estimate_sweep_endpoints_and_crossing():
    ds = circle(1600, 400, seed=5)
    cfg = ProtocolConfig(protocol="unbiased", beta=0.2, seed=5)
    scored = prepare(ds, cfg).test_scores
    alpha = scored.n_pos / len(scored)
    grid = [0.0, 0.1, alpha, 0.5, 1.0]
    pts = run_estimate_sweep(ds, cfg, grid)
    assert pts[-1].recall == 1.0 and pts[-1].precision == pytest.approx(alpha)
    mid = pts[2]
    assert mid.precision == mid.recall == mid.f1
    assert all(a.recall <= b.recall for a, b in zip(pts, pts[1:]))
