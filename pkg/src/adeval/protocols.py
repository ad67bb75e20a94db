"""End-to-end evaluation protocols.

``unbiased``
    Split, train on the clean part of the train set, fix the threshold so the
    fraction of train samples flagged equals the train contamination, then
    apply that threshold to the untouched test set.
``recycling``
    Split, move every train anomaly into the test set, train on the clean
    train samples, and fix the threshold on the test scores at the test
    contamination. With tie-free scores this forces fp == fn, hence
    precision == recall == F1.

Both report F1 at the chosen threshold plus AUC and AVPR from raw scores.
"""
import json
import math
from fractions import Fraction
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import metrics
from .data import (
    DataError,
    clean_subset,
    fit_normalizer,
    split_train_test,
)
from .detectors import DetectorSpec, ScoredSet, score_all
from .metrics import ConfusionCounts

PROTOCOLS = ("unbiased", "recycling")
POLICIES = ("estimated", "optimal")


class ProtocolFailure(DataError):
    """A run hit a degenerate split. ``reason`` is a short machine code."""

    def __init__(self, reason, message):
        super().__init__(f"{reason}: {message}")
        self.reason = reason


@dataclass(frozen=True)
class ProtocolConfig:
    protocol: str = "recycling"
    beta: float = 0.2
    threshold_policy: str = "estimated"
    detector: DetectorSpec = field(default_factory=DetectorSpec)
    seed: int = 0
    stratified: bool = False
    normalize: bool = True

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise DataError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.threshold_policy not in POLICIES:
            raise DataError(f"threshold_policy must be one of {POLICIES}, got {self.threshold_policy!r}")
        if not 0 < self.beta < 1:
            raise DataError(f"beta must lie in (0, 1), got {self.beta}")

    def with_seed(self, seed):
        return replace(self, seed=seed)

    def to_kv(self):
        det = self.detector
        return {
            "protocol": self.protocol,
            "beta": repr(self.beta),
            "threshold_policy": self.threshold_policy,
            "detector": getattr(det, "kind", "gaussian"),
            "knn_k": str(getattr(det, "k", 5)),
            "ridge": repr(getattr(det, "ridge", 1e-6)),
            "seed": str(self.seed),
            "stratified": str(self.stratified).lower(),
            "normalize": str(self.normalize).lower(),
        }

    @classmethod
    def from_kv(cls, kv):
        kv = dict(kv)
        det = DetectorSpec(
            kind=kv.pop("detector", "gaussian"),
            k=int(kv.pop("knn_k", 5)),
            ridge=float(kv.pop("ridge", 1e-6)),
        )
        known = {f.name for f in fields(cls)} - {"detector"}
        unknown = set(kv) - known
        if unknown:
            raise DataError(f"unknown config keys: {sorted(unknown)}")
        conv = {}
        for k, v in kv.items():
            if k == "beta":
                conv[k] = float(v)
            elif k == "seed":
                conv[k] = int(v)
            elif k in ("stratified", "normalize"):
                conv[k] = parse_bool(v)
            else:
                conv[k] = v
        return cls(detector=det, **conv)

    def save(self, path):
        write_kv(self.to_kv(), path)

    @classmethod
    def load(cls, path):
        return cls.from_kv(read_kv(path))


def parse_bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise DataError(f"not a boolean: {v!r}")


def read_kv(path):
    """Read ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DataError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def write_kv(kv, path):
    Path(path).write_text("".join(f"{k} = {v}\n" for k, v in kv.items()), encoding="utf-8")


@dataclass(frozen=True)
class EvalResult:
    protocol: str
    seed: int
    f1: float
    precision: float
    recall: float
    auc: float
    avpr: float
    threshold: float
    threshold_rule: str
    alpha_train_estimate: float
    alpha_test_actual: float
    counts: ConfusionCounts
    n_train_clean: int
    n_test_normal: int
    n_test_anomalous: int

    def to_dict(self):
        d = asdict(self)
        d["counts"] = self.counts._asdict()
        if math.isinf(self.threshold):
            d["threshold"] = "inf"
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["counts"] = ConfusionCounts(**d["counts"])
        d["threshold"] = float(d["threshold"])
        return cls(**d)

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


class PreparedRun(NamedTuple):
    model: object
    train_scores: object
    test_scores: object
    n_train_clean: int


def _check_dataset(dataset):
    if dataset.n_anomalies == 0 or dataset.n_normals == 0:
        raise ProtocolFailure("single_class_dataset", f"{dataset.name} needs both classes")
    if dataset.n_anomalies > dataset.n_normals:
        raise ProtocolFailure("anomaly_majority", f"{dataset.name} has more anomalies than normals")


def prepare(dataset, config):
    """Split, optionally recycle train anomalies, normalise, fit and score.

    Returns the fitted model with train and test scores. For the recycling
    protocol the train scores cover the clean train samples only.
    """
    _check_dataset(dataset)
    split = split_train_test(dataset, config.beta, seed=config.seed, stratified=config.stratified)
    train, test = split.train, split.test
    try:
        clean = clean_subset(train)
    except DataError:
        raise ProtocolFailure("no_clean_train", "train split has no normal samples") from None
    if len(clean) < 2:
        raise ProtocolFailure("no_clean_train", "train split has fewer than 2 normal samples")
    if config.protocol == "recycling":
        test = test.concat(train.subset(np.flatnonzero(train.y == 1)))
        train = clean
    if test.n_anomalies == 0 or test.n_normals == 0:
        raise ProtocolFailure("single_class_test", "test set lacks one of the classes")
    if config.normalize:
        norm = fit_normalizer(clean)
        clean, train, test = norm.apply(clean), norm.apply(train), norm.apply(test)
    model = config.detector.fit(clean.X)
    return PreparedRun(model, score_all(model, train), score_all(model, test), len(clean))


def _result(config, scored_test, threshold, alpha_hat, n_clean):
    counts = metrics.confusion_at(scored_test, threshold)
    bm = metrics.binary_metrics(counts)
    return EvalResult(
        protocol=config.protocol,
        seed=config.seed,
        f1=bm.f1,
        precision=bm.precision,
        recall=bm.recall,
        auc=metrics.auc(scored_test),
        avpr=metrics.avpr(scored_test),
        threshold=threshold.value,
        threshold_rule=threshold.rule,
        alpha_train_estimate=alpha_hat,
        alpha_test_actual=float(Fraction(scored_test.n_pos, len(scored_test))),
        counts=counts,
        n_train_clean=n_clean,
        n_test_normal=scored_test.n_neg,
        n_test_anomalous=scored_test.n_pos,
    )


def run_unbiased(dataset, config):
    config = replace(config, protocol="unbiased")
    prep = prepare(dataset, config)
    alpha_hat = float(np.mean(prep.train_scores.labels))
    if config.threshold_policy == "optimal":
        threshold, _ = metrics.optimal_f1_threshold(prep.test_scores)
    else:
        threshold = metrics.threshold_from_rate(prep.train_scores, alpha_hat)
    return _result(config, prep.test_scores, threshold, alpha_hat, prep.n_train_clean)


def run_recycling(dataset, config):
    config = replace(config, protocol="recycling")
    prep = prepare(dataset, config)
    alpha = float(np.mean(prep.test_scores.labels))
    if config.threshold_policy == "optimal":
        threshold, _ = metrics.optimal_f1_threshold(prep.test_scores)
    else:
        threshold = metrics.threshold_from_rate(prep.test_scores, alpha)
    return _result(config, prep.test_scores, threshold, alpha, prep.n_train_clean)


def run_protocol(dataset, config):
    return run_unbiased(dataset, config) if config.protocol == "unbiased" else run_recycling(dataset, config)


def run_injection_sweep(dataset, beta, anomaly_counts, config):
    """Fixed clean split and model; only the number of test anomalies varies.

    The normal samples are split with test fraction ``beta``; the model is
    fitted once on the train normals. For each count, that many anomalies
    (always a prefix of one seeded permutation, so the sets are nested) join
    the test normals. Thresholds follow ``config.threshold_policy`` on the
    test scores. A count of 0 yields ``None`` since AUC and AVPR are
    undefined without anomalies.
    """
    anomaly_counts = [int(c) for c in anomaly_counts]
    n_anom = dataset.n_anomalies
    if any(c < 0 or c > n_anom for c in anomaly_counts):
        raise DataError(f"anomaly counts must lie in [0, {n_anom}], got {anomaly_counts}")
    config = replace(config, protocol="recycling", beta=beta)
    normals = clean_subset(dataset)
    anomalies = dataset.subset(np.flatnonzero(dataset.y == 1))
    split = split_train_test(normals, beta, seed=config.seed)
    train, test_normals = split.train, split.test
    if len(train) < 2:
        raise ProtocolFailure("no_clean_train", "fewer than 2 train normals")
    rng = np.random.default_rng(np.random.SeedSequence([int(config.seed), 0x69]))
    anomalies = anomalies.subset(rng.permutation(len(anomalies)))
    if config.normalize:
        norm = fit_normalizer(train)
        train, test_normals, anomalies = norm.apply(train), norm.apply(test_normals), norm.apply(anomalies)
    model = config.detector.fit(train.X)
    s_norm = model.score(test_normals.X)
    s_anom = model.score(anomalies.X) if len(anomalies) else np.empty(0)
    out = []
    for c in anomaly_counts:
        if c == 0:
            out.append((c, None))
            continue
        scored = _scored_blocks(np.concatenate([s_norm, s_anom[:c]]), len(s_norm), c)
        alpha = c / (c + len(s_norm))
        if config.threshold_policy == "optimal":
            threshold, _ = metrics.optimal_f1_threshold(scored)
        else:
            threshold = metrics.threshold_from_rate(scored, alpha)
        out.append((c, _result(config, scored, threshold, alpha, len(train))))
    return out


def _scored_blocks(scores, n_neg, n_pos):
    labels = np.concatenate([np.zeros(n_neg, np.int64), np.ones(n_pos, np.int64)])
    return ScoredSet(scores, labels)


class SweepPoint(NamedTuple):
    alpha_hat: float
    precision: float
    recall: float
    f1: float


def run_estimate_sweep(dataset, config, alpha_hat_grid):
    """Precision, recall and F1 on one fixed test set as the rate estimate varies.

    The model and test set come from one run of ``config.protocol``; each
    grid value sets the threshold on the test scores via ``threshold_from_rate``.
    """
    grid = [float(a) for a in alpha_hat_grid]
    if any(not 0.0 <= a <= 1.0 for a in grid):
        raise DataError("alpha_hat grid values must lie in [0, 1]")
    scored = prepare(dataset, config).test_scores
    return estimate_sweep_scored(scored, grid)


def estimate_sweep_scored(scored, alpha_hat_grid):
    out = []
    for a in alpha_hat_grid:
        bm = metrics.binary_metrics(metrics.confusion_at(scored, metrics.threshold_from_rate(scored, a)))
        out.append(SweepPoint(float(a), *bm))
    return out
