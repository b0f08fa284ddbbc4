"""Downstream prediction, metrics, and the repeated-experiment runner.

The downstream learner is linear ridge regression on projected features
with an unpenalized intercept (kernel ridge in the projected space, where
the kernel is linear). The unprojected baseline solves the standard dual
kernel-ridge system on the centered training Gram. Classification
thresholds scores at zero on +-1 targets.
"""
from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from . import dcm, fastpath
from .datagen import SynthConfig, split_domains, synth_generate
from .errors import InvalidInput, RankDeficientWarning, UndefinedMetric
from .kernels import (
    DELTA,
    RBF,
    KernelSpec,
    center_cross_from_means,
    center_gram,
    cross_gram,
    gram,
    median_gamma,
)

ALGORITHMS = ("dcm", "coir", "kpca", "fastdcm", "fastcoir", "baseline")


@dataclass
class RidgePredictor:
    weights: np.ndarray
    feature_means: np.ndarray
    intercept: float

    def predict(self, features: np.ndarray) -> np.ndarray:
        F = np.asarray(features, dtype=float)
        return (F - self.feature_means[:, None]).T @ self.weights + self.intercept


def krr_fit(features, targets, lam: float) -> RidgePredictor:
    """Ridge fit on m x N features with an unpenalized intercept.

    A numerically degenerate normal-equations matrix triggers a warning
    and a retry with a 10x larger ridge (up to three escalations).
    """
    if lam <= 0:
        raise InvalidInput("lambda must be positive")
    F = np.asarray(features, dtype=float)
    y = np.asarray(targets, dtype=float).ravel()
    if F.ndim != 2 or F.shape[1] != y.shape[0]:
        raise InvalidInput("features must be m x N with N matching targets")
    fm = F.mean(axis=1)
    ym = float(y.mean())
    Fc = F - fm[:, None]
    G = Fc @ Fc.T
    m = F.shape[0]
    cur = lam
    evals = np.linalg.eigvalsh(0.5 * (G + G.T))
    if evals[0] <= 1e-12 * max(evals[-1], 1.0):
        warnings.warn(
            f"rank-deficient feature matrix; ridge raised to {lam * 10.0:g}",
            RankDeficientWarning,
        )
        cur = lam * 10.0
    for _ in range(3):
        try:
            w = np.linalg.solve(G + cur * np.eye(m), Fc @ (y - ym))
        except np.linalg.LinAlgError:
            w = None
        if w is not None and np.all(np.isfinite(w)):
            return RidgePredictor(weights=w, feature_means=fm, intercept=ym)
        cur *= 10.0
        warnings.warn(
            f"ridge system failed to solve; ridge raised to {cur:g}",
            RankDeficientWarning,
        )
    raise InvalidInput("ridge system unsolvable even after escalation")


def predict_labels(scores: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(scores) >= 0.0, 1.0, -1.0)


def metric_accuracy(pred_labels, truth) -> float:
    p = np.asarray(pred_labels).ravel()
    t = np.asarray(truth).ravel()
    if p.shape != t.shape or p.size == 0:
        raise InvalidInput("prediction/truth length mismatch")
    return float(np.mean(p == t))


def metric_rmse(pred, truth) -> float:
    p = np.asarray(pred, dtype=float).ravel()
    t = np.asarray(truth, dtype=float).ravel()
    if p.shape != t.shape or p.size == 0:
        raise InvalidInput("prediction/truth length mismatch")
    return float(np.sqrt(np.mean((p - t) ** 2)))


def metric_gmean(tp: int, fn: int, tn: int, fp: int) -> float:
    """Geometric mean of the two per-class recalls, in [0, 1]."""
    if tp + fn < 1 or tn + fp < 1:
        raise UndefinedMetric("g-mean needs at least one sample of each class")
    sens = tp / (tp + fn)
    spec = tn / (tn + fp)
    return float(np.sqrt(sens * spec))


def metric_auc(scores, labels) -> float:
    """Rank-based area under the ROC curve; ties contribute one half."""
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels, dtype=float).ravel()
    if s.shape != y.shape:
        raise InvalidInput("scores/labels length mismatch")
    pos = y > 0
    n_pos = int(pos.sum())
    n_neg = int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetric("auc needs both classes present")
    ranks = rankdata(s)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def gmean_from_labels(pred_labels, truth) -> float:
    p = np.asarray(pred_labels).ravel()
    t = np.asarray(truth).ravel()
    tp = int(np.sum((p > 0) & (t > 0)))
    fn = int(np.sum((p <= 0) & (t > 0)))
    tn = int(np.sum((p <= 0) & (t <= 0)))
    fp = int(np.sum((p > 0) & (t <= 0)))
    return metric_gmean(tp, fn, tn, fp)


@dataclass
class ExperimentConfig:
    """Protocol of a repeated multi-domain experiment on synthetic data."""

    algorithms: tuple = ("dcm", "coir", "baseline")
    reps: int = 20
    seed: int = 100
    T: int = 10
    n: int = 10
    eta: float = 0.5
    mean_count: int = 100
    train_domains: int = 7
    gamma: float = 0.5
    gamma_y: float | None = None
    label_kind: str = "discrete"
    epsilon: float = 1e-3
    m: int = 5
    M: int = 50
    lam: float = 0.1


@dataclass
class EvalReport:
    config: dict
    seeds: list
    metrics: dict = field(default_factory=dict)
    per_rep: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "config": self.config,
            "seeds": self.seeds,
            "metrics": {
                alg: {name: {"mean": mu, "std": sd} for name, (mu, sd) in by.items()}
                for alg, by in self.metrics.items()
            },
            "per_rep": self.per_rep,
            "timings_seconds": self.timings,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = []
        metric_names = sorted({n for by in self.metrics.values() for n in by})
        header = f"{'algorithm':<10}" + "".join(f"{n:>20}" for n in metric_names)
        lines.append(header)
        for alg in self.metrics:
            row = f"{alg:<10}"
            for name in metric_names:
                if name in self.metrics[alg]:
                    mu, sd = self.metrics[alg][name]
                    row += f"{mu:>12.4f} +- {sd:<5.4f}"
                else:
                    row += f"{'-':>20}"
            lines.append(row)
        return "\n".join(lines)

    def per_rep_csv(self) -> str:
        lines = ["algorithm,rep,seed,metric,value"]
        for alg, by in self.per_rep.items():
            for name, vals in by.items():
                for r, v in enumerate(vals):
                    lines.append(f"{alg},{r},{self.seeds[r]},{name},{v!r}")
        return "\n".join(lines) + "\n"


def _split_stream(seed: int) -> np.random.Generator:
    key = np.array([seed, 2**32], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _resolve_spec_y(cfg: ExperimentConfig, y: np.ndarray) -> KernelSpec:
    if cfg.label_kind == "continuous":
        gamma_y = cfg.gamma_y if cfg.gamma_y is not None else median_gamma(y)
        return KernelSpec(RBF, gamma_y)
    return KernelSpec(DELTA)


def _fit_and_score(alg: str, cfg: ExperimentConfig, train, test, timings) -> dict:
    spec_x = KernelSpec(RBF, cfg.gamma)
    spec_y = _resolve_spec_y(cfg, train.y)
    t0 = time.perf_counter()
    if alg == "baseline":
        Kraw = gram(spec_x, train.X)
        row_means = Kraw.mean(axis=1)
        Kx = center_gram(Kraw)
        ym = float(train.y.mean())
        alpha = np.linalg.solve(Kx + cfg.lam * np.eye(len(train)), train.y - ym)
        timings[alg]["fit"] += time.perf_counter() - t0
        t0 = time.perf_counter()
        Kz = center_cross_from_means(cross_gram(spec_x, train.X, test.X), row_means)
        scores = Kz.T @ alpha + ym
    else:
        if alg == "dcm":
            model = dcm.fit_dcm(train, spec_x, cfg.epsilon, cfg.m, spec_y=spec_y)
        elif alg == "coir":
            model = dcm.fit_coir(train, spec_x, cfg.epsilon, cfg.m, spec_y=spec_y)
        elif alg == "kpca":
            model = dcm.fit_kpca(train, spec_x, cfg.m)
        elif alg == "fastdcm":
            model = fastpath.fit_fastdcm(train, spec_x, cfg.epsilon, cfg.m,
                                         cfg.M, cfg.seed, spec_y=spec_y)
        elif alg == "fastcoir":
            model = fastpath.fit_fastcoir(train, spec_x, cfg.epsilon, cfg.m,
                                          cfg.M, cfg.seed, spec_y=spec_y)
        else:
            raise InvalidInput(f"unknown algorithm {alg!r}")
        predictor = krr_fit(dcm.transform(model, train.X), train.y, cfg.lam)
        timings[alg]["fit"] += time.perf_counter() - t0
        t0 = time.perf_counter()
        scores = predictor.predict(dcm.transform(model, test.X))
    timings[alg]["predict"] += time.perf_counter() - t0
    out = {}
    if cfg.label_kind == "continuous":
        out["rmse"] = metric_rmse(scores, test.y)
    else:
        labels = predict_labels(scores)
        out["accuracy"] = metric_accuracy(labels, test.y)
        try:
            out["auc"] = metric_auc(scores, test.y)
            out["gmean"] = gmean_from_labels(labels, test.y)
        except UndefinedMetric:
            pass
    return out


def run_experiment(cfg: ExperimentConfig) -> EvalReport:
    """Run R seeded repetitions of generate / split / fit / score.

    Every algorithm inside one repetition sees the same dataset and the
    same domain split, so rows are paired by seed. Fit errors are
    re-raised with the failing repetition attached.
    """
    for alg in cfg.algorithms:
        if alg not in ALGORITHMS:
            raise InvalidInput(f"unknown algorithm {alg!r}")
    seeds = [cfg.seed + r for r in range(cfg.reps)]
    per_rep = {alg: {} for alg in cfg.algorithms}
    timings = {alg: {"fit": 0.0, "predict": 0.0} for alg in cfg.algorithms}
    for r, seed in enumerate(seeds):
        data = synth_generate(SynthConfig(
            T=cfg.T, n=cfg.n, eta=cfg.eta, mean_count=cfg.mean_count, seed=seed,
        ))
        domains = np.unique(data.d)
        order = _split_stream(seed).permutation(domains)
        train, test = split_domains(data, order[: cfg.train_domains])
        for alg in cfg.algorithms:
            try:
                scores = _fit_and_score(alg, cfg, train, test, timings)
            except Exception as exc:
                raise type(exc)(
                    f"repetition {r} (seed {seed}), algorithm {alg}: {exc}"
                ) from exc
            for name, value in scores.items():
                per_rep[alg].setdefault(name, []).append(value)
    metrics = {
        alg: {
            name: (float(np.mean(vals)), float(np.std(vals)))
            for name, vals in by.items()
        }
        for alg, by in per_rep.items()
    }
    config_echo = {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in vars(cfg).items()}
    return EvalReport(config=config_echo, seeds=seeds, metrics=metrics,
                      per_rep=per_rep, timings=timings)
