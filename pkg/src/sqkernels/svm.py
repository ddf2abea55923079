"""Kernel SVM trained in dual form by pairwise (SMO-style) coordinate ascent.

The dual is

    L(alpha) = sum_i alpha_i - 1/2 sum_ij y_i y_j alpha_i alpha_j K_ij

subject to sum_i alpha_i y_i = 0 and 0 <= alpha_i <= C. Each step moves one
maximal violating pair along the direction that keeps the equality constraint
fixed, with an exact line search clipped to the box.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import GramMatrix, KernelSpec, cross_matrix

log = logging.getLogger(__name__)

MODEL_FORMAT = "sqkernels.svm"
MODEL_VERSION = 1
PSD_TOL = 1e-9
_TAU = 1e-12


class TrainingError(RuntimeError):
    """Training cannot proceed (bad labels, non-finite Gram, empty support)."""


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1000.0
    tol: float = 1e-3
    max_passes: int = 1000  # pair updates, in multiples of the training-set size
    support_threshold: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        for name in ("C", "tol", "max_passes", "support_threshold"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"TrainConfig.{name} must be positive, got {value!r}")
        if int(self.max_passes) != self.max_passes:
            raise ValueError("TrainConfig.max_passes must be an integer")

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown train keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(eq=False)
class SVMModel:
    alpha: np.ndarray
    bias: float
    support_indices: np.ndarray
    train_points: np.ndarray | None
    train_labels: np.ndarray
    spec: KernelSpec
    C: float
    tol: float
    ridge: float = 0.0
    support_threshold: float = 1e-8
    converged: bool = True
    n_iter: int = 0
    objective_history: list = field(default_factory=list, repr=False)

    @property
    def n_support(self) -> int:
        return int(self.support_indices.size)

    def margin_indices(self) -> np.ndarray:
        a, eps = self.alpha, self.support_threshold
        return np.flatnonzero((a > eps) & (a < self.C - eps))

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kernel": self.spec.to_dict(),
            "C": self.C,
            "tol": self.tol,
            "ridge": self.ridge,
            "support_threshold": self.support_threshold,
            "converged": self.converged,
            "n_iter": self.n_iter,
            "bias": self.bias,
            "alpha": [float(a) for a in self.alpha],
            "support_indices": [int(i) for i in self.support_indices],
            "train_labels": [int(y) for y in self.train_labels],
            "train_points": None if self.train_points is None else self.train_points.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SVMModel":
        if d.get("format") != MODEL_FORMAT:
            raise ValueError("not a serialized SVM model")
        if d.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {d.get('version')!r}")
        points = d["train_points"]
        return cls(
            alpha=np.asarray(d["alpha"], dtype=float),
            bias=float(d["bias"]),
            support_indices=np.asarray(d["support_indices"], dtype=int),
            train_points=None if points is None else np.asarray(points, dtype=float),
            train_labels=np.asarray(d["train_labels"], dtype=int),
            spec=KernelSpec.from_dict(d["kernel"]),
            C=float(d["C"]),
            tol=float(d["tol"]),
            ridge=float(d["ridge"]),
            support_threshold=float(d["support_threshold"]),
            converged=bool(d["converged"]),
            n_iter=int(d["n_iter"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "SVMModel":
        return cls.from_dict(json.loads(text))


def _check_labels(labels) -> np.ndarray:
    y = np.asarray(labels)
    if y.ndim != 1 or not np.all((y == 1) | (y == -1)):
        raise ValueError("labels must be a 1-D sequence of -1/+1")
    if np.all(y == 1) or np.all(y == -1):
        raise TrainingError("training labels contain a single class")
    return y.astype(int)


def _real_values(gram) -> np.ndarray:
    values = gram.values if isinstance(gram, GramMatrix) else gram
    values = np.asarray(values)
    if np.iscomplexobj(values):
        if isinstance(gram, GramMatrix) and not gram.is_real_part and np.any(values.imag != 0):
            raise ValueError("SVM training needs a real Gram matrix; reduce complex kernels first")
        values = values.real
    return np.array(values, dtype=float)


def ridge_for(K: np.ndarray) -> float:
    """Diagonal shift that makes a slightly indefinite Gram matrix PSD."""
    min_eig = float(np.linalg.eigvalsh(K)[0])
    if min_eig >= -PSD_TOL:
        return 0.0
    return max(0.0, -min_eig) + 1e-10


def _effective_gram(model: SVMModel, gram) -> np.ndarray:
    K = _real_values(gram)
    if K.shape != (model.alpha.size, model.alpha.size):
        raise ValueError(f"Gram shape {K.shape} does not match {model.alpha.size} training points")
    if model.ridge:
        K = K + model.ridge * np.eye(K.shape[0])
    return K


def _smo(K, y, C, tol, max_iter, callback=None):
    """SMO on the minimisation form f(a) = 1/2 a'Qa - sum(a), Q = yy'K.

    The first index is the maximal violator; its partner maximises the
    second-order gain among indices that violate with it. Stops when the
    maximal-violating-pair gap is <= tol. Returns
    (alpha, n_iter, converged, history).
    """
    n = y.size
    yf = y.astype(float)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # Q alpha - 1
    diag = np.diag(K).copy()
    pos, neg = y > 0, y < 0
    history = [0.0]
    for it in range(max_iter):
        s = -yf * grad
        up = (pos & (alpha < C)) | (neg & (alpha > 0))
        low = (pos & (alpha > 0)) | (neg & (alpha < C))
        s_up = np.where(up, s, -np.inf)
        s_low = np.where(low, s, np.inf)
        i = int(np.argmax(s_up))
        if s_up[i] - s_low.min() <= tol:
            return alpha, it, True, history
        b = s_up[i] - s_low
        a = np.maximum(diag[i] + diag - 2.0 * K[i], _TAU)
        gain = np.where(b > 0, b * b / a, -np.inf)
        j = int(np.argmax(gain))
        step = b[j] / a[j]
        lim_i = C - alpha[i] if y[i] > 0 else alpha[i]
        lim_j = alpha[j] if y[j] > 0 else C - alpha[j]
        step = min(step, lim_i, lim_j)
        if step == lim_i:
            alpha[i] = C if y[i] > 0 else 0.0
        else:
            alpha[i] += yf[i] * step
        if step == lim_j:
            alpha[j] = 0.0 if y[j] > 0 else C
        else:
            alpha[j] -= yf[j] * step
        grad += step * yf * (K[:, i] - K[:, j])
        history.append(0.5 * (alpha.sum() - alpha @ grad))
        if callback is not None:
            callback(alpha)
    return alpha, max_iter, False, history


def _restore_equality(alpha, y, C, eps):
    """Push the rounding residual of sum(alpha*y) onto one free coefficient."""
    residual = float(alpha @ y)
    if residual == 0.0:
        return alpha
    free = np.flatnonzero((alpha > eps) & (alpha < C - eps))
    candidates = free if free.size else np.flatnonzero(alpha > eps)
    for k in candidates[np.argsort(-alpha[candidates])]:
        new = alpha[k] - y[k] * residual
        if 0.0 <= new <= C:
            alpha[k] = new
            break
    return alpha


def train(gram, labels, cfg: TrainConfig | None = None, points=None) -> SVMModel:
    """Maximise the dual over the Gram matrix ``gram`` with labels in {-1, +1}.

    ``points`` are kept on the model for later prediction. A Gram matrix that
    is indefinite beyond 1e-9 gets a ridge shift, recorded on the model.
    Non-convergence within the iteration budget returns the last iterate with
    ``converged=False`` and logs a warning.
    """
    cfg = cfg or TrainConfig()
    y = _check_labels(labels)
    K_raw = _real_values(gram)
    n = y.size
    if K_raw.shape != (n, n):
        raise ValueError(f"Gram shape {K_raw.shape} does not match {n} labels")
    if not np.all(np.isfinite(K_raw)):
        raise ValueError("Gram matrix has non-finite entries")
    spec = gram.spec if isinstance(gram, GramMatrix) else None

    ridge = ridge_for(K_raw)
    K = K_raw
    if ridge:
        log.info("Gram matrix indefinite; adding ridge %.3g", ridge)
        K = K_raw + ridge * np.eye(n)

    # seeded relabelling of indices decides argmax/argmin ties
    perm = np.random.default_rng(cfg.seed).permutation(n)
    alpha_p, n_iter, converged, history = _smo(
        K[np.ix_(perm, perm)], y[perm], cfg.C, cfg.tol, int(cfg.max_passes) * max(n, 1)
    )
    alpha = np.empty(n)
    alpha[perm] = alpha_p
    alpha = _restore_equality(alpha, y, cfg.C, cfg.support_threshold)
    if not converged:
        log.warning("SMO did not converge within %d pair updates", n_iter)

    model = SVMModel(
        alpha=alpha,
        bias=0.0,
        support_indices=np.flatnonzero(alpha > cfg.support_threshold),
        train_points=None if points is None else np.atleast_2d(np.asarray(points, dtype=float)),
        train_labels=y,
        spec=spec,
        C=float(cfg.C),
        tol=float(cfg.tol),
        ridge=ridge,
        support_threshold=cfg.support_threshold,
        converged=converged,
        n_iter=n_iter,
        objective_history=history,
    )
    model.bias = compute_bias(model, K_raw)
    return model


def fit(points, labels, spec: KernelSpec, cfg: TrainConfig | None = None) -> SVMModel:
    """Build the real Gram matrix of ``points`` under ``spec`` and train."""
    from .kernels import gram_matrix

    return train(gram_matrix(points, spec, reduce_to_real=True), labels, cfg, points=points)


def dual_objective(model: SVMModel, gram) -> float:
    """L(alpha) = sum(alpha) - 1/2 sum_ij y_i y_j alpha_i alpha_j K_ij."""
    K = _effective_gram(model, gram)
    v = model.alpha * model.train_labels
    return float(model.alpha.sum() - 0.5 * v @ K @ v)


def compute_bias(model: SVMModel, gram) -> float:
    """Average of y_i - sum_{j in S} alpha_j y_j K_ji over margin support
    vectors (0 < alpha_i < C), or over all support vectors if none are free."""
    S = model.support_indices
    if S.size == 0:
        raise TrainingError("empty support set; cannot determine the bias")
    K = _effective_gram(model, gram)
    idx = model.margin_indices()
    if idx.size == 0:
        idx = S
    y = model.train_labels
    f = K[np.ix_(idx, S)] @ (model.alpha[S] * y[S])
    return float(np.mean(y[idx] - f))


def _decision_on_train(model: SVMModel, K: np.ndarray) -> np.ndarray:
    return K @ (model.alpha * model.train_labels) + model.bias


@dataclass(frozen=True)
class KKTReport:
    max_violation: float
    at_lower: float  # alpha = 0 points with y*f < 1
    free: float  # 0 < alpha < C points with y*f != 1
    at_upper: float  # alpha = C points with y*f > 1
    equality_residual: float
    pair_gap: float  # maximal-violating-pair gap used as the stopping rule


def kkt_report(model: SVMModel, gram) -> KKTReport:
    K = _effective_gram(model, gram)
    y, a, eps, C = model.train_labels, model.alpha, model.support_threshold, model.C
    margin = y * _decision_on_train(model, K)
    lower, upper = a <= eps, a >= C - eps
    free = ~lower & ~upper

    def worst(mask, v):
        return float(np.max(v[mask], initial=0.0))

    at_lower = worst(lower, np.maximum(0.0, 1.0 - margin))
    at_free = worst(free, np.abs(1.0 - margin))
    at_upper = worst(upper, np.maximum(0.0, margin - 1.0))

    grad = (y * (K @ (a * y))) - 1.0
    s = -y * grad
    up = ((y > 0) & (a < C)) | ((y < 0) & (a > 0))
    low = ((y > 0) & (a > 0)) | ((y < 0) & (a < C))
    gap = 0.0
    if up.any() and low.any():
        gap = max(0.0, float(s[up].max() - s[low].min()))
    return KKTReport(
        max_violation=max(at_lower, at_free, at_upper),
        at_lower=at_lower,
        free=at_free,
        at_upper=at_upper,
        equality_residual=abs(float(a @ y)),
        pair_gap=gap,
    )


def decision_function(model: SVMModel, X, kernel=None) -> np.ndarray:
    """Decision values sum_{i in S} alpha_i y_i K(x_i, x) + b for rows of X.

    ``kernel(A, B)`` returns the real cross matrix between row sets; the
    default evaluates the model's kernel spec.
    """
    if model.train_points is None:
        raise ValueError("model carries no training points; cannot predict")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.train_points.shape[1]:
        raise ValueError(
            f"dimension mismatch: model has {model.train_points.shape[1]} features, got {X.shape[1]}"
        )
    S = model.support_indices
    if kernel is None:
        kmat = cross_matrix(model.spec, model.train_points[S], X, real=True)
    else:
        kmat = np.asarray(kernel(model.train_points[S], X), dtype=float)
    coef = model.alpha[S] * model.train_labels[S]
    # elementwise sum (not BLAS matmul, which may fuse multiply-adds) keeps
    # exactly cancelling terms at exactly zero
    return (coef[:, None] * kmat).sum(axis=0) + model.bias


def labels_from(decision) -> np.ndarray:
    """sign(decision) with ties at 0 assigned +1."""
    return np.where(np.asarray(decision) >= 0, 1, -1)


def predict(model: SVMModel, x, kernel=None) -> tuple[int, float]:
    """Label and decision value for a single point."""
    d = float(decision_function(model, np.asarray(x, dtype=float).reshape(1, -1), kernel)[0])
    return (1 if d >= 0 else -1), d


def predict_many(model: SVMModel, X, kernel=None) -> tuple[np.ndarray, np.ndarray]:
    d = decision_function(model, X, kernel)
    return labels_from(d), d
