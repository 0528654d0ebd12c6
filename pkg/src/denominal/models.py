"""Linear and logistic models over standardized word features.

Both models z-score every included feature column before fitting, so
weights are in "per standard deviation" units and comparable across
features whose raw scales differ by orders of magnitude.

* ``fit_linear`` solves the OLS normal equations with a Cholesky
  factorization (target: the noun-to-verb lag ``d``, converted nouns
  only).
* ``fit_logistic`` runs Newton/IRLS on the mean negative log-likelihood
  plus a tiny ridge on the weights (target: the ``change`` bit).
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .features import FEATURE_NAMES, FeatureVector

RANK_TOL = 1e-10
LOGISTIC_RIDGE = 1e-6
LOGISTIC_TOL = 1e-10
LOGISTIC_MAX_ITER = 100
MODEL_SCHEMA = "denominal.model"
MODEL_VERSION = 1


class ModelError(ValueError):
    pass


class DegenerateColumnError(ModelError):
    pass


class RankDeficientError(ModelError):
    pass


class SingleClassError(ModelError):
    pass


class InsufficientDataError(ModelError):
    pass


class MissingFeatureError(KeyError):
    pass


class Target(str, enum.Enum):
    D = "d"
    CHANGE = "change"


@dataclass(frozen=True)
class ModelSpec:
    target: Target
    included: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self):
        object.__setattr__(self, "target", Target(self.target))
        unknown = set(self.included) - set(FEATURE_NAMES)
        if unknown:
            raise ModelError(f"unknown features: {sorted(unknown)}")
        if not self.included:
            raise ModelError("a model needs at least one feature")
        # canonical column order
        object.__setattr__(self, "included", tuple(f for f in FEATURE_NAMES if f in self.included))

    @classmethod
    def excluding(cls, target, excluded: Iterable[str]) -> "ModelSpec":
        excluded = set(excluded)
        unknown = excluded - set(FEATURE_NAMES)
        if unknown:
            raise ModelError(f"unknown features: {sorted(unknown)}")
        return cls(Target(target), tuple(f for f in FEATURE_NAMES if f not in excluded))


@dataclass
class FitResult:
    spec: ModelSpec
    weights: dict[str, float]
    intercept: float
    standardization: dict[str, tuple[float, float]]
    diagnostics: dict = field(default_factory=dict)
    standard_errors: dict[str, float] = field(default_factory=dict)
    n_rows: int = 0

    def raw_coefficients(self) -> tuple[float, dict[str, float]]:
        """Intercept and slopes in the features' original units."""
        slopes = {f: w / self.standardization[f][1] for f, w in self.weights.items()}
        intercept = self.intercept - sum(slopes[f] * self.standardization[f][0] for f in slopes)
        return intercept, slopes

    def to_dict(self) -> dict:
        return {
            "schema": MODEL_SCHEMA,
            "version": MODEL_VERSION,
            "target": self.spec.target.value,
            "features": list(self.spec.included),
            "weights": dict(self.weights),
            "intercept": self.intercept,
            "standardization": {f: {"mean": m, "std": s} for f, (m, s) in self.standardization.items()},
            "standard_errors": dict(self.standard_errors),
            "diagnostics": dict(self.diagnostics),
            "n_rows": self.n_rows,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "FitResult":
        if doc.get("schema") != MODEL_SCHEMA:
            raise ModelError(f"not a model document (schema={doc.get('schema')!r})")
        if doc.get("version") != MODEL_VERSION:
            raise ModelError(f"unsupported model version {doc.get('version')!r}")
        spec = ModelSpec(Target(doc["target"]), tuple(doc["features"]))
        if list(spec.included) != list(doc["features"]):
            raise ModelError("feature list not in canonical order")
        weights = {f: float(doc["weights"][f]) for f in spec.included}
        stdz = {f: (float(doc["standardization"][f]["mean"]), float(doc["standardization"][f]["std"]))
                for f in spec.included}
        return cls(
            spec=spec,
            weights=weights,
            intercept=float(doc["intercept"]),
            standardization=stdz,
            diagnostics=dict(doc.get("diagnostics", {})),
            standard_errors={f: float(v) for f, v in doc.get("standard_errors", {}).items()},
            n_rows=int(doc.get("n_rows", 0)),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "FitResult":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def standardize(column: Sequence[float]) -> tuple[np.ndarray, float, float]:
    """Z-scores with the sample standard deviation (n - 1)."""
    x = np.asarray(column, dtype=float)
    if x.size < 2:
        raise DegenerateColumnError("standardizing needs at least 2 values")
    m = float(x.mean())
    s = float(np.sqrt(np.sum((x - m) ** 2) / (x.size - 1)))
    if not s > 0:
        raise DegenerateColumnError("cannot standardize a constant column")
    return (x - m) / s, m, s


def unstandardize(z: Sequence[float], mean: float, std: float) -> np.ndarray:
    return np.asarray(z, dtype=float) * std + mean


def _design(rows: Sequence[FeatureVector], spec: ModelSpec):
    cols = []
    stdz = {}
    for f in spec.included:
        try:
            z, m, s = standardize([r.feature(f) for r in rows])
        except DegenerateColumnError as exc:
            raise DegenerateColumnError(f"{f}: {exc}") from None
        cols.append(z)
        stdz[f] = (m, s)
    X = np.column_stack([np.ones(len(rows))] + cols)
    return X, stdz


def _check_rank(A: np.ndarray) -> None:
    eig = np.linalg.eigvalsh(A)
    if eig[-1] <= 0 or eig[0] <= RANK_TOL * eig[-1]:
        raise RankDeficientError(f"design matrix is singular (eigenvalue ratio {eig[0] / max(eig[-1], 1e-300):.3g})")


def _spd_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    L = np.linalg.cholesky(A)
    return np.linalg.solve(L.T, np.linalg.solve(L, b))


def fit_linear(rows: Sequence[FeatureVector], spec: ModelSpec | None = None) -> FitResult:
    """OLS fit of the lag ``d`` on the converted nouns in ``rows``."""
    spec = spec or ModelSpec(Target.D)
    if spec.target is not Target.D:
        raise ModelError("fit_linear needs a D target")
    rows = [r for r in rows if r.change == 1]
    k = len(spec.included)
    if len(rows) < k + 2:
        raise InsufficientDataError(f"linear fit on {k} features needs >= {k + 2} converted rows, got {len(rows)}")
    y = np.array([float(r.d) for r in rows])
    X, stdz = _design(rows, spec)
    A = X.T @ X
    _check_rank(A)
    beta = _spd_solve(A, X.T @ y)
    resid = y - X @ beta
    sse = float(resid @ resid)
    dof = len(rows) - k - 1
    sigma2 = sse / dof if dof > 0 else float("nan")
    cov_diag = np.diag(_spd_solve(A, np.eye(k + 1)))
    se = np.sqrt(sigma2 * cov_diag)
    return FitResult(
        spec=spec,
        weights={f: float(w) for f, w in zip(spec.included, beta[1:])},
        intercept=float(beta[0]),
        standardization=stdz,
        diagnostics={"iterations": 1, "converged": True, "final_objective": sse / len(rows)},
        standard_errors={f: float(s) for f, s in zip(spec.included, se[1:])},
        n_rows=len(rows),
    )


def _log_sigmoid(eta: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -eta)


def sigmoid(eta):
    return np.exp(_log_sigmoid(np.asarray(eta, dtype=float)))


def logistic_objective(beta: np.ndarray, X: np.ndarray, y: np.ndarray, ridge: float = LOGISTIC_RIDGE) -> float:
    """Mean negative log-likelihood plus ``ridge / 2`` times the squared weight norm."""
    eta = X @ beta
    nll = -np.mean(y * _log_sigmoid(eta) + (1.0 - y) * _log_sigmoid(-eta))
    return float(nll + 0.5 * ridge * np.sum(beta[1:] ** 2))


def logistic_gradient(beta: np.ndarray, X: np.ndarray, y: np.ndarray, ridge: float = LOGISTIC_RIDGE) -> np.ndarray:
    p = sigmoid(X @ beta)
    g = X.T @ (p - y) / len(y)
    g[1:] += ridge * beta[1:]
    return g


def _irls(X: np.ndarray, y: np.ndarray, ridge: float, tol: float, max_iter: int):
    n, p = X.shape
    penalty = np.full(p, ridge)
    penalty[0] = 0.0
    beta = np.zeros(p)
    obj = logistic_objective(beta, X, y, ridge)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        mu = sigmoid(X @ beta)
        w = mu * (1.0 - mu)
        H = (X.T * w) @ X / n + np.diag(penalty)
        g = logistic_gradient(beta, X, y, ridge)
        step = _spd_solve(H, g)
        # step halving keeps each update a descent step
        scale = 1.0
        while True:
            cand = beta - scale * step
            cand_obj = logistic_objective(cand, X, y, ridge)
            if cand_obj <= obj or scale < 1e-10:
                break
            scale *= 0.5
        beta, obj = cand, cand_obj
        if np.max(np.abs(scale * step)) < tol:
            converged = True
            break
    mu = sigmoid(X @ beta)
    H = (X.T * (mu * (1.0 - mu))) @ X + np.diag(penalty) * n
    return beta, obj, it, converged, H


def fit_logistic(rows: Sequence[FeatureVector], spec: ModelSpec | None = None, *,
                 ridge: float = LOGISTIC_RIDGE, tol: float = LOGISTIC_TOL,
                 max_iter: int = LOGISTIC_MAX_ITER) -> FitResult:
    """Penalized maximum likelihood fit of the ``change`` bit on all rows.

    Non-convergence is reported through ``diagnostics["converged"]``.
    """
    spec = spec or ModelSpec(Target.CHANGE)
    if spec.target is not Target.CHANGE:
        raise ModelError("fit_logistic needs a CHANGE target")
    rows = list(rows)
    if len(rows) < 10:
        raise InsufficientDataError(f"logistic fit needs >= 10 rows, got {len(rows)}")
    y = np.array([float(r.change) for r in rows])
    if y.min() == y.max():
        raise SingleClassError(f"all rows have change={int(y[0])}")
    X, stdz = _design(rows, spec)
    _check_rank(X.T @ X)
    beta, obj, iterations, converged, H = _irls(X, y, ridge, tol, max_iter)
    try:
        se = np.sqrt(np.diag(_spd_solve(H, np.eye(len(beta)))))
    except np.linalg.LinAlgError:
        se = np.full(len(beta), np.nan)
    return FitResult(
        spec=spec,
        weights={f: float(w) for f, w in zip(spec.included, beta[1:])},
        intercept=float(beta[0]),
        standardization=stdz,
        diagnostics={"iterations": iterations, "converged": bool(converged), "final_objective": obj,
                     "ridge": ridge, "tolerance": tol, "max_iterations": max_iter},
        standard_errors={f: float(s) for f, s in zip(spec.included, se[1:])},
        n_rows=len(rows),
    )


def fit(rows: Sequence[FeatureVector], spec: ModelSpec) -> FitResult:
    if spec.target is Target.D:
        return fit_linear(rows, spec)
    return fit_logistic(rows, spec)


def _feature_value(vector, name: str) -> float:
    if isinstance(vector, Mapping):
        if name not in vector:
            raise MissingFeatureError(name)
        return float(vector[name])
    try:
        return float(getattr(vector, name))
    except AttributeError:
        raise MissingFeatureError(name) from None


def linear_predictor(fit_result: FitResult, vector) -> float:
    eta = fit_result.intercept
    for f, w in fit_result.weights.items():
        m, s = fit_result.standardization[f]
        eta += w * (_feature_value(vector, f) - m) / s
    return eta


def predict(fit_result: FitResult, vector) -> float:
    """Predicted lag in years (D) or conversion probability (CHANGE).

    ``vector`` is a FeatureVector or any mapping from feature name to value.
    """
    eta = linear_predictor(fit_result, vector)
    if fit_result.spec.target is Target.D:
        return eta
    return float(math.exp(-np.logaddexp(0.0, -eta)))


D_ABLATION = (
    FEATURE_NAMES,
    ("accum_freq", "recent_freq", "sense_count"),
    ("recent_freq", "sense_count"),
    ("recent_freq",),
    ("sense_count",),
)
CHANGE_ABLATION = (
    FEATURE_NAMES,
    ("length", "accum_freq", "recent_freq"),
    ("length", "accum_freq"),
    ("length", "recent_freq"),
    ("length",),
)


def ablation_masks(target) -> tuple[tuple[str, ...], ...]:
    return D_ABLATION if Target(target) is Target.D else CHANGE_ABLATION


def ablation_run(rows: Sequence[FeatureVector], target, masks=None) -> list[FitResult]:
    """Fit every mask of the ablation sequence, in declaration order."""
    target = Target(target)
    masks = ablation_masks(target) if masks is None else masks
    return [fit(rows, ModelSpec(target, tuple(m))) for m in masks]
