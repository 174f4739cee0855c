"""Logistic model primitives: data container, likelihood, score, information,
and an IRLS fitter that flags non-convergence caused by separation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend


class DimensionError(ValueError):
    """Design matrix, response, or coefficient dimensions disagree."""


class SingularSystemError(np.linalg.LinAlgError):
    """Weighted normal equations are rank deficient and no ridge fallback
    was enabled.  ``columns`` names the dependent design columns."""

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(f"singular weighted normal equations; dependent "
                         f"columns: {self.columns}")


@dataclass(frozen=True)
class Dataset:
    """Binary-response design: X is n x p, y in {0,1}^n, names labels columns.

    When built with ``intercept=True`` the first column is all ones and is
    part of X like any other column; nothing downstream treats it implicitly.
    """

    X: np.ndarray
    y: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=float)
        y = np.ascontiguousarray(self.y, dtype=float)
        if X.ndim != 2:
            raise DimensionError("X must be a 2-D matrix")
        n, p = X.shape
        if n < 1 or p < 1:
            raise DimensionError("X needs at least one row and one column")
        if y.shape != (n,):
            raise DimensionError(f"y has shape {y.shape}, expected ({n},)")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite entries")
        if not np.all((y == 0.0) | (y == 1.0)):
            raise ValueError("y entries must be exactly 0 or 1")
        if len(self.names) != p:
            raise DimensionError(f"{len(self.names)} names for {p} columns")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "names", tuple(str(s) for s in self.names))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @classmethod
    def build(cls, predictors, y, names=None, intercept=True) -> "Dataset":
        """Assemble a Dataset from raw predictor columns.

        ``predictors`` is n x k (or length-n for a single predictor); an
        all-ones column is prepended when ``intercept`` is requested.
        """
        Z = np.atleast_2d(np.asarray(predictors, dtype=float))
        if Z.shape[0] == 1 and np.asarray(y).size != 1:
            Z = Z.T
        if names is None:
            names = [f"x{j + 1}" for j in range(Z.shape[1])]
        names = list(names)
        if intercept:
            Z = np.column_stack([np.ones(Z.shape[0]), Z])
            names = ["(intercept)"] + names
        return cls(Z, np.asarray(y, dtype=float), tuple(names))

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.X[rows], self.y[rows], self.names)

    def append(self, x_row, y_val) -> "Dataset":
        x_row = np.asarray(x_row, dtype=float).reshape(1, -1)
        if x_row.shape[1] != self.p:
            raise DimensionError("new row length does not match p")
        return Dataset(np.vstack([self.X, x_row]),
                       np.concatenate([self.y, [float(y_val)]]),
                       self.names)


@dataclass(frozen=True)
class FitConfig:
    max_iter: int = 100
    grad_tol: float = 1e-8
    ridge_eps: float = 0.0
    divergence_threshold: float = 1e4
    boundary_prob_tol: float = 1e-8


@dataclass(frozen=True)
class FitResult:
    """Outcome of a logistic fit.

    ``beta`` is always finite; a diverging sequence is reported through
    ``converged=False`` plus ``diverged=True`` with the last iterate, never
    through infinite coefficients.
    """

    beta: np.ndarray
    loglik: float
    pihat: np.ndarray
    converged: bool
    iterations: int
    gradient_norm: float
    diverged: bool = False
    ll_trace: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not np.all(np.isfinite(self.beta)):
            raise ValueError("FitResult.beta must be finite")


def logistic(t):
    """exp(t)/(1+exp(t)) evaluated in a branch that never overflows."""
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)):
        raise ValueError("logistic requires finite input")
    return backend.logistic(t)


def loglik(d: Dataset, beta) -> float:
    beta = _check_beta(d, beta)
    return backend.loglik(d.X, d.y, beta)


def score(d: Dataset, beta) -> np.ndarray:
    beta = _check_beta(d, beta)
    return backend.score(d.X, d.y, beta)


def fisher_info(d: Dataset, beta) -> np.ndarray:
    beta = _check_beta(d, beta)
    return backend.fisher_info(d.X, d.y, beta)


def _check_beta(d: Dataset, beta) -> np.ndarray:
    beta = np.ascontiguousarray(beta, dtype=float)
    if beta.shape != (d.p,):
        raise DimensionError(f"beta has shape {beta.shape}, expected ({d.p},)")
    return beta


def _dependent_columns(X) -> list[int]:
    """Indices of columns in the null-space support of X (for error text)."""
    _, s, vt = np.linalg.svd(X, full_matrices=True)
    tol = max(X.shape) * np.finfo(float).eps * (s[0] if s.size else 1.0)
    null = vt[np.sum(s > tol):]
    if null.size == 0:
        return []
    mask = np.any(np.abs(null) > 1e-8, axis=0)
    return [int(j) for j in np.where(mask)[0]]


def fit_irls(d: Dataset, config: FitConfig | None = None,
             beta0=None) -> FitResult:
    """Maximum-likelihood logistic fit via IRLS with step-halving.

    On separated data the likelihood has no finite maximizer; the fit then
    stops with ``converged=False`` and ``diverged=True`` once the coefficient
    norm passes ``divergence_threshold`` or some fitted probability comes
    within ``boundary_prob_tol`` of 0 or 1.
    """
    config = config or FitConfig()
    if beta0 is None:
        beta0 = np.zeros(d.p)
    status, beta, ll, converged, diverged, iters, gnorm, trace = backend.irls(
        d.X, d.y, np.asarray(beta0, dtype=float), config.max_iter,
        config.grad_tol, config.ridge_eps, config.divergence_threshold,
        config.boundary_prob_tol)
    if status == backend.IRLS_SINGULAR:
        raise SingularSystemError(_dependent_columns(d.X))
    pihat = np.asarray(backend.logistic(d.X @ beta), dtype=float)
    return FitResult(beta=beta, loglik=ll, pihat=pihat, converged=converged,
                     iterations=iters, gradient_norm=gnorm, diverged=diverged,
                     ll_trace=trace)
