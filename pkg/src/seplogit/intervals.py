"""Confidence intervals for mean-value parameters.

Problematic observations get one-sided likelihood intervals: one endpoint is
the observed outcome, the other comes from extremizing theta_k = x_k'beta
subject to the problematic-set log-likelihood staying above log(alpha).
Non-problematic observations get two-sided Wald intervals; Wilson score
intervals serve the baselines and prediction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from . import backend
from .model import Dataset, DimensionError, FitResult
from .separation import SeparationKind, SeparationReport, _scale_columns

CTOL = 1e-6


class IntervalSide(enum.Enum):
    LOWER_ONE_SIDED = "lower-one-sided"
    UPPER_ONE_SIDED = "upper-one-sided"
    TWO_SIDED = "two-sided"


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class IntervalRecord:
    index: int
    y: int
    estimate: float
    lower: float
    upper: float
    side: IntervalSide
    alpha: float
    source: str

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper <= 1.0):
            raise ValueError("interval bounds must satisfy 0<=lo<=hi<=1")
        if not (self.lower <= self.estimate <= self.upper):
            raise ValueError("point estimate must lie inside the interval")

    @property
    def length(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class IntervalSet:
    records: tuple[IntervalRecord, ...]
    alpha: float

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def by_index(self):
        return {r.index: r for r in self.records}

    @property
    def mean_length(self) -> float:
        return float(np.mean([r.length for r in self.records]))


def _z_crit(alpha: float) -> float:
    return NormalDist().inv_cdf(1.0 - alpha / 2.0)


def wilson_interval(pi_hat: float, n_eff: float, alpha: float = 0.05):
    """Wilson score interval for a proportion with effective count n_eff."""
    if not 0.0 <= pi_hat <= 1.0:
        raise ValueError("pi_hat must lie in [0, 1]")
    if n_eff <= 0:
        raise ValueError("n_eff must be positive")
    z = _z_crit(alpha)
    denom = 1.0 + z * z / n_eff
    center = (pi_hat + z * z / (2.0 * n_eff)) / denom
    half = (z / denom) * np.sqrt(pi_hat * (1.0 - pi_hat) / n_eff
                                 + z * z / (4.0 * n_eff * n_eff))
    return max(0.0, center - half), min(1.0, center + half)


def wald_ci(fit: FitResult, d: Dataset, alpha: float = 0.05) -> IntervalSet:
    """Two-sided delta-method intervals logistic(theta_hat -+ z se)."""
    if not fit.converged:
        raise ValueError("wald_ci requires a converged fit")
    pi = fit.pihat
    w = pi * (1.0 - pi)
    F = (d.X * w[:, None]).T @ d.X
    sign, logdet = np.linalg.slogdet(F)
    if sign <= 0 or logdet < -200 * d.p:
        raise np.linalg.LinAlgError(_null_direction_message(F))
    try:
        cov = np.linalg.inv(F)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError(_null_direction_message(F))
    z = _z_crit(alpha)
    theta = d.X @ fit.beta
    se = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", d.X, cov, d.X), 0.0))
    recs = []
    for i in range(d.n):
        lo = float(backend.logistic(theta[i] - z * se[i]))
        hi = float(backend.logistic(theta[i] + z * se[i]))
        recs.append(IntervalRecord(index=i, y=int(d.y[i]),
                                   estimate=float(pi[i]), lower=lo, upper=hi,
                                   side=IntervalSide.TWO_SIDED, alpha=alpha,
                                   source="wald"))
    return IntervalSet(records=tuple(recs), alpha=alpha)


def _null_direction_message(F):
    _, _, vt = np.linalg.svd(F)
    return (f"singular Fisher information; null direction "
            f"{np.round(vt[-1], 6).tolist()}")


# ---------------------------------------------------------------------------
# one-sided likelihood intervals


def one_sided_ci(d: Dataset, report: SeparationReport,
                 alpha: float = 0.05) -> IntervalSet:
    """One-sided intervals for every problematic observation.

    For y_k = 1 the interval is [logistic(theta_k*), 1] with theta_k*
    minimized; for y_k = 0 it is [0, logistic(theta_k*)] with theta_k*
    maximized, both subject to the problematic-set log-likelihood staying at
    or above log(alpha).  Under quasi-complete separation the optimization
    moves only along the recession directions, holding the LCM coordinates
    fixed.
    """
    if report.kind is SeparationKind.NONE:
        raise ValueError("one_sided_ci requires a separated dataset")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    geo = report.geometry
    Xs, _ = _scale_columns(d.X)
    I = np.asarray(report.problematic, dtype=int)
    XI = Xs[I]
    yI = d.y[I]
    log_alpha = float(np.log(alpha))

    if report.kind is SeparationKind.QUASI_COMPLETE:
        D = np.column_stack(geo.directions)
        free, _ = np.linalg.qr(D)
        offset = geo.lcm_basis @ geo.lcm_gamma
    else:
        free = np.eye(d.p)
        offset = np.zeros(d.p)

    Xf = XI @ free
    theta0 = XI @ offset

    recs = []
    errors = []
    for k_pos, k in enumerate(I):
        sign = 1.0 if d.y[k] == 1 else -1.0
        c = sign * (Xs[k] @ free)
        try:
            gamma = _constrained_extremum(Xf, yI, theta0, c, log_alpha)
        except SolverError as exc:
            errors.append((int(k), str(exc)))
            continue
        theta_k = float(Xs[k] @ offset + (Xs[k] @ free) @ gamma)
        pk = float(backend.logistic(theta_k))
        if d.y[k] == 1:
            rec = IntervalRecord(index=int(k), y=1, estimate=1.0, lower=pk,
                                 upper=1.0, side=IntervalSide.UPPER_ONE_SIDED,
                                 alpha=alpha, source="one-sided-lr")
        else:
            rec = IntervalRecord(index=int(k), y=0, estimate=0.0, lower=0.0,
                                 upper=pk, side=IntervalSide.LOWER_ONE_SIDED,
                                 alpha=alpha, source="one-sided-lr")
        recs.append(rec)
    if errors:
        raise SolverError(f"one-sided interval solves failed: {errors}; "
                          f"{len(recs)} of {len(I)} points completed")
    return IntervalSet(records=tuple(recs), alpha=alpha)


def _ll(theta0, Xf, yI, gamma):
    theta = theta0 + Xf @ gamma
    return float(np.sum(yI * theta - backend.log1p_exp(theta)))


def _inner_newton(Xf, yI, theta0, c, lam, gamma0, max_iter=200):
    """Minimize c.g - lam * ll(g); convex and smooth, damped Newton."""
    gamma = gamma0.copy()
    r = gamma.size
    f = c @ gamma - lam * _ll(theta0, Xf, yI, gamma)
    for _ in range(max_iter):
        theta = theta0 + Xf @ gamma
        pi = backend.logistic(theta)
        grad = c - lam * (Xf.T @ (yI - pi))
        gn = float(np.linalg.norm(grad))
        if gn <= 1e-11 * max(1.0, lam):
            break
        w = pi * (1.0 - pi)
        H = lam * (Xf * w[:, None]).T @ Xf
        step = None
        scale = max(np.trace(H) / max(r, 1), 1e-300)
        for jit in (1e-13, 1e-9, 1e-5):
            try:
                L = np.linalg.cholesky(H + jit * scale * np.eye(r))
                step = np.linalg.solve(L.T, np.linalg.solve(L, -grad))
                break
            except np.linalg.LinAlgError:
                continue
        if step is None:
            break
        t = 1.0
        improved = False
        for _ in range(60):
            cand = gamma + t * step
            fc = c @ cand - lam * _ll(theta0, Xf, yI, cand)
            if fc < f:
                improved = True
                break
            t *= 0.5
        if not improved:
            break
        gamma = gamma + t * step
        f = fc
        if np.linalg.norm(gamma) > 1e9:
            break
    return gamma


def _constrained_extremum(Xf, yI, theta0, c, log_alpha):
    """Solve min c.g subject to ll(g) >= log_alpha by bisecting the
    likelihood multiplier; the inner penalized problem is convex, and the
    attained log-likelihood is monotone in the multiplier."""
    r = Xf.shape[1]
    gamma = np.zeros(r)

    lam = 1.0
    gamma = _inner_newton(Xf, yI, theta0, c, lam, gamma)
    h = _ll(theta0, Xf, yI, gamma) - log_alpha
    hi = lo = lam
    tries = 0
    while h < 0 and tries < 40:
        lam *= 8.0
        gamma = _inner_newton(Xf, yI, theta0, c, lam, gamma)
        h = _ll(theta0, Xf, yI, gamma) - log_alpha
        tries += 1
    if h < 0:
        raise SolverError("could not bracket the likelihood constraint")
    hi = lam
    g_hi = gamma.copy()
    tries = 0
    while h >= 0 and tries < 60:
        hi = lam
        g_hi = gamma.copy()
        if abs(h) <= 0.49 * CTOL:
            return gamma
        lam /= 8.0
        gamma = _inner_newton(Xf, yI, theta0, c, lam, gamma)
        h = _ll(theta0, Xf, yI, gamma) - log_alpha
        tries += 1
        if np.linalg.norm(gamma) > 1e8:
            break
    lo = lam

    gamma = g_hi
    for _ in range(200):
        mid = np.sqrt(lo * hi)
        g_mid = _inner_newton(Xf, yI, theta0, c, mid, gamma)
        h_mid = _ll(theta0, Xf, yI, g_mid) - log_alpha
        if h_mid >= 0:
            hi = mid
            gamma = g_mid
            if h_mid <= 0.49 * CTOL:
                return gamma
        else:
            lo = mid
        if hi / lo < 1.0 + 1e-15:
            break
    h_final = _ll(theta0, Xf, yI, gamma) - log_alpha
    if not (0.0 <= h_final <= CTOL):
        raise SolverError(f"constraint activity {h_final:.3e} outside "
                          f"tolerance {CTOL:.1e}")
    return gamma
