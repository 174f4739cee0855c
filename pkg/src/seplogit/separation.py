"""Separation detection and the limiting conditional model (LCM).

The maximum-likelihood estimate of a logistic model exists iff no direction
b satisfies (2y_i - 1) x_i'b >= 0 for all i with strict inequality somewhere.
Detection solves a small LP for such a certificate, grows its strict set to
the maximal one, and canonicalizes the direction by maximizing the smallest
strict margin subject to box bounds.  Inputs are pre-scaled to unit column
max-norm; directions are reported in original coordinates.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .lp import LpError, solve_lp
from .model import Dataset, FitConfig, FitResult, fit_irls

TOL_SEP = 1e-7


class DetectionError(RuntimeError):
    """The detection LP could not be solved; never silently reported as
    'no separation'."""


class SeparationKind(enum.Enum):
    NONE = "none"
    QUASI_COMPLETE = "quasi-complete"
    COMPLETE = "complete"


@dataclass(frozen=True)
class _Geometry:
    """Scaled-coordinate certificate data shared with inference/prediction."""

    col_scale: np.ndarray          # per-column max-norm used for scaling
    directions: tuple              # recession directions, scaled coords
    certificate: np.ndarray        # max-margin combined direction, scaled
    min_margin: float              # smallest strict margin of certificate
    lcm_basis: np.ndarray | None   # p x r orthonormal basis orthogonal to directions
    lcm_gamma: np.ndarray | None   # LCM coefficients in reduced coordinates


@dataclass(frozen=True)
class SeparationReport:
    kind: SeparationKind
    direction: np.ndarray | None
    problematic: tuple[int, ...]
    lcm: FitResult | None
    geometry: _Geometry | None = field(default=None, repr=False)

    @property
    def separated(self) -> bool:
        return self.kind is not SeparationKind.NONE


def _scale_columns(X):
    s = np.max(np.abs(X), axis=0)
    s[s == 0.0] = 1.0
    return X / s, s


def _lp_certificate(M, tol):
    """Maximal strict set of the cone {b : M b >= 0, -1 <= b <= 1}.

    Solves max sum(s) s.t. M_i b >= s_i, 0 <= s <= 1 and re-maximizes the
    undecided slacks until the strict set stops growing (a single optimum can
    under-report the set at degenerate vertices).
    """
    n, p = M.shape
    A_ub = np.hstack([-M, np.eye(n)])  # s_i - M_i b <= 0
    b_ub = np.zeros(n)
    bounds = [(-1.0, 1.0)] * p + [(0.0, 1.0)] * n
    strict: set[int] = set()
    for _ in range(n + 1):
        c = np.zeros(p + n)
        undecided = [i for i in range(n) if i not in strict]
        if not undecided and strict:
            break
        c[[p + i for i in undecided]] = 1.0
        try:
            sol = solve_lp(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds,
                           maximize=True)
        except LpError as exc:
            raise DetectionError(f"separation LP failed: {exc}") from exc
        s = sol.x[p:]
        new = {i for i in undecided if s[i] > tol}
        if not new:
            break
        strict |= new
    return strict


def _max_margin_direction(M, strict, tol):
    """Certificate maximizing the smallest strict margin: max t subject to
    M_i b >= t on the strict set, M_i b = 0 elsewhere, -1 <= b <= 1."""
    n, p = M.shape
    s_idx = sorted(strict)
    o_idx = [i for i in range(n) if i not in strict]
    A_ub = np.hstack([-M[s_idx], np.ones((len(s_idx), 1))])
    b_ub = np.zeros(len(s_idx))
    A_eq = b_eq = None
    if o_idx:
        A_eq = np.hstack([M[o_idx], np.zeros((len(o_idx), 1))])
        b_eq = np.zeros(len(o_idx))
    bounds = [(-1.0, 1.0)] * p + [(0.0, float(p + 1))]
    c = np.zeros(p + 1)
    c[p] = 1.0
    try:
        sol = solve_lp(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                       bounds=bounds, maximize=True)
    except LpError as exc:
        raise DetectionError(f"margin LP failed: {exc}") from exc
    t = sol.objective
    if t <= tol:
        raise DetectionError("certificate margin collapsed below tolerance")
    return sol.x[:p], float(t)


def _orthonormal_complement(directions, p):
    """Orthonormal basis of the subspace orthogonal to all directions."""
    D = np.column_stack(directions)
    q, _ = np.linalg.qr(D)
    proj = np.eye(p) - q @ q.T
    u, s, _ = np.linalg.svd(proj)
    r = int(np.sum(s > 1e-10))
    return u[:, :r]


def detect(d: Dataset, tol_sep: float = TOL_SEP,
           config: FitConfig | None = None) -> SeparationReport:
    """Classify the dataset as not separated, quasi-completely separated, or
    completely separated, with the maximal problematic set I and a
    max-margin recession certificate.  Fits the LCM when quasi."""
    Xs, col_scale = _scale_columns(d.X)
    n, p = Xs.shape
    sign = 2.0 * d.y - 1.0
    M = sign[:, None] * Xs

    strict = _lp_certificate(M, tol_sep)
    if not strict:
        return SeparationReport(kind=SeparationKind.NONE, direction=None,
                                problematic=(), lcm=None, geometry=None)

    I = set(strict)
    directions = [_max_margin_direction(M, I, tol_sep)[0]]
    # nested separation: project the certificate out and re-detect on the
    # remaining observations until their reduced model has a finite MLE
    while len(I) < n:
        comp = sorted(set(range(n)) - I)
        B = _orthonormal_complement(directions, p)
        if B.shape[1] == 0:
            break
        X_red = Xs[comp] @ B
        M_red = (2.0 * d.y[comp] - 1.0)[:, None] * X_red
        sub = _lp_certificate(M_red, tol_sep)
        if not sub:
            break
        b_red, _ = _max_margin_direction(M_red, sub, tol_sep)
        directions.append(B @ b_red)
        I |= {comp[j] for j in sub}

    kind = (SeparationKind.COMPLETE if len(I) == n
            else SeparationKind.QUASI_COMPLETE)
    certificate, t_star = _max_margin_direction(M, I, tol_sep)

    lcm = None
    lcm_basis = None
    lcm_gamma = None
    if kind is SeparationKind.QUASI_COMPLETE:
        lcm_basis = _orthonormal_complement(directions, p)
        lcm, lcm_gamma = _fit_lcm_reduced(d, Xs, sorted(I), lcm_basis,
                                          col_scale, config)

    geometry = _Geometry(col_scale=col_scale,
                         directions=tuple(directions),
                         certificate=certificate,
                         min_margin=t_star,
                         lcm_basis=lcm_basis,
                         lcm_gamma=lcm_gamma)
    direction = certificate / col_scale
    direction = direction / np.linalg.norm(direction)
    return SeparationReport(kind=kind, direction=direction,
                            problematic=tuple(sorted(I)), lcm=lcm,
                            geometry=geometry)


def _fit_lcm_reduced(d, Xs, I, B, col_scale, config):
    """Ordinary MLE on the complement of I in the coordinates orthogonal to
    every recession direction."""
    n, p = Xs.shape
    comp = [i for i in range(n) if i not in set(I)]
    config = config or FitConfig()
    if B.shape[1] == 0 or not comp:
        gamma = np.zeros(max(B.shape[1], 0))
        beta_scaled = B @ gamma if B.size else np.zeros(p)
        pihat = d.y.copy()
        return FitResult(beta=beta_scaled / col_scale, loglik=0.0,
                         pihat=pihat, converged=True, iterations=0,
                         gradient_norm=0.0), gamma

    X_red = Xs[comp] @ B
    # trim directions the complement rows cannot identify
    u, s, vt = np.linalg.svd(X_red, full_matrices=False)
    keep = s > 1e-10 * (s[0] if s.size else 1.0)
    V = vt[keep].T
    X_fit = X_red @ V
    sub = Dataset(X_fit, d.y[np.asarray(comp)],
                  tuple(f"c{j}" for j in range(X_fit.shape[1])))
    fit = fit_irls(sub, config)
    gamma = V @ fit.beta
    beta_scaled = B @ gamma

    pihat = np.empty(n)
    pihat[np.asarray(comp, dtype=int)] = fit.pihat
    I_arr = np.asarray(sorted(I), dtype=int)
    pihat[I_arr] = d.y[I_arr]
    full = FitResult(beta=beta_scaled / col_scale, loglik=fit.loglik,
                     pihat=pihat, converged=fit.converged,
                     iterations=fit.iterations,
                     gradient_norm=fit.gradient_norm,
                     diverged=fit.diverged)
    return full, gamma


def fit_lcm(d: Dataset, report: SeparationReport,
            config: FitConfig | None = None) -> FitResult:
    """Limiting conditional model for a quasi-completely separated dataset.

    The returned fit lives on the complement of ``report.problematic`` with
    coefficients restricted orthogonally to the recession directions; its
    ``pihat`` is extended to the problematic points by their forced values,
    and ``loglik`` is the supremum log-likelihood of the full data.
    """
    if report.kind is not SeparationKind.QUASI_COMPLETE:
        raise ValueError("fit_lcm requires a quasi-complete separation report")
    Xs, col_scale = _scale_columns(d.X)
    geo = report.geometry
    fit, _ = _fit_lcm_reduced(d, Xs, list(report.problematic), geo.lcm_basis,
                              col_scale, config)
    return fit


def completion_pihat(d: Dataset, report: SeparationReport,
                     config: FitConfig | None = None) -> np.ndarray:
    """Mean-value estimates under the MLE completion: forced outcomes on the
    problematic set, LCM fitted values elsewhere, plain MLE when not
    separated."""
    if report.kind is SeparationKind.NONE:
        return fit_irls(d, config).pihat
    if report.kind is SeparationKind.COMPLETE:
        return d.y.copy()
    return report.lcm.pihat.copy()


def sup_loglik(report: SeparationReport, fit: FitResult | None = None) -> float:
    """Supremum of the log-likelihood: 0 under complete separation, the LCM
    value under quasi-complete separation, the MLE value otherwise."""
    if report.kind is SeparationKind.COMPLETE:
        return 0.0
    if report.kind is SeparationKind.QUASI_COMPLETE:
        return report.lcm.loglik
    if fit is None:
        raise ValueError("need the MLE fit when the data are not separated")
    return fit.loglik


# ---------------------------------------------------------------------------
# brute-force oracle


def detect_bruteforce(d: Dataset, tol_sep: float = TOL_SEP) -> SeparationReport:
    """Exhaustive candidate-direction search; test oracle for ``detect``.

    Enumerates null spaces of all observation subsets of size < p, row
    normals, coordinate axes, and a dense angular grid, then unions the
    strict sets of every violation-free candidate.  Exact for p <= 3 because
    every extreme ray of the recession cone has p-1 active independent rows.
    """
    n, p = d.X.shape
    if p > 3 or n > 40:
        raise ValueError("brute-force oracle limited to p <= 3, n <= 40")
    Xs, col_scale = _scale_columns(d.X)
    sign = 2.0 * d.y - 1.0
    M = sign[:, None] * Xs

    cands = _candidate_directions(Xs, M, p)
    I: set[int] = set()
    best_dir = None
    best_count = -1
    for b in cands:
        norm = np.max(np.abs(b))
        if norm < 1e-12:
            continue
        b = b / norm
        margins = M @ b
        if margins.min() < -tol_sep:
            continue
        strict = set(np.where(margins > tol_sep)[0].tolist())
        if strict:
            I |= strict
            if len(strict) > best_count:
                best_count = len(strict)
                best_dir = b
    if not I:
        return SeparationReport(kind=SeparationKind.NONE, direction=None,
                                problematic=(), lcm=None)
    kind = (SeparationKind.COMPLETE if len(I) == n
            else SeparationKind.QUASI_COMPLETE)
    direction = best_dir / col_scale
    direction = direction / np.linalg.norm(direction)
    return SeparationReport(kind=kind, direction=direction,
                            problematic=tuple(sorted(I)), lcm=None)


def _candidate_directions(Xs, M, p):
    n = Xs.shape[0]
    cands = []
    for i in range(n):
        cands.append(M[i])
        cands.append(-M[i])
    for j in range(p):
        e = np.zeros(p)
        e[j] = 1.0
        cands.append(e.copy())
        cands.append(-e)

    if p == 1:
        return cands

    # null vectors of every subset of rows of size p-1 (and smaller, via rank)
    for size in range(1, p):
        for rows in itertools.combinations(range(n), size):
            A = Xs[list(rows)]
            _, s, vt = np.linalg.svd(A, full_matrices=True)
            rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 1.0)))
            null = vt[rank:]
            if null.shape[0] == 1:
                cands.append(null[0].copy())
                cands.append(-null[0])
            elif null.shape[0] == 2 and p == 3:
                # sample the circle inside a 2-D null space
                ang = np.linspace(0.0, np.pi, 180, endpoint=False)
                for a in ang:
                    v = np.cos(a) * null[0] + np.sin(a) * null[1]
                    cands.append(v.copy())
                    cands.append(-v)

    if p == 2:
        ang = np.linspace(0.0, 2.0 * np.pi, 1440, endpoint=False)
        for a in ang:
            cands.append(np.array([np.cos(a), np.sin(a)]))
    elif p == 3:
        k = np.arange(4000)
        phi = np.pi * (3.0 - np.sqrt(5.0)) * k
        z = 1.0 - 2.0 * (k + 0.5) / 4000.0
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
        cands.extend(pts)
    return cands
