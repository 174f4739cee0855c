"""Dense two-phase primal simplex with variable bounds.

Sized for the small LPs this package solves (separation certificates over at
most a few hundred observations).  Basic values are recomputed from a fresh
factorization every iteration, trading speed for robustness; at these sizes
that is cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TOL = 1e-9


class LpError(Exception):
    pass


class LpInfeasible(LpError):
    pass


class LpUnbounded(LpError):
    pass


@dataclass
class LpSolution:
    x: np.ndarray
    objective: float
    iterations: int


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None,
             maximize=False):
    """Solve min (or max) c.x subject to A_ub x <= b_ub, A_eq x = b_eq and
    elementwise bounds.  ``bounds`` is a sequence of (lo, hi) pairs where hi
    may be ``None`` for +inf; every variable needs a finite lower bound.
    """
    c = np.asarray(c, dtype=float)
    nvar = c.size
    if maximize:
        c = -c

    rows = []
    rhs = []
    if A_ub is not None and len(A_ub):
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
        rows.append(A_ub)
        rhs.append(np.asarray(b_ub, dtype=float))
    n_ub = rows[0].shape[0] if rows else 0
    if A_eq is not None and len(A_eq):
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        rows.append(A_eq)
        rhs.append(np.asarray(b_eq, dtype=float))
    if not rows:
        raise LpError("no constraints given")
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    m = A.shape[0]

    lo = np.empty(nvar + n_ub)
    hi = np.empty(nvar + n_ub)
    if bounds is None:
        bounds = [(0.0, None)] * nvar
    for j, (l, h) in enumerate(bounds):
        if l is None or not np.isfinite(l):
            raise LpError("every variable needs a finite lower bound")
        lo[j] = l
        hi[j] = np.inf if h is None else h
    lo[nvar:] = 0.0
    hi[nvar:] = np.inf

    # slack columns for the <= rows
    full = np.zeros((m, nvar + n_ub))
    full[:, :nvar] = A
    for i in range(n_ub):
        full[i, nvar + i] = 1.0
    cost = np.concatenate([c, np.zeros(n_ub)])

    x, iters = _two_phase(full, b, cost, lo, hi)
    obj = float(cost @ x)
    if maximize:
        obj = -obj
    return LpSolution(x=x[:nvar], objective=obj, iterations=iters)


def _two_phase(A, b, cost, lo, hi):
    m, n = A.shape

    # start all structural variables at a finite bound
    status = np.zeros(n, dtype=np.int8)  # 0 at lower, 1 at upper
    x_nb = lo.copy()

    resid = b - A @ x_nb
    sign = np.where(resid >= 0.0, 1.0, -1.0)
    A1 = np.hstack([A, np.diag(sign)])
    lo1 = np.concatenate([lo, np.zeros(m)])
    hi1 = np.concatenate([hi, np.full(m, np.inf)])
    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    basis = list(range(n, n + m))
    status1 = np.concatenate([status, np.zeros(m, dtype=np.int8)])

    basis, status1, it1 = _simplex(A1, b, cost1, lo1, hi1, basis, status1)
    xfull = _values(A1, b, lo1, hi1, basis, status1)
    if cost1 @ xfull > 1e-7 * max(1.0, np.abs(b).max()):
        raise LpInfeasible("phase 1 failed to reach feasibility")

    # pin leftover artificials to zero so phase 2 cannot move them
    lo1[n:] = 0.0
    hi1[n:] = 0.0
    cost2 = np.concatenate([cost, np.zeros(m)])
    basis, status1, it2 = _simplex(A1, b, cost2, lo1, hi1, basis, status1)
    xfull = _values(A1, b, lo1, hi1, basis, status1)
    return xfull[:n], it1 + it2


def _values(A, b, lo, hi, basis, status):
    n = A.shape[1]
    x = np.where(status == 1, np.where(np.isfinite(hi), hi, lo), lo)
    x[basis] = 0.0
    r = b - A @ x
    xb = np.linalg.solve(A[:, basis], r)
    x[basis] = xb
    return x


def _simplex(A, b, cost, lo, hi, basis, status):
    m, n = A.shape
    basis = list(basis)
    max_iter = 500 + 80 * (m + n)
    stall = 0
    last_obj = np.inf

    for it in range(max_iter):
        B = A[:, basis]
        x = np.where(status == 1, np.where(np.isfinite(hi), hi, lo), lo)
        x[basis] = 0.0
        r = b - A @ x
        try:
            xb = np.linalg.solve(B, r)
        except np.linalg.LinAlgError:
            raise LpError("singular basis")
        x[basis] = xb

        obj = float(cost @ x)
        if obj < last_obj - _TOL:
            stall = 0
        else:
            stall += 1
        last_obj = obj
        bland = stall > m + 20

        y = np.linalg.solve(B.T, cost[basis])
        in_basis = np.zeros(n, dtype=bool)
        in_basis[basis] = True
        cand = ~in_basis & (lo != hi)
        d = cost[cand] - A[:, cand].T @ y
        idx = np.where(cand)[0]
        st = status[idx]
        eligible = ((st == 0) & (d < -_TOL)) | ((st == 1) & (d > _TOL))
        if not np.any(eligible):
            return basis, status, it
        elig_idx = idx[eligible]
        elig_d = d[eligible]
        if bland:
            e = int(elig_idx[0])
            de = float(elig_d[0])
        else:
            k = int(np.argmax(np.abs(elig_d)))
            e = int(elig_idx[k])
            de = float(elig_d[k])

        w = np.linalg.solve(B, A[:, e])
        # entering from lower bound increases x_e (dir +1); from upper, decreases
        direction = 1.0 if status[e] == 0 else -1.0
        delta = -direction * w  # change of basic values per unit t

        t_best = hi[e] - lo[e]  # bound-to-bound flip
        leave = -1
        leave_to = 0
        for i in range(m):
            di = delta[i]
            if di > _TOL:
                room = hi[basis[i]] - xb[i]
                if not np.isfinite(room):
                    continue
                ratio = max(room, 0.0) / di
                target_to = 1
            elif di < -_TOL:
                ratio = max(xb[i] - lo[basis[i]], 0.0) / (-di)
                target_to = 0
            else:
                continue
            if ratio < t_best - _TOL:
                t_best = ratio
                leave = i
                leave_to = target_to
            elif ratio <= t_best + _TOL and leave != -1 and basis[i] < basis[leave]:
                # lowest-index tie-break keeps pivoting deterministic
                t_best = min(t_best, ratio)
                leave = i
                leave_to = target_to

        if not np.isfinite(t_best):
            raise LpUnbounded("objective unbounded below")

        if leave == -1:
            status[e] = 1 - status[e]  # pure bound flip
        else:
            lv = basis[leave]
            status[lv] = leave_to
            basis[leave] = e
            # entering variable becomes basic; mark status slot unused
            status[e] = 0

    raise LpError("simplex iteration limit exceeded")
