"""Pure-Python (numpy) implementations of the hot numerical kernels.

These mirror the compiled kernels in ``_speedups.pyx`` exactly; the backend
module picks whichever is available.  Keep the two implementations in lock
step: same update rules, same jitter ladder, same stopping order.
"""

import numpy as np

BACKEND_NAME = "python"

# Status codes shared with the compiled backend.
IRLS_OK = 0
IRLS_SINGULAR = 1


def logistic(t):
    """Stable logistic function, scalar or elementwise on arrays."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    if out.ndim == 0:
        return float(out)
    return out


def log1p_exp(t):
    """log(1 + exp(t)) without overflow, scalar or elementwise."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    big = t > 33.0
    out[big] = t[big] + np.log1p(np.exp(-t[big]))
    out[~big] = np.log1p(np.exp(t[~big]))
    if out.ndim == 0:
        return float(out)
    return out


def loglik(X, y, beta):
    """Bernoulli log-likelihood sum_i y_i log(pi_i) + (1-y_i) log(1-pi_i).

    Computed as y*theta - log(1+exp(theta)), which degrades gracefully to 0
    for saturated observations that agree with their outcome.
    """
    theta = X @ beta
    return float(np.sum(y * theta - log1p_exp(theta)))


def score(X, y, beta):
    """Gradient of ``loglik`` with respect to beta: X^T (y - pi)."""
    pi = logistic(X @ beta)
    return X.T @ (y - pi)


def fisher_info(X, y, beta):
    """Expected information X^T W X with W = diag(pi (1 - pi))."""
    pi = logistic(X @ beta)
    w = pi * (1.0 - pi)
    return (X * w[:, None]).T @ X


def _solve_spd(H, g, base_jitter):
    """Cholesky solve with an escalating jitter ladder; None if hopeless."""
    p = H.shape[0]
    scale = max(np.trace(H) / p, 1e-300)
    for jit in (base_jitter, 1e-12, 1e-9, 1e-6, 1e-3):
        if jit < base_jitter:
            continue
        try:
            L = np.linalg.cholesky(H + jit * scale * np.eye(p))
        except np.linalg.LinAlgError:
            continue
        z = np.linalg.solve(L, g)
        return np.linalg.solve(L.T, z)
    return None


def irls(X, y, beta0, max_iter, grad_tol, ridge_eps, div_threshold, prob_tol):
    """Iteratively reweighted least squares with step-halving.

    Returns (status, beta, loglik, converged, diverged, n_iter, grad_norm,
    ll_trace).  ``status`` is IRLS_SINGULAR when the weighted normal
    equations are structurally singular and no ridge fallback was enabled.
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    beta = np.array(beta0, dtype=float, copy=True)
    n, p = X.shape

    ll = loglik(X, y, beta)
    trace = [ll]
    converged = False
    diverged = False
    gnorm = float(np.linalg.norm(score(X, y, beta)))
    it = 0

    for it in range(1, max_iter + 1):
        pi = logistic(X @ beta)
        g = X.T @ (y - pi)
        w = pi * (1.0 - pi)
        H = (X * w[:, None]).T @ X
        if ridge_eps > 0.0:
            H = H + ridge_eps * np.eye(p)
            step = _solve_spd(H, g, 0.0)
        else:
            # Structural singularity (rank-deficient X) shows up on the very
            # first iteration where W is bounded away from zero.
            try:
                L = np.linalg.cholesky(H)
                step = np.linalg.solve(L.T, np.linalg.solve(L, g))
            except np.linalg.LinAlgError:
                if it == 1:
                    return (IRLS_SINGULAR, beta, ll, False, False, it, gnorm,
                            np.asarray(trace))
                step = _solve_spd(H, g, 1e-12)
        if step is None:
            return (IRLS_SINGULAR, beta, ll, False, False, it, gnorm,
                    np.asarray(trace))

        t = 1.0
        cand = beta + step
        ll_new = loglik(X, y, cand)
        halvings = 0
        while ll_new < ll and halvings < 40:
            t *= 0.5
            cand = beta + t * step
            ll_new = loglik(X, y, cand)
            halvings += 1
        beta = cand
        ll = ll_new
        trace.append(ll)

        pi = logistic(X @ beta)
        gnorm = float(np.linalg.norm(X.T @ (y - pi)))
        boundary = float(np.min(np.minimum(pi, 1.0 - pi)))
        if np.linalg.norm(beta) > div_threshold or boundary < prob_tol:
            diverged = True
            break
        if gnorm <= grad_tol:
            converged = True
            break

    return (IRLS_OK, beta, ll, converged, diverged, it, gnorm,
            np.asarray(trace))
