"""Model-averaged prediction under separation.

For a new point the training data are augmented once with pseudo-outcome 0
and once with 1; each augmented model is fit with the separation-aware
machinery, the two fits are weighted by AICc, and the averaged probability
is labeled against the accuracy-optimal cutoff.  Without separation the
procedure falls back to the plain MLE probability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .intervals import wilson_interval
from .model import Dataset, FitConfig, FitResult, fit_irls
from .separation import (SeparationKind, SeparationReport, _scale_columns,
                         completion_pihat, detect)

# Still-separated augmented fits are evaluated at this multiple of the
# max-margin recession certificate (unit box norm, scaled coordinates): far
# enough that strict points sit within ~1e-8 of their forced values, close
# enough that the margin asymmetry survives in double precision.
RECESSION_SCALE = 500.0


@dataclass(frozen=True)
class ModelScore:
    loglik_sup: float
    k: int
    n_aug: int
    aicc: float


@dataclass(frozen=True)
class PredictionResult:
    x_new: np.ndarray
    pi0: float
    pi1: float
    w0: float
    w1: float
    pi_star: float
    interval: tuple[float, float]
    label: int
    cutoff: float
    fallback: bool = False

    def __post_init__(self):
        if not np.isclose(self.w0 + self.w1, 1.0, atol=1e-9):
            raise ValueError("model weights must sum to 1")


def aicc(loglik_sup: float, k: int, n_aug: int) -> ModelScore:
    """Small-sample corrected AIC; +inf sentinel when the correction's
    denominator is not positive (the model then gets weight 0)."""
    if k <= 0:
        raise ValueError("k must be positive")
    if n_aug <= k + 1:
        value = np.inf
    else:
        value = -2.0 * loglik_sup + 2.0 * k + 2.0 * k * (k + 1) / (n_aug - k - 1)
    return ModelScore(loglik_sup=loglik_sup, k=k, n_aug=n_aug, aicc=value)


def akaike_weights(ic0: float, ic1: float) -> tuple[float, float]:
    """w_j proportional to exp(-IC_j / 2), guarded against overflow by
    shifting both criteria by their minimum."""
    ics = np.array([ic0, ic1], dtype=float)
    if np.all(np.isinf(ics)):
        return 0.5, 0.5
    shift = np.min(ics)
    e = np.exp(-(ics - shift) / 2.0)
    w = e / e.sum()
    return float(w[0]), float(w[1])


def optimal_cutoff(pi_hats, y) -> float:
    """Accuracy-maximizing threshold for labels (pi >= C).

    Candidates are the midpoints of consecutive distinct probabilities plus
    the {0, 1} sentinels; ties go to the candidate nearest 0.5, then to the
    smaller one.
    """
    pi_hats = np.asarray(pi_hats, dtype=float)
    y = np.asarray(y, dtype=float)
    if pi_hats.shape != y.shape:
        raise ValueError("pi_hats and y must have equal length")
    if y.min() == y.max():
        raise ValueError("optimal cutoff undefined for single-class y")
    vals = np.unique(pi_hats)
    cands = [0.0, 1.0]
    cands.extend(0.5 * (vals[:-1] + vals[1:]))
    best_key = None
    best_c = None
    for c in cands:
        acc = float(np.mean((pi_hats >= c) == (y == 1.0)))
        key = (-acc, abs(c - 0.5), c)
        if best_key is None or key < best_key:
            best_key = key
            best_c = c
    return float(best_c)


def predict_plain(fit: FitResult, x_new) -> float:
    """MLE probability at a new design row; only valid without separation."""
    if fit.diverged or not fit.converged:
        raise ValueError("fit diverged; use predict_point for separated data")
    x_new = np.asarray(x_new, dtype=float)
    return float(backend.logistic(float(x_new @ fit.beta)))


def _augmented_fit_prob(d_aug: Dataset, x_new, config) -> tuple[float, float, bool]:
    """Probability at x_new and sup log-likelihood for one augmented model.

    A still-separated augmented model is evaluated at a large finite point
    along its max-margin recession certificate: strict observations land on
    their forced values while the prediction keeps the margin information
    that breaks ties between the two augmentations.
    """
    rep = detect(d_aug, config=config)
    if rep.kind is SeparationKind.NONE:
        fit = fit_irls(d_aug, config)
        return predict_plain(fit, x_new), fit.loglik, False
    geo = rep.geometry
    xs_new = np.asarray(x_new, dtype=float) / geo.col_scale
    if rep.kind is SeparationKind.QUASI_COMPLETE:
        offset = geo.lcm_basis @ geo.lcm_gamma
        sup_ll = rep.lcm.loglik
    else:
        offset = np.zeros(d_aug.p)
        sup_ll = 0.0
    theta = float(xs_new @ offset
                  + RECESSION_SCALE * float(xs_new @ geo.certificate))
    theta = float(np.clip(theta, -700.0, 700.0))
    return float(backend.logistic(theta)), sup_ll, True


def predict_point(d: Dataset, x_new, config: FitConfig | None = None,
                  alpha: float = 0.05,
                  report: SeparationReport | None = None) -> PredictionResult:
    """Model-averaged probability at ``x_new`` with Wilson interval and an
    optimal-cutoff label.

    Training data without separation short-circuit to the plain MLE
    probability (``fallback=True``).
    """
    x_new = np.asarray(x_new, dtype=float)
    if x_new.shape != (d.p,):
        raise ValueError(f"x_new has shape {x_new.shape}, expected ({d.p},)")
    if not np.all(np.isfinite(x_new)):
        raise ValueError("x_new must be finite")
    config = config or FitConfig()
    if report is None:
        report = detect(d, config=config)

    if report.kind is SeparationKind.NONE:
        fit = fit_irls(d, config)
        pi = predict_plain(fit, x_new)
        cutoff = optimal_cutoff(fit.pihat, d.y)
        lo, hi = wilson_interval(pi, d.n + 1, alpha)
        return PredictionResult(x_new=x_new, pi0=pi, pi1=pi, w0=0.5, w1=0.5,
                                pi_star=pi, interval=(lo, hi),
                                label=int(pi >= cutoff), cutoff=cutoff,
                                fallback=True)

    probs = []
    sups = []
    failures = []
    for pseudo in (0.0, 1.0):
        d_aug = d.append(x_new, pseudo)
        try:
            pi_j, sup_j, _ = _augmented_fit_prob(d_aug, x_new, config)
            probs.append(pi_j)
            sups.append(sup_j)
        except Exception as exc:  # noqa: BLE001 - diagnostics re-raised below
            failures.append((int(pseudo), repr(exc)))
    if failures:
        raise RuntimeError(f"augmented fits failed: {failures}")

    ic0 = aicc(sups[0], d.p, d.n + 1)
    ic1 = aicc(sups[1], d.p, d.n + 1)
    w0, w1 = akaike_weights(ic0.aicc, ic1.aicc)
    pi_star = w0 * probs[0] + w1 * probs[1]

    cutoff = optimal_cutoff(completion_pihat(d, report, config), d.y)
    lo, hi = wilson_interval(pi_star, d.n + 1, alpha)
    return PredictionResult(x_new=x_new, pi0=probs[0], pi1=probs[1],
                            w0=w0, w1=w1, pi_star=float(pi_star),
                            interval=(lo, hi),
                            label=int(pi_star >= cutoff), cutoff=cutoff,
                            fallback=False)
