"""Maximum-likelihood discrimination between instantaneous and delayed targets.

Each ambiguity pair ``(I^S, I^T)`` is a circular complex Gaussian vector
with Hermitian covariance ``[[A, H], [conj H, B]]``. Its density equals the
real four-variate Gaussian built from :func:`~sardelay.moments.cov4`, but
the 2x2 complex form is cheaper:

    log p = -2 log(pi) - log(AB - |H|^2)
            - (B |S|^2 + A |T|^2 - 2 Re(conj(S) H T)) / (AB - |H|^2)

Pairs that share a sampling coordinate (all homogeneous pairs do) enter
only through the sums of ``|S|^2``, ``|T|^2`` and ``conj(S) T``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidArgumentError, NumericError
from .moments import UNIT_STEP, Model, component_table

__all__ = [
    "FitResult",
    "Decision",
    "log_likelihood",
    "fit_model",
    "discriminate",
    "FLOOR_RATIO",
    "LOG_RATIO_BOUND",
]

#: minimum intensity relative to the mean pair power
FLOOR_RATIO = 1e-12
#: log-ratio search box; keeps every intensity within 1e12 of the background
LOG_RATIO_BOUND = math.log(1e12)
_FATOL = 1e-8
_XATOL = 1e-4
_MAXFEV = 2000
_AGREE = 1e-6
_COND_MAX = 1e14
_LOG_PI = math.log(math.pi)


@dataclass(frozen=True)
class FitResult:
    """Maximized likelihood of one model.

    Attributes
    ----------
    model : Model
    intensities : tuple of float
        ``(P_b, P_n, P_x)``, all non-negative.
    log_likelihood : float
    converged : bool
        True when the best two starts agree within 1e-6.
    evaluations : int
        Objective evaluations summed over all starts.
    """

    model: Model
    intensities: tuple
    log_likelihood: float
    converged: bool
    evaluations: int

    def to_dict(self):
        return {
            "model": self.model.value,
            "intensities": list(self.intensities),
            "log_likelihood": self.log_likelihood,
            "converged": self.converged,
            "evaluations": self.evaluations,
        }


@dataclass(frozen=True)
class Decision:
    """Classification of one dataset; ties go to ``instantaneous``."""

    label: str
    fit_s: FitResult
    fit_t: FitResult
    margin: float

    @property
    def converged(self):
        return self.fit_s.converged and self.fit_t.converged

    def to_dict(self):
        return {
            "label": self.label,
            "margin": self.margin,
            "fit_s": self.fit_s.to_dict(),
            "fit_t": self.fit_t.to_dict(),
        }


class _Problem:
    # grouped sufficient statistics plus unit-intensity operator tables
    def __init__(self, model, dataset, kappa, profile):
        self.model = Model.parse(model)
        zetas = np.asarray(dataset.zetas, dtype=float)
        n_streak = int(dataset.n_streak)
        gs, gt, hh = component_table(self.model, zetas, n_streak, kappa, profile)
        s = dataset.s_samples
        t = dataset.t_samples
        keys = [(float(z), j < n_streak) for j, z in enumerate(zetas)]
        groups = {}
        for j, key in enumerate(keys):
            groups.setdefault(key, []).append(j)
        first = np.array([idx[0] for idx in groups.values()])
        self.count = np.array([len(idx) for idx in groups.values()], dtype=float)
        self.ss = np.array([np.sum(np.abs(s[idx]) ** 2) for idx in groups.values()])
        self.tt = np.array([np.sum(np.abs(t[idx]) ** 2) for idx in groups.values()])
        self.st = np.array([np.sum(np.conj(s[idx]) * t[idx]) for idx in groups.values()])
        self.gs = gs[:, first]
        self.gt = gt[:, first]
        self.hh = hh[:, first]
        self.n_pairs = len(zetas)
        self.power = float(np.sum(self.ss + self.tt)) / (2.0 * self.n_pairs)

    def moments(self, weights):
        w = np.asarray(weights, dtype=float)
        return w @ self.gs, w @ self.gt, w @ self.hh

    def terms(self, weights):
        """Per-group (sum of log det, sum of quadratic forms)."""
        a, b, hx = self.moments(weights)
        det = a * b - np.abs(hx) ** 2
        quad = (b * self.ss + a * self.tt - 2.0 * np.real(self.st * hx)) / det
        return det, quad

    def value(self, weights):
        det, quad = self.terms(weights)
        if np.any(det <= 0) or not np.all(np.isfinite(det)):
            return -math.inf
        return float(-2.0 * _LOG_PI * self.n_pairs - np.sum(self.count * np.log(det)) - np.sum(quad))

    def profiled(self, log_ratios):
        """Likelihood maximized over the overall scale for fixed ratios.

        Returns ``(value, weights)``. With weights ``s (1, r_n, r_x)`` the
        quadratic term scales as ``1/s`` and the determinant as ``s^2``, so
        the optimal scale is the mean quadratic form per complex dimension.
        """
        x0 = min(max(float(log_ratios[0]), -LOG_RATIO_BOUND), LOG_RATIO_BOUND)
        x1 = min(max(float(log_ratios[1]), -LOG_RATIO_BOUND), LOG_RATIO_BOUND)
        base = np.array([1.0, math.exp(x0), math.exp(x1)])
        det, quad = self.terms(base)
        if det.min() <= 0:
            return -math.inf, base
        q = float(quad.sum())
        if q <= 0:
            return -math.inf, base
        scale = q / (2.0 * self.n_pairs)
        val = (-2.0 * self.n_pairs * (_LOG_PI + math.log(scale) + 1.0)
               - float(self.count @ np.log(det)))
        return val, scale * base


def _dataset_problem(model, dataset, kappa, profile):
    if len(dataset) == 0:
        raise InvalidArgumentError("empty dataset")
    return _Problem(model, dataset, kappa, profile)


def log_likelihood(model, dataset, intensities, kappa, profile=UNIT_STEP):
    """Gaussian log-likelihood of ``dataset`` under ``model``.

    Parameters
    ----------
    model : Model or str
    dataset : Dataset
    intensities : sequence of float
        ``(P_b, P_n, P_x)``.
    kappa : float

    Raises
    ------
    InvalidArgumentError
        Negative or non-finite intensities.
    NumericError
        A pair covariance is singular (condition number above 1e14); raise
        the noise intensity to a small floor to avoid this.
    """
    w = np.asarray(intensities, dtype=float)
    if w.shape != (3,) or np.any(~np.isfinite(w)) or np.any(w < 0):
        raise InvalidArgumentError("intensities must be three finite non-negative numbers")
    prob = _dataset_problem(model, dataset, kappa, profile)
    a, b, hx = prob.moments(w)
    # eigenvalues of the Hermitian 2x2 covariance bound the condition number
    half_tr = 0.5 * (a + b)
    disc = np.sqrt(0.25 * (a - b) ** 2 + np.abs(hx) ** 2)
    lo, hi = half_tr - disc, half_tr + disc
    if np.any(lo <= 0) or np.any(hi > _COND_MAX * lo):
        worst = int(np.argmin(lo / np.where(hi > 0, hi, 1.0)))
        raise NumericError("pair covariance is singular; enforce a positive noise floor",
                           group=worst, min_eig=float(lo[worst]), max_eig=float(hi[worst]))
    return prob.value(w)


def _starts(prob):
    # method of moments: the excess S power on streak pairs over the
    # homogeneous level estimates the target, the rest splits b/n evenly
    streak = prob.gs[2] > 0
    hom_level = None
    if np.any(~streak):
        hom = ~streak
        hom_level = float(np.sum(prob.ss[hom] + prob.tt[hom]) / (2.0 * np.sum(prob.count[hom])))
    if np.any(streak):
        st_level = float(np.sum(prob.ss[streak] + prob.tt[streak]) / (2.0 * np.sum(prob.count[streak])))
    else:
        st_level = prob.power
    base = hom_level if hom_level is not None else st_level
    excess = max(st_level - base, 1e-3 * max(base, 1e-300))
    mom = (math.log(0.5), math.log(max(excess / max(0.5 * base, 1e-300), 1e-12)))
    return [
        np.array(mom),
        np.array([0.0, 0.0]),
        np.array([-LOG_RATIO_BOUND / 2, -LOG_RATIO_BOUND / 2]),
        np.array([0.0, math.log(10.0)]),
    ]


def fit_model(model, dataset, kappa, profile=UNIT_STEP):
    """Maximize the likelihood of ``model`` over non-negative intensities.

    The overall scale is maximized in closed form; the noise and target
    ratios to the background are searched with Nelder-Mead in log space
    from four fixed starting points. Never raises on non-convergence;
    ``converged`` is false instead.
    """
    model = Model.parse(model)
    prob = _dataset_problem(model, dataset, kappa, profile)
    if not prob.power > 0:
        raise InvalidArgumentError("dataset is identically zero")

    def objective(x):
        val, _ = prob.profiled(x)
        return -val if math.isfinite(val) else 1e300

    results = []
    evaluations = 0
    for x0 in _starts(prob):
        try:
            res = minimize(objective, x0, method="Nelder-Mead",
                           options={"fatol": _FATOL, "xatol": _XATOL, "maxfev": _MAXFEV,
                                    "initial_simplex": x0 + np.array([[0, 0], [1.0, 0], [0, 1.0]])})
        except (ArithmeticError, ValueError):
            continue
        evaluations += int(res.nfev)
        x = np.clip(res.x, -LOG_RATIO_BOUND, LOG_RATIO_BOUND)
        val, weights = prob.profiled(x)
        if math.isfinite(val):
            results.append((val, tuple(float(v) for v in weights)))

    if not results:
        return FitResult(model, (0.0, 0.0, 0.0), -math.inf, False, evaluations)
    results.sort(key=lambda r: -r[0])
    best_val, best_w = results[0]
    converged = len(results) >= 2 and abs(results[0][0] - results[1][0]) <= _AGREE
    floor = FLOOR_RATIO * prob.power
    best_w = tuple(max(w, 0.0) if i != 1 else max(w, floor) for i, w in enumerate(best_w))
    return FitResult(model, best_w, best_val, converged, evaluations)


def discriminate(dataset, kappa, profile=UNIT_STEP):
    """Fit both models and label the dataset ``delayed`` iff the t-model wins."""
    fit_s = fit_model(Model.S, dataset, kappa, profile)
    fit_t = fit_model(Model.T, dataset, kappa, profile)
    margin = fit_t.log_likelihood - fit_s.log_likelihood
    if math.isnan(margin):
        margin = 0.0
    label = "delayed" if margin > 0 else "instantaneous"
    return Decision(label, fit_s, fit_t, float(margin))
