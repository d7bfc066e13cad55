"""Second moments of the ambiguity-pair samples.

For a scatterer kind ``alpha`` the three operators

    G^S[F](zeta) = <|I^S|^2> / (sigma^2 K),
    G^T[F](zeta) = <|I^T|^2> / (sigma^2 K),
    H[F](zeta)   = <I^S conj(I^T)> / (sigma^2 K)

are evaluated at ``eta_d = xi_d = 0``. Intensities are carried as the
products ``P = sigma^2 K`` throughout; the ``K`` constants are kept only for
reporting in physical units.

The streak (s-scatterer) operators are integrals over the support of the
reflectivity profile. They are computed lobe by lobe between the zeros of
``sinc^2`` with Gauss-Legendre rules, refined until two node counts agree,
and closed with an asymptotic tail in which ``sin^2`` is replaced by its
mean. Results are memoized since the Monte-Carlo harness asks for the
same handful of ``(zeta, kappa)`` values many times.
"""

import enum
import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgumentError, NumericError
from .kernel import k0theta
from .specfun import f_breve_t, phi_marginal_v2, sinc, sinc2_antiderivative

__all__ = [
    "ScattererKind",
    "Model",
    "MomentTriple",
    "UnitStep",
    "Indicator",
    "CustomProfile",
    "UNIT_STEP",
    "g_s",
    "g_t",
    "h",
    "k_const",
    "pair_moments",
    "cov4",
    "component_table",
    "model_components",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-6
#: distance beyond zeta at which the lobe-by-lobe sum hands over to the tail
TAIL_START = 1000.0
_GL_START = 16
_GL_MAX = 256
_TAIL_NODES = 96


class ScattererKind(enum.Enum):
    BACKGROUND = "b"
    DELAYED = "t"
    STREAK = "s"
    NOISE = "n"


class Model(enum.Enum):
    """Scene hypothesis: instantaneous streak (s) or delayed target (t)."""

    S = "s-model"
    T = "t-model"

    @property
    def target_kind(self):
        return ScattererKind.STREAK if self is Model.S else ScattererKind.DELAYED

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for member in cls:
            if key in (member.value, member.name.lower(), member.value[0]):
                return member
        raise InvalidArgumentError(f"unknown model {value!r}")


def _parse_kind(kind):
    if isinstance(kind, ScattererKind):
        return kind
    try:
        return ScattererKind(kind)
    except ValueError:
        try:
            return ScattererKind[str(kind).upper()]
        except KeyError:
            raise InvalidArgumentError(f"unknown scatterer kind {kind!r}") from None


@dataclass(frozen=True)
class MomentTriple:
    """A = <|I^S|^2>, B = <|I^T|^2>, C + iD = <I^S conj(I^T)>."""

    A: float
    B: float
    C: float
    D: float

    @property
    def h(self):
        return complex(self.C, self.D)

    def schwarz_gap(self):
        return self.A * self.B - self.C ** 2 - self.D ** 2

    def __add__(self, other):
        return MomentTriple(self.A + other.A, self.B + other.B,
                            self.C + other.C, self.D + other.D)

    def scaled(self, factor):
        return MomentTriple(factor * self.A, factor * self.B, factor * self.C, factor * self.D)


# --- reflectivity profiles -------------------------------------------------

@dataclass(frozen=True)
class UnitStep:
    """F(zeta) = (1 + sign zeta)/2, the profile used for all simulations."""

    name: str = "unit-step"
    support_end = math.inf

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        return 0.5 * (1.0 + np.sign(zeta))

    def breve(self, zeta):
        return f_breve_t(zeta)


@dataclass(frozen=True)
class Indicator:
    """F(zeta) = 1 on [0, zeta_max], 0 elsewhere."""

    zeta_max: float

    def __post_init__(self):
        if not self.zeta_max > 0:
            raise InvalidArgumentError("indicator length must be positive")

    @property
    def support_end(self):
        return self.zeta_max

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        return ((zeta >= 0) & (zeta <= self.zeta_max)).astype(float)

    def breve(self, zeta):
        return sinc2_antiderivative(zeta) - sinc2_antiderivative(np.asarray(zeta) - self.zeta_max)


@dataclass(frozen=True)
class CustomProfile:
    """User-supplied causal profile.

    ``func`` must be vectorized, vanish for negative arguments, and be
    non-negative. Beyond ``support_end`` it is taken to be zero; with an
    infinite support the value at large arguments enters the asymptotic
    tail.
    """

    func: Callable
    name: str = "custom"
    support_end: float = math.inf

    def __call__(self, zeta):
        return np.asarray(self.func(np.asarray(zeta, dtype=float)), dtype=float)

    def breve(self, zeta):
        return _profile_convolution(float(zeta), self, DEFAULT_TOL)


UNIT_STEP = UnitStep()


# --- quadrature --------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _lobe_edges(zeta, upper):
    # zeros of sin(zeta - xi) inside (0, upper), plus the end points
    k_lo = math.floor(-zeta / math.pi) + 1
    k_hi = math.ceil((upper - zeta) / math.pi) - 1
    zeros = zeta + math.pi * np.arange(k_lo, k_hi + 1)
    zeros = zeros[(zeros > 0) & (zeros < upper)]
    return np.concatenate(([0.0], zeros, [upper]))


def _nodes(edges, n):
    x, w = _gl(n)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def _streak_integrands(xi, zeta, kap, profile):
    base = sinc(zeta - xi) ** 2 * profile(xi)
    if kap == 0.0:
        return base, base, base.astype(complex)
    phi_s = phi_marginal_v2(kap * (zeta - xi))
    phi_t = phi_marginal_v2(-kap * xi)
    return (np.abs(phi_s) ** 2 * base, np.abs(phi_t) ** 2 * base, phi_s * np.conj(phi_t) * base)


def _tail_integrands(xi, zeta, kap, profile):
    # sin^2 replaced by its mean 1/2 beyond the lobe-resolved region
    base = 0.5 / (xi - zeta) ** 2 * profile(xi)
    if kap == 0.0:
        return base, base, base.astype(complex)
    phi_s = phi_marginal_v2(kap * (zeta - xi))
    phi_t = phi_marginal_v2(-kap * xi)
    return (np.abs(phi_s) ** 2 * base, np.abs(phi_t) ** 2 * base, phi_s * np.conj(phi_t) * base)


def _integrate(edges, func, tol):
    n = _GL_START
    pts, wts = _nodes(edges, n)
    prev = [np.dot(wts, f) for f in func(pts)]
    while True:
        n *= 2
        pts, wts = _nodes(edges, n)
        cur = [np.dot(wts, f) for f in func(pts)]
        err = max(abs(c - p) for c, p in zip(cur, prev))
        if err <= 0.1 * tol:
            return cur
        if n >= _GL_MAX:
            raise NumericError("streak quadrature did not converge", nodes_per_lobe=n,
                               estimate=err, tolerance=tol, lobes=len(edges) - 1)
        prev = cur


def _streak_raw(zeta, kap, profile, tol):
    # (1/pi) * three integrals over xi in [0, support), sharing one node set
    end = profile.support_end
    # tail hand-over at a sinc zero so the neglected oscillatory boundary term vanishes
    handover = zeta + math.pi * math.ceil(max(TAIL_START, 1.0 / math.sqrt(tol)) / math.pi)
    upper = min(end, handover)
    if upper <= 0:
        return 0.0, 0.0, 0.0j
    edges = _lobe_edges(zeta, upper)
    parts = _integrate(edges, lambda xi: _streak_integrands(xi, zeta, kap, profile), tol)
    if end > handover:
        # u = (handover - zeta)/(xi - zeta) maps [handover, inf) onto (0, 1]
        length = handover - zeta
        x, w = _gl(_TAIL_NODES)
        u = 0.5 * (x + 1.0)
        xi = zeta + length / u
        jac = length / u ** 2 * 0.5 * w
        tail = [np.dot(jac, f) for f in _tail_integrands(xi, zeta, kap, profile)]
        parts = [p + t for p, t in zip(parts, tail)]
    gs, gt, hh = (p / math.pi for p in parts)
    return float(gs), float(gt), complex(hh)


def _profile_convolution(zeta, profile, tol):
    gs, _, _ = _streak_raw(zeta, 0.0, profile, tol)
    return gs * math.pi


@functools.lru_cache(maxsize=65536)
def _streak_cached(zeta, kap, profile, tol):
    if kap == 0.0:
        # |phi(0, 0)| = 1 collapses all three operators onto the profile convolution
        val = float(profile.breve(zeta)) / math.pi
        return val, val, complex(val)
    return _streak_raw(zeta, kap, profile, tol)


def _check(zeta, kap):
    if not math.isfinite(zeta):
        raise InvalidArgumentError("zeta must be finite")
    if not (math.isfinite(kap) and kap >= 0):
        raise InvalidArgumentError("kappa must be finite and non-negative")


@functools.lru_cache(maxsize=65536)
def _operators(kind, zeta, kap, profile, tol):
    if kind in (ScattererKind.BACKGROUND, ScattererKind.NOISE):
        hval = complex(phi_marginal_v2(kap * zeta)) if kind is ScattererKind.BACKGROUND else 0j
        return 1.0, 1.0, hval
    if kind is ScattererKind.DELAYED:
        fb = float(profile.breve(zeta)) / math.pi
        ph = complex(phi_marginal_v2(kap * zeta))
        return abs(ph) ** 2 * fb, fb, ph * fb
    return _streak_cached(zeta, kap, profile, tol)


def _ops(kind, zeta, kap, profile, tol):
    zeta, kap = float(zeta), float(kap)
    _check(zeta, kap)
    return _operators(_parse_kind(kind), zeta, kap, profile, float(tol))


def g_s(kind, zeta, kappa, profile=UNIT_STEP, tol=DEFAULT_TOL):
    """Normalized S-point intensity operator G^S for one scatterer kind."""
    return _ops(kind, zeta, kappa, profile, tol)[0]


def g_t(kind, zeta, kappa, profile=UNIT_STEP, tol=DEFAULT_TOL):
    """Normalized T-point intensity operator G^T for one scatterer kind."""
    return _ops(kind, zeta, kappa, profile, tol)[1]


def h(kind, zeta, kappa, profile=UNIT_STEP, tol=DEFAULT_TOL):
    """Normalized S/T cross-correlation operator H for one scatterer kind."""
    return _ops(kind, zeta, kappa, profile, tol)[2]


def k_const(kind, cfg):
    """Physical scale constant K for a scatterer kind (noise: 1)."""
    kind = _parse_kind(kind)
    k0 = k0theta(cfg)
    n2t2 = (cfg.N * cfg.tau) ** 2
    if kind is ScattererKind.NOISE:
        return 1.0
    if kind is ScattererKind.DELAYED:
        return n2t2 * 2.0 / cfg.bandwidth * math.pi
    ratio = cfg.omega0 / (cfg.bandwidth * k0)
    if kind is ScattererKind.STREAK:
        return n2t2 * ratio * math.pi
    if cfg.phiT == 0:
        return math.inf
    return n2t2 * ratio / (k0 * cfg.phiT) * math.pi ** 2


def _check_intensities(intensities):
    vals = tuple(float(v) for v in intensities)
    if len(vals) != 3:
        raise InvalidArgumentError("intensities must be (P_b, P_n, P_x)")
    if any(not math.isfinite(v) or v < 0 for v in vals):
        raise InvalidArgumentError("intensities must be finite and non-negative")
    return vals


def model_components(model):
    """Scatterer kinds of the streak summation set, in (b, n, x) order."""
    model = Model.parse(model)
    return (ScattererKind.BACKGROUND, ScattererKind.NOISE, model.target_kind)


def pair_moments(model, zeta, kappa, intensities, streak=True, profile=UNIT_STEP,
                 tol=DEFAULT_TOL):
    """Moment triple of one ambiguity pair under ``model``.

    ``intensities`` is ``(P_b, P_n, P_x)``; the target term ``P_x`` enters
    only when ``streak`` is true. Homogeneous pairs are evaluated at their
    own ``zeta`` (``zeta_max`` by construction).
    """
    p_b, p_n, p_x = _check_intensities(intensities)
    kinds = model_components(model)
    weights = (p_b, p_n, p_x if streak else 0.0)
    total = MomentTriple(0.0, 0.0, 0.0, 0.0)
    for kind, weight in zip(kinds, weights):
        if weight == 0.0:
            continue
        gs_, gt_, hh = _ops(kind, zeta, kappa, profile, tol)
        total = total + MomentTriple(weight * gs_, weight * gt_, weight * hh.real, weight * hh.imag)
    return total


def cov4(m, tol=1e-9):
    """Real 4x4 covariance of (Re I^S, Im I^S, Re I^T, Im I^T).

    Raises :class:`InvalidArgumentError` when the triple violates
    ``A B >= C^2 + D^2`` by more than ``tol`` (relative to ``A B``).
    """
    if m.A < 0 or m.B < 0:
        raise InvalidArgumentError("A and B must be non-negative")
    scale = max(m.A * m.B, 1.0) if m.A * m.B > 0 else 1.0
    if m.schwarz_gap() < -tol * scale:
        raise InvalidArgumentError("moment triple violates A*B >= C^2 + D^2")
    a, b, c, d = m.A, m.B, m.C, m.D
    return 0.5 * np.array([
        [a, 0.0, c, -d],
        [0.0, a, d, c],
        [c, d, b, 0.0],
        [-d, c, 0.0, b],
    ])


def component_table(model, zetas, n_streak, kappa, profile=UNIT_STEP, tol=DEFAULT_TOL):
    """Unit-intensity operators for every pair and component.

    Returns ``(gs, gt, hh)`` of shapes ``(3, n_pairs)``, the rows being the
    background, noise and target components. Target rows vanish for the
    homogeneous pairs (index ``>= n_streak``).
    """
    return _component_table(Model.parse(model), tuple(float(z) for z in zetas), int(n_streak),
                            float(kappa), profile, float(tol))


@functools.lru_cache(maxsize=256)
def _component_table(model, zetas, n_streak, kap, profile, tol):
    kinds = model_components(model)
    n = len(zetas)
    gs = np.zeros((3, n))
    gt = np.zeros((3, n))
    hh = np.zeros((3, n), dtype=complex)
    for j, zeta in enumerate(zetas):
        for row, kind in enumerate(kinds):
            if row == 2 and j >= n_streak:
                continue
            gs[row, j], gt[row, j], hh[row, j] = _ops(kind, zeta, kap, profile, tol)
    for arr in (gs, gt, hh):
        arr.setflags(write=False)
    return gs, gt, hh
