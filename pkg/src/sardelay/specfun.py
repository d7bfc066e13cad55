"""Special functions behind the imaging kernel and the moment operators.

The central object is the two-argument oscillatory integral

    phi(v1, v2) = int_{-1/2}^{1/2} exp(2i v1 s) exp(i v2 s^2) ds

evaluated by completing the square and reducing it to Fresnel integrals.
Fresnel integrals are computed here from a power series (small argument)
and a Lentz continued fraction (large argument). The continued fraction
yields the auxiliary function ``a(x)`` with

    C(x) + i S(x) = (1 + i)/2 - a(x) exp(i pi x^2 / 2),

so the rapidly rotating factor never has to be formed at large arguments.

All functions accept scalars or numpy arrays and broadcast.
"""

import functools
import math

import numpy as np
from scipy import optimize, special

from .errors import InvalidArgumentError, NumericError

__all__ = [
    "sinc",
    "fresnel",
    "fresnel_aux",
    "phi",
    "phi_marginal_v2",
    "find_b_phi",
    "sine_integral",
    "sinc2_antiderivative",
    "f_breve_t",
    "V2_SWITCH",
    "FRESNEL_CROSSOVER",
]

#: below this |v2| phi uses a Taylor expansion around the sinc marginal
V2_SWITCH = 1e-3
#: Fresnel argument where the power series hands over to the continued fraction
FRESNEL_CROSSOVER = 1.5
#: below this |v2| the marginal phi(0, v2) is summed as a power series
MARGINAL_SERIES_MAX = 1.0

_HALF_1PI = 0.5 + 0.5j
_EPS = 1e-16
_TINY = 1e-300
_CF_MAXIT = 200


def _as_finite_array(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must be finite")
    return arr


def _scalar_or_array(result, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        return result[()] if isinstance(result, np.ndarray) else result
    return result


def sinc(x):
    """Unnormalized sinc, sin(x)/x with sinc(0) = 1."""
    x = np.asarray(x, dtype=float)
    # np.sinc is the normalized variant and handles x = 0 exactly
    return _scalar_or_array(np.sinc(x / np.pi), x)


def _fresnel_series(x):
    # E(x) = sum_n (i pi/2)^n x^(2n+1) / (n! (2n+1)), accurate for x < ~1.5
    z = 0.5j * np.pi * x * x
    term = x.astype(complex)
    total = term.copy()
    for n in range(1, 60):
        term = term * z / n
        contrib = term / (2 * n + 1)
        total += contrib
        if np.all(np.abs(contrib) <= _EPS * np.abs(total)):
            break
    return total


def _fresnel_cf(x):
    # modified Lentz evaluation of the continued fraction for the auxiliary
    # function; converges for all x > 0, fast once x >~ 1
    pix2 = np.pi * x * x
    b = 1.0 - 1j * pix2
    cc = np.full(x.shape, 1.0 / _TINY, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    n = -1
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(_CF_MAXIT):
        n += 2
        a = -n * (n + 1.0)
        b = b + 4.0
        d = 1.0 / (a * d + b)
        cc = b + a / cc
        delta = cc * d
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < _EPS
        if done.all():
            break
    else:
        raise NumericError("Fresnel continued fraction did not converge",
                           max_iterations=_CF_MAXIT, worst_x=float(x[~done].min()))
    return _HALF_1PI * h * (x - 1j * x)


def fresnel_aux(x):
    """Auxiliary Fresnel function a(x) for x >= 0.

    Defined by C(x) + i S(x) = (1+i)/2 - a(x) exp(i pi x^2/2). For large x,
    a(x) ~ i/(pi x).
    """
    x = np.abs(_as_finite_array(x, "x"))
    out = np.empty(x.shape, dtype=complex)
    small = x < FRESNEL_CROSSOVER
    if small.any():
        xs = x[small]
        out[small] = (_HALF_1PI - _fresnel_series(xs)) * np.exp(-0.5j * np.pi * xs * xs)
    if (~small).any():
        out[~small] = _fresnel_cf(x[~small])
    return _scalar_or_array(out, x)


def _fresnel_e(x):
    # C(x) + i S(x) for array x, odd in x
    ax = np.abs(x)
    out = np.empty(x.shape, dtype=complex)
    small = ax < FRESNEL_CROSSOVER
    if small.any():
        out[small] = _fresnel_series(ax[small])
    if (~small).any():
        xl = ax[~small]
        out[~small] = _HALF_1PI - _fresnel_cf(xl) * np.exp(0.5j * np.pi * xl * xl)
    return np.sign(x) * out


def fresnel(x):
    """Fresnel integrals (C(x), S(x)) with the pi/2 normalization."""
    x = _as_finite_array(x, "x")
    e = _fresnel_e(np.atleast_1d(x)).reshape(x.shape)
    return _scalar_or_array(e.real, x), _scalar_or_array(e.imag, x)


def _even_moments_series(x, nmax):
    # c_n(x) = int_{-1/2}^{1/2} s^(2n) cos(x s) ds by the cosine power series
    out = np.zeros((nmax + 1,) + x.shape)
    x2 = x * x
    for n in range(nmax + 1):
        coef = np.ones_like(x)  # (-1)^k x^(2k) / (2k)!
        total = np.zeros_like(x)
        for k in range(0, 80):
            p = 2 * n + 2 * k + 1
            contrib = coef * 2.0 * 0.5 ** p / p
            total += contrib
            if np.all(np.abs(contrib) <= 1e-18 * np.maximum(np.abs(total), 1e-300)):
                break
            coef = -coef * x2 / ((2 * k + 1) * (2 * k + 2))
        out[n] = total
    return out


def _even_moments_recursion(x, nmax):
    # integration by parts, stable for |x| well above nmax
    a = 0.5
    sa, ca = np.sin(a * x), np.cos(a * x)
    out = np.zeros((nmax + 1,) + x.shape)
    c = 2.0 * sa / x
    out[0] = c
    for n in range(1, nmax + 1):
        odd = 2 * n - 1
        s_odd = -2.0 * a ** odd * ca / x + odd / x * c
        even = 2 * n
        c = 2.0 * a ** even * sa / x - even / x * s_odd
        out[n] = c
    return out


def _phi_taylor(v1, v2, nterms=4):
    # phi = sum_n (i v2)^n / n! * int s^(2n) exp(2 i v1 s) ds; odd part vanishes
    x = 2.0 * v1
    nmax = nterms - 1
    moments = np.empty((nmax + 1,) + x.shape)
    small = np.abs(x) < 8.0
    if small.any():
        moments[:, small] = _even_moments_series(x[small], nmax)
    if (~small).any():
        moments[:, ~small] = _even_moments_recursion(x[~small], nmax)
    total = np.zeros(x.shape, dtype=complex)
    fac = np.ones(x.shape, dtype=complex)
    for n in range(nterms):
        total += fac * moments[n]
        fac = fac * 1j * v2 / (n + 1)
    return total


def _phi_fresnel(v1, v2):
    # v2 > 0 only; completes the square v2 s^2 + 2 v1 s = v2 (s + v1/v2)^2 - v1^2/v2
    k = np.sqrt(2.0 * v2 / np.pi)
    shift = v1 / v2
    u1 = k * (shift - 0.5)
    u2 = k * (shift + 0.5)
    a1 = fresnel_aux(np.abs(u1))
    a2 = fresnel_aux(np.abs(u2))
    sg1, sg2 = np.sign(u1), np.sign(u2)
    # exp(-i v1^2/v2) * exp(i pi u^2/2) at s = +-1/2 equals exp(i (v2/4 +- v1))
    edge = sg1 * a1 * np.exp(1j * (0.25 * v2 - v1)) - sg2 * a2 * np.exp(1j * (0.25 * v2 + v1))
    inside = sg2 != sg1
    centre = np.zeros(v1.shape, dtype=complex)
    if inside.any():
        # stationary point in the interval: |v1| <= v2/2 keeps this phase small
        ph = v1[inside] ** 2 / v2[inside]
        centre[inside] = _HALF_1PI * (sg2[inside] - sg1[inside]) * np.exp(-1j * ph)
    return (centre + edge) / k


def phi(v1, v2):
    """The oscillatory integral over [-1/2, 1/2] of exp(2i v1 s + i v2 s^2).

    Parameters
    ----------
    v1, v2 : float or array_like
        Finite real arguments; broadcast against each other.

    Returns
    -------
    complex or ndarray of complex

    Notes
    -----
    For ``|v2| >= V2_SWITCH`` the value is expressed through Fresnel
    integrals after completing the square; below the switch a four-term
    Taylor series in ``v2`` around ``sinc(v1)`` is summed. Negative ``v2``
    uses ``phi(v1, -v2) = conj(phi(v1, v2))``.
    """
    v1a = _as_finite_array(v1, "v1")
    v2a = _as_finite_array(v2, "v2")
    b1, b2 = np.broadcast_arrays(v1a, v2a)
    f1 = b1.ravel()
    f2 = b2.ravel()
    out = np.empty(f1.shape, dtype=complex)
    mag = np.abs(f2)
    taylor = mag < V2_SWITCH
    if taylor.any():
        out[taylor] = _phi_taylor(f1[taylor], f2[taylor])
    big = ~taylor
    if big.any():
        val = _phi_fresnel(f1[big], mag[big])
        out[big] = np.where(f2[big] < 0, np.conj(val), val)
    out = out.reshape(b1.shape)
    return _scalar_or_array(out, v1a, v2a)


def phi_marginal_v2(v2):
    """phi(0, v2) from the Fresnel closed form (C(t) + i sign(v2) S(t)) / t.

    ``t = sqrt(|v2| / (2 pi))``. For ``|v2| < MARGINAL_SERIES_MAX`` the
    power series sum_n (i v2)^n / (n! (2n+1) 4^n) is used instead, which
    tends to 1 as v2 -> 0.
    """
    v2a = _as_finite_array(v2, "v2")
    flat = np.atleast_1d(v2a).ravel()
    out = np.empty(flat.shape, dtype=complex)
    mag = np.abs(flat)
    small = mag < MARGINAL_SERIES_MAX
    if small.any():
        z = 0.25j * mag[small]
        term = np.ones(z.shape, dtype=complex)
        total = term.copy()
        for n in range(1, 40):
            term = term * z / n
            total += term / (2 * n + 1)
        out[small] = total
    if (~small).any():
        t = np.sqrt(mag[~small] / (2.0 * np.pi))
        out[~small] = _fresnel_e(t) / t
    out = np.where(flat < 0, np.conj(out), out).reshape(v2a.shape)
    return _scalar_or_array(out, v2a)


@functools.cache
def find_b_phi():
    """Location of the first local minimum of |phi(0, v2)| over v2 > 0.

    Found by a coarse scan for a bracket and bounded refinement; the
    result is computed, never tabulated.
    """
    grid = np.arange(1.0, 60.0, 0.05)
    mag = np.abs(phi_marginal_v2(grid))
    idx = np.flatnonzero((mag[1:-1] < mag[:-2]) & (mag[1:-1] <= mag[2:]))
    if idx.size == 0:
        raise NumericError("no local minimum of |phi(0, v2)| bracketed", scan=(1.0, 60.0))
    i = idx[0] + 1
    lo, hi = grid[i - 1], grid[i + 1]
    res = optimize.minimize_scalar(lambda v: abs(phi_marginal_v2(v)), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-9})
    if not res.success:
        raise NumericError("refinement of b_phi failed", bracket=(lo, hi))
    return float(res.x)


def sine_integral(x):
    """Si(x), the integral of sinc from 0 to x."""
    x = _as_finite_array(x, "x")
    si, _ = special.sici(x)
    return _scalar_or_array(np.asarray(si), x)


def sinc2_antiderivative(x):
    """Si(2x) - sin(x) sinc(x), whose derivative is sinc(x)^2."""
    x = _as_finite_array(x, "x")
    val = special.sici(2.0 * x)[0] - np.sin(x) * np.sinc(x / np.pi)
    return _scalar_or_array(np.asarray(val), x)


def f_breve_t(zeta):
    """Convolution of the unit step with sinc^2, in closed form.

    Returns pi/2 + Si(2 zeta) - sin(zeta) sinc(zeta); tends to pi for
    large positive zeta and to 0 for large negative zeta.
    """
    zeta = _as_finite_array(zeta, "zeta")
    return _scalar_or_array(np.asarray(0.5 * math.pi + sinc2_antiderivative(zeta)), zeta)
