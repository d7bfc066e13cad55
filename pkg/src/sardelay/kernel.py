"""Radar geometry and the factorized coordinate-delay imaging kernel."""

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidArgumentError
from .specfun import find_b_phi, phi, sinc

__all__ = [
    "RadarConfig",
    "DimensionlessPoint",
    "AmbiguityPairCoords",
    "kappa",
    "k0theta",
    "resolutions",
    "kernel_w",
    "streak_pair_coords",
    "hom_pair_coords",
]

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class RadarConfig:
    """Carrier, chirp and aperture parameters.

    Attributes
    ----------
    omega0 : float
        Angular carrier frequency, rad/s.
    bandwidth : float
        Chirp bandwidth B, rad/s.
    tau : float
        Pulse duration, s.
    phiT : float
        Angular width of the synthetic aperture, rad. Zero is accepted as the
        degenerate no-aperture limit.
    theta : float
        Incidence angle, rad.
    N : int
        Number of pulses.
    c : float
        Wave speed, m/s.
    """

    omega0: float = 2 * math.pi * 10e9
    bandwidth: float = 2 * math.pi * 10e9 / 100
    tau: float = 1e-6
    phiT: float = 0.1
    theta: float = math.pi / 4
    N: int = 1000
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite")
        if self.omega0 <= 0 or self.bandwidth <= 0:
            raise InvalidArgumentError("omega0 and bandwidth must be positive")
        ratio = self.bandwidth / self.omega0
        if ratio > 0.2:
            raise InvalidArgumentError(f"narrowband condition violated: B/omega0 = {ratio:.3g} > 0.2")
        if ratio > 0.05:
            warnings.warn(f"B/omega0 = {ratio:.3g} is not small; kernel factorization degrades",
                          stacklevel=2)
        if self.bandwidth * self.tau < 10:
            raise InvalidArgumentError("time-bandwidth product B*tau must be at least 10")
        if not 0 < self.theta < math.pi / 2:
            raise InvalidArgumentError("theta must lie in (0, pi/2)")
        if not 0 <= self.phiT <= 0.5:
            raise InvalidArgumentError("phiT must lie in [0, 0.5] rad")
        if self.N < 1 or self.c <= 0 or self.tau <= 0:
            raise InvalidArgumentError("N, c and tau must be positive")

    @classmethod
    def for_kappa(cls, kappa_value, omega_ratio=100.0, **kwargs):
        """Demo configuration with omega0/B = omega_ratio and phiT solved for kappa."""
        if kappa_value < 0:
            raise InvalidArgumentError("kappa must be non-negative")
        omega0 = kwargs.pop("omega0", cls.omega0)
        phiT = math.sqrt(kappa_value / omega_ratio)
        return cls(omega0=omega0, bandwidth=omega0 / omega_ratio, phiT=phiT, **kwargs)


@dataclass(frozen=True)
class DimensionlessPoint:
    """Kernel coordinates: cross-range eta, across-line zeta, along-line psi."""

    eta: float
    zeta: float
    psi: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.eta, self.zeta, self.psi)):
            raise InvalidArgumentError("dimensionless coordinates must be finite")


@dataclass(frozen=True)
class AmbiguityPairCoords:
    """Physical coordinates of an ambiguity pair.

    ``S`` and ``T`` are ``(t_y, y1, y2)`` tuples in seconds and metres;
    ``zeta_y`` labels the ambiguity line.
    """

    S: tuple
    T: tuple
    zeta_y: float

    def line_constant(self, cfg, point):
        t_y, _, y2 = point
        return t_y + 2.0 * y2 * math.sin(cfg.theta) / cfg.c


def k0theta(cfg):
    """Projected carrier wavenumber (omega0/c) sin(theta)."""
    return cfg.omega0 / cfg.c * math.sin(cfg.theta)


def kappa(cfg):
    """Aperture parameter phiT^2 omega0 / B."""
    return cfg.phiT ** 2 * cfg.omega0 / cfg.bandwidth


def resolutions(cfg):
    """Azimuth, range and unambiguous-range resolution sizes in metres.

    Returns ``(delta_az, delta_rng, delta_U)``. With ``phiT = 0`` the
    azimuth and unambiguous sizes are infinite.
    """
    k0 = k0theta(cfg)
    delta_rng = math.pi * cfg.c / (cfg.bandwidth * math.sin(cfg.theta))
    if cfg.phiT == 0:
        return math.inf, delta_rng, math.inf
    delta_az = math.pi / (k0 * cfg.phiT)
    delta_u = find_b_phi() / (k0 * cfg.phiT ** 2)
    return delta_az, delta_rng, delta_u


def kernel_w(p, cfg):
    """Imaging kernel W(eta, zeta, psi) in dimensionless coordinates.

    ``p`` is a :class:`DimensionlessPoint` or an ``(eta, zeta, psi)`` triple
    of scalars/arrays. Returns
    ``N tau exp(-2i (omega0/B) zeta) phi(eta, kappa (zeta+psi)/2) sinc(zeta)``.
    """
    if isinstance(p, DimensionlessPoint):
        eta, zeta, psi = p.eta, p.zeta, p.psi
    else:
        eta, zeta, psi = p
    eta = np.asarray(eta, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    psi = np.asarray(psi, dtype=float)
    kap = kappa(cfg)
    fast = np.exp(-2j * (cfg.omega0 / cfg.bandwidth) * zeta)
    val = cfg.N * cfg.tau * fast * phi(eta, kap * (zeta + psi) / 2.0) * sinc(zeta)
    if np.ndim(val) == 0:
        return complex(val)
    return val


def _range_offset(cfg, zeta_y):
    return cfg.omega0 * zeta_y / (cfg.bandwidth * k0theta(cfg))


def streak_pair_coords(m, z_d, cfg):
    """S and T sample locations on the m-th streak ambiguity line (zeta_y = pi m)."""
    if int(m) != m or m < 1:
        raise InvalidArgumentError("streak index m must be an integer >= 1")
    zeta_y = math.pi * m
    z1, z2 = z_d
    s_point = (0.0, float(z1), float(z2) + _range_offset(cfg, zeta_y))
    t_point = (2.0 * zeta_y / cfg.bandwidth, float(z1), float(z2))
    return AmbiguityPairCoords(S=s_point, T=t_point, zeta_y=zeta_y)


def hom_pair_coords(k, y_k, zeta_max, cfg):
    """S and T sample locations of the k-th homogeneous pair anchored at y_k."""
    if not zeta_max > 0:
        raise InvalidArgumentError("zeta_max must be positive")
    y1, y2 = y_k
    s_point = (0.0, float(y1), float(y2))
    t_point = (2.0 * zeta_max / cfg.bandwidth, float(y1), float(y2) - _range_offset(cfg, zeta_max))
    return AmbiguityPairCoords(S=s_point, T=t_point, zeta_y=float(zeta_max))
