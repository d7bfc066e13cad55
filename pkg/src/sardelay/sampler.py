"""Synthetic ambiguity-pair datasets for the two scene hypotheses."""

import functools
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import InvalidArgumentError
from .moments import UNIT_STEP, Model, MomentTriple, component_table, cov4

__all__ = [
    "SceneSpec",
    "Dataset",
    "intensities_from_contrasts",
    "streak_indices",
    "sample_pair",
    "covariance_factor",
    "synthesize_dataset",
    "dataset_zetas",
]

_EIG_CLIP = 1e-10


@dataclass(frozen=True)
class SceneSpec:
    """Scatterer mix and sampling layout of one simulated scene."""

    zeta_min: float = 3 * math.pi
    zeta_max: float = 12 * math.pi
    n_hom: int = 15
    p_n: float = 0.25
    q_st: float = 0.4
    kappa: float = 1.0
    true_model: Model = Model.T

    def __post_init__(self):
        object.__setattr__(self, "true_model", Model.parse(self.true_model))
        for name in ("zeta_min", "zeta_max", "p_n", "q_st", "kappa"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgumentError(f"{name} must be finite")
        if self.zeta_min > self.zeta_max:
            raise InvalidArgumentError("zeta_min must not exceed zeta_max")
        if int(self.n_hom) != self.n_hom or self.n_hom < 0:
            raise InvalidArgumentError("n_hom must be a non-negative integer")
        object.__setattr__(self, "n_hom", int(self.n_hom))
        if self.p_n < 0:
            raise InvalidArgumentError("p_n must be non-negative")
        if not 0 <= self.q_st < 1:
            raise InvalidArgumentError("q_st must lie in [0, 1)")
        if self.kappa < 0:
            raise InvalidArgumentError("kappa must be non-negative")
        if self.n_streak < 1:
            raise InvalidArgumentError("no streak sample pi*m falls in [zeta_min, zeta_max]")

    @property
    def n_streak(self):
        return len(streak_indices(self.zeta_min, self.zeta_max))

    def intensities(self):
        return intensities_from_contrasts(self.p_n, self.q_st)

    def with_model(self, model):
        return replace(self, true_model=Model.parse(model))

    def to_dict(self, include_model=True):
        d = asdict(self)
        d["true_model"] = self.true_model.value
        if not include_model:
            del d["true_model"]
        return d


def streak_indices(zeta_min, zeta_max):
    """Indices m >= 1 with zeta_min <= pi m <= zeta_max.

    The lower bound is inclusive (with a relative slack of 1e-12) so that
    zeta_min = 3 pi, zeta_max = 12 pi gives ten streak pairs.
    """
    slack = 1e-12 * max(1.0, abs(zeta_min), abs(zeta_max))
    lo = max(1, math.ceil((zeta_min - slack) / math.pi))
    hi = math.floor((zeta_max + slack) / math.pi)
    return list(range(lo, hi + 1))


def dataset_zetas(spec):
    """Sample coordinates: streak lines first, then n_hom copies of zeta_max."""
    streak = [math.pi * m for m in streak_indices(spec.zeta_min, spec.zeta_max)]
    return np.array(streak + [float(spec.zeta_max)] * spec.n_hom)


@dataclass
class Dataset:
    """Observed ambiguity pairs q_j = (Re S, Im S, Re T, Im T)."""

    pairs: np.ndarray
    zetas: np.ndarray
    n_streak: int
    kappa: float
    meta: dict = field(default_factory=dict)
    seed: int = None
    model: str = None

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=float).reshape(-1, 4)
        self.zetas = np.asarray(self.zetas, dtype=float)
        if self.pairs.shape[0] != self.zetas.shape[0]:
            raise InvalidArgumentError("pairs and zetas differ in length")
        if not 0 <= self.n_streak <= len(self.zetas):
            raise InvalidArgumentError("n_streak out of range")

    def __len__(self):
        return self.pairs.shape[0]

    @property
    def s_samples(self):
        return self.pairs[:, 0] + 1j * self.pairs[:, 1]

    @property
    def t_samples(self):
        return self.pairs[:, 2] + 1j * self.pairs[:, 3]

    def scaled(self, factor):
        return Dataset(self.pairs * factor, self.zetas.copy(), self.n_streak, self.kappa,
                       dict(self.meta), self.seed, self.model)

    def to_record(self):
        return {
            "seed": self.seed,
            "model": self.model,
            "kappa": self.kappa,
            "n_streak": self.n_streak,
            "zetas": self.zetas.tolist(),
            "pairs": self.pairs.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_record(cls, rec, kappa=None):
        k = rec.get("kappa", kappa) if kappa is None else kappa
        if k is None:
            raise InvalidArgumentError("dataset record carries no kappa")
        zetas = rec["zetas"]
        n_streak = rec.get("n_streak")
        if n_streak is None:
            meta = rec.get("meta") or {}
            if "zeta_min" in meta and "zeta_max" in meta:
                n_streak = len(streak_indices(meta["zeta_min"], meta["zeta_max"]))
            else:
                raise InvalidArgumentError("dataset record carries no n_streak")
        return cls(np.array(rec["pairs"], dtype=float), np.array(zetas, dtype=float),
                   int(n_streak), float(k), dict(rec.get("meta") or {}), rec.get("seed"),
                   rec.get("model"))


def intensities_from_contrasts(p_n, q_st):
    """(P_b, P_n, P_x) with P_b = 1 for the noise and target contrasts.

    ``p_n = P_n / P_b`` and ``q_st = P_x / (P_x + P_b + P_n)``.
    """
    if not (math.isfinite(p_n) and p_n >= 0):
        raise InvalidArgumentError("p_n must be finite and non-negative")
    if not (math.isfinite(q_st) and 0 <= q_st < 1):
        raise InvalidArgumentError("q_st must lie in [0, 1)")
    return 1.0, float(p_n), q_st * (1.0 + p_n) / (1.0 - q_st)


def covariance_factor(cov):
    """Matrix L with L L^T = cov, via eigendecomposition with clipping.

    Eigenvalues in [-1e-10 * scale, 0) are set to zero; anything more
    negative raises :class:`InvalidArgumentError`.
    """
    cov = np.asarray(cov, dtype=float)
    vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
    scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
    if vals.min(initial=0.0) < -_EIG_CLIP * scale:
        raise InvalidArgumentError(f"covariance is not positive semidefinite (min eig {vals.min():.3g})")
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def sample_pair(cov, rng):
    """One zero-mean Gaussian 4-vector with covariance ``cov``."""
    return covariance_factor(cov) @ rng.standard_normal(4)


@functools.lru_cache(maxsize=64)
def _factors(spec, profile, weights):
    zetas = dataset_zetas(spec)
    gs, gt, hh = component_table(spec.true_model, zetas, spec.n_streak, spec.kappa, profile)
    n = len(zetas)
    out = np.zeros((n, 3, 4, 4))
    for j in range(n):
        for c in range(3):
            w = weights[c]
            if w == 0.0 or (c == 2 and j >= spec.n_streak):
                continue
            tri = MomentTriple(gs[c, j], gt[c, j], hh[c, j].real, hh[c, j].imag).scaled(w)
            out[j, c] = covariance_factor(cov4(tri))
    out.setflags(write=False)
    return zetas, out


def _component_normals(seed, n_pairs):
    # fixed (component, pair, coordinate) layout of a single stream: the
    # background and noise draws of a seed are shared by both hypotheses
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    return rng.standard_normal((3, n_pairs, 4)).transpose(1, 0, 2)


def synthesize_dataset(spec, seed, profile=UNIT_STEP, intensities=None):
    """Draw one dataset from ``spec.true_model``.

    Each pair is the sum of independent circular Gaussian draws, one per
    component of the model's summation set (background, noise, and the
    target on streak pairs only). Draws are a pure function of
    ``(seed, pair index, component)``.

    Parameters
    ----------
    spec : SceneSpec
    seed : int
    profile : reflectivity profile of the target, default unit step
    intensities : (P_b, P_n, P_x), optional
        Overrides the values derived from the contrasts of ``spec``.
    """
    if intensities is None:
        weights = spec.intensities()
    else:
        weights = tuple(float(v) for v in intensities)
        if len(weights) != 3 or any(not math.isfinite(v) or v < 0 for v in weights):
            raise InvalidArgumentError("intensities must be three finite non-negative numbers")
    zetas, factors = _factors(spec, profile, weights)
    z = _component_normals(seed, len(zetas))
    pairs = np.einsum("jcab,jcb->ja", factors, z)
    return Dataset(pairs=pairs, zetas=zetas, n_streak=spec.n_streak, kappa=spec.kappa,
                   meta=spec.to_dict(include_model=False), seed=int(seed),
                   model=spec.true_model.value)
