"""Discrimination of delayed and instantaneous scatterers in SAR imagery.

Submodules: ``specfun`` (special functions), ``kernel`` (geometry and the
imaging kernel), ``moments`` (second-moment operators), ``sampler``
(synthetic datasets), ``discriminator`` (maximum-likelihood model
selection), ``montecarlo`` and ``experiments`` (ensembles) and ``cli``.
"""

__version__ = "0.1.0"

from .discriminator import Decision, FitResult, discriminate, fit_model, log_likelihood
from .errors import InvalidArgumentError, NumericError
from .kernel import RadarConfig, kappa, kernel_w, resolutions
from .moments import Model, MomentTriple, ScattererKind, cov4, g_s, g_t, h, pair_moments
from .montecarlo import ContingencyTable, RunReport, run_ensemble, sweep
from .sampler import Dataset, SceneSpec, intensities_from_contrasts, synthesize_dataset
from .specfun import f_breve_t, find_b_phi, phi, phi_marginal_v2, sine_integral, sinc

__all__ = [
    "ContingencyTable", "Dataset", "Decision", "FitResult", "InvalidArgumentError", "Model",
    "MomentTriple", "NumericError", "RadarConfig", "RunReport", "ScattererKind", "SceneSpec",
    "cov4", "discriminate", "f_breve_t", "find_b_phi", "fit_model", "g_s", "g_t", "h",
    "intensities_from_contrasts", "kappa", "kernel_w", "log_likelihood", "pair_moments", "phi",
    "phi_marginal_v2", "resolutions", "run_ensemble", "sinc", "sine_integral", "sweep",
    "synthesize_dataset",
]
