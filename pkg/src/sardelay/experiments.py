"""The published ensemble experiments and their reference metrics."""

import math
from dataclasses import dataclass, replace

from .montecarlo import run_ensemble, sub_seed
from .sampler import SceneSpec

__all__ = [
    "Experiment",
    "EXPERIMENTS",
    "KAPPAS",
    "BAND",
    "low_contrast_noise",
    "run_experiment",
    "reproduce",
]

KAPPAS = (0.4, 1.0)
#: accepted distance, in percentage points, from a published metric
BAND = 8


def low_contrast_noise(spec, q_st):
    """Keep the noise fraction at 0.1: p_n = 0.1 / (0.9 - q_st)."""
    return replace(spec, p_n=0.1 / (0.9 - q_st))


@dataclass(frozen=True)
class Experiment:
    """One published sweep.

    ``published`` maps kappa to the reported metrics, one per value, or is
    None when only a qualitative statement was made. ``trend`` is
    ``"decreasing"``, ``"increasing"`` or None.
    """

    key: str
    parameter: str
    values: tuple
    published: dict
    trend: str = None
    derive: object = None
    labels: tuple = ()

    def spec_for(self, value, kappa, base=None):
        spec = replace(base or SceneSpec(), kappa=kappa, **{self.parameter: value})
        if self.derive is not None:
            spec = self.derive(spec, value)
        return spec


EXPERIMENTS = (
    Experiment("A", "zeta_max", (4 * math.pi, 8 * math.pi, 20 * math.pi),
               {0.4: (48, 34, 6), 1.0: (36, 17, 2)}, "decreasing",
               labels=("4pi", "8pi", "20pi")),
    Experiment("B", "zeta_min", (3 * math.pi, 8 * math.pi, 12 * math.pi),
               {0.4: (22, 27, 37), 1.0: (11, 23, 35)}, "increasing",
               labels=("3pi", "8pi", "12pi")),
    Experiment("C", "q_st", (0.1, 0.3, 0.6),
               {0.4: (47, 35, 17), 1.0: (43, 29, 5)}, "decreasing", low_contrast_noise,
               labels=("0.1", "0.3", "0.6")),
    Experiment("D", "n_hom", (0, 15), {0.4: None, 1.0: None}, None,
               labels=("0", "15")),
)


def _run_seed(master_seed, key, kappa, index):
    # independent stream per (experiment, kappa, value)
    exp_index = "ABCD".index(key)
    kap_index = KAPPAS.index(kappa) if kappa in KAPPAS else 9
    return sub_seed(master_seed, 100 * exp_index + 10 * kap_index + index)


def run_experiment(exp, kappa, n_img, master_seed, threads=1, base=None):
    """Reports for every value of ``exp`` at one ``kappa``."""
    reports = []
    for k, value in enumerate(exp.values):
        spec = exp.spec_for(value, kappa, base)
        rep = run_ensemble(spec, n_img, _run_seed(master_seed, exp.key, kappa, k), threads)
        rep.diagnostics["experiment"] = exp.key
        rep.diagnostics["parameter"] = exp.parameter
        rep.diagnostics["value"] = value
        reports.append(rep)
    return reports


def _trend_ok(metrics, trend, slack):
    pairs = list(zip(metrics, metrics[1:]))
    if trend == "decreasing":
        return all(b <= a + slack for a, b in pairs)
    if trend == "increasing":
        return all(b >= a - slack for a, b in pairs)
    return True


def summarize(exp, kappa, reports):
    """Side-by-side comparison with the published metrics."""
    metrics = [r.metric for r in reports]
    published = exp.published.get(kappa)
    rows = []
    for k, rep in enumerate(reports):
        row = {
            "value": exp.labels[k] if exp.labels else repr(exp.values[k]),
            "metric": rep.metric,
            "metric_std": rep.table.metric_std,
            "n_streak": SceneSpec(**rep.spec).n_streak,
        }
        if published is not None:
            row["published"] = published[k]
            row["within_band"] = abs(rep.metric - published[k]) <= BAND
        rows.append(row)
    out = {"experiment": exp.key, "parameter": exp.parameter, "kappa": kappa, "rows": rows}
    if exp.trend is not None:
        out["trend"] = exp.trend
        out["trend_ok"] = _trend_ok(metrics, exp.trend, 0)
    if exp.key == "D":
        std = max(r.table.metric_std for r in reports)
        delta = abs(metrics[0] - metrics[-1])
        out["delta"] = delta
        out["within_band"] = delta <= 5 + 2 * std
    return out


def reproduce(n_img=400, master_seed=0, threads=1, kappas=KAPPAS, experiments=EXPERIMENTS,
              progress=None):
    """Run every experiment at every kappa.

    Returns ``(summaries, reports)`` where ``reports`` maps
    ``(key, kappa)`` to the list of :class:`RunReport`.
    """
    summaries = []
    reports = {}
    for exp in experiments:
        for kappa in kappas:
            reps = run_experiment(exp, kappa, n_img, master_seed, threads)
            reports[(exp.key, kappa)] = reps
            summaries.append(summarize(exp, kappa, reps))
            if progress is not None:
                progress(summaries[-1])
    return summaries, reports
