"""Monte-Carlo ensembles, contingency tables and parameter sweeps."""

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .discriminator import discriminate
from .errors import InvalidArgumentError
from .moments import Model
from .sampler import synthesize_dataset

__all__ = [
    "ContingencyTable",
    "RunReport",
    "trial_seed",
    "sub_seed",
    "run_ensemble",
    "sweep",
    "write_trend_csv",
    "SWEEP_PARAMETERS",
]

SWEEP_PARAMETERS = ("zeta_max", "zeta_min", "q_st", "n_hom", "kappa", "p_n")


@dataclass(frozen=True)
class ContingencyTable:
    """Error frequencies of the two-model classification.

    ``r_s`` is the fraction of s-model datasets labelled delayed (false
    alarms), ``r_t`` the fraction of t-model datasets labelled
    instantaneous (misses). Standard deviations follow the binomial law.
    """

    r_s: float
    r_t: float
    n_img: int

    @property
    def std_r_s(self):
        return math.sqrt(self.r_s * (1.0 - self.r_s) / self.n_img)

    @property
    def std_r_t(self):
        return math.sqrt(self.r_t * (1.0 - self.r_t) / self.n_img)

    @property
    def metric(self):
        return int(math.floor(100.0 * (self.r_s + self.r_t) / 2.0 + 0.5))

    @property
    def metric_std(self):
        """Spread of the metric in percentage points, 50 (std_r_s + std_r_t).

        Equals 100 / (2 sqrt(n_img)) at r_s = r_t = 1/2.
        """
        return 50.0 * (self.std_r_s + self.std_r_t)

    def to_dict(self):
        return {
            "r_s": self.r_s,
            "r_t": self.r_t,
            "n_img": self.n_img,
            "std_r_s": self.std_r_s,
            "std_r_t": self.std_r_t,
        }

    def render(self):
        """Human-readable 2x2 table of label frequencies."""
        rows = [
            f"{'true / label':<14}{'instantaneous':>15}{'delayed':>10}",
            f"{'s-model':<14}{1 - self.r_s:>15.3f}{self.r_s:>10.3f}",
            f"{'t-model':<14}{self.r_t:>15.3f}{1 - self.r_t:>10.3f}",
        ]
        return "\n".join(rows)


@dataclass
class RunReport:
    """Outcome of one ensemble run."""

    spec: dict
    table: ContingencyTable
    master_seed: int
    wall_time: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def metric(self):
        return self.table.metric

    def to_dict(self, include_timing=False):
        d = {
            "spec": self.spec,
            "master_seed": self.master_seed,
            "table": self.table.to_dict(),
            "metric": self.metric,
            "metric_std": self.table.metric_std,
            "diagnostics": self.diagnostics,
        }
        if include_timing:
            d["wall_time"] = self.wall_time
        return d


def _seed_from(seq):
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def trial_seed(master_seed, trial):
    """Dataset seed of trial ``trial``, shared by both true models."""
    return _seed_from(np.random.SeedSequence([int(master_seed), int(trial)]))


def sub_seed(master_seed, index):
    """Master seed of the ``index``-th run of a sweep."""
    return _seed_from(np.random.SeedSequence(int(master_seed), spawn_key=(int(index),)))


def _run_trials(spec, master_seed, trials):
    out = []
    for i in trials:
        seed = trial_seed(master_seed, i)
        row = []
        for model in (Model.S, Model.T):
            ds = synthesize_dataset(spec.with_model(model), seed)
            dec = discriminate(ds, spec.kappa)
            row.append((dec.label == "delayed", dec.fit_s.converged, dec.fit_t.converged))
        out.append(row)
    return out


def _chunks(n, parts):
    bounds = np.linspace(0, n, parts + 1).round().astype(int)
    return [range(bounds[k], bounds[k + 1]) for k in range(parts) if bounds[k + 1] > bounds[k]]


def run_ensemble(spec, n_img, master_seed, threads=1):
    """Classify ``n_img`` datasets from each model and tally the errors.

    ``spec.true_model`` is ignored. Results are identical for any
    ``threads``; trials are split into contiguous blocks and reassembled
    in trial order.
    """
    if int(n_img) != n_img or n_img < 1:
        raise InvalidArgumentError("n_img must be a positive integer")
    if threads < 1:
        raise InvalidArgumentError("threads must be at least 1")
    n_img = int(n_img)
    start = time.perf_counter()
    if threads == 1 or n_img == 1:
        rows = _run_trials(spec, master_seed, range(n_img))
    else:
        blocks = _chunks(n_img, min(threads * 4, n_img))
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_trials, spec, master_seed, b) for b in blocks]
            rows = [r for f in futures for r in f.result()]
    s_delayed = sum(1 for r in rows if r[0][0])
    t_instant = sum(1 for r in rows if not r[1][0])
    nonconv = {
        "s_model_inputs": sum(1 for r in rows if not (r[0][1] and r[0][2])),
        "t_model_inputs": sum(1 for r in rows if not (r[1][1] and r[1][2])),
    }
    table = ContingencyTable(s_delayed / n_img, t_instant / n_img, n_img)
    return RunReport(
        spec=spec.to_dict(include_model=False),
        table=table,
        master_seed=int(master_seed),
        wall_time=time.perf_counter() - start,
        diagnostics={"non_converged": nonconv},
    )


def sweep(parameter, values, base_spec, n_img, master_seed, threads=1, derive=None):
    """One ensemble per parameter value, seeded with :func:`sub_seed`.

    ``derive``, if given, maps ``(spec, value)`` to a further adjusted spec
    (the low-contrast sweep ties ``p_n`` to ``q_st`` this way).
    """
    if parameter not in SWEEP_PARAMETERS:
        raise InvalidArgumentError(f"cannot sweep {parameter!r}; choose from {SWEEP_PARAMETERS}")
    values = list(values)
    if not values:
        raise InvalidArgumentError("sweep needs at least one value")
    reports = []
    for k, v in enumerate(values):
        spec = replace(base_spec, **{parameter: v})
        if derive is not None:
            spec = derive(spec, v)
        rep = run_ensemble(spec, n_img, sub_seed(master_seed, k), threads)
        rep.diagnostics["parameter"] = parameter
        rep.diagnostics["value"] = v
        reports.append(rep)
    return reports


def write_trend_csv(path, parameter, reports):
    """CSV with columns param_value, r_s, r_t, metric, std."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["param_value", "r_s", "r_t", "metric", "std"])
        for rep in reports:
            w.writerow([repr(float(rep.spec[parameter])), repr(rep.table.r_s), repr(rep.table.r_t),
                        rep.metric, repr(rep.table.metric_std)])
