"""Command-line entry point: ``sardelay <subcommand> [options]``.

Exit codes: 0 success, 2 configuration or I/O error, 3 numerical failure.
"""

import argparse
import csv
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .config import RunConfig, load_config, parse_number
from .discriminator import discriminate
from .errors import InvalidArgumentError, NumericError
from .experiments import BAND, EXPERIMENTS, KAPPAS, reproduce
from .kernel import kappa as kappa_of
from .kernel import kernel_w
from .moments import Model, ScattererKind, g_s, g_t, h, pair_moments
from .montecarlo import SWEEP_PARAMETERS, run_ensemble, sweep, trial_seed, write_trend_csv
from .sampler import Dataset, synthesize_dataset
from .specfun import find_b_phi, phi

log = logging.getLogger("sardelay")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _grid(spec):
    """``start:stop:count`` or a single value, numbers may use ``pi``."""
    parts = str(spec).split(":")
    if len(parts) == 1:
        return np.array([parse_number(parts[0])])
    if len(parts) != 3:
        raise InvalidArgumentError(f"grid must be start:stop:count, got {spec!r}")
    start, stop = parse_number(parts[0]), parse_number(parts[1])
    count = int(parse_number(parts[2]))
    if count < 1:
        raise InvalidArgumentError("grid count must be positive")
    return np.linspace(start, stop, count)


def _values(text):
    return [parse_number(v) for v in str(text).split(",") if v.strip()]


def _open_out(path):
    if path in (None, "-"):
        return _Stdout()
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    return open(path, "w", newline="")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def _dump(obj):
    return json.dumps(obj, sort_keys=True, allow_nan=True)


def _write_csv(path, header, rows):
    with _open_out(path) as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


# --- configuration -----------------------------------------------------------

def _load(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    scene = {}
    for key in ("zeta_min", "zeta_max", "p_n", "q_st", "kappa"):
        value = getattr(args, key, None)
        if value is not None:
            scene[key] = parse_number(value)
    if getattr(args, "n_hom", None) is not None:
        scene["n_hom"] = args.n_hom
    if scene:
        cfg = cfg.override("scene", **scene)
    run = {}
    if args.seed is not None:
        run["master_seed"] = args.seed
    if args.threads is not None:
        run["threads"] = args.threads
    if getattr(args, "n_img", None) is not None:
        run["n_img"] = args.n_img
    if getattr(args, "output_dir", None) is not None:
        run["output_dir"] = args.output_dir
    if run:
        cfg = cfg.override("run", **run)
    return cfg


# --- subcommands -------------------------------------------------------------

def cmd_phi_table(args):
    v1 = _grid(args.v1)
    v2 = _grid(args.v2)
    g1, g2 = np.meshgrid(v1, v2, indexing="ij")
    vals = phi(g1.ravel(), g2.ravel())
    rows = zip(g1.ravel(), g2.ravel(), np.abs(vals), vals.real, vals.imag)
    _write_csv(args.out, ["v1", "v2", "abs_phi", "re_phi", "im_phi"], rows)
    print(f"b_phi = {find_b_phi()!r}", file=sys.stderr)
    return EXIT_OK


def cmd_kernel_slice(args):
    cfg = _load(args)
    eta, zeta, psi = np.meshgrid(_grid(args.eta), _grid(args.zeta), _grid(args.psi), indexing="ij")
    w = np.atleast_1d(kernel_w((eta.ravel(), zeta.ravel(), psi.ravel()), cfg.radar))
    rows = zip(eta.ravel(), zeta.ravel(), psi.ravel(), np.abs(w), w.real, w.imag)
    _write_csv(args.out, ["eta", "zeta", "psi", "abs_w", "re_w", "im_w"], rows)
    print(f"kappa = {kappa_of(cfg.radar)!r}", file=sys.stderr)
    return EXIT_OK


def cmd_moments(args):
    cfg = _load(args)
    kap = cfg.scene.kappa
    tol = cfg.run.quad_tol
    p = cfg.scene.intensities()
    header = ["zeta"]
    for kind in ScattererKind:
        header += [f"gs_{kind.value}", f"gt_{kind.value}", f"abs_h_{kind.value}"]
    for model in Model:
        tag = model.value[0]
        header += [f"A_{tag}", f"B_{tag}", f"C_{tag}", f"D_{tag}"]
    rows = []
    for zeta in _grid(args.zeta):
        row = [float(zeta)]
        for kind in ScattererKind:
            row += [g_s(kind, zeta, kap, tol=tol), g_t(kind, zeta, kap, tol=tol),
                    abs(h(kind, zeta, kap, tol=tol))]
        for model in Model:
            m = pair_moments(model, zeta, kap, p, tol=tol)
            row += [m.A, m.B, m.C, m.D]
        rows.append(row)
    _write_csv(args.out, header, rows)
    return EXIT_OK


def cmd_profile(args):
    cfg = _load(args)
    kap = cfg.scene.kappa
    zetas = _grid(args.zeta) if args.zeta else np.linspace(0.0, cfg.scene.zeta_max, 241)
    header = ["zeta", "s_model_S", "s_model_T", "t_model_S", "t_model_T"]
    rows = []
    for zeta in zetas:
        row = [float(zeta)]
        for model in Model:
            kind = model.target_kind
            row += [g_s(kind, zeta, kap), g_t(kind, zeta, kap)]
        rows.append(row)
    _write_csv(args.out, header, rows)
    return EXIT_OK


def cmd_simulate(args):
    cfg = _load(args)
    spec = cfg.scene.with_model(args.model)
    with _open_out(args.out) as fh:
        for k in range(args.count):
            ds = synthesize_dataset(spec, trial_seed(cfg.run.master_seed, k))
            fh.write(_dump(ds.to_record()) + "\n")
    return EXIT_OK


def _read_datasets(path, kappa):
    fh = sys.stdin if path in (None, "-") else open(path)
    try:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InvalidArgumentError(f"line {lineno}: {exc}") from None
            yield Dataset.from_record(rec, kappa)
    finally:
        if fh is not sys.stdin:
            fh.close()


def cmd_discriminate(args):
    kap = parse_number(args.kappa) if args.kappa is not None else None
    with _open_out(args.out) as out:
        for ds in _read_datasets(args.input, kap):
            dec = discriminate(ds, ds.kappa)
            rec = dec.to_dict()
            rec["seed"] = ds.seed
            rec["model"] = ds.model
            out.write(_dump(rec) + "\n")
    return EXIT_OK


def _report_text(rep):
    t = rep.table
    return (f"{t.render()}\n"
            f"r_s = {t.r_s:.4f} +- {t.std_r_s:.4f}   r_t = {t.r_t:.4f} +- {t.std_r_t:.4f}\n"
            f"metric = {rep.metric} (+- {t.metric_std:.1f}), n_img = {t.n_img}")


def cmd_montecarlo(args):
    cfg = _load(args)
    rep = run_ensemble(cfg.scene, cfg.run.n_img, cfg.run.master_seed, cfg.run.threads)
    payload = rep.to_dict()
    if args.json_out:
        with _open_out(args.json_out) as fh:
            fh.write(_dump(payload) + "\n")
    else:
        print(_dump(payload))
    print(_report_text(rep), file=sys.stderr if not args.json_out else sys.stdout)
    print(f"wall time {rep.wall_time:.1f} s", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args):
    cfg = _load(args)
    values = _values(args.values)
    if args.param in ("n_hom",):
        values = [int(v) for v in values]
    reports = sweep(args.param, values, cfg.scene, cfg.run.n_img, cfg.run.master_seed,
                    cfg.run.threads)
    payload = [r.to_dict() for r in reports]
    if args.json_out:
        with _open_out(args.json_out) as fh:
            fh.write(_dump(payload) + "\n")
    else:
        print(_dump(payload))
    if args.csv:
        write_trend_csv(args.csv, args.param, reports)
    for r in reports:
        print(f"{args.param} = {r.spec[args.param]!r}: metric {r.metric} (+- {r.table.metric_std:.1f})",
              file=sys.stderr)
    return EXIT_OK


def _summary_text(summaries):
    lines = [f"Published metrics compared with this run (band +-{BAND} points)", ""]
    for s in summaries:
        lines.append(f"Experiment {s['experiment']} ({s['parameter']}), kappa = {s['kappa']}")
        for row in s["rows"]:
            pub = row.get("published")
            tail = "" if pub is None else (
                f"  published {pub:>3}  {'ok' if row['within_band'] else 'OUTSIDE'}")
            lines.append(f"  {s['parameter']} = {row['value']:<6} n_streak = {row['n_streak']:<3}"
                         f" metric {row['metric']:>3} (+- {row['metric_std']:.1f}){tail}")
        if "trend_ok" in s:
            lines.append(f"  trend {s['trend']}: {'ok' if s['trend_ok'] else 'VIOLATED'}")
        if "delta" in s:
            lines.append(f"  |delta| = {s['delta']}: {'ok' if s['within_band'] else 'OUTSIDE'}")
        lines.append("")
    return "\n".join(lines)


def cmd_reproduce_paper(args):
    cfg = _load(args)
    out_dir = cfg.run.output_dir
    os.makedirs(out_dir, exist_ok=True)
    chosen = [e for e in EXPERIMENTS if not args.only or e.key in args.only.upper()]
    start = time.perf_counter()

    def progress(s):
        log.info("experiment %s kappa %s: %s", s["experiment"], s["kappa"],
                 [r["metric"] for r in s["rows"]])

    summaries, reports = reproduce(cfg.run.n_img, cfg.run.master_seed, cfg.run.threads,
                                   KAPPAS, chosen, progress)
    runs = {f"{key}_kappa{kap}": [r.to_dict() for r in reps] for (key, kap), reps in reports.items()}
    summary = {
        "master_seed": cfg.run.master_seed,
        "n_img": cfg.run.n_img,
        "band": BAND,
        "experiments": summaries,
        "runs": runs,
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        fh.write(_dump(summary) + "\n")
    text = _summary_text(summaries)
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write(text)
    timing = {f"{key}_kappa{kap}": [r.wall_time for r in reps] for (key, kap), reps in reports.items()}
    timing["total"] = time.perf_counter() - start
    with open(os.path.join(out_dir, "timing.json"), "w") as fh:
        fh.write(_dump(timing) + "\n")
    print(text)
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser():
    def global_flags(default):
        # subcommands repeat the global flags without clobbering values given before them
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--config", default=default,
                       help="INI file with [radar], [scene] and [run] sections")
        g.add_argument("--seed", type=int, default=default, help="master seed")
        g.add_argument("--threads", type=int, default=default, help="worker processes")
        g.add_argument("-v", "--verbose", action="store_true", default=default)
        return g

    top = global_flags(None)
    common = global_flags(argparse.SUPPRESS)

    scene = argparse.ArgumentParser(add_help=False)
    for key in ("zeta_min", "zeta_max", "p_n", "q_st", "kappa"):
        scene.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                           help="number; multiples of pi may be written as 12pi")
    scene.add_argument("--n-hom", dest="n_hom", type=int, default=None)
    scene.add_argument("--n-img", dest="n_img", type=int, default=None)

    parser = argparse.ArgumentParser(prog="sardelay", description=__doc__.splitlines()[0],
                                     parents=[top])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phi-table", parents=[common], help="tabulate Phi(v1, v2) as CSV")
    p.add_argument("--v1", default="-20:20:81")
    p.add_argument("--v2", default="-60:60:121")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_phi_table)

    p = sub.add_parser("kernel-slice", parents=[common], help="imaging kernel on a grid as CSV")
    p.add_argument("--eta", default="0")
    p.add_argument("--zeta", default="-4pi:4pi:161")
    p.add_argument("--psi", default="0")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_kernel_slice)

    p = sub.add_parser("moments", parents=[common, scene], help="operator and moment table as CSV")
    p.add_argument("--zeta", default="pi:20pi:20")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("profile", parents=[common, scene],
                       help="expected target intensity at the S and T points along the streak")
    p.add_argument("--zeta", default=None, help="grid; default 0:zeta_max:241")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("simulate", parents=[common, scene], help="synthesize datasets as JSON lines")
    p.add_argument("--model", default="t-model", choices=[m.value for m in Model])
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("discriminate", parents=[common], help="classify JSON-lines datasets")
    p.add_argument("--input", default="-")
    p.add_argument("--kappa", default=None, help="overrides the kappa stored in each record")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_discriminate)

    p = sub.add_parser("montecarlo", parents=[common, scene], help="one ensemble run")
    p.add_argument("--json-out", default=None)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("sweep", parents=[common, scene], help="ensemble runs over one parameter")
    p.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
    p.add_argument("--values", required=True, help="comma-separated, e.g. 4pi,8pi,20pi")
    p.add_argument("--json-out", default=None)
    p.add_argument("--csv", default=None, help="trend table path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reproduce-paper", parents=[common, scene],
                       help="all published experiments at kappa 0.4 and 1")
    p.add_argument("--output-dir", dest="output_dir", default=None)
    p.add_argument("--only", default=None, help="subset of experiment keys, e.g. AB")
    p.set_defaults(func=cmd_reproduce_paper)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InvalidArgumentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
