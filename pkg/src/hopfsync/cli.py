"""Command-line front end.

Configuration is layered: built-in defaults, then an optional preset, then an
optional JSON config file, then command-line flags. Every scalar leaf of the
config can be set with a dotted flag (``--model.lambda0 -0.3``); common ones
also have short aliases (``--lambda0 -0.3``). The whole config is validated
before any computation starts.

Exit codes: 0 success, 2 usage or config error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import copy
import dataclasses
import json
import math
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    AnalysisSettings,
    PhaseDensity,
    compute_metrics,
    phase_diff_density,
    phase_series,
)
from .bifurcation import MODES, branch_diagram, two_parameter_branches, write_branches_csv
from .errors import BadCutoff, EmptyRange, HopfSyncError, ParameterError
from .integrator import SimConfig, integrate, trial_streams
from .model import ModelParams
from .output import write_csv, write_json
from .presets import NAMES as PRESET_NAMES
from .presets import deep_merge, get_preset
from .sweep import (
    SweepAxis,
    SweepGrid,
    default_workers,
    find_optimum,
    nested_optima,
    snr_curve,
    sweep,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

# rough single-core cost of one 100-time-unit trial, for --dry-run estimates
SECONDS_PER_STEP = 7e-7


class ConfigError(Exception):
    """Malformed or inconsistent run configuration."""


def _defaults() -> dict:
    sim = dataclasses.asdict(SimConfig())
    return {
        "model": ModelParams().to_dict(),
        "sim": sim,
        "analysis": AnalysisSettings().to_dict(),
        "simulate": {"trials": 1},
        "bifurcate": {
            "mode": "symmetric",
            "d_min": 0.0,
            "d_max": 0.3,
            "d_num": 31,
            "fixed": 0.05,
            "lambda0_min": -1.0,
            "lambda0_max": 1.0,
            "lambda0_num": 41,
        },
        "snr": {"min": 0.01, "max": 5.0, "num": 15, "n_trials": 20},
        "sweep": {"axes": [], "inner": [], "n_trials": 50},
        "output": {"dir": "hopfsync-out", "figures": False},
    }


DEFAULTS = _defaults()
_OPTIONAL = {("analysis", "cutoff")}  # leaves whose default is None
_LIST_LEAVES = {("sweep", "axes"), ("sweep", "inner")}
_AXIS_KEYS = {"param", "values", "min", "max", "num", "spacing"}


def _leaf_type(section, key):
    if (section, key) in _OPTIONAL:
        return float
    v = DEFAULTS[section][key]
    if isinstance(v, bool):
        return bool
    return type(v)


def _check_types(cfg: dict, origin: str) -> None:
    """Reject unknown keys and wrongly typed leaves."""
    if not isinstance(cfg, dict):
        raise ConfigError(f"{origin}: top level must be a JSON object")
    for section, body in cfg.items():
        if section not in DEFAULTS:
            raise ConfigError(f"{origin}: unknown section {section!r}")
        if not isinstance(body, dict):
            raise ConfigError(f"{origin}: section {section!r} must be an object")
        for key, value in body.items():
            if key not in DEFAULTS[section]:
                raise ConfigError(f"{origin}: unknown key {section}.{key}")
            if (section, key) in _LIST_LEAVES:
                if not isinstance(value, list):
                    raise ConfigError(f"{origin}: {section}.{key} must be a list of axis objects")
                for ax in value:
                    if not isinstance(ax, dict):
                        raise ConfigError(f"{origin}: axis entries must be objects")
                    bad = set(ax) - _AXIS_KEYS
                    if bad:
                        raise ConfigError(f"{origin}: unknown axis key(s) {sorted(bad)}")
                continue
            if value is None and (section, key) in _OPTIONAL:
                continue
            want = _leaf_type(section, key)
            ok = isinstance(value, want) and not (want is not bool and isinstance(value, bool))
            if want is float and isinstance(value, int) and not isinstance(value, bool):
                ok = True
            if not ok:
                raise ConfigError(f"{origin}: {section}.{key} must be {want.__name__}, got {value!r}")


def load_config_file(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    _check_types(cfg, str(path))
    return cfg


def resolve_config(preset=None, full=False, config_path=None, overrides=None) -> dict:
    """Merge defaults < preset < config file < flag overrides."""
    cfg = copy.deepcopy(DEFAULTS)
    if preset is not None:
        cfg = deep_merge(cfg, get_preset(preset, full))
    if config_path is not None:
        cfg = deep_merge(cfg, load_config_file(config_path))
    if overrides:
        _check_types(overrides, "command line")
        cfg = deep_merge(cfg, overrides)
    return cfg


def parse_axis(spec) -> SweepAxis:
    """Axis from a config object or ``param=lo:hi:num[:log]`` / ``param=v1,v2,...``."""
    if isinstance(spec, str):
        if "=" not in spec:
            raise ConfigError(f"axis {spec!r}: expected param=lo:hi:num[:spacing] or param=v1,v2,...")
        param, rhs = spec.split("=", 1)
        try:
            if ":" in rhs:
                parts = rhs.split(":")
                if len(parts) not in (3, 4):
                    raise ValueError
                spacing = parts[3] if len(parts) == 4 else "linear"
                spec = {"param": param, "min": float(parts[0]), "max": float(parts[1]),
                        "num": int(parts[2]), "spacing": spacing}
            else:
                spec = {"param": param, "values": [float(v) for v in rhs.split(",")]}
        except ValueError:
            raise ConfigError(f"axis {param}: cannot parse {rhs!r}") from None
    spacing = spec.get("spacing", "linear")
    if "values" in spec:
        if {"min", "max", "num"} & set(spec):
            raise ConfigError(f"axis {spec.get('param')}: give either values or min/max/num")
        return SweepAxis(spec.get("param"), tuple(spec["values"]), spacing)
    try:
        lo, hi, num = float(spec["min"]), float(spec["max"]), int(spec["num"])
    except KeyError as exc:
        raise ConfigError(f"axis {spec.get('param')}: missing {exc.args[0]}") from None
    if not lo < hi and num > 1:
        raise EmptyRange(f"axis {spec.get('param')}: empty range [{lo}, {hi}]")
    return SweepAxis.span(spec.get("param"), lo, hi, num, spacing)


@dataclasses.dataclass
class Run:
    """Validated, ready-to-execute configuration."""

    raw: dict
    model: ModelParams
    sim: SimConfig
    analysis: AnalysisSettings
    axes: tuple
    inner: tuple
    out: Path
    figures: bool


def validate(cfg: dict) -> Run:
    model = ModelParams(**cfg["model"])
    sim = SimConfig(**cfg["sim"])
    analysis = AnalysisSettings(**cfg["analysis"])
    nyquist = math.pi / sim.dt
    if analysis.cutoff_for(model.omega0) >= nyquist:
        raise BadCutoff(f"filter cutoff {analysis.cutoff_for(model.omega0)} >= Nyquist {nyquist:.6g}")
    axes = tuple(parse_axis(a) for a in cfg["sweep"]["axes"])
    inner = tuple(parse_axis(a) for a in cfg["sweep"]["inner"])
    for sec, key in (("simulate", "trials"), ("snr", "n_trials"), ("sweep", "n_trials"), ("snr", "num"),
                     ("bifurcate", "d_num"), ("bifurcate", "lambda0_num")):
        if cfg[sec][key] < 1:
            raise ParameterError(f"{sec}.{key} must be >= 1")
    return Run(cfg, model, sim, analysis, axes, inner, Path(cfg["output"]["dir"]), bool(cfg["output"]["figures"]))


# ---------------------------------------------------------------- argument parsing

# dotted leaf -> extra aliases
ALIASES = {
    "model.lambda0": ["--lambda0"],
    "model.alpha": ["--alpha"],
    "model.gamma": ["--gamma"],
    "model.omega0": ["--omega0"],
    "model.omega1": ["--omega1"],
    "model.d1": ["--d1"],
    "model.d2": ["--d2"],
    "model.delta1": ["--delta1"],
    "model.delta2": ["--delta2"],
    "sim.dt": ["--dt"],
    "sim.t_end": ["--t-end"],
    "sim.t_burn": ["--t-burn"],
    "sim.seed": ["--seed"],
    "analysis.cutoff": ["--cutoff"],
    "analysis.n_bins": ["--n-bins"],
    "output.dir": ["--out", "-o"],
    "output.figures": ["--figures"],
    "simulate.trials": ["--trials"],
    "bifurcate.mode": ["--mode"],
    "bifurcate.d_min": ["--d-min"],
    "bifurcate.d_max": ["--d-max"],
    "bifurcate.d_num": ["--d-num"],
    "bifurcate.fixed": ["--fixed"],
    "bifurcate.lambda0_num": ["--lambda0-num"],
    "snr.num": ["--delta-num"],
    "snr.n_trials": ["--n-trials"],
    "sweep.n_trials": ["--n-trials"],
}

COMMON_SECTIONS = ("model", "sim", "analysis", "output")
COMMAND_SECTIONS = {
    "simulate": ("simulate",),
    "bifurcate": ("bifurcate",),
    "snr": ("snr",),
    "sweep": ("sweep",),
    "optimum": ("sweep",),
}


def _parse_bool(text):
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _range(text):
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numeric lo:hi, got {text!r}") from None


def _add_leaves(p, section):
    for key in DEFAULTS[section]:
        if (section, key) in _LIST_LEAVES:
            continue
        dotted = f"{section}.{key}"
        typ = _leaf_type(section, key)
        names = [f"--{dotted}"] + ALIASES.get(dotted, [])
        kw = dict(dest=dotted, default=argparse.SUPPRESS, help=f"override {dotted}")
        if typ is bool:
            p.add_argument(*names, nargs="?", const=True, type=_parse_bool, metavar="BOOL", **kw)
        elif dotted == "bifurcate.mode":
            p.add_argument(*names, choices=MODES + ("diagram",), **kw)
        else:
            p.add_argument(*names, type=typ, metavar=typ.__name__.upper(), **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hopfsync", description="Coupled stochastic Hopf oscillators.")
    parser.add_argument("--version", action="version", version=f"hopfsync {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "simulate": "integrate trials and write trajectory, metrics and phase-difference density",
        "bifurcate": "Hopf branches over a coupling grid, or an amplitude diagram over lambda0",
        "snr": "single-oscillator SNR curve over a log noise grid",
        "sweep": "ensemble-averaged metrics over a 1-2 axis parameter grid",
        "optimum": "noise optimum of a sweep, or per-cell optima over an outer grid",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", "-c", help="JSON config file")
        p.add_argument("--preset", choices=PRESET_NAMES, help="start from a ready-made experiment preset")
        p.add_argument("--full-fidelity", action="store_true", help="use the preset's dense grids and 200 trials")
        p.add_argument("--threads", type=int, help="worker threads (default: $HOPFSYNC_THREADS or all cores)")
        p.add_argument("--dry-run", action="store_true", help="print the planned work and exit")
        p.add_argument("--quiet", "-q", action="store_true", help="no progress counter")
        for section in COMMON_SECTIONS + COMMAND_SECTIONS[name]:
            _add_leaves(p, section)
        if name == "bifurcate":
            p.add_argument("--lambda0-range", type=_range, metavar="LO:HI", help="lambda0 interval")
        if name == "snr":
            p.add_argument("--delta-range", type=_range, metavar="LO:HI", help="noise interval")
        if name in ("sweep", "optimum"):
            p.add_argument("--axis", action="append", metavar="SPEC",
                           help="sweep axis param=lo:hi:num[:log] or param=v1,v2 (repeatable; replaces config axes)")
        if name == "optimum":
            p.add_argument("--inner-axis", action="append", metavar="SPEC",
                           help="inner noise axis; enables per-cell optima over the outer axes")
    return parser


_NEG_VALUE = re.compile(r"^-[\d.]")


def _join_negative_values(argv):
    """Let option values such as ``-1:1`` or ``-0.5`` follow their flag."""
    out = []
    for tok in argv:
        prev = out[-1] if out else ""
        if _NEG_VALUE.match(tok) and prev.startswith("-") and "=" not in prev and not _NEG_VALUE.match(prev):
            out[-1] = f"{prev}={tok}"
        else:
            out.append(tok)
    return out


def overrides_from_args(ns) -> dict:
    over: dict = {}
    for dest, value in vars(ns).items():
        if "." in dest:
            section, key = dest.split(".", 1)
            over.setdefault(section, {})[key] = value
    lr = getattr(ns, "lambda0_range", None)
    if lr is not None:
        over.setdefault("bifurcate", {}).update(lambda0_min=lr[0], lambda0_max=lr[1])
    dr = getattr(ns, "delta_range", None)
    if dr is not None:
        over.setdefault("snr", {}).update(min=dr[0], max=dr[1])
    if getattr(ns, "axis", None):
        over.setdefault("sweep", {})["axes"] = [parse_axis(a).to_dict() for a in ns.axis]
    if getattr(ns, "inner_axis", None):
        over.setdefault("sweep", {})["inner"] = [parse_axis(a).to_dict() for a in ns.inner_axis]
    return over


# ---------------------------------------------------------------- commands


def _metadata(run: Run, command: str, **extra) -> dict:
    cfg = copy.deepcopy(run.raw)
    cfg["sweep"]["axes"] = [a.to_dict() for a in run.axes]
    cfg["sweep"]["inner"] = [a.to_dict() for a in run.inner]
    meta = {
        "version": __version__,
        "command": command,
        "seed": run.sim.seed,
        "filter_cutoff": run.analysis.cutoff_for(run.model.omega0),
        "config": cfg,
        "seeding": "trial k uses Philox streams keyed (seed, k, oscillator)",
    }
    meta.update(extra)
    return meta


def _log(msg, quiet=False):
    if not quiet:
        print(msg, file=sys.stderr)


def _counter(label, quiet):
    if quiet:
        return None

    def progress(done, total):
        print(f"\r{label} {done}/{total}", end="\n" if done == total else "", file=sys.stderr, flush=True)

    return progress


def _trial_work(run: Run, n_trials: int) -> tuple[int, float]:
    steps = n_trials * run.sim.n_steps
    return steps, steps * SECONDS_PER_STEP


def _lin(lo, hi, num):
    return [lo] if num == 1 else list(np.linspace(lo, hi, num))


def _geom(lo, hi, num):
    if lo <= 0 or hi <= 0:
        raise ParameterError("noise range must be positive for a log grid")
    if num > 1 and not lo < hi:
        raise EmptyRange(f"empty noise range [{lo}, {hi}]")
    return [lo] if num == 1 else list(np.geomspace(lo, hi, num))


def cmd_simulate(run: Run, args, workers) -> int:
    n = run.raw["simulate"]["trials"]
    if args.dry_run:
        steps, sec = _trial_work(run, n)
        print(f"simulate: 1 cell, {n} trial(s), {steps} Euler steps, ~{sec:.1f} s single-threaded")
        return EXIT_OK
    run.out.mkdir(parents=True, exist_ok=True)
    rows, densities, first = [], [], None
    for k in range(n):
        traj = integrate(run.model, run.sim, trial_streams(run.sim.seed, k))
        if k == 0:
            first = traj
            traj.to_csv(run.out / "trajectory.csv")
        m = compute_metrics(traj, run.model.omega0, run.analysis, with_beta=True)
        rows.append([m.abs_dphi, m.R, m.rho, m.beta])
        densities.append(phase_diff_density(phase_series(traj, run.model.omega0, run.analysis), run.analysis.n_bins))
    write_csv(run.out / "metrics.csv", ["abs_dphi", "R", "rho", "beta"], rows)
    dens = PhaseDensity(densities[0].edges, np.mean([d.density for d in densities], axis=0))
    write_csv(run.out / "density.csv", ["bin_center", "density"], zip(dens.centers, dens.density))
    write_json(run.out / "metadata.json", _metadata(run, "simulate", n_bins=run.analysis.n_bins))
    if run.figures:
        from .plotting import plot_density, plot_trajectory

        plot_trajectory(first, run.out / "trajectory.png")
        plot_density(dens, run.out / "density.png")
    _log(f"wrote {run.out}/trajectory.csv, metrics.csv, density.csv", args.quiet)
    return EXIT_OK


def cmd_bifurcate(run: Run, args, workers) -> int:
    b = run.raw["bifurcate"]
    lam_range = (b["lambda0_min"], b["lambda0_max"])
    if not lam_range[0] < lam_range[1]:
        raise EmptyRange(f"empty lambda0 range [{lam_range[0]}, {lam_range[1]}]")
    mode = b["mode"]
    if mode == "diagram":
        grid = _lin(*lam_range, b["lambda0_num"])
        if args.dry_run:
            print(f"bifurcate diagram: {len(grid)} lambda0 values, one deterministic run each")
            return EXIT_OK
        run.out.mkdir(parents=True, exist_ok=True)
        diag = branch_diagram(run.model, grid)
        diag.to_csv(run.out / "diagram.csv")
        write_json(run.out / "metadata.json", _metadata(run, "bifurcate"))
        if run.figures:
            from .plotting import plot_diagram

            plot_diagram(diag, run.out / "diagram.png")
        _log(f"wrote {run.out}/diagram.csv", args.quiet)
        return EXIT_OK
    if not b["d_min"] <= b["d_max"]:
        raise EmptyRange(f"empty coupling range [{b['d_min']}, {b['d_max']}]")
    values = _lin(b["d_min"], b["d_max"], b["d_num"])
    if args.dry_run:
        print(f"bifurcate {mode}: {len(values)} coupling values, closed-form eigenvalues")
        return EXIT_OK
    hb1, hb2 = two_parameter_branches(mode, values, b["fixed"], run.model, lam_range)
    run.out.mkdir(parents=True, exist_ok=True)
    write_branches_csv(run.out / "branches.csv", mode, hb1, hb2)
    write_json(run.out / "metadata.json", _metadata(run, "bifurcate"))
    if run.figures:
        from .plotting import plot_branches

        plot_branches(hb1, hb2, mode, run.out / "branches.png")
    _log(f"wrote {run.out}/branches.csv", args.quiet)
    return EXIT_OK


def cmd_snr(run: Run, args, workers) -> int:
    s = run.raw["snr"]
    deltas = _geom(s["min"], s["max"], s["num"])
    if args.dry_run:
        steps, sec = _trial_work(run, len(deltas) * s["n_trials"])
        print(f"snr: {len(deltas)} noise levels x {s['n_trials']} trials, {steps} Euler steps, ~{sec:.1f} s single-threaded")
        return EXIT_OK
    rows = snr_curve(deltas, run.model, run.sim, s["n_trials"], run.analysis, workers)
    run.out.mkdir(parents=True, exist_ok=True)
    write_csv(run.out / "snr.csv", ["delta", "beta"], rows)
    write_json(run.out / "metadata.json", _metadata(run, "snr"))
    if run.figures:
        from .plotting import plot_snr

        plot_snr(rows, run.out / "snr.png")
    _log(f"wrote {run.out}/snr.csv", args.quiet)
    return EXIT_OK


def _grid(run: Run, axes) -> SweepGrid:
    if not axes:
        raise ConfigError("this command needs sweep.axes (config file, preset or --axis)")
    return SweepGrid(axes, run.model, run.sim, run.raw["sweep"]["n_trials"], run.analysis)


def _dry_run_grid(label, n_cells, n_trials, run):
    steps, sec = _trial_work(run, n_cells * n_trials)
    print(f"{label}: {n_cells} cells x {n_trials} trials, {steps} Euler steps, ~{sec:.1f} s single-threaded")


def _write_sweep(res, run, figures_metric="abs_dphi"):
    res.metadata["config"] = _metadata(run, "sweep")["config"]
    res.to_csv(run.out / "sweep.csv")
    res.write_sidecar(run.out / "sweep.json")
    if run.figures:
        from .plotting import plot_sweep

        plot_sweep(res, run.out / "sweep.png", figures_metric)


def cmd_sweep(run: Run, args, workers) -> int:
    grid = _grid(run, run.axes)
    if args.dry_run:
        _dry_run_grid("sweep", grid.n_cells, grid.n_trials, run)
        return EXIT_OK
    res = sweep(grid, workers, progress=_counter("cell", args.quiet))
    run.out.mkdir(parents=True, exist_ok=True)
    _write_sweep(res, run)
    n_bad = sum(not c.ok for c in res.cells)
    _log(f"wrote {run.out}/sweep.csv ({n_bad} failed cell(s))", args.quiet)
    if n_bad == len(res.cells):
        print("error: every sweep cell failed; see sweep.json", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_optimum(run: Run, args, workers) -> int:
    if not run.inner:
        grid = _grid(run, run.axes)
        if args.dry_run:
            _dry_run_grid("optimum", grid.n_cells, grid.n_trials, run)
            return EXIT_OK
        res = sweep(grid, workers, progress=_counter("cell", args.quiet))
        run.out.mkdir(parents=True, exist_ok=True)
        _write_sweep(res, run)
        report = find_optimum(res)  # AllCellsFailed -> exit 3
        write_json(run.out / "optimum.json", {**report.to_dict(), "metadata": res.metadata})
        print(json.dumps(report.to_dict(), sort_keys=True))
        return EXIT_OK

    outer = _grid(run, run.axes)
    inner = SweepGrid(run.inner, run.model, run.sim, run.raw["sweep"]["n_trials"], run.analysis)
    if args.dry_run:
        _dry_run_grid("optimum (nested)", outer.n_cells * inner.n_cells, inner.n_trials, run)
        return EXIT_OK
    rows = nested_optima(run.axes, run.inner, run.model, run.sim, inner.n_trials, run.analysis, workers,
                         progress=_counter("outer cell", args.quiet))
    run.out.mkdir(parents=True, exist_ok=True)
    params = [a.param for a in run.axes]
    header = params + ["min_abs_dphi", "delta1", "delta2", "optimal_noise_ratio", "noise_sum"]
    csv_rows = []
    for values, rep, _ in rows:
        head = [values[p] for p in params]
        if rep is None:
            csv_rows.append(head + [None] * 5)
        else:
            csv_rows.append(head + [rep.min_abs_dphi, rep.argmin["delta1"], rep.argmin["delta2"],
                                    rep.optimal_noise_ratio, rep.noise_sum])
    write_csv(run.out / "optima.csv", header, csv_rows)
    write_json(
        run.out / "optima.json",
        {
            "rows": [
                {"outer": values, "report": None if rep is None else rep.to_dict(), "error": err}
                for values, rep, err in rows
            ],
            "metadata": _metadata(run, "optimum", n_bins=run.analysis.n_bins),
        },
    )
    if run.figures:
        from .plotting import plot_optima_map

        plot_optima_map(rows, run.axes, run.out / "optima.png")
    _log(f"wrote {run.out}/optima.csv", args.quiet)
    if all(rep is None for _, rep, _ in rows):
        print("error: every outer cell failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "bifurcate": cmd_bifurcate,
    "snr": cmd_snr,
    "sweep": cmd_sweep,
    "optimum": cmd_optimum,
}

CONFIG_ERRORS = (ConfigError, ParameterError, EmptyRange, BadCutoff)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        cfg = resolve_config(args.preset, args.full_fidelity, args.config, overrides_from_args(args))
        run = validate(cfg)
        if args.threads is not None and args.threads < 1:
            raise ParameterError("--threads must be >= 1")
        workers = args.threads if args.threads is not None else default_workers()
        code = COMMANDS[args.command](run, args, workers)
    except CONFIG_ERRORS as exc:
        print(f"hopfsync: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HopfSyncError as exc:
        print(f"hopfsync: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TypeError as exc:  # e.g. wrong field names reaching a dataclass
        print(f"hopfsync: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _log(f"done in {time.perf_counter() - t0:.1f} s", args.quiet or args.dry_run)
    return code


if __name__ == "__main__":
    sys.exit(main())
