"""Command line front end.

Subcommands
-----------
run       execute a configuration (file or shipped preset)
sweep     fan a configuration out over a one-dimensional parameter grid
validate  parse and check a configuration without running anything
presets   list shipped presets, or print one as JSON
resume    continue a checkpointed run in its existing directory

Every run writes ``results/<run-id>/`` with ``config.echo.json``, the
per-cycle ``traces.csv``, optional ``fields_XXXX.vtk`` snapshots and a
``summary.json``.  Exit codes: 0 success, 2 configuration error, 3 solver
failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import copy
import csv
import json
import pathlib
import sys
import time

import numpy as np

from .config import (ConfigError, ScenarioConfig, emit_config, load_preset,
                     parse_config, preset_names)
from .homog import run_sn_point
from .material import uptake_concentration
from .mesh import MeshError
from .post import NoStableGrowthError, growth_rate, write_paris_csv
from .solver import SolverError, StaggerError, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4


class _Fail(Exception):
    """Internal: abort with a specific exit code."""

    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# shared plumbing

def _load_cfg(args) -> ScenarioConfig:
    if getattr(args, "preset", None):
        if args.config is not None:
            raise _Fail(EXIT_CONFIG, "give either a config file or --preset")
        return parse_config(load_preset(args.preset))
    if args.config is None:
        raise _Fail(EXIT_CONFIG, "a config file or --preset is required")
    try:
        text = pathlib.Path(args.config).read_text()
    except OSError as e:
        raise _Fail(EXIT_IO, f"cannot read {args.config}: {e}") from e
    return parse_config(text)


def _run_dir(cfg: ScenarioConfig, out_root) -> pathlib.Path:
    name = cfg.data["output"]["directory"]
    if not name:
        name = cfg.kind.replace("_", "-") + time.strftime("-%Y%m%d-%H%M%S")
    return pathlib.Path(out_root or "results") / name


def _json_default(x):
    if isinstance(x, (np.integer, np.floating)):
        return x.item()
    raise TypeError(f"not serialisable: {type(x)}")


def _write_summary(outdir, summary):
    with open(outdir / "summary.json", "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True,
                  default=_json_default)
        f.write("\n")


def _material_label(cfg):
    return cfg.data["material"].get("preset", "custom")


def _env_label(cfg):
    env = cfg.data["environment"]
    if env.get("preset"):
        return env["preset"]
    if env.get("pressure") is not None:
        return f"H2 {env['pressure']:g} MPa"
    cenv = env.get("Cenv", 0.0)
    return "inert" if cenv == 0 else f"Cenv={cenv:g}"


# ---------------------------------------------------------------------------
# single runs

def _run_smooth(cfg: ScenarioConfig, outdir: pathlib.Path):
    spec = cfg.smooth_spec()
    t0 = time.perf_counter()
    n_f = run_sn_point(spec)
    wall = time.perf_counter() - t0
    env = spec.env
    conc = (uptake_concentration(env, spec.params, sigmaH=spec.peak / 3.0)
            if env.pressure is not None else env.Cenv)
    runout = n_f > spec.n_cycles_max
    with open(outdir / "sn.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["material", "environment", "stress_amp_MPa", "N_f"])
        w.writerow([_material_label(cfg), _env_label(cfg),
                    spec.stress_amplitude, n_f])
    _write_summary(outdir, {
        "scenario": cfg.kind,
        "stress_amplitude_MPa": spec.stress_amplitude,
        "R": spec.R,
        "C_wtppm": conc,
        "N_f": int(n_f),
        "runout": bool(runout),
        "wall_s": wall,
    })
    tag = "runout >" if runout else "N_f ="
    print(f"[done] smooth S-N {_material_label(cfg)} {_env_label(cfg)} "
          f"sa={spec.stress_amplitude:g} MPa: {tag} {n_f}  -> {outdir}")
    return EXIT_OK


def _write_traces(outdir, res, keep_before=None):
    path = outdir / "traces.csv"
    old = []
    if keep_before is not None and path.exists():
        with open(path, newline="") as f:
            old = [r for r in list(csv.reader(f))[1:]
                   if r and int(r[0]) < keep_before]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["cycle", "delta_a_mm", "reaction_peak", "reaction_valley"])
        w.writerows(old)
        for row in zip(res.cycles, res.delta_a, res.reaction_peak,
                       res.reaction_valley):
            w.writerow([int(row[0]), *(f"{v:.10g}" for v in row[1:])])
    if res.probe_C:
        names = sorted(res.probe_C)
        with open(outdir / "probes.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["time_s", "load_level", *names])
            for i, t in enumerate(res.t_inc):
                w.writerow([f"{t:.10g}", f"{res.level_inc[i]:.10g}",
                            *(f"{res.probe_C[k][i]:.10g}" for k in names)])


def _run_fe(cfg: ScenarioConfig, outdir: pathlib.Path, n_cycles=None,
            resume=None):
    scn = cfg.make_scenario()
    res = run_scenario(scn, cfg.solver_config(), outdir=str(outdir),
                       resume=resume, n_cycles=n_cycles,
                       stop_delta_a=cfg.data["output"]["stop_delta_a"])
    if not (resume and res.cycles.size == 0):
        keep = int(res.cycles[0]) if resume and res.cycles.size else None
        _write_traces(outdir, res, keep_before=keep)
    n_run = int(res.cycles[-1]) if res.cycles.size else 0
    da = float(res.delta_a[-1]) if res.delta_a.size else 0.0
    summary = {
        "scenario": cfg.kind,
        "cycles_run": n_run,
        "failure_cycle": res.failure_cycle,
        "delta_a_final_mm": da,
        **{k: res.info[k] for k in
           ("wall_s", "n_factor", "n_solve", "clamp_events")},
    }
    _write_summary(outdir, summary)
    fc = res.failure_cycle
    status = f"failed at cycle {fc}" if fc is not None else "no failure"
    print(f"[done] {cfg.kind}: {n_run} cycles, delta_a={da:.4g} mm, "
          f"{status}  -> {outdir}")
    return EXIT_OK


def _cmd_run(args):
    cfg = _load_cfg(args)
    outdir = _run_dir(cfg, args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.echo.json").write_text(emit_config(cfg))
    if cfg.kind == "smooth_sn":
        return _run_smooth(cfg, outdir)
    return _run_fe(cfg, outdir, n_cycles=args.cycles)


def _cmd_validate(args):
    cfg = _load_cfg(args)
    if args.echo:
        sys.stdout.write(emit_config(cfg))
    else:
        print(f"ok: valid {cfg.kind} configuration")
    return EXIT_OK


def _cmd_presets(args):
    if args.name:
        sys.stdout.write(load_preset(args.name))
        return EXIT_OK
    for name in preset_names():
        desc = json.loads(load_preset(name)).get("description", "")
        print(f"{name:30s} {desc}")
    return EXIT_OK


def _cmd_resume(args):
    rundir = pathlib.Path(args.rundir)
    echo = rundir / "config.echo.json"
    ckpt = rundir / "checkpoint.npz"
    for p in (echo, ckpt):
        if not p.exists():
            raise _Fail(EXIT_IO, f"cannot resume: {p} not found")
    cfg = parse_config(echo.read_text())
    if cfg.kind == "smooth_sn":
        raise _Fail(EXIT_CONFIG, "smooth_sn runs are not checkpointed")
    n_cycles = None
    if args.cycles is not None:
        # --cycles counts onward from the checkpoint, not from cycle one
        with np.load(ckpt) as z:
            n_cycles = int(z["cycle"]) + args.cycles
    return _run_fe(cfg, rundir, n_cycles=n_cycles, resume=str(ckpt))


# ---------------------------------------------------------------------------
# sweeps

def _set_path(doc, dotted, value):
    keys = dotted.split(".")
    node = doc
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--grid: {dotted} does not address a field")
    node[keys[-1]] = value


def _parse_grid(text):
    if "=" not in text:
        raise ConfigError("--grid must look like block.key=v1,v2,...")
    key, _, rest = text.partition("=")
    try:
        values = [json.loads(v) for v in rest.split(",") if v.strip()]
    except json.JSONDecodeError as e:
        raise ConfigError(f"--grid: bad value list: {e}") from e
    if not values:
        raise ConfigError("--grid: no values given")
    return key.strip(), values


def _fmt_value(v):
    return f"{v:g}" if isinstance(v, (int, float)) else str(v)


def _sweep_point(doc_json, outdir, n_cycles):
    """Run one grid point in its own directory (process-pool safe)."""
    cfg = parse_config(doc_json)
    outdir = pathlib.Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.echo.json").write_text(emit_config(cfg))
    if cfg.kind == "smooth_sn":
        _run_smooth(cfg, outdir)
    else:
        _run_fe(cfg, outdir, n_cycles=n_cycles)
    with open(outdir / "summary.json") as f:
        return json.load(f)


def _cmd_sweep(args):
    cfg = _load_cfg(args)
    key, values = _parse_grid(args.grid)
    root = _run_dir(cfg, args.out)
    root.mkdir(parents=True, exist_ok=True)

    jobs = []
    for v in values:
        doc = copy.deepcopy(cfg.data)
        _set_path(doc, key, v)
        point = parse_config(json.dumps(doc))   # re-validate the grid point
        sub = root / f"{key.split('.')[-1]}={_fmt_value(v)}"
        jobs.append((emit_config(point), str(sub), args.cycles))

    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(args.jobs) as pool:
            summaries = list(pool.map(_sweep_point, *zip(*jobs)))
    else:
        summaries = [_sweep_point(*j) for j in jobs]

    _aggregate_sweep(cfg, key, values, summaries, root)
    print(f"[done] sweep {key} over {len(values)} points  -> {root}")
    return EXIT_OK


def _aggregate_sweep(cfg, key, values, summaries, root):
    with open(root / "sweep.csv", "w", newline="") as f:
        w = csv.writer(f)
        if cfg.kind == "smooth_sn":
            w.writerow([key, "N_f", "runout", "C_wtppm"])
            for v, s in zip(values, summaries):
                w.writerow([v, s["N_f"], int(s["runout"]), s["C_wtppm"]])
        else:
            w.writerow([key, "cycles_run", "failure_cycle",
                        "delta_a_final_mm"])
            for v, s in zip(values, summaries):
                fc = s["failure_cycle"]
                w.writerow([v, s["cycles_run"],
                            "" if fc is None else fc,
                            f"{s['delta_a_final_mm']:.10g}"])
    if cfg.kind.endswith("growth") and key == "load.amplitude":
        _paris_from_sweep(cfg, values, root)


def _paris_from_sweep(cfg, values, root):
    dks, rates = [], []
    for v in values:
        sub = root / f"amplitude={_fmt_value(v)}"
        rows = np.genfromtxt(sub / "traces.csv", delimiter=",",
                             names=True)
        from .post import CrackTrace
        trace = CrackTrace(np.atleast_1d(rows["cycle"]),
                           np.atleast_1d(rows["delta_a_mm"]))
        try:
            rate = growth_rate(trace)
        except NoStableGrowthError:
            continue
        dks.append(v)
        rates.append(rate)
    if dks:
        conc = cfg.data["environment"]["Cenv"]
        write_paris_csv(root / "paris.csv", np.asarray(dks),
                        np.asarray(rates), np.full(len(dks), conc))


# ---------------------------------------------------------------------------
# entry point

def _build_parser():
    p = argparse.ArgumentParser(
        prog="hydrofatigue",
        description="Phase-field fatigue with hydrogen embrittlement")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", nargs="?", default=None,
                        help="path to a JSON run configuration")
        sp.add_argument("--preset", metavar="NAME",
                        help="use a shipped preset instead of a file")

    run = sub.add_parser("run", help="execute one configuration")
    common(run)
    run.add_argument("--out", metavar="DIR", default=None,
                     help="results root (default: results/)")
    run.add_argument("--cycles", type=int, default=None,
                     help="override the cycle budget")
    run.set_defaults(func=_cmd_run)

    sw = sub.add_parser("sweep", help="run a one-parameter grid")
    common(sw)
    sw.add_argument("--grid", required=True, metavar="KEY=V1,V2,...",
                    help="dotted config key and comma-separated values")
    sw.add_argument("--out", metavar="DIR", default=None)
    sw.add_argument("--cycles", type=int, default=None)
    sw.add_argument("--jobs", type=int, default=1,
                    help="worker processes (default 1)")
    sw.set_defaults(func=_cmd_sweep)

    va = sub.add_parser("validate", help="check a configuration")
    common(va)
    va.add_argument("--echo", action="store_true",
                    help="print the resolved configuration")
    va.set_defaults(func=_cmd_validate)

    pr = sub.add_parser("presets", help="list shipped presets")
    pr.add_argument("name", nargs="?", default=None,
                    help="print this preset as JSON")
    pr.set_defaults(func=_cmd_presets)

    re = sub.add_parser("resume", help="continue a checkpointed run")
    re.add_argument("rundir", help="existing results/<run-id> directory")
    re.add_argument("--cycles", type=int, default=None,
                    help="how many further cycles to run")
    re.set_defaults(func=_cmd_resume)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Fail as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (ConfigError, MeshError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, StaggerError) as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
