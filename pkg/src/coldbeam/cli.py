"""Batch command-line front end.

One subcommand per experiment: ``beam`` (straight drop onto the cavity),
``deflect`` (molasses deflection), ``sweep`` (parameter grid), ``lens``
(imbalance map and focusing run), ``finesse`` (resonator calculator).
Runs write a manifest (full resolved config), a summary JSON with stable
key order, and CSV tables; outputs are byte-identical for identical
(config, seed), regardless of thread count.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, parse_config
from .kernels import layout as L
from .kernels import build_params, trace_atom
from .lens import imbalance_map, simulate_lens
from .presets import PRESETS, get_preset
from .resonator import finesse as cavity_finesse
from .resonator import output_fraction
from .sweeps import SweepSpec, mean_polar_angle, run_sweep, transverse_temperature
from .transport import run_beam_simulation

_DEFAULT_PRESET = {
    "beam": "current_setup",
    "deflect": "deflection",
    "sweep": "sweep",
    "lens": "lens_tight",
}


def _write_atomic(path: str, data: str):
    tmp = path + ".tmp"
    with open(tmp, "w") as f:
        f.write(data)
    os.replace(tmp, path)


def _write_json(path: str, obj):
    _write_atomic(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _write_csv(path: str, header: str, rows):
    lines = [header]
    lines += [",".join(repr(float(v)) for v in row) for row in rows]
    _write_atomic(path, "\n".join(lines) + "\n")


def _load_config(args, mode: str) -> tuple[RunConfig, str | None]:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    preset_name = None
    if args.config:
        with open(args.config) as f:
            text = f.read()
    else:
        preset_name = args.preset or _DEFAULT_PRESET[mode]
        text = get_preset(preset_name)
    cfg = parse_config(text, mode=mode)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.atoms is not None:
        cfg.atoms = args.atoms
    if args.threads is not None:
        cfg.threads = args.threads
    if getattr(args, "trajectories", None) is not None:
        cfg.trajectories = args.trajectories
    return cfg, preset_name


def _manifest(cfg: RunConfig, preset_name: str | None) -> dict:
    return {
        "tool": "coldbeam",
        "version": __version__,
        "preset": preset_name,
        "config": cfg.resolved_dict(),
    }


def _write_trajectories(path: str, cfg: RunConfig, n_trace: int):
    """Trace the first atoms of the run on the pure kernel (bit-identical)."""
    params = build_params(
        cfg.constants,
        cfg.source,
        list(cfg.molasses.beams) if cfg.molasses is not None else [],
        cfg.engine,
        cavity=cfg.cavity,
        box=cfg.chamber.bounds(),
        step_cap=cfg.step_cap,
        seed=cfg.seed,
    )
    rows = []
    stride = cfg.trajectory_stride
    for i in range(n_trace):
        _, trace = trace_atom(params, i)
        kept = trace[::stride]
        if trace and (len(trace) - 1) % stride:
            kept = kept + [trace[-1]]
        rows += [(i,) + r for r in kept]
    _write_csv(path, "atom_id,t,x,y,z,vx,vy,vz", rows)


def _run_beamlike(cfg: RunConfig, out_dir: str, preset_name, strict: bool) -> int:
    t0 = time.perf_counter()
    result = run_beam_simulation(
        cfg.source,
        molasses=cfg.molasses,
        cavity=cfg.cavity,
        chamber=cfg.chamber,
        n_atoms=cfg.atoms,
        engine=cfg.engine,
        constants=cfg.constants,
        seed=cfg.seed,
        threads=cfg.threads,
        step_cap=cfg.step_cap,
        count_step_cap_as_miss=cfg.count_step_cap_as_miss,
    )
    elapsed = time.perf_counter() - t0

    summary = {
        "mode": cfg.mode,
        "seed": cfg.seed,
        "engine": cfg.engine,
        **result.summary_dict(),
    }
    ex = result.exited_molasses()
    if len(ex):
        ang, err = mean_polar_angle(ex[:, 4:7])
        v_rms, temp = transverse_temperature(ex[:, 4:7], cfg.constants)
        summary["molasses"].update(
            {
                "mean_polar_angle_rad": ang,
                "polar_stderr": err,
                "temperature_K": temp,
            }
        )
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    if cfg.trajectories > 0:
        _write_trajectories(
            os.path.join(out_dir, "trajectories.csv"),
            cfg,
            min(cfg.trajectories, cfg.atoms),
        )
    counts = result.outcome_counts()
    print(
        f"{cfg.mode}: {cfg.atoms} atoms in {elapsed:.1f} s | "
        f"coupled {counts['coupled']} ({100*result.coupling_fraction:.2f} %) "
        f"wall {counts['wall']} step_cap {counts['step_cap']}"
    )
    if strict and counts["step_cap"] > 0:
        print(f"error: {counts['step_cap']} atoms hit the step cap", file=sys.stderr)
        return 2
    return 0


def _run_sweep(cfg: RunConfig, out_dir: str, preset_name, strict: bool) -> int:
    t0 = time.perf_counter()
    spec = SweepSpec(
        parameter=cfg.sweep_parameter,
        values=tuple(cfg.sweep_values),
        atoms_per_point=cfg.sweep_atoms_per_point,
        source=cfg.source,
        molasses=cfg.molasses,
        cavity=cfg.cavity,
        chamber=cfg.chamber,
        engine=cfg.engine,
        seed=cfg.seed,
        threads=cfg.threads,
    )
    rows = run_sweep(spec, cfg.constants)
    elapsed = time.perf_counter() - t0
    _write_csv(
        os.path.join(out_dir, "sweep.csv"),
        "param_value,mean_polar_angle_rad,stderr,v_rms,T_K,coupling_fraction",
        [
            (
                r.value,
                r.mean_polar_angle,
                r.polar_stderr,
                r.v_rms_transverse,
                r.temperature,
                r.coupling_fraction,
            )
            for r in rows
        ],
    )
    finite = [r for r in rows if not math.isnan(r.mean_polar_angle)]
    best = min(finite, key=lambda r: r.mean_polar_angle) if finite else None
    summary = {
        "mode": "sweep",
        "seed": cfg.seed,
        "parameter": cfg.sweep_parameter,
        "values": [r.value for r in rows],
        "mean_polar_angle_rad": [r.mean_polar_angle for r in rows],
        "argmin_value": None if best is None else best.value,
    }
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    print(
        f"sweep over {cfg.sweep_parameter}: {len(rows)} points in {elapsed:.1f} s"
        + (f" | argmin at {best.value}" if best else "")
    )
    return 0


def _run_lens(cfg: RunConfig, out_dir: str, preset_name, strict: bool) -> int:
    t0 = time.perf_counter()
    table = imbalance_map(cfg.lens, cfg.lens_map_offsets, cfg.constants)
    _write_csv(os.path.join(out_dir, "imbalance.csv"), "offset_m,ratio", table)

    result, curve = simulate_lens(
        cfg.lens,
        cfg.source,
        n_atoms=cfg.atoms,
        engine=cfg.engine,
        lens_center=cfg.lens_center,
        chamber=cfg.chamber,
        constants=cfg.constants,
        seed=cfg.seed,
        threads=cfg.threads,
    )
    elapsed = time.perf_counter() - t0
    _write_csv(os.path.join(out_dir, "focus.csv"), "z_m,rms_radius_m", curve)
    radii = [r for _, r in curve]
    i_min = int(np.argmin(radii))
    summary = {
        "mode": "lens",
        "seed": cfg.seed,
        "engine": cfg.engine,
        "waist_focus": cfg.lens.waist_focus,
        "focus_offset": cfg.lens.focus_offset,
        "max_ratio": max(r for _, r in table),
        "curve_min_z": curve[i_min][0],
        "curve_min_radius": curve[i_min][1],
        "has_interior_minimum": bool(0 < i_min < len(curve) - 1),
        **result.summary_dict(),
    }
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    print(
        f"lens: waist {cfg.lens.waist_focus:g} m, max ratio "
        f"{summary['max_ratio']:.4f}, rms-radius minimum at z = "
        f"{summary['curve_min_z']:.4f} m ({elapsed:.1f} s)"
    )
    return 0


def _cmd_run(args, mode: str) -> int:
    try:
        cfg, preset_name = _load_config(args, mode)
    except (ConfigError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    _write_json(os.path.join(out_dir, "manifest.json"), _manifest(cfg, preset_name))
    if mode in ("beam", "deflect"):
        return _run_beamlike(cfg, out_dir, preset_name, args.strict)
    if mode == "sweep":
        return _run_sweep(cfg, out_dir, preset_name, args.strict)
    return _run_lens(cfg, out_dir, preset_name, args.strict)


def _cmd_finesse(args) -> int:
    ppm = 1e-6
    try:
        f = cavity_finesse(
            args.t1 * ppm, args.t2 * ppm, args.loss1 * ppm, args.loss2 * ppm
        )
        frac = output_fraction(args.t1 * ppm, args.t2 * ppm)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"finesse: {f:.1f}")
    print(f"output fraction through mirror 2: {frac:.4f}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_json(
            os.path.join(args.out, "summary.json"),
            {
                "mode": "finesse",
                "t1_ppm": args.t1,
                "t2_ppm": args.t2,
                "loss1_ppm": args.loss1,
                "loss2_ppm": args.loss2,
                "finesse": f,
                "output_fraction": frac,
            },
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coldbeam",
        description="Cold-atom beam transport and cavity-coupling simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_modes = {
        "beam": "straight beam dropped onto the cavity",
        "deflect": "beam deflected into the cavity by a 2-D molasses",
        "sweep": "parameter sweep of the deflection run",
        "lens": "laser-lens imbalance map and focusing run",
    }
    for mode, help_text in run_modes.items():
        p = sub.add_parser(mode, help=help_text)
        p.add_argument("--config", help="config file (INI)")
        p.add_argument(
            "--preset",
            help="named preset: " + ", ".join(sorted(PRESETS)),
        )
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--atoms", type=int, help="override the atom count")
        p.add_argument("--threads", type=int, help="worker threads")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument(
            "--strict",
            action="store_true",
            help="exit nonzero if any atom hits the step cap",
        )
        if mode in ("beam", "deflect"):
            p.add_argument(
                "--trajectories",
                type=int,
                help="also dump trajectories of the first N atoms",
            )

    p = sub.add_parser("finesse", help="Fabry-Perot finesse from transmissions")
    p.add_argument("t1", type=float, help="mirror 1 transmission, ppm")
    p.add_argument("t2", type=float, help="mirror 2 transmission, ppm")
    p.add_argument("--loss1", type=float, default=0.0, help="mirror 1 loss, ppm")
    p.add_argument("--loss2", type=float, default=0.0, help="mirror 2 loss, ppm")
    p.add_argument("--out", help="also write summary.json here")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "finesse":
        return _cmd_finesse(args)
    return _cmd_run(args, args.command)


if __name__ == "__main__":
    sys.exit(main())
