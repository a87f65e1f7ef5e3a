"""Run configuration: sectioned key-value files, strict validation, presets.

Configs are INI text. All quantities are SI except angles (degrees, matching
how tilt angles are usually quoted) and detunings (units of the linewidth).
Unknown sections or keys are rejected with the offending line number, and
every default that was not set explicitly still appears in the run manifest.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .core import PhysicalConstants, RB85_D2, TWO_PI, vec3
from .lens import LensConfig
from .scatter import (
    MolassesConfig,
    SIGMA_MINUS,
    SIGMA_PLUS,
    make_molasses,
)
from .source import SourceConfig
from .transport import CavityGeometry, ChamberGeometry

MODES = ("beam", "deflect", "sweep", "lens")

_KNOWN_KEYS = {
    "run": {
        "mode",
        "seed",
        "atoms",
        "threads",
        "engine",
        "step_cap",
        "count_step_cap_as_miss",
        "trajectories",
        "trajectory_stride",
    },
    "constants": {"wavelength", "linewidth_hz", "mass_kg"},
    "source": {
        "hole_diameter",
        "mot_hole_distance",
        "v0",
        "fwhm",
        "theta",
        "phi",
        "hole_center",
    },
    "molasses": {"waist", "s0", "detuning_over_gamma", "center", "polarizations"},
    "lens": {
        "waist_focus",
        "spot_at_center",
        "s0_center",
        "detuning_over_gamma",
        "center",
        "map_offsets",
    },
    "cavity": {"waist", "gap", "center", "axis", "enabled"},
    "chamber": {"x_half", "y_half", "z_min", "z_max"},
    "sweep": {"parameter", "values", "atoms_per_point"},
}

_REQUIRED_SECTIONS = {
    "beam": ("source", "cavity", "chamber"),
    "deflect": ("source", "molasses", "cavity", "chamber"),
    "sweep": ("source", "molasses", "cavity", "chamber", "sweep"),
    "lens": ("source", "lens", "chamber"),
}

_DEFAULT_ENGINE = {"beam": "none", "deflect": "two-level",
                   "sweep": "two-level", "lens": "two-level"}


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass
class RunConfig:
    """Fully resolved configuration for one run."""

    mode: str
    seed: int
    atoms: int
    threads: int
    engine: str
    step_cap: int
    count_step_cap_as_miss: bool
    trajectories: int
    trajectory_stride: int
    constants: PhysicalConstants
    source: SourceConfig
    molasses: MolassesConfig | None
    lens: LensConfig | None
    lens_center: np.ndarray | None
    lens_map_offsets: np.ndarray | None
    cavity: CavityGeometry | None
    chamber: ChamberGeometry
    sweep_parameter: str | None
    sweep_values: tuple | None
    sweep_atoms_per_point: int | None

    def resolved_dict(self) -> dict:
        """Every effective setting, defaults included (for the manifest)."""
        d = {
            "run": {
                "mode": self.mode,
                "seed": self.seed,
                "atoms": self.atoms,
                "threads": self.threads,
                "engine": self.engine,
                "step_cap": self.step_cap,
                "count_step_cap_as_miss": self.count_step_cap_as_miss,
                "trajectories": self.trajectories,
                "trajectory_stride": self.trajectory_stride,
            },
            "constants": {
                "wavelength": self.constants.wavelength,
                "linewidth_hz": self.constants.linewidth / TWO_PI,
                "mass_kg": self.constants.mass,
            },
            "source": {
                "hole_diameter": self.source.hole_diameter,
                "mot_hole_distance": self.source.mot_hole_distance,
                "v0": self.source.v0,
                "fwhm": self.source.fwhm,
                "theta_deg": math.degrees(self.source.theta),
                "phi_deg": math.degrees(self.source.phi),
                "hole_center": [float(v) for v in self.source.hole_center],
            },
            "chamber": {
                "x_half": self.chamber.x_half,
                "y_half": self.chamber.y_half,
                "z_min": self.chamber.z_min,
                "z_max": self.chamber.z_max,
            },
        }
        if self.molasses is not None:
            b = self.molasses.beams[0]
            d["molasses"] = {
                "waist": b.waist,
                "s0": b.s0,
                "detuning_over_gamma": b.detuning / self.constants.linewidth,
                "center": [float(v) for v in b.axis_point],
                "polarizations": " ".join(
                    "+" if bb.polarization == SIGMA_PLUS else "-"
                    for bb in self.molasses.beams
                ),
            }
        if self.lens is not None:
            d["lens"] = {
                "waist_focus": self.lens.waist_focus,
                "spot_at_center": self.lens.spot_at_center,
                "s0_center": self.lens.s0_center,
                "detuning_over_gamma": self.lens.detuning / self.constants.linewidth,
                "focus_offset": self.lens.focus_offset,
                "center": [float(v) for v in self.lens_center],
                "map_offsets": [float(v) for v in self.lens_map_offsets],
            }
        if self.cavity is not None:
            d["cavity"] = {
                "waist": self.cavity.waist,
                "gap": self.cavity.gap,
                "center": [float(v) for v in self.cavity.mode_center],
                "axis": [float(v) for v in self.cavity.axis],
                "enabled": True,
            }
        else:
            d["cavity"] = {"enabled": False}
        if self.sweep_parameter is not None:
            d["sweep"] = {
                "parameter": self.sweep_parameter,
                "values": [float(v) for v in self.sweep_values],
                "atoms_per_point": self.sweep_atoms_per_point,
            }
        return d


def _line_of(text: str, section: str, key: str | None = None) -> int:
    """Best-effort line number of a section or key for error messages."""
    in_section = False
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            if key is None and stripped == f"[{section}]":
                return i
            in_section = stripped == f"[{section}]"
        elif in_section and key is not None:
            name = stripped.split("=")[0].split(":")[0].strip()
            if name == key:
                return i
    return 0


class _Section:
    """Typed accessors over one config section with consumed-key tracking."""

    def __init__(self, parser, text, name):
        self._name = name
        self._text = text
        self._items = dict(parser[name]) if parser.has_section(name) else {}

    def _fail(self, key, msg):
        line = _line_of(self._text, self._name, key)
        raise ConfigError(f"[{self._name}] {key} (line {line}): {msg}")

    def _get(self, key, default):
        return self._items.get(key, default)

    def floatval(self, key, default):
        raw = self._get(key, None)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            self._fail(key, f"not a number: {raw!r}")

    def intval(self, key, default):
        raw = self._get(key, None)
        if raw is None:
            return default
        try:
            return int(float(raw))
        except ValueError:
            self._fail(key, f"not an integer: {raw!r}")

    def boolval(self, key, default):
        raw = self._get(key, None)
        if raw is None:
            return default
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        self._fail(key, f"not a boolean: {raw!r}")

    def strval(self, key, default):
        return self._get(key, default)

    def vec3val(self, key, default):
        raw = self._get(key, None)
        if raw is None:
            return default
        parts = raw.split()
        if len(parts) != 3:
            self._fail(key, "expected three numbers")
        try:
            return vec3(*(float(p) for p in parts))
        except ValueError:
            self._fail(key, f"not a vector: {raw!r}")

    def floatlist(self, key, default):
        raw = self._get(key, None)
        if raw is None:
            return default
        try:
            return tuple(float(p) for p in raw.replace(",", " ").split())
        except ValueError:
            self._fail(key, f"not a list of numbers: {raw!r}")


def parse_config(text: str, mode: str | None = None) -> RunConfig:
    """Parse and validate config text into a RunConfig.

    ``mode`` overrides the [run] mode key (the CLI passes the subcommand).
    """
    parser = configparser.ConfigParser(
        inline_comment_prefixes=("#", ";"), interpolation=None
    )
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            line = _line_of(text, section)
            raise ConfigError(f"unknown section [{section}] (line {line})")
        for key in parser[section]:
            if key not in _KNOWN_KEYS[section]:
                line = _line_of(text, section, key)
                raise ConfigError(
                    f"unknown key {key!r} in [{section}] (line {line})"
                )

    run = _Section(parser, text, "run")
    mode = mode or run.strval("mode", None)
    if mode is None:
        raise ConfigError("no mode given: set [run] mode or use a subcommand")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")

    missing = [s for s in _REQUIRED_SECTIONS[mode] if not parser.has_section(s)]
    if missing:
        raise ConfigError(
            f"mode {mode!r} needs sections: " + ", ".join(f"[{s}]" for s in missing)
        )

    cons = _Section(parser, text, "constants")
    constants = PhysicalConstants(
        wavelength=cons.floatval("wavelength", RB85_D2.wavelength),
        linewidth=TWO_PI * cons.floatval("linewidth_hz", RB85_D2.linewidth / TWO_PI),
        mass=cons.floatval("mass_kg", RB85_D2.mass),
    )

    src = _Section(parser, text, "source")
    try:
        source = SourceConfig(
            hole_diameter=src.floatval("hole_diameter", 1.5e-3),
            mot_hole_distance=src.floatval("mot_hole_distance", 70e-3),
            v0=src.floatval("v0", 14.0),
            fwhm=src.floatval("fwhm", 2.7),
            theta=math.radians(src.floatval("theta", 0.0)),
            phi=math.radians(src.floatval("phi", 0.0)),
            hole_center=src.vec3val("hole_center", vec3(0.0, 0.0, 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"[source]: {exc}") from exc

    molasses = None
    if parser.has_section("molasses"):
        mol = _Section(parser, text, "molasses")
        pol_raw = mol.strval("polarizations", "+ - + -").split()
        if len(pol_raw) != 4 or any(p not in ("+", "-") for p in pol_raw):
            raise ConfigError("[molasses] polarizations: expected four of '+'/'-'")
        pols = tuple(SIGMA_PLUS if p == "+" else SIGMA_MINUS for p in pol_raw)
        try:
            molasses = make_molasses(
                waist=mol.floatval("waist", 7.5e-3),
                s0=mol.floatval("s0", 3.0),
                detuning=mol.floatval("detuning_over_gamma", -0.5)
                * constants.linewidth,
                center=mol.vec3val("center", vec3(0.0, 0.0, 5e-3)),
                wavelength=constants.wavelength,
                polarizations=pols,
            )
        except ValueError as exc:
            raise ConfigError(f"[molasses]: {exc}") from exc

    lens = None
    lens_center = None
    lens_offsets = None
    if parser.has_section("lens"):
        lns = _Section(parser, text, "lens")
        try:
            lens = LensConfig(
                waist_focus=lns.floatval("waist_focus", 0.5e-6),
                spot_at_center=lns.floatval("spot_at_center", 5e-3),
                s0_center=lns.floatval("s0_center", 3.0),
                detuning=lns.floatval("detuning_over_gamma", -0.5)
                * constants.linewidth,
                wavelength=constants.wavelength,
            )
        except ValueError as exc:
            raise ConfigError(f"[lens]: {exc}") from exc
        lens_center = lns.vec3val("center", vec3(0.0, 0.0, 10e-3))
        grid = lns.floatlist("map_offsets", (-2e-3, 2e-3, 81))
        if len(grid) != 3 or grid[2] < 1:
            raise ConfigError("[lens] map_offsets: expected 'lo hi npoints'")
        lens_offsets = np.linspace(grid[0], grid[1], int(grid[2]))

    cavity = None
    if parser.has_section("cavity"):
        cav = _Section(parser, text, "cavity")
        if cav.boolval("enabled", True):
            try:
                cavity = CavityGeometry(
                    waist=cav.floatval("waist", 56e-6),
                    gap=cav.floatval("gap", 2.2e-3),
                    mode_center=cav.vec3val("center", vec3(0.0, 0.0, 0.04)),
                    axis=cav.vec3val("axis", vec3(1.0, 0.0, 0.0)),
                )
            except ValueError as exc:
                raise ConfigError(f"[cavity]: {exc}") from exc

    cham = _Section(parser, text, "chamber")
    try:
        chamber = ChamberGeometry(
            x_half=cham.floatval("x_half", 0.05),
            y_half=cham.floatval("y_half", 0.05),
            z_min=cham.floatval("z_min", -0.02),
            z_max=cham.floatval("z_max", 0.06),
        )
    except ValueError as exc:
        raise ConfigError(f"[chamber]: {exc}") from exc

    sweep_parameter = None
    sweep_values = None
    sweep_atoms = None
    if parser.has_section("sweep"):
        swp = _Section(parser, text, "sweep")
        sweep_parameter = swp.strval("parameter", "detuning_over_gamma")
        sweep_values = swp.floatlist("values", None)
        if not sweep_values:
            raise ConfigError("[sweep] values: a non-empty grid is required")
        sweep_atoms = swp.intval("atoms_per_point", 2000)
        if sweep_atoms < 1:
            raise ConfigError("[sweep] atoms_per_point must be at least 1")

    engine = run.strval("engine", _DEFAULT_ENGINE[mode])
    if engine not in ("none", "two-level", "six-level"):
        raise ConfigError(f"[run] engine: unknown engine {engine!r}")
    if mode in ("deflect", "sweep") and engine == "none":
        raise ConfigError(f"mode {mode!r} requires a scattering engine")

    atoms = run.intval("atoms", 10_000)
    if atoms < 1:
        raise ConfigError("[run] atoms must be at least 1")

    cfg = RunConfig(
        mode=mode,
        seed=run.intval("seed", 20260810),
        atoms=atoms,
        threads=run.intval("threads", 1),
        engine=engine,
        step_cap=run.intval("step_cap", 10_000_000),
        count_step_cap_as_miss=run.boolval("count_step_cap_as_miss", True),
        trajectories=run.intval("trajectories", 0),
        trajectory_stride=max(1, run.intval("trajectory_stride", 1)),
        constants=constants,
        source=source,
        molasses=molasses,
        lens=lens,
        lens_center=lens_center,
        lens_map_offsets=lens_offsets,
        cavity=cavity,
        chamber=chamber,
        sweep_parameter=sweep_parameter,
        sweep_values=sweep_values,
        sweep_atoms_per_point=sweep_atoms,
    )

    if mode in ("beam", "deflect", "sweep") and cfg.cavity is None:
        raise ConfigError(f"mode {mode!r} requires an enabled [cavity]")
    if mode == "sweep" and cfg.sweep_parameter not in (
        "detuning_over_gamma",
        "s0",
        "waist",
        "z_cav",
    ):
        raise ConfigError(
            f"[sweep] parameter: unknown parameter {cfg.sweep_parameter!r}"
        )
    return cfg
