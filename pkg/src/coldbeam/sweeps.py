"""Parameter sweeps and ensemble statistics for the deflected beam.

The headline quantities are the mean polar angle of the beam just after it
leaves the molasses (minimized at the optimal detuning) and the RMS
transverse speed with its equivalent temperature, compared against the
N-pair equilibrium limit T = hbar gamma (3 + N) / (12 k_b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import PhysicalConstants, RB85_D2
from .rng import philox4x64_block
from .scatter import MolassesConfig, make_molasses
from .source import SourceConfig
from .transport import CavityGeometry, ChamberGeometry, run_beam_simulation


@dataclass(frozen=True)
class SweepSpec:
    """Grid sweep of one molasses parameter.

    ``parameter`` is one of 'detuning_over_gamma', 's0', 'waist', 'z_cav'.
    Each grid point runs a full beam simulation with a seed derived from
    (seed, parameter value), so adding points never perturbs existing ones.
    """

    parameter: str
    values: tuple
    atoms_per_point: int = 2000
    source: SourceConfig = field(default_factory=SourceConfig)
    molasses: MolassesConfig | None = None
    cavity: CavityGeometry = field(default_factory=CavityGeometry)
    chamber: ChamberGeometry = field(default_factory=ChamberGeometry)
    engine: str = "two-level"
    seed: int = 0
    threads: int = 1

    _PARAMETERS = ("detuning_over_gamma", "s0", "waist", "z_cav")

    def __post_init__(self):
        if self.parameter not in self._PARAMETERS:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        if len(self.values) == 0:
            raise ValueError("sweep grid must be non-empty")
        if self.atoms_per_point < 1:
            raise ValueError("atoms_per_point must be at least 1")


@dataclass
class BeamStats:
    """Per-sweep-point statistics at the molasses-exit probe."""

    value: float
    mean_polar_angle: float
    polar_stderr: float
    v_rms_transverse: float
    temperature: float
    coupling_fraction: float
    n_exited: int


def mean_polar_angle(velocities: np.ndarray, axis=None) -> tuple[float, float]:
    """Mean and standard error of acos(v_hat . z_hat) over an ensemble.

    ``velocities`` is (n, 3); ``axis`` defaults to +z.
    """
    v = np.asarray(velocities, dtype=float)
    if v.ndim != 2 or v.shape[1] != 3 or len(v) == 0:
        raise ValueError("need a non-empty (n, 3) velocity array")
    if axis is None:
        axis = np.array([0.0, 0.0, 1.0])
    speed = np.linalg.norm(v, axis=1)
    if np.any(speed == 0.0):
        raise ValueError("zero-velocity atom has no direction")
    cosang = np.clip((v @ axis) / speed, -1.0, 1.0)
    ang = np.arccos(cosang)
    n = len(ang)
    err = float(np.std(ang, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return float(np.mean(ang)), err


def transverse_temperature(
    velocities: np.ndarray, constants: PhysicalConstants = RB85_D2
) -> tuple[float, float]:
    """RMS transverse speed and its temperature over the two damped axes.

    Convention: <v_T^2> covers both transverse components and each carries
    (1/2) k_b T, so T = m <v_T^2> / (2 k_b).
    """
    v = np.asarray(velocities, dtype=float)
    if v.ndim != 2 or v.shape[1] != 3 or len(v) == 0:
        raise ValueError("need a non-empty (n, 3) velocity array")
    vt2 = float(np.mean(v[:, 0] ** 2 + v[:, 1] ** 2))
    v_rms = math.sqrt(vt2)
    temperature = constants.mass * vt2 / (2.0 * constants.k_b)
    return v_rms, temperature


def doppler_limit(n_pairs: int, constants: PhysicalConstants = RB85_D2) -> float:
    """Equilibrium temperature for N orthogonal beam pairs.

    T = hbar gamma (3 + N) / (12 k_b); N = 3 recovers the familiar
    hbar gamma / (2 k_b).
    """
    if n_pairs not in (1, 2, 3):
        raise ValueError(f"n_pairs must be 1, 2, or 3, got {n_pairs}")
    return (
        constants.hbar
        * constants.linewidth
        * (3.0 + n_pairs)
        / (12.0 * constants.k_b)
    )


def point_seed(base_seed: int, value: float) -> int:
    """Stable per-point seed keyed by the parameter *value*, not its index."""
    bits = np.float64(value).view(np.uint64)
    block = philox4x64_block(int(bits), 0, 0, 0, base_seed & ((1 << 64) - 1), 0x5EED)
    return block[0]


def _apply_parameter(spec: SweepSpec, value: float):
    mol = spec.molasses if spec.molasses is not None else make_molasses()
    cavity = spec.cavity
    if spec.parameter == "detuning_over_gamma":
        gamma = RB85_D2.linewidth
        beams = tuple(replace(b, detuning=value * gamma) for b in mol.beams)
        mol = MolassesConfig(beams=beams)
    elif spec.parameter == "s0":
        mol = MolassesConfig(beams=tuple(replace(b, s0=value) for b in mol.beams))
    elif spec.parameter == "waist":
        mol = MolassesConfig(beams=tuple(replace(b, waist=value) for b in mol.beams))
    elif spec.parameter == "z_cav":
        center = cavity.mode_center.copy()
        center[2] = value
        cavity = replace(cavity, mode_center=center)
    return mol, cavity


def run_sweep(spec: SweepSpec, constants: PhysicalConstants = RB85_D2) -> list[BeamStats]:
    """Run the grid and collect molasses-exit statistics per point."""
    rows = []
    for value in spec.values:
        mol, cavity = _apply_parameter(spec, float(value))
        result = run_beam_simulation(
            spec.source,
            molasses=mol,
            cavity=cavity,
            chamber=spec.chamber,
            n_atoms=spec.atoms_per_point,
            engine=spec.engine,
            constants=constants,
            seed=point_seed(spec.seed, float(value)),
            threads=spec.threads,
        )
        ex = result.exited_molasses()
        if len(ex):
            ang, err = mean_polar_angle(ex[:, 4:7])
            v_rms, temperature = transverse_temperature(ex[:, 4:7], constants)
        else:
            ang = err = v_rms = temperature = math.nan
        rows.append(
            BeamStats(
                value=float(value),
                mean_polar_angle=ang,
                polar_stderr=err,
                v_rms_transverse=v_rms,
                temperature=temperature,
                coupling_fraction=result.coupling_fraction,
                n_exited=int(len(ex)),
            )
        )
    return rows


def detuning_sweep(spec: SweepSpec, constants: PhysicalConstants = RB85_D2):
    """Sweep the molasses detuning (values are delta / gamma)."""
    if spec.parameter != "detuning_over_gamma":
        raise ValueError("spec.parameter must be 'detuning_over_gamma'")
    return run_sweep(spec, constants)
