"""Free flight to the cavity, the coupling criterion, and ensemble runs.

An atom couples when its perpendicular distance from the cavity-mode axis
drops to one mode waist while its axial coordinate is inside the mirror
gap; it is lost when it reaches the chamber wall. Boundary crossings are
found analytically on each flight segment, so results carry no time-step
artifacts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import AtomState, PhysicalConstants, RB85_D2, Vec3, unit, vec3
from .multilevel import TransitionWeights
from .source import SourceConfig
from . import kernels
from .kernels import layout as L


@dataclass(frozen=True)
class CavityGeometry:
    """TEM00 mode geometry: waist, mirror gap, center, and horizontal axis."""

    waist: float = 56e-6  # m, 1/e field radius
    gap: float = 2.2e-3  # m, mirror spacing
    mode_center: Vec3 = field(default_factory=lambda: vec3(0.0, 0.0, 0.04))
    axis: Vec3 = field(default_factory=lambda: vec3(1.0, 0.0, 0.0))

    def __post_init__(self):
        if self.waist <= 0.0 or self.gap <= 0.0:
            raise ValueError("waist and gap must be positive")
        n = math.sqrt(float(self.axis @ self.axis))
        if abs(n - 1.0) > 1e-9:
            raise ValueError("cavity axis must be a unit vector")


@dataclass(frozen=True)
class ChamberGeometry:
    """Axis-aligned box bounding the flight region."""

    x_half: float = 0.05
    y_half: float = 0.05
    z_min: float = -0.02
    z_max: float = 0.06

    def __post_init__(self):
        if self.x_half <= 0 or self.y_half <= 0 or self.z_max <= self.z_min:
            raise ValueError("degenerate chamber box")

    def bounds(self) -> tuple:
        return (-self.x_half, self.x_half, -self.y_half, self.y_half,
                self.z_min, self.z_max)

    def contains(self, p: Vec3) -> bool:
        return (
            -self.x_half <= p[0] <= self.x_half
            and -self.y_half <= p[1] <= self.y_half
            and self.z_min <= p[2] <= self.z_max
        )


@dataclass
class EnsembleResult:
    """Aggregate outcome of a beam run.

    ``final`` and ``molasses_exit`` rows are (t, x, y, z, vx, vy, vz) per
    atom; molasses_exit is NaN for atoms that never scattered.
    """

    n_atoms: int
    outcome: np.ndarray
    nevents: np.ndarray
    final: np.ndarray
    molasses_exit: np.ndarray
    internal: np.ndarray
    count_step_cap_as_miss: bool = True

    def __post_init__(self):
        counts = self.outcome_counts()
        if sum(counts.values()) != self.n_atoms:
            raise ValueError("outcome counts must sum to the ensemble size")

    def outcome_counts(self) -> dict:
        return {
            "coupled": int(np.sum(self.outcome == L.OUTCOME_COUPLED)),
            "wall": int(np.sum(self.outcome == L.OUTCOME_WALL)),
            "step_cap": int(np.sum(self.outcome == L.OUTCOME_CAP)),
        }

    @property
    def coupling_fraction(self) -> float:
        counts = self.outcome_counts()
        denom = self.n_atoms
        if not self.count_step_cap_as_miss:
            denom -= counts["step_cap"]
        if denom == 0:
            return 0.0
        return counts["coupled"] / denom

    @property
    def coupling_stderr(self) -> float:
        """Binomial standard error of the coupling fraction."""
        counts = self.outcome_counts()
        denom = self.n_atoms
        if not self.count_step_cap_as_miss:
            denom -= counts["step_cap"]
        if denom == 0:
            return 0.0
        p = counts["coupled"] / denom
        return math.sqrt(p * (1.0 - p) / denom)

    def exited_molasses(self) -> np.ndarray:
        """Rows of molasses_exit for atoms that entered the beam region."""
        mask = ~np.isnan(self.molasses_exit[:, 0])
        return self.molasses_exit[mask]

    def summary_dict(self) -> dict:
        counts = self.outcome_counts()
        d = {
            "n_atoms": self.n_atoms,
            "outcomes": counts,
            "coupling_fraction": self.coupling_fraction,
            "coupling_stderr": self.coupling_stderr,
            "mean_events_per_atom": float(np.mean(self.nevents)),
        }
        ex = self.exited_molasses()
        if len(ex):
            vt2 = ex[:, 4] ** 2 + ex[:, 5] ** 2
            d["molasses"] = {
                "n_exited": int(len(ex)),
                "v_rms_transverse": float(np.sqrt(np.mean(vt2))),
                "mean_vz": float(np.mean(ex[:, 6])),
            }
        return d


def propagate_free(state: AtomState, dt: float, gravity: float = 0.0) -> AtomState:
    """Ballistic flight for dt seconds; optional uniform +z acceleration."""
    if dt < 0.0:
        raise ValueError("dt must be non-negative")
    pos = state.position + state.velocity * dt
    vel = state.velocity.copy()
    if gravity != 0.0:
        pos = pos + np.array([0.0, 0.0, 0.5 * gravity * dt * dt])
        vel = vel + np.array([0.0, 0.0, gravity * dt])
    return AtomState(pos, vel, state.t + dt, state.internal)


def check_coupling(state: AtomState, cavity: CavityGeometry) -> bool:
    """True if the atom is within one waist of the mode axis, inside the gap."""
    d = state.position - cavity.mode_center
    pa = float(d @ cavity.axis)
    if abs(pa) > 0.5 * cavity.gap:
        return False
    perp2 = float(d @ d) - pa * pa
    return perp2 <= cavity.waist * cavity.waist


_DEFAULT_CAVITY = CavityGeometry()


def run_beam_simulation(
    source: SourceConfig,
    molasses=None,
    cavity: CavityGeometry | None = _DEFAULT_CAVITY,
    chamber: ChamberGeometry | None = None,
    n_atoms: int = 1000,
    engine: str | None = None,
    constants: PhysicalConstants = RB85_D2,
    seed: int = 0,
    threads: int = 1,
    step_cap: int = 10_000_000,
    weights: TransitionWeights | None = None,
    count_step_cap_as_miss: bool = True,
    backend: str | None = None,
) -> EnsembleResult:
    """Full per-atom pipeline: sample, scatter (optional), fly, classify.

    ``molasses`` is a MolassesConfig (or any object with a ``beams``
    sequence, e.g. a lens beam set); ``engine`` defaults to two-level when
    beams are present. ``cavity=None`` disables the coupling test entirely
    (atoms then only terminate on the chamber wall). Atom i draws from
    streams (2i, 2i+1) of ``seed``, so results are independent of
    ``threads`` and kernel backend.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be at least 1")
    if chamber is None:
        chamber = ChamberGeometry()
    beams = list(molasses.beams) if molasses is not None else []
    if engine is None:
        engine = "two-level" if beams else "none"

    params = kernels.build_params(
        constants,
        source,
        beams,
        engine,
        cavity=cavity,
        box=chamber.bounds(),
        step_cap=step_cap,
        seed=seed,
        weights=weights,
    )
    out = kernels.simulate_ensemble(params, n_atoms, threads=threads, backend=backend)
    return EnsembleResult(
        n_atoms=n_atoms,
        outcome=out["outcome"],
        nevents=out["nevents"],
        final=out["final"],
        molasses_exit=out["mexit"],
        internal=out["internal"],
        count_step_cap_as_miss=count_step_cap_as_miss,
    )
