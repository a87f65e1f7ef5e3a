"""Two-level stochastic scattering engine for red-detuned Gaussian beams.

Per-beam saturation combines the transverse Gaussian profile, the beam
divergence, and the Doppler-shifted Lorentzian response; beams add without
interference, and the total scattering rate saturates at half the natural
linewidth:

    s_local = s0 (w0 / w(z))^2 exp(-2 r^2 / w(z)^2)
    s_i     = s_local / (1 + (2 (delta - k.v) / gamma)^2)
    rate    = (gamma / 2) s_T / (1 + s_T),   s_T = sum_i s_i

A scattering event applies one recoil along the absorbed beam and one in an
isotropic random direction. Scalar math here deliberately goes through the
C math library (``math.*``) so results agree bit for bit with the kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    AtomState,
    PhysicalConstants,
    RB85_D2,
    TWO_PI,
    Vec3,
    sample_unit_sphere,
    unit,
    vec3,
)
from .rng import RngStream

# Polarization labels; the helicity sign is interpreted about each beam's
# quantization axis and only matters to the six-level engine.
SIGMA_PLUS = 1
SIGMA_MINUS = -1
LINEAR = 0

_POL_NAMES = {SIGMA_PLUS: "sigma+", SIGMA_MINUS: "sigma-", LINEAR: "linear"}


@dataclass(frozen=True)
class GaussianBeam:
    """One molasses or lens laser beam.

    ``axis_point`` is any point on the beam axis; ``focus`` is the waist
    location measured along the propagation direction from that point.
    ``s0`` is the on-resonance peak saturation at the waist center.
    """

    direction: Vec3  # unit propagation direction
    axis_point: Vec3  # m
    waist: float  # m, 1/e^2 intensity radius at the focus
    s0: float
    detuning: float  # rad/s
    focus: float = 0.0  # m, waist position along the axis
    polarization: int = SIGMA_PLUS
    wavelength: float = RB85_D2.wavelength
    axis_id: int = 0  # 0: x-type pair, 1: y-type pair (quantization axis)

    def __post_init__(self):
        n = math.sqrt(sum(c * c for c in self.direction))
        if abs(n - 1.0) > 1e-9:
            raise ValueError("beam direction must be a unit vector")
        if self.waist <= 0.0:
            raise ValueError("waist must be positive")
        if self.s0 < 0.0:
            raise ValueError("s0 must be non-negative")
        if self.polarization not in _POL_NAMES:
            raise ValueError(f"unknown polarization {self.polarization}")

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.waist * self.waist / self.wavelength

    def local_coords(self, position: Vec3) -> tuple[float, float]:
        """(z, r): longitudinal and transverse coordinates of a lab point."""
        d = position - self.axis_point
        z = float(d @ self.direction)
        r2 = float(d @ d) - z * z
        return z, math.sqrt(r2 if r2 > 0.0 else 0.0)


def spot_size(beam: GaussianBeam, z: float) -> float:
    """Beam radius w(z) at longitudinal position z along the axis."""
    zr = beam.rayleigh_range
    u = (z - beam.focus) / zr
    return beam.waist * math.sqrt(1.0 + u * u)


def local_saturation(beam: GaussianBeam, position: Vec3) -> float:
    """On-resonance saturation at a lab-frame point (Gaussian profile)."""
    z, r = beam.local_coords(position)
    w = spot_size(beam, z)
    ratio = beam.waist / w
    return beam.s0 * ratio * ratio * math.exp(-2.0 * r * r / (w * w))


def beam_saturation(
    beam: GaussianBeam, state: AtomState, constants: PhysicalConstants = RB85_D2
) -> float:
    """Doppler-shifted saturation parameter of one beam for one atom."""
    s0g = local_saturation(beam, state.position)
    k = constants.wavenumber
    kv = k * (
        beam.direction[0] * state.velocity[0]
        + beam.direction[1] * state.velocity[1]
        + beam.direction[2] * state.velocity[2]
    )
    d = 2.0 * (beam.detuning - kv) / constants.linewidth
    return s0g / (1.0 + d * d)


def total_scattering_rate(
    beams, state: AtomState, constants: PhysicalConstants = RB85_D2
) -> float:
    """Total photon scattering rate (gamma/2) s_T / (1 + s_T), in 1/s."""
    s_t = 0.0
    for b in beams:
        s_t += beam_saturation(b, state, constants)
    return 0.5 * constants.linewidth * s_t / (1.0 + s_t)


def sample_wait_time(rate: float, rng: RngStream) -> float:
    """Exponential waiting time before the next event, for a Poisson process."""
    if rate <= 0.0:
        raise ValueError(f"scattering rate must be positive, got {rate}")
    return -math.log(rng.uniform()) / rate


def select_absorption_beam(
    beams, state: AtomState, rng: RngStream, constants: PhysicalConstants = RB85_D2
) -> int:
    """Pick the absorbed beam with probability proportional to its rate.

    Per-beam rates share the saturated denominator, (gamma/2) s_i / (1+s_T),
    so the weights are simply s_i / s_T and sum to one.
    """
    s = [beam_saturation(b, state, constants) for b in beams]
    s_t = sum(s)
    if s_t <= 0.0:
        raise ValueError("no beam has a positive rate here (outside molasses)")
    target = rng.uniform() * s_t
    cum = 0.0
    for i, si in enumerate(s):
        cum += si
        if target <= cum:
            return i
    return len(beams) - 1


def apply_scattering_event(
    state: AtomState,
    beam: GaussianBeam,
    rng: RngStream,
    constants: PhysicalConstants = RB85_D2,
) -> AtomState:
    """Apply one absorption + re-emission recoil pair (two-level kinematics).

    Consumes exactly two uniforms (the isotropic re-emission direction).
    Position and internal state are unchanged.
    """
    vr = constants.recoil_speed
    e = sample_unit_sphere(rng)
    v = state.velocity + vr * beam.direction + vr * e
    return AtomState(state.position.copy(), v, state.t, state.internal)


@dataclass(frozen=True)
class ScatteringEvent:
    """Record of one absorption/re-emission cycle."""

    beam_index: int
    emission_direction: Vec3
    wait_time: float

    def __post_init__(self):
        if self.wait_time <= 0.0:
            raise ValueError("wait time must be positive")


@dataclass(frozen=True)
class MolassesConfig:
    """Two counter-propagating beam pairs crossing at right angles.

    The scattering region is the union of the beams' 1/e^2 intensity
    envelopes; inside it, rates follow the full Gaussian profiles.
    """

    beams: tuple[GaussianBeam, ...]

    def __post_init__(self):
        if len(self.beams) != 4:
            raise ValueError("molasses needs exactly 4 beams (two pairs)")
        for a, b in ((0, 1), (2, 3)):
            d = self.beams[a].direction + self.beams[b].direction
            if max(abs(float(c)) for c in d) > 1e-12:
                raise ValueError(f"beams {a} and {b} must be anti-parallel")


def make_molasses(
    waist: float = 7.5e-3,
    s0: float = 3.0,
    detuning: float = -0.5 * RB85_D2.linewidth,
    center: Vec3 | None = None,
    wavelength: float = RB85_D2.wavelength,
    polarizations: tuple[int, int, int, int] = (
        SIGMA_PLUS,
        SIGMA_MINUS,
        SIGMA_PLUS,
        SIGMA_MINUS,
    ),
) -> MolassesConfig:
    """Standard 2-D molasses: retro-reflected pairs along +/-x and +/-y.

    Beams are collimated at the crossing point (focus on the center), with
    equal waists, saturations, and detunings.
    """
    if center is None:
        center = vec3(0.0, 0.0, 0.0)
    dirs = (
        vec3(1.0, 0.0, 0.0),
        vec3(-1.0, 0.0, 0.0),
        vec3(0.0, 1.0, 0.0),
        vec3(0.0, -1.0, 0.0),
    )
    beams = tuple(
        GaussianBeam(
            direction=d,
            axis_point=np.array(center, dtype=float),
            waist=waist,
            s0=s0,
            detuning=detuning,
            focus=0.0,
            polarization=pol,
            wavelength=wavelength,
            axis_id=0 if i < 2 else 1,
        )
        for i, (d, pol) in enumerate(zip(dirs, polarizations))
    )
    return MolassesConfig(beams=beams)


def in_molasses_region(beams, position: Vec3) -> bool:
    """True inside any beam's 1/e^2 envelope (r <= w(z))."""
    for b in beams:
        z, r = b.local_coords(position)
        if r <= spot_size(b, z):
            return True
    return False


def evolve_in_molasses(
    state: AtomState,
    cfg: MolassesConfig,
    constants: PhysicalConstants = RB85_D2,
    rng: RngStream | None = None,
    *,
    internal_rng: RngStream | None = None,
    engine: str = "two-level",
    step_cap: int = 10_000_000,
    max_events: int | None = None,
):
    """Scatter an atom until it leaves the 1/e^2 region of the beams.

    Returns the trajectory as a list of AtomState (entry state first, exit
    state last, one entry per scattering event in between). Raises
    StepCapExceeded if the atom is still inside after ``step_cap`` events;
    ``max_events`` instead truncates cleanly and returns the partial
    trajectory (useful for equilibrium studies of trapped atoms).
    """
    from .kernels import trace_molasses

    if rng is None:
        rng = RngStream(0, 0)
    return trace_molasses(
        state,
        cfg,
        constants,
        rng,
        internal_rng=internal_rng,
        engine=engine,
        step_cap=step_cap,
        max_events=max_events,
    )


class StepCapExceeded(RuntimeError):
    """An atom exceeded the configured scattering-step cap."""

    def __init__(self, atom_id, n_events, state=None):
        self.atom_id = atom_id
        self.n_events = n_events
        self.state = state
        super().__init__(
            f"atom {atom_id!r} still scattering after {n_events} events"
        )
