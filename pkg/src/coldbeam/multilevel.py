"""Six-level internal structure: J=1/2 ground, J'=3/2 excited, sigma drive.

Transition strengths are squared Clebsch-Gordan coefficients normalized so
the strong (stretched) sigma transitions have weight 1 and the weak ones
1/3. The quantization axis follows the most recently absorbed beam's pair
axis (x or y); a 90-degree axis change re-samples the ground sublevel with
equal weights, which is the population-only limit of the spin-1/2 rotation
|d^{1/2}_{m m'}(pi/2)|^2 = 1/2.

Ground sublevels are indexed 0 (m = -1/2) and 1 (m = +1/2); excited
sublevels 0..3 map to m' = -3/2, -1/2, +1/2, +3/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import AtomState, PhysicalConstants, RB85_D2
from .rng import RngStream
from .scatter import GaussianBeam, LINEAR, beam_saturation, sample_unit_sphere

AXIS_X = 0
AXIS_Y = 1

GROUND_MINUS = 0  # m = -1/2
GROUND_PLUS = 1  # m = +1/2

# Squared CG weights for sigma excitation from ground sublevel m:
# EXCITATION_WEIGHT[m][(q+1)//2] with photon q = -1 or +1.
EXCITATION_WEIGHT = np.array([[1.0, 1.0 / 3.0], [1.0 / 3.0, 1.0]])

# A beam whose pair axis differs from the atom's current axis sees the
# rotated state as an equal sublevel mixture; its weight is the average.
CROSS_AXIS_WEIGHT = (1.0 + 1.0 / 3.0) / 2.0

# Probability that excited sublevel e decays to ground m = -1/2
# (m' = -3/2, -1/2, +1/2, +3/2). Complements decay to m = +1/2.
DECAY_TO_MINUS = np.array([1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0])


@dataclass
class InternalState:
    """Ground sublevel plus the quantization axis it is defined in."""

    sublevel: int = GROUND_MINUS
    axis: int = AXIS_X

    def __post_init__(self):
        if self.sublevel not in (GROUND_MINUS, GROUND_PLUS):
            raise ValueError(f"not a ground sublevel: {self.sublevel}")
        if self.axis not in (AXIS_X, AXIS_Y):
            raise ValueError(f"unknown quantization axis: {self.axis}")


@dataclass(frozen=True)
class TransitionWeights:
    """Excitation weights and decay branching ratios, overridable for tests.

    ``force_unity()`` gives the two-level limit: every excitation weight 1,
    so the kinematics reproduce the two-level engine exactly.
    """

    excitation: np.ndarray = None
    cross_axis: float = CROSS_AXIS_WEIGHT
    decay_to_minus: np.ndarray = None

    def __post_init__(self):
        if self.excitation is None:
            object.__setattr__(self, "excitation", EXCITATION_WEIGHT.copy())
        if self.decay_to_minus is None:
            object.__setattr__(self, "decay_to_minus", DECAY_TO_MINUS.copy())
        if self.excitation.shape != (2, 2):
            raise ValueError("excitation table must be 2x2")
        if not np.all((self.decay_to_minus >= 0) & (self.decay_to_minus <= 1)):
            raise ValueError("decay branches must be probabilities")

    @classmethod
    def force_unity(cls) -> "TransitionWeights":
        return cls(excitation=np.ones((2, 2)), cross_axis=1.0)


def quantization_axis_for_beam(beam_index: int, n_beams: int = 4) -> int:
    """Pair axis of a molasses beam: 0/1 -> x, 2/3 -> y."""
    if not 0 <= beam_index < n_beams:
        raise ValueError(f"beam index {beam_index} out of range")
    return AXIS_X if beam_index < 2 else AXIS_Y


def reproject_state(
    internal: InternalState, new_axis: int, rng: RngStream
) -> InternalState:
    """Re-sample the ground sublevel after a quantization-axis change.

    Same axis is the identity (no draw); a 90-degree change gives each
    sublevel probability 1/2. Consumes one uniform iff the axis changes.
    """
    if new_axis not in (AXIS_X, AXIS_Y):
        raise ValueError(f"unknown quantization axis: {new_axis}")
    if new_axis == internal.axis:
        return InternalState(internal.sublevel, internal.axis)
    sub = GROUND_MINUS if rng.uniform() < 0.5 else GROUND_PLUS
    return InternalState(sub, new_axis)


def excitation_weight(
    internal: InternalState, beam: GaussianBeam, weights: TransitionWeights
) -> float:
    """Squared-CG weight of this beam acting on the current sublevel."""
    if beam.polarization == LINEAR:
        raise ValueError("six-level engine supports sigma+/- beams only")
    if beam.axis_id == internal.axis:
        return float(weights.excitation[internal.sublevel][(beam.polarization + 1) // 2])
    # Cross-axis beam: rotated populations are an equal mixture.
    if weights.cross_axis == 1.0:
        return 1.0
    return 0.5 * (
        float(weights.excitation[0][(beam.polarization + 1) // 2])
        + float(weights.excitation[1][(beam.polarization + 1) // 2])
    )


def weighted_scattering_rate(
    beam: GaussianBeam,
    state: AtomState,
    internal: InternalState,
    constants: PhysicalConstants = RB85_D2,
    weights: TransitionWeights | None = None,
) -> float:
    """Per-beam saturation scaled by the sublevel's transition weight."""
    if weights is None:
        weights = TransitionWeights()
    return beam_saturation(beam, state, constants) * excitation_weight(
        internal, beam, weights
    )


def excited_sublevel(ground: int, q: int) -> int:
    """Excited index reached from ground sublevel by a sigma^q photon."""
    return ground + q + 1


def apply_multilevel_event(
    state: AtomState,
    internal: InternalState,
    beam: GaussianBeam,
    beam_index: int,
    kin_rng: RngStream,
    internal_rng: RngStream,
    constants: PhysicalConstants = RB85_D2,
    weights: TransitionWeights | None = None,
) -> tuple[AtomState, InternalState]:
    """One absorption/decay cycle with internal-state tracking.

    The beam's pair axis becomes the quantization axis (re-sampling the
    sublevel if it changed); excitation is deterministic given the photon
    polarization; the decay branch is drawn from the internal stream; the
    recoil kinematics are identical to the two-level engine and consume the
    same two kinematic uniforms.
    """
    if weights is None:
        weights = TransitionWeights()
    axis = quantization_axis_for_beam(beam_index)
    internal = reproject_state(internal, axis, internal_rng)
    e = excited_sublevel(internal.sublevel, beam.polarization)
    u = internal_rng.uniform()
    sub = GROUND_MINUS if u < float(weights.decay_to_minus[e]) else GROUND_PLUS

    vr = constants.recoil_speed
    emission = sample_unit_sphere(kin_rng)
    v = state.velocity + vr * beam.direction + vr * emission
    return (
        AtomState(state.position.copy(), v, state.t, sub),
        InternalState(sub, axis),
    )
