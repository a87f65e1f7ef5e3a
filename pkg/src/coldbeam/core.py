"""Physical constants, shared value types, and elementary kinematics.

Vectors are plain float64 numpy arrays of length 3 (``Vec3``); positions are
in meters, velocities in m/s, times in seconds, angular frequencies in rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import RngStream

Vec3 = np.ndarray

# CODATA 2018
HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J/K
ATOMIC_MASS_KG = 1.66053906892e-27  # kg

TWO_PI = 6.283185307179586


def vec3(x: float, y: float, z: float) -> Vec3:
    """Build a 3-vector, rejecting non-finite components."""
    v = np.array([x, y, z], dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"vector components must be finite, got {v}")
    return v


def norm(v: Vec3) -> float:
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def unit(v: Vec3) -> Vec3:
    n = norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


@dataclass(frozen=True)
class PhysicalConstants:
    """Atomic and fundamental constants for the simulated transition.

    Defaults are the Rb-85 D2 line (the 780 nm cycling transition).
    ``linewidth`` is the angular decay rate gamma in rad/s.
    """

    wavelength: float = 780.241e-9  # m
    linewidth: float = TWO_PI * 6.0666e6  # rad/s
    mass: float = 84.9118 * ATOMIC_MASS_KG  # kg
    hbar: float = HBAR
    k_b: float = K_B

    def __post_init__(self):
        for name in ("wavelength", "linewidth", "mass", "hbar", "k_b"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def wavenumber(self) -> float:
        """k = 2 pi / wavelength, in 1/m."""
        return TWO_PI / self.wavelength

    @property
    def recoil_speed(self) -> float:
        """Single-photon recoil speed hbar k / m, in m/s."""
        return self.hbar * self.wavenumber / self.mass


RB85_D2 = PhysicalConstants()

# Internal-state sentinel for the two-level engine (no sublevel tracking).
TWO_LEVEL_INTERNAL = -1


@dataclass
class AtomState:
    """Position, velocity, internal sublevel, and elapsed time of one atom."""

    position: Vec3
    velocity: Vec3
    t: float = 0.0
    internal: int = TWO_LEVEL_INTERNAL

    def copy(self) -> "AtomState":
        return AtomState(
            self.position.copy(), self.velocity.copy(), self.t, self.internal
        )

    @property
    def speed(self) -> float:
        return norm(self.velocity)


def fwhm_to_sigma(fwhm: float) -> float:
    """Convert a Gaussian full width at half maximum to a standard deviation.

    sigma = fwhm / (2 sqrt(2 ln 2)).
    """
    if fwhm <= 0.0:
        raise ValueError(f"fwhm must be positive, got {fwhm}")
    return fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))


def recoil_speed(constants: PhysicalConstants) -> float:
    """Recoil speed hbar k / m for the given constants, in m/s."""
    return constants.hbar * (TWO_PI / constants.wavelength) / constants.mass


def sample_unit_sphere(rng: RngStream) -> Vec3:
    """Isotropic unit vector: cos(theta) uniform in [-1, 1], phi in [0, 2 pi).

    Consumes exactly two uniforms, in (cos theta, phi) order; the kernels
    reuse this draw order for photon re-emission.
    """
    c = 2.0 * rng.uniform() - 1.0
    s = math.sqrt(1.0 - c * c)
    phi = TWO_PI * rng.uniform()
    return np.array([s * math.cos(phi), s * math.sin(phi), c])
