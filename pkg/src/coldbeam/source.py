"""Initial-state sampling for the cold-atom beam leaving the extraction hole.

Atoms start uniformly distributed over the hole area with transverse speeds
capped by the aperture geometry (hole diameter over trap-to-hole distance
times the mean longitudinal speed) and longitudinal speeds drawn from a
truncated Gaussian. The sampled state is then rotated so the beam axis
points along the configured polar/azimuthal launch direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import AtomState, TWO_PI, Vec3, fwhm_to_sigma, vec3
from .rng import RngStream


@dataclass(frozen=True)
class SourceConfig:
    """Geometry and velocity distribution of the atomic-beam source.

    ``mot_hole_distance`` is the distance from the trap center to the
    extraction hole; together with ``hole_diameter`` it sets the geometric
    collimation cap on transverse speeds. Launch angles are in radians;
    ``theta = 0`` launches along +z.
    """

    hole_diameter: float = 1.5e-3  # m
    mot_hole_distance: float = 80e-3  # m; not measured on the apparatus
    v0: float = 14.0  # m/s, mean longitudinal speed
    fwhm: float = 2.7  # m/s, longitudinal FWHM
    theta: float = 0.0  # rad, polar launch angle
    phi: float = 0.0  # rad, azimuthal launch angle
    hole_center: Vec3 = field(default_factory=lambda: vec3(0.0, 0.0, 0.0))

    def __post_init__(self):
        if self.hole_diameter <= 0.0:
            raise ValueError("hole_diameter must be positive")
        if self.mot_hole_distance <= self.hole_diameter:
            raise ValueError("mot_hole_distance must exceed the hole diameter")
        if self.v0 <= 0.0 or self.fwhm <= 0.0:
            raise ValueError("v0 and fwhm must be positive")
        if not 0.0 <= self.theta < math.pi / 2.0:
            raise ValueError("theta must lie in [0, pi/2)")

    @property
    def sigma_vz(self) -> float:
        return fwhm_to_sigma(self.fwhm)

    def rotation(self) -> np.ndarray:
        """Matrix mapping source-frame vectors (beam along +z') to the lab."""
        ct, st = math.cos(self.theta), math.sin(self.theta)
        cp, sp = math.cos(self.phi), math.sin(self.phi)
        return np.array(
            [
                [ct * cp, -sp, st * cp],
                [ct * sp, cp, st * sp],
                [-st, 0.0, ct],
            ]
        )


def max_transverse_speed(cfg: SourceConfig) -> float:
    """Geometric collimation cap (D_h / d_mh) * v0, in m/s."""
    return (cfg.hole_diameter / cfg.mot_hole_distance) * cfg.v0


def sample_initial_state(cfg: SourceConfig, rng: RngStream) -> AtomState:
    """Draw one atom leaving the hole.

    Draw order is fixed (position disk, transverse-velocity disk, then
    Box-Muller pairs until the longitudinal speed is positive) and is
    mirrored by the simulation kernels.
    """
    half = 0.5 * cfg.hole_diameter
    u1 = rng.uniform()
    u2 = rng.uniform()
    r = half * math.sqrt(u1)
    psi = TWO_PI * u2
    sx = r * math.cos(psi)
    sy = r * math.sin(psi)

    vt_max = max_transverse_speed(cfg)
    u3 = rng.uniform()
    u4 = rng.uniform()
    rv = vt_max * math.sqrt(u3)
    psiv = TWO_PI * u4
    svx = rv * math.cos(psiv)
    svy = rv * math.sin(psiv)

    sigma = cfg.sigma_vz
    while True:
        vz = cfg.v0 + sigma * rng.gauss()
        if vz > 0.0:
            break

    rot = cfg.rotation()
    pos = cfg.hole_center + rot @ np.array([sx, sy, 0.0])
    vel = rot @ np.array([svx, svy, vz])
    return AtomState(position=pos, velocity=vel, t=0.0)
