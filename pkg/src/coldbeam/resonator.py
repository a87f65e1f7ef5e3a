"""Analytic Fabry-Perot resonator figures from measured mirror transmissions.

For mirror intensity transmissions T1 and T2 (and optional per-mirror
absorption/scatter losses L1, L2), the finesse in the low-loss limit is

    F = pi / (1 - sqrt((1 - T1 - L1) (1 - T2 - L2)))

and the share of transmitted photons leaving through mirror 2 is
T2 / (T1 + T2). Transmissions are dimensionless (e.g. 8 ppm = 8e-6).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class MirrorSpec:
    """One cavity mirror: intensity transmission and radius of curvature."""

    transmission: float
    radius_of_curvature: float = math.inf  # m
    label: str = ""

    def __post_init__(self):
        if not 0.0 <= self.transmission < 1.0:
            raise ValueError("transmission must lie in [0, 1)")


def _check_coefficient(name: str, value: float):
    if not 0.0 <= value < 1.0:
        raise ValueError(f"{name} must lie in [0, 1), got {value}")


def finesse(t1: float, t2: float, loss1: float = 0.0, loss2: float = 0.0) -> float:
    """Cavity finesse from mirror transmissions, small-absorption limit.

    Optional per-mirror losses fold into the round-trip attenuation the
    same way the transmissions do. The lossless limit t1 = t2 = 0 has
    infinite finesse and is rejected.
    """
    for name, v in (("t1", t1), ("t2", t2), ("loss1", loss1), ("loss2", loss2)):
        _check_coefficient(name, v)
    a1 = t1 + loss1
    a2 = t2 + loss2
    if a1 == 0.0 and a2 == 0.0:
        raise ValueError("lossless cavity: finesse diverges (t1 = t2 = 0)")
    return math.pi / (1.0 - math.sqrt((1.0 - a1) * (1.0 - a2)))


def output_fraction(t1: float, t2: float) -> float:
    """Fraction of transmitted photons exiting through mirror 2: T2/(T1+T2)."""
    _check_coefficient("t1", t1)
    _check_coefficient("t2", t2)
    if t1 + t2 <= 0.0:
        raise ValueError("output fraction undefined for t1 = t2 = 0")
    return t2 / (t1 + t2)
