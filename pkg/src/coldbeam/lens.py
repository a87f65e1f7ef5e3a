"""All-optical focusing analysis: counter-propagating beams focused off-axis.

Each lens beam is focused a distance p before the central axis (measured
along its own propagation direction), so its intensity falls across the
interaction region. For an atom displaced along the beam axis the two
opposing scattering rates then differ, giving a net restoring radiation
force; the ratio of the two rates at zero velocity quantifies the usable
imbalance. Useful imbalance requires waists far below the beam separation
scale, which is the practical obstacle to such a lens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import AtomState, PhysicalConstants, RB85_D2, vec3
from .multilevel import TransitionWeights
from .scatter import (
    GaussianBeam,
    SIGMA_MINUS,
    SIGMA_PLUS,
    beam_saturation,
)
from .source import SourceConfig
from .transport import ChamberGeometry, EnsembleResult, run_beam_simulation


@dataclass(frozen=True)
class LensConfig:
    """Focused counter-propagating beam pair(s) forming the lens.

    ``waist_focus`` is the spot size at the focus, ``spot_at_center`` the
    spot size where the beam crosses the central axis; the focus offset p
    follows from the two via the Rayleigh range (or may be given
    explicitly, in which case it must be consistent).
    ``s0_center`` is the on-resonance peak saturation at the axis crossing,
    not at the focus.
    """

    waist_focus: float = 0.5e-6  # m
    spot_at_center: float = 5e-3  # m
    s0_center: float = 3.0
    detuning: float = -0.5 * RB85_D2.linewidth  # rad/s
    wavelength: float = RB85_D2.wavelength
    focus_offset: float | None = None  # m; derived when omitted

    def __post_init__(self):
        if self.waist_focus <= 0.0:
            raise ValueError("waist_focus must be positive")
        if self.spot_at_center < self.waist_focus:
            raise ValueError("spot_at_center cannot be below the focus waist")
        if self.s0_center < 0.0:
            raise ValueError("s0_center must be non-negative")
        derived = self._derived_offset()
        if self.focus_offset is None:
            object.__setattr__(self, "focus_offset", derived)
        else:
            scale = max(abs(derived), self.rayleigh_range)
            if abs(self.focus_offset - derived) > 1e-6 * scale + 1e-15:
                raise ValueError(
                    "focus_offset inconsistent with waist_focus/spot_at_center"
                )

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.waist_focus**2 / self.wavelength

    def _derived_offset(self) -> float:
        ratio = self.spot_at_center / self.waist_focus
        return self.rayleigh_range * math.sqrt(ratio * ratio - 1.0)

    @property
    def s0_focus(self) -> float:
        """Peak saturation at the focus implied by the center value."""
        r = self.spot_at_center / self.waist_focus
        return self.s0_center * r * r


def lens_beams(
    cfg: LensConfig, center=None, axes: str = "xy"
) -> tuple[GaussianBeam, ...]:
    """Build the lens beams around ``center``.

    ``axes`` selects 'x' (one pair, 1-D lens) or 'xy' (two pairs). Both
    beams of a pair have their focus at axis coordinate -p, i.e. upstream
    of the center along their own propagation direction.
    """
    if center is None:
        center = vec3(0.0, 0.0, 0.0)
    if axes not in ("x", "xy"):
        raise ValueError("axes must be 'x' or 'xy'")
    dirs = [vec3(1.0, 0.0, 0.0), vec3(-1.0, 0.0, 0.0)]
    ids = [0, 0]
    if axes == "xy":
        dirs += [vec3(0.0, 1.0, 0.0), vec3(0.0, -1.0, 0.0)]
        ids += [1, 1]
    pols = (SIGMA_PLUS, SIGMA_MINUS, SIGMA_PLUS, SIGMA_MINUS)
    return tuple(
        GaussianBeam(
            direction=d,
            axis_point=np.array(center, dtype=float),
            waist=cfg.waist_focus,
            s0=cfg.s0_focus,
            detuning=cfg.detuning,
            focus=-cfg.focus_offset,
            polarization=pol,
            wavelength=cfg.wavelength,
            axis_id=i,
        )
        for d, i, pol in zip(dirs, ids, pols)
    )


@dataclass(frozen=True)
class LensBeamSet:
    """Beam container accepted by run_beam_simulation."""

    beams: tuple


def scattering_ratio(
    cfg: LensConfig, offset: float, constants: PhysicalConstants = RB85_D2
) -> float:
    """Rate ratio of the two opposing lens beams for an atom at rest.

    The atom sits on the pair axis, displaced by ``offset`` from the
    center; the ratio is counter-beam over co-beam rate, > 1 on the side
    of positive offset (the restoring imbalance). With equal detunings and
    zero velocity the saturated denominators cancel, so this is exactly
    the local intensity ratio.
    """
    plus, minus = lens_beams(cfg, axes="x")[:2]
    state = AtomState(vec3(offset, 0.0, 0.0), vec3(0.0, 0.0, 0.0))
    s_plus = beam_saturation(plus, state, constants)
    s_minus = beam_saturation(minus, state, constants)
    if s_plus <= 0.0 or s_minus <= 0.0:
        raise ValueError(f"offset {offset} lies outside the lens beams")
    return s_minus / s_plus


def imbalance_map(
    cfg: LensConfig, offsets, constants: PhysicalConstants = RB85_D2
) -> list[tuple[float, float]]:
    """scattering_ratio over an offset grid, as (offset, ratio) rows."""
    return [(float(x), scattering_ratio(cfg, float(x), constants)) for x in offsets]


def rms_radius_curve(result: EnsembleResult, z_grid) -> list[tuple[float, float]]:
    """Downstream RMS transverse radius vs z from the lens-exit states.

    Atoms fly ballistically after leaving the beams, so each exit state is
    extrapolated linearly to every probe plane.
    """
    ex = result.exited_molasses()
    ex = ex[ex[:, 6] > 0.0]
    if len(ex) == 0:
        raise ValueError("no atoms left the lens region moving forward")
    rows = []
    for z in z_grid:
        tau = (float(z) - ex[:, 3]) / ex[:, 6]
        x = ex[:, 1] + ex[:, 4] * tau
        y = ex[:, 2] + ex[:, 5] * tau
        rows.append((float(z), float(np.sqrt(np.mean(x * x + y * y)))))
    return rows


def simulate_lens(
    cfg: LensConfig,
    source: SourceConfig,
    n_atoms: int = 2000,
    engine: str = "two-level",
    lens_center=None,
    chamber: ChamberGeometry | None = None,
    z_grid=None,
    constants: PhysicalConstants = RB85_D2,
    seed: int = 0,
    threads: int = 1,
    weights: TransitionWeights | None = None,
) -> tuple[EnsembleResult, list[tuple[float, float]]]:
    """Send a sampled beam through the lens and trace the radius downstream.

    Returns the ensemble result and the (z, rms_radius) curve; a minimum in
    the curve beyond the lens region signals focusing.
    """
    if lens_center is None:
        lens_center = vec3(0.0, 0.0, 10e-3)
    if chamber is None:
        half = max(0.05, 4.0 * cfg.spot_at_center)
        chamber = ChamberGeometry(
            x_half=half, y_half=half, z_min=-0.02, z_max=float(lens_center[2]) + 0.12
        )
    if z_grid is None:
        z0 = float(lens_center[2]) + 1.2 * cfg.spot_at_center
        z_grid = np.linspace(z0, z0 + 0.1, 101)
    beam_set = LensBeamSet(beams=lens_beams(cfg, center=lens_center, axes="xy"))
    result = run_beam_simulation(
        source,
        molasses=beam_set,
        cavity=None,
        chamber=chamber,
        n_atoms=n_atoms,
        engine=engine,
        constants=constants,
        seed=seed,
        threads=threads,
        weights=weights,
    )
    return result, rms_radius_curve(result, z_grid)
