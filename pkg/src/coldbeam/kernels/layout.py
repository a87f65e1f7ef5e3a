"""Flat array layout shared by the pure-Python and compiled kernels.

The compiled kernel (_fast.pyx) hardcodes these offsets; change them only
in both places. Scalars live in one float64 vector and one int64 vector so
the kernel call signature stays small.
"""

from __future__ import annotations

import numpy as np

# --- float scalar vector ---------------------------------------------------
S_GAMMA = 0  # rad/s
S_KMAG = 1  # 1/m
S_VR = 2  # m/s
S_SRC_CX = 3
S_SRC_CY = 4
S_SRC_CZ = 5
S_SRC_RADIUS = 6  # hole radius, m
S_SRC_VTMAX = 7  # transverse speed cap, m/s
S_SRC_V0 = 8
S_SRC_SIGMA = 9
S_ROT = 10  # 10..18, row-major source->lab rotation
S_CAV_CX = 19
S_CAV_CY = 20
S_CAV_CZ = 21
S_CAV_AX = 22
S_CAV_AY = 23
S_CAV_AZ = 24
S_CAV_WC = 25  # coupling radius, m
S_CAV_HG = 26  # half mirror gap, m
S_BOX = 27  # 27..32: xmin, xmax, ymin, ymax, zmin, zmax
N_SCAL = 33

# --- int scalar vector -----------------------------------------------------
I_ENGINE = 0
I_CAVITY = 1  # 0/1
I_STEP_CAP = 2
I_NBEAMS = 3
N_ISCAL = 4

ENGINE_NONE = 0
ENGINE_TWO_LEVEL = 1
ENGINE_SIX_LEVEL = 2

# --- per-beam rows (float64 (n, N_BCOLS)) ----------------------------------
B_KX = 0
B_KY = 1
B_KZ = 2
B_AX = 3
B_AY = 4
B_AZ = 5
B_W0 = 6
B_ZR = 7
B_S0 = 8
B_DET = 9
B_FOCUS = 10
N_BCOLS = 11

# per-beam ints (int64 (n, 2)): polarization (+1/-1), pair axis id (0/1)
BI_POL = 0
BI_AXIS = 1

# --- outcomes ----------------------------------------------------------------
OUTCOME_COUPLED = 0
OUTCOME_WALL = 1
OUTCOME_CAP = 2
OUTCOME_EXITED = 3  # traced mode only (stop_on_exit)
OUTCOME_TRUNCATED = 4  # traced mode only (max_events)

OUTCOME_NAMES = {
    OUTCOME_COUPLED: "coupled",
    OUTCOME_WALL: "wall",
    OUTCOME_CAP: "step_cap",
    OUTCOME_EXITED: "exited",
    OUTCOME_TRUNCATED: "truncated",
}


def beam_rows(beams) -> tuple[np.ndarray, np.ndarray]:
    """Pack GaussianBeam objects into kernel arrays."""
    n = len(beams)
    geom = np.zeros((n, N_BCOLS), dtype=np.float64)
    ints = np.zeros((n, 2), dtype=np.int64)
    for i, b in enumerate(beams):
        geom[i, B_KX : B_KZ + 1] = b.direction
        geom[i, B_AX : B_AZ + 1] = b.axis_point
        geom[i, B_W0] = b.waist
        geom[i, B_ZR] = b.rayleigh_range
        geom[i, B_S0] = b.s0
        geom[i, B_DET] = b.detuning
        geom[i, B_FOCUS] = b.focus
        ints[i, BI_POL] = b.polarization
        ints[i, BI_AXIS] = b.axis_id
    return geom, ints
