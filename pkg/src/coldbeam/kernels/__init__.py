"""Simulation kernels: compiled extension when available, pure Python otherwise.

The two implementations are bit-identical twins (enforced by tests); the
compiled one releases the GIL so atoms parallelize across threads. Results
depend only on (config, seed, atom index), never on thread count or backend.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..rng import RngStream
from . import layout as L
from . import pykernel

try:
    from . import _fast
except ImportError:  # pure-Python fallback
    _fast = None

HAVE_COMPILED = _fast is not None


def backend_name(backend: str | None = None) -> str:
    """Resolve a backend request ('cython', 'python', or None for auto)."""
    if backend in (None, "auto"):
        return "cython" if HAVE_COMPILED else "python"
    if backend == "cython":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel requested but not built")
        return "cython"
    if backend == "python":
        return "python"
    raise ValueError(f"unknown kernel backend {backend!r}")


@dataclass
class KernelParams:
    """Flat arrays consumed by the kernels (see layout.py for offsets)."""

    scal: np.ndarray
    iscal: np.ndarray
    beams: np.ndarray
    bints: np.ndarray
    cg_exc: np.ndarray
    cg_cross: np.ndarray
    dec_minus: np.ndarray
    seed: int


def build_params(
    constants,
    source,
    beams,
    engine: str,
    cavity=None,
    box=None,
    step_cap: int = 10_000_000,
    seed: int = 0,
    weights=None,
) -> KernelParams:
    """Assemble kernel arrays from the high-level configuration objects.

    ``cavity`` needs .mode_center, .axis, .waist, .gap attributes; ``box``
    is (xmin, xmax, ymin, ymax, zmin, zmax). ``weights`` overrides the
    six-level transition weights (e.g. TransitionWeights.force_unity()).
    """
    from ..multilevel import TransitionWeights
    from ..scatter import LINEAR
    from ..source import max_transverse_speed

    engine_id = {"none": L.ENGINE_NONE, "two-level": L.ENGINE_TWO_LEVEL,
                 "six-level": L.ENGINE_SIX_LEVEL}.get(engine)
    if engine_id is None:
        raise ValueError(f"unknown engine {engine!r}")
    if engine_id != L.ENGINE_NONE and not beams:
        raise ValueError(f"engine {engine!r} requires at least one beam")
    if engine_id == L.ENGINE_SIX_LEVEL:
        for b in beams:
            if b.polarization == LINEAR:
                raise ValueError("six-level engine supports sigma+/- beams only")

    scal = np.zeros(L.N_SCAL, dtype=np.float64)
    scal[L.S_GAMMA] = constants.linewidth
    scal[L.S_KMAG] = constants.wavenumber
    scal[L.S_VR] = constants.recoil_speed
    if source is not None:
        scal[L.S_SRC_CX : L.S_SRC_CZ + 1] = source.hole_center
        scal[L.S_SRC_RADIUS] = 0.5 * source.hole_diameter
        scal[L.S_SRC_VTMAX] = max_transverse_speed(source)
        scal[L.S_SRC_V0] = source.v0
        scal[L.S_SRC_SIGMA] = source.sigma_vz
        scal[L.S_ROT : L.S_ROT + 9] = source.rotation().ravel()
    else:
        # Traced runs start from an explicit state; source block unused.
        scal[L.S_SRC_V0] = 1.0
        scal[L.S_ROT : L.S_ROT + 9] = np.eye(3).ravel()
    if cavity is not None:
        scal[L.S_CAV_CX : L.S_CAV_CZ + 1] = cavity.mode_center
        scal[L.S_CAV_AX : L.S_CAV_AZ + 1] = cavity.axis
        scal[L.S_CAV_WC] = cavity.waist
        scal[L.S_CAV_HG] = 0.5 * cavity.gap
    if box is None:
        box = (-1e3, 1e3, -1e3, 1e3, -1e3, 1e3)
    scal[L.S_BOX : L.S_BOX + 6] = box

    iscal = np.zeros(L.N_ISCAL, dtype=np.int64)
    iscal[L.I_ENGINE] = engine_id
    iscal[L.I_CAVITY] = 0 if cavity is None else 1
    iscal[L.I_STEP_CAP] = int(step_cap)
    iscal[L.I_NBEAMS] = len(beams)

    bgeom, bints = L.beam_rows(beams)
    if len(beams) == 0:
        bgeom = np.zeros((1, L.N_BCOLS))
        bints = np.zeros((1, 2), dtype=np.int64)

    if weights is None:
        weights = TransitionWeights()
    cg_exc = np.ascontiguousarray(weights.excitation, dtype=np.float64)
    cg_cross = np.full(2, weights.cross_axis, dtype=np.float64)
    dec_minus = np.ascontiguousarray(weights.decay_to_minus, dtype=np.float64)

    return KernelParams(scal, iscal, bgeom, bints, cg_exc, cg_cross, dec_minus,
                        int(seed))


def allocate_outputs(n: int) -> dict:
    return {
        "outcome": np.zeros(n, dtype=np.int64),
        "nevents": np.zeros(n, dtype=np.int64),
        "final": np.zeros((n, 7), dtype=np.float64),
        "mexit": np.full((n, 7), np.nan, dtype=np.float64),
        "internal": np.full(n, -1, dtype=np.int64),
    }


def simulate_ensemble(
    params: KernelParams, n_atoms: int, threads: int = 1, backend: str | None = None
) -> dict:
    """Simulate atoms 0..n-1; outputs are independent of threads and backend."""
    name = backend_name(backend)
    out = allocate_outputs(n_atoms)
    if name == "cython":
        chunk_fn = _fast.simulate_chunk
    else:
        chunk_fn = pykernel.simulate_chunk

    def run(lo, hi):
        chunk_fn(
            params.scal,
            params.iscal,
            params.beams,
            params.bints,
            params.cg_exc,
            params.cg_cross,
            params.dec_minus,
            params.seed,
            lo,
            hi,
            out["outcome"],
            out["nevents"],
            out["final"],
            out["mexit"],
            out["internal"],
        )

    threads = max(1, int(threads))
    if threads == 1 or n_atoms < 2 * threads:
        run(0, n_atoms)
    else:
        chunk = max(1, math.ceil(n_atoms / (threads * 4)))
        bounds = [(lo, min(lo + chunk, n_atoms)) for lo in range(0, n_atoms, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(run, lo, hi) for lo, hi in bounds]
            for f in futures:
                f.result()
    return out


def trace_atom(params: KernelParams, atom_index: int) -> tuple:
    """Re-run one atom on the pure kernel, recording every waypoint.

    Bit-identical to the bulk kernels, so traced trajectories match the
    ensemble results exactly.
    """
    trace: list = []
    kin = RngStream(params.seed, 2 * atom_index)
    intr = RngStream(params.seed, 2 * atom_index + 1)
    result = pykernel.run_atom(
        tuple(params.scal),
        tuple(int(v) for v in params.iscal),
        tuple(tuple(r) for r in params.beams),
        tuple(tuple(int(v) for v in r) for r in params.bints),
        tuple(tuple(r) for r in params.cg_exc),
        tuple(params.cg_cross),
        tuple(params.dec_minus),
        kin,
        intr,
        trace=trace,
    )
    return result, trace


def trace_molasses(
    state,
    cfg,
    constants,
    rng,
    *,
    internal_rng=None,
    engine: str = "two-level",
    step_cap: int = 10_000_000,
    max_events: int | None = None,
):
    """Scatter a given atom in a beam set until it leaves the 1/e^2 region.

    Implements scatter.evolve_in_molasses on the pure kernel; returns the
    trajectory as a list of AtomState.
    """
    from ..core import AtomState
    from ..scatter import StepCapExceeded

    if internal_rng is None:
        internal_rng = RngStream(rng.seed, rng.stream | (1 << 63))

    params = build_params(
        constants,
        None,
        list(cfg.beams),
        engine,
        cavity=None,
        box=None,
        step_cap=step_cap,
        seed=rng.seed,
    )
    init = (
        state.t,
        float(state.position[0]),
        float(state.position[1]),
        float(state.position[2]),
        float(state.velocity[0]),
        float(state.velocity[1]),
        float(state.velocity[2]),
        int(state.internal),
    )
    trace: list = []
    outcome, events, final, mexit, m = pykernel.run_atom(
        tuple(params.scal),
        tuple(int(v) for v in params.iscal),
        tuple(tuple(r) for r in params.beams),
        tuple(tuple(int(v) for v in r) for r in params.bints),
        tuple(tuple(r) for r in params.cg_exc),
        tuple(params.cg_cross),
        tuple(params.dec_minus),
        rng,
        internal_rng,
        init_state=init,
        trace=trace,
        stop_on_exit=True,
        max_events=max_events,
    )
    if outcome == L.OUTCOME_CAP:
        raise StepCapExceeded(f"stream {rng.stream}", events)
    if len(trace) >= 2 and trace[-1] == trace[-2]:
        trace.pop()
    states = [
        AtomState(np.array(r[1:4]), np.array(r[4:7]), r[0], m) for r in trace
    ]
    return states
