"""coldbeam: Monte Carlo transport of a cold atomic beam into a cavity mode.

Simulates photon-scattering deflection and collimation of a slow rubidium
beam by a 2-D optical molasses, its geometric coupling to an optical cavity
mode, an all-optical lens variant, and the analytic Fabry-Perot finesse of
the cavity itself.
"""

from .core import (
    AtomState,
    PhysicalConstants,
    RB85_D2,
    fwhm_to_sigma,
    recoil_speed,
    sample_unit_sphere,
    vec3,
)
from .rng import RngStream
from .source import SourceConfig, max_transverse_speed, sample_initial_state
from .scatter import (
    GaussianBeam,
    MolassesConfig,
    ScatteringEvent,
    StepCapExceeded,
    apply_scattering_event,
    beam_saturation,
    evolve_in_molasses,
    local_saturation,
    make_molasses,
    sample_wait_time,
    select_absorption_beam,
    spot_size,
    total_scattering_rate,
)
from .multilevel import (
    InternalState,
    TransitionWeights,
    apply_multilevel_event,
    quantization_axis_for_beam,
    reproject_state,
    weighted_scattering_rate,
)
from .transport import (
    CavityGeometry,
    ChamberGeometry,
    EnsembleResult,
    check_coupling,
    propagate_free,
    run_beam_simulation,
)
from .resonator import MirrorSpec, finesse, output_fraction
from .sweeps import (
    BeamStats,
    SweepSpec,
    detuning_sweep,
    doppler_limit,
    mean_polar_angle,
    transverse_temperature,
)
from .lens import LensConfig, imbalance_map, scattering_ratio, simulate_lens

__version__ = "0.1.0"
