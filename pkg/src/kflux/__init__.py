"""Random-walk and random-chord estimation of the boundary-flux constant K_n."""

from .chords import ChordMethod, ChordStats, mc_mean_chord, sample_chord, walk_chord_equivalence
from .experiment import ExperimentConfig, SpeedEstimateInput, TrialRecord, emit, estimate_speed, run_experiment
from .geometry import (
    BallGeometry,
    DomainError,
    ExactK,
    exact_k,
    mean_chord,
    theoretical_k,
    unit_ball_volume,
    unit_sphere_area,
)
from .sampling import ConfigError, RngStream, SampleMode, sample_point_in_ball, sample_unit_direction
from .sphere2 import (
    CapSpec,
    S2WalkConfig,
    cap_boundary_length,
    cap_mean_chord,
    cap_volume,
    geodesic_chord_length,
    s2_walk_trial,
)
from .walker import WalkConfig, WalkerState, WalkStats, collision_point, estimate_mean_path, reflect_step, run_trial

__version__ = "0.1.0"
