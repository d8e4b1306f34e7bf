"""Deterministic multi-drone pursuit-evasion engine with curriculum tooling.

A team of speed-limited drones chases a faster scripted evader inside a
cylindrical arena with cylinder obstacles. The package provides the
simulation core (potential-field evader, reduced drone dynamics, shaped
rewards), heuristic pursuit baselines, a feasibility filter for randomized
scenarios, the dual-curriculum task generator, and a line-protocol bridge so
external learners can drive the drones.
"""

from .curriculum import (
    ActiveArchive,
    AlwaysCaptureTrainer,
    AlwaysFailTrainer,
    CurriculumConfig,
    CurriculumReport,
    HeuristicTrainer,
    PhaseSequence,
    evaluate_phase,
    get_order,
    measure_phase,
    run_dual_curriculum,
    select_external,
    update_active_archive,
)
from .dynamics import (
    DroneCommand,
    QuadrotorParams,
    ThrustRateCommand,
    VelocityCommand,
    clamp_to_arena,
    step_quadrotor_model,
    step_velocity_model,
)
from .episode import (
    EpisodeOptions,
    EpisodeResult,
    Metrics,
    PolicyError,
    aggregate_metrics,
    check_capture,
    compute_reward,
    run_batch,
    run_episode,
    run_scenario_batch,
)
from .evader import EvaderForceBreakdown, evader_force, evader_velocity
from .feasibility import (
    OccupancyGrid,
    check_task_feasible,
    is_feasible,
    rasterize,
    task_filter_sample,
)
from .policies import (
    AngelaniConfig,
    ApfConfig,
    ExternalConfig,
    HeuristicPolicy,
    JanosovConfig,
    ZeroConfig,
    angelani_action,
    apf_action,
    build_observation,
    build_observation_matrix,
    grid_search,
    janosov_action,
    make_policy_config,
    observation_length,
)
from .world import (
    ArenaSpec,
    DroneState,
    EvaderState,
    ExternalParams,
    IntrinsicParams,
    Obstacle,
    RandomizationConfig,
    SamplingError,
    ScenarioError,
    TaskParams,
    WorldState,
    load_scenario,
    sample_external_params,
    save_scenario,
)

__version__ = "0.1.0"
