"""Joint position and beampattern estimation for directional RF emitters.

Library layout:

* :mod:`beamloc.geometry` -- beampattern, bearings, delays, steering vectors
* :mod:`beamloc.scenario` -- scenario/grid dataclasses and JSON configs
* :mod:`beamloc.signals` -- frequency-domain observation synthesis
* :mod:`beamloc.estimators` -- DPD costs, grid searches, alternating estimator
* :mod:`beamloc.crlb` -- Fisher information and the position error bound
* :mod:`beamloc.metrics` -- Monte Carlo engine and evaluation metrics
* :mod:`beamloc.cli` -- `beamloc` command-line front end
"""

__version__ = "0.1.0"

from .geometry import (
    DegenerateGeometryError,
    alpha_of_beta,
    beampattern_gain,
    directional_attenuation,
    link_budget_kappa,
    pattern_gain_at_offset,
    propagation_delay,
    receive_angle,
    steering_vector,
    transmit_angle,
    ula_truth_gain,
    wrap_angle,
)
from .scenario import (
    BeampatternGrid,
    BeampatternParams,
    ChannelModel,
    ConfigError,
    CrlbSettings,
    EmitterTruth,
    EstimatorSettings,
    McSettings,
    PositionGrid,
    ReceiverArray,
    RunConfig,
    Scenario,
    SignalConfig,
    config_digest,
    load_config,
    parse_config,
    serialize_config,
)
from .signals import (
    ObservationSet,
    calibrate_noise_sigma,
    composite_steering,
    sample_covariance,
    synthesize_observation,
    truth_attenuations,
)
from .estimators import (
    CostSurface,
    EstimateResult,
    PatternSurface,
    alternating_maximization,
    baseline_aoa_tdoa,
    baseline_mvdr_omni,
    cost_matched,
    cost_mvdr,
    grid_search_beampattern,
    grid_search_position,
)
from .crlb import (
    CrlbReport,
    average_sigma_p,
    fisher_matrix,
    mean_derivatives,
    model_mean,
    pack_params,
    position_crlb,
    sensitivity_sweep,
    unpack_params,
)
from .metrics import (
    METHODS,
    MethodAggregate,
    SweepResult,
    TrialRecord,
    half_power_region_count,
    half_power_uncertainty,
    run_monte_carlo,
    trial_seed,
    trimmed_mean_error,
)
