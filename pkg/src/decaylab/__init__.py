"""decaylab: a spectral laboratory for damped wave generators.

Finite Fourier truncations of the damped wave system

    u'' + P u + Q*Q u' = 0

with P a nonnegative selfadjoint propagator and Q an observation operator
that may be unbounded on H.  The lab measures control constants, resolvent
growth, wavepacket observability, dilation to fractional propagators, and
semigroup decay, and checks each measured exponent against the predicted
one.
"""

__version__ = "0.1.0"

from .errors import CheckFailure, DecayLabError, InvalidArgumentError, NumericError
from .spectral import (
    Mode,
    SpectralModel,
    apply_calculus,
    build_circle_model,
    describe_model,
    interpolation_check,
    lambda_alpha_power,
    lambda_power,
    power_model,
    sobolev_norm,
    spectral_projector,
)
from .damping import (
    DampingFunctionSpec,
    ObservationOperator,
    compose_fractional,
    indicator_observation,
    measure_gamma,
    multiplier_observation,
    structural_observation,
)
from .resolvent import (
    GeneratorAssembly,
    ResolventSweep,
    assemble_generator,
    assemble_pencil,
    generator_resolvent_norm,
    kernel_projector,
    pencil_resolvent_norm,
    resolvent_sweep,
    riesz_projector,
    verify_pencil_relations,
)
from .control import (
    ControlProfile,
    PredictionRecord,
    control_constant,
    control_profile,
    control_to_resolvent_prediction,
    hautus_generator_prediction,
    resolvent_to_control_prediction,
    schrodinger_observability_constant,
    wavepacket_control_check,
    wavepacket_projector,
)
from .dilation import (
    CarlemanGrowth,
    DilationComparison,
    FractionalPropagationReport,
    OptimalityWitness,
    carleman_growth_check,
    commuting_losslessness_check,
    dilate_general,
    dilate_profile,
    fractional_propagation_check,
    optimality_witness,
    verify_dilation,
)
from .evolution import (
    BackwardUniquenessProbe,
    DecayCurve,
    DecayFit,
    EnergyTrajectory,
    WeakMonotonicityReport,
    backward_uniqueness_probe,
    decay_curve,
    decomposition_check,
    energy_trajectory,
    fit_decay_law,
    random_state,
    rate_translate,
    semigroup_matrix,
    spectral_abscissa,
    weak_monotonicity_experiment,
)
from .config import (
    ExperimentConfig,
    GridSpec,
    parse_config,
    read_config,
    serialize_config,
    validate_config,
)
from .reporting import CheckRecord, ScenarioReport, emit_report, read_verdict
from .scenarios import SCENARIOS, run_scenario
