"""softpair: Monte Carlo for spin-singlet fermion pairs with soft radiation.

A decaying source emits two spin-1/2 particles plus an undetermined number of
soft photons.  This package simulates such events (exact singlet statistics
when nothing radiates, photon-compensated spin-parallel events when it does),
applies coincidence selection, and measures correlation and CHSH statistics
with exact per-event angular momentum bookkeeping.

Entry points: ``generate_batch`` for samples, the ``analysis`` module for
estimators, and the ``softpair`` command line for file-based runs.
"""

from ._backend import available_backends, backend_name
from .analysis import (
    CoincidenceCut,
    CorrelationAccumulator,
    CorrelationEstimate,
    ViolationReport,
    chsh_estimate,
    coincidence_filter,
    detect_violations,
    estimate_correlation,
)
from .config import RunConfig, default_config, parse_config, serialize_config
from .emission import (
    EmissionParams,
    PhotonCountDistribution,
    PhotonRecord,
    available_energy,
    parallel_spin_probability,
    photon_count_distribution,
    sample_photons,
)
from .errors import (
    ConditioningError,
    ConfigError,
    EventLogError,
    GenerationError,
    InfeasibleSampleError,
    NormalizationError,
    ParameterError,
    SoftpairError,
    UndersampleError,
)
from .events import (
    Channel,
    Event,
    EventBatch,
    GeneratorConfig,
    generate_batch,
    generate_event,
)
from .logio import read_event_log, write_event_log
from .quantum import (
    Direction,
    JointDistribution,
    TwoQubitSpinState,
    X_AXIS,
    Y_AXIS,
    Z_AXIS,
    chsh_analytic,
    collapse_after_a,
    correlation_analytic,
    joint_distribution,
    make_singlet,
    measure_pair,
    spin_eigenvector,
    spin_projector,
)
from .rng import Xoshiro256

__version__ = "0.1.0"

__all__ = [
    "available_backends", "backend_name",
    "CoincidenceCut", "CorrelationAccumulator", "CorrelationEstimate", "ViolationReport",
    "chsh_estimate", "coincidence_filter", "detect_violations", "estimate_correlation",
    "RunConfig", "default_config", "parse_config", "serialize_config",
    "EmissionParams", "PhotonCountDistribution", "PhotonRecord",
    "available_energy", "parallel_spin_probability", "photon_count_distribution",
    "sample_photons",
    "ConditioningError", "ConfigError", "EventLogError", "GenerationError",
    "InfeasibleSampleError", "NormalizationError", "ParameterError", "SoftpairError",
    "UndersampleError",
    "Channel", "Event", "EventBatch", "GeneratorConfig", "generate_batch", "generate_event",
    "read_event_log", "write_event_log",
    "Direction", "JointDistribution", "TwoQubitSpinState", "X_AXIS", "Y_AXIS", "Z_AXIS",
    "chsh_analytic", "collapse_after_a", "correlation_analytic", "joint_distribution",
    "make_singlet", "measure_pair", "spin_eigenvector", "spin_projector",
    "Xoshiro256",
    "__version__",
]
