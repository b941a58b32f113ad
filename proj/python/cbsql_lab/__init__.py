"""Python bindings for the cbsql C++ core."""

from ._core import (  # noqa: F401
    ConfigError,
    EmptyInput,
    EpisodeFinished,
    Error,
    FactoredKtModel,
    InvalidObservation,
    InvalidParameter,
    NonLearningModel,
    OperatorMode,
    ShapeError,
    TemperatureSchedule,
    aggregate,
    chain_optimal_return,
    distributional_soft_target,
    mellowmax,
    nstep_soft_return,
    policy_entropy,
    project_to_support,
    pseudo_count,
    reproduce_chainwalk,
    run_experiment,
    soft_backup_target,
    softmax_policy,
)
