"""Differentiable multi-mode Gaussian photonic circuits (hbar = 2 moments)
with optical loss, Monte-Carlo phase jitter, and a gradient-trained recovery
layer that restores signal-mode quadrature expectations."""

from .autodiff import (
    DifferentiationError,
    DualScalar,
    finite_diff_gradient,
    gradient,
    seed_parameters,
    value_and_gradient,
)
from .circuits import (
    DEFAULT_SPEC,
    CircuitSpec,
    RecoveryParams,
    build_ideal,
    build_noisy,
    ideal_expectations,
    signal_expectations,
)
from .experiments import (
    DEFAULT_SEED,
    EXPERIMENT_IDS,
    ExperimentResult,
    baseline_error_closed_form,
    gradient_check,
    run_experiment,
)
from .gaussian import (
    AffineSymplectic,
    GaussianState,
    append_vacuum,
    apply_beamsplitter,
    apply_displacement,
    apply_loss_channel,
    apply_loss_via_env,
    apply_rotation,
    apply_squeezing,
    detach,
    discard_mode,
    entanglement_degradation,
    is_symplectic,
    mean_p,
    mean_x,
    symplectic_eigenvalues,
    symplectic_form,
    vacuum_state,
)
from .noise import NoiseModel, evaluation_seed, mc_expectations, sample_kicks
from .training import TrainConfig, TrainRecord, TrainingError, gd_step, loss, train

__version__ = "0.1.0"
