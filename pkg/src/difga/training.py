"""Quadrature-matching objective and plain gradient-descent training.

The objective is the squared mismatch of the signal-mode mean quadratures
between the ideal circuit and the noisy circuit with recovery applied,
(dx)^2 + (dp)^2. Training runs a fixed number of gradient-descent steps from
a given initialization, logging the loss and the full parameter vector
before every update and once more after the last.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .autodiff import value_and_gradient, value_of, DifferentiationError
from .circuits import CircuitSpec, RecoveryParams, ideal_expectations, signal_expectations, build_noisy
from .noise import NoiseModel, mc_expectations

__all__ = ["TrainConfig", "TrainRecord", "TrainingError", "loss", "gd_step", "train"]

NOISE_MODES = ("gaussian-only", "ng-aware")


class TrainingError(RuntimeError):
    """Training aborted on a non-finite objective."""


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer settings: learning rate, step budget, initialization, noise mode.

    In gaussian-only mode the jitter amplitude is forced to zero during
    training regardless of the evaluation model; ng-aware mode trains on the
    sampled kick mixture.
    """

    learning_rate: float = 0.06
    steps: int = 60
    init: tuple[float, ...] | None = None
    noise_mode: str = "ng-aware"

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate!r}")
        if self.steps < 1:
            raise ValueError(f"steps must be at least 1, got {self.steps!r}")
        if self.noise_mode not in NOISE_MODES:
            raise ValueError(f"noise_mode must be one of {NOISE_MODES}, got {self.noise_mode!r}")


@dataclass
class TrainRecord:
    """Full training-run record: per-step losses, parameter trajectory, result."""

    loss_history: np.ndarray
    param_history: np.ndarray
    final_params: RecoveryParams
    wall_time: float


def loss(spec: CircuitSpec, recovery: RecoveryParams, model: NoiseModel, step: int = 0):
    """Squared signal-quadrature mismatch between the ideal and noisy circuits.

    The noisy expectations come from the Monte-Carlo mixture when the model
    carries jitter (delta > 0) and from the deterministic circuit otherwise.
    Differentiable in the recovery parameters.
    """
    ideal_x, ideal_p = ideal_expectations(spec)
    if model.delta > 0.0:
        noisy_x, noisy_p = mc_expectations(spec, recovery, model, step)
    else:
        state = build_noisy(spec, recovery, (0.0,) * (1 + spec.num_ancillas))
        noisy_x, noisy_p = signal_expectations(state)
    dx = ideal_x - noisy_x
    dp = ideal_p - noisy_p
    return dx * dx + dp * dp


def gd_step(theta: np.ndarray, grad: np.ndarray, lr: float) -> np.ndarray:
    """One plain gradient-descent update: theta - lr * grad."""
    theta = np.asarray(theta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if theta.shape != grad.shape:
        raise ValueError(f"parameter/gradient length mismatch: {theta.shape} vs {grad.shape}")
    return theta - lr * grad


def train(spec: CircuitSpec, model: NoiseModel, config: TrainConfig) -> TrainRecord:
    """Gradient-descent training of the recovery layer.

    In ng-aware mode each step draws its kick samples from the step-indexed
    stream (identical samples every step when the model is frozen); in
    gaussian-only mode the objective is deterministic. Aborts on a non-finite
    loss, naming the offending step.
    """
    num_params = 3 * (1 + spec.num_ancillas)
    if config.init is None:
        theta = np.zeros(num_params)
    else:
        theta = np.asarray(config.init, dtype=float)
        if theta.shape != (num_params,):
            raise ValueError(
                f"init has length {theta.size}, circuit needs {num_params} parameters"
            )
    train_model = replace(model, delta=0.0) if config.noise_mode == "gaussian-only" else model

    loss_history = np.empty(config.steps + 1)
    param_history = np.empty((config.steps + 1, num_params))
    started = time.perf_counter()
    for step in range(config.steps):
        def objective(values, _step=step):
            return loss(spec, RecoveryParams(tuple(values)), train_model, _step)

        try:
            value, grad = value_and_gradient(objective, theta)
        except DifferentiationError as err:
            raise TrainingError(f"non-finite loss at step {step}: {err}") from err
        loss_history[step] = value
        param_history[step] = theta
        theta = gd_step(theta, grad, config.learning_rate)

    final_value = value_of(
        loss(spec, RecoveryParams(tuple(theta)), train_model, config.steps)
    )
    if not math.isfinite(final_value):
        raise TrainingError(f"non-finite loss at step {config.steps}")
    loss_history[config.steps] = final_value
    param_history[config.steps] = theta
    return TrainRecord(
        loss_history=loss_history,
        param_history=param_history,
        final_params=RecoveryParams(tuple(float(v) for v in theta)),
        wall_time=time.perf_counter() - started,
    )
