"""Seeded non-Gaussian phase-kick sampling and the Monte-Carlo estimator.

Phase jitter is modeled as per-sample rotations with angles drawn from
N(0, delta^2) on the signal and independently N(0, (kappa*delta)^2) on each
ancilla. Expectations under this noise are the arithmetic mean over K such
Gaussian circuit evaluations, which keeps everything differentiable in the
recovery parameters.

Sampling is a pure function of (seed, step): a counter-based Philox stream is
keyed by the seed and pre-positioned at a disjoint counter block per step,
and uniforms are mapped through the normal inverse CDF. Runs are therefore
reproducible, and re-evaluation at the same step sees identical samples.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import isfinite

import numpy as np
from scipy.special import ndtri

from .circuits import CircuitSpec, RecoveryParams, build_noisy, signal_expectations
from .autodiff import Scalar

__all__ = [
    "NoiseModel",
    "kick_stream",
    "sample_kicks",
    "mc_expectations",
    "evaluation_seed",
    "MASK64",
]

MASK64 = (1 << 64) - 1

# Salt separating post-training evaluation streams from training streams.
EVAL_SEED_SALT = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class NoiseModel:
    """Loss transmissivity plus phase-jitter amplitudes and sampling controls.

    ``frozen=True`` makes every optimization step reuse the step-0 kick set
    instead of refreshing samples per step.
    """

    eta: float
    delta: float = 0.0
    kappa: float = 0.6
    samples: int = 16
    seed: int = 42
    frozen: bool = False

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")
        if not (isfinite(self.delta) and self.delta >= 0.0):
            raise ValueError(f"delta must be a finite non-negative number, got {self.delta!r}")
        if not (isfinite(self.kappa) and self.kappa >= 0.0):
            raise ValueError(f"kappa must be a finite non-negative number, got {self.kappa!r}")
        if self.samples < 1:
            raise ValueError(f"samples must be at least 1, got {self.samples!r}")
        if not 0 <= self.seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")

    def with_seed(self, seed: int) -> "NoiseModel":
        return replace(self, seed=int(seed) & MASK64)


def evaluation_seed(seed: int) -> int:
    """A held-out seed for post-training evaluation, derived from the training seed."""
    return (int(seed) ^ EVAL_SEED_SALT) & MASK64


def kick_stream(seed: int, step: int) -> np.random.Generator:
    """Deterministic generator for one (seed, step) pair.

    Philox is counter-based, so placing each step 2^192 draws apart yields
    non-overlapping streams without sequential advancing.
    """
    # Both arrays must be explicit uint64: large Python ints in plain lists
    # would be coerced through float64 and lose their low bits.
    counter = np.array([0, 0, 0, int(step) & MASK64], dtype=np.uint64)
    key = np.array([int(seed) & MASK64, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def _standard_normals(rng: np.random.Generator, shape) -> np.ndarray:
    # 53-bit uniforms in the open interval (0, 1), then the inverse CDF.
    uniforms = rng.integers(1, 1 << 53, size=shape) / float(1 << 53)
    return ndtri(uniforms)


def sample_kicks(model: NoiseModel, num_ancillas: int, step: int) -> np.ndarray:
    """K kick sets, one row per Monte-Carlo sample: [signal, ancilla_1, ...].

    Signal angles are N(0, delta^2); each ancilla draws independently at
    standard deviation kappa*delta. delta = 0 yields exact zeros.
    """
    effective_step = 0 if model.frozen else int(step)
    rng = kick_stream(model.seed, effective_step)
    normals = _standard_normals(rng, (model.samples, 1 + num_ancillas))
    scales = np.full(1 + num_ancillas, model.kappa * model.delta)
    scales[0] = model.delta
    return normals * scales


def mc_expectations(
    spec: CircuitSpec, recovery: RecoveryParams, model: NoiseModel, step: int
) -> tuple[Scalar, Scalar]:
    """Monte-Carlo averaged signal expectations under phase jitter.

    Builds the noisy circuit once per kick set and averages the signal-mode
    means in a fixed order, so results are run-to-run identical and remain
    differentiable in the recovery parameters. With delta = 0 all kicks are
    zero and the average collapses to the single deterministic evaluation.
    """
    num_ancillas = spec.num_ancillas
    if model.delta == 0.0:
        state = build_noisy(spec, recovery, (0.0,) * (1 + num_ancillas))
        return signal_expectations(state)
    kicks = sample_kicks(model, num_ancillas, step)
    sum_x: Scalar = 0.0
    sum_p: Scalar = 0.0
    for row in kicks:
        x, p = signal_expectations(build_noisy(spec, recovery, row))
        sum_x = sum_x + x
        sum_p = sum_p + p
    return sum_x / model.samples, sum_p / model.samples
