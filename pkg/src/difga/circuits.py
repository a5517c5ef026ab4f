"""Builders for the signal/ancilla/environment circuit family.

The ideal circuit squeezes and displaces the signal, squeezes each ancilla,
and entangles the signal with every ancilla in index order. The noisy
circuit adds beam-splitter loss of the signal into a trailing environment
mode, optional phase kicks, and a trainable recovery layer of one local
rotation plus one displacement per non-environment mode.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from math import isfinite
from typing import Sequence

import numpy as np

from .autodiff import DualScalar, Scalar
from .gaussian import (
    GaussianState,
    apply_beamsplitter,
    apply_displacement,
    apply_loss_via_env,
    apply_rotation,
    apply_squeezing,
    mean_p,
    mean_x,
    vacuum_state,
)

__all__ = [
    "CircuitSpec",
    "RecoveryParams",
    "DEFAULT_SPEC",
    "build_ideal",
    "build_noisy",
    "signal_expectations",
    "ideal_expectations",
]


@dataclass(frozen=True)
class CircuitSpec:
    """Fixed circuit parameters: preparation, entangler, loss and mode count.

    Defaults are the canonical configuration used throughout the experiment
    suite. The noisy circuit has 1 signal + num_ancillas + 1 environment
    modes; the ideal circuit drops the environment.
    """

    r_s: float = 0.60
    phi_s: float = 0.30
    alpha: float = 0.80
    alpha_im: float = 0.0
    r_a: float = 0.40
    phi_a: float = 0.10
    theta_bs: float = 0.70
    phi_bs: float = 0.20
    num_ancillas: int = 1
    eta: float = 0.55

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")
        if self.num_ancillas < 0:
            raise ValueError(f"num_ancillas must be non-negative, got {self.num_ancillas!r}")
        for name in ("r_s", "phi_s", "alpha", "alpha_im", "r_a", "phi_a", "theta_bs", "phi_bs"):
            if not isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)!r}")

    @property
    def num_modes_ideal(self) -> int:
        return 1 + self.num_ancillas

    @property
    def num_modes_noisy(self) -> int:
        return 2 + self.num_ancillas

    @property
    def env_mode(self) -> int:
        return 1 + self.num_ancillas

    def with_eta(self, eta: float) -> "CircuitSpec":
        return replace(self, eta=eta)


DEFAULT_SPEC = CircuitSpec()


@dataclass(frozen=True)
class RecoveryParams:
    """Trainable recovery layer parameters, flattened per corrected mode as
    (phi_0, Re beta_0, Im beta_0, phi_1, Re beta_1, Im beta_1, ...)."""

    values: tuple

    def __post_init__(self):
        if len(self.values) < 3 or len(self.values) % 3 != 0:
            raise ValueError(
                f"recovery needs 3 parameters per corrected mode, got {len(self.values)}"
            )

    @classmethod
    def zeros(cls, num_ancillas: int) -> "RecoveryParams":
        return cls((0.0,) * (3 * (1 + num_ancillas)))

    @classmethod
    def from_sequence(cls, values: Sequence[Scalar]) -> "RecoveryParams":
        return cls(tuple(values))

    @property
    def num_corrected(self) -> int:
        return len(self.values) // 3

    def phi(self, mode: int) -> Scalar:
        return self.values[3 * mode]

    def re_beta(self, mode: int) -> Scalar:
        return self.values[3 * mode + 1]

    def im_beta(self, mode: int) -> Scalar:
        return self.values[3 * mode + 2]

    def as_array(self) -> np.ndarray:
        if any(isinstance(v, DualScalar) for v in self.values):
            out = np.empty(len(self.values), dtype=object)
            out[:] = self.values
            return out
        return np.array(self.values, dtype=float)


def _prepare(state: GaussianState, spec: CircuitSpec) -> GaussianState:
    state = apply_squeezing(state, 0, spec.r_s, spec.phi_s)
    state = apply_displacement(state, 0, spec.alpha, spec.alpha_im)
    for ancilla in range(1, 1 + spec.num_ancillas):
        state = apply_squeezing(state, ancilla, spec.r_a, spec.phi_a)
    for ancilla in range(1, 1 + spec.num_ancillas):
        state = apply_beamsplitter(state, 0, ancilla, spec.theta_bs, spec.phi_bs)
    return state


def build_ideal(spec: CircuitSpec) -> GaussianState:
    """The noiseless target state on signal + ancilla modes (no environment)."""
    return _prepare(vacuum_state(spec.num_modes_ideal), spec)


def build_noisy(
    spec: CircuitSpec, recovery: RecoveryParams, kicks: Sequence[Scalar]
) -> GaussianState:
    """The lossy circuit: prepare, lose the signal into the environment mode,
    apply one phase kick per non-environment mode, then the recovery layer.

    ``kicks`` holds one rotation angle for the signal and one per ancilla;
    pass all zeros for the pure-Gaussian case.
    """
    corrected = 1 + spec.num_ancillas
    if len(kicks) != corrected:
        raise ValueError(f"expected {corrected} kick angles, got {len(kicks)}")
    if len(recovery.values) != 3 * corrected:
        raise ValueError(
            f"recovery has {len(recovery.values)} parameters, circuit needs {3 * corrected}"
        )
    state = _prepare(vacuum_state(spec.num_modes_noisy), spec)
    state = apply_loss_via_env(state, 0, spec.env_mode, spec.eta)
    for mode in range(corrected):
        state = apply_rotation(state, mode, kicks[mode])
    for mode in range(corrected):
        state = apply_rotation(state, mode, recovery.phi(mode))
        state = apply_displacement(state, mode, recovery.re_beta(mode), recovery.im_beta(mode))
    return state


def signal_expectations(state: GaussianState) -> tuple[Scalar, Scalar]:
    """Mean x and p quadratures of the signal mode."""
    return mean_x(state, 0), mean_p(state, 0)


@lru_cache(maxsize=256)
def ideal_expectations(spec: CircuitSpec) -> tuple[float, float]:
    """Cached signal-mode expectations of the ideal circuit."""
    x, p = signal_expectations(build_ideal(spec))
    return float(x), float(p)
