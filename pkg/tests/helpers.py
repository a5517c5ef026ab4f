"""Shared test utilities: random physical states and random circuit maps."""

import numpy as np

from difga.gaussian import (
    AffineSymplectic,
    GaussianState,
    apply_beamsplitter,
    apply_displacement,
    apply_loss_channel,
    apply_rotation,
    apply_squeezing,
    vacuum_state,
)


def random_gaussian_state(rng: np.random.Generator, num_modes: int, num_ops: int = 12,
                          allow_loss: bool = True) -> GaussianState:
    """A random physical state built by applying random primitives to vacuum."""
    state = vacuum_state(num_modes)
    for _ in range(num_ops):
        kind = rng.integers(0, 5 if allow_loss else 4)
        mode = int(rng.integers(0, num_modes))
        if kind == 0:
            state = apply_rotation(state, mode, float(rng.uniform(-np.pi, np.pi)))
        elif kind == 1:
            state = apply_squeezing(
                state, mode, float(rng.uniform(-0.8, 0.8)), float(rng.uniform(-np.pi, np.pi))
            )
        elif kind == 2:
            state = apply_displacement(
                state, mode, float(rng.uniform(-1.5, 1.5)), float(rng.uniform(-1.5, 1.5))
            )
        elif kind == 3 and num_modes > 1:
            other = int(rng.integers(0, num_modes - 1))
            other = other + 1 if other >= mode else other
            state = apply_beamsplitter(
                state, mode, other,
                float(rng.uniform(0, np.pi)), float(rng.uniform(-np.pi, np.pi)),
            )
        elif kind == 4:
            state = apply_loss_channel(state, mode, float(rng.uniform(0.2, 1.0)))
    return state


def random_symplectic_circuit(rng: np.random.Generator, num_modes: int,
                              num_ops: int = 8) -> AffineSymplectic:
    """A random composition of primitive maps as one explicit affine symplectic."""
    total = AffineSymplectic.identity(num_modes)
    for _ in range(num_ops):
        kind = rng.integers(0, 4)
        mode = int(rng.integers(0, num_modes))
        if kind == 0:
            op = AffineSymplectic.rotation(num_modes, mode, float(rng.uniform(-np.pi, np.pi)))
        elif kind == 1:
            op = AffineSymplectic.squeezing(
                num_modes, mode, float(rng.uniform(-0.8, 0.8)), float(rng.uniform(-np.pi, np.pi))
            )
        elif kind == 2:
            op = AffineSymplectic.displacement(
                num_modes, mode, float(rng.uniform(-1.5, 1.5)), float(rng.uniform(-1.5, 1.5))
            )
        else:
            if num_modes == 1:
                op = AffineSymplectic.rotation(num_modes, 0, float(rng.uniform(-np.pi, np.pi)))
            else:
                other = int(rng.integers(0, num_modes - 1))
                other = other + 1 if other >= mode else other
                op = AffineSymplectic.beamsplitter(
                    num_modes, mode, other,
                    float(rng.uniform(0, np.pi)), float(rng.uniform(-np.pi, np.pi)),
                )
        total = op.compose(total)
    return total
