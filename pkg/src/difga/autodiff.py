"""Forward-mode automatic differentiation on multi-tangent dual scalars.

The trainable parameter vectors here are short (three entries per corrected
mode), so forward mode with one tangent slot per parameter delivers the full
gradient in a single evaluation, costs no more than a reverse-mode tape and
stays bitwise deterministic.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "DualScalar",
    "DifferentiationError",
    "Scalar",
    "seed_parameters",
    "gradient",
    "value_and_gradient",
    "finite_diff_gradient",
    "value_of",
    "sin",
    "cos",
    "sinh",
    "cosh",
    "sqrt",
    "arccos",
]

Scalar = Union[float, "DualScalar"]


class DifferentiationError(ValueError):
    """A derivative evaluation produced non-finite numbers."""


class DualScalar:
    """A real value carrying a tangent vector, one slot per trainable parameter.

    Arithmetic obeys the exact product/chain rules, so after propagating a
    seeded parameter vector through any supported expression the tangents
    hold the partial derivatives of the result.
    """

    __slots__ = ("value", "tangents")

    def __init__(self, value: float, tangents: np.ndarray) -> None:
        self.value = value
        self.tangents = tangents

    def __add__(self, other):
        if isinstance(other, DualScalar):
            return DualScalar(self.value + other.value, self.tangents + other.tangents)
        return DualScalar(self.value + other, self.tangents)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DualScalar):
            return DualScalar(self.value - other.value, self.tangents - other.tangents)
        return DualScalar(self.value - other, self.tangents)

    def __rsub__(self, other):
        return DualScalar(other - self.value, -self.tangents)

    def __mul__(self, other):
        if isinstance(other, DualScalar):
            return DualScalar(
                self.value * other.value,
                self.value * other.tangents + other.value * self.tangents,
            )
        return DualScalar(self.value * other, other * self.tangents)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, DualScalar):
            inv = 1.0 / other.value
            return DualScalar(
                self.value * inv,
                (self.tangents - (self.value * inv) * other.tangents) * inv,
            )
        inv = 1.0 / other
        return DualScalar(self.value * inv, self.tangents * inv)

    def __rtruediv__(self, other):
        inv = 1.0 / self.value
        return DualScalar(other * inv, (-other * inv * inv) * self.tangents)

    def __neg__(self):
        return DualScalar(-self.value, -self.tangents)

    def __pow__(self, exponent):
        if exponent == 2:
            return DualScalar(self.value * self.value, (2.0 * self.value) * self.tangents)
        return DualScalar(
            self.value**exponent,
            (exponent * self.value ** (exponent - 1)) * self.tangents,
        )

    def __float__(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        return f"DualScalar({self.value!r}, {np.asarray(self.tangents)!r})"


def value_of(x: Scalar) -> float:
    """The plain value of a float or DualScalar."""
    if isinstance(x, DualScalar):
        return float(x.value)
    return float(x)


def sin(x: Scalar) -> Scalar:
    if isinstance(x, DualScalar):
        return DualScalar(math.sin(x.value), math.cos(x.value) * x.tangents)
    return math.sin(x)


def cos(x: Scalar) -> Scalar:
    if isinstance(x, DualScalar):
        return DualScalar(math.cos(x.value), -math.sin(x.value) * x.tangents)
    return math.cos(x)


def sinh(x: Scalar) -> Scalar:
    if isinstance(x, DualScalar):
        return DualScalar(math.sinh(x.value), math.cosh(x.value) * x.tangents)
    return math.sinh(x)


def cosh(x: Scalar) -> Scalar:
    if isinstance(x, DualScalar):
        return DualScalar(math.cosh(x.value), math.sinh(x.value) * x.tangents)
    return math.cosh(x)


def _nan_sqrt(v: float) -> float:
    # IEEE-style: out-of-domain arguments propagate as nan instead of raising,
    # so the gradient checker can name the offending parameter slot.
    return math.sqrt(v) if v >= 0.0 else math.nan


def _nan_acos(v: float) -> float:
    return math.acos(v) if -1.0 <= v <= 1.0 else math.nan


def sqrt(x: Scalar) -> Scalar:
    if isinstance(x, DualScalar):
        root = _nan_sqrt(x.value)
        slope = 0.5 / root if root > 0.0 else math.nan
        return DualScalar(root, slope * x.tangents)
    return _nan_sqrt(x)


def arccos(x: Scalar) -> Scalar:
    if isinstance(x, DualScalar):
        base = 1.0 - x.value * x.value
        slope = -1.0 / math.sqrt(base) if base > 0.0 else math.nan
        return DualScalar(_nan_acos(x.value), slope * x.tangents)
    return _nan_acos(x)


def seed_parameters(theta: Sequence[float]) -> list[DualScalar]:
    """Wrap a parameter vector as duals with unit-basis tangents.

    Element ``i`` gets value ``theta[i]`` and tangent ``e_i``, so one forward
    pass through a scalar function yields its full gradient.
    """
    n = len(theta)
    if n == 0:
        raise ValueError("empty parameter vector")
    basis = np.eye(n)
    return [DualScalar(float(theta[i]), basis[i].copy()) for i in range(n)]


def _checked(value: float, tangents: np.ndarray) -> np.ndarray:
    if not math.isfinite(value):
        raise DifferentiationError(f"non-finite function value {value!r}")
    bad = np.flatnonzero(~np.isfinite(tangents))
    if bad.size:
        raise DifferentiationError(
            f"non-finite derivative in parameter slot {int(bad[0])}"
        )
    return tangents


def value_and_gradient(
    f: Callable[[Sequence[Scalar]], Scalar], theta: Sequence[float]
) -> tuple[float, np.ndarray]:
    """Evaluate ``f`` and its gradient at ``theta`` in one forward pass."""
    duals = seed_parameters(theta)
    out = f(duals)
    if isinstance(out, DualScalar):
        value = float(out.value)
        tangents = np.asarray(out.tangents, dtype=float)
    else:
        value = float(out)
        tangents = np.zeros(len(duals))
    return value, _checked(value, tangents).copy()


def gradient(f: Callable[[Sequence[Scalar]], Scalar], theta: Sequence[float]) -> np.ndarray:
    """Gradient of a scalar-valued ``f`` at ``theta`` via dual propagation.

    Exact to floating-point rounding for compositions of the arithmetic and
    elementary functions in this module.
    """
    return value_and_gradient(f, theta)[1]


def finite_diff_gradient(
    f: Callable[[Sequence[float]], float], theta: Sequence[float], h: float = 1e-6
) -> np.ndarray:
    """Central finite differences: independent oracle for :func:`gradient`."""
    if not h > 0:
        raise ValueError("finite-difference step must be positive")
    base = np.asarray(theta, dtype=float)
    grad = np.empty(base.size)
    for i in range(base.size):
        bumped = base.copy()
        bumped[i] = base[i] + h
        hi = float(f(bumped))
        bumped[i] = base[i] - h
        lo = float(f(bumped))
        if not (math.isfinite(hi) and math.isfinite(lo)):
            raise DifferentiationError(
                f"non-finite function value near parameter slot {i}"
            )
        grad[i] = (hi - lo) / (2.0 * h)
    return grad
