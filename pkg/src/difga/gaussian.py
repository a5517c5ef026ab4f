"""Multi-mode Gaussian states and their phase-space circuit primitives.

A state is represented by its mean vector and covariance matrix in the
interleaved quadrature ordering (x1, p1, ..., xM, pM), in dimensionless
quadrature units with hbar = 2: the vacuum covariance is the identity and a
coherent amplitude alpha shifts <x> by 2*Re(alpha). Every primitive is an
affine symplectic map (mean -> S mean + d, cov -> S cov S^T) applied to the
affected mode blocks only.

Operation parameters may be plain floats or :class:`~difga.autodiff.DualScalar`
values; dual parameters promote the state arrays to object dtype so tangents
ride along through the unchanged formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import DualScalar, arccos, cos, cosh, sin, sinh, sqrt, value_of

__all__ = [
    "GaussianState",
    "AffineSymplectic",
    "vacuum_state",
    "apply_rotation",
    "apply_squeezing",
    "apply_displacement",
    "apply_beamsplitter",
    "apply_loss_via_env",
    "apply_loss_channel",
    "mean_x",
    "mean_p",
    "entanglement_degradation",
    "discard_mode",
    "append_vacuum",
    "detach",
    "symplectic_form",
    "symplectic_eigenvalues",
    "is_symplectic",
]


@dataclass(frozen=True)
class GaussianState:
    """An M-mode Gaussian state: mean vector (2M) and covariance matrix (2M x 2M).

    Treated as an immutable value; operations return new states.
    """

    num_modes: int
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        dim = 2 * self.num_modes
        if self.num_modes < 1:
            raise ValueError("a Gaussian state needs at least one mode")
        if self.mean.shape != (dim,) or self.cov.shape != (dim, dim):
            raise ValueError(
                f"moment shapes {self.mean.shape}/{self.cov.shape} do not match "
                f"{self.num_modes} modes"
            )

    def validate(self, sym_tol: float = 1e-12, phys_tol: float = 1e-9) -> None:
        """Check symmetry, finiteness and physicality of the covariance."""
        cov = detach(self).cov
        mean = detach(self).mean
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("state moments contain non-finite entries")
        asym = np.max(np.abs(cov - cov.T))
        if asym > sym_tol:
            raise ValueError(f"covariance asymmetry {asym:.3e} exceeds {sym_tol:.1e}")
        nu_min = symplectic_eigenvalues(cov).min()
        if nu_min < 1.0 - phys_tol:
            raise ValueError(
                f"smallest symplectic eigenvalue {nu_min!r} violates the vacuum bound"
            )


def detach(state: GaussianState) -> GaussianState:
    """Strip tangents, returning a plain-float copy of the state."""
    if state.mean.dtype != object and state.cov.dtype != object:
        return state
    mean = np.array([value_of(v) for v in state.mean], dtype=float)
    cov = np.array(
        [[value_of(v) for v in row] for row in state.cov], dtype=float
    )
    return GaussianState(state.num_modes, mean, cov)


def vacuum_state(num_modes: int) -> GaussianState:
    """The M-mode vacuum: zero mean, identity covariance (hbar = 2)."""
    if num_modes < 1:
        raise ValueError("num_modes must be at least 1")
    dim = 2 * num_modes
    return GaussianState(num_modes, np.zeros(dim), np.eye(dim))


def _check_mode(state: GaussianState, mode: int) -> None:
    if not 0 <= mode < state.num_modes:
        raise IndexError(f"mode {mode} out of range for {state.num_modes} modes")


def _block_matrix(entries) -> np.ndarray:
    """A small matrix from nested scalar lists, object dtype when duals appear."""
    if any(isinstance(e, DualScalar) for row in entries for e in row):
        n = len(entries)
        out = np.empty((n, n), dtype=object)
        for i, row in enumerate(entries):
            for j, e in enumerate(row):
                out[i, j] = e
        return out
    return np.array(entries, dtype=float)


def _writable_moments(state: GaussianState, promote: bool):
    if promote and state.mean.dtype != object:
        return state.mean.astype(object), state.cov.astype(object)
    return state.mean.copy(), state.cov.copy()


def _apply_block(state: GaussianState, modes: tuple[int, ...], block: np.ndarray) -> GaussianState:
    """Congruence-transform the given mode blocks by a local symplectic matrix."""
    idx = [i for m in modes for i in (2 * m, 2 * m + 1)]
    mean, cov = _writable_moments(state, promote=block.dtype == object)
    mean[idx] = np.dot(block, mean[idx])
    cov[idx, :] = np.dot(block, cov[idx, :])
    cov[:, idx] = np.dot(cov[:, idx], block.T)
    return GaussianState(state.num_modes, mean, cov)


def _rotation_entries(phi):
    c, s = cos(phi), sin(phi)
    return [[c, -s], [s, c]]


def _squeeze_entries(r, phi):
    ch, sh = cosh(r), sinh(r)
    c, s = cos(phi), sin(phi)
    return [[ch - sh * c, -(sh * s)], [-(sh * s), ch + sh * c]]


def _beamsplitter_entries(theta, phi):
    c, s = cos(theta), sin(theta)
    cp, sp = cos(phi), sin(phi)
    scp, ssp = s * cp, s * sp
    return [
        [c, 0.0, -scp, -ssp],
        [0.0, c, ssp, -scp],
        [scp, -ssp, c, 0.0],
        [ssp, scp, 0.0, c],
    ]


def apply_rotation(state: GaussianState, mode: int, phi) -> GaussianState:
    """Rotate one mode's quadrature pair by phi: x -> x cos(phi) - p sin(phi)."""
    _check_mode(state, mode)
    return _apply_block(state, (mode,), _block_matrix(_rotation_entries(phi)))


def apply_squeezing(state: GaussianState, mode: int, r, phi) -> GaussianState:
    """Squeeze one mode by magnitude r along the phase-space axis set by phi."""
    _check_mode(state, mode)
    if not isinstance(r, DualScalar) and not np.isfinite(r):
        raise ValueError(f"squeezing magnitude must be finite, got {r!r}")
    return _apply_block(state, (mode,), _block_matrix(_squeeze_entries(r, phi)))


def apply_displacement(state: GaussianState, mode: int, re, im) -> GaussianState:
    """Displace one mode by the complex amplitude re + i*im: <x> += 2 re, <p> += 2 im."""
    _check_mode(state, mode)
    promote = isinstance(re, DualScalar) or isinstance(im, DualScalar)
    mean, cov = _writable_moments(state, promote=promote)
    mean[2 * mode] = mean[2 * mode] + 2.0 * re
    mean[2 * mode + 1] = mean[2 * mode + 1] + 2.0 * im
    return GaussianState(state.num_modes, mean, cov)


def apply_beamsplitter(state: GaussianState, mode_a: int, mode_b: int, theta, phi) -> GaussianState:
    """Couple two modes: a0 -> cos(theta) a0 - e^{-i phi} sin(theta) a1.

    With a zero-mean partner the first mode's mean amplitude scales by
    cos(theta).
    """
    _check_mode(state, mode_a)
    _check_mode(state, mode_b)
    if mode_a == mode_b:
        raise ValueError(f"beam splitter needs two distinct modes, got {mode_a} twice")
    return _apply_block(
        state, (mode_a, mode_b), _block_matrix(_beamsplitter_entries(theta, phi))
    )


def _check_transmissivity(eta) -> None:
    val = value_of(eta)
    if not 0.0 <= val <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {val!r}")


def apply_loss_via_env(state: GaussianState, mode: int, env_mode: int, eta) -> GaussianState:
    """Optical loss as a beam splitter of angle arccos(sqrt(eta)) into a vacuum mode.

    The environment mode must hold vacuum for this to realize the loss
    channel on ``mode``.
    """
    _check_transmissivity(eta)
    return apply_beamsplitter(state, mode, env_mode, arccos(sqrt(eta)), 0.0)


def apply_loss_channel(state: GaussianState, mode: int, eta) -> GaussianState:
    """Traced-out loss channel: means scale by sqrt(eta), the mode's covariance
    block becomes eta*block + (1-eta)*I, cross-covariances scale by sqrt(eta)."""
    _check_mode(state, mode)
    _check_transmissivity(eta)
    root = sqrt(eta)
    promote = isinstance(eta, DualScalar)
    mean, cov = _writable_moments(state, promote=promote)
    idx = [2 * mode, 2 * mode + 1]
    mean[idx] = root * mean[idx]
    cov[idx, :] = root * cov[idx, :]
    cov[:, idx] = root * cov[:, idx]
    for i in idx:
        cov[i, i] = cov[i, i] + (1.0 - eta)
    return GaussianState(state.num_modes, mean, cov)


def mean_x(state: GaussianState, mode: int):
    """Mean of the x quadrature of one mode."""
    _check_mode(state, mode)
    return state.mean[2 * mode]


def mean_p(state: GaussianState, mode: int):
    """Mean of the p quadrature of one mode."""
    _check_mode(state, mode)
    return state.mean[2 * mode + 1]


def entanglement_degradation(eta: float) -> float:
    """Channel entanglement degradation of the loss channel with transmissivity eta.

    For loss, the channel matrices are M = sqrt(eta) I and N = (1 - eta) I
    under hbar = 2, giving min{(1-eta)^2 / (1+eta)^2, 1}. Constant under any
    Gaussian pre/post-processing, so recovery training never changes it.
    """
    _check_transmissivity(eta)
    return min((1.0 - eta) ** 2 / (1.0 + eta) ** 2, 1.0)


def discard_mode(state: GaussianState, mode: int) -> GaussianState:
    """Partial trace over one mode (drop its rows/columns)."""
    _check_mode(state, mode)
    if state.num_modes == 1:
        raise ValueError("cannot discard the only mode")
    keep = [i for m in range(state.num_modes) if m != mode for i in (2 * m, 2 * m + 1)]
    return GaussianState(
        state.num_modes - 1, state.mean[keep].copy(), state.cov[np.ix_(keep, keep)].copy()
    )


def append_vacuum(state: GaussianState, count: int = 1) -> GaussianState:
    """Tensor on ``count`` fresh vacuum modes at the end of the mode list."""
    if count < 1:
        raise ValueError("count must be at least 1")
    old = 2 * state.num_modes
    dim = old + 2 * count
    mean = np.zeros(dim, dtype=state.mean.dtype)
    cov = np.eye(dim, dtype=float)
    if state.cov.dtype == object:
        cov = cov.astype(object)
    mean[:old] = state.mean
    cov[:old, :old] = state.cov
    return GaussianState(state.num_modes + count, mean, cov)


def symplectic_form(num_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form with [[0, 1], [-1, 0]] per mode."""
    return np.kron(np.eye(num_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Sorted moduli of the spectrum of Omega * cov (each eigenvalue twice).

    Physical covariances have all values >= 1 under hbar = 2; pure states sit
    exactly at 1.
    """
    num_modes = cov.shape[0] // 2
    spectrum = np.linalg.eigvals(symplectic_form(num_modes) @ cov)
    return np.sort(np.abs(spectrum))


def is_symplectic(matrix: np.ndarray, tol: float = 1e-12) -> bool:
    """Whether S Omega S^T = Omega within ``tol``."""
    omega = symplectic_form(matrix.shape[0] // 2)
    return bool(np.max(np.abs(matrix @ omega @ matrix.T - omega)) <= tol)


@dataclass(frozen=True)
class AffineSymplectic:
    """A linear-plus-shift phase-space map: mean -> S mean + d, cov -> S cov S^T.

    The explicit-matrix counterpart of the block-local primitives above; used
    to compose circuits and check symplecticity of whole transformations.
    """

    matrix: np.ndarray
    shift: np.ndarray

    @classmethod
    def identity(cls, num_modes: int) -> "AffineSymplectic":
        dim = 2 * num_modes
        return cls(np.eye(dim), np.zeros(dim))

    @classmethod
    def _from_block(cls, num_modes: int, modes: tuple[int, ...], entries) -> "AffineSymplectic":
        dim = 2 * num_modes
        matrix = np.eye(dim)
        idx = [i for m in modes for i in (2 * m, 2 * m + 1)]
        block = np.array([[value_of(e) for e in row] for row in entries])
        matrix[np.ix_(idx, idx)] = block
        return cls(matrix, np.zeros(dim))

    @classmethod
    def rotation(cls, num_modes: int, mode: int, phi: float) -> "AffineSymplectic":
        return cls._from_block(num_modes, (mode,), _rotation_entries(phi))

    @classmethod
    def squeezing(cls, num_modes: int, mode: int, r: float, phi: float) -> "AffineSymplectic":
        return cls._from_block(num_modes, (mode,), _squeeze_entries(r, phi))

    @classmethod
    def beamsplitter(
        cls, num_modes: int, mode_a: int, mode_b: int, theta: float, phi: float
    ) -> "AffineSymplectic":
        return cls._from_block(num_modes, (mode_a, mode_b), _beamsplitter_entries(theta, phi))

    @classmethod
    def displacement(cls, num_modes: int, mode: int, re: float, im: float) -> "AffineSymplectic":
        dim = 2 * num_modes
        shift = np.zeros(dim)
        shift[2 * mode] = 2.0 * value_of(re)
        shift[2 * mode + 1] = 2.0 * value_of(im)
        return cls(np.eye(dim), shift)

    def compose(self, other: "AffineSymplectic") -> "AffineSymplectic":
        """The map applying ``other`` first, then ``self``."""
        return AffineSymplectic(
            self.matrix @ other.matrix, self.matrix @ other.shift + self.shift
        )

    def apply(self, state: GaussianState) -> GaussianState:
        return GaussianState(
            state.num_modes,
            self.matrix @ state.mean + self.shift,
            self.matrix @ state.cov @ self.matrix.T,
        )
