"""Measured states, their detector images, and the bound compound state.

A measured system carries complex amplitudes a_i. The detector side holds
the conjugate image, and binding the two yields a compound state whose
diagonal weights |a_i|^2 live on the probability simplex. Those weights are
the only part of the state the walk sees; the off-diagonal magnitudes
|a_i||a_j| are carried along passively and are recorded but never evolved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .walk import SimplexPoint

__all__ = [
    "QuantumState",
    "ImageState",
    "CompoundState",
    "ZeroVectorError",
    "DimensionTooSmallError",
    "ImageMismatchError",
    "make_state",
    "form_image",
    "bind_compound",
    "walk_seed",
]

# construction-time tolerance for normalization and cross-term identities
ATOL = 1e-12


class ZeroVectorError(ValueError):
    """All amplitudes are zero; no state can be formed."""


class DimensionTooSmallError(ValueError):
    """A state needs at least two basis components."""


class ImageMismatchError(ValueError):
    """Image amplitudes are not the elementwise conjugate of the state."""


def _as_complex_vector(values, who: str) -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    if arr.ndim != 1:
        raise ValueError(f"{who} must be a one-dimensional sequence")
    if arr.size < 2:
        raise DimensionTooSmallError(
            f"{who} needs length >= 2, got {arr.size}"
        )
    return arr


def _check_unit_norm(arr: np.ndarray, who: str) -> None:
    norm_sq = float(np.vdot(arr, arr).real)
    if abs(norm_sq - 1.0) > ATOL:
        raise ValueError(
            f"{who} must satisfy sum |a_i|^2 = 1 within {ATOL:g}; got {norm_sq!r}"
        )


@dataclass(frozen=True)
class QuantumState:
    """Normalized complex amplitude vector of the measured system.

    Use :func:`make_state` to build one from raw (unnormalized) amplitudes.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = _as_complex_vector(self.amplitudes, "amplitudes").copy()
        _check_unit_norm(arr, "QuantumState amplitudes")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    @property
    def weights(self) -> np.ndarray:
        """Probability weights |a_i|^2."""
        w = np.abs(self.amplitudes) ** 2
        w.setflags(write=False)
        return w


@dataclass(frozen=True)
class ImageState:
    """Detector-side state holding the conjugate amplitudes a_i*."""

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = _as_complex_vector(self.amplitudes, "amplitudes").copy()
        _check_unit_norm(arr, "ImageState amplitudes")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class CompoundState:
    """Bound system-detector state.

    diagonal holds the probability weights w_i = |a_i|^2; cross_magnitudes
    holds |a_i||a_j| for i != j (zero diagonal). The identity
    m_ij^2 = w_i * w_j is enforced at construction.
    """

    diagonal: np.ndarray
    cross_magnitudes: np.ndarray

    def __post_init__(self):
        diag = np.asarray(self.diagonal, dtype=float).copy()
        cross = np.asarray(self.cross_magnitudes, dtype=float).copy()
        n = diag.size
        if diag.ndim != 1 or n < 2:
            raise DimensionTooSmallError("diagonal needs length >= 2")
        if cross.shape != (n, n):
            raise ValueError(f"cross_magnitudes must be {n}x{n}, got {cross.shape}")
        if np.any(diag < -ATOL):
            raise ValueError("diagonal weights must be non-negative")
        total = float(diag.sum())
        if abs(total - 1.0) > ATOL:
            raise ValueError(
                f"diagonal weights must sum to 1 within {ATOL:g}; got {total!r}"
            )
        if not np.array_equal(cross, cross.T):
            raise ValueError("cross_magnitudes must be symmetric")
        if np.any(np.diagonal(cross) != 0.0):
            raise ValueError("cross_magnitudes diagonal must be zero")
        expected = np.sqrt(np.outer(diag, diag))
        np.fill_diagonal(expected, 0.0)
        if np.max(np.abs(cross - expected)) > ATOL:
            raise ValueError(
                f"cross magnitudes must equal sqrt(w_i w_j) within {ATOL:g}"
            )
        diag.setflags(write=False)
        cross.setflags(write=False)
        object.__setattr__(self, "diagonal", diag)
        object.__setattr__(self, "cross_magnitudes", cross)

    @property
    def dimension(self) -> int:
        return self.diagonal.size


def make_state(raw_amplitudes) -> QuantumState:
    """Build a normalized state from raw complex amplitudes.

    Parameters
    ----------
    raw_amplitudes : sequence of complex
        At least two entries, not all zero. Relative phases are preserved;
        only the overall scale is removed.

    Returns
    -------
    QuantumState

    Raises
    ------
    ZeroVectorError
        If every entry is zero.
    DimensionTooSmallError
        If fewer than two entries are given.
    """
    arr = _as_complex_vector(raw_amplitudes, "raw_amplitudes")
    norm = float(np.sqrt(np.vdot(arr, arr).real))
    if norm == 0.0:
        raise ZeroVectorError("cannot normalize the zero vector")
    return QuantumState(arr / norm)


def form_image(state: QuantumState) -> ImageState:
    """Return the detector image: the elementwise conjugate amplitudes."""
    if not isinstance(state, QuantumState):
        raise TypeError("form_image expects a QuantumState")
    return ImageState(np.conj(state.amplitudes))


def bind_compound(state: QuantumState, image: ImageState) -> CompoundState:
    """Bind a state with its detector image into the compound state.

    The image must be the elementwise conjugate of the state (checked to
    1e-12); anything else raises ImageMismatchError.
    """
    if state.dimension != image.dimension:
        raise ImageMismatchError(
            f"state dimension {state.dimension} != image dimension {image.dimension}"
        )
    if np.max(np.abs(image.amplitudes - np.conj(state.amplitudes))) > ATOL:
        raise ImageMismatchError(
            "image amplitudes are not the conjugate of the state amplitudes"
        )
    mags = np.abs(state.amplitudes)
    diag = mags**2
    # enforce the sum-to-1 invariant exactly enough for downstream checks
    cross = np.outer(mags, mags)
    np.fill_diagonal(cross, 0.0)
    return CompoundState(diagonal=diag, cross_magnitudes=cross)


def walk_seed(compound: CompoundState) -> SimplexPoint:
    """Project the compound state onto the simplex: the walk's start point.

    The seed is the diagonal weight vector unchanged; coordinates with zero
    weight start out already eliminated.
    """
    if not isinstance(compound, CompoundState):
        raise TypeError("walk_seed expects a CompoundState")
    return SimplexPoint.from_weights(compound.diagonal)
