"""Shaped pixel tensors in the raw 0-255 domain plus the distance norms used
by the attack objective and the campaign metrics.

Tensors are immutable values: every mutation produces a fresh copy, so a
search loop can keep its incumbent solution untouched when a candidate is
rejected. Values live in the raw pixel domain; oracles apply their own
normalization, and all reported distances are therefore on the raw scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PIXEL_MAX",
    "PIXEL_MIN",
    "InputTensor",
    "l1_distance",
    "l2_distance",
    "set_pixel",
    "validate_shape",
]

PIXEL_MIN = 0.0
PIXEL_MAX = 255.0


def validate_shape(dims) -> tuple[int, ...]:
    """Return ``dims`` as a tuple of extents, rejecting anything non-positive.

    Args:
        dims: iterable of integer extents, e.g. ``(28, 28)`` or ``(8, 8, 1)``.

    Returns:
        The validated shape as a plain tuple of ints.
    """
    dims = tuple(dims)
    if not dims:
        raise ValueError("shape must have at least one extent")
    for extent in dims:
        if not isinstance(extent, (int, np.integer)) or isinstance(extent, bool):
            raise ValueError(f"shape extents must be integers, got {extent!r}")
        if extent < 1:
            raise ValueError(f"shape extents must be >= 1, got {extent}")
    return tuple(int(d) for d in dims)


@dataclass(frozen=True, eq=False)
class InputTensor:
    """A fixed-shape array of pixel intensities, each within [0, 255].

    Values are stored flat in row-major order as float64 and the backing
    array is marked read-only. Out-of-range values are rejected at
    construction, never clamped.
    """

    shape: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        shape = validate_shape(self.shape)
        flat = np.array(self.values, dtype=np.float64).reshape(-1)
        if flat.size != math.prod(shape):
            raise ValueError(
                f"value count {flat.size} does not match shape {shape} "
                f"({math.prod(shape)} elements)"
            )
        if not np.all(np.isfinite(flat)):
            raise ValueError("tensor values must be finite")
        if flat.size and (flat.min() < PIXEL_MIN or flat.max() > PIXEL_MAX):
            raise ValueError(
                f"tensor values must lie in [{PIXEL_MIN:g}, {PIXEL_MAX:g}]; "
                f"got range [{flat.min():g}, {flat.max():g}]"
            )
        flat.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "values", flat)

    @classmethod
    def zeros(cls, shape) -> "InputTensor":
        shape = validate_shape(shape)
        return cls(shape, np.zeros(math.prod(shape)))

    @property
    def element_count(self) -> int:
        return self.values.size

    def reshaped(self) -> np.ndarray:
        """Read-only view of the values in the tensor's declared shape."""
        return self.values.reshape(self.shape)

    def __getitem__(self, flat_index: int) -> float:
        return float(self.values[flat_index])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InputTensor):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"InputTensor(shape={self.shape}, elements={self.element_count})"


def _check_same_shape(a: InputTensor, b: InputTensor) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def l2_distance(a: InputTensor, b: InputTensor) -> float:
    """Euclidean distance between two equally shaped tensors (raw domain)."""
    _check_same_shape(a, b)
    diff = a.values - b.values
    peak = float(np.max(np.abs(diff)))
    if peak == 0.0:
        return 0.0
    # scale before squaring so tiny differences cannot underflow to zero
    scaled = diff / peak
    return peak * float(np.sqrt(np.sum(scaled * scaled)))


def l1_distance(a: InputTensor, b: InputTensor) -> float:
    """Sum of absolute element differences between two equally shaped tensors."""
    _check_same_shape(a, b)
    return float(np.sum(np.abs(a.values - b.values)))


def set_pixel(x: InputTensor, flat_index: int, value: float) -> InputTensor:
    """Return a copy of ``x`` with one element replaced; ``x`` is unchanged.

    Args:
        x: source tensor.
        flat_index: row-major position to overwrite, 0 <= i < element count.
        value: replacement intensity in [0, 255].
    """
    if not 0 <= flat_index < x.element_count:
        raise IndexError(
            f"flat index {flat_index} out of range for {x.element_count} elements"
        )
    if not PIXEL_MIN <= value <= PIXEL_MAX:
        raise ValueError(f"pixel value {value} outside [{PIXEL_MIN:g}, {PIXEL_MAX:g}]")
    flat = x.values.copy()
    flat[flat_index] = value
    return InputTensor(x.shape, flat)
