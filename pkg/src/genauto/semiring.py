"""Scalar algebra and dense matrix arithmetic.

Two semirings are supported. ``REAL`` matrices are float64 arrays with the
ordinary (+, x); ``BOOLEAN`` matrices are numpy ``bool`` arrays with (or, and).
The semiring of an array is read off its dtype, so a Boolean matrix is never a
0/1-valued real in disguise.
"""
from __future__ import annotations

import enum
import math

import numpy as np

from .errors import AlgebraError, ParameterError, ShapeError


class SemiringKind(enum.Enum):
    BOOLEAN = "boolean"
    REAL = "real"

    @property
    def dtype(self):
        return np.bool_ if self is SemiringKind.BOOLEAN else np.float64

    @property
    def zero(self):
        return False if self is SemiringKind.BOOLEAN else 0.0

    @property
    def one(self):
        return True if self is SemiringKind.BOOLEAN else 1.0


def semiring_of(x) -> SemiringKind:
    x = np.asarray(x)
    if x.dtype == np.bool_:
        return SemiringKind.BOOLEAN
    if np.issubdtype(x.dtype, np.floating):
        return SemiringKind.REAL
    raise AlgebraError(f"no semiring for dtype {x.dtype}")


def as_matrix(entries, semiring: SemiringKind = SemiringKind.REAL) -> np.ndarray:
    """Coerce nested rows into a read-only 2-D array of the semiring's dtype."""
    arr = np.asarray(entries)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ShapeError(f"expected a nonempty 2-D matrix, got shape {arr.shape}")
    if semiring is SemiringKind.BOOLEAN:
        if not np.all((arr == 0) | (arr == 1)):
            raise AlgebraError("Boolean matrix entries must be 0 or 1")
    out = np.array(arr, dtype=semiring.dtype)
    out.setflags(write=False)
    return out


def as_vector(entries, semiring: SemiringKind = SemiringKind.REAL) -> np.ndarray:
    arr = np.asarray(entries)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise ShapeError(f"expected a nonempty vector, got shape {arr.shape}")
    if semiring is SemiringKind.BOOLEAN and not np.all((arr == 0) | (arr == 1)):
        raise AlgebraError("Boolean vector entries must be 0 or 1")
    out = np.array(arr, dtype=semiring.dtype)
    out.setflags(write=False)
    return out


def identity(n: int, semiring: SemiringKind = SemiringKind.REAL) -> np.ndarray:
    return as_matrix(np.eye(n), semiring)


def _same_semiring(*arrays) -> SemiringKind:
    kinds = {semiring_of(a) for a in arrays}
    if len(kinds) != 1:
        raise AlgebraError("operands belong to different semirings")
    return kinds.pop()


def mat_mul(a, b) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    kind = _same_semiring(a, b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    if kind is SemiringKind.BOOLEAN:
        # or-of-ands == (integer count of witnesses) > 0
        return (a.astype(np.int64) @ b.astype(np.int64)) > 0
    return a @ b


def mat_add(a, b) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    kind = _same_semiring(a, b)
    if a.shape != b.shape:
        raise ShapeError(f"cannot add {a.shape} and {b.shape}")
    if kind is SemiringKind.BOOLEAN:
        return a | b
    return a + b


def bilinear_form(left, m, right):
    """Collapse ``left @ m @ right`` (row vector, matrix, column vector) to a scalar."""
    left, m, right = np.asarray(left), np.asarray(m), np.asarray(right)
    kind = _same_semiring(left, m, right)
    if left.ndim != 1 or right.ndim != 1 or m.ndim != 2:
        raise ShapeError("bilinear_form expects (vector, matrix, vector)")
    if left.shape[0] != m.shape[0] or m.shape[1] != right.shape[0]:
        raise ShapeError(f"cannot form {left.shape} x {m.shape} x {right.shape}")
    if kind is SemiringKind.BOOLEAN:
        row = mat_mul(left[None, :], m)
        return bool(mat_mul(row, right[:, None])[0, 0])
    return float(left @ m @ right)


def hoelder_norm(v, alpha: float = 2.0) -> float:
    """``(sum |x_i|**alpha) ** (1/alpha)``; ``alpha=math.inf`` gives the max norm."""
    if not alpha >= 1:
        raise ParameterError(f"Hölder exponent must be >= 1, got {alpha}")
    x = np.abs(np.asarray(v, dtype=np.float64)).ravel()
    if x.size == 0:
        return 0.0
    if math.isinf(alpha):
        return float(x.max())
    if alpha == 1:
        return float(x.sum())
    if alpha == 2:
        return float(np.sqrt(np.dot(x, x)))
    # scale by the max entry to avoid overflow for large alpha
    top = x.max()
    if top == 0:
        return 0.0
    return float(top * np.sum((x / top) ** alpha) ** (1.0 / alpha))
