"""Planar affine maps ``x -> A x + b``.

Matrices are 2x2 float arrays and vectors length-2 float arrays. Everything
is closed-form; there is no general eigen/SVD machinery here.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoUniqueFixedPoint

SINGULAR_TOL = 1e-12


def as_mat2(a) -> np.ndarray:
    m = np.array(a, dtype=float).reshape(2, 2)
    if not np.isfinite(m).all():
        raise ValueError("matrix entries must be finite")
    m.flags.writeable = False
    return m


def as_vec2(v) -> np.ndarray:
    out = np.array(v, dtype=float).reshape(2)
    if not np.isfinite(out).all():
        raise ValueError("vector components must be finite")
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class AffineMap:
    """``apply(v) = linear @ v + offset``. Immutable."""

    linear: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "linear", as_mat2(self.linear))
        object.__setattr__(self, "offset", as_vec2(self.offset))

    @classmethod
    def identity(cls) -> "AffineMap":
        return cls(np.eye(2), np.zeros(2))

    def __call__(self, v):
        return apply(self, v)

    def __eq__(self, other):
        if not isinstance(other, AffineMap):
            return NotImplemented
        return bool(
            np.array_equal(self.linear, other.linear)
            and np.array_equal(self.offset, other.offset)
        )

    def __hash__(self):
        return hash((self.linear.tobytes(), self.offset.tobytes()))

    def __repr__(self):
        return f"AffineMap(linear={self.linear.tolist()}, offset={self.offset.tolist()})"


def apply(m: AffineMap, v) -> np.ndarray:
    """Evaluate ``m`` at a point, or row-wise on an ``(n, 2)`` array."""
    v = np.asarray(v, dtype=float)
    return v @ m.linear.T + m.offset


def compose(f: AffineMap, g: AffineMap) -> AffineMap:
    """``f o g``, i.e. ``g`` is applied first."""
    return AffineMap(f.linear @ g.linear, f.linear @ g.offset + f.offset)


def determinant(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])


def spectral_norm(a) -> float:
    """Largest singular value of a 2x2 matrix ``[[a, b], [c, d]]``.

    Uses sigma_max = (hypot(a + d, c - b) + hypot(a - d, c + b)) / 2, which
    equals sqrt((T + sqrt(T**2 - 4 det**2)) / 2) with T the squared Frobenius
    norm but has no cancellation when the two singular values nearly agree.
    """
    a = np.asarray(a, dtype=float)
    return float(spectral_norms(a.reshape(1, 2, 2))[0])


def spectral_norms(stack: np.ndarray) -> np.ndarray:
    """Vectorised :func:`spectral_norm` over an ``(n, 2, 2)`` stack."""
    m = np.asarray(stack, dtype=float)
    a, b, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    return 0.5 * (np.hypot(a + d, c - b) + np.hypot(a - d, c + b))


def lipschitz(m: AffineMap) -> float:
    """Lipschitz constant of an affine map in the Euclidean metric."""
    return spectral_norm(m.linear)


def fixed_point(m: AffineMap) -> np.ndarray:
    """Unique solution of ``m(p) = p``.

    Raises :class:`NoUniqueFixedPoint` when ``|det(I - A)| < 1e-12``.
    """
    k = np.eye(2) - m.linear
    det = determinant(k)
    if abs(det) < SINGULAR_TOL:
        raise NoUniqueFixedPoint(f"det(I - A) = {det!r} is numerically zero")
    # Cramer's rule; exact enough for 2x2 and no pivoting surprises
    b = m.offset
    p = np.array([
        (b[0] * k[1, 1] - k[0, 1] * b[1]) / det,
        (k[0, 0] * b[1] - b[0] * k[1, 0]) / det,
    ])
    return p


def matrix_power(a, n: int) -> np.ndarray:
    """``a**n`` by repeated multiplication (``n >= 1``)."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    a = as_mat2(a)
    out = a.copy()
    for _ in range(n - 1):
        out = out @ a
    out.flags.writeable = False
    return out
