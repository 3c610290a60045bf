"""Exact 2x2 linear algebra for trace-zero matrices with a purely imaginary spectrum.

A matrix ``[[a, b], [c, -a]]`` with ``a**2 + b*c < 0`` has eigenvalues
``+-i*omega`` with ``omega = sqrt(-(a**2 + b*c))``.  Its exponential is a
closed-form combination of the identity and the matrix itself, and it is
similar to the rotation generator ``[[0, -omega], [omega, 0]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

import numpy as np

__all__ = [
    "SpectralConditionError",
    "TraceZeroMatrix2",
    "QuadraticInvariant",
    "omega",
    "expm",
    "is_proportional",
    "normal_form",
    "trace_criterion",
    "quadratic_invariant",
    "similarity",
]

DEFAULT_PROPORTIONALITY_TOL = 1e-9


class SpectralConditionError(ValueError):
    """Raised when ``a**2 + b*c >= 0``, i.e. the matrix has a real eigenvalue."""


@dataclass(frozen=True)
class TraceZeroMatrix2:
    """The matrix ``[[a, b], [c, -a]]``; the bottom-right entry is implicit."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"entry {name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, m, rtol: float = 1e-14) -> "TraceZeroMatrix2":
        """Build from a 2x2 array or a row-major sequence of 4 reals.

        The trace is checked against ``rtol`` times the Frobenius norm.
        """
        arr = np.asarray(m, dtype=float).reshape(2, 2)
        trace = arr[0, 0] + arr[1, 1]
        if abs(trace) > rtol * max(np.linalg.norm(arr), np.finfo(float).tiny):
            raise ValueError(f"matrix has nonzero trace {trace!r}")
        return cls(arr[0, 0], arr[0, 1], arr[1, 0])

    @classmethod
    def rotation(cls, w: float) -> "TraceZeroMatrix2":
        """The rotation generator ``[[0, -w], [w, 0]]``."""
        return cls(0.0, -w, w)

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, -self.a]])

    def to_list(self) -> list[float]:
        """Row-major entries, with the implicit ``-a`` materialized."""
        return [self.a, self.b, self.c, 0.0 - self.a]

    def __mul__(self, gamma: float) -> "TraceZeroMatrix2":
        return TraceZeroMatrix2(gamma * self.a, gamma * self.b, gamma * self.c)

    __rmul__ = __mul__

    def __neg__(self) -> "TraceZeroMatrix2":
        return TraceZeroMatrix2(-self.a, -self.b, -self.c)

    @property
    def frobenius(self) -> float:
        return math.sqrt(2.0 * self.a * self.a + self.b * self.b + self.c * self.c)

    @cached_property
    def determinant_neg(self) -> float:
        """``a**2 + b*c`` (minus the determinant), correctly rounded."""
        # exact rational evaluation: cancellation here feeds straight into omega
        a, b, c = Fraction(self.a), Fraction(self.b), Fraction(self.c)
        return float(a * a + b * c)

    @property
    def imaginary_spectrum(self) -> bool:
        return self.determinant_neg < 0.0

    @cached_property
    def omega(self) -> float:
        disc = self.determinant_neg
        if disc >= 0.0:
            raise SpectralConditionError(
                f"a^2 + bc = {disc!r} >= 0: matrix {self.to_list()} has a real eigenvalue"
            )
        return math.sqrt(-disc)


class QuadraticInvariant(NamedTuple):
    """The form ``q11*y1**2 + 2*q12*y1*y2 + q22*y2**2``."""

    q11: float
    q12: float
    q22: float

    def __call__(self, y) -> float:
        y1, y2 = y[0], y[1]
        return self.q11 * y1 * y1 + 2.0 * self.q12 * y1 * y2 + self.q22 * y2 * y2


def omega(A: TraceZeroMatrix2) -> float:
    """Rotation frequency ``sqrt(-(a**2 + b*c))``.

    Raises
    ------
    SpectralConditionError
        If ``a**2 + b*c >= 0``.
    """
    return A.omega


def expm(A: TraceZeroMatrix2, t: float) -> np.ndarray:
    """``exp(t*A) = cos(omega t) I + sin(omega t)/omega * A``, valid for any real ``t``."""
    w = A.omega
    co = math.cos(w * t)
    si = math.sin(w * t) / w
    return np.array([[co + si * A.a, si * A.b], [si * A.c, co - si * A.a]])


def _unit(A: TraceZeroMatrix2) -> np.ndarray:
    n = A.frobenius
    if n == 0.0:
        raise ValueError("zero matrix has no direction")
    return np.array([A.a, A.b, A.c]) * np.array([math.sqrt(2.0), 1.0, 1.0]) / n


def is_proportional(
    A0: TraceZeroMatrix2, A1: TraceZeroMatrix2, tol: float = DEFAULT_PROPORTIONALITY_TOL
) -> bool:
    """Whether ``A1 = gamma * A0`` for some real ``gamma``, up to ``tol``.

    Both matrices are scaled to unit Frobenius norm and compared up to sign, so
    the test does not depend on the magnitude of either matrix.
    """
    u0, u1 = _unit(A0), _unit(A1)
    dist = min(np.linalg.norm(u1 - u0), np.linalg.norm(u1 + u0))
    return bool(dist <= tol)


def normal_form(A: TraceZeroMatrix2) -> tuple[np.ndarray, TraceZeroMatrix2]:
    """Return ``(G, B)`` with ``G @ A @ inv(G) == B == [[0, -omega], [omega, 0]]``.

    ``inv(G)`` has as columns the real and imaginary parts of the eigenvector
    ``(-b, a + i*omega)`` of ``-i*omega``, scaled so that ``|det G| = 1``.
    ``det G < 0`` exactly when ``A`` turns clockwise (``b > 0``).
    """
    w = A.omega
    P = np.array([[-A.b, 0.0], [A.a, w]]) / math.sqrt(abs(A.b) * w)
    G = np.array([[P[1, 1], -P[0, 1]], [-P[1, 0], P[0, 0]]]) / (P[0, 0] * P[1, 1] - P[0, 1] * P[1, 0])
    return G, TraceZeroMatrix2.rotation(w)


def similarity(G: np.ndarray, A: TraceZeroMatrix2) -> TraceZeroMatrix2:
    """``G @ A @ inv(G)`` as a trace-zero matrix."""
    M = G @ A.to_array() @ np.linalg.inv(G)
    return TraceZeroMatrix2(0.5 * (M[0, 0] - M[1, 1]), M[0, 1], M[1, 0])


def trace_criterion(
    A0: TraceZeroMatrix2, A1: TraceZeroMatrix2, tol: float = DEFAULT_PROPORTIONALITY_TOL
) -> tuple[float, bool]:
    """Extremal squared trace of ``exp(s A0) exp(t A1)`` and whether it exceeds 4.

    The pair is first moved to coordinates where ``A0`` is a rotation.  There
    ``phi**2 = Tr(A0 A1)**2 / (omega0**2 omega1**2) >= 4``, and the excess over 4
    measures the symmetric part of ``A1``.  ``distinct_moduli`` is true when the
    ratio of that part to the rotational part exceeds ``tol``, which happens
    exactly when the pair is not proportional.
    """
    G, _ = normal_form(A0)
    B1 = similarity(G, A1)
    w0, w1 = A0.omega, A1.omega
    tr = 2.0 * A0.a * A1.a + A0.b * A1.c + A0.c * A1.b
    phi_sq = tr * tr / (w0 * w0 * w1 * w1)
    symmetric_sq = 4.0 * B1.a * B1.a + (B1.b + B1.c) ** 2
    rotational_sq = (B1.b - B1.c) ** 2
    distinct = bool(math.sqrt(symmetric_sq / rotational_sq) > tol)
    return float(phi_sq), distinct


def quadratic_invariant(A: TraceZeroMatrix2) -> QuadraticInvariant:
    """First integral ``c*y1**2 - 2a*y1*y2 - b*y2**2`` of ``dy/dt = A y``."""
    return QuadraticInvariant(A.c, -A.a, -A.b)
