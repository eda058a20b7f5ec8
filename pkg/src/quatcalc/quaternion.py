"""Quaternion arithmetic, imaginary units, slice decomposition, 2-spheres.

Scalars are elements ``w + x*e1 + y*e2 + z*e3`` with the Hamilton
orientation ``e1*e2 = e3``.  Every value is immutable and every function is
pure, so everything here is safe to share across threads and to evaluate
inside parallel quadrature loops.

A quaternion ``q`` with nonzero imaginary part decomposes uniquely as
``q = x0 + I*x1`` with ``x0 = Re(q)``, ``x1 = |Im(q)| > 0`` and ``I`` a unit
imaginary direction (``I*I = -1``).  For real ``q`` the direction is
conventionally fixed to ``e1``; downstream formulas do not depend on that
choice and the test suite checks the independence explicitly.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DomainError

__all__ = [
    "Quaternion",
    "ZERO",
    "ONE",
    "E1",
    "E2",
    "E3",
    "SliceParts",
    "Sphere",
    "decompose",
    "recompose",
    "qexp",
    "unit_imaginary",
    "orthogonal_unit",
]


class Quaternion:
    """Immutable quaternion ``w + x*e1 + y*e2 + z*e3``."""

    __slots__ = ("w", "x", "y", "z")

    def __init__(self, w=0.0, x=0.0, y=0.0, z=0.0):
        self.w = float(w)
        self.x = float(x)
        self.y = float(y)
        self.z = float(z)

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        w, x, y, z = (float(v) for v in arr)
        return cls(w, x, y, z)

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    # -- algebra ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(self.w + other.w, self.x + other.x,
                              self.y + other.y, self.z + other.z)
        if isinstance(other, (int, float)):
            return Quaternion(self.w + other, self.x, self.y, self.z)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(self.w - other.w, self.x - other.x,
                              self.y - other.y, self.z - other.z)
        if isinstance(other, (int, float)):
            return Quaternion(self.w - other, self.x, self.y, self.z)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(other - self.w, -self.x, -self.y, -self.z)
        return NotImplemented

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            a, b = self, other
            return Quaternion(
                a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
                a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
                a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
                a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
            )
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other,
                              self.y * other, self.z * other)
        return NotImplemented

    def __rmul__(self, other):
        # real scalars commute; quaternion*quaternion is handled by __mul__
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other,
                              self.y * other, self.z * other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.w / other, self.x / other,
                              self.y / other, self.z / other)
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = ONE
        base = self
        n = k
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm_sq(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def __abs__(self) -> float:
        return math.sqrt(self.norm_sq())

    def inverse(self) -> "Quaternion":
        n2 = self.norm_sq()
        if n2 == 0.0:
            raise DomainError("zero quaternion has no inverse")
        return Quaternion(self.w / n2, -self.x / n2, -self.y / n2, -self.z / n2)

    # -- structure --------------------------------------------------------

    def imag(self) -> "Quaternion":
        return Quaternion(0.0, self.x, self.y, self.z)

    def imag_norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def is_real(self, tol: float = 0.0) -> bool:
        return self.imag_norm() <= tol

    # -- comparison / io ---------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Quaternion):
            return (self.w == other.w and self.x == other.x
                    and self.y == other.y and self.z == other.z)
        if isinstance(other, (int, float)):
            return self.w == other and self.imag_norm() == 0.0
        return NotImplemented

    def isclose(self, other: "Quaternion", atol: float = 1e-12) -> bool:
        return abs(self - other) <= atol

    def __repr__(self):
        return f"Quaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


ZERO = Quaternion(0.0)
ONE = Quaternion(1.0)
E1 = Quaternion(0.0, 1.0)
E2 = Quaternion(0.0, 0.0, 1.0)
E3 = Quaternion(0.0, 0.0, 0.0, 1.0)


class SliceParts(NamedTuple):
    """Decomposition ``q = x0 + unit*x1`` with ``x1 >= 0`` and ``unit**2 = -1``."""

    x0: float
    x1: float
    unit: Quaternion


def decompose(q: Quaternion) -> SliceParts:
    """Split ``q`` into real part, imaginary magnitude and unit direction.

    Real inputs get the canonical direction ``e1``; any direction would do,
    and the choice never leaks into results (``x1 = 0`` kills the term).
    """
    x1 = q.imag_norm()
    if x1 == 0.0:
        return SliceParts(q.w, 0.0, E1)
    return SliceParts(q.w, x1, Quaternion(0.0, q.x / x1, q.y / x1, q.z / x1))


def recompose(x0: float, x1: float, unit: Quaternion) -> Quaternion:
    return Quaternion(x0, unit.x * x1, unit.y * x1, unit.z * x1)


def qexp(q: Quaternion) -> Quaternion:
    """Exponential ``e^q = e^{x0} (cos x1 + I sin x1)`` on the slice of ``q``."""
    x0, x1, unit = decompose(q)
    r = math.exp(x0)
    if x1 == 0.0:
        return Quaternion(r)
    c = r * math.cos(x1)
    s = r * math.sin(x1)
    return Quaternion(c, unit.x * s, unit.y * s, unit.z * s)


def unit_imaginary(q: Quaternion, tol: float = 1e-12) -> Quaternion:
    """Normalize ``q`` to a unit imaginary direction; reject near-real input."""
    if abs(q.w) > tol * (1.0 + abs(q)):
        raise DomainError(f"quaternion has a real part {q.w!r}; not an imaginary direction")
    n = q.imag_norm()
    if n <= tol:
        raise DomainError("cannot normalize a (near-)zero imaginary part")
    return Quaternion(0.0, q.x / n, q.y / n, q.z / n)


def orthogonal_unit(unit: Quaternion) -> Quaternion:
    """Some unit imaginary direction orthogonal to ``unit``.

    Deterministic: Gram-Schmidt against the first basis direction that is
    not parallel to ``unit``.
    """
    u = np.array([unit.x, unit.y, unit.z])
    for cand in (np.array([1.0, 0.0, 0.0]),
                 np.array([0.0, 1.0, 0.0]),
                 np.array([0.0, 0.0, 1.0])):
        v = cand - np.dot(cand, u) * u
        n = np.linalg.norm(v)
        if n > 0.5:
            v = v / n
            return Quaternion(0.0, v[0], v[1], v[2])
    raise DomainError("input is not a unit imaginary direction")


class Sphere(NamedTuple):
    """The 2-sphere ``[q] = {x0 + I*x1 : I unit imaginary}``.

    Degenerates to the single real point ``x0`` when ``x1 == 0``.
    """

    x0: float
    x1: float

    def contains(self, q: Quaternion, tol: float = 1e-9) -> bool:
        return self.distance(q) <= tol

    def distance(self, q: Quaternion) -> float:
        """Euclidean distance from ``q`` to the sphere as a subset of H."""
        return math.hypot(q.w - self.x0, q.imag_norm() - self.x1)

    def distance_to(self, other: "Sphere") -> float:
        return math.hypot(self.x0 - other.x0, self.x1 - other.x1)

    def point(self, unit: Quaternion) -> Quaternion:
        """The representative ``x0 + unit*x1`` on the slice of ``unit``."""
        return recompose(self.x0, self.x1, unit)

    def modulus(self) -> float:
        return math.hypot(self.x0, self.x1)
