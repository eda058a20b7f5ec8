"""Right slice regular functions: closed forms, stems, and pointwise tools.

A function is right slice regular when its restriction to every slice plane
``C_I`` is killed by the right Cauchy-Riemann operator
``(f d_I)(x) = (d/dx0 f + (d/dx1 f) I) / 2``.  The catalog of closed forms
covers everything the calculus manipulates:

* ``RightPolynomial``  - ``s -> sum_k b_k s^k`` (coefficients on the left);
* ``KernelPowerFunction`` - ``s -> K_R^n(p, s)``, the right Cauchy kernel
  powers, singular on the 2-sphere ``[p]``;
* ``ExpKernel``        - ``s -> e^(-s a)`` for real ``a``;
* ``TransformFunction`` - the Laplace-Stieltjes transform of a measure,
  right slice regular on its convergence strip, with the slice derivative
  realized by the derivative measure;
* ``StemFunction``     - an arbitrary holomorphic map given on one slice
  and extended to all of H by the representation formula

      f(x) = f(x_I) (1 - I I_x)/2 + f(conj(x_I)) (1 + I I_x)/2.

Slice derivatives are taken in the real direction (for right slice regular
functions the two coincide); stems fall back to Richardson-extrapolated
central differences with step ``1e-5 * max(1, |x|)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, SingularityError
from .kernels import cauchy_kernel_left, cauchy_kernel_right, kernel_power
from .measures import QMeasure, derivative_measure, laplace_stieltjes, strip_limit
from .quadrature import CircleContour, integrate_periodic
from .quaternion import (ONE, Quaternion, Sphere, decompose, qexp, recompose,
                         unit_imaginary)

__all__ = [
    "AxialDomain",
    "SliceFunction",
    "RightPolynomial",
    "KernelPowerFunction",
    "ExpKernel",
    "TransformFunction",
    "StemFunction",
    "cauchy_kernel_right",
    "cauchy_kernel_left",
    "kernel_power",
    "IntrinsicReport",
    "is_intrinsic",
    "splitting",
    "cr_residual",
    "cauchy_reconstruct",
    "right_regularity_residual",
    "left_regularity_residual",
    "slice_fd",
]

_DOMAIN_SHRINK = 1e-12


class AxialDomain:
    """Axially symmetric region descriptor with a conservative membership test.

    Strict inequalities are shrunk by a configurable margin so evaluation
    never lands on a singular sphere through rounding alone.
    """

    __slots__ = ("kind", "c", "radius", "spheres")

    def __init__(self, kind: str, c: float = 0.0, radius: float = 0.0,
                 spheres: Sequence[Sphere] = ()):
        self.kind = kind
        self.c = c
        self.radius = radius
        self.spheres = tuple(spheres)

    @classmethod
    def whole(cls) -> "AxialDomain":
        return cls("whole")

    @classmethod
    def strip(cls, c: float) -> "AxialDomain":
        return cls("strip", c=c)

    @classmethod
    def ball(cls, radius: float) -> "AxialDomain":
        return cls("ball", radius=radius)

    @classmethod
    def outside_spheres(cls, spheres: Sequence[Sphere]) -> "AxialDomain":
        return cls("outside_spheres", spheres=spheres)

    def contains(self, q: Quaternion, margin: float = _DOMAIN_SHRINK) -> bool:
        scale = 1.0 + abs(q)
        if self.kind == "whole":
            return True
        if self.kind == "strip":
            return abs(q.w) < self.c - margin * scale
        if self.kind == "ball":
            return abs(q) < self.radius - margin * scale
        if self.kind == "outside_spheres":
            return all(sp.distance(q) > margin * scale for sp in self.spheres)
        raise ValueError(f"unknown domain kind {self.kind!r}")

    def contains_ball(self, radius: float, margin: float = 1e-9) -> bool:
        """Whether the closed ball of the given radius fits inside."""
        if self.kind == "whole":
            return True
        if self.kind == "strip":
            return radius < self.c - margin
        if self.kind == "ball":
            return radius < self.radius - margin
        if self.kind == "outside_spheres":
            return all(sp.modulus() > radius + margin for sp in self.spheres)
        raise ValueError(f"unknown domain kind {self.kind!r}")

    def __repr__(self):
        return f"AxialDomain({self.kind!r})"


def slice_fd(fn: Callable[[float], Quaternion], h: float,
             order: int = 1, richardson: bool = True) -> Quaternion:
    """Central finite difference of ``t -> fn(t)`` at ``t = 0``.

    ``order`` 1 or 2; one Richardson extrapolation step by default.
    """
    def diff(step: float) -> Quaternion:
        if order == 1:
            return (fn(step) - fn(-step)) * (0.5 / step)
        return (fn(step) - 2.0 * fn(0.0) + fn(-step)) * (1.0 / step ** 2)

    d1 = diff(h)
    if not richardson:
        return d1
    d2 = diff(h / 2.0)
    return (d2 * 4.0 - d1) * (1.0 / 3.0)


class SliceFunction:
    """Base class: pointwise evaluation plus slice derivatives."""

    domain: AxialDomain

    def __call__(self, x: Quaternion) -> Quaternion:
        raise NotImplementedError

    def _check_domain(self, x: Quaternion):
        if not self.domain.contains(x):
            raise DomainError(f"{type(self).__name__}: point outside the function domain")

    def slice_derivative(self, x: Quaternion, m: int = 1) -> Quaternion:
        """m-th derivative in the real direction (finite-difference fallback)."""
        if m == 0:
            return self(x)
        if m > 2:
            raise ValueError("finite-difference slice derivatives support m <= 2")
        h = (1e-5 if m == 1 else 3e-3) * max(1.0, abs(x))
        return slice_fd(lambda t: self(x + t), h, order=m)


class RightPolynomial(SliceFunction):
    """``s -> sum_k b_k s^k`` with quaternion coefficients on the left."""

    def __init__(self, coefficients: Sequence[Quaternion]):
        self.coefficients = tuple(
            c if isinstance(c, Quaternion) else Quaternion(float(c))
            for c in coefficients)
        self.domain = AxialDomain.whole()

    def __call__(self, x: Quaternion) -> Quaternion:
        total = Quaternion(0.0)
        xp = ONE
        for b in self.coefficients:
            total = total + b * xp
            xp = xp * x
        return total

    def slice_derivative(self, x: Quaternion, m: int = 1) -> Quaternion:
        coeffs = list(self.coefficients)
        for _ in range(m):
            coeffs = [coeffs[k] * float(k) for k in range(1, len(coeffs))]
            if not coeffs:
                return Quaternion(0.0)
        return RightPolynomial(coeffs)(x)

    def is_real(self, tol: float = 0.0) -> bool:
        return all(c.imag_norm() <= tol for c in self.coefficients)


class KernelPowerFunction(SliceFunction):
    """``s -> K_R^n(p, s)``; singular exactly on the 2-sphere ``[p]``."""

    def __init__(self, p: Quaternion, n: int = 1):
        if n < 1:
            raise ValueError("kernel power requires n >= 1")
        self.p = p
        self.n = n
        p0, p1, _ = decompose(p)
        self.domain = AxialDomain.outside_spheres([Sphere(p0, p1)])

    def __call__(self, x: Quaternion) -> Quaternion:
        if not self.domain.contains(x):
            raise SingularityError("evaluation on the singular sphere of the kernel")
        return kernel_power(self.p, x, self.n)

    def slice_derivative(self, x: Quaternion, m: int = 1) -> Quaternion:
        # d/dx0 K_R^n = n K_R^(n+1), iterated m times
        factor = 1.0
        for j in range(m):
            factor *= self.n + j
        return kernel_power(self.p, x, self.n + m) * factor


class ExpKernel(SliceFunction):
    """``s -> e^(-s a)`` for a real shift ``a`` (the transform of ``delta_a``)."""

    def __init__(self, a: float):
        self.a = float(a)
        self.domain = AxialDomain.whole()

    def __call__(self, x: Quaternion) -> Quaternion:
        return qexp(x * (-self.a))

    def slice_derivative(self, x: Quaternion, m: int = 1) -> Quaternion:
        return self(x) * (-self.a) ** m


class TransformFunction(SliceFunction):
    """Laplace-Stieltjes transform of a measure, on its convergence strip."""

    def __init__(self, measure: QMeasure, tol: float = 1e-10, method: str = "auto"):
        self.measure = measure
        self.tol = tol
        self.method = method
        self.domain = AxialDomain.strip(strip_limit(measure))

    def __call__(self, x: Quaternion) -> Quaternion:
        return laplace_stieltjes(self.measure, x, tol=self.tol, method=self.method)

    def slice_derivative(self, x: Quaternion, m: int = 1) -> Quaternion:
        return laplace_stieltjes(derivative_measure(self.measure, m), x,
                                 tol=self.tol, method="quadrature")


class StemFunction(SliceFunction):
    """A pure holomorphic stem on one slice, extended by the representation formula."""

    def __init__(self, unit: Quaternion, holo: Callable[[Quaternion], Quaternion],
                 domain: Optional[AxialDomain] = None):
        self.unit = unit_imaginary(unit)
        self.holo = holo
        self.domain = domain if domain is not None else AxialDomain.whole()

    def __call__(self, x: Quaternion) -> Quaternion:
        self._check_domain(x)
        x0, x1, ix = decompose(x)
        I = self.unit
        x_on_slice = recompose(x0, x1, I)
        half = Quaternion(0.5)
        left = self.holo(x_on_slice) * ((ONE - I * ix) * half)
        right = self.holo(x_on_slice.conjugate()) * ((ONE + I * ix) * half)
        return left + right


@dataclass(frozen=True)
class IntrinsicReport:
    intrinsic: bool
    max_deviation: float
    samples: int
    tolerance: float


def _sample_domain_points(domain: AxialDomain, rng: np.random.Generator,
                          count: int) -> list:
    """Random points inside a domain, spanning several slices."""
    pts = []
    guard = 0
    while len(pts) < count:
        guard += 1
        if guard > 100 * count:
            raise DomainError("could not sample enough points inside the domain")
        direction = rng.normal(size=3)
        nrm = np.linalg.norm(direction)
        if nrm < 1e-6:
            continue
        unit = Quaternion(0.0, *(direction / nrm))
        if domain.kind == "strip":
            c = domain.c if math.isfinite(domain.c) else 2.0
            x0 = rng.uniform(-0.8 * c, 0.8 * c)
            x1 = rng.uniform(0.1, 2.0)
        elif domain.kind == "ball":
            r = 0.8 * domain.radius
            x0 = rng.uniform(-r, r)
            x1 = rng.uniform(0.0, math.sqrt(max(r * r - x0 * x0, 0.0)))
        else:
            x0 = rng.uniform(-2.0, 2.0)
            x1 = rng.uniform(0.0, 2.0)
        q = recompose(x0, x1, unit)
        if domain.contains(q, margin=1e-6):
            pts.append(q)
    return pts


def is_intrinsic(f: SliceFunction, samples: int = 64, seed: int = 0,
                 tol: float = 1e-9) -> IntrinsicReport:
    """Probabilistic test of ``f(conj(x)) = conj(f(x))`` with a certificate.

    Samples random domain points across random slices and records the
    largest deviation; intrinsic functions map every slice to itself.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for q in _sample_domain_points(f.domain, rng, samples):
        dev = abs(f(q.conjugate()) - f(q).conjugate())
        worst = max(worst, dev)
    return IntrinsicReport(intrinsic=worst <= tol, max_deviation=worst,
                           samples=samples, tolerance=tol)


def splitting(f: SliceFunction, unit_i: Quaternion, unit_j: Quaternion):
    """Split ``f`` on the slice of ``I`` as ``f_I = f1 + J f2``.

    ``I`` and ``J`` must be orthogonal unit imaginary directions; then
    ``{1, I, J, JI}`` is an orthonormal real basis of H and the components
    ``f1, f2`` are the holomorphic pieces of the splitting.  Both are
    returned as maps ``complex -> complex`` relative to the basis ``{1, I}``
    of ``C_I``.
    """
    I = unit_imaginary(unit_i)
    J = unit_imaginary(unit_j)
    dot = I.x * J.x + I.y * J.y + I.z * J.z
    if abs(dot) > 1e-12:
        raise DomainError("splitting requires orthogonal imaginary units")
    JI = J * I

    def inner(a: Quaternion, b: Quaternion) -> float:
        return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z

    def f1(z: complex) -> complex:
        v = f(recompose(z.real, z.imag, I))
        return complex(inner(v, ONE), inner(v, I))

    def f2(z: complex) -> complex:
        v = f(recompose(z.real, z.imag, I))
        return complex(inner(v, J), inner(v, JI))

    return f1, f2


def cr_residual(g: Callable[[complex], complex], z: complex, h: float = 1e-5) -> float:
    """Cauchy-Riemann residual ``|d/dx g + i d/dy g| / 2`` by central differences."""
    step = h * max(1.0, abs(z))
    dx = (g(z + step) - g(z - step)) / (2.0 * step)
    dy = (g(z + 1j * step) - g(z - 1j * step)) / (2.0 * step)
    return abs(dx + 1j * dy) / 2.0


def cauchy_reconstruct(f: SliceFunction, x: Quaternion, contour: CircleContour,
                       tol: float = 1e-10) -> Quaternion:
    """Reconstruct ``f(x)`` from the slice Cauchy formula.

    ``f(x) = (1/2pi) oint f(s) ds_I K_R(s, x)`` over a circle in the slice
    plane of the contour that surrounds ``[x]`` intersected with that plane;
    with ``s = center + R e^(I theta)`` the oriented element ``ds_I = -ds I``
    becomes ``R e^(I theta) d theta``.
    """
    x0, x1, _ = decompose(x)
    I = contour.unit
    for pt in (recompose(x0, x1, I), recompose(x0, -x1, I)):
        if abs(pt - Quaternion(contour.center)) >= contour.radius:
            raise DomainError("contour must surround both slice representatives of [x]")

    def integrand(theta: float) -> np.ndarray:
        s = contour.point(theta)
        ds_i = qexp(I * theta) * contour.radius
        return (f(s) * ds_i * cauchy_kernel_right(s, x)).to_array()

    res = integrate_periodic(integrand, tol=tol)
    return Quaternion.from_array(res.value / (2.0 * math.pi))


def _two_direction_residual(fn, x: Quaternion, h: Optional[float], side: str) -> float:
    """Finite-difference slice Cauchy-Riemann residual at a non-real point.

    ``side`` 'right' uses ``(d0 f + (d1 f) I)/2``; 'left' uses
    ``(d0 f + I (d1 f))/2``.  Values may be quaternions or component arrays.
    """
    x0, x1, unit = decompose(x)
    if x1 < 1e-6:
        raise DomainError("regularity residual needs a point off the real axis")
    step = (1e-5 if h is None else h) * max(1.0, abs(x))

    def as_array(v):
        return v.to_array() if isinstance(v, Quaternion) else np.asarray(v, dtype=float)

    def val(a0: float, a1: float) -> np.ndarray:
        return as_array(fn(recompose(a0, a1, unit)))

    def residual(st: float) -> np.ndarray:
        d0 = (val(x0 + st, x1) - val(x0 - st, x1)) / (2.0 * st)
        d1 = (val(x0, x1 + st) - val(x0, x1 - st)) / (2.0 * st)
        d0q = _array_to_quats(d0)
        d1q = _array_to_quats(d1)
        if side == "right":
            combined = [(a + b * unit) * 0.5 for a, b in zip(d0q, d1q)]
        else:
            combined = [(a + unit * b) * 0.5 for a, b in zip(d0q, d1q)]
        return np.stack([q.to_array() for q in combined])

    r1 = residual(step)
    r2 = residual(step / 2.0)
    rich = (4.0 * r2 - r1) / 3.0
    return float(np.sqrt(np.sum(np.square(rich))))


def _array_to_quats(arr: np.ndarray) -> list:
    flat = arr.reshape(-1, 4)
    return [Quaternion.from_array(row) for row in flat]


def right_regularity_residual(fn: Callable[[Quaternion], Quaternion], x: Quaternion,
                              h: Optional[float] = None) -> float:
    """Numeric right slice-regularity defect of ``fn`` at ``x`` (0 when regular)."""
    return _two_direction_residual(fn, x, h, "right")


def left_regularity_residual(fn: Callable[[Quaternion], "Quaternion | np.ndarray"],
                             x: Quaternion, h: Optional[float] = None) -> float:
    """Numeric left slice-regularity defect; accepts vector-valued functions."""
    return _two_direction_residual(fn, x, h, "left")
