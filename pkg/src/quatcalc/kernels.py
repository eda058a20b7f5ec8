"""Closed-form noncommutative Cauchy kernels and their integer powers.

The right kernel

    K_R(s, x) = -(x - conj(s)) * (x^2 - 2 Re(s) x + |s|^2)^(-1)

is the right-slice-regular inverse of ``x -> s - x``; it is singular exactly
on the 2-sphere ``[s]``.  Its n-th power expands as

    K_R^n(s, x) = sum_k C(n,k) conj(s)^(n-k) (-x)^k (x^2 - 2 Re(s) x + |s|^2)^(-n),

which reduces to ``(s - x)^(-n)`` whenever ``s`` and ``x`` commute and
satisfies  d^m/dx0^m K_R(s,x) = m! K_R^(m+1)(s,x)  and
d^m/ds0^m K_R(s,x) = (-1)^m m! K_R^(m+1)(s,x); both identities are enforced
by finite-difference tests.
"""
from __future__ import annotations

from math import comb

from .errors import SingularityError
from .quaternion import Quaternion, decompose

__all__ = [
    "sphere_polynomial",
    "cauchy_kernel_right",
    "cauchy_kernel_left",
    "kernel_power",
]


def sphere_polynomial(s: Quaternion, x: Quaternion) -> Quaternion:
    """``x^2 - 2 Re(s) x + |s|^2``; vanishes exactly for ``x`` on ``[s]``."""
    return x * x - (2.0 * s.w) * x + s.norm_sq()


def _check_off_sphere(s: Quaternion, x: Quaternion, tol: float) -> None:
    s0, s1, _ = decompose(s)
    from .quaternion import Sphere

    dist = Sphere(s0, s1).distance(x)
    if dist <= tol * (1.0 + abs(s) + abs(x)):
        raise SingularityError(
            f"evaluation point lies on the singular sphere [s] (distance {dist:.3e})")


def cauchy_kernel_right(s: Quaternion, x: Quaternion, singular_tol: float = 1e-12) -> Quaternion:
    """Right Cauchy kernel ``-(x - conj(s)) (x^2 - 2 Re(s) x + |s|^2)^(-1)``."""
    _check_off_sphere(s, x, singular_tol)
    return -(x - s.conjugate()) * sphere_polynomial(s, x).inverse()


def cauchy_kernel_left(s: Quaternion, x: Quaternion, singular_tol: float = 1e-12) -> Quaternion:
    """Left Cauchy kernel ``-(x^2 - 2 Re(s) x + |s|^2)^(-1) (x - conj(s))``."""
    _check_off_sphere(s, x, singular_tol)
    return -(sphere_polynomial(s, x).inverse() * (x - s.conjugate()))


def kernel_power(s: Quaternion, x: Quaternion, n: int, singular_tol: float = 1e-12) -> Quaternion:
    """n-th power ``K_R^n(s, x)`` via the binomial expansion above."""
    if n < 1:
        raise ValueError("kernel power requires n >= 1")
    _check_off_sphere(s, x, singular_tol)
    sc = s.conjugate()
    # conj(s)^(n-k) and (-x)^k tables, smallest powers first
    sc_pows = [Quaternion(1.0)]
    mx_pows = [Quaternion(1.0)]
    mx = -x
    for _ in range(n):
        sc_pows.append(sc_pows[-1] * sc)
        mx_pows.append(mx_pows[-1] * mx)
    total = Quaternion(0.0)
    for k in range(n + 1):
        total = total + comb(n, k) * (sc_pows[n - k] * mx_pows[k])
    inv = sphere_polynomial(s, x).inverse()
    return total * (inv ** n)
