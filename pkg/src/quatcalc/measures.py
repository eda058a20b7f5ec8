"""Quaternionic measures on the real line and their Laplace-Stieltjes transform.

The catalog is deliberately small: finite collections of point masses plus
exponential-kernel densities

    c * e^(t*rate) * (-t)^power * d   on an interval [lo, hi]

(with ``lo = -inf`` / ``hi = +inf`` allowed where the variation converges).
It is closed under everything the calculus needs - left/right scalar
multiplication, sums, convolution with atoms, same-rate half-line
convolutions, multiplication by real linear polynomial factors, and the
derivative weights ``(-t)^n`` - while keeping the total variation and the
admissibility moments in closed form.

The transform is the *right* bilateral Laplace-Stieltjes transform: the
measure value always sits on the LEFT of the exponential,

    L(mu)(s) = sum_i a_i e^(-s t_i) + int c e^(t*rate) (-t)^k d e^(-s t) dt.

Factor order is never commuted; ``e^(t*rate)`` and ``e^(-s t)`` live in
different slices in general and their product is evaluated pointwise by
quadrature with a certified exponential tail cut.  The kernel measures
``kernel_measure(p)`` transform to the closed-form right Cauchy kernel
``K_R(p, s)``, which doubles as a fast path and as an independent oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import (AdmissibilityError, DomainError, UnsupportedMeasureError)
from .kernels import cauchy_kernel_right
from .quadrature import dyadic_breakpoints, exp_tail_cut, integrate_adaptive
from .quaternion import ONE, ZERO, Quaternion, qexp

__all__ = [
    "Atom",
    "ExpDensity",
    "QMeasure",
    "dirac",
    "combine",
    "scale_left",
    "scale_right",
    "DiscreteProductMeasure",
    "product_measure",
    "convolve",
    "image_measure",
    "AdmissibilityReport",
    "admissible_for",
    "exp_moment",
    "laplace_stieltjes",
    "derivative_measure",
    "kernel_measure",
    "apply_linear_factor",
    "strip_limit",
]

_INF = math.inf


@dataclass(frozen=True)
class Atom:
    """Point mass ``weight * delta_t``."""

    t: float
    weight: Quaternion


@dataclass(frozen=True)
class ExpDensity:
    """Density ``coeff * e^(t*rate) * (-t)^power * right`` on ``[lo, hi]``."""

    coeff: Quaternion
    rate: Quaternion
    lo: float
    hi: float
    power: int = 0
    right: Quaternion = ONE

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("density interval must satisfy lo < hi")
        if self.power < 0:
            raise ValueError("polynomial power must be nonnegative")

    def weight_at(self, t: float) -> Quaternion:
        w = self.coeff * qexp(self.rate * t)
        if self.power:
            w = w * (-t) ** self.power
        if not _is_one(self.right):
            w = w * self.right
        return w

    def abs_scale(self) -> float:
        return abs(self.coeff) * abs(self.right)


def _is_one(q: Quaternion) -> bool:
    return q.w == 1.0 and q.x == 0.0 and q.y == 0.0 and q.z == 0.0


def _poly_exp_integral(k: int, r: float, a: float, b: float) -> float:
    """``int_a^b t^k e^(r t) dt`` in closed form; infinite endpoints allowed.

    An infinite endpoint is accepted only on the side where the integrand
    decays (``r < 0`` for ``b = +inf``, ``r > 0`` for ``a = -inf``).
    """
    if a >= b:
        return 0.0
    if r == 0.0:
        if math.isinf(a) or math.isinf(b):
            raise AdmissibilityError("polynomial integral diverges on an unbounded interval")
        return (b ** (k + 1) - a ** (k + 1)) / (k + 1)

    def antiderivative(t: float) -> float:
        # F(t) = e^(rt) * sum_{j=0}^{k} (-1)^j k!/(k-j)! t^(k-j) / r^(j+1)
        acc = 0.0
        fact = 1.0
        for j in range(k + 1):
            acc += ((-1.0) ** j) * fact * t ** (k - j) / r ** (j + 1)
            fact *= (k - j)
        return math.exp(r * t) * acc

    if math.isinf(b):
        if r >= 0.0:
            raise AdmissibilityError("exponential integral diverges at +inf")
        upper = 0.0
    else:
        upper = antiderivative(b)
    if math.isinf(a):
        if r <= 0.0:
            raise AdmissibilityError("exponential integral diverges at -inf")
        lower = 0.0
    else:
        lower = antiderivative(a)
    return upper - lower


def _abs_poly_exp_integral(k: int, r: float, a: float, b: float) -> float:
    """``int_a^b |t|^k e^(r t) dt``, splitting at zero where the sign flips."""
    if a >= b:
        return 0.0
    if k == 0:
        return _poly_exp_integral(0, r, a, b)
    total = 0.0
    if a < 0.0:
        hi = min(b, 0.0)
        # |t|^k = u^k under u = -t, which maps [a, hi] to [-hi, -a]
        total += _poly_exp_integral(k, -r, -hi, -a)
    if b > 0.0:
        total += _poly_exp_integral(k, r, max(a, 0.0), b)
    return total


class QMeasure:
    """Atoms plus exponential densities with finite total variation.

    Construction rejects measures whose variation diverges.  Atoms at the
    same point are merged (the measure of a singleton is the summed weight,
    and the variation must see the cancellation).
    """

    __slots__ = ("atoms", "densities")

    def __init__(self, atoms: Iterable[Atom] = (), densities: Iterable[ExpDensity] = ()):
        merged: dict = {}
        for a in atoms:
            t = float(a.t)
            merged[t] = merged[t] + a.weight if t in merged else a.weight
        object.__setattr__(self, "atoms",
                           tuple(Atom(t, merged[t]) for t in sorted(merged)
                                 if abs(merged[t]) > 0.0))
        # merge densities of identical shape so cancellations are visible to
        # the total variation (pieces with distinct shapes are assumed not to
        # overlap; every operation in this module preserves that)
        shaped: dict = {}
        order: list = []
        for d in densities:
            if math.isinf(d.hi) and d.rate.w >= 0.0:
                raise AdmissibilityError(
                    "density on an interval unbounded above needs Re(rate) < 0")
            if math.isinf(d.lo) and d.rate.w <= 0.0:
                raise AdmissibilityError(
                    "density on an interval unbounded below needs Re(rate) > 0")
            key = (tuple(d.rate.to_array()), d.lo, d.hi, d.power, tuple(d.right.to_array()))
            if key in shaped:
                shaped[key] = ExpDensity(shaped[key].coeff + d.coeff, d.rate,
                                         d.lo, d.hi, d.power, d.right)
            else:
                shaped[key] = d
                order.append(key)
        object.__setattr__(self, "densities",
                           tuple(shaped[k] for k in order if abs(shaped[k].coeff) > 0.0))

    def __setattr__(self, name, value):
        raise AttributeError("QMeasure is immutable")

    def total_variation(self, lo: float = -_INF, hi: float = _INF) -> float:
        """``|mu|([lo, hi])``: atom moduli plus closed-form density variation."""
        total = sum(abs(a.weight) for a in self.atoms if lo <= a.t <= hi)
        for d in self.densities:
            a, b = max(lo, d.lo), min(hi, d.hi)
            if a < b:
                total += d.abs_scale() * _abs_poly_exp_integral(d.power, d.rate.w, a, b)
        return float(total)

    def is_real(self, tol: float = 0.0) -> bool:
        """True when every weight the measure produces is real-valued."""
        for a in self.atoms:
            if a.weight.imag_norm() > tol:
                return False
        for d in self.densities:
            if (d.coeff.imag_norm() > tol or d.rate.imag_norm() > tol
                    or d.right.imag_norm() > tol):
                return False
        return True

    def __repr__(self):
        return f"QMeasure({len(self.atoms)} atoms, {len(self.densities)} densities)"


def dirac(t: float, weight: Quaternion = ONE) -> QMeasure:
    return QMeasure(atoms=[Atom(float(t), weight)])


def combine(mu: QMeasure, nu: QMeasure) -> QMeasure:
    return QMeasure(atoms=mu.atoms + nu.atoms, densities=mu.densities + nu.densities)


def scale_left(a: Quaternion, mu: QMeasure) -> QMeasure:
    return QMeasure(
        atoms=[Atom(at.t, a * at.weight) for at in mu.atoms],
        densities=[ExpDensity(a * d.coeff, d.rate, d.lo, d.hi, d.power, d.right)
                   for d in mu.densities])


def scale_right(mu: QMeasure, a: Quaternion) -> QMeasure:
    return QMeasure(
        atoms=[Atom(at.t, at.weight * a) for at in mu.atoms],
        densities=[ExpDensity(d.coeff, d.rate, d.lo, d.hi, d.power, d.right * a)
                   for d in mu.densities])


@dataclass(frozen=True)
class DiscreteProductMeasure:
    """Purely atomic product measure on the plane; weight order is mu then nu."""

    atoms: tuple  # ((t, u), weight)

    def total_variation(self) -> float:
        return float(sum(abs(w) for _, w in self.atoms))

    def value_on(self, t_interval, u_interval) -> Quaternion:
        t_lo, t_hi = t_interval
        u_lo, u_hi = u_interval
        total = ZERO
        for (t, u), w in self.atoms:
            if t_lo <= t <= t_hi and u_lo <= u <= u_hi:
                total = total + w
        return total


def product_measure(mu: QMeasure, nu: QMeasure) -> DiscreteProductMeasure:
    """Product measure of two purely atomic measures.

    Weights multiply in the order mu then nu.  A "commutative" variant with
    the reversed order on rectangles would be a different measure (it is
    not ``nu x mu`` either, which lives on the swapped product space); this
    package provides only the standard ordered product.
    """
    if mu.densities or nu.densities:
        raise UnsupportedMeasureError(
            "product measure is implemented for purely atomic factors only")
    atoms = tuple(((a.t, b.t), a.weight * b.weight)
                  for a in mu.atoms for b in nu.atoms)
    return DiscreteProductMeasure(atoms)


def _convolve_atom_density(t0: float, a: Quaternion, d: ExpDensity,
                           atom_on_left: bool) -> list:
    """Shift a density by an atom; expands ``(t0 - r)^k`` binomially.

    Left case: weight at r is ``a * c * e^((r-t0)*rate) * (-(r-t0))^k * d``;
    the shift factor ``e^(-t0*rate)`` commutes with ``e^(r*rate)`` (same
    slice) and is absorbed into the left coefficient.  Right case: the atom
    weight joins the right factor instead.
    """
    shift = qexp(d.rate * (-t0))
    pieces = []
    for j in range(d.power + 1):
        binom = math.comb(d.power, j) * t0 ** (d.power - j)
        if atom_on_left:
            coeff = (a * d.coeff * shift) * binom
            right = d.right
        else:
            coeff = (d.coeff * shift) * binom
            right = d.right * a
        pieces.append(ExpDensity(coeff, d.rate, d.lo + t0, d.hi + t0, j, right))
    return pieces


def _convolve_density_pair(d1: ExpDensity, d2: ExpDensity) -> ExpDensity:
    """Same-rate, same-side half-line convolution in closed form.

    Needs the inner factors ``d1.right * d2.coeff`` to commute with the
    shared rate so the exponentials merge; the result gains one polynomial
    degree through the Beta integral
    ``int_0^r t^k1 (r-t)^k2 dt = B(k1+1, k2+1) r^(k1+k2+1)``.
    """
    if not (d1.rate.isclose(d2.rate, 1e-14)):
        raise UnsupportedMeasureError(
            "density*density convolution requires identical exponential rates")
    inner = d1.right * d2.coeff
    if abs(inner * d1.rate - d1.rate * inner) > 1e-12 * (1.0 + abs(inner)) * (1.0 + abs(d1.rate)):
        raise UnsupportedMeasureError(
            "density*density convolution requires the inner coefficients to "
            "commute with the rate")
    right_half = (d1.lo, d1.hi) == (0.0, _INF) and (d2.lo, d2.hi) == (0.0, _INF)
    left_half = math.isinf(d1.lo) and d1.hi == 0.0 and math.isinf(d2.lo) and d2.hi == 0.0
    if not (right_half or left_half):
        raise UnsupportedMeasureError(
            "density*density convolution supports matching half-lines only")
    k1, k2 = d1.power, d2.power
    beta = math.gamma(k1 + 1) * math.gamma(k2 + 1) / math.gamma(k1 + k2 + 2)
    coeff = d1.coeff * inner * beta
    if right_half:
        # (-1)^(k1+k2) r^K = -(-r)^K on r >= 0 with K = k1+k2+1
        return ExpDensity(-coeff, d1.rate, 0.0, _INF, k1 + k2 + 1, d2.right)
    return ExpDensity(coeff, d1.rate, -_INF, 0.0, k1 + k2 + 1, d2.right)


def convolve(mu: QMeasure, nu: QMeasure) -> QMeasure:
    """Convolution ``mu * nu``: image of the product measure under addition.

    Supported combinations: atomic*atomic, atomic*density (either order),
    and same-rate half-line density pairs (the closed Beta form above).
    Anything else is rejected rather than approximated.
    """
    atoms = [Atom(a.t + b.t, a.weight * b.weight)
             for a in mu.atoms for b in nu.atoms]
    densities: list = []
    for a in mu.atoms:
        for d in nu.densities:
            densities.extend(_convolve_atom_density(a.t, a.weight, d, atom_on_left=True))
    for d in mu.densities:
        for b in nu.atoms:
            densities.extend(_convolve_atom_density(b.t, b.weight, d, atom_on_left=False))
    for d1 in mu.densities:
        for d2 in nu.densities:
            densities.append(_convolve_density_pair(d1, d2))
    return QMeasure(atoms=atoms, densities=densities)


def image_measure(mu: QMeasure, phi: Callable[[float], float]) -> QMeasure:
    """Push-forward of an atomic measure under a real map."""
    if mu.densities:
        raise UnsupportedMeasureError("image measures are implemented for atomic input only")
    return QMeasure(atoms=[Atom(float(phi(a.t)), a.weight) for a in mu.atoms])


@dataclass(frozen=True)
class AdmissibilityReport:
    ok: bool
    margin: float
    moment: Optional[float]


def exp_moment(mu: QMeasure, w: float) -> float:
    """``int e^(w |t|) d|mu|(t)`` in closed form; ``inf`` when divergent."""
    total = sum(abs(a.weight) * math.exp(w * abs(a.t)) for a in mu.atoms)
    for d in mu.densities:
        try:
            pos = d.abs_scale() * _abs_poly_exp_integral(
                d.power, d.rate.w + w, max(d.lo, 0.0), d.hi)
            neg = d.abs_scale() * _abs_poly_exp_integral(
                d.power, d.rate.w - w, d.lo, min(d.hi, 0.0))
        except AdmissibilityError:
            return _INF
        total += pos + neg
    return float(total)


def admissible_for(mu: QMeasure, omega: float, epsilon: float) -> AdmissibilityReport:
    """Exponential-moment test at rate ``omega + epsilon``, with margin.

    A density on an interval unbounded above needs ``Re(rate) < -(w+e)``;
    unbounded below needs ``Re(rate) > w+e``.  The margin is the distance
    to the failure boundary (``inf`` for atomic measures).
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    w = omega + epsilon
    margin = _INF
    for d in mu.densities:
        if math.isinf(d.hi):
            margin = min(margin, -(d.rate.w + w))
        if math.isinf(d.lo):
            margin = min(margin, d.rate.w - w)
    if margin <= 0.0:
        return AdmissibilityReport(ok=False, margin=margin, moment=None)
    return AdmissibilityReport(ok=True, margin=margin, moment=exp_moment(mu, w))


def strip_limit(mu: QMeasure) -> float:
    """Supremum of rates ``w`` with a finite exponential moment."""
    lim = _INF
    for d in mu.densities:
        if math.isinf(d.hi):
            lim = min(lim, -d.rate.w)
        if math.isinf(d.lo):
            lim = min(lim, d.rate.w)
    return lim


def _kernel_pattern(mu: QMeasure) -> Optional[Quaternion]:
    """Detect the kernel measures: -e^(tp) dt on [0,inf) or +e^(tp) dt on (-inf,0]."""
    if mu.atoms or len(mu.densities) != 1:
        return None
    d = mu.densities[0]
    if d.power != 0 or not _is_one(d.right):
        return None
    if (d.lo, d.hi) == (0.0, _INF) and d.coeff.isclose(-ONE, 1e-14):
        return d.rate
    if math.isinf(d.lo) and d.hi == 0.0 and d.coeff.isclose(ONE, 1e-14):
        return d.rate
    return None


def laplace_stieltjes(mu: QMeasure, s: Quaternion, tol: float = 1e-10,
                      method: str = "auto") -> Quaternion:
    """Right transform ``L(mu)(s)`` with the measure on the left.

    ``method='auto'`` takes the closed right-Cauchy-kernel form when the
    measure matches a kernel-measure pattern; ``'quadrature'`` forces the
    numeric route (used by tests to confront the two).  Evaluation outside
    the convergence strip of any density raises a domain error.
    """
    if method not in ("auto", "quadrature", "closed"):
        raise ValueError("method must be 'auto', 'quadrature' or 'closed'")
    if method != "quadrature":
        p = _kernel_pattern(mu)
        if p is not None:
            # the closed form continues past the strip; enforce convergence anyway
            _check_strip(mu, s)
            return cauchy_kernel_right(p, s)
        if method == "closed":
            raise UnsupportedMeasureError("measure does not match a closed-form pattern")
    _check_strip(mu, s)
    total = ZERO
    for a in mu.atoms:
        total = total + a.weight * qexp(s * (-a.t))
    for d in mu.densities:
        total = total + _density_transform(d, s, tol)
    return total


def _check_strip(mu: QMeasure, s: Quaternion, margin_min: float = 1e-9) -> None:
    for d in mu.densities:
        if math.isinf(d.hi) and s.w - d.rate.w <= margin_min:
            raise DomainError(
                f"Re(s) = {s.w:g} is outside the convergence strip of a density "
                f"(needs Re(s) > {d.rate.w:g})")
        if math.isinf(d.lo) and d.rate.w - s.w <= margin_min:
            raise DomainError(
                f"Re(s) = {s.w:g} is outside the convergence strip of a density "
                f"(needs Re(s) < {d.rate.w:g})")


def _density_transform(d: ExpDensity, s: Quaternion, tol: float) -> Quaternion:
    if math.isinf(d.hi):
        decay = s.w - d.rate.w
        t_hi = exp_tail_cut(d.abs_scale(), d.power, decay, 0.1 * tol, t_min=1.0)
    else:
        t_hi = d.hi
    if math.isinf(d.lo):
        decay = d.rate.w - s.w
        t_lo = -exp_tail_cut(d.abs_scale(), d.power, decay, 0.1 * tol, t_min=1.0)
    else:
        t_lo = d.lo

    def integrand(t: float) -> np.ndarray:
        return (d.weight_at(t) * qexp(s * (-t))).to_array()

    res = integrate_adaptive(integrand, t_lo, t_hi, tol=tol,
                             initial_points=dyadic_breakpoints(t_lo, t_hi))
    return Quaternion.from_array(res.value)


def derivative_measure(mu: QMeasure, n: int) -> QMeasure:
    """The measure with ``d(mu^n) = (-t)^n d(mu)``; its transform is the
    n-th slice derivative of the transform of ``mu``."""
    if n < 1:
        raise ValueError("derivative order must be >= 1")
    atoms = [Atom(a.t, a.weight * (-a.t) ** n) for a in mu.atoms]
    densities = [ExpDensity(d.coeff, d.rate, d.lo, d.hi, d.power + n, d.right)
                 for d in mu.densities]
    return QMeasure(atoms=atoms, densities=densities)


def kernel_measure(p: Quaternion, omega: float = 0.0) -> QMeasure:
    """The measure transforming to ``K_R(p, .)`` on the strip ``|Re(s)| < |Re(p)|``.

    ``Re(p) < -omega``: ``-e^(tp) dt`` on ``[0, inf)``;
    ``Re(p) > +omega``: ``+e^(tp) dt`` on ``(-inf, 0]``.
    """
    if p.w < -omega:
        return QMeasure(densities=[ExpDensity(-ONE, p, 0.0, _INF)])
    if p.w > omega:
        return QMeasure(densities=[ExpDensity(ONE, p, -_INF, 0.0)])
    raise DomainError(
        f"Re(p) = {p.w:g} lies inside the strip |Re| <= omega = {omega:g}")


def apply_linear_factor(alpha: float, mu: QMeasure) -> QMeasure:
    """The measure transforming to ``(alpha - s) * L(mu)(s)``.

    Integration by parts: ``s * [w(t) dt] = w(lo) delta_lo - w(hi) delta_hi
    + w'(t) dt`` (infinite endpoints drop by admissibility), so each
    density contributes boundary atoms plus rate- and power-shifted
    densities.  Requires a real-valued, purely density measure: pulling
    ``s`` through the weight needs the weight to commute with ``s``, and
    point masses would produce derivative-of-delta terms outside the
    catalog.
    """
    if mu.atoms:
        raise UnsupportedMeasureError(
            "linear polynomial factors are implemented for density measures only")
    if not mu.is_real(1e-14):
        raise UnsupportedMeasureError(
            "linear polynomial factors require a real-valued measure")
    atoms: list = []
    densities: list = []
    for d in mu.densities:
        # alpha * mu term
        densities.append(ExpDensity(d.coeff * alpha, d.rate, d.lo, d.hi, d.power, d.right))
        # minus s * mu term
        if not math.isinf(d.lo):
            atoms.append(Atom(d.lo, -d.weight_at(d.lo)))
        if not math.isinf(d.hi):
            atoms.append(Atom(d.hi, d.weight_at(d.hi)))
        # -(w') dt: w' = rate * w - power * [same weight with power-1]
        densities.append(ExpDensity(-(d.coeff * d.rate), d.rate, d.lo, d.hi, d.power, d.right))
        if d.power:
            densities.append(ExpDensity(d.coeff * d.power, d.rate, d.lo, d.hi,
                                        d.power - 1, d.right))
    return QMeasure(atoms=atoms, densities=densities)
