"""Quaternionic matrices as bounded right-linear operators.

A quaternionic n x n matrix acts on column vectors by matrix multiplication
from the left and commutes with quaternion scalar multiplication from the
right, so it is a right-linear operator on H^n.  Writing each entry as
``a1 + a2*e2`` with ``a1, a2`` in the complex slice of ``e1`` embeds the
matrix algebra into complex ``2n x 2n`` matrices:

    chi(A) = [[A1, A2], [-conj(A2), conj(A1)]]

The embedding is an isometric algebra homomorphism for the operator norm
(largest singular value of ``chi``), which makes it the natural backend for
inversion, eigenvalues and the matrix exponential, while direct Hamilton
arithmetic on the quaternion grid provides the independent cross-check.

The S-spectrum of ``T`` consists of the 2-spheres ``[s]`` on which
``T^2 - 2 Re(s) T + |s|^2`` is singular; the eigenvalues of ``chi(T)`` come
in conjugate pairs and each pair ``{x0 +/- i x1}`` contributes the sphere
``(x0, x1)``.  The right S-resolvent is

    S_R(s, T) = -(T - conj(s)) (T^2 - 2 Re(s) T + |s|^2)^(-1)

and for a group ``t -> exp(tT)`` with envelope ``|exp(tT)| <= M e^(w|t|)``
it equals the one-sided Laplace transforms of the group, which
``laplace_of_group`` realizes by certified quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import (CalcError, DomainError, RangeError,
                     SlowConvergenceError, SpectralProximityError)
from .quadrature import dyadic_breakpoints, exp_tail_cut, integrate_adaptive
from .quaternion import ONE, Quaternion, Sphere, decompose, qexp

__all__ = [
    "QMatrix",
    "unembed",
    "scalar_embed",
    "qmat_inverse",
    "SSpectrum",
    "s_spectrum",
    "pseudo_resolvent",
    "s_resolvent_right",
    "s_resolvent_right_power",
    "qexp_matrix",
    "laplace_of_group",
    "GroupEnvelope",
    "group_envelope",
    "HYBoundReport",
    "hy_bound_check",
    "basis_column",
]


def _ham(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Componentwise Hamilton product of broadcastable (..., 4) arrays."""
    aw, ax, ay, az = (a[..., i] for i in range(4))
    bw, bx, by, bz = (b[..., i] for i in range(4))
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


class QMatrix:
    """Immutable quaternionic matrix stored as a ``(rows, cols, 4)`` grid."""

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        arr = np.array(data, dtype=float)
        if arr.ndim != 3 or arr.shape[2] != 4:
            raise ValueError("QMatrix expects an array of shape (rows, cols, 4)")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("QMatrix is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Quaternion]]) -> "QMatrix":
        arr = np.array([[q.to_array() for q in row] for row in rows])
        return cls(arr)

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        arr = np.zeros((n, n, 4))
        arr[np.arange(n), np.arange(n), 0] = 1.0
        return cls(arr)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QMatrix":
        return cls(np.zeros((rows, cols, 4)))

    @classmethod
    def diag(cls, entries: Sequence[Quaternion]) -> "QMatrix":
        n = len(entries)
        arr = np.zeros((n, n, 4))
        for i, q in enumerate(entries):
            arr[i, i] = q.to_array()
        return cls(arr)

    # -- shape / access ------------------------------------------------------

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def n(self) -> int:
        if self.rows != self.cols:
            raise ValueError("matrix is not square")
        return self.rows

    def entry(self, i: int, j: int) -> Quaternion:
        return Quaternion.from_array(self.data[i, j])

    def column(self, j: int) -> "QMatrix":
        return QMatrix(self.data[:, j:j + 1, :])

    # -- algebra -------------------------------------------------------------

    def __add__(self, other: "QMatrix") -> "QMatrix":
        return QMatrix(self.data + other.data)

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        return QMatrix(self.data - other.data)

    def __neg__(self) -> "QMatrix":
        return QMatrix(-self.data)

    def __mul__(self, scalar) -> "QMatrix":
        if isinstance(scalar, (int, float)):
            return QMatrix(self.data * float(scalar))
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.rows:
            raise ValueError("matrix shape mismatch")
        prod = _ham(self.data[:, :, None, :], other.data[None, :, :, :])
        return QMatrix(prod.sum(axis=1))

    def left_mul(self, q: Quaternion) -> "QMatrix":
        """Scalar multiplication ``q * A`` (entrywise from the left)."""
        return QMatrix(_ham(q.to_array()[None, None, :], self.data))

    def right_mul(self, q: Quaternion) -> "QMatrix":
        """Scalar multiplication ``A * q`` (entrywise from the right)."""
        return QMatrix(_ham(self.data, q.to_array()[None, None, :]))

    def power(self, k: int) -> "QMatrix":
        if k < 0:
            return qmat_inverse(self).power(-k)
        out = QMatrix.identity(self.rows)
        for _ in range(k):
            out = out @ self
        return out

    def conj_transpose(self) -> "QMatrix":
        arr = self.data.transpose(1, 0, 2).copy()
        arr[:, :, 1:] *= -1.0
        return QMatrix(arr)

    # -- embedding and norms ---------------------------------------------------

    def embed(self) -> np.ndarray:
        """Complex-adjoint embedding ``chi(A)`` of shape ``(2r, 2c)``."""
        a1 = self.data[..., 0] + 1j * self.data[..., 1]
        a2 = self.data[..., 2] + 1j * self.data[..., 3]
        return np.block([[a1, a2], [-a2.conj(), a1.conj()]])

    def norm(self) -> float:
        """Operator norm: largest singular value of the embedding."""
        return float(np.linalg.svd(self.embed(), compute_uv=False)[0])

    def frobenius(self) -> float:
        return float(np.sqrt(np.sum(np.square(self.data))))

    def isclose(self, other: "QMatrix", atol: float = 1e-12) -> bool:
        return (self - other).norm() <= atol

    def __repr__(self):
        return f"QMatrix({self.rows}x{self.cols})"


def unembed(Z: np.ndarray, structure_tol: float = 1e-8) -> QMatrix:
    """Invert the complex-adjoint embedding.

    Rejects matrices outside the embedded algebra: the lower blocks must be
    ``-conj`` / ``conj`` mirrors of the upper ones (up to ``structure_tol``
    relative to the matrix scale).  Averaging the mirrored blocks removes
    roundoff drift from complex-side computations such as ``expm``.
    """
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim != 2 or Z.shape[0] % 2 or Z.shape[1] % 2:
        raise ValueError("embedded matrix must have even dimensions")
    r, c = Z.shape[0] // 2, Z.shape[1] // 2
    z11, z12 = Z[:r, :c], Z[:r, c:]
    z21, z22 = Z[r:, :c], Z[r:, c:]
    scale = 1.0 + float(np.max(np.abs(Z)))
    drift = max(float(np.max(np.abs(z21 + z12.conj()))),
                float(np.max(np.abs(z22 - z11.conj()))))
    if drift > structure_tol * scale:
        raise ValueError(
            f"matrix is not in the image of the embedding (structure drift {drift:.3e})")
    a1 = 0.5 * (z11 + z22.conj())
    a2 = 0.5 * (z12 - z21.conj())
    return QMatrix(np.stack([a1.real, a1.imag, a2.real, a2.imag], axis=-1))


def scalar_embed(q: Quaternion, n: int) -> np.ndarray:
    """Embedding of the scalar matrix ``q * I_n``."""
    a1 = q.w + 1j * q.x
    a2 = q.y + 1j * q.z
    eye = np.eye(n)
    return np.block([[a1 * eye, a2 * eye], [-np.conj(a2) * eye, np.conj(a1) * eye]])


def basis_column(n: int, j: int) -> QMatrix:
    arr = np.zeros((n, 1, 4))
    arr[j, 0, 0] = 1.0
    return QMatrix(arr)


def qmat_inverse(A: QMatrix, residual_factor: float = 100.0) -> QMatrix:
    """Inverse through the embedding, with a condition-scaled residual check."""
    Z = A.embed()
    sv = np.linalg.svd(Z, compute_uv=False)
    smin = float(sv[-1])
    if smin <= np.finfo(float).eps * sv[0] * Z.shape[0]:
        raise DomainError(f"matrix is numerically singular (smallest singular value {smin:.3e})")
    inv = unembed(np.linalg.inv(Z))
    cond = float(sv[0] / smin)
    residual = (A @ inv - QMatrix.identity(A.n)).norm()
    if residual > residual_factor * np.finfo(float).eps * max(cond, 1.0):
        raise CalcError(
            f"inverse residual {residual:.3e} exceeds the condition-scaled bound (cond {cond:.3e})")
    return inv


# -- S-spectrum --------------------------------------------------------------


@dataclass(frozen=True)
class SSpectrum:
    """Axially symmetric spectrum: spheres with multiplicities summing to n."""

    spheres: tuple
    multiplicities: tuple

    def distance(self, s: Quaternion) -> float:
        """Distance from the sphere ``[s]`` to the nearest spectral sphere."""
        s0, s1, _ = decompose(s)
        return min(math.hypot(s0 - sp.x0, s1 - sp.x1) for sp in self.spheres)

    def max_abs_real(self) -> float:
        return max(abs(sp.x0) for sp in self.spheres)

    def max_modulus(self) -> float:
        return max(sp.modulus() for sp in self.spheres)


def s_spectrum(T: QMatrix, cluster_tol: Optional[float] = None) -> SSpectrum:
    """S-spectrum from the conjugate-paired eigenvalues of the embedding."""
    n = T.n
    if cluster_tol is None:
        cluster_tol = 1e-7 * (1.0 + T.norm())
    eigs = np.linalg.eigvals(T.embed())
    reps = sorted((float(ev.real), abs(float(ev.imag))) for ev in eigs)
    # each sphere point appears once per conjugate-pair member; greedy
    # nearest-neighbor matching is robust to roundoff reordering
    used = [False] * len(reps)
    paired = []
    for i in range(len(reps)):
        if used[i]:
            continue
        used[i] = True
        best, best_d = -1, math.inf
        for j in range(i + 1, len(reps)):
            if used[j]:
                continue
            d = math.hypot(reps[i][0] - reps[j][0], reps[i][1] - reps[j][1])
            if d < best_d:
                best, best_d = j, d
        if best < 0 or best_d > 2.0 * cluster_tol:
            raise CalcError("embedding eigenvalues failed to pair into conjugates")
        used[best] = True
        paired.append(((reps[i][0] + reps[best][0]) / 2.0,
                       (reps[i][1] + reps[best][1]) / 2.0))
    spheres: list = []
    mults: list = []
    for x0, x1 in sorted(paired):
        for idx, sp in enumerate(spheres):
            if math.hypot(x0 - sp.x0, x1 - sp.x1) <= cluster_tol:
                mults[idx] += 1
                break
        else:
            spheres.append(Sphere(x0, max(x1, 0.0)))
            mults.append(1)
    if sum(mults) != n:
        raise CalcError("spectral multiplicities do not sum to the dimension")
    return SSpectrum(tuple(spheres), tuple(mults))


def _require_off_spectrum(s: Quaternion, T: QMatrix,
                          spectrum: Optional[SSpectrum], min_margin: Optional[float]):
    spec = spectrum if spectrum is not None else s_spectrum(T)
    margin = min_margin if min_margin is not None else 1e-8 * (1.0 + T.norm())
    dist = spec.distance(s)
    if dist <= margin:
        raise SpectralProximityError(
            f"s is within {dist:.3e} of the S-spectrum (required margin {margin:.3e})",
            distance=dist)
    return spec


def pseudo_resolvent(s: Quaternion, T: QMatrix, spectrum: Optional[SSpectrum] = None,
                     min_margin: Optional[float] = None) -> QMatrix:
    """``(T^2 - 2 Re(s) T + |s|^2)^(-1)`` with a spectral-distance guard."""
    _require_off_spectrum(s, T, spectrum, min_margin)
    n = T.n
    R = T @ T - (T * (2.0 * s.w)) + QMatrix.identity(n) * s.norm_sq()
    return qmat_inverse(R)


def s_resolvent_right(s: Quaternion, T: QMatrix, spectrum: Optional[SSpectrum] = None) -> QMatrix:
    """Right S-resolvent ``-(T - conj(s)) (T^2 - 2 Re(s) T + |s|^2)^(-1)``."""
    P = pseudo_resolvent(s, T, spectrum=spectrum)
    num = T - QMatrix.identity(T.n).left_mul(s.conjugate())
    return -(num @ P)


def s_resolvent_right_power(n_power: int, s: Quaternion, T: QMatrix,
                            spectrum: Optional[SSpectrum] = None) -> QMatrix:
    """n-th resolvent power, binomial form with the conjugate in the scalar slot.

    ``sum_k C(n,k) conj(s)^(n-k) (-T)^k (T^2 - 2 Re(s) T + |s|^2)^(-n)``;
    reduces to ``(a - T)^(-n)`` for real ``a`` and matches the
    finite-difference derivative of the resolvent (both are tested).
    """
    if n_power < 1:
        raise ValueError("resolvent power requires n >= 1")
    P = pseudo_resolvent(s, T, spectrum=spectrum)
    dim = T.n
    sc = s.conjugate()
    sc_pows = [ONE]
    for _ in range(n_power):
        sc_pows.append(sc_pows[-1] * sc)
    mT_pows = [QMatrix.identity(dim)]
    for _ in range(n_power):
        mT_pows.append(mT_pows[-1] @ (-T))
    total = QMatrix.zeros(dim, dim)
    for k in range(n_power + 1):
        total = total + mT_pows[k].left_mul(sc_pows[n_power - k] * comb(n_power, k))
    return total @ P.power(n_power)


# -- exponential and group ----------------------------------------------------


def qexp_matrix(T: QMatrix, t: float = 1.0, overflow_cap: float = 700.0) -> QMatrix:
    """``exp(tT)`` via scaling-and-squaring Pade on the embedding."""
    if abs(t) * T.norm() > overflow_cap:
        raise RangeError(f"|t|*|T| = {abs(t) * T.norm():.3e} exceeds the overflow cap")
    return unembed(scipy.linalg.expm(t * T.embed()))


@dataclass(frozen=True)
class GroupEnvelope:
    """Certified exponential envelope ``|exp(tT)| <= M e^(omega |t|)`` on a grid."""

    M: float
    omega: float
    t_max: float
    grid: int


def group_envelope(T: QMatrix, t_max: float = 5.0, grid: int = 201,
                   slack: float = 1e-9) -> GroupEnvelope:
    """Envelope with ``omega`` from the spectral real parts plus ``slack``.

    ``M`` is the grid maximum of ``|exp(tT)| e^(-omega |t|)`` over
    ``[-t_max, t_max]``; the envelope inequality holds on the grid by
    construction and is re-checked by the acceptance suite.
    """
    spec = s_spectrum(T)
    omega = spec.max_abs_real() + slack
    Z = T.embed()
    M = 0.0
    for t in np.linspace(-t_max, t_max, grid):
        nrm = float(np.linalg.svd(scipy.linalg.expm(t * Z), compute_uv=False)[0])
        M = max(M, nrm * math.exp(-omega * abs(t)))
    return GroupEnvelope(M=M, omega=omega, t_max=t_max, grid=grid)


def laplace_of_group(s: Quaternion, T: QMatrix, side: str = "auto",
                     tol: float = 1e-9, envelope: Optional[GroupEnvelope] = None,
                     min_margin: float = 1e-3) -> QMatrix:
    """One-sided Laplace transform of the group, equal to the S-resolvent.

    Positive side (``Re(s) > omega``): ``int_0^inf e^(-ts) exp(tT) dt``.
    Negative side (``Re(s) < -omega``): ``-int_{-inf}^0 e^(-ts) exp(tT) dt``.
    The quadrature is truncated where the envelope certifies the tail below
    a tenth of ``tol``; the scalar ``e^(-ts)`` multiplies from the left.
    """
    env = envelope if envelope is not None else group_envelope(T)
    if side == "auto":
        side = "positive" if s.w > 0 else "negative"
    if side == "positive":
        margin = s.w - env.omega
    elif side == "negative":
        margin = -s.w - env.omega
    else:
        raise ValueError("side must be 'auto', 'positive' or 'negative'")
    if margin <= 0:
        raise DomainError(
            f"Re(s) = {s.w:g} does not clear the envelope rate omega = {env.omega:g} "
            f"on the {side} side")
    if margin < min_margin:
        raise SlowConvergenceError(
            f"margin {margin:.3e} below threshold {min_margin:g}: "
            "the Laplace integral converges too slowly")
    t_star = exp_tail_cut(env.M, 0, margin, 0.1 * tol)
    tail = env.M * math.exp(-margin * t_star) / margin
    n = T.n
    Z = T.embed()

    def integrand(t: float) -> np.ndarray:
        G = scipy.linalg.expm(t * Z)
        val = scalar_embed(qexp(s * (-t)), n) @ G
        return np.stack([val.real, val.imag], axis=-1)

    if side == "positive":
        res = integrate_adaptive(integrand, 0.0, t_star, tol=tol,
                                 initial_points=dyadic_breakpoints(0.0, t_star))
        value = res.value
    else:
        res = integrate_adaptive(integrand, -t_star, 0.0, tol=tol,
                                 initial_points=dyadic_breakpoints(-t_star, 0.0))
        value = -res.value
    if res.error + tail > 10.0 * tol:
        raise SlowConvergenceError(
            f"Laplace quadrature error {res.error + tail:.3e} exceeds tolerance budget")
    return unembed(value[..., 0] + 1j * value[..., 1], structure_tol=1e-6)


@dataclass(frozen=True)
class HYBoundReport:
    """Resolvent-power bound check ``|S_R(s0,T)^n| (|s0|-omega)^n <= M``."""

    M: float
    omega: float
    max_ratio: float
    passed: bool
    rows: tuple  # (s0, n, norm, ratio)


def hy_bound_check(T: QMatrix, s0_samples: Iterable[float], n_max: int = 4,
                   envelope: Optional[GroupEnvelope] = None,
                   rel_slack: float = 1e-6) -> HYBoundReport:
    """Check the generation bound for real points on both sides of the spectrum."""
    env = envelope if envelope is not None else group_envelope(T)
    spec = s_spectrum(T)
    rows = []
    max_ratio = 0.0
    for s0 in s0_samples:
        if abs(s0) <= env.omega:
            raise DomainError(f"sample s0 = {s0:g} violates |s0| > omega = {env.omega:g}")
        R = s_resolvent_right(Quaternion(float(s0)), T, spectrum=spec)
        Rn = QMatrix.identity(T.n)
        for n_pow in range(1, n_max + 1):
            Rn = Rn @ R
            nrm = Rn.norm()
            ratio = nrm * (abs(s0) - env.omega) ** n_pow
            rows.append((float(s0), n_pow, nrm, ratio))
            max_ratio = max(max_ratio, ratio)
    passed = max_ratio <= env.M * (1.0 + rel_slack)
    return HYBoundReport(M=env.M, omega=env.omega, max_ratio=max_ratio,
                         passed=passed, rows=tuple(rows))
