"""JSON interchange for the core value types.

Quaternions serialize as 4-element arrays ``[w, x, y, z]`` everywhere.
Matrices are ``{"n": n, "entries": [[[w,x,y,z], ...], ...]}``; measures are
``{"atoms": [{"t": t, "a": [...]}, ...], "densities": [{"c": [...],
"lambda": [...], "interval": [lo, hi]}, ...]}`` with ``null`` standing for
the infinite endpoint on its side.  Slice functions are tagged by "form";
stem functions carry arbitrary callables and intentionally have no wire
format.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .measures import Atom, ExpDensity, QMeasure
from .qlinalg import GroupEnvelope, QMatrix, SSpectrum
from .quaternion import Quaternion
from .slicefn import (ExpKernel, KernelPowerFunction, RightPolynomial,
                      SliceFunction, TransformFunction)

__all__ = [
    "quat_to_list", "quat_from_list",
    "matrix_to_dict", "matrix_from_dict",
    "measure_to_dict", "measure_from_dict",
    "slicefn_to_dict", "slicefn_from_dict",
    "spectrum_to_dict", "envelope_to_dict",
]


def quat_to_list(q: Quaternion) -> list:
    return [q.w, q.x, q.y, q.z]


def quat_from_list(data) -> Quaternion:
    if isinstance(data, (int, float)):
        return Quaternion(float(data))
    if len(data) != 4:
        raise ValueError("quaternion arrays carry exactly 4 components [w, x, y, z]")
    return Quaternion(*(float(v) for v in data))


def matrix_to_dict(A: QMatrix) -> dict:
    return {
        "n": A.rows,
        "entries": [[quat_to_list(A.entry(i, j)) for j in range(A.cols)]
                    for i in range(A.rows)],
    }


def matrix_from_dict(data: dict) -> QMatrix:
    entries = data["entries"]
    n = int(data.get("n", len(entries)))
    if len(entries) != n or any(len(row) != n for row in entries):
        raise ValueError("matrix entries must form an n x n grid")
    arr = np.array([[quat_from_list(e) .to_array() for e in row] for row in entries])
    return QMatrix(arr)


def _endpoint_to_json(v: float) -> Optional[float]:
    return None if math.isinf(v) else v


def _endpoint_from_json(v, sign: float) -> float:
    return sign * math.inf if v is None else float(v)


def measure_to_dict(mu: QMeasure) -> dict:
    out = {
        "atoms": [{"t": a.t, "a": quat_to_list(a.weight)} for a in mu.atoms],
        "densities": [],
    }
    for d in mu.densities:
        item = {
            "c": quat_to_list(d.coeff),
            "lambda": quat_to_list(d.rate),
            "interval": [_endpoint_to_json(d.lo), _endpoint_to_json(d.hi)],
        }
        if d.power:
            item["power"] = d.power
        if not (d.right.w == 1.0 and d.right.imag_norm() == 0.0):
            item["d"] = quat_to_list(d.right)
        out["densities"].append(item)
    return out


def measure_from_dict(data: dict) -> QMeasure:
    atoms = [Atom(float(a["t"]), quat_from_list(a["a"]))
             for a in data.get("atoms", ())]
    densities = []
    for d in data.get("densities", ()):
        lo = _endpoint_from_json(d["interval"][0], -1.0)
        hi = _endpoint_from_json(d["interval"][1], +1.0)
        densities.append(ExpDensity(
            coeff=quat_from_list(d["c"]),
            rate=quat_from_list(d["lambda"]),
            lo=lo, hi=hi,
            power=int(d.get("power") or 0),
            right=quat_from_list(d.get("d") or [1.0, 0.0, 0.0, 0.0]),
        ))
    return QMeasure(atoms=atoms, densities=densities)


def _domain_to_dict(domain) -> dict:
    if domain.kind == "strip":
        return {"kind": "strip", "c": _endpoint_to_json(domain.c)}
    if domain.kind == "ball":
        return {"kind": "ball", "radius": domain.radius}
    if domain.kind == "outside_spheres":
        return {"kind": "outside_spheres",
                "spheres": [{"x0": sp.x0, "x1": sp.x1} for sp in domain.spheres]}
    return {"kind": "whole"}


def slicefn_to_dict(f: SliceFunction) -> dict:
    # the domain field is informational: it is fully determined by the form
    # and is re-derived (not trusted) on parse
    if isinstance(f, RightPolynomial):
        return {"form": "right_polynomial",
                "coefficients": [quat_to_list(c) for c in f.coefficients],
                "domain": _domain_to_dict(f.domain)}
    if isinstance(f, KernelPowerFunction):
        return {"form": "kernel_power", "p": quat_to_list(f.p), "n": f.n,
                "domain": _domain_to_dict(f.domain)}
    if isinstance(f, ExpKernel):
        return {"form": "exp_kernel", "a": f.a, "domain": _domain_to_dict(f.domain)}
    if isinstance(f, TransformFunction):
        return {"form": "transform", "measure": measure_to_dict(f.measure),
                "domain": _domain_to_dict(f.domain)}
    raise ValueError(f"{type(f).__name__} has no JSON form")


def slicefn_from_dict(data: dict) -> SliceFunction:
    form = data["form"]
    if form == "right_polynomial":
        return RightPolynomial([quat_from_list(c) for c in data["coefficients"]])
    if form == "kernel_power":
        return KernelPowerFunction(quat_from_list(data["p"]), int(data.get("n", 1)))
    if form == "exp_kernel":
        return ExpKernel(float(data["a"]))
    if form == "transform":
        return TransformFunction(measure_from_dict(data["measure"]))
    raise ValueError(f"unknown slice function form {form!r}")


def spectrum_to_dict(spec: SSpectrum) -> dict:
    return {"spheres": [{"x0": sp.x0, "x1": sp.x1, "mult": m}
                        for sp, m in zip(spec.spheres, spec.multiplicities)]}


def envelope_to_dict(env: GroupEnvelope) -> dict:
    return {"M": env.M, "omega": env.omega, "t_max": env.t_max, "grid": env.grid}
