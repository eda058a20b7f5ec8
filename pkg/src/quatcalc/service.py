"""FastAPI service wrapping the calculus package.

Every endpoint is stateless compute: JSON in, JSON out.  Precondition
violations from the core (points on singular spheres, inadmissible
measures, strip parameter errors) map to HTTP 400 with the violated
condition named; numeric disagreements are NOT transport errors - they
come back as ``passed: false`` in the payload so batch callers can
aggregate them.

Run with ``uvicorn quatcalc.service:app``; the bundled CLI talks to the
same app in-process, so no server is needed for batch use.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from . import serialize
from .calculus import (CalcProblem, compare_calculi, f_of_T_group,
                       inverting_sequence_run, s_calc_bounded, strip_f_of_T)
from .errors import CalcError, DomainError, QuadratureError
from .measures import QMeasure
from .qlinalg import (QMatrix, basis_column, group_envelope, hy_bound_check,
                      laplace_of_group, qexp_matrix, s_resolvent_right,
                      s_resolvent_right_power, s_spectrum)
from .quaternion import E1, Quaternion, unit_imaginary
from .schemas import (CalcRequest, CommandModel, CommandResult, CompareRequest,
                      CompareResponse, ExpGroupRequest, ExpGroupResponse,
                      InvertRequest, InvertResponse, MatrixResponse,
                      ResolventRequest, RunConfigModel, RunResponse,
                      SpectrumRequest, SpectrumResponse)
from .selftest import run_selftest
from .slicefn import TransformFunction

app = FastAPI(
    title="quatcalc",
    description="Functional calculus for quaternionic matrices: S-spectrum, "
                "S-resolvents, group calculus, contour calculus, inversion.",
    version="0.1.0",
)


@app.exception_handler(DomainError)
async def _domain_error(request: Request, exc: DomainError):
    return JSONResponse(status_code=400,
                        content={"error": type(exc).__name__, "detail": str(exc)})


@app.exception_handler(CalcError)
async def _calc_error(request: Request, exc: CalcError):
    return JSONResponse(status_code=400,
                        content={"error": type(exc).__name__, "detail": str(exc)})


def _matrix(model) -> QMatrix:
    return serialize.matrix_from_dict(model.model_dump())


def _measure(model) -> QMeasure:
    return serialize.measure_from_dict(model.model_dump(by_alias=True))


def _slice_unit(q) -> Quaternion:
    if q is None:
        return E1
    return unit_imaginary(serialize.quat_from_list(q))


@app.get("/health")
def health():
    return {"status": "ok", "version": app.version}


@app.post("/spectrum", response_model=SpectrumResponse)
def spectrum(req: SpectrumRequest):
    T = _matrix(req.operator)
    spec = s_spectrum(T)
    return SpectrumResponse(
        spheres=[{"x0": sp.x0, "x1": sp.x1, "mult": m}
                 for sp, m in zip(spec.spheres, spec.multiplicities)],
        norm=T.norm())


@app.post("/resolvent", response_model=MatrixResponse)
def resolvent(req: ResolventRequest):
    T = _matrix(req.operator)
    s = serialize.quat_from_list(req.s)
    if req.method == "laplace":
        if req.n != 1:
            raise DomainError("the Laplace route computes the first resolvent power only")
        value = laplace_of_group(s, T, side=req.side, tol=req.tol)
    elif req.n == 1:
        value = s_resolvent_right(s, T)
    else:
        value = s_resolvent_right_power(req.n, s, T)
    return MatrixResponse(value=serialize.matrix_to_dict(value),
                          provenance={"method": req.method, "n": req.n,
                                      "tol": req.tol})


@app.post("/expgroup", response_model=ExpGroupResponse)
def expgroup(req: ExpGroupRequest):
    T = _matrix(req.operator)
    env = group_envelope(T, t_max=req.t_max, grid=req.grid)
    samples = []
    for t in np.linspace(-req.t_max, req.t_max, req.grid):
        nrm = qexp_matrix(T, float(t)).norm()
        samples.append({"t": float(t), "norm": nrm,
                        "bound": env.M * math.exp(env.omega * abs(t))})
    hy_payload = None
    passed = all(s["norm"] <= s["bound"] * (1.0 + 1e-12) for s in samples)
    if req.hy_samples:
        hy = hy_bound_check(T, req.hy_samples, n_max=req.n_max, envelope=env)
        hy_payload = {"max_ratio": hy.max_ratio, "passed": hy.passed,
                      "rows": [{"s0": r[0], "n": r[1], "norm": r[2], "ratio": r[3]}
                               for r in hy.rows]}
        passed = passed and hy.passed
    return ExpGroupResponse(M=env.M, omega=env.omega, samples=samples,
                            hy=hy_payload, passed=passed)


def _build_problem(T: QMatrix, measure: QMeasure, tol: float) -> CalcProblem:
    return CalcProblem(T=T, measure=measure, tol=tol)


@app.post("/calc", response_model=MatrixResponse)
def calc(req: CalcRequest):
    T = _matrix(req.operator)
    if req.measure is None and req.function is None:
        raise DomainError("calc needs a measure or a function")
    unit = _slice_unit(req.slice)
    if req.route == "group":
        if req.measure is None:
            raise DomainError("the group route is defined by a measure")
        prob = _build_problem(T, _measure(req.measure), req.tol)
        value = f_of_T_group(prob)
    elif req.route == "strip":
        if req.measure is None:
            raise DomainError("the strip route needs a measure-backed function")
        if req.alpha is None or req.c is None:
            raise DomainError("the strip route needs alpha and c with omega < c < |alpha|")
        prob = _build_problem(T, _measure(req.measure), req.tol)
        prob.unit = unit
        cols = [strip_f_of_T(prob, req.alpha, req.c, basis_column(T.n, j), tol=req.tol)
                for j in range(T.n)]
        value = QMatrix(np.concatenate([c.data for c in cols], axis=1))
    else:
        if req.radius is None:
            raise DomainError("the circle route needs a contour radius")
        if req.function is not None:
            f = serialize.slicefn_from_dict(req.function.model_dump(by_alias=True,
                                                                    exclude_none=True))
        elif req.measure is not None:
            f = TransformFunction(_measure(req.measure))
        else:
            raise DomainError("the circle route needs a function or a measure")
        value = s_calc_bounded(f, T, req.radius, unit=unit, tol=req.tol)
    return MatrixResponse(value=serialize.matrix_to_dict(value),
                          provenance={"route": req.route, "tol": req.tol,
                                      "alpha": req.alpha, "c": req.c,
                                      "radius": req.radius})


@app.post("/compare", response_model=CompareResponse)
def compare(req: CompareRequest):
    T = _matrix(req.operator)
    prob = _build_problem(T, _measure(req.measure), req.strip_tol)
    prob.unit = _slice_unit(req.slice)
    rep = compare_calculi(prob, alpha=req.alpha, c=req.c, radius=req.radius,
                          strip_tol=req.strip_tol)
    routes = {"group": serialize.matrix_to_dict(rep.value_group),
              "strip": serialize.matrix_to_dict(rep.value_strip)}
    if rep.value_circle is not None:
        routes["circle"] = serialize.matrix_to_dict(rep.value_circle)
    if rep.value_closed is not None:
        routes["closed"] = serialize.matrix_to_dict(rep.value_closed)
    return CompareResponse(routes=routes, residuals=rep.residuals,
                           error_estimates=rep.error_estimates,
                           skipped=rep.skipped, max_residual=rep.max_residual(),
                           passed=rep.max_residual() <= req.pass_tol,
                           provenance=rep.settings)


@app.post("/invert", response_model=InvertResponse)
def invert(req: InvertRequest):
    T = _matrix(req.operator)
    prob = _build_problem(T, _measure(req.measure), 1e-10)
    worst_rows = {}
    warnings: list = []
    passed = True
    for j in range(T.n):
        rec = inverting_sequence_run(req.polynomials, prob, basis_column(T.n, j),
                                     tol=req.tol)
        passed = passed and rec.passed
        warnings.extend(rec.warnings)
        for (idx, residual, bound_max, conv_max, op_norm) in rec.rows:
            row = worst_rows.setdefault(idx, {"n": float(idx), "residual": 0.0,
                                              "bound_sample_max": 0.0,
                                              "conv_sample_max": 0.0,
                                              "op_norm": 0.0})
            row["residual"] = max(row["residual"], residual)
            row["bound_sample_max"] = max(row["bound_sample_max"], bound_max)
            row["conv_sample_max"] = max(row["conv_sample_max"], conv_max)
            row["op_norm"] = max(row["op_norm"], op_norm)
    return InvertResponse(rows=[worst_rows[k] for k in sorted(worst_rows)],
                          passed=passed, warnings=sorted(set(warnings)))


@app.get("/selftest")
def selftest(seed: int = Query(default=0)):
    return run_selftest(seed=seed)


# -- batch engine -----------------------------------------------------------


def _execute_command(index: int, cmd: CommandModel, cfg: RunConfigModel) -> CommandResult:
    try:
        return _dispatch_command(index, cmd, cfg)
    except (DomainError, ValueError) as exc:
        return CommandResult(command=cmd.command, index=index,
                             status="validation_error", passed=False,
                             error=f"{type(exc).__name__}: {exc}")
    except QuadratureError as exc:
        return CommandResult(command=cmd.command, index=index,
                             status="numeric_failure", passed=False,
                             error=f"{type(exc).__name__}: {exc}")


def _named_measure_model(cmd: CommandModel, cfg: RunConfigModel):
    if cmd.measure is None:
        raise DomainError(f"command '{cmd.command}' needs a measure reference")
    if cmd.measure not in cfg.measures:
        raise DomainError(f"measure {cmd.measure!r} is not defined in the config")
    return cfg.measures[cmd.measure]


def _named_function_model(cmd: CommandModel, cfg: RunConfigModel):
    if cmd.function not in cfg.functions:
        raise DomainError(f"function {cmd.function!r} is not defined in the config")
    return cfg.functions[cmd.function]


def _config_operator(cfg: RunConfigModel) -> QMatrix:
    if cfg.operator is None:
        raise DomainError("the config defines no operator")
    return _matrix(cfg.operator)


def _dispatch_command(index: int, cmd: CommandModel, cfg: RunConfigModel) -> CommandResult:
    prov = {"tol": cmd.tol, "alpha": cmd.alpha, "c": cmd.c, "radius": cmd.radius}
    if cmd.command == "spectrum":
        T = _config_operator(cfg)
        spec = s_spectrum(T)
        payload = serialize.spectrum_to_dict(spec)
        payload["norm"] = T.norm()
        return CommandResult(command="spectrum", index=index, status="ok",
                             passed=True, result=payload, provenance=prov)
    if cmd.command == "resolvent":
        T = _config_operator(cfg)
        if cmd.s is None:
            raise DomainError("resolvent command needs the point s")
        s = serialize.quat_from_list(cmd.s)
        tol = cmd.tol or 1e-9
        if cmd.method == "laplace":
            value = laplace_of_group(s, T, side=cmd.side, tol=tol)
        elif cmd.n == 1:
            value = s_resolvent_right(s, T)
        else:
            value = s_resolvent_right_power(cmd.n, s, T)
        return CommandResult(command="resolvent", index=index, status="ok",
                             passed=True,
                             result={"value": serialize.matrix_to_dict(value)},
                             provenance={**prov, "method": cmd.method, "n": cmd.n})
    if cmd.command == "expgroup":
        T = _config_operator(cfg)
        resp = expgroup(ExpGroupRequest(operator=cfg.operator, t_max=cmd.t_max,
                                        grid=cmd.grid, hy_samples=cmd.hy_samples,
                                        n_max=cmd.n_max))
        csv = {"name": "expgroup", "header": ["t", "norm", "bound"],
               "rows": [[s["t"], s["norm"], s["bound"]] for s in resp.samples]}
        return CommandResult(command="expgroup", index=index, status="ok",
                             passed=resp.passed,
                             result=resp.model_dump(), csv=csv, provenance=prov)
    if cmd.command == "calc":
        T = _config_operator(cfg)
        fn_model = _named_function_model(cmd, cfg) if cmd.function else None
        measure_model = _named_measure_model(cmd, cfg) if cmd.measure else None
        resp = calc(CalcRequest(operator=cfg.operator, measure=measure_model,
                                function=fn_model, route=cmd.route,
                                alpha=cmd.alpha, c=cmd.c, radius=cmd.radius,
                                slice=cmd.slice, tol=cmd.tol or 1e-8))
        return CommandResult(command="calc", index=index, status="ok", passed=True,
                             result=resp.model_dump(), provenance=resp.provenance)
    if cmd.command == "compare":
        T = _config_operator(cfg)
        measure_model = _named_measure_model(cmd, cfg)
        if cmd.alpha is None or cmd.c is None:
            raise DomainError("compare needs alpha and c with omega < c < |alpha|")
        resp = compare(CompareRequest(operator=cfg.operator, measure=measure_model,
                                      alpha=cmd.alpha, c=cmd.c, radius=cmd.radius,
                                      slice=cmd.slice,
                                      strip_tol=cmd.tol or 1e-7,
                                      pass_tol=cmd.pass_tol))
        csv = {"name": "compare", "header": ["route_pair", "residual"],
               "rows": [[k, v] for k, v in sorted(resp.residuals.items())]}
        status = "ok" if resp.passed else "numeric_failure"
        return CommandResult(command="compare", index=index, status=status,
                             passed=resp.passed, result=resp.model_dump(),
                             csv=csv, provenance=resp.provenance)
    if cmd.command == "invert":
        T = _config_operator(cfg)
        measure_model = _named_measure_model(cmd, cfg)
        if not cmd.polynomials:
            raise DomainError("invert needs a polynomial sequence")
        resp = invert(InvertRequest(operator=cfg.operator, measure=measure_model,
                                    polynomials=cmd.polynomials,
                                    tol=cmd.tol or 1e-7))
        csv = {"name": "invert",
               "header": ["n", "residual", "bound_sample_max", "conv_sample_max",
                          "op_norm"],
               "rows": [[r["n"], r["residual"], r["bound_sample_max"],
                         r["conv_sample_max"], r["op_norm"]] for r in resp.rows]}
        status = "ok" if resp.passed else "numeric_failure"
        return CommandResult(command="invert", index=index, status=status,
                             passed=resp.passed, result=resp.model_dump(),
                             csv=csv, provenance=prov)
    if cmd.command == "selftest":
        report = run_selftest(seed=cfg.seed)
        csv = {"name": "selftest", "header": ["id", "name", "passed", "observed",
                                              "tolerance"],
               "rows": [[r["id"], r["name"], int(r["passed"]), r["observed"],
                         r["tolerance"]] for r in report["criteria"]]}
        status = "ok" if report["passed"] else "numeric_failure"
        return CommandResult(command="selftest", index=index, status=status,
                             passed=report["passed"], result=report, csv=csv,
                             provenance={"seed": cfg.seed})
    raise DomainError(f"unknown command {cmd.command!r}")


@app.post("/run", response_model=RunResponse)
def run(cfg: RunConfigModel, only: Optional[str] = Query(default=None)):
    """Execute the config's command list in order (optionally one verb only)."""
    results = []
    for index, cmd in enumerate(cfg.commands):
        if only is not None and cmd.command != only:
            continue
        results.append(_execute_command(index, cmd, cfg))
    summary = {
        "commands": len(results),
        "passed": all(r.passed for r in results),
        "validation_errors": sum(1 for r in results if r.status == "validation_error"),
        "numeric_failures": sum(1 for r in results if r.status == "numeric_failure"),
    }
    return RunResponse(results=results, summary=summary)
