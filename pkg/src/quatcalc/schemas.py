"""Pydantic request/response models for the HTTP service.

Wire conventions follow the package's JSON interchange: quaternions are
4-element arrays ``[w, x, y, z]``, matrices ``{"n", "entries"}``, measures
``{"atoms", "densities"}`` with ``null`` interval endpoints meaning the
infinity on that side.
"""
from __future__ import annotations

from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

Quat = Annotated[List[float], Field(min_length=4, max_length=4)]


class MatrixModel(BaseModel):
    n: int
    entries: List[List[Quat]]

    model_config = {
        "json_schema_extra": {
            "examples": [{"n": 1, "entries": [[[0.0, 1.0, 0.0, 0.0]]]}],
        }
    }


class AtomModel(BaseModel):
    t: float
    a: Quat


class DensityModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    c: Quat
    rate: Quat = Field(alias="lambda")
    interval: Tuple[Optional[float], Optional[float]]
    power: int = 0
    d: Optional[Quat] = None


class MeasureModel(BaseModel):
    atoms: List[AtomModel] = []
    densities: List[DensityModel] = []


class FunctionModel(BaseModel):
    form: Literal["right_polynomial", "kernel_power", "exp_kernel", "transform"]
    coefficients: Optional[List[Quat]] = None
    p: Optional[Quat] = None
    n: int = 1
    a: Optional[float] = None
    measure: Optional[MeasureModel] = None


class SphereModel(BaseModel):
    x0: float
    x1: float
    mult: int


class SpectrumRequest(BaseModel):
    operator: MatrixModel


class SpectrumResponse(BaseModel):
    spheres: List[SphereModel]
    norm: float


class ResolventRequest(BaseModel):
    operator: MatrixModel
    s: Quat
    n: int = 1
    method: Literal["closed", "laplace"] = "closed"
    side: Literal["auto", "positive", "negative"] = "auto"
    tol: float = 1e-9


class MatrixResponse(BaseModel):
    value: MatrixModel
    provenance: Dict[str, Any] = {}


class ExpGroupRequest(BaseModel):
    operator: MatrixModel
    t_max: float = 5.0
    grid: int = 201
    hy_samples: Optional[List[float]] = None
    n_max: int = 4


class ExpGroupResponse(BaseModel):
    M: float
    omega: float
    samples: List[Dict[str, float]]
    hy: Optional[Dict[str, Any]] = None
    passed: bool


class CalcRequest(BaseModel):
    operator: MatrixModel
    measure: Optional[MeasureModel] = None
    function: Optional[FunctionModel] = None
    route: Literal["group", "strip", "circle"] = "group"
    alpha: Optional[float] = None
    c: Optional[float] = None
    radius: Optional[float] = None
    slice: Optional[Quat] = None
    tol: float = 1e-8


class CompareRequest(BaseModel):
    operator: MatrixModel
    measure: MeasureModel
    alpha: float
    c: float
    radius: Optional[float] = None
    slice: Optional[Quat] = None
    strip_tol: float = 1e-7
    pass_tol: float = 1e-6


class CompareResponse(BaseModel):
    routes: Dict[str, MatrixModel]
    residuals: Dict[str, float]
    error_estimates: Dict[str, float]
    skipped: Dict[str, str]
    max_residual: float
    passed: bool
    provenance: Dict[str, Any] = {}


class InvertRequest(BaseModel):
    operator: MatrixModel
    measure: MeasureModel
    polynomials: List[List[float]]
    tol: float = 1e-7


class InvertResponse(BaseModel):
    rows: List[Dict[str, float]]
    passed: bool
    warnings: List[str] = []


class CommandModel(BaseModel):
    """One batch command; unused fields are ignored by the other verbs."""

    command: Literal["spectrum", "resolvent", "expgroup", "calc", "compare",
                     "invert", "selftest"]
    measure: Optional[str] = None
    function: Optional[str] = None
    s: Optional[Quat] = None
    n: int = 1
    method: Literal["closed", "laplace"] = "closed"
    side: Literal["auto", "positive", "negative"] = "auto"
    route: Literal["group", "strip", "circle"] = "group"
    alpha: Optional[float] = None
    c: Optional[float] = None
    radius: Optional[float] = None
    slice: Optional[Quat] = None
    t_max: float = 5.0
    grid: int = 201
    hy_samples: Optional[List[float]] = None
    n_max: int = 4
    polynomials: Optional[List[List[float]]] = None
    tol: Optional[float] = None
    pass_tol: float = 1e-6


class RunConfigModel(BaseModel):
    version: int = 1
    operator: Optional[MatrixModel] = None
    measures: Dict[str, MeasureModel] = {}
    functions: Dict[str, FunctionModel] = {}
    commands: List[CommandModel] = []
    seed: int = 0


class CommandResult(BaseModel):
    command: str
    index: int
    status: Literal["ok", "validation_error", "numeric_failure"]
    passed: bool
    error: Optional[str] = None
    result: Optional[Dict[str, Any]] = None
    csv: Optional[Dict[str, Any]] = None
    provenance: Dict[str, Any] = {}


class RunResponse(BaseModel):
    results: List[CommandResult]
    summary: Dict[str, Any]
