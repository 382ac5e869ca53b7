"""FastAPI service exposing the verification suites and curve emission.

The endpoints are a thin JSON wrapper over :mod:`hmodlab.suites`; the CLI
uses the same payload helpers, so a local run and a run against a remote
server produce identical reports.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__, suites
from ..errors import BudgetExhausted, ParameterError, WindowSearchError
from .schemas import (
    CurveRequest,
    CurveResponse,
    HealthResponse,
    SuiteRequest,
    SuiteReportModel,
    SuiteRunResponse,
)

app = FastAPI(
    title="hmodlab",
    description="Exact and validated verification of a Hilbert-module "
    "orthogonal-complement counterexample over C[0,1].",
    version=__version__,
)


def _config_from_request(req: SuiteRequest) -> suites.RunConfig:
    return suites.config_from_options(
        {
            "tol": req.tol,
            "budget": req.budget,
            "depth": req.depth,
            "trunc": req.trunc,
            "qseq": req.qseq,
        }
    )


def run_suites_payload(name: str, req: SuiteRequest) -> SuiteRunResponse:
    """Shared by the HTTP handler and the in-process CLI path."""
    cfg = _config_from_request(req)
    reports = suites.run_suites(name, cfg)
    models = [SuiteReportModel(**r.to_obj()) for r in reports]
    return SuiteRunResponse(passed=all(r.passed for r in reports), reports=models)


def emit_curve_payload(obj: str, req: CurveRequest) -> CurveResponse:
    cfg = suites.config_from_options({"qseq": req.qseq}) if req.qseq else suites.RunConfig()
    csv = suites.emit_curve(obj, req.params, req.samples, cfg)
    return CurveResponse(object=obj, samples=req.samples, csv=csv)


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/suites/{name}", response_model=SuiteRunResponse)
def run_suite(name: str, request: SuiteRequest) -> SuiteRunResponse:
    try:
        return run_suites_payload(name, request)
    except ParameterError as err:
        raise HTTPException(status_code=422, detail=str(err)) from err
    except (BudgetExhausted, WindowSearchError) as err:
        raise HTTPException(status_code=503, detail=str(err)) from err


@app.post("/curves/{obj}", response_model=CurveResponse)
def emit_curve(obj: str, request: CurveRequest) -> CurveResponse:
    try:
        return emit_curve_payload(obj, request)
    except ParameterError as err:
        raise HTTPException(status_code=422, detail=str(err)) from err
