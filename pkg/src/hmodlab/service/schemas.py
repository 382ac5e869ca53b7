"""Pydantic request/response models for the verification service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class SuiteRequest(BaseModel):
    """Run parameters; rationals travel as fraction strings."""

    tol: str = "1/1073741824"  # 2^-30
    budget: int = Field(default=1_000_000, ge=1)
    depth: int = Field(default=64, ge=1)
    trunc: str = "8,64"
    qseq: Optional[list[str]] = None  # explicit sequence; None = builtin dyadic


class CheckModel(BaseModel):
    check: str
    parameters: dict
    verdict: str
    passed: bool
    interval: Optional[dict] = None
    witness: Optional[dict] = None


class SuiteReportModel(BaseModel):
    suite: str
    timestamp: str
    config: dict
    passed: bool
    checks: list[CheckModel]


class SuiteRunResponse(BaseModel):
    passed: bool
    reports: list[SuiteReportModel]


class CurveRequest(BaseModel):
    params: dict[str, str] = Field(default_factory=dict)
    samples: int = Field(default=101, ge=2)
    qseq: Optional[list[str]] = None


class CurveResponse(BaseModel):
    object: str
    samples: int
    csv: str


class HealthResponse(BaseModel):
    status: str
    version: str
