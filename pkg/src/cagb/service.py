"""HTTP facade over the experiment harness.

The service executes validated experiment configs and returns metric rows;
clients (the bundled CLI included) format and persist the results. Runs are
deterministic in the config contents, so the service is safely stateless.
"""

from __future__ import annotations

import logging
import os

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .harness.config import ConfigError, ExperimentConfig
from .harness.runner import execute_config, sweep_config, verify_config

log = logging.getLogger("cagb.service")

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def configure_logging() -> None:
    level = _LOG_LEVELS.get(os.environ.get("CAGB_LOG", "error").lower())
    if level is not None:
        logging.basicConfig(level=level)


class RunRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ExperimentConfig
    jobs: int = Field(default=1, ge=1)
    timings: bool = False


class RunResponse(BaseModel):
    columns: list[str]
    rows: list[dict]


class VerifyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ExperimentConfig


class VerifyResponse(BaseModel):
    passed: bool
    checked: int
    stable_runs: int
    failures: list[dict]


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: dict
    key: str
    values: list
    jobs: int = Field(default=1, ge=1)


class VersionResponse(BaseModel):
    name: str
    version: str


app = FastAPI(title="cagb", version=__version__)


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/version", response_model=VersionResponse)
def version() -> VersionResponse:
    return VersionResponse(name="cagb", version=__version__)


@app.post("/run", response_model=RunResponse)
def run(request: RunRequest) -> RunResponse:
    log.info("run: scenario=%s jobs=%d", request.config.scenario, request.jobs)
    columns, rows = execute_config(request.config, jobs=request.jobs,
                                   timings=request.timings)
    return RunResponse(columns=columns, rows=rows)


@app.post("/verify", response_model=VerifyResponse)
def verify(request: VerifyRequest) -> VerifyResponse:
    try:
        report = verify_config(request.config)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return VerifyResponse(passed=report.passed, checked=report.checked,
                          stable_runs=report.stable_runs,
                          failures=report.failures)


@app.post("/sweep", response_model=RunResponse)
def sweep(request: SweepRequest) -> RunResponse:
    try:
        columns, rows = sweep_config(request.config, request.key,
                                     request.values, jobs=request.jobs)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return RunResponse(columns=columns, rows=rows)


@app.get("/columns/{scenario}")
def scenario_columns(scenario: str) -> dict:
    from .harness.runner import COLUMNS

    if scenario not in COLUMNS:
        raise HTTPException(status_code=404, detail=f"unknown scenario {scenario!r}")
    return {"scenario": scenario, "columns": COLUMNS[scenario]}
