"""
FastAPI service for junctionsim.
Exposes the phase decision and scenario runs per CONTRACT.md.
"""
import logging
import os

from dotenv import load_dotenv
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.concurrency import run_in_threadpool

from junctionsim.app.api_models import (
    HealthResponse,
    NextPhaseRequest,
    NextPhaseResponse,
    RunExperimentRequest,
    RunExperimentResponse,
)
from junctionsim.core.orchestrator import run_experiment
from junctionsim.core.scenario import load_scenario, with_overrides
from junctionsim.errors import ContractViolation, MatrixDeliveryError, ScenarioError
from junctionsim.logic.intersection import NODES, Phase
from junctionsim.logic.loads import LoadWeights, compute_loads
from junctionsim.logic.planner import TimingConfig, candidate_pairs, plan_next_phase

ROOT_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
load_dotenv(dotenv_path=os.path.join(ROOT_DIR, ".env"))

logging.basicConfig(level=os.getenv("JUNCTIONSIM_LOG_LEVEL", "INFO").upper())
logger = logging.getLogger(__name__)

# -----------------------------------------------------------------------------
# App setup
# -----------------------------------------------------------------------------
app = FastAPI(
    title="junctionsim API",
    description="Load-driven traffic signal phase planning and simulation",
    version="0.1.0",
)

_cors_origins = ["http://localhost:3000"]
_frontend_url = os.getenv("FRONTEND_URL")
if _frontend_url:
    _cors_origins.append(_frontend_url)

app.add_middleware(
    CORSMiddleware,
    allow_origins=_cors_origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


# -----------------------------------------------------------------------------
# Error handling
# -----------------------------------------------------------------------------
@app.exception_handler(RequestValidationError)
async def validation_exception_handler(
    request: Request,
    exc: RequestValidationError,
) -> JSONResponse:
    """Handle 422 validation errors with a consistent JSON response."""
    errors = exc.errors()
    return JSONResponse(
        status_code=422,
        content={
            "detail": "Validation error",
            "errors": [
                {
                    "loc": err.get("loc", []),
                    "msg": err.get("msg", ""),
                    "type": err.get("type", ""),
                }
                for err in errors
            ],
        },
    )


@app.exception_handler(ScenarioError)
async def scenario_exception_handler(request: Request, exc: ScenarioError) -> JSONResponse:
    return JSONResponse(
        status_code=422,
        content={"detail": exc.args[0], "errors": exc.errors},
    )


@app.exception_handler(ContractViolation)
@app.exception_handler(MatrixDeliveryError)
async def contract_exception_handler(request: Request, exc: Exception) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"detail": str(exc), "errors": []},
    )


# -----------------------------------------------------------------------------
# Endpoints
# -----------------------------------------------------------------------------
@app.get("/api/health", response_model=HealthResponse)
async def health_check() -> HealthResponse:
    """Health check endpoint."""
    return HealthResponse()


@app.get("/api/scenarios/{name}")
async def get_scenario(name: str) -> dict:
    """Validated scenario as JSON."""
    try:
        config = load_scenario(name)
    except ScenarioError as exc:
        if "not found" in exc.args[0]:
            raise HTTPException(status_code=404, detail=f"Scenario {name} not found.")
        raise
    return config.model_dump(mode="json")


@app.post("/api/phases/next", response_model=NextPhaseResponse)
async def next_phase(request: NextPhaseRequest) -> NextPhaseResponse:
    """
    One DT3P decision from a road-status matrix.
    The matrix must name all eight nodes.
    """
    current = Phase.parse(request.current)
    missing = [node.value for node in NODES if node not in request.matrix]
    if missing:
        raise MatrixDeliveryError(f"Missing reports for nodes {', '.join(missing)}")
    timing = request.timing or TimingConfig()
    weights = request.weights or LoadWeights()
    plan = plan_next_phase(current, request.matrix, timing, weights)
    loads = compute_loads(request.matrix, weights)
    return NextPhaseResponse(
        pair=plan.pair.label,
        green_seconds=plan.green_seconds,
        candidates=[pair.label for pair in candidate_pairs(current.first, current.second)],
        loads={node.value: loads[node] for node in NODES},
    )


@app.post("/api/experiments/run", response_model=RunExperimentResponse)
async def run_scenario(request: RunExperimentRequest) -> RunExperimentResponse:
    """Run a scenario in-process and return its summary; no files are written."""
    config = with_overrides(
        load_scenario(request.scenario),
        controller=request.controller,
        duration=request.duration,
        seed=request.seed,
    )
    result = await run_in_threadpool(run_experiment, config)
    summary = result.summary()
    return RunExperimentResponse(
        scenario=config.name,
        controller=config.controller,
        duration=config.duration,
        final_std=summary["final_std"],
        spread=summary["spread"],
        utilization=summary["utilization"],
        mean_queue=summary["mean_queue"],
        decisions=len(result.decisions),
    )
