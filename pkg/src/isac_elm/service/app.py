"""FastAPI application wrapping the estimation core."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import (ConfigError, DegenerateInputError, DependencyError, InvalidArgumentError,
                      NumericError, RankDeficiencyError)
from . import ops
from .schemas import (ComplexityRequest, ConfigRequest, ConfigResponse, CsvResponse, EvalRequest,
                      HealthResponse, SweepRequest)

# status codes the CLI maps back to its exit codes
STATUS = {"config": 422, "invalid": 400, "dependency": 400, "numeric": 500}


def _error(kind: str, exc: Exception) -> JSONResponse:
    return JSONResponse(status_code=STATUS[kind], content={"kind": kind, "detail": str(exc)})


def create_app() -> FastAPI:
    app = FastAPI(title="isac-elm", version=__version__)

    @app.exception_handler(ConfigError)
    async def _config(_: Request, exc: ConfigError):
        return _error("config", exc)

    @app.exception_handler(DependencyError)
    async def _dependency(_: Request, exc: DependencyError):
        return _error("dependency", exc)

    @app.exception_handler(InvalidArgumentError)
    async def _invalid(_: Request, exc: InvalidArgumentError):
        return _error("invalid", exc)

    for kind in (NumericError, DegenerateInputError, RankDeficiencyError):
        app.add_exception_handler(kind, lambda _, exc: _error("numeric", exc))

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(version=__version__)

    @app.post("/config/validate", response_model=ConfigResponse)
    def validate(req: ConfigRequest) -> ConfigResponse:
        return ops.validate_config(req)

    # Plain (sync) endpoints run in the threadpool, keeping the event loop free.
    @app.post("/eval", response_model=CsvResponse)
    def evaluate(req: EvalRequest) -> CsvResponse:
        return ops.run_eval(req)

    @app.post("/sweep", response_model=CsvResponse)
    def sweep(req: SweepRequest) -> CsvResponse:
        return ops.run_sweep(req)

    @app.post("/complexity", response_model=CsvResponse)
    def complexity(req: ComplexityRequest) -> CsvResponse:
        return ops.run_complexity(req)

    return app


app = create_app()
