"""HTTP service exposing the classify wire contract.

POST /classify  {"text": str, "tasks": [task, ...]}
             -> {"results": {task: {"scores": {label: p}, "dominant": label}}}
GET  /health   -> {"status": "ok", "tasks": [...], "models": {...}}

Errors: 400 malformed request, 413 over-length text, 503 while models load.
"""

from __future__ import annotations

import argparse
import json

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .backends import load_backend
from .config import SidecarConfig
from .labels import LABEL_SETS


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(config: SidecarConfig | None = None, *, defer_load: bool = False) -> FastAPI:
    """Build the service.  Models load eagerly (fail-fast) unless
    ``defer_load`` is set, in which case requests get 503 until
    ``app.state.load_models()`` is called."""
    config = config or SidecarConfig()
    app = FastAPI(title="crisis-pulse model sidecar")
    app.state.config = config
    app.state.backends = None

    def load_models() -> None:
        app.state.backends = {
            task: load_backend(task, LABEL_SETS[task], model_id)
            for task, model_id in config.models.items()
        }

    app.state.load_models = load_models
    if not defer_load:
        load_models()

    @app.get("/health")
    def health():
        if app.state.backends is None:
            return _error(503, "models loading")
        return {
            "status": "ok",
            "tasks": sorted(app.state.backends),
            "models": dict(config.models),
        }

    @app.post("/classify")
    async def classify(request: Request):
        if app.state.backends is None:
            return _error(503, "models loading")
        try:
            body = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError):
            return _error(400, "body is not valid JSON")
        if not isinstance(body, dict):
            return _error(400, "body must be a JSON object")
        text = body.get("text")
        tasks = body.get("tasks")
        if not isinstance(text, str):
            return _error(400, "'text' must be a string")
        if (
            not isinstance(tasks, list)
            or not tasks
            or not all(isinstance(t, str) for t in tasks)
        ):
            return _error(400, "'tasks' must be a non-empty list of strings")
        unknown = [t for t in tasks if t not in app.state.backends]
        if unknown:
            return _error(400, f"unconfigured tasks: {unknown}")
        if len(text) > config.max_request_chars:
            return _error(413, f"text exceeds {config.max_request_chars} characters")

        results = {}
        for task in tasks:
            scores = app.state.backends[task].score(text)
            total = sum(scores.values())
            scores = {label: value / total for label, value in scores.items()}
            dominant = max(sorted(scores), key=lambda label: scores[label])
            results[task] = {"scores": scores, "dominant": dominant}
        return {"results": results}

    return app


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="crisis-pulse model sidecar")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8081)
    parser.add_argument(
        "--model",
        action="append",
        metavar="TASK=MODEL_ID",
        help="task to model id (builtin or hf:<checkpoint>); repeatable",
    )
    parser.add_argument("--max-chars", type=int, default=10_000)
    parser.add_argument("--timeout", type=float, default=30.0)
    args = parser.parse_args(argv)

    kwargs = {}
    if args.model:
        models = {}
        for spec in args.model:
            task, _, model_id = spec.partition("=")
            if not model_id:
                parser.error(f"--model needs TASK=MODEL_ID, got {spec!r}")
            models[task] = model_id
        kwargs["models"] = models
    config = SidecarConfig(
        host=args.host,
        port=args.port,
        max_request_chars=args.max_chars,
        timeout_s=args.timeout,
        **kwargs,
    )
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)


if __name__ == "__main__":
    main()
