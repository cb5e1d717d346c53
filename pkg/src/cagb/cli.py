"""Command line interface: a thin client of the experiment service.

Commands talk to the FastAPI app either in process (default) or over HTTP
when --server is given; output files are written locally and atomically.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .harness.config import ConfigError
from .harness.runner import write_output


class ServiceClient:
    """HTTP-shaped access to the service, in process or remote."""

    def __init__(self, server: str | None = None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            import warnings

            with warnings.catch_warnings():
                # starlette nags about its own httpx shim on import
                warnings.filterwarnings("ignore", message=".*httpx.*")
                from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app)

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        if response.status_code >= 400:
            raise ConfigError(_detail(response))
        return response.json()

    def get(self, path: str) -> dict:
        response = self._client.get(path)
        response.raise_for_status()
        return response.json()


def _detail(response) -> str:
    try:
        detail = response.json().get("detail")
    except ValueError:
        return response.text
    if isinstance(detail, list):  # pydantic validation errors
        parts = []
        for err in detail:
            loc = ".".join(str(p) for p in err.get("loc", []) if p not in ("body",))
            parts.append(f"{loc}: {err.get('msg')}")
        return "; ".join(parts)
    return str(detail)


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


@click.group()
@click.version_option(__version__, prog_name="cagb")
def main() -> None:
    """Coalition group-buying experiment runner."""
    from .service import configure_logging

    configure_logging()


@main.command(name="run")
@click.argument("config_path", type=click.Path())
@click.option("--out", default=None, help="Output path (default: from config).")
@click.option("--jobs", default=1, show_default=True, help="Concurrent cells.")
@click.option("--jsonl", is_flag=True, help="Emit JSON lines instead of CSV.")
@click.option("--timings", is_flag=True,
              help="Append a wall_ms column (breaks byte-determinism).")
@click.option("--server", default=None, help="Remote service URL.")
def run_cmd(config_path, out, jobs, jsonl, timings, server) -> None:
    """Execute every (seed x order/algorithm) cell of a config."""
    try:
        doc = _load_json(config_path)
        client = ServiceClient(server)
        result = client.post("/run", {"config": doc, "jobs": jobs,
                                      "timings": timings})
        fmt = "jsonl" if jsonl else "csv"
        target = out or doc.get("out") or f"{doc.get('scenario', 'run')}_metrics.{fmt}"
        path = write_output(result["columns"], result["rows"], target, fmt)
    except ConfigError as exc:
        _fail(str(exc))
    except OSError as exc:
        _fail(f"cannot write output: {exc}")
    click.echo(f"wrote {len(result['rows'])} rows to {path}")


@main.command(name="verify")
@click.argument("config_path", type=click.Path())
@click.option("--server", default=None, help="Remote service URL.")
def verify_cmd(config_path, server) -> None:
    """Check stable runs against the brute-force stable-partition oracle."""
    try:
        doc = _load_json(config_path)
        client = ServiceClient(server)
        result = client.post("/verify", {"config": doc})
    except ConfigError as exc:
        _fail(str(exc))
    click.echo(f"checked {result['checked']} runs "
               f"({result['stable_runs']} reached a stable status)")
    if result["passed"]:
        click.echo("verify: PASS")
        return
    for failure in result["failures"]:
        click.echo(
            f"counterexample: seed={failure['seed']} order={failure['order']} "
            f"partition={failure['partition']} witness={failure['witness']}",
            err=True)
    click.echo("verify: FAIL", err=True)
    sys.exit(1)


@main.command(name="sweep")
@click.argument("config_path", type=click.Path())
@click.option("--key", required=True, help="Config key to sweep.")
@click.option("--values", required=True,
              help="Comma-separated values for the key.")
@click.option("--out", default=None, help="Output path.")
@click.option("--jobs", default=1, show_default=True)
@click.option("--jsonl", is_flag=True, help="Emit JSON lines instead of CSV.")
@click.option("--server", default=None, help="Remote service URL.")
def sweep_cmd(config_path, key, values, out, jobs, jsonl, server) -> None:
    """Run the config once per value, concatenating rows."""
    try:
        doc = _load_json(config_path)
        parsed = [_parse_value(v) for v in values.split(",")]
        client = ServiceClient(server)
        result = client.post("/sweep", {"config": doc, "key": key,
                                        "values": parsed, "jobs": jobs})
        fmt = "jsonl" if jsonl else "csv"
        target = out or f"{doc.get('scenario', 'sweep')}_sweep.{fmt}"
        path = write_output(result["columns"], result["rows"], target, fmt)
    except ConfigError as exc:
        _fail(str(exc))
    except OSError as exc:
        _fail(f"cannot write output: {exc}")
    click.echo(f"wrote {len(result['rows'])} rows to {path}")


def _parse_value(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


@main.command(name="serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve_cmd(host, port) -> None:
    """Run the experiment service as an HTTP server."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
