"""HTTP control surface for live campaigns and journal browsing.

Serves campaign state snapshots, attempt details (prompts, code, build
log, transcript), the metrics report, and accepts behavioral verdicts.
Verdict submissions flow through the single journal writer and unblock a
waiting campaign attempt; submitting against anything other than an
awaiting-verdict attempt is rejected with 409 (CF attempts never hold
verdicts, completed attempts cannot be re-judged).

Local-only by default: binds 127.0.0.1 unless told otherwise. Optionally
serves a static directory (the dashboard build) at the root path.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlparse

from .campaign import CampaignRuntime
from .errors import InconsistentInputs, PortInUse
from .journal import AttemptView, InstanceKey
from .metrics import collect_from_state, compute_report, emit_report, ready_records

log = logging.getLogger(__name__)

DEFAULT_PORT = 8787


def _attempt_summary(view: AttemptView) -> dict:
    return {
        "id": view.id,
        "task": view.key.task,
        "mode": view.key.mode,
        "platform": view.key.platform,
        "level": view.level,
        "attempt": view.attempt,
        "state": view.state,
        "outcome": view.outcome.name if view.outcome is not None else None,
    }


def _attempt_detail(view: AttemptView) -> dict:
    detail = _attempt_summary(view)
    detail.update(
        {
            "run": view.run.as_dict() if view.run else None,
            "code": view.bundle.file_map.get(view.bundle.entry) if view.bundle else None,
            "build": view.build.as_dict() if view.build else None,
            "flash": view.flash.as_dict() if view.flash else None,
            "verdict": view.verdict.as_dict() if view.verdict else None,
            "transcript": view.transcript,
            "task_info": view.task_info,
            "assembly_error": view.assembly_error,
            "incomplete_reason": view.incomplete_reason,
        }
    )
    return detail


class ControlApi:
    """Request-independent view of the runtime, shared by handler threads."""

    def __init__(self, runtime: CampaignRuntime, static_dir: Path | None = None):
        self.runtime = runtime
        self.static_dir = Path(static_dir) if static_dir else None

    # -- GET ------------------------------------------------------------------

    def status(self) -> dict:
        with self.runtime.cond:
            state = self.runtime.state
            counts = state.state_counts()
            seen = {v.key for v in state.attempts.values()}
            planned = {
                InstanceKey(task=s["task"], mode=s["mode"], platform=s["platform"])
                for s in state.meta.get("grid", [])
            }
            meta = {k: v for k, v in state.meta.items() if k != "grid"}
            return {
                "seq": state.last_seq,
                "states": counts,
                "instances": len(seen | planned),
                "pending_instances": len(planned - seen) if planned else 0,
                "attempts": len(state.attempts),
                "meta": meta,
            }

    def instances(self, platform: str | None, mode: str | None, level: str | None) -> list[dict]:
        with self.runtime.cond:
            grouped: dict = {}

            def entry_for(key: InstanceKey, lvl: int) -> dict:
                return grouped.setdefault(
                    key,
                    {
                        "task": key.task,
                        "mode": key.mode,
                        "platform": key.platform,
                        "level": lvl,
                        "attempts": {},
                    },
                )

            def wanted(key: InstanceKey, lvl: int) -> bool:
                if platform and key.platform != platform:
                    return False
                if mode and key.mode != mode:
                    return False
                return not level or str(lvl) == level

            for slot in self.runtime.state.meta.get("grid", []):
                key = InstanceKey(task=slot["task"], mode=slot["mode"], platform=slot["platform"])
                if wanted(key, slot["level"]):
                    entry_for(key, slot["level"])
            for view in self.runtime.state.attempts.values():
                if not wanted(view.key, view.level):
                    continue
                entry = entry_for(view.key, view.level)
                entry["attempts"][str(view.attempt)] = {
                    "state": view.state,
                    "outcome": view.outcome.name if view.outcome is not None else None,
                }
            return [grouped[k] for k in sorted(grouped, key=lambda k: (k.task, k.mode, k.platform))]

    def attempts(self, state_filter: str | None) -> list[dict]:
        with self.runtime.cond:
            views = (
                self.runtime.state.in_state(state_filter)
                if state_filter
                else sorted(
                    self.runtime.state.attempts.values(),
                    key=lambda v: (v.key.task, v.key.mode, v.key.platform, v.attempt),
                )
            )
            return [_attempt_summary(v) for v in views]

    def attempt_detail(self, raw_id: str) -> dict | None:
        with self.runtime.cond:
            try:
                view = self.runtime.state.by_id(raw_id)
            except ValueError:
                return None
            return _attempt_detail(view) if view else None

    def report(self, k: int, fmt: str) -> tuple[str, int]:
        with self.runtime.cond:
            records = collect_from_state(self.runtime.state)
            seq = self.runtime.state.last_seq
        # Live view: instances that have not yet reached k attempts render
        # as pending in the grid instead of erroring the report.
        report = compute_report(ready_records(records, k), k)
        rendered = emit_report(report, fmt)
        if fmt == "json":
            payload = json.loads(rendered)
            payload["seq"] = seq
            rendered = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        return rendered, seq

    # -- POST -----------------------------------------------------------------

    def submit_verdict(self, raw_id: str, body: dict) -> dict:
        verdict = body.get("verdict")
        if verdict not in ("pass", "fail"):
            raise ValueError("body must carry verdict: 'pass' or 'fail'")
        view = self.runtime.submit_verdict(
            raw_id,
            passed=verdict == "pass",
            notes=str(body.get("notes", "")),
            evaluator=str(body.get("evaluator", "api")),
        )
        return _attempt_summary(view)


class _Handler(BaseHTTPRequestHandler):
    api: ControlApi  # injected by _make_handler

    def log_message(self, fmt: str, *args) -> None:  # route to logging, not stderr
        log.debug("api: " + fmt, *args)

    def _send(self, status: int, payload: dict | list | str, content_type: str = "application/json") -> None:
        body = (
            payload.encode("utf-8")
            if isinstance(payload, str)
            else (json.dumps(payload, indent=2) + "\n").encode("utf-8")
        )
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, message: str) -> None:
        self._send(status, {"error": message})

    def do_GET(self) -> None:  # noqa: N802 (http.server naming)
        try:
            parsed = urlparse(self.path)
            path = unquote(parsed.path)
            query = {k: v[0] for k, v in parse_qs(parsed.query).items()}
            if path == "/api/status":
                self._send(200, self.api.status())
            elif path == "/api/instances":
                self._send(
                    200,
                    self.api.instances(query.get("platform"), query.get("mode"), query.get("level")),
                )
            elif path == "/api/attempts":
                self._send(200, self.api.attempts(query.get("state")))
            elif path.startswith("/api/attempts/"):
                detail = self.api.attempt_detail(path[len("/api/attempts/") :])
                if detail is None:
                    self._error(404, "unknown attempt")
                else:
                    self._send(200, detail)
            elif path == "/api/report":
                fmt = query.get("format", "json")
                k = int(query.get("k", "1"))
                rendered, _ = self.api.report(k, fmt)
                content_type = "application/json" if fmt == "json" else "text/plain; charset=utf-8"
                self._send(200, rendered, content_type)
            else:
                self._serve_static(path)
        except Exception as exc:  # pragma: no cover - defensive
            log.exception("api GET failed")
            self._error(500, str(exc))

    def do_POST(self) -> None:  # noqa: N802
        try:
            parsed = urlparse(self.path)
            path = unquote(parsed.path)
            if path.startswith("/api/attempts/") and path.endswith("/verdict"):
                raw_id = path[len("/api/attempts/") : -len("/verdict")]
                length = int(self.headers.get("Content-Length", "0"))
                try:
                    body = json.loads(self.rfile.read(length) or b"{}")
                except json.JSONDecodeError:
                    self._error(400, "body must be JSON")
                    return
                try:
                    self._send(200, self.api.submit_verdict(raw_id, body))
                except KeyError as exc:
                    self._error(404, str(exc))
                except InconsistentInputs as exc:
                    self._error(409, str(exc))
                except ValueError as exc:
                    self._error(400, str(exc))
            else:
                self._error(404, "unknown endpoint")
        except Exception as exc:  # pragma: no cover - defensive
            log.exception("api POST failed")
            self._error(500, str(exc))

    def _serve_static(self, path: str) -> None:
        if self.api.static_dir is None:
            self._error(404, "unknown endpoint")
            return
        rel = path.lstrip("/") or "index.html"
        target = (self.api.static_dir / rel).resolve()
        if not str(target).startswith(str(self.api.static_dir.resolve())) or not target.is_file():
            self._error(404, "not found")
            return
        content_type = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self._send(200, target.read_text(encoding="utf-8"), content_type)


def _make_handler(api: ControlApi) -> type:
    return type("Handler", (_Handler,), {"api": api})


class ControlServer:
    """Owns the HTTP server thread; close() releases the port."""

    def __init__(self, server: ThreadingHTTPServer, thread: threading.Thread):
        self._server = server
        self._thread = thread

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)


def serve_control_api(
    runtime: CampaignRuntime,
    port: int = DEFAULT_PORT,
    host: str = "127.0.0.1",
    static_dir: Path | None = None,
) -> ControlServer:
    """Start the control API in a background thread; returns a handle."""
    api = ControlApi(runtime, static_dir=static_dir)
    try:
        server = ThreadingHTTPServer((host, port), _make_handler(api))
    except OSError as exc:
        raise PortInUse(f"cannot bind {host}:{port}: {exc}") from exc
    server.daemon_threads = True
    thread = threading.Thread(target=server.serve_forever, name="hilbench-api", daemon=True)
    thread.start()
    log.info("control API listening on %s:%s", host, server.server_address[1])
    return ControlServer(server, thread)
