"""Drive planned actors against live honeypots."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from .clients import HttpResult, ShellTranscript, http_requests, shell_session
from .scenario import ActorPlan, Scenario, build_manifest, plan_actors

log = logging.getLogger(__name__)

Target = tuple[str, int]


class ScenarioAborted(ConnectionError):
    """Raised when an actor cannot reach its target. ``transcripts`` holds
    whatever the other actors completed."""

    def __init__(self, message: str, transcripts: dict[str, Any]):
        super().__init__(message)
        self.transcripts = transcripts


@dataclass
class ActorResult:
    ip: str
    family: str
    shell: ShellTranscript | None = None
    http: list[HttpResult] = field(default_factory=list)
    error: str | None = None


def parse_target(value: str) -> Target:
    host, sep, port = value.rpartition(":")
    if not sep or not host or not port.isdigit():
        raise ValueError(f"expected host:port, got {value!r}")
    return host, int(port)


def _run_actor(plan: ActorPlan, shell: Target | None, camera: Target | None, timeout: float) -> ActorResult:
    res = ActorResult(plan.ip, plan.family)
    try:
        if plan.kind in ("shell", "scanner"):
            if shell is None:
                raise ConnectionError("no shell target configured")
            res.shell = shell_session(shell[0], shell[1], plan.credentials, plan.commands,
                                      source_tag=plan.ip, delay=plan.delay, timeout=timeout)
        elif plan.kind == "camera":
            if camera is None:
                raise ConnectionError("no camera target configured")
            res.http = http_requests(camera[0], camera[1], plan.requests, source_tag=plan.ip, timeout=timeout)
        else:
            raise ValueError(f"unknown actor kind {plan.kind!r}")
    except (OSError, ConnectionError) as exc:
        res.error = f"{type(exc).__name__}: {exc}"
    return res


def run_scenario(
    scenario: Scenario,
    seed: int,
    shell: Target | None = None,
    camera: Target | None = None,
    workers: int = 8,
    timeout: float = 10.0,
) -> dict[str, Any]:
    """Run every actor (concurrently, each one sequential) and return the
    ground-truth manifest. Actors identify themselves with a source tag, so
    the honeypots must run with ``accept_source_tag`` enabled."""
    plans = plan_actors(scenario, seed)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda p: _run_actor(p, shell, camera, timeout), plans))

    failed = [r for r in results if r.error]
    if failed:
        transcripts = {r.ip: r for r in results}
        raise ScenarioAborted(
            f"{len(failed)} of {len(results)} actors failed; first: {failed[0].ip}: {failed[0].error}",
            transcripts,
        )
    manifest = build_manifest(scenario, plans, seed)
    manifest["transcript_summary"] = {
        r.ip: {
            "logged_in": bool(r.shell and r.shell.logged_in),
            "login_attempts": r.shell.attempts if r.shell else 0,
            "commands_run": len(r.shell.outputs) if r.shell else 0,
            "http_statuses": [h.status for h in r.http],
        }
        for r in results
    }
    return manifest
