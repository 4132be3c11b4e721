"""Synthetic attacker traffic and honeypot vetting."""

from .clients import HttpResult, ShellClient, ShellClientError, ShellTranscript, http_requests, shell_session
from .runner import ScenarioAborted, parse_target, run_scenario
from .scenario import (
    ActorPlan,
    BotScript,
    CommandStep,
    Scenario,
    build_manifest,
    expand_template,
    load_scenario,
    manifest_is_sound,
    plan_actors,
)
from .vetting import Check, VettingReport, fingerprint_probe

__all__ = [
    "ActorPlan",
    "BotScript",
    "Check",
    "CommandStep",
    "HttpResult",
    "Scenario",
    "ScenarioAborted",
    "ShellClient",
    "ShellClientError",
    "ShellTranscript",
    "VettingReport",
    "build_manifest",
    "expand_template",
    "fingerprint_probe",
    "http_requests",
    "load_scenario",
    "manifest_is_sound",
    "parse_target",
    "plan_actors",
    "run_scenario",
    "shell_session",
]
