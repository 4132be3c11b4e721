"""Bot families, scenario expansion and the ground-truth manifest."""

from __future__ import annotations

import json
import os
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from ..shell.config import PUBLISHED_TOP_CREDENTIALS

# Published occurrence counts for the top combinations, used as sampling
# weights by the credential-scanner family.
TOP_CREDENTIAL_WEIGHTS = [975729, 167869, 82018, 62140, 52780, 50305, 39349, 12444, 10359]
CAMERA_USERNAMES = ["admin", "666666", "888888", "1111111", "12345", "1234", "123456", "123", "Aadmin"]
CAMERA_PASSWORDS = ["admin", "8hYTSUFk", "password", "123456", "admin1", "1234", "admin123", "12345", "password1"]

_SLOT = re.compile(r"\[\[([^\]]+)\]\]")


def expand_template(template: str, rng: random.Random, env: dict[str, str]) -> str:
    """Fill ``[[...]]`` slots.

    ``[[int:a:b]]`` integer in [a, b]; ``[[choice:x|y]]`` one option;
    ``[[ip]]`` an address in 203.0.113.0/24 (documentation range, never
    routed); ``[[hex:n]]`` n hex digits; ``[[name=spec]]`` binds the result
    for reuse as ``[[name]]`` within the same actor.
    """

    def fill(m: re.Match) -> str:
        body = m.group(1)
        name = None
        if "=" in body.split(":", 1)[0]:
            name, body = body.split("=", 1)
        elif body in env:
            return env[body]
        kind, _, arg = body.partition(":")
        if kind == "int":
            lo, hi = (int(x) for x in arg.split(":"))
            value = str(rng.randint(lo, hi))
        elif kind == "choice":
            value = rng.choice(arg.split("|"))
        elif kind == "ip":
            value = f"203.0.113.{rng.randint(1, 254)}"
        elif kind == "hex":
            value = "".join(rng.choice("0123456789abcdef") for _ in range(int(arg)))
        else:
            raise ValueError(f"unknown template slot [[{m.group(1)}]]")
        if name:
            env[name] = value
        return value

    return _SLOT.sub(fill, template)


@dataclass
class CommandStep:
    template: str
    slot: str
    intent: str
    label_family: str | None = None


@dataclass
class BotScript:
    family: str
    kind: str  # shell | camera | scanner
    credentials: list[tuple[str, str]] = field(default_factory=list)
    steps: list[CommandStep] = field(default_factory=list)
    requests: list[dict] = field(default_factory=list)
    delay: tuple[float, float] = (0.0, 0.0)
    expected_goals: list[str] = field(default_factory=list)
    attempts: int = 0


def _builtin_families() -> dict[str, dict]:
    text = resources.files("honeyeco.data").joinpath("bot_families.json").read_text("utf-8")
    return json.loads(text)


def _script_from(name: str, spec: dict) -> BotScript:
    steps = [
        CommandStep(s["template"], s.get("slot", s["template"]), s.get("intent", "Unlabeled"), s.get("label_family"))
        for s in spec.get("commands", [])
    ]
    return BotScript(
        family=name,
        kind=spec.get("kind", "shell"),
        credentials=[tuple(c) for c in spec.get("credentials", [])],
        steps=steps,
        requests=list(spec.get("requests", [])),
        delay=tuple(spec.get("delay", (0.0, 0.0))),
        expected_goals=list(spec.get("expected_goals", [])),
        attempts=int(spec.get("attempts", 0)),
    )


@dataclass
class ActorPlan:
    ip: str
    family: str
    kind: str
    credentials: list[tuple[str, str]]
    commands: list[str]
    slots: list[str]
    requests: list[dict]
    delay: float


@dataclass
class Scenario:
    name: str
    families: list[tuple[BotScript, int]]
    min_actors: int = 3
    min_clusters: int = 10


def load_scenario(path: str | os.PathLike | None = None, data: dict | None = None) -> Scenario:
    """Scenario JSON: ``{"name", "families": [{"family": <builtin name>,
    "count": n, ...overrides}]}``; a family entry with ``commands`` or
    ``requests`` and a new name defines a custom family inline."""
    if data is None:
        if path is None:
            raise ValueError("scenario path or data required")
        p = str(path)
        if not os.path.exists(p) and os.sep not in p:
            text = resources.files("honeyeco.data").joinpath("scenarios", p if p.endswith(".json") else p + ".json").read_text("utf-8")
            data = json.loads(text)
        else:
            with open(p, encoding="utf-8") as fh:
                data = json.load(fh)
    builtins = _builtin_families()
    families = []
    for entry in data["families"]:
        name = entry["family"]
        spec = dict(builtins.get(name, {}))
        spec.update({k: v for k, v in entry.items() if k not in ("family", "count")})
        if not spec:
            raise ValueError(f"unknown family {name!r} and no inline definition")
        families.append((_script_from(name, spec), int(entry.get("count", 1))))
    return Scenario(data.get("name", "scenario"), families,
                    int(data.get("min_actors", 3)), int(data.get("min_clusters", 10)))


def _actor_rng(seed: int, family: str, index: int) -> random.Random:
    # str seeds are hashed deterministically (not via PYTHONHASHSEED)
    return random.Random(f"{seed}/{family}/{index}")


def plan_actors(scenario: Scenario, seed: int) -> list[ActorPlan]:
    """Deterministic per-actor scripts. Each actor draws from its own
    generator keyed by (seed, family, index), so plans do not depend on
    execution order."""
    plans = []
    for fam_idx, (script, count) in enumerate(scenario.families):
        for j in range(count):
            rng = _actor_rng(seed, script.family, j)
            ip = f"10.{fam_idx + 1}.{j // 250}.{j % 250 + 1}"
            env: dict[str, str] = {}
            commands = [expand_template(s.template, rng, env) for s in script.steps]
            creds = list(script.credentials)
            if script.kind == "scanner":
                creds = [
                    rng.choices(PUBLISHED_TOP_CREDENTIALS, weights=TOP_CREDENTIAL_WEIGHTS)[0]
                    for _ in range(script.attempts or 6)
                ]
            requests = []
            for r in script.requests:
                r = json.loads(json.dumps(r))
                r["target"] = expand_template(r["target"], rng, env)
                if "headers" in r:
                    r["headers"] = {k: expand_template(v, rng, env) for k, v in r["headers"].items()}
                if r.get("auth") == "camera-dictionary":
                    r["auth"] = [rng.choice(CAMERA_USERNAMES), rng.choice(CAMERA_PASSWORDS)]
                requests.append(r)
            lo, hi = script.delay
            plans.append(ActorPlan(ip, script.family, script.kind, creds, commands,
                                   [s.slot for s in script.steps], requests, rng.uniform(lo, hi) if hi else 0.0))
    return plans


def build_manifest(scenario: Scenario, plans: list[ActorPlan], seed: int) -> dict[str, Any]:
    """Ground truth: actor -> family, command -> (family, slot), the
    expected pattern per command family (its slot set, supported by its
    actors) and the declared goal sequences."""
    scripts = {s.family: s for s, _ in scenario.families}
    actors = {p.ip: p.family for p in plans}
    command_family: dict[str, str] = {}
    command_slot: dict[str, str] = {}
    for p in plans:
        steps = scripts[p.family].steps
        for cmd, step in zip(p.commands, steps):
            command_family.setdefault(cmd, step.label_family or p.family)
            command_slot.setdefault(cmd, f"{p.family}/{step.slot}")

    expected_patterns = []
    goal_sequences = {}
    for script, count in scenario.families:
        members = sorted(p.ip for p in plans if p.family == script.family)
        slots = sorted({f"{script.family}/{s.slot}" for s in script.steps})
        if script.kind == "shell" and len(slots) >= scenario.min_clusters and count >= scenario.min_actors:
            expected_patterns.append({"family": script.family, "slots": slots, "supporters": members})
            if script.expected_goals:
                goal_sequences[script.family] = script.expected_goals

    edges: dict[str, int] = {}
    for seq in goal_sequences.values():
        for a, b in {(a, b) for a, b in zip(seq, seq[1:]) if a != b}:
            edges[f"{a} -> {b}"] = edges.get(f"{a} -> {b}", 0) + 1

    return {
        "scenario": scenario.name,
        "seed": seed,
        "actors": actors,
        "families": {
            s.family: {"kind": s.kind, "count": c, "actors": sorted(p.ip for p in plans if p.family == s.family)}
            for s, c in scenario.families
        },
        "command_family": command_family,
        "command_slot": command_slot,
        "expected_cluster_families": sorted(set(command_slot.values())),
        "expected_patterns": expected_patterns,
        "expected_goal_sequences": goal_sequences,
        "expected_state_machine": dict(sorted(edges.items())),
        "actor_commands": {p.ip: p.commands for p in plans if p.kind == "shell"},
    }


def manifest_is_sound(manifest: dict[str, Any], min_actors: int = 3, min_clusters: int = 10) -> bool:
    """Every expected pattern must be mined back when each command slot is
    its own cluster."""
    from ..grouping.patterns import ActorProfile, mine_patterns

    slot_ids = {s: i for i, s in enumerate(manifest["expected_cluster_families"])}
    profiles = [
        ActorProfile(ip, frozenset(slot_ids[manifest["command_slot"][c]] for c in cmds))
        for ip, cmds in manifest["actor_commands"].items()
        if cmds
    ]
    mined = {(p.clusters, p.supporters) for p in mine_patterns(profiles, min_actors, min_clusters)}
    for exp in manifest["expected_patterns"]:
        clusters = frozenset(slot_ids[s] for s in exp["slots"])
        supporters = frozenset(exp["supporters"])
        if not any(clusters <= c and supporters <= s for c, s in mined):
            return False
    return True
