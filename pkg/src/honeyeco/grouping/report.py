"""Group/state-machine report writer (JSON, CSV, DOT and plain text)."""

from __future__ import annotations

import csv
import io
import json
import os
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..events import CREDENTIAL_KINDS, Event, EventKind
from .goals import GoalRules, GoalStateMachine
from .patterns import Pattern


def _fmt_cred(value: str) -> str:
    return value if value else "(empty)"


def top_credentials(events: Iterable[Event], n: int = 10) -> list[tuple[str, int]]:
    counts = Counter(
        f"{_fmt_cred(e.payload['username'])}/{_fmt_cred(e.payload['password'])}"
        for e in events
        if e.kind in CREDENTIAL_KINDS
    )
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:n]


def top_commands(events: Iterable[Event], n: int = 10) -> list[tuple[str, int]]:
    counts = Counter(e.payload["input"] for e in events if e.kind is EventKind.COMMAND)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:n]


def load_malware_rules(path: str | os.PathLike | None = None) -> list[tuple[str, str]]:
    if path is None:
        raw = json.loads(resources.files("honeyeco.data").joinpath("malware_rules.json").read_text("utf-8"))
    else:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    return [(r["pattern"], r["category"]) for r in raw]


def categorize_url(url: str, rules: Sequence[tuple[str, str]]) -> str:
    low = url.lower()
    for pattern, category in rules:
        if pattern.lower() in low:
            return category
    return "Others"


def http_summary(events: Iterable[Event]) -> dict:
    methods: Counter = Counter()
    attacks: Counter = Counter()
    for e in events:
        if e.kind is EventKind.HTTP_REQUEST:
            methods[e.payload["method"]] += 1
            if e.payload.get("attack_type"):
                attacks[e.payload["attack_type"]] += 1
    return {
        "methods": dict(sorted(methods.items())),
        "attack_types": dict(sorted(attacks.items(), key=lambda kv: (-kv[1], kv[0]))),
    }


@dataclass
class Report:
    groups: list[dict]
    machine: GoalStateMachine
    credentials: list[tuple[str, int]]
    commands: list[tuple[str, int]]
    downloads: list[dict]
    http: dict

    def to_json(self) -> dict:
        return {
            "groups": self.groups,
            "state_machine": self.machine.to_json(),
            "top_credentials": [{"credential": c, "count": n} for c, n in self.credentials],
            "top_commands": [{"command": c, "count": n} for c, n in self.commands],
            "downloads": self.downloads,
            "http": self.http,
        }

    def groups_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pattern_id", "clusters", "supporter_count", "goals"])
        for g in self.groups:
            w.writerow([g["id"], " ".join(map(str, g["clusters"])), g["supporter_count"], " -> ".join(g["goals"])])
        return buf.getvalue()

    def text(self) -> str:
        out = [f"Groups: {len(self.groups)}"]
        for g in self.groups:
            out.append(
                f"  group {g['id']}: {len(g['clusters'])} clusters, {g['supporter_count']} actors, "
                f"goals {' -> '.join(g['goals']) or '-'}"
            )
        out.append(f"State machine: {len(self.machine.states)} states, {len(self.machine.edges)} edges")
        for (a, b), n in sorted(self.machine.edges.items()):
            out.append(f"  {a} -> {b} (support {n})")
        out.append("Top username/password combinations:")
        out.extend(f"  {c:<30} {n}" for c, n in self.credentials)
        out.append("Top commands:")
        out.extend(f"  {c:<50} {n}" for c, n in self.commands)
        if self.http["methods"]:
            total = sum(self.http["methods"].values())
            out.append("HTTP methods:")
            out.extend(f"  {m:<8} {n} ({100.0 * n / total:.1f}%)" for m, n in self.http["methods"].items())
        return "\n".join(out) + "\n"


def build_report(
    patterns: Sequence[Pattern],
    goal_sequences: Sequence[Sequence[str]],
    machine: GoalStateMachine,
    events: Sequence[Event],
    goal_rules: GoalRules | None = None,
    enrichment: Mapping[str, str] | None = None,
    malware_rules: Sequence[tuple[str, str]] | None = None,
) -> Report:
    enrichment = enrichment or {}
    malware_rules = load_malware_rules() if malware_rules is None else malware_rules
    groups = []
    for i, (p, goals) in enumerate(zip(patterns, goal_sequences)):
        supporters = sorted(p.supporters)
        reputation = Counter(enrichment.get(ip, "unknown") for ip in supporters)
        groups.append(
            {
                "id": i,
                "clusters": sorted(p.clusters),
                "supporter_count": len(supporters),
                "supporters": supporters,
                "goals": list(goals),
                "goal_categories": [goal_rules.category_of(g) for g in goals] if goal_rules else [],
                "reputation": dict(sorted(reputation.items())),
            }
        )
    urls = Counter(e.payload["url"] for e in events if e.kind is EventKind.DOWNLOAD_ATTEMPT)
    downloads = [
        {"url": u, "count": n, "category": categorize_url(u, malware_rules)}
        for u, n in sorted(urls.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    return Report(groups, machine, top_credentials(events), top_commands(events), downloads, http_summary(events))


def write_report(report: Report, out_dir: str | os.PathLike) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "report.json": json.dumps(report.to_json(), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        "groups.csv": report.groups_csv(),
        "statemachine.dot": report.machine.to_dot(),
        "statemachine.json": json.dumps(report.machine.to_json(), indent=2, sort_keys=True) + "\n",
        "report.txt": report.text(),
    }
    written = {}
    for name, text in files.items():
        path = out / name
        path.write_text(text, encoding="utf-8")
        written[name] = path
    return written
