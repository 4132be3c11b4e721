"""Batch analysis: events -> clusters -> groups -> goal state machine."""

from __future__ import annotations

import hashlib
import json
import os
import platform
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import __version__
from .analytics import (
    DEFAULT_K_RANGE,
    TOKENIZER_VERSION,
    ClusterAssignment,
    ClusterResult,
    cluster_commands,
    load_rules,
    write_assignment,
)
from .events import Event, EventKind, build_actor_index, format_ts, load_events, sessionize, utcnow
from .grouping import (
    GoalRules,
    Report,
    build_profiles,
    build_report,
    build_state_machine,
    load_goal_rules,
    map_goals,
    mine_patterns,
    write_report,
)


def command_corpus(events: Sequence[Event]) -> list[str]:
    """Distinct command lines, sorted, so clustering does not depend on how
    concurrent sessions interleaved in the log."""
    return sorted({e.payload["input"] for e in events if e.kind is EventKind.COMMAND})


def read_commands(path: str | os.PathLike, dialect: str = "native") -> list[str]:
    """Commands from an event log (``.jsonl``/``.json``) or a plain text file
    with one command per line."""
    if str(path).endswith((".jsonl", ".json")):
        return command_corpus(load_events(path, dialect).events)
    with open(path, encoding="utf-8") as fh:
        return sorted({line.rstrip("\n") for line in fh if line.strip()})


def group_actors(
    assignment: ClusterAssignment,
    objectives: Mapping[int, Sequence[str]],
    events: Sequence[Event],
    min_actors: int = 3,
    min_clusters: int = 10,
    goal_rules: GoalRules | None = None,
    enrichment: Mapping[str, str] | None = None,
) -> Report:
    goal_rules = goal_rules or load_goal_rules()
    actors = build_actor_index(sessionize(events))
    profiles = build_profiles(assignment, actors)
    patterns = mine_patterns(profiles, min_actors, min_clusters) if profiles else []
    sequences = [map_goals(p.clusters, objectives, goal_rules) for p in patterns]
    machine = build_state_machine(sequences)
    return build_report(patterns, sequences, machine, events, goal_rules, enrichment)


def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def run_pipeline(
    events_path: str | os.PathLike,
    out_dir: str | os.PathLike,
    seed: int,
    k: int | str = "auto",
    k_range: Sequence[int] = DEFAULT_K_RANGE,
    dialect: str = "native",
    rules_path: str | os.PathLike | None = None,
    goals_path: str | os.PathLike | None = None,
    min_actors: int = 3,
    min_clusters: int = 10,
    enrichment: Mapping[str, str] | None = None,
    n_init: int = 4,
    tol: float = 1e-6,
    max_iter: int = 500,
    feature_mode: str = "similarity",
) -> dict[str, Any]:
    """Ingest, cluster, group and report into ``out_dir``.

    Everything except ``run_manifest.json`` is a pure function of the inputs
    and the seed; the manifest carries input hashes, versions and times.
    """
    started = utcnow()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    loaded = load_events(events_path, dialect)
    events = loaded.events
    commands = command_corpus(events)
    if len(commands) < 2:
        raise ValueError(f"{events_path}: need at least 2 distinct commands to cluster, found {len(commands)}")
    rules = load_rules(rules_path)
    goal_rules = load_goal_rules(goals_path)
    result: ClusterResult = cluster_commands(
        commands, k, seed, rules, feature_mode=feature_mode, k_range=k_range,
        n_init=n_init, tol=tol, max_iter=max_iter,
    )
    write_assignment(out / "assignment.jsonl", result)
    report = group_actors(result.assignment, result.objectives, events, min_actors, min_clusters,
                          goal_rules, enrichment)
    written = write_report(report, out)

    inputs = {"events": {"path": str(events_path), "sha256": sha256_file(events_path)}}
    for name, p in (("rules", rules_path), ("goals", goals_path)):
        if p:
            inputs[name] = {"path": str(p), "sha256": sha256_file(p)}
    manifest = {
        "inputs": inputs,
        "dialect": dialect,
        "seed": seed,
        "k_requested": k,
        "k_selected": result.assignment.k,
        "k_scores": {str(kk): v for kk, v in sorted(result.k_scores.items())},
        "min_actors": min_actors,
        "min_clusters": min_clusters,
        "feature_mode": feature_mode,
        "tokenizer_version": TOKENIZER_VERSION,
        "versions": {
            "honeyeco": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "events_loaded": len(events),
        "events_skipped": dict(sorted(loaded.reasons.items())),
        "distinct_commands": len(commands),
        "groups": len(report.groups),
        "outputs": sorted(["assignment.jsonl", *written]),
        "started": format_ts(started),
        "finished": format_ts(utcnow()),
    }
    (out / "run_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest
