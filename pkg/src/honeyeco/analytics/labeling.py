"""Rule-based objective labels for command clusters."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources
from typing import Iterable

from .gmm import ClusterAssignment
from .similarity import tokenize

UNLABELED = "Unlabeled"


@dataclass(frozen=True)
class ObjectiveRule:
    pattern: str
    objective: str
    match: str = "substring"  # or "token"

    def matches(self, command: str) -> bool:
        if self.match == "token":
            return self.pattern in command.split()
        return self.pattern in command


def load_rules(path: str | os.PathLike | None = None) -> list[ObjectiveRule]:
    """Load ``[{pattern, objective, match?}]``; ``None`` loads the shipped rules."""
    try:
        if path is None:
            text = resources.files("honeyeco.data").joinpath("objective_rules.json").read_text("utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        raw = json.loads(text)
    except (OSError, ValueError) as exc:
        raise ValueError(f"cannot read objective rules {path or '<builtin>'}: {exc}") from exc
    rules = []
    for entry in raw:
        match = entry.get("match", "substring")
        if match not in ("substring", "token"):
            raise ValueError(f"rule {entry!r}: match must be 'substring' or 'token'")
        rules.append(ObjectiveRule(entry["pattern"], entry["objective"], match))
    return rules


def command_objectives(command: str, rules: Iterable[ObjectiveRule]) -> set[str]:
    return {r.objective for r in rules if r.matches(command)}


def label_clusters(
    assignment: ClusterAssignment, rules: Iterable[ObjectiveRule]
) -> dict[int, list[str]]:
    """Objective set per cluster id: the union of objectives triggered by its
    member commands, or ``["Unlabeled"]``. Every id in ``[0, K)`` is present."""
    rules = list(rules)
    labels: dict[int, set[str]] = {k: set() for k in range(assignment.k)}
    for command, cluster in zip(assignment.commands, assignment.labels):
        labels[cluster] |= command_objectives(command, rules)
    return {k: sorted(v) if v else [UNLABELED] for k, v in labels.items()}
