"""Objective -> goal mapping and the goal transition graph."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

from ..analytics.labeling import UNLABELED


@dataclass(frozen=True)
class GoalRule:
    goal: str
    rank: int
    category: str
    parent: str | None = None


@dataclass
class GoalRules:
    by_objective: dict[str, GoalRule]
    fallback: GoalRule

    def rule_for(self, objective: str) -> GoalRule:
        if objective == UNLABELED:
            return self.fallback
        return self.by_objective.get(objective, self.fallback)

    def rank_of(self, goal: str) -> int:
        ranks = [r.rank for r in self.by_objective.values() if r.goal == goal]
        if goal == self.fallback.goal:
            ranks.append(self.fallback.rank)
        return min(ranks) if ranks else self.fallback.rank

    def category_of(self, goal: str) -> str:
        for r in self.by_objective.values():
            if r.goal == goal:
                return r.category
        return self.fallback.category

    @property
    def vocabulary(self) -> set[str]:
        goals = {r.goal for r in self.by_objective.values()} | {self.fallback.goal}
        return goals | {r.parent for r in self.by_objective.values() if r.parent}


def load_goal_rules(path: str | os.PathLike | None = None) -> GoalRules:
    if path is None:
        raw = json.loads(resources.files("honeyeco.data").joinpath("goal_rules.json").read_text("utf-8"))
    else:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    fb = raw.get("fallback", {"goal": "Miscellaneous", "rank": 90, "category": "Miscellaneous"})
    rules = {
        r["objective"]: GoalRule(r["goal"], int(r["rank"]), r.get("category", r["goal"]), r.get("parent"))
        for r in raw["rules"]
    }
    return GoalRules(rules, GoalRule(fb["goal"], int(fb["rank"]), fb.get("category", fb["goal"])))


def map_goals(
    clusters: Iterable[int],
    cluster_objectives: Mapping[int, Sequence[str]],
    rules: GoalRules,
    observed_order: Mapping[str, int] | None = None,
) -> list[str]:
    """Ordered, de-duplicated goal sequence implied by a set of clusters.

    A goal with a parent (System Intelligence under Fingerprinting) is a
    refinement: it is emitted after its parent when some later-ranked goal
    follows it, and otherwise rolls up into the parent alone. Goals are
    ordered by static rank unless ``observed_order`` (goal -> first position
    seen within a session) is given, which then takes precedence.
    """
    hits: dict[str, GoalRule] = {}
    for c in clusters:
        for obj in cluster_objectives.get(c) or [UNLABELED]:
            rule = rules.rule_for(obj)
            hits.setdefault(rule.goal, rule)

    top_rank = max((r.rank for r in hits.values()), default=0)
    goals: dict[str, int] = {}
    for goal, rule in hits.items():
        if rule.parent is None:
            goals[goal] = rule.rank
            continue
        goals.setdefault(rule.parent, rules.rank_of(rule.parent))
        if top_rank > rule.rank:
            goals[goal] = rule.rank

    if observed_order:
        pos = dict(observed_order)
        for goal, rule in hits.items():
            if rule.parent and goal in pos:
                pos[rule.parent] = min(pos.get(rule.parent, math.inf), pos[goal])

        def key(g):
            return (pos.get(g, math.inf), goals[g], g)
    else:
        def key(g):
            return (goals[g], g)
    return sorted(goals, key=key)


@dataclass
class GoalStateMachine:
    states: list[str] = field(default_factory=list)
    edges: dict[tuple[str, str], int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "states": self.states,
            "edges": [{"from": a, "to": b, "support": n} for (a, b), n in sorted(self.edges.items())],
        }

    def to_dot(self) -> str:
        lines = ["digraph goals {", "  rankdir=LR;"]
        for s in self.states:
            lines.append(f'  "{s}";')
        for (a, b), n in sorted(self.edges.items()):
            lines.append(f'  "{a}" -> "{b}" [label="{n}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_state_machine(sequences: Iterable[Sequence[str]]) -> GoalStateMachine:
    """Edges between consecutive goals; support counts groups, so a group
    repeating a transition contributes once."""
    states: dict[str, None] = {}
    edges: dict[tuple[str, str], int] = {}
    for seq in sequences:
        for g in seq:
            states.setdefault(g, None)
        for edge in {(a, b) for a, b in zip(seq, seq[1:]) if a != b}:
            edges[edge] = edges.get(edge, 0) + 1
    return GoalStateMachine(sorted(states), edges)
