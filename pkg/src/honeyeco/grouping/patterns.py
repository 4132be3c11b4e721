"""Shared-cluster behavioral patterns across actors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from ..analytics.gmm import ClusterAssignment
from ..events import Actor


@dataclass(frozen=True)
class ActorProfile:
    ip: str
    clusters: frozenset[int]


@dataclass(frozen=True)
class Pattern:
    clusters: frozenset[int]
    supporters: frozenset[str]

    def sort_key(self):
        return (-len(self.clusters), sorted(self.clusters))


class UnassignedCommandError(KeyError):
    pass


def build_profiles(assignment: ClusterAssignment, actors: Mapping[str, Actor]) -> list[ActorProfile]:
    """One profile per actor with at least one command, ordered by IP string."""
    profiles = []
    for ip in sorted(actors):
        clusters = set()
        for command in actors[ip].commands:
            if not command.strip():
                continue
            if command not in assignment:
                raise UnassignedCommandError(f"command has no cluster assignment: {command!r}")
            clusters.add(assignment.cluster_of(command))
        if clusters:
            profiles.append(ActorProfile(ip, frozenset(clusters)))
    return profiles


def mine_patterns(
    profiles: Iterable[ActorProfile], min_actors: int = 3, min_clusters: int = 10
) -> list[Pattern]:
    """Patterns from pairwise profile intersections.

    A candidate is the cluster overlap of two actors; it is kept when it has
    at least ``min_clusters`` clusters and at least ``min_actors`` actors
    whose profiles contain it. A kept pattern is dropped when another kept
    pattern strictly contains it with the same supporters.
    """
    if min_actors < 1 or min_clusters < 1:
        raise ValueError("thresholds must be >= 1")
    profiles = sorted(profiles, key=lambda p: p.ip)
    candidates: set[frozenset[int]] = set()
    for i, a in enumerate(profiles):
        for b in profiles[i + 1:]:
            common = a.clusters & b.clusters
            if len(common) >= min_clusters:
                candidates.add(common)

    kept: dict[frozenset[int], frozenset[str]] = {}
    for cand in candidates:
        supporters = frozenset(p.ip for p in profiles if cand <= p.clusters)
        if len(supporters) >= min_actors:
            kept[cand] = supporters

    patterns = [
        Pattern(c, s)
        for c, s in kept.items()
        if not any(s2 == s and c < c2 for c2, s2 in kept.items())
    ]
    patterns.sort(key=Pattern.sort_key)
    return patterns
