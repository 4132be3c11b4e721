"""Command clustering: tokenize, cosine features, GMM, objective labels."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Sequence

from .gmm import ClusterAssignment, GmmError, GmmModel, assign, fit_gmm, select_k
from .labeling import ObjectiveRule, command_objectives, label_clusters, load_rules
from .similarity import (
    TOKENIZER_VERSION,
    EmptyCommandError,
    TokenVector,
    build_features,
    cosine,
    similarity_matrix,
    tokenize,
    unique_commands,
)

DEFAULT_K_RANGE = range(1, 11)
# Floor used only while choosing K. At 1e-6, feature dimensions that are
# exactly constant inside a sub-cluster reward spurious splits under BIC.
SELECTION_VARIANCE_FLOOR = 1e-3


@dataclass
class ClusterResult:
    assignment: ClusterAssignment
    objectives: dict[int, list[str]]
    model: GmmModel
    k_scores: dict[int, float]

    def records(self) -> list[dict]:
        return [
            {"command": c, "cluster": lab, "objectives": self.objectives[lab]}
            for c, lab in zip(self.assignment.commands, self.assignment.labels)
        ]


def cluster_commands(
    commands: Sequence[str],
    k: int | str,
    seed: int,
    rules: Sequence[ObjectiveRule],
    feature_mode: str = "similarity",
    k_range: Sequence[int] | None = None,
    n_init: int = 4,
    tol: float = 1e-6,
    max_iter: int = 500,
    selection_floor: float = SELECTION_VARIANCE_FLOOR,
) -> ClusterResult:
    """Deduplicate, featurize, choose K (``"auto"`` = BIC over ``k_range``,
    scored with ``selection_floor``), fit at the standard floor, harden and
    label."""
    corpus = unique_commands(commands)
    features = build_features(corpus, feature_mode)
    k_scores: dict[int, float] = {}
    if k == "auto":
        rng_k = [kk for kk in (k_range or DEFAULT_K_RANGE) if kk <= len(corpus)]
        k, k_scores = select_k(features, rng_k, seed, n_init=n_init, tol=tol, max_iter=max_iter,
                               variance_floor=selection_floor)
    k = int(k)
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    model = fit_gmm(features, k, seed, tol=tol, max_iter=max_iter, n_init=n_init)
    assignment = assign(model, features, corpus)
    return ClusterResult(assignment, label_clusters(assignment, rules), model, k_scores)


def write_assignment(path: str | os.PathLike, result: ClusterResult) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in result.records():
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def read_assignment(path: str | os.PathLike) -> tuple[ClusterAssignment, dict[int, list[str]]]:
    commands, labels, objectives = [], [], {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            commands.append(rec["command"])
            labels.append(int(rec["cluster"]))
            objectives[int(rec["cluster"])] = list(rec["objectives"])
    k = max(labels) + 1 if labels else 0
    return ClusterAssignment(commands, labels, k), objectives


__all__ = [
    "DEFAULT_K_RANGE",
    "SELECTION_VARIANCE_FLOOR",
    "TOKENIZER_VERSION",
    "ClusterAssignment",
    "ClusterResult",
    "EmptyCommandError",
    "GmmError",
    "GmmModel",
    "ObjectiveRule",
    "TokenVector",
    "assign",
    "build_features",
    "cluster_commands",
    "command_objectives",
    "cosine",
    "fit_gmm",
    "label_clusters",
    "load_rules",
    "read_assignment",
    "select_k",
    "similarity_matrix",
    "tokenize",
    "unique_commands",
    "write_assignment",
]
