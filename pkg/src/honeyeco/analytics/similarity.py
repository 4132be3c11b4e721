"""Whitespace tokenizer, token-count vectors and cosine similarity."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Bump when tokenization changes; recorded in run manifests.
TOKENIZER_VERSION = "ws-1"


class EmptyCommandError(ValueError):
    pass


def tokenize(command: str) -> list[str]:
    """Split on runs of whitespace. Tokens are kept verbatim, so pipes,
    flags and URLs are tokens of their own and case is preserved."""
    tokens = command.split()
    if not tokens:
        raise EmptyCommandError(f"blank command: {command!r}")
    return tokens


@dataclass(frozen=True)
class TokenVector:
    command: str
    counts: Counter

    @classmethod
    def of(cls, command: str) -> "TokenVector":
        return cls(command, Counter(tokenize(command)))

    @property
    def norm(self) -> float:
        return math.sqrt(sum(c * c for c in self.counts.values()))


def cosine(a: TokenVector, b: TokenVector) -> float:
    if not a.counts or not b.counts:
        raise EmptyCommandError("cosine of an empty token vector is undefined")
    small, large = (a.counts, b.counts) if len(a.counts) <= len(b.counts) else (b.counts, a.counts)
    dot = sum(c * large.get(tok, 0) for tok, c in small.items())
    sim = dot / (a.norm * b.norm)
    # guards the identity case against the last-ulp rounding of sqrt products
    return min(1.0, sim)


def unique_commands(commands: Sequence[str]) -> list[str]:
    """Deduplicate in first-seen order, dropping blank commands."""
    seen: dict[str, None] = {}
    for c in commands:
        if c.strip() and c not in seen:
            seen[c] = None
    return list(seen)


def count_matrix(commands: Sequence[str]) -> tuple[np.ndarray, list[str]]:
    """Row i = token counts of command i over the corpus vocabulary
    (vocabulary in first-seen order)."""
    vocab: dict[str, int] = {}
    rows = []
    for c in commands:
        counts = Counter(tokenize(c))
        for tok in counts:
            vocab.setdefault(tok, len(vocab))
        rows.append(counts)
    m = np.zeros((len(commands), len(vocab)))
    for i, counts in enumerate(rows):
        for tok, n in counts.items():
            m[i, vocab[tok]] = n
    return m, list(vocab)


def similarity_matrix(commands: Sequence[str]) -> np.ndarray:
    counts, _ = count_matrix(commands)
    norms = np.sqrt((counts * counts).sum(axis=1))
    sim = (counts @ counts.T) / np.outer(norms, norms)
    np.clip(sim, 0.0, 1.0, out=sim)
    np.fill_diagonal(sim, 1.0)
    # exact symmetry regardless of BLAS summation order
    return (sim + sim.T) / 2.0


FEATURE_MODES = ("similarity", "counts")


def build_features(commands: Sequence[str], mode: str = "similarity") -> np.ndarray:
    """Feature rows for GMM clustering of a deduplicated command corpus.

    ``similarity``: row i is the cosine similarity of command i to every
    command in the corpus. ``counts``: raw token-count rows.
    """
    if len(commands) < 2:
        raise ValueError(f"need at least 2 unique commands to cluster, got {len(commands)}")
    if len(set(commands)) != len(commands):
        raise ValueError("command corpus must be deduplicated")
    if mode == "similarity":
        return similarity_matrix(commands)
    if mode == "counts":
        return count_matrix(commands)[0]
    raise ValueError(f"unknown feature mode {mode!r}; expected one of {FEATURE_MODES}")
