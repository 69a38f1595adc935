"""Scoring sentence pairs end to end: prepare, match, classify."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional, Sequence

from .align import AlignmentSet
from .divergence import BINARY, Gold, Label, ScoredPair, Threshold, classify
from .penman import AmrGraph
from .smatch import exact_match, oracle_feasible, score, score_exact
from .xlingual import PrepareOptions, RoleTable, fuzzy_match, prepare_pair

__all__ = ["RunConfig", "CountMismatch", "pair_seed", "score_pair", "pair_graphs"]


class CountMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    restarts: int = 4
    seed: int = 0
    mode: str = "binary"  # binary | threshold | continuous
    threshold: float = 1.0
    fuzzy: bool = False
    oracle: bool = False
    monolingual: bool = False
    raw: bool = False  # score the graphs as parsed, with no preparation
    gold_interpretation: str = "strict"

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.mode not in ("binary", "threshold", "continuous"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")

    def classify(self, s) -> Optional[Label]:
        if self.mode == "binary":
            return classify(s, BINARY)
        if self.mode == "threshold":
            return classify(s, Threshold(self.threshold))
        return None


def pair_seed(seed: int, index: int) -> int:
    """Per-pair seed derived from the run seed and the pair's position."""
    digest = hashlib.sha256(f"{seed}/{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def score_pair(pair_id: str, index: int, g_en: AmrGraph, g_xx: AmrGraph,
               align: Optional[AlignmentSet], table: Optional[RoleTable],
               config: RunConfig, gold: Gold = Gold.UNKNOWN,
               keep_graphs: bool = False) -> ScoredPair:
    if config.raw:
        a, b, match = g_en, g_xx, (fuzzy_match if config.fuzzy else exact_match)
    else:
        a, b, match = prepare_pair(g_en, g_xx, align, table,
                                   PrepareOptions(monolingual=config.monolingual,
                                                  fuzzy=config.fuzzy))
    if config.oracle and oracle_feasible(len(a.variables), len(b.variables)):
        result = score_exact(a, b, match)
    else:
        result = score(a, b, config.restarts, pair_seed(config.seed, index), match)
    mode = None if config.mode == "continuous" else (
        BINARY if config.mode == "binary" else Threshold(config.threshold))
    return ScoredPair(pair_id, result, config.classify(result), gold, mode,
                      g_en.metadata.snt, g_xx.metadata.snt, (a, b) if keep_graphs else None)


def pair_graphs(left: Sequence, right: Sequence, ids_left: Sequence[Optional[str]],
                ids_right: Sequence[Optional[str]]) -> list[tuple[int, int]]:
    """Index pairs matching two record lists.

    Records pair by ``::id`` when every record on both sides has one,
    otherwise by position.
    """
    if len(left) != len(right):
        raise CountMismatch(f"{len(left)} records vs {len(right)} records")
    if all(ids_left) and all(ids_right):
        where = {k: j for j, k in enumerate(ids_right)}
        if set(where) != set(ids_left) or len(where) != len(ids_right):
            raise CountMismatch("record ids differ between the two files")
        return [(i, where[k]) for i, k in enumerate(ids_left)]
    return [(i, i) for i in range(len(left))]
