"""Semantic divergence detection by comparing AMR graphs across languages."""

from .divergence import BINARY, Gold, Label, Threshold, classify, pr_curve
from .penman import AmrGraph, extract_triples, parse_penman, serialize
from .smatch import SmatchScore, score, score_exact
from .xlingual import RoleTable, prepare_pair

__version__ = "0.1.0"

__all__ = [
    "AmrGraph",
    "BINARY",
    "Gold",
    "Label",
    "RoleTable",
    "SmatchScore",
    "Threshold",
    "classify",
    "extract_triples",
    "parse_penman",
    "pr_curve",
    "prepare_pair",
    "score",
    "score_exact",
    "serialize",
]
