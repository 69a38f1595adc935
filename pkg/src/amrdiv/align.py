"""Token alignments: Pharaoh-format I/O and a small EM-trained lexical aligner.

The aligner is a lexical translation model with a NULL source word, trained
by expectation-maximization from a uniform start.  An optional diagonal
preference weights source position ``i`` for target position ``j`` by
``exp(-w * |i/m - j/n|)`` (1-based positions; the NULL word gets weight 1).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "AlignmentSet",
    "LexiconModel",
    "MalformedLink",
    "IndexOutOfBounds",
    "EmptyCorpus",
    "NULL",
    "train",
    "align",
    "parse_pharaoh_line",
    "read_pharaoh",
    "write_pharaoh",
    "read_parallel_corpus",
    "read_alignment_file",
]

log = logging.getLogger(__name__)

NULL = "<null>"

Link = tuple[int, int]


class MalformedLink(ValueError):
    pass


class IndexOutOfBounds(ValueError):
    pass


class EmptyCorpus(ValueError):
    pass


@dataclass(frozen=True)
class AlignmentSet:
    source_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    links: frozenset[Link] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "source_tokens", tuple(self.source_tokens))
        object.__setattr__(self, "target_tokens", tuple(self.target_tokens))
        object.__setattr__(self, "links", frozenset(self.links))

    def validate(self) -> None:
        for i, j in self.links:
            if not (0 <= i < len(self.source_tokens)) or not (0 <= j < len(self.target_tokens)):
                raise IndexOutOfBounds(
                    f"link {i}-{j} outside {len(self.source_tokens)}x{len(self.target_tokens)} tokens")

    def sorted_links(self) -> list[Link]:
        return sorted(self.links)

    def targets_of(self, i: int) -> list[int]:
        return sorted(j for s, j in self.links if s == i)

    def sources_of(self, j: int) -> list[int]:
        return sorted(i for i, t in self.links if t == j)

    def reversed(self) -> "AlignmentSet":
        return AlignmentSet(self.target_tokens, self.source_tokens,
                            frozenset((j, i) for i, j in self.links))


_LINK_RE = re.compile(r"^(\d+)-(\d+)$")


def parse_pharaoh_line(line: str) -> list[Link]:
    links = []
    for item in line.split():
        m = _LINK_RE.match(item)
        if not m:
            raise MalformedLink(f"bad alignment link {item!r}")
        links.append((int(m.group(1)), int(m.group(2))))
    return sorted(set(links))


def read_pharaoh(text: str) -> list[list[Link]]:
    """One sorted link list per line."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        try:
            out.append(parse_pharaoh_line(line))
        except MalformedLink as exc:
            raise MalformedLink(f"line {lineno}: {exc}") from None
    return out


def write_pharaoh(links) -> str:
    """Format links (an AlignmentSet or iterable of pairs) as one Pharaoh line."""
    if isinstance(links, AlignmentSet):
        links = links.links
    return " ".join(f"{i}-{j}" for i, j in sorted(set(links)))


def read_parallel_corpus(path_or_lines) -> list[tuple[list[str], list[str]]]:
    """Read ``source tokens ||| target tokens`` lines."""
    if isinstance(path_or_lines, (str, Path)):
        lines = Path(path_or_lines).read_text(encoding="utf-8").splitlines()
    else:
        lines = list(path_or_lines)
    corpus = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split("|||")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'source ||| target'")
        corpus.append((parts[0].split(), parts[1].split()))
    return corpus


def read_alignment_file(path) -> list[tuple[Optional[tuple[list[str], list[str]]], list[Link]]]:
    """Read plain Pharaoh lines or ``source ||| target ||| links`` lines.

    Each entry is ``(tokens, links)`` where ``tokens`` is None for plain
    Pharaoh lines.
    """
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        try:
            if "|||" in line:
                parts = line.split("|||")
                if len(parts) != 3:
                    raise MalformedLink("expected 'source ||| target ||| links'")
                out.append(((parts[0].split(), parts[1].split()), parse_pharaoh_line(parts[2])))
            else:
                out.append((None, parse_pharaoh_line(line)))
        except MalformedLink as exc:
            raise MalformedLink(f"{path}:{lineno}: {exc}") from None
    return out


@dataclass
class LexiconModel:
    """Translation table ``t(target | source)``; row 0 is the NULL source."""

    source_vocab: dict[str, int]
    target_vocab: dict[str, int]
    table: np.ndarray
    diagonal_weight: float = 0.0
    iterations: int = 0
    corpus_size: int = 0
    log_likelihoods: list[float] = field(default_factory=list)

    def prob(self, target: str, source: str) -> float:
        """``t(target | source)``; unknown words fall back to uniform."""
        i = self.source_vocab.get(source)
        j = self.target_vocab.get(target)
        if i is None or j is None:
            return 1.0 / max(len(self.target_vocab), 1)
        return float(self.table[i, j])

    def best_target(self, source: str) -> Optional[str]:
        i = self.source_vocab.get(source)
        if i is None:
            return None
        inverse = {j: w for w, j in self.target_vocab.items()}
        return inverse[int(np.argmax(self.table[i]))]

    def _rows(self, source: Sequence[str]) -> np.ndarray:
        return np.array([0] + [self.source_vocab.get(s, -1) for s in source])

    def _probs(self, source: Sequence[str], target: Sequence[str]) -> np.ndarray:
        """(m+1) x n matrix of t(target_j | source_i), NULL first."""
        uniform = 1.0 / max(len(self.target_vocab), 1)
        rows = self._rows(source)
        cols = np.array([self.target_vocab.get(t, -1) for t in target])
        out = np.full((len(rows), len(cols)), uniform)
        known_r = rows >= 0
        known_c = cols >= 0
        out[np.ix_(known_r, known_c)] = self.table[np.ix_(rows[known_r], cols[known_c])]
        return out

    def log_likelihood(self, corpus: Iterable[tuple[Sequence[str], Sequence[str]]]) -> float:
        total = 0.0
        for src, tgt in corpus:
            prior = _prior(len(src), len(tgt), self.diagonal_weight)
            total += float(np.log((self._probs(src, tgt) * prior).sum(axis=0)).sum())
        return total


def _prior(m: int, n: int, weight: float) -> np.ndarray:
    """Alignment distribution p(i | j) over NULL + m source positions."""
    if weight == 0:
        return np.full((m + 1, n), 1.0 / (m + 1))
    i = np.arange(1, m + 1)[:, None] / m
    j = np.arange(1, n + 1)[None, :] / n
    w = np.vstack([np.ones((1, n)), np.exp(-weight * np.abs(i - j))])
    return w / w.sum(axis=0, keepdims=True)


def train(corpus: Sequence[tuple[Sequence[str], Sequence[str]]], iterations: int = 5,
          diagonal_weight: float = 0.0) -> LexiconModel:
    """Fit ``t(target | source)`` by EM from a uniform start.

    ``model.log_likelihoods`` holds the corpus log-likelihood before each
    iteration and after the last one.
    """
    corpus = [(list(s), list(t)) for s, t in corpus]
    if not corpus:
        raise EmptyCorpus("cannot train on an empty corpus")
    for k, (s, t) in enumerate(corpus):
        if not s or not t:
            raise EmptyCorpus(f"sentence pair {k} has an empty side")
    src_vocab = {NULL: 0}
    tgt_vocab: dict[str, int] = {}
    for s, t in corpus:
        for w in s:
            src_vocab.setdefault(w, len(src_vocab))
        for w in t:
            tgt_vocab.setdefault(w, len(tgt_vocab))
    table = np.full((len(src_vocab), len(tgt_vocab)), 1.0 / len(tgt_vocab))
    model = LexiconModel(src_vocab, tgt_vocab, table, diagonal_weight, 0, len(corpus))

    indexed = [(np.array([0] + [src_vocab[w] for w in s]), np.array([tgt_vocab[w] for w in t]),
                _prior(len(s), len(t), diagonal_weight)) for s, t in corpus]
    for _ in range(iterations):
        counts = np.zeros_like(model.table)
        ll = 0.0
        for rows, cols, prior in indexed:
            joint = model.table[np.ix_(rows, cols)] * prior
            marginal = joint.sum(axis=0)
            ll += float(np.log(marginal).sum())
            np.add.at(counts, (rows[:, None], cols[None, :]), joint / marginal)
        model.log_likelihoods.append(ll)
        model.table = counts / counts.sum(axis=1, keepdims=True)
        model.iterations += 1
        log.debug("EM iteration %d: log-likelihood %.6f", model.iterations, ll)
    model.log_likelihoods.append(model.log_likelihood(corpus))
    return model


def align(model: LexiconModel, source: Sequence[str], target: Sequence[str]) -> AlignmentSet:
    """Link each target word to its most probable source word.

    NULL is candidate 0, so it wins ties and unknown target words stay
    unlinked.
    """
    if not source or not target:
        raise ValueError("token lists must be non-empty")
    scores = model._probs(source, target) * _prior(len(source), len(target),
                                                   model.diagonal_weight)
    best = np.argmax(scores, axis=0)  # first maximum: lowest source index
    links = frozenset((int(i) - 1, j) for j, i in enumerate(best) if i > 0)
    return AlignmentSet(tuple(source), tuple(target), links)

