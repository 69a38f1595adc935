"""Making AMRs from two languages comparable before Smatch.

Pipeline order in :func:`prepare_pair` is fixed: translate roles of the
non-English graph, tag repeated concepts on both sides, project the
non-English concepts through the word alignment, strip the tags, then
normalize every concept and constant.
"""

from __future__ import annotations

import logging
import re
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .align import AlignmentSet
from .penman import AmrGraph
from .smatch import ConceptMatch, exact_match

__all__ = [
    "RoleTable",
    "TokenizationMismatch",
    "PrepareOptions",
    "normalize_label",
    "tag_repeats",
    "strip_tags",
    "translate_roles",
    "project_concepts",
    "prepare_pair",
    "levenshtein",
    "fuzzy_match",
    "MIN_PREFIX",
    "FUZZY_THRESHOLD",
]

log = logging.getLogger(__name__)

MIN_PREFIX = 4
FUZZY_THRESHOLD = 0.75

# a sense suffix must follow a letter, so dates and negative numbers survive
_SENSE_RE = re.compile(r"(?<=[^\W\d_])(?:-[0-9]+)+$")
_TAG_RE = re.compile(r"~[0-9]+$")


class TokenizationMismatch(ValueError):
    pass


def normalize_label(label: str) -> str:
    """Case-fold, NFC-compose, drop surrounding quotes and a sense suffix.

    >>> normalize_label('scout-02'), normalize_label('"Europe"')
    ('scout', 'europe')
    """
    text = unicodedata.normalize("NFC", label).strip('"')
    text = unicodedata.normalize("NFC", text.casefold())
    return _SENSE_RE.sub("", text)


def _base(label: str) -> str:
    return normalize_label(_TAG_RE.sub("", label))


def _rank(label: str) -> int:
    m = _TAG_RE.search(label)
    return int(m.group()[1:]) if m else 1


def tag_repeats(graph: AmrGraph) -> AmrGraph:
    """Suffix ``~1 .. ~k`` to concepts that occur on k > 1 variables.

    Labels are grouped after normalization and ranked in variable order.
    """
    groups = Counter(normalize_label(c) for c in graph.instances.values())
    seen: Counter = Counter()
    relabel = {}
    for var in graph.variables:
        concept = graph.instances[var]
        key = normalize_label(concept)
        if groups[key] > 1:
            seen[key] += 1
            relabel[var] = f"{concept}~{seen[key]}"
    return graph.with_concepts(relabel) if relabel else graph


def strip_tags(graph: AmrGraph) -> AmrGraph:
    relabel = {v: _TAG_RE.sub("", c) for v, c in graph.instances.items() if _TAG_RE.search(c)}
    return graph.with_concepts(relabel) if relabel else graph


class RoleTable:
    """Non-English role label -> English role label, identity for anything unknown."""

    def __init__(self, mapping: Optional[Mapping[str, str]] = None):
        self.mapping = {k.lstrip(":"): v.lstrip(":") for k, v in (mapping or {}).items()}

    def __len__(self) -> int:
        return len(self.mapping)

    def __getitem__(self, role: str) -> str:
        return self.mapping.get(role, role)

    @classmethod
    def load(cls, path) -> "RoleTable":
        mapping = {}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise ValueError(f"{path}:{lineno}: expected 'source_role<TAB>english_role'")
            mapping[parts[0].strip()] = parts[1].strip()
        return cls(mapping)


def translate_roles(graph: AmrGraph, table: RoleTable) -> AmrGraph:
    if not len(table):
        return graph
    missing = sorted({e.role for e in graph.edges if e.role not in table.mapping})
    if missing:
        log.debug("roles without translation (kept as is): %s", ", ".join(missing))
    return graph.map_edges(role=lambda r: table[r])


def _common_prefix(a: str, b: str) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def _anchor_tokens(graph: AmrGraph, tokens: Sequence[str]) -> dict[str, int]:
    """Map variables to the sentence token their concept comes from.

    Exact match after normalization first, else the token sharing the
    longest common prefix of at least ``MIN_PREFIX`` characters.  A concept
    tagged ``~k`` takes the k-th matching token when there are that many.
    """
    norm = [normalize_label(t) for t in tokens]
    anchors = {}
    for var in graph.variables:
        label = graph.instances[var]
        base = _base(label)
        hits = [i for i, t in enumerate(norm) if t == base]
        if not hits:
            best = max((_common_prefix(base, t) for t in norm), default=0)
            if best >= MIN_PREFIX:
                hits = [i for i, t in enumerate(norm) if _common_prefix(base, t) == best]
        if hits:
            anchors[var] = hits[min(_rank(label), len(hits)) - 1]
    return anchors


def project_concepts(graph: AmrGraph, align: AlignmentSet, direction: str = "source",
                     target_graph: Optional[AmrGraph] = None) -> AmrGraph:
    """Relabel concepts of ``graph`` with their aligned counterparts.

    ``direction`` names the side of ``align`` that ``graph``'s sentence is
    on.  Each concept is anchored to a token of that side; if the token has
    links, the lowest-index linked token on the other side is taken.  When
    ``target_graph`` is given and one of its concepts anchors to that token,
    the concept label is copied over; otherwise the normalized token is used.
    Concepts without an anchor or a link keep their label.
    """
    if direction not in ("source", "target"):
        raise ValueError("direction must be 'source' or 'target'")
    if direction == "target":
        align = align.reversed()
    align.validate()
    tokens = graph.metadata.tokens()
    if tokens is not None and list(tokens) != list(align.source_tokens):
        raise TokenizationMismatch(
            f"graph tokens {tokens!r} differ from alignment tokens {list(align.source_tokens)!r}")
    if not align.links:
        return graph

    target_concepts: dict[int, str] = {}
    if target_graph is not None:
        for var, tok in _anchor_tokens(target_graph, align.target_tokens).items():
            target_concepts.setdefault(tok, target_graph.instances[var])

    linked = defaultdict(list)
    for i, j in sorted(align.links):
        linked[i].append(j)

    anchors = _anchor_tokens(graph, align.source_tokens)
    relabel = {}
    for var in graph.variables:
        concept = graph.instances[var]
        tok = anchors.get(var)
        if tok is None:
            log.debug("%s (%s): no matching token; label kept", var, concept)
        elif tok not in linked:
            log.debug("%s (%s): token %r is unaligned; label kept",
                      var, concept, align.source_tokens[tok])
        else:
            j = linked[tok][0]
            relabel[var] = target_concepts.get(j, normalize_label(align.target_tokens[j]))
    return graph.with_concepts(relabel)


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def fuzzy_match(a: str, b: str, threshold: float = FUZZY_THRESHOLD) -> bool:
    """Equal, or normalized Levenshtein similarity of at least ``threshold``."""
    if a == b:
        return True
    longest = max(len(a), len(b))
    return 1 - levenshtein(a, b) / longest >= threshold


@dataclass(frozen=True)
class PrepareOptions:
    monolingual: bool = False
    fuzzy: bool = False


def _normalize_graph(graph: AmrGraph) -> AmrGraph:
    graph = graph.with_concepts({v: normalize_label(c) for v, c in graph.instances.items()})
    return graph.map_edges(constant=normalize_label)


def prepare_pair(g_en: AmrGraph, g_xx: AmrGraph, align: Optional[AlignmentSet] = None,
                 table: Optional[RoleTable] = None,
                 options: PrepareOptions = PrepareOptions()
                 ) -> tuple[AmrGraph, AmrGraph, ConceptMatch]:
    """Prepare an English graph and a graph in another language for scoring.

    ``align`` has the non-English sentence on its source side.  In
    monolingual mode role translation and projection are skipped.
    """
    lang = (g_xx.metadata.lang or "").lower()
    if not options.monolingual and lang in ("en", "eng", "english"):
        raise ValueError("second graph is English; use monolingual mode")
    if not options.monolingual and table is not None:
        g_xx = translate_roles(g_xx, table)
    g_en, g_xx = tag_repeats(g_en), tag_repeats(g_xx)
    if not options.monolingual and align is not None:
        g_xx = project_concepts(g_xx, align, "source", target_graph=g_en)
    g_en, g_xx = strip_tags(g_en), strip_tags(g_xx)
    g_en, g_xx = _normalize_graph(g_en), _normalize_graph(g_xx)
    return g_en, g_xx, (fuzzy_match if options.fuzzy else exact_match)
