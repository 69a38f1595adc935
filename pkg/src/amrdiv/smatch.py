"""Smatch: best triple overlap between two AMR graphs under an injective
variable mapping.

Two independent routes compute the matched-triple count:

* :class:`_Counter` evaluates a complete mapping straight from the triple
  definitions.  :func:`matched_triples` and the exhaustive :func:`score_exact`
  use it.
* :class:`_Weights` precomputes per-pair gains for the hill-climbing search in
  :func:`score`.
"""

from __future__ import annotations

import itertools
import math
import random
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from .penman import AmrGraph, EmptyGraph

__all__ = [
    "ConceptMatch",
    "exact_match",
    "SmatchScore",
    "MappingNotInjective",
    "GraphTooLarge",
    "matched_triples",
    "triple_count",
    "score",
    "score_exact",
    "ORACLE_CAP",
    "oracle_feasible",
]

ConceptMatch = Callable[[str, str], bool]

ORACLE_CAP = 8

UNMAPPED = -1


def exact_match(a: str, b: str) -> bool:
    return a == b


class MappingNotInjective(ValueError):
    pass


class GraphTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SmatchScore:
    matched: int
    total_left: int
    total_right: int
    best_mapping: Mapping[str, str] = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return self.total_left == 0 or self.total_right == 0

    def _check(self) -> bool:
        if self.degenerate:
            warnings.warn("Smatch on an empty triple set; scoring as 0", RuntimeWarning,
                          stacklevel=3)
            return False
        return True

    @property
    def precision(self) -> float:
        return self.matched / self.total_left if self._check() else 0.0

    @property
    def recall(self) -> float:
        return self.matched / self.total_right if self._check() else 0.0

    @property
    def f1(self) -> float:
        return 2 * self.matched / (self.total_left + self.total_right) if self._check() else 0.0

    @property
    def is_perfect(self) -> bool:
        """True iff every triple on both sides is matched (integer test)."""
        return not self.degenerate and self.matched == self.total_left == self.total_right


def triple_count(graph: AmrGraph) -> int:
    return len(graph.variables) + 1 + len(graph.edges)


def _max_pairing(left: Sequence[str], right: Sequence[str], ok: ConceptMatch) -> int:
    """Size of a maximum one-to-one pairing of ``left`` with ``right`` items."""
    if not left or not right:
        return 0
    owner: dict[int, int] = {}

    def augment(i: int, seen: set) -> bool:
        for j, b in enumerate(right):
            if j in seen or not ok(left[i], b):
                continue
            seen.add(j)
            if j not in owner or augment(owner[j], seen):
                owner[j] = i
                return True
        return False

    return sum(augment(i, set()) for i in range(len(left)))


class _Pair:
    """Index-based view of a graph pair shared by both routes."""

    def __init__(self, g1: AmrGraph, g2: AmrGraph, concept_match: ConceptMatch):
        for g in (g1, g2):
            if not g.variables:
                raise EmptyGraph("cannot score a graph with no variables")
        self.g1, self.g2 = g1, g2
        self.match = concept_match
        self.vars1 = list(g1.variables)
        self.vars2 = list(g2.variables)
        self.idx1 = {v: i for i, v in enumerate(self.vars1)}
        self.idx2 = {v: j for j, v in enumerate(self.vars2)}
        self.concepts1 = [g1.instances[v] for v in self.vars1]
        self.concepts2 = [g2.instances[v] for v in self.vars2]
        self.root1 = self.idx1[g1.root]
        self.root2 = self.idx2[g2.root]
        self.attrs1 = self._attributes(g1, self.idx1)
        self.attrs2 = self._attributes(g2, self.idx2)
        self.rels1 = [(self.idx1[s], r, self.idx1[t]) for s, r, t in g1.relations]
        self.rels2 = [(self.idx2[s], r, self.idx2[t]) for s, r, t in g2.relations]
        self.total1 = triple_count(g1)
        self.total2 = triple_count(g2)
        self._attr_cache: dict[tuple[int, int], int] = {}

    @staticmethod
    def _attributes(g, idx) -> dict[int, dict[str, list[str]]]:
        out: dict[int, dict[str, list[str]]] = defaultdict(lambda: defaultdict(list))
        for s, r, c in g.attributes:
            out[idx[s]][r].append(c)
        return out

    def attribute_matches(self, i: int, j: int) -> int:
        key = (i, j)
        if key not in self._attr_cache:
            a1, a2 = self.attrs1.get(i), self.attrs2.get(j)
            total = 0
            if a1 and a2:
                for role, consts in a1.items():
                    if role in a2:
                        total += _max_pairing(consts, a2[role], self.match)
            self._attr_cache[key] = total
        return self._attr_cache[key]

    def score(self, mapping: Sequence[int], matched: int) -> SmatchScore:
        named = {self.vars1[i]: self.vars2[j] for i, j in enumerate(mapping) if j != UNMAPPED}
        return SmatchScore(matched, self.total1, self.total2, named)


class _Counter:
    """Matched-triple count of a mapping, straight from the definitions."""

    def __init__(self, pair: _Pair):
        self.pair = pair
        self.rels2 = set(pair.rels2)

    def __call__(self, m: Sequence[int]) -> int:
        p = self.pair
        total = 0
        for i, j in enumerate(m):
            if j == UNMAPPED:
                continue
            if p.match(p.concepts1[i], p.concepts2[j]):
                total += 1
            total += p.attribute_matches(i, j)
        if m[p.root1] == p.root2 and p.match(p.concepts1[p.root1], p.concepts2[p.root2]):
            total += 1
        for s, r, t in p.rels1:
            if m[s] != UNMAPPED and m[t] != UNMAPPED and (m[s], r, m[t]) in self.rels2:
                total += 1
        return total


def _as_index_mapping(pair: _Pair, mapping: Mapping[str, str]) -> list[int]:
    m = [UNMAPPED] * len(pair.vars1)
    used = set()
    for v1, v2 in mapping.items():
        if v1 not in pair.idx1:
            raise KeyError(f"{v1!r} is not a variable of the first graph")
        if v2 not in pair.idx2:
            raise KeyError(f"{v2!r} is not a variable of the second graph")
        if v2 in used:
            raise MappingNotInjective(f"{v2!r} is the image of more than one variable")
        used.add(v2)
        m[pair.idx1[v1]] = pair.idx2[v2]
    return m


def matched_triples(g1: AmrGraph, g2: AmrGraph, mapping: Mapping[str, str],
                    concept_match: ConceptMatch = exact_match) -> int:
    """Number of triples of ``g1`` whose image under ``mapping`` is in ``g2``.

    Attribute triples sharing a source and role are paired one-to-one, so a
    non-transitive ``concept_match`` cannot count one triple of ``g2`` twice.
    """
    pair = _Pair(g1, g2, concept_match)
    return _Counter(pair)(_as_index_mapping(pair, mapping))


def oracle_feasible(n1: int, n2: int, cap: int = ORACLE_CAP) -> bool:
    """Whether :func:`score_exact` accepts graphs of these sizes: at most
    ``cap`` variables on the smaller side and no more injections than ``cap!``."""
    return min(n1, n2) <= cap and math.perm(max(n1, n2), min(n1, n2)) <= math.factorial(cap)


def score_exact(g1: AmrGraph, g2: AmrGraph, concept_match: ConceptMatch = exact_match,
                cap: int = ORACLE_CAP) -> SmatchScore:
    """Optimal Smatch by enumerating every injection of the smaller variable set.

    Among maximizing mappings the lexicographically smallest (as a tuple of
    second-graph indices in first-graph variable order, unmapped = -1) wins.
    """
    pair = _Pair(g1, g2, concept_match)
    n1, n2 = len(pair.vars1), len(pair.vars2)
    if not oracle_feasible(n1, n2, cap):
        raise GraphTooLarge(f"{n1} x {n2} variables exceeds the oracle cap of {cap}")
    count = _Counter(pair)
    best: Optional[tuple[int, tuple[int, ...]]] = None
    if n1 <= n2:
        # permutations() yields in lexicographic order: first maximizer wins
        for perm in itertools.permutations(range(n2), n1):
            c = count(perm)
            if best is None or c > best[0]:
                best = (c, perm)
    else:
        for perm in itertools.permutations(range(n1), n2):
            m = [UNMAPPED] * n1
            for j, i in enumerate(perm):
                m[i] = j
            c = count(m)
            key = tuple(m)
            if best is None or c > best[0] or (c == best[0] and key < best[1]):
                best = (c, key)
    return pair.score(best[1], best[0])


class _Weights:
    """Per-pair gains for hill-climbing.

    ``node[i][j]`` counts the instance, top and attribute triples matched by
    mapping ``i -> j`` alone; ``link[(i, j)][(k, l)]`` counts relation triples
    matched when both ``i -> j`` and ``k -> l`` hold (stored symmetrically).
    """

    def __init__(self, pair: _Pair):
        self.pair = pair
        n1, n2 = len(pair.vars1), len(pair.vars2)
        self.node: list[dict[int, int]] = [dict() for _ in range(n1)]
        for i in range(n1):
            for j in range(n2):
                w = pair.attribute_matches(i, j)
                if pair.match(pair.concepts1[i], pair.concepts2[j]):
                    w += 1
                    if i == pair.root1 and j == pair.root2:
                        w += 1
                if w:
                    self.node[i][j] = w
        self.link: dict[tuple[int, int], dict[tuple[int, int], int]] = defaultdict(dict)
        by_role: dict[str, list[tuple[int, int]]] = defaultdict(list)
        for j, r, l in pair.rels2:
            by_role[r].append((j, l))
        for i, r, k in pair.rels1:
            for j, l in by_role.get(r, ()):
                if i == k:
                    if j == l:
                        self.node[i][j] = self.node[i].get(j, 0) + 1
                    continue
                if j == l:
                    continue
                a, b = (i, j), (k, l)
                self.link[a][b] = self.link[a].get(b, 0) + 1
                self.link[b][a] = self.link[b].get(a, 0) + 1
        # start candidates: concept matches first, then any target that
        # shares an attribute or relation triple
        self.concept_pool = [
            sorted(j for j in range(n2) if pair.match(pair.concepts1[i], pair.concepts2[j]))
            for i in range(n1)]
        self.pool = [sorted(set(self.node[i]) | {j for (a, j) in self.link if a == i})
                     for i in range(n1)]

    def contribution(self, changed: Sequence[int], m: Sequence[int]) -> int:
        """Matched triples involving at least one variable in ``changed``."""
        total = 0
        for i in changed:
            j = m[i]
            if j == UNMAPPED:
                continue
            total += self.node[i].get(j, 0)
            links = self.link.get((i, j))
            if not links:
                continue
            for (k, l), w in links.items():
                if m[k] == l and (k not in changed or k > i):
                    total += w
        return total

    def total(self, m: Sequence[int]) -> int:
        return self.contribution(range(len(m)), m)


def _smart_init(w: _Weights) -> list[int]:
    """Greedy start: smallest free concept match, else smallest free candidate."""
    used: set[int] = set()
    m = []
    for cands in w.concept_pool:
        j = next((j for j in cands if j not in used), UNMAPPED)
        if j != UNMAPPED:
            used.add(j)
        m.append(j)
    for i, cands in enumerate(w.pool):
        if m[i] == UNMAPPED:
            j = next((j for j in cands if j not in used), UNMAPPED)
            if j != UNMAPPED:
                used.add(j)
                m[i] = j
    return m


def _random_init(w: _Weights, rng: random.Random) -> list[int]:
    used: set[int] = set()
    m = []
    for cands in w.pool:
        free = [j for j in cands if j not in used]
        if free:
            j = rng.choice(free)
            used.add(j)
        else:
            j = UNMAPPED
        m.append(j)
    return m


def _climb(w: _Weights, m: list[int], n2: int) -> int:
    """Steepest-ascent over single moves and pairwise swaps; mutates ``m``."""
    n1 = len(m)
    current = w.total(m)
    while True:
        best_gain = 0
        best_change = None
        used = set(j for j in m if j != UNMAPPED)
        targets = [UNMAPPED] + [j for j in range(n2) if j not in used]
        for i in range(n1):
            old = m[i]
            before = w.contribution((i,), m)
            for j in targets:
                if j == old:
                    continue
                m[i] = j
                gain = w.contribution((i,), m) - before
                if gain > best_gain:
                    best_gain, best_change = gain, ((i, j),)
            m[i] = old
        for i1 in range(n1):
            for i2 in range(i1 + 1, n1):
                j1, j2 = m[i1], m[i2]
                if j1 == j2:
                    continue
                changed = (i1, i2)
                before = w.contribution(changed, m)
                m[i1], m[i2] = j2, j1
                gain = w.contribution(changed, m) - before
                m[i1], m[i2] = j1, j2
                if gain > best_gain:
                    best_gain, best_change = gain, ((i1, j2), (i2, j1))
        if best_change is None:
            return current
        for i, j in best_change:
            m[i] = j
        current += best_gain


def score(g1: AmrGraph, g2: AmrGraph, restarts: int = 4, seed: int = 0,
          concept_match: ConceptMatch = exact_match) -> SmatchScore:
    """Smatch via hill-climbing with ``restarts`` starting points.

    Restart 0 starts from a greedy concept-match assignment; restart ``r``
    draws a random start from ``random.Random(f"{seed}:{r}")``, so the first
    ``k`` restarts are the same whatever the total, and the result depends
    only on ``(g1, g2, restarts, seed)``.  The best restart wins; ties go to
    the earliest.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    pair = _Pair(g1, g2, concept_match)
    w = _Weights(pair)
    n2 = len(pair.vars2)
    ceiling = min(pair.total1, pair.total2)
    best_m: Optional[list[int]] = None
    best = -1
    tried: set[tuple[int, ...]] = set()
    for r in range(restarts):
        m = _smart_init(w) if r == 0 else _random_init(w, random.Random(f"{seed}:{r}"))
        start = tuple(m)
        if start in tried:
            continue
        tried.add(start)
        found = _climb(w, m, n2)
        if found > best:
            best, best_m = found, m
        if best == ceiling:
            break
    return pair.score(best_m, best)
