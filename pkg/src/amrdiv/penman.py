"""Reading, writing and decomposing AMR graphs in Penman notation.

A graph is parsed into an :class:`AmrGraph`: variables in instantiation
order, one concept per variable, and a list of :class:`Edge` objects in the
order they were written.  Inverse roles (``:ARG0-of``) are stored in
canonical direction with a flag recording how they were written, so that
:func:`serialize` can reproduce the original layout.
"""

from __future__ import annotations

import bisect
import re
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional

__all__ = [
    "AmrGraph",
    "Edge",
    "Metadata",
    "Triple",
    "TripleKind",
    "AmrRecord",
    "PenmanError",
    "PenmanSyntaxError",
    "UnbalancedParens",
    "DuplicateVariable",
    "DuplicateEdge",
    "UndefinedVariable",
    "EmptyGraph",
    "InvariantViolation",
    "parse_penman",
    "serialize",
    "format_record",
    "extract_triples",
    "iter_records",
    "read_amr_file",
    "load_amr_file",
    "INTRINSIC_OF_ROLES",
]

# roles whose ``-of`` suffix is part of the name, not an inversion marker
INTRINSIC_OF_ROLES = frozenset({"consist-of", "prep-out-of", "prep-on-behalf-of"})

# bare symbols of this shape are taken to be variable references
_VARIABLE_LIKE = re.compile(r"^[a-z][0-9]*$")


class PenmanError(ValueError):
    """Base class for malformed Penman input. Carries a 1-based line/column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class PenmanSyntaxError(PenmanError):
    pass


class UnbalancedParens(PenmanError):
    pass


class DuplicateVariable(PenmanError):
    pass


class DuplicateEdge(PenmanError):
    pass


class UndefinedVariable(PenmanError):
    pass


class EmptyGraph(PenmanError):
    pass


class InvariantViolation(ValueError):
    pass


class TripleKind(str, Enum):
    INSTANCE = "instance"
    ATTRIBUTE = "attribute"
    RELATION = "relation"
    TOP = "top"


class Triple(NamedTuple):
    kind: TripleKind
    source: str
    role: str
    target: str


@dataclass(frozen=True)
class Edge:
    """A role edge. ``constant`` marks attributes; ``inverted`` marks edges
    written as ``:role-of`` beneath their target."""

    source: str
    role: str
    target: str
    constant: bool = False
    inverted: bool = False

    def key(self) -> tuple:
        return (self.source, self.role, self.target, self.constant)


@dataclass(frozen=True)
class Metadata:
    id: Optional[str] = None
    snt: Optional[str] = None
    lang: Optional[str] = None
    tok: Optional[str] = None

    def tokens(self) -> Optional[list[str]]:
        """Whitespace tokens of ``::tok`` if given, else of ``::snt``."""
        text = self.tok if self.tok is not None else self.snt
        return None if text is None else text.split()


@dataclass(frozen=True, eq=False)
class AmrGraph:
    variables: tuple[str, ...]
    root: str
    instances: Mapping[str, str]
    edges: tuple[Edge, ...] = ()
    metadata: Metadata = field(default_factory=Metadata)

    @classmethod
    def build(cls, root: str, instances: Mapping[str, str],
              relations: Iterable[tuple[str, str, str]] = (),
              attributes: Iterable[tuple[str, str, str]] = (),
              metadata: Optional[Metadata] = None) -> "AmrGraph":
        """Construct a graph from parts; edges are stored in lexicographic order."""
        edges = [Edge(s, r, t) for s, r, t in relations]
        edges += [Edge(s, r, c, constant=True) for s, r, c in attributes]
        edges.sort(key=lambda e: (e.source, e.role, e.target, e.constant))
        return cls(tuple(instances), root, dict(instances), tuple(edges),
                   metadata or Metadata())

    @property
    def relations(self) -> tuple[tuple[str, str, str], ...]:
        return tuple((e.source, e.role, e.target) for e in self.edges if not e.constant)

    @property
    def attributes(self) -> tuple[tuple[str, str, str], ...]:
        return tuple((e.source, e.role, e.target) for e in self.edges if e.constant)

    def concept(self, var: str) -> str:
        return self.instances[var]

    def with_concepts(self, concepts: Mapping[str, str]) -> "AmrGraph":
        """Return a copy with the given variables relabelled."""
        new = {v: concepts.get(v, c) for v, c in self.instances.items()}
        return replace(self, instances=new)

    def map_edges(self, role=None, constant=None) -> "AmrGraph":
        """Return a copy with edge roles and/or attribute constants rewritten."""
        edges = []
        for e in self.edges:
            new_role = role(e.role) if role else e.role
            new_target = constant(e.target) if (constant and e.constant) else e.target
            edges.append(replace(e, role=new_role, target=new_target))
        return replace(self, edges=tuple(edges))

    def validate(self) -> None:
        if not self.variables:
            raise InvariantViolation("graph has no variables")
        if len(set(self.variables)) != len(self.variables):
            raise InvariantViolation("variable identifiers are not unique")
        if self.root not in self.variables:
            raise InvariantViolation(f"root {self.root!r} is not a variable")
        if set(self.instances) != set(self.variables):
            raise InvariantViolation("every variable needs exactly one concept")
        seen = set()
        adjacency: dict[str, list[str]] = {v: [] for v in self.variables}
        for e in self.edges:
            if e.source not in adjacency:
                raise InvariantViolation(f"edge source {e.source!r} is not a variable")
            if not e.constant:
                if e.target not in adjacency:
                    raise InvariantViolation(f"edge target {e.target!r} is not a variable")
                adjacency[e.source].append(e.target)
                adjacency[e.target].append(e.source)
            if e.key() in seen:
                raise InvariantViolation(f"duplicate edge {e.key()}")
            seen.add(e.key())
        reached = {self.root}
        queue = deque([self.root])
        while queue:
            for other in adjacency[queue.popleft()]:
                if other not in reached:
                    reached.add(other)
                    queue.append(other)
        if len(reached) != len(self.variables):
            missing = sorted(set(self.variables) - reached)
            raise InvariantViolation(f"variables not connected to the root: {missing}")


class _Tok(NamedTuple):
    kind: str
    text: str
    pos: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<slash>/)
  | (?P<role>:[^\s()"/]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<symbol>[^\s()"/:][^\s()"/]*)
  | (?P<bad>.)
""", re.VERBOSE | re.DOTALL)


class _Locator:
    def __init__(self, text: str, first_line: int):
        self.starts = [0] + [m.end() for m in re.finditer("\n", text)]
        self.first_line = first_line

    def __call__(self, pos: int) -> tuple[int, int]:
        idx = bisect.bisect_right(self.starts, pos) - 1
        return idx + self.first_line, pos - self.starts[idx] + 1


def _tokenize(text: str, where: _Locator) -> list[_Tok]:
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "bad":
            if m.group() == '"':
                raise PenmanSyntaxError("unterminated string", *where(m.start()))
            raise PenmanSyntaxError(f"unexpected character {m.group()!r}", *where(m.start()))
        tokens.append(_Tok(kind, m.group(), m.start()))
    return tokens


def _canonical(role: str) -> tuple[str, bool]:
    if role.endswith("-of") and role not in INTRINSIC_OF_ROLES and len(role) > 3:
        return role[:-3], True
    return role, False


class _Frame:
    __slots__ = ("var", "role", "lparen")

    def __init__(self, var: str, lparen: _Tok):
        self.var = var
        self.role: Optional[_Tok] = None
        self.lparen = lparen


def parse_penman(text: str, metadata: Optional[Metadata] = None, *,
                 first_line: int = 1) -> AmrGraph:
    """Parse one Penman expression.

    Bare symbols in target position are re-entrant references when they name
    a variable instantiated anywhere in the graph; an unknown symbol shaped
    like a variable (one lowercase letter plus optional digits) raises
    :class:`UndefinedVariable`, any other symbol is a constant.
    """
    where = _Locator(text, first_line)
    tokens = _tokenize(text, where)
    if not tokens:
        raise EmptyGraph("no graph found", *where(len(text)))

    def fail(exc, msg, tok):
        raise exc(msg, *where(tok.pos))

    if tokens[0].kind != "lparen":
        fail(PenmanSyntaxError, f"expected '(' but found {tokens[0].text!r}", tokens[0])

    instances: dict[str, str] = {}
    order: list[str] = []
    # edge slots in written order; bare symbols are resolved after the pass
    slots: list = []
    stack: list[_Frame] = []
    root = None
    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if root is not None and not stack:
            if tok.kind == "rparen":
                fail(UnbalancedParens, "unmatched ')'", tok)
            fail(PenmanSyntaxError, "unexpected content after the graph", tok)
        if tok.kind == "lparen":
            if stack and stack[-1].role is None:
                fail(PenmanSyntaxError, "node is missing a role", tok)
            if i + 1 >= n or tokens[i + 1].kind != "symbol":
                where_tok = tokens[i + 1] if i + 1 < n else tok
                fail(PenmanSyntaxError, "expected a variable after '('", where_tok)
            var_tok = tokens[i + 1]
            if i + 2 >= n or tokens[i + 2].kind != "slash":
                fail(PenmanSyntaxError, f"expected '/' after variable {var_tok.text!r}",
                     tokens[i + 2] if i + 2 < n else var_tok)
            if i + 3 >= n or tokens[i + 3].kind not in ("symbol", "string"):
                fail(PenmanSyntaxError, f"missing concept for variable {var_tok.text!r}",
                     tokens[i + 3] if i + 3 < n else tokens[i + 2])
            var = var_tok.text
            if var in instances:
                fail(DuplicateVariable, f"variable {var!r} is instantiated twice", var_tok)
            instances[var] = tokens[i + 3].text
            order.append(var)
            if stack:
                parent = stack[-1]
                slots.append((parent.var, parent.role, var, None))
                parent.role = None
            else:
                root = var
            stack.append(_Frame(var, tok))
            i += 4
        elif tok.kind == "rparen":
            if not stack:
                fail(UnbalancedParens, "unmatched ')'", tok)
            if stack[-1].role is not None:
                fail(PenmanSyntaxError, f"role {stack[-1].role.text!r} has no value",
                     stack[-1].role)
            stack.pop()
            i += 1
        elif tok.kind == "role":
            if stack[-1].role is not None:
                fail(PenmanSyntaxError, f"role {stack[-1].role.text!r} has no value",
                     stack[-1].role)
            if tok.text == ":":
                fail(PenmanSyntaxError, "empty role", tok)
            stack[-1].role = tok
            i += 1
        elif tok.kind in ("symbol", "string"):
            frame = stack[-1]
            if frame.role is None:
                fail(PenmanSyntaxError, f"unexpected {tok.text!r}; expected a role", tok)
            slots.append((frame.var, frame.role, None, tok))
            frame.role = None
            i += 1
        else:
            fail(PenmanSyntaxError, f"unexpected {tok.text!r}", tok)
    if stack:
        fail(UnbalancedParens, "unclosed '('", stack[-1].lparen)

    edges: list[Edge] = []
    seen: set = set()
    for parent, role_tok, child, target_tok in slots:
        role = role_tok.text[1:]
        if child is not None or (target_tok.kind == "symbol" and target_tok.text in instances):
            other = child if child is not None else target_tok.text
            name, inverted = _canonical(role)
            edge = Edge(other, name, parent, inverted=True) if inverted else Edge(parent, name, other)
        else:
            if target_tok.kind == "symbol" and _VARIABLE_LIKE.match(target_tok.text):
                fail(UndefinedVariable, f"variable {target_tok.text!r} is never instantiated",
                     target_tok)
            edge = Edge(parent, role, target_tok.text, constant=True)
        if edge.key() in seen:
            fail(DuplicateEdge, f"duplicate edge :{edge.role} {edge.source}->{edge.target}",
                 target_tok or role_tok)
        seen.add(edge.key())
        edges.append(edge)

    return AmrGraph(tuple(order), root, instances, tuple(edges), metadata or Metadata())


def serialize(graph: AmrGraph, indent: int = 4) -> str:
    """Render ``graph`` as Penman text.

    Edges are written beneath the variable they were attached to at parse
    time, in stored order, so parsed graphs keep their layout.  Edges that
    cannot be placed that way (constructed graphs whose root is not the top
    of every edge) are written as inverse roles from the visited endpoint.
    """
    graph.validate()
    attached: dict[str, list[int]] = {v: [] for v in graph.variables}
    for idx, e in enumerate(graph.edges):
        anchor = e.target if (e.inverted and not e.constant) else e.source
        attached[anchor].append(idx)

    # children[var] -> list of (role text, kind, value); kind in node/ref/const
    children: dict[str, list[tuple[str, str, str]]] = {v: [] for v in graph.variables}
    emitted: set[int] = set()
    visited = {graph.root}

    def place(var: str, idx: int) -> Optional[str]:
        e = graph.edges[idx]
        emitted.add(idx)
        if e.constant:
            children[var].append((e.role, "const", e.target))
            return None
        if var == e.source:
            role, other = e.role, e.target
        else:
            role, other = e.role + "-of", e.source
        if other in visited:
            children[var].append((role, "ref", other))
            return None
        visited.add(other)
        children[var].append((role, "node", other))
        return other

    def walk(start: str) -> None:
        stack = [(start, iter(attached[start]))]
        while stack:
            var, it = stack[-1]
            for idx in it:
                if idx in emitted:
                    continue
                new = place(var, idx)
                if new is not None:
                    stack.append((new, iter(attached[new])))
                    break
            else:
                stack.pop()

    walk(graph.root)
    while len(visited) < len(graph.variables):
        for idx, e in enumerate(graph.edges):
            if idx in emitted or e.constant:
                continue
            if (e.source in visited) != (e.target in visited):
                var = e.source if e.source in visited else e.target
                new = place(var, idx)
                walk(new)
                break
        else:  # pragma: no cover - validate() guarantees connectivity
            raise InvariantViolation("graph is not connected")

    out: list[str] = []
    stack = [(graph.root, 0, iter(children[graph.root]))]
    out.append(f"({graph.root} / {graph.instances[graph.root]}")
    while stack:
        var, depth, it = stack[-1]
        for role, kind, value in it:
            out.append("\n" + " " * (indent * (depth + 1)) + f":{role} ")
            if kind == "node":
                out.append(f"({value} / {graph.instances[value]}")
                stack.append((value, depth + 1, iter(children[value])))
                break
            out.append(value)
        else:
            out.append(")")
            stack.pop()
    return "".join(out)


def format_record(graph: AmrGraph) -> str:
    """Metadata comment lines followed by the serialized graph."""
    lines = []
    md = graph.metadata
    for key in ("id", "lang", "snt", "tok"):
        value = getattr(md, key)
        if value is not None:
            lines.append(f"# ::{key} {value}")
    lines.append(serialize(graph))
    return "\n".join(lines)


def extract_triples(graph: AmrGraph, variable_prefix: Optional[str] = None) -> frozenset[Triple]:
    """Decompose ``graph`` into the triples compared by Smatch.

    Variables keep their names unless ``variable_prefix`` is given, in which
    case they become ``prefix0, prefix1, ...`` in instantiation order.
    """
    graph.validate()
    if variable_prefix is None:
        names = {v: v for v in graph.variables}
    else:
        names = {v: f"{variable_prefix}{i}" for i, v in enumerate(graph.variables)}
    triples = {Triple(TripleKind.INSTANCE, names[v], "instance", graph.instances[v])
               for v in graph.variables}
    triples.add(Triple(TripleKind.TOP, names[graph.root], "TOP", graph.instances[graph.root]))
    for e in graph.edges:
        if e.constant:
            triples.add(Triple(TripleKind.ATTRIBUTE, names[e.source], e.role, e.target))
        else:
            triples.add(Triple(TripleKind.RELATION, names[e.source], e.role, names[e.target]))
    return frozenset(triples)


@dataclass(frozen=True)
class AmrRecord:
    """One record of an AMR file before parsing."""

    index: int
    line: int  # 1-based line of the first Penman line
    text: str
    metadata: Metadata

    def parse(self) -> AmrGraph:
        return parse_penman(self.text, self.metadata, first_line=self.line)


_META_RE = re.compile(r"::(\S+)[ \t]*(.*?)(?=\s+::\S|$)")
_KNOWN_KEYS = {"id", "snt", "lang", "tok"}


def _parse_metadata(lines: list[str]) -> Metadata:
    found = {}
    for line in lines:
        body = line.lstrip()[1:]
        for key, value in _META_RE.findall(body):
            if key in _KNOWN_KEYS and key not in found:
                found[key] = value.strip()
    return Metadata(**found)


def iter_records(text: str) -> Iterator[AmrRecord]:
    """Split an AMR file into blank-line separated records."""
    comments: list[str] = []
    body: list[str] = []
    start = 0
    index = 0
    lines = text.splitlines()
    for lineno, line in enumerate(lines + [""], start=1):
        stripped = line.strip()
        if not stripped:
            if body:
                yield AmrRecord(index, start, "\n".join(body), _parse_metadata(comments))
                index += 1
            elif comments:
                # metadata with no graph
                yield AmrRecord(index, lineno, "", _parse_metadata(comments))
                index += 1
            comments, body = [], []
        elif stripped.startswith("#") and not body:
            comments.append(stripped)
        elif stripped.startswith("#"):
            body.append("")  # keeps line numbers aligned
        else:
            if not body:
                start = lineno
            body.append(line)


def read_amr_file(path) -> list[AmrRecord]:
    return list(iter_records(Path(path).read_text(encoding="utf-8")))


def load_amr_file(path) -> list[AmrGraph]:
    """Parse every record of an AMR file, raising on the first bad one."""
    return [rec.parse() for rec in read_amr_file(path)]
