"""Turning Smatch scores into divergence judgments and corpus statistics."""

from __future__ import annotations

import csv
import io
import statistics
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .smatch import SmatchScore

__all__ = [
    "Label",
    "Gold",
    "Binary",
    "Threshold",
    "BINARY",
    "ScoredPair",
    "PrCurvePoint",
    "Summary",
    "RankOverlap",
    "OutOfRange",
    "NoGoldLabels",
    "EmptySelection",
    "IdMismatch",
    "classify",
    "pr_curve",
    "default_thresholds",
    "summarize",
    "rank_and_overlap",
    "SCORED_COLUMNS",
    "write_scored_tsv",
    "read_scored_tsv",
    "write_pr_csv",
]


class OutOfRange(ValueError):
    pass


class NoGoldLabels(ValueError):
    pass


class EmptySelection(ValueError):
    pass


class IdMismatch(ValueError):
    pass


class Label(str, Enum):
    EQUIVALENT = "Equivalent"
    DIVERGENT = "Divergent"


class Gold(str, Enum):
    """Gold judgments. ``SOME`` and ``UNRELATED`` are the two divergent
    grades of three-way sentence-level annotation."""

    EQUIVALENT = "Equivalent"
    SOME = "SomeDivergence"
    UNRELATED = "Unrelated"
    DIVERGENT = "Divergent"
    UNKNOWN = "Unknown"

    def positive(self, interpretation: str = "strict") -> Optional[bool]:
        """Whether this gold label counts as equivalent; None if unknown."""
        if self is Gold.UNKNOWN:
            return None
        if interpretation == "strict":
            return self is Gold.EQUIVALENT
        if interpretation == "lenient":
            return self in (Gold.EQUIVALENT, Gold.SOME)
        raise ValueError(f"unknown gold interpretation {interpretation!r}")


@dataclass(frozen=True)
class Binary:
    def __str__(self) -> str:
        return "binary"


@dataclass(frozen=True)
class Threshold:
    t: float

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise OutOfRange(f"threshold {self.t} outside [0, 1]")

    def __str__(self) -> str:
        return f"threshold({self.t})"


BINARY = Binary()

Mode = Union[Binary, Threshold]


def classify(score: Union[SmatchScore, float], mode: Mode = BINARY) -> Label:
    """Equivalent iff perfect (binary mode) or ``f1 >= t`` (threshold mode).

    Given a :class:`SmatchScore`, binary mode tests ``M == T1 == T2`` on the
    integer counts; a bare float must equal 1 within 1e-9.
    """
    f1 = score.f1 if isinstance(score, SmatchScore) else float(score)
    if not 0.0 <= f1 <= 1.0:
        raise OutOfRange(f"f1 {f1} outside [0, 1]")
    if isinstance(mode, Binary):
        if isinstance(score, SmatchScore):
            ok = score.is_perfect
        else:
            ok = abs(f1 - 1.0) <= 1e-9
    else:
        ok = f1 >= mode.t
    return Label.EQUIVALENT if ok else Label.DIVERGENT


@dataclass
class ScoredPair:
    id: str
    score: SmatchScore
    predicted: Optional[Label] = None
    gold: Gold = Gold.UNKNOWN
    mode: Optional[Mode] = None
    source: Optional[str] = None
    target: Optional[str] = None
    graphs: Optional[tuple] = None
    external: Optional[float] = None
    human: Optional[float] = None

    @property
    def f1(self) -> float:
        return self.score.f1


@dataclass(frozen=True)
class PrCurvePoint:
    threshold: float
    precision: float
    recall: float
    retained: int


def default_thresholds(scores: Iterable[float] = ()) -> list[float]:
    """101 evenly spaced points in [0, 1] plus every observed score."""
    grid = {i / 100 for i in range(101)}
    grid.update(s for s in scores if 0.0 <= s <= 1.0)
    return sorted(grid)


def pr_curve(pairs: Sequence[ScoredPair], thresholds: Optional[Sequence[float]] = None,
             interpretation: str = "strict") -> list[PrCurvePoint]:
    """Precision/recall of ``f1 >= t`` against gold equivalence, per threshold.

    Pairs with unknown gold are ignored; thresholds retaining nothing are
    omitted.
    """
    labelled = [(p.f1, p.gold.positive(interpretation)) for p in pairs]
    labelled = [(f, g) for f, g in labelled if g is not None]
    if not labelled:
        raise NoGoldLabels("no pair carries a gold label")
    positives = sum(g for _, g in labelled)
    if positives == 0:
        raise NoGoldLabels("no gold-equivalent pair; recall is undefined")
    if thresholds is None:
        thresholds = default_thresholds(f for f, _ in labelled)
    points = []
    for t in sorted(thresholds):
        retained = [g for f, g in labelled if f >= t]
        if not retained:
            continue
        hits = sum(retained)
        points.append(PrCurvePoint(t, hits / len(retained), hits / positives, len(retained)))
    return points


@dataclass(frozen=True)
class Summary:
    median: float
    mode: float
    mean: float
    count: int


def summarize(scores: Iterable[float], threshold: float = 0.0) -> Summary:
    """Median, mode and mean of the scores ``>= threshold``.

    The mode is taken over scores rounded to 4 decimals, smallest value on
    ties.
    """
    selected = [s for s in scores if s >= threshold]
    if not selected:
        raise EmptySelection(f"no score >= {threshold}")
    counts = Counter(round(s, 4) for s in selected)
    top = max(counts.values())
    mode = min(v for v, c in counts.items() if c == top)
    return Summary(statistics.median(selected), mode, statistics.fmean(selected), len(selected))


@dataclass(frozen=True)
class RankOverlap:
    top_ids: list
    overlap: int


def rank_and_overlap(scores_a: Mapping[str, float], scores_b: Mapping[str, float], n: int,
                     cutoff_b: float) -> RankOverlap:
    """Top ``n`` ids by ``scores_a`` (ties by ascending id) and how many of
    them score at least ``cutoff_b`` under ``scores_b``."""
    if set(scores_a) != set(scores_b):
        raise IdMismatch("score lists cover different ids")
    if not 0 <= n <= len(scores_a):
        raise ValueError(f"n={n} outside [0, {len(scores_a)}]")
    ranked = sorted(scores_a, key=lambda k: (-scores_a[k], k))[:n]
    overlap = sum(1 for k in ranked if scores_b[k] >= cutoff_b)
    return RankOverlap(ranked, overlap)


SCORED_COLUMNS = ["id", "f1", "precision", "recall", "matched", "total_left", "total_right",
                  "predicted", "gold"]


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def write_scored_tsv(pairs: Iterable[ScoredPair], out) -> None:
    """Write the scored-pair table to a path or text stream."""
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8", newline="") as fh:
            write_scored_tsv(pairs, fh)
        return
    out.write("\t".join(SCORED_COLUMNS) + "\n")
    for p in pairs:
        s = p.score
        row = [p.id, _fmt(s.f1), _fmt(s.precision), _fmt(s.recall), str(s.matched),
               str(s.total_left), str(s.total_right),
               p.predicted.value if p.predicted is not None else "-", p.gold.value]
        out.write("\t".join(row) + "\n")


def read_scored_tsv(path) -> list[ScoredPair]:
    """Read a scored-pair table; scores are rebuilt from the integer counts."""
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.DictReader(io.StringIO(text), delimiter="\t", quoting=csv.QUOTE_NONE)
    missing = set(SCORED_COLUMNS) - set(reader.fieldnames or [])
    if missing:
        raise ValueError(f"scored table lacks columns: {sorted(missing)}")
    pairs = []
    for row in reader:
        score = SmatchScore(int(row["matched"]), int(row["total_left"]), int(row["total_right"]))
        predicted = None if row["predicted"] in ("-", "") else Label(row["predicted"])
        gold = Gold(row["gold"]) if row["gold"] else Gold.UNKNOWN
        pairs.append(ScoredPair(row["id"], score, predicted, gold))
    return pairs


def write_pr_csv(curves: Mapping[str, Sequence[PrCurvePoint]], out) -> None:
    """Write one or more named curves as ``curve,threshold,precision,recall,retained``."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["curve", "threshold", "precision", "recall", "retained"])
    for name, points in curves.items():
        for p in points:
            writer.writerow([name, _fmt(p.threshold), _fmt(p.precision), _fmt(p.recall),
                             p.retained])
