"""Comparing AMR similarity with human similarity judgments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .divergence import EmptySelection

__all__ = [
    "StsRecord",
    "LengthMismatch",
    "ZeroVariance",
    "ConstantInput",
    "pearson",
    "mean_above",
    "top_n_correlation",
    "minmax_normalize",
    "read_sts_tsv",
]


class LengthMismatch(ValueError):
    pass


class ZeroVariance(ValueError):
    pass


class ConstantInput(ValueError):
    pass


@dataclass(frozen=True)
class StsRecord:
    id: str
    human: float
    amr: Optional[float] = None
    external: Optional[float] = None
    source: Optional[str] = None
    target: Optional[str] = None

    def __post_init__(self):
        if not 0.0 <= self.human <= 5.0:
            raise ValueError(f"{self.id}: human judgment {self.human} outside [0, 5]")
        if self.amr is not None and not 0.0 <= self.amr <= 1.0:
            raise ValueError(f"{self.id}: AMR score {self.amr} outside [0, 1]")


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation of ``x`` and ``y``."""
    if len(x) != len(y):
        raise LengthMismatch(f"{len(x)} vs {len(y)} values")
    n = len(x)
    if n < 2:
        raise LengthMismatch("need at least two points")
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [a - mx for a in x]
    dy = [b - my for b in y]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise ZeroVariance("correlation is undefined for a constant series")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _value(record: StsRecord, field: str) -> Optional[float]:
    if field not in ("amr", "external", "human"):
        raise ValueError(f"unknown field {field!r}")
    return getattr(record, field)


def mean_above(records: Sequence[StsRecord], field: str, cutoff: float,
               inclusive: bool = True) -> tuple[float, int]:
    """Mean human judgment (and count) of records whose ``field`` clears ``cutoff``.

    ``inclusive=False`` uses a strict ``>`` comparison.
    """
    selected = []
    for r in records:
        v = _value(r, field)
        if v is not None and (v >= cutoff if inclusive else v > cutoff):
            selected.append(r.human)
    if not selected:
        raise EmptySelection(f"no record with {field} {'>=' if inclusive else '>'} {cutoff}")
    return math.fsum(selected) / len(selected), len(selected)


def top_n_correlation(records: Sequence[StsRecord], key_field: str, n: int) -> float:
    """Pearson correlation of ``key_field`` with human judgment over the
    ``n`` records ranked highest by ``key_field`` (ties by ascending id)."""
    usable = [r for r in records if _value(r, key_field) is not None]
    if n > len(usable):
        raise ValueError(f"n={n} exceeds the {len(usable)} usable records")
    ranked = sorted(usable, key=lambda r: (-_value(r, key_field), r.id))[:n]
    return pearson([_value(r, key_field) for r in ranked], [r.human for r in ranked])


def minmax_normalize(values: Sequence[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi <= lo:
        raise ConstantInput("cannot rescale a constant series")
    span = hi - lo
    return [(v - lo) / span for v in values]


def read_sts_tsv(path) -> list[StsRecord]:
    """Read ``id, human_judgment, source, target[, external_score]`` rows.

    A first line starting with ``id<TAB>`` is taken as a header.
    """
    records = []
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or (lineno == 1 and line.lower().startswith("id\t")):
            continue
        parts = line.split("\t")
        if len(parts) not in (4, 5):
            raise ValueError(f"{path}:{lineno}: expected 4 or 5 tab-separated fields")
        try:
            human = float(parts[1])
            external = float(parts[4]) if len(parts) == 5 and parts[4].strip() else None
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric score") from None
        records.append(StsRecord(parts[0], human, None, external, parts[2], parts[3]))
    return records
