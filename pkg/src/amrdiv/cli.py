"""Command-line entry point: ``amrdiv <subcommand> ...``.

Exit status is 0 on success, 2 on bad input (with one diagnostic per bad
record on stderr).
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

from . import __version__
from .align import (AlignmentSet, IndexOutOfBounds, MalformedLink, align, read_alignment_file,
                    read_parallel_corpus, train, write_pharaoh)
from .divergence import (EmptySelection, Gold, NoGoldLabels, pr_curve, rank_and_overlap,
                         read_scored_tsv, summarize, write_pr_csv, write_scored_tsv)
from .penman import (PenmanError, extract_triples, format_record, parse_penman, read_amr_file,
                     serialize)
from .pipeline import CountMismatch, RunConfig, pair_graphs, score_pair
from .sts import (ConstantInput, StsRecord, ZeroVariance, mean_above, minmax_normalize, pearson,
                  read_sts_tsv, top_n_correlation)
from .xlingual import RoleTable

log = logging.getLogger("amrdiv")

STS_CUTOFFS = (0.5, 0.6, 0.7, 0.8)


class InputError(Exception):
    """Bad input; message already formatted for the user."""

    def __init__(self, *lines: str):
        self.lines = lines
        super().__init__("\n".join(lines))


@contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _parse_records(path: str, lenient: bool):
    """Parse an AMR file; returns (graphs-or-None, diagnostics)."""
    try:
        records = read_amr_file(path)
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None
    graphs, errors = [], []
    for rec in records:
        try:
            graphs.append(rec.parse())
        except PenmanError as exc:
            errors.append(_diagnostic(path, rec.index, exc))
            graphs.append(None)
    if errors and not lenient:
        raise InputError(*errors)
    for e in errors:
        log.warning("skipping %s", e)
    return graphs


def _read_gold(path: Optional[str], ids: list[str]) -> list[Gold]:
    if path is None:
        return [Gold.UNKNOWN] * len(ids)
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    try:
        if lines and all("\t" in ln for ln in lines):
            by_id = {}
            for ln in lines:
                k, v = ln.split("\t", 1)
                by_id[k.strip()] = Gold(v.strip())
            missing = [k for k in ids if k not in by_id]
            if missing:
                raise InputError(f"{path}: no gold label for ids {missing[:5]}")
            return [by_id[k] for k in ids]
        if len(lines) != len(ids):
            raise InputError(f"{path}: {len(lines)} gold labels for {len(ids)} pairs")
        return [Gold(ln.strip()) for ln in lines]
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def _score_task(task):
    index, pair_id, g_en, g_xx, alignment, table, config, gold = task
    try:
        return score_pair(pair_id, index, g_en, g_xx, alignment, table, config, gold), None
    except ValueError as exc:
        return None, f"pair {index + 1} ({pair_id}): {type(exc).__name__}: {exc}"


def _build_tasks(args, config: RunConfig):
    lenient = args.lenient_io
    left = _parse_records(args.amr_en, lenient)
    right = _parse_records(args.amr_xx, lenient)
    ids_l = [g.metadata.id if g else None for g in left]
    ids_r = [g.metadata.id if g else None for g in right]
    try:
        pairs = pair_graphs(left, right, ids_l, ids_r)
    except CountMismatch as exc:
        raise InputError(f"CountMismatch: {exc}") from None

    alignments = None
    if args.alignments:
        try:
            alignments = read_alignment_file(args.alignments)
        except (MalformedLink, OSError) as exc:
            raise InputError(f"{type(exc).__name__}: {exc}") from None
        if len(alignments) != len(pairs):
            raise InputError(f"CountMismatch: {len(alignments)} alignment lines "
                             f"for {len(pairs)} pairs")
    table = None
    if args.role_table:
        try:
            table = RoleTable.load(args.role_table)
        except (ValueError, OSError) as exc:
            raise InputError(str(exc)) from None

    ids = []
    for k, (i, j) in enumerate(pairs):
        g = left[i] or right[j]
        ids.append((g.metadata.id if g and g.metadata.id else None) or str(k + 1))
    golds = _read_gold(args.gold, ids)

    tasks, errors = [], []
    for k, (i, j) in enumerate(pairs):
        g_en, g_xx = left[i], right[j]
        if g_en is None or g_xx is None:
            continue
        alignment = None
        if alignments is not None:
            tokens, links = alignments[k]
            if tokens is None:
                src, tgt = g_xx.metadata.tokens(), g_en.metadata.tokens()
                if src is None or tgt is None:
                    errors.append(f"pair {k + 1} ({ids[k]}): alignment needs ::snt or ::tok "
                                  f"metadata on both graphs")
                    continue
            else:
                src, tgt = tokens
            alignment = AlignmentSet(src, tgt, links)
            try:
                alignment.validate()
            except IndexOutOfBounds as exc:
                errors.append(f"pair {k + 1} ({ids[k]}): IndexOutOfBounds: {exc}")
                continue
        tasks.append((k, ids[k], g_en, g_xx, alignment, table, config, golds[k]))
    return tasks, errors


def _config(args) -> RunConfig:
    mode = args.mode or ("threshold" if args.threshold is not None else "binary")
    try:
        return RunConfig(restarts=args.restarts, seed=args.seed, mode=mode,
                         threshold=1.0 if args.threshold is None else args.threshold,
                         fuzzy=args.fuzzy, oracle=args.oracle, monolingual=args.monolingual,
                         raw=args.raw)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_score(args, workers: int = 1) -> int:
    config = _config(args)
    tasks, errors = _build_tasks(args, config)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_score_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_score_task(t) for t in tasks]
    scored = []
    for pair, err in results:
        if err:
            errors.append(err)
        else:
            scored.append(pair)
    if errors and not args.lenient_io:
        raise InputError(*errors)
    for e in errors:
        log.warning("skipping %s", e)
    with _output(args.output) as out:
        write_scored_tsv(scored, out)
    return 0


def cmd_score_corpus(args) -> int:
    workers = args.workers or min(4, os.cpu_count() or 1)
    return cmd_score(args, workers=workers)


def _diagnostic(path: str, index: int, exc: PenmanError) -> str:
    return (f"{path}:{exc.line}:{exc.column}: record {index + 1}: "
            f"{type(exc).__name__}: {exc.message}")


def cmd_parse(args) -> int:
    errors, rendered = [], []
    for path in args.files:
        try:
            records = read_amr_file(path)
        except (OSError, UnicodeDecodeError) as exc:
            errors.append(f"{path}: {exc}")
            continue
        if not records:
            errors.append(f"{path}:1:1: EmptyGraph: file contains no AMR")
            continue
        ok = 0
        for rec in records:
            try:
                g = rec.parse()
            except PenmanError as exc:
                errors.append(_diagnostic(path, rec.index, exc))
                continue
            if extract_triples(parse_penman(serialize(g))) != extract_triples(g):
                errors.append(f"{path}: record {rec.index + 1}: round trip changed the triples")
                continue
            ok += 1
            rendered.append(format_record(g))
        print(f"{path}: {ok} of {len(records)} records parsed", file=sys.stderr)
    if args.output:
        with _output(args.output) as out:
            out.write("\n\n".join(rendered) + "\n")
    if errors:
        raise InputError(*errors)
    return 0


def cmd_align(args) -> int:
    try:
        corpus = read_parallel_corpus(args.corpus)
    except (ValueError, OSError) as exc:
        raise InputError(f"{args.corpus}: {exc}") from None
    if args.pharaoh:
        try:
            entries = read_alignment_file(args.pharaoh)
        except (MalformedLink, OSError) as exc:
            raise InputError(f"{type(exc).__name__}: {exc}") from None
        if len(entries) != len(corpus):
            raise InputError(f"CountMismatch: {len(entries)} alignment lines for "
                             f"{len(corpus)} sentence pairs")
        errors = []
        for k, ((_, links), (src, tgt)) in enumerate(zip(entries, corpus)):
            try:
                AlignmentSet(src, tgt, links).validate()
            except IndexOutOfBounds as exc:
                errors.append(f"line {k + 1}: IndexOutOfBounds: {exc}")
        if errors:
            raise InputError(*errors)
        lines = [write_pharaoh(links) for _, links in entries]
    else:
        if not corpus:
            raise InputError(f"{args.corpus}: EmptyCorpus: no sentence pairs")
        try:
            model = train(corpus, args.iterations, args.diagonal_weight)
        except ValueError as exc:
            raise InputError(f"{type(exc).__name__}: {exc}") from None
        lines = [write_pharaoh(align(model, src, tgt)) for src, tgt in corpus]
    with _output(args.output) as out:
        out.write("".join(line + "\n" for line in lines))
    return 0


def cmd_pr_curve(args) -> int:
    try:
        pairs = read_scored_tsv(args.scored)
    except (ValueError, OSError) as exc:
        raise InputError(f"{args.scored}: {exc}") from None
    interp = args.gold_interpretation
    if interp == "auto":
        three_way = any(p.gold in (Gold.SOME, Gold.UNRELATED) for p in pairs)
        interp = "both" if three_way else "strict"
    names = ["strict", "lenient"] if interp == "both" else [interp]
    curves = {}
    try:
        for name in names:
            curves[name] = pr_curve(pairs, interpretation=name)
    except NoGoldLabels as exc:
        raise InputError(f"NoGoldLabels: {exc}") from None
    with _output(args.output) as out:
        write_pr_csv(curves, out)
    return 0


def _join_scores(records: list[StsRecord], scored_path: str) -> list[StsRecord]:
    scores = {p.id: p.f1 for p in read_scored_tsv(scored_path)}
    ids = [r.id for r in records]
    if set(ids) != set(scores):
        missing = sorted(set(ids) ^ set(scores))[:5]
        raise InputError(f"IdMismatch: ids not present in both inputs, e.g. {missing}")
    return [StsRecord(r.id, r.human, scores[r.id], r.external, r.source, r.target)
            for r in records]


def cmd_sts(args) -> int:
    try:
        records = _join_scores(read_sts_tsv(args.sts), args.scored)
    except (ValueError, OSError) as exc:
        raise InputError(str(exc)) from None
    fields = ["amr"] + (["external"] if all(r.external is not None for r in records) else [])
    rows = []  # statistic, field, param, value, count

    def attempt(stat, field, param, fn):
        try:
            value, count = fn()
            rows.append((stat, field, param, f"{value:.4f}", count))
        except (EmptySelection, ZeroVariance, ConstantInput, ValueError) as exc:
            rows.append((stat, field, param, "", 0))
            log.info("%s %s %s: %s", stat, field, param, exc)

    humans = [r.human for r in records]
    for f in fields:
        attempt("pearson", f, "", lambda: (pearson([getattr(r, f) for r in records], humans),
                                          len(records)))
        for c in STS_CUTOFFS:
            attempt("mean_human_above", f, c, lambda: mean_above(records, f, c))
            attempt("pearson_above", f, c,
                    lambda: _pearson_above(records, f, c))
            for stat in ("median", "mode", "mean"):
                attempt(f"{stat}_above", f, c,
                        lambda: _summary_stat(records, f, c, stat))
        n = min(args.top_n, len(records))
        attempt("top_n_pearson", f, n, lambda: (top_n_correlation(records, f, n), n))

    width = max(len(r[0]) for r in rows)
    for stat, f, param, value, count in rows:
        print(f"{stat:<{width}}  {f:<8}  {str(param):<5}  {value or 'n/a':>8}  n={count}")
    if args.output:
        with _output(args.output) as out:
            w = csv.writer(out, lineterminator="\n")
            w.writerow(["statistic", "field", "param", "value", "count"])
            w.writerows(rows)
    if args.normalized:
        columns = {"human": humans}
        for f in fields:
            columns[f] = [getattr(r, f) for r in records]
        normed = {}
        for name, values in columns.items():
            try:
                normed[name] = [f"{v:.6f}" for v in minmax_normalize(values)]
            except ConstantInput:
                normed[name] = [""] * len(values)
        with _output(args.normalized) as out:
            w = csv.writer(out, delimiter="\t", lineterminator="\n")
            w.writerow(["id"] + list(normed))
            for k, r in enumerate(records):
                w.writerow([r.id] + [normed[name][k] for name in normed])
    return 0


def _pearson_above(records, field, cutoff):
    sel = [r for r in records if getattr(r, field) >= cutoff]
    return pearson([getattr(r, field) for r in sel], [r.human for r in sel]), len(sel)


def _summary_stat(records, field, cutoff, stat):
    s = summarize([getattr(r, field) for r in records], cutoff)
    return getattr(s, stat), s.count


def _read_scores(path: str) -> dict[str, float]:
    text = Path(path).read_text(encoding="utf-8")
    first = text.split("\n", 1)[0].split("\t")
    if "f1" in first and "matched" in first:
        return {p.id: p.f1 for p in read_scored_tsv(path)}
    scores = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'id<TAB>score'")
        try:
            scores[parts[0]] = float(parts[1])
        except ValueError:
            if lineno == 1:
                continue  # header
            raise ValueError(f"{path}:{lineno}: non-numeric score") from None
    return scores


def cmd_rank(args) -> int:
    try:
        a = _read_scores(args.scores_a)
        b = _read_scores(args.scores_b)
        result = rank_and_overlap(a, b, args.n, args.cutoff)
    except (ValueError, OSError) as exc:
        raise InputError(f"{type(exc).__name__}: {exc}") from None
    with _output(args.output) as out:
        out.write("rank\tid\tscore_a\tscore_b\n")
        for k, pid in enumerate(result.top_ids, start=1):
            out.write(f"{k}\t{pid}\t{a[pid]:.6f}\t{b[pid]:.6f}\n")
    print(f"{result.overlap} of the top {args.n} have score_b >= {args.cutoff}", file=sys.stderr)
    return 0


def _add_scoring_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("amr_en", help="AMR file with the English graphs")
    p.add_argument("amr_xx", help="AMR file with the other-language graphs")
    p.add_argument("--alignments", help="Pharaoh file, or 'src ||| tgt ||| links' lines "
                                        "(source = non-English side)")
    p.add_argument("--role-table", help="TSV mapping non-English roles to English ones")
    p.add_argument("--gold", help="gold labels: one per line, or 'id<TAB>label'")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["binary", "threshold", "continuous"])
    p.add_argument("--threshold", type=float)
    p.add_argument("--fuzzy", action="store_true", help="fuzzy concept matching")
    p.add_argument("--oracle", action="store_true",
                   help="exhaustive matching when graphs are small enough")
    p.add_argument("--monolingual", action="store_true",
                   help="both graphs are English: skip role translation and projection")
    p.add_argument("--raw", action="store_true",
                   help="plain Smatch on the graphs as written (no normalization)")
    p.add_argument("--lenient-io", action="store_true", help="skip bad records instead of failing")
    p.add_argument("-o", "--output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="amrdiv", description="AMR-based semantic divergence")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="validate AMR files and check the round trip")
    p.add_argument("files", nargs="+")
    p.add_argument("-o", "--output", help="write re-serialized graphs here")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("score", help="score aligned AMR pairs")
    _add_scoring_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("score-corpus", help="score a corpus with a worker pool")
    _add_scoring_flags(p)
    p.add_argument("--workers", type=int, default=0)
    p.set_defaults(func=cmd_score_corpus)

    p = sub.add_parser("align", help="train and apply the built-in aligner, or check a Pharaoh file")
    p.add_argument("corpus", help="'source ||| target' lines")
    p.add_argument("--pharaoh", help="existing alignments to validate and pass through")
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--diagonal-weight", type=float, default=0.0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("pr-curve", help="precision/recall over score thresholds")
    p.add_argument("scored")
    p.add_argument("--gold-interpretation", choices=["auto", "strict", "lenient", "both"],
                   default="auto")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_pr_curve)

    p = sub.add_parser("sts", help="compare scores with human similarity judgments")
    p.add_argument("sts")
    p.add_argument("scored")
    p.add_argument("--top-n", type=int, default=20)
    p.add_argument("-o", "--output", help="machine-readable CSV report")
    p.add_argument("--normalized", help="TSV of min-max normalized columns")
    p.set_defaults(func=cmd_sts)

    p = sub.add_parser("rank", help="top-n by one score and overlap with another")
    p.add_argument("scores_a")
    p.add_argument("scores_b")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--cutoff", type=float, default=1.0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_rank)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        for line in exc.lines:
            print(line, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
