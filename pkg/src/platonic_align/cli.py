"""Command-line entry point.

Every subcommand prints a RunReport JSON object to stdout:

    {command, params, version, inputs, result, wall_time_ms}

The params echo contains fully resolved values, so re-feeding them
reproduces the run byte-for-byte apart from wall_time_ms. Exit codes:
0 success, 2 validation/usage error, 3 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

from platonic_align import __version__
from platonic_align.aggregate import mean_segments
from platonic_align.archive import Archive, first_pairing_mismatch, open_archive, paired
from platonic_align.errors import (
    ArchiveIOError,
    FormatError,
    ParameterError,
    PlatonicAlignError,
)
from platonic_align.knn import (
    DEFAULT_K,
    DEFAULT_RETRIEVAL_K,
    DEFAULT_TAU,
    METRICS,
    alignment_curve,
    weighted_knn_retrieval,
)
from platonic_align.scaling import DEFAULT_RESTARTS, ScoreGrid, fit_scaling_law
from platonic_align.sweep import best_layer_pair, model_matrix
from platonic_align.temporal import (
    DEFAULT_TEMPORAL_K,
    RelatedGroup,
    negative_alignment,
    related_ranking,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3

THREADS_ENV = "PLATONIC_ALIGN_THREADS"

# k has a paper-backed default only at this dataset size; anywhere else the
# caller must choose explicitly.
DEFAULT_K_N = 1024


def resolve_threads(flag_value: int | None) -> int:
    if flag_value is not None:
        if flag_value < 1:
            raise ParameterError(f"--threads must be >= 1, got {flag_value}")
        return flag_value
    env = os.environ.get(THREADS_ENV)
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise ParameterError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        if value < 1:
            raise ParameterError(f"{THREADS_ENV} must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def _resolve_k(flag_value: int | None, n: int) -> int:
    if flag_value is not None:
        return flag_value
    if n == DEFAULT_K_N:
        return DEFAULT_K
    raise ParameterError(
        f"--k is required for N = {n}; the default k={DEFAULT_K} applies only to N={DEFAULT_K_N}"
    )


def _layer_flag(text: str) -> str | int:
    if text == "best":
        return "best"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'best', got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _summarize(archive: Archive) -> dict:
    m = archive.manifest
    return {
        "id": archive.identifier,
        "path": str(archive.path),
        "model_id": m.model_id,
        "modality": m.modality,
        "item_count": m.item_count,
        "layer_count": m.layer_count,
        "segment_count": m.segment_count,
        "dim": m.dim,
        "variant": m.variant,
    }


def _write_report(command: str, params: dict, inputs: list[dict], result: dict, started: float, out: str | None) -> None:
    report = {
        "command": command,
        "params": params,
        "version": __version__,
        "inputs": inputs,
        "result": result,
        "wall_time_ms": (time.monotonic() - started) * 1000.0,
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if out is not None:
        try:
            Path(out).write_text(text + "\n", encoding="utf-8")
        except OSError as exc:
            raise ArchiveIOError(f"cannot write report to {out}: {exc}") from exc


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ArchiveIOError(f"cannot read {what} at {path}: {exc}") from exc


def _load_labels(path: str, archive: Archive) -> list[str]:
    """Read an `item_id,label` CSV and order labels by the archive's items."""
    rows = list(csv.reader(_read_text(path, "labels file").splitlines()))
    if not rows or rows[0] != ["item_id", "label"]:
        raise FormatError(f"labels file {path} must start with header 'item_id,label'")
    mapping = {}
    for row in rows[1:]:
        if len(row) != 2:
            raise FormatError(f"labels file {path} has a malformed row: {row!r}")
        if row[0] in mapping:
            raise FormatError(f"labels file {path} repeats item_id {row[0]!r}")
        mapping[row[0]] = row[1]
    missing = [i for i in archive.manifest.item_ids if i not in mapping]
    if missing:
        raise ParameterError(f"labels file {path} is missing item_ids: {missing[:5]}")
    return [mapping[i] for i in archive.manifest.item_ids]


def _load_grid(path: str) -> ScoreGrid:
    rows = list(csv.reader(_read_text(path, "grid file").splitlines()))
    if not rows or rows[0] != ["n_f", "n_c", "score"]:
        raise FormatError(f"grid file {path} must start with header 'n_f,n_c,score'")
    points = []
    for row in rows[1:]:
        if len(row) != 3:
            raise FormatError(f"grid file {path} has a malformed row: {row!r}")
        try:
            points.append((int(row[0]), int(row[1]), float(row[2])))
        except ValueError as exc:
            raise FormatError(f"grid file {path} has a non-numeric row {row!r}: {exc}") from exc
    return ScoreGrid(points)


def _load_groups(path: str) -> list[RelatedGroup]:
    rows = list(csv.reader(_read_text(path, "groups file").splitlines()))
    if not rows or rows[0] != ["anchor", "related"]:
        raise FormatError(f"groups file {path} must start with header 'anchor,related'")
    groups = []
    for row in rows[1:]:
        if len(row) != 2:
            raise FormatError(f"groups file {path} has a malformed row: {row!r}")
        try:
            anchor = int(row[0])
            related = [int(part) for part in row[1].split(";") if part != ""]
        except ValueError as exc:
            raise FormatError(f"groups file {path} has a non-numeric row {row!r}: {exc}") from exc
        groups.append(RelatedGroup(anchor=anchor, related=related))
    return groups


def _open(path: str) -> Archive:
    return open_archive(path)


def _require_paired(a: Archive, b: Archive) -> None:
    if not paired(a, b):
        from platonic_align.errors import PairingError

        raise PairingError(
            f"archives {a.identifier!r} and {b.identifier!r} are not item-aligned: "
            f"{first_pairing_mismatch(a, b)}"
        )


def _features(archive: Archive, layer: int, segments: int | None):
    s = archive.manifest.segment_count if segments is None else segments
    return mean_segments(archive.load_layer(layer), s)


def _layer_list(flag: str | int, layer_count: int, name: str) -> list[int]:
    if flag == "best":
        return list(range(layer_count))
    layer = int(flag)
    if not 0 <= layer < layer_count:
        raise ParameterError(f"{name} {layer} out of range [0, {layer_count})")
    return [layer]


def cmd_align(args: argparse.Namespace) -> None:
    started = time.monotonic()
    ax = _open(args.x)
    ay = _open(args.y)
    _require_paired(ax, ay)
    k = _resolve_k(args.k, ax.manifest.item_count)
    layers_x = _layer_list(args.layer_x, ax.manifest.layer_count, "--layer-x")
    layers_y = _layer_list(args.layer_y, ay.manifest.layer_count, "--layer-y")

    pair = best_layer_pair(
        ax,
        ay,
        k,
        args.metric,
        spec_x=args.segments_x,
        spec_y=args.segments_y,
        layers_x=layers_x,
        layers_y=layers_y,
    )
    layer_x, layer_y, score = pair.best
    result = {
        "score": score,
        "layer_x": layer_x,
        "layer_y": layer_y,
        "k": k,
        "metric": args.metric,
        "n": ax.manifest.item_count,
    }
    if len(layers_x) > 1 or len(layers_y) > 1:
        result["matrix"] = {
            "layers_x": layers_x,
            "layers_y": layers_y,
            "scores": pair.scores.tolist(),
        }
    params = {
        "x": args.x,
        "y": args.y,
        "k": k,
        "metric": args.metric,
        "layer_x": args.layer_x,
        "layer_y": args.layer_y,
        "segments_x": args.segments_x,
        "segments_y": args.segments_y,
        "out": args.out,
    }
    _write_report("align", params, [_summarize(ax), _summarize(ay)], result, started, args.out)


def _archive_dirs(root: str) -> list[Path]:
    root_path = Path(root)
    if not root_path.is_dir():
        raise ArchiveIOError(f"archive directory {root} does not exist")
    dirs = sorted(p for p in root_path.iterdir() if p.is_dir())
    if not dirs:
        raise ParameterError(f"{root} contains no archive subdirectories")
    return dirs


def cmd_matrix(args: argparse.Namespace) -> None:
    started = time.monotonic()
    vision = [_open(p) for p in _archive_dirs(args.vision_dir)]
    text = [_open(p) for p in _archive_dirs(args.text_dir)]
    k = _resolve_k(args.k, vision[0].manifest.item_count)
    threads = resolve_threads(args.threads)

    mm = model_matrix(vision, text, k, args.metric, threads=threads)
    result = {
        "rows": mm.rows,
        "cols": mm.cols,
        "cells": [[asdict(cell) for cell in row] for row in mm.cells],
        "k": k,
        "metric": args.metric,
    }
    csv_path = f"{args.out_prefix}.csv"
    try:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([""] + mm.cols)
            for row_id, row in zip(mm.rows, mm.cells):
                writer.writerow([row_id] + [repr(cell.score) for cell in row])
    except OSError as exc:
        raise ArchiveIOError(f"cannot write {csv_path}: {exc}") from exc

    params = {
        "vision_dir": args.vision_dir,
        "text_dir": args.text_dir,
        "k": k,
        "metric": args.metric,
        "threads": threads,
        "out_prefix": args.out_prefix,
    }
    inputs = [_summarize(a) for a in vision + text]
    _write_report("matrix", params, inputs, result, started, f"{args.out_prefix}.json")


def cmd_fit_scaling(args: argparse.Namespace) -> None:
    started = time.monotonic()
    grid = _load_grid(args.grid)
    fit = fit_scaling_law(grid, restarts=args.restarts, seed=args.seed)
    params = {
        "grid": args.grid,
        "restarts": args.restarts,
        "seed": args.seed,
        "out": args.out,
    }
    result = asdict(fit)
    result["n_points"] = len(grid.points)
    _write_report("fit-scaling", params, [], result, started, args.out)


def cmd_retrieval(args: argparse.Namespace) -> None:
    started = time.monotonic()
    train = _open(args.train)
    test = _open(args.test)
    train_labels = _load_labels(args.train_labels, train)
    test_labels = _load_labels(args.test_labels, test)

    layer_train = train.manifest.layer_count - 1 if args.layer is None else args.layer
    layer_test = test.manifest.layer_count - 1 if args.layer is None else args.layer
    accuracy = weighted_knn_retrieval(
        _features(train, layer_train, args.segments),
        train_labels,
        _features(test, layer_test, args.segments),
        test_labels,
        k=args.k,
        tau=args.tau,
    )
    params = {
        "train": args.train,
        "train_labels": args.train_labels,
        "test": args.test,
        "test_labels": args.test_labels,
        "k": args.k,
        "tau": args.tau,
        "layer": args.layer,
        "segments": args.segments,
        "out": args.out,
    }
    result = {
        "accuracy": accuracy,
        "k": args.k,
        "tau": args.tau,
        "layer_train": layer_train,
        "layer_test": layer_test,
        "n_train": train.manifest.item_count,
        "n_test": test.manifest.item_count,
    }
    _write_report("retrieval", params, [_summarize(train), _summarize(test)], result, started, args.out)


def cmd_temporal(args: argparse.Namespace) -> None:
    started = time.monotonic()
    video = _open(args.video)
    pos = _open(args.pos)
    neg = _open(args.neg)
    _require_paired(video, pos)
    _require_paired(pos, neg)

    if args.layer_video == "best" or args.layer_text == "best":
        layers_v = _layer_list(args.layer_video, video.manifest.layer_count, "--layer-video")
        layers_t = _layer_list(args.layer_text, pos.manifest.layer_count, "--layer-text")
        # "best" means the pair maximizing the positive alignment; the
        # negative probe then reuses that pair.
        pair = best_layer_pair(video, pos, args.k, args.metric, layers_x=layers_v, layers_y=layers_t)
        layer_video, layer_text, _ = pair.best
    else:
        layer_video = int(args.layer_video)
        layer_text = int(args.layer_text)

    probe = negative_alignment(
        _features(video, layer_video, None),
        _features(pos, layer_text, None),
        _features(neg, layer_text, None),
        k=args.k,
        metric=args.metric,
    )
    result = {
        "positive_score": probe.positive_score,
        "negative_score": probe.negative_score,
        "drop": probe.drop,
        "k": probe.k,
        "n": probe.n,
        "metric": probe.metric,
        "layer_video": layer_video,
        "layer_text": layer_text,
    }
    if args.groups is not None:
        groups = _load_groups(args.groups)
        ranking = related_ranking(_features(pos, layer_text, None), groups, args.metric)
        result["related_ranking"] = {
            "orderings": [list(o) for o in ranking.orderings],
            "first_slot_counts": list(ranking.first_slot_counts),
        }
    params = {
        "video": args.video,
        "pos": args.pos,
        "neg": args.neg,
        "k": args.k,
        "metric": args.metric,
        "layer_video": args.layer_video,
        "layer_text": args.layer_text,
        "groups": args.groups,
        "out": args.out,
    }
    inputs = [_summarize(video), _summarize(pos), _summarize(neg)]
    _write_report("temporal", params, inputs, result, started, args.out)


def cmd_curve(args: argparse.Namespace) -> None:
    started = time.monotonic()
    ax = _open(args.x)
    ay = _open(args.y)
    _require_paired(ax, ay)
    layers_x = _layer_list(args.layer_x, ax.manifest.layer_count, "--layer-x")
    layers_y = _layer_list(args.layer_y, ay.manifest.layer_count, "--layer-y")
    points = alignment_curve(
        _features(ax, layers_x[0], args.segments_x),
        _features(ay, layers_y[0], args.segments_y),
        args.ks,
        args.metric,
    )
    if args.out is not None:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["k", "score"])
                for k, score in points:
                    writer.writerow([k, repr(score)])
        except OSError as exc:
            raise ArchiveIOError(f"cannot write {args.out}: {exc}") from exc
    params = {
        "x": args.x,
        "y": args.y,
        "ks": args.ks,
        "metric": args.metric,
        "layer_x": args.layer_x,
        "layer_y": args.layer_y,
        "segments_x": args.segments_x,
        "segments_y": args.segments_y,
        "out": args.out,
    }
    result = {"points": [{"k": k, "score": score} for k, score in points]}
    _write_report("curve", params, [_summarize(ax), _summarize(ay)], result, started, None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platonic-align",
        description="Mutual k-NN alignment analyses over embedding archives.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    align = sub.add_parser("align", help="mutual k-NN alignment between two archives")
    align.add_argument("--x", required=True, help="first archive directory")
    align.add_argument("--y", required=True, help="second archive directory")
    align.add_argument("--k", type=int, default=None, help=f"neighbors (default {DEFAULT_K} when N={DEFAULT_K_N})")
    align.add_argument("--metric", choices=METRICS, default="cosine")
    align.add_argument("--layer-x", type=_layer_flag, default="best", help="layer index or 'best'")
    align.add_argument("--layer-y", type=_layer_flag, default="best", help="layer index or 'best'")
    align.add_argument("--segments-x", type=int, default=None, help="segments to average (default: all)")
    align.add_argument("--segments-y", type=int, default=None, help="segments to average (default: all)")
    align.add_argument("--out", default=None, help="also write the JSON report here")
    align.set_defaults(func=cmd_align)

    matrix = sub.add_parser("matrix", help="best-pair alignment for every archive combination")
    matrix.add_argument("--vision-dir", required=True, help="directory of row archives")
    matrix.add_argument("--text-dir", required=True, help="directory of column archives")
    matrix.add_argument("--k", type=int, default=None)
    matrix.add_argument("--metric", choices=METRICS, default="cosine")
    matrix.add_argument("--threads", type=int, default=None, help=f"worker count (default: {THREADS_ENV} or all cores)")
    matrix.add_argument("--out-prefix", required=True, help="writes <prefix>.csv and <prefix>.json")
    matrix.set_defaults(func=cmd_matrix)

    fit = sub.add_parser("fit-scaling", help="fit the saturation scaling law to a score grid")
    fit.add_argument("--grid", required=True, help="CSV with header n_f,n_c,score")
    fit.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out", default=None, help="also write the JSON report here")
    fit.set_defaults(func=cmd_fit_scaling)

    retrieval = sub.add_parser("retrieval", help="weighted k-NN retrieval accuracy")
    retrieval.add_argument("--train", required=True)
    retrieval.add_argument("--train-labels", required=True, help="CSV with header item_id,label")
    retrieval.add_argument("--test", required=True)
    retrieval.add_argument("--test-labels", required=True, help="CSV with header item_id,label")
    retrieval.add_argument("--k", type=int, default=DEFAULT_RETRIEVAL_K)
    retrieval.add_argument("--tau", type=float, default=DEFAULT_TAU)
    retrieval.add_argument("--layer", type=int, default=None, help="layer index (default: deepest)")
    retrieval.add_argument("--segments", type=int, default=None)
    retrieval.add_argument("--out", default=None)
    retrieval.set_defaults(func=cmd_retrieval)

    temporal = sub.add_parser("temporal", help="reorder-negative alignment drop")
    temporal.add_argument("--video", required=True)
    temporal.add_argument("--pos", required=True)
    temporal.add_argument("--neg", required=True)
    temporal.add_argument("--k", type=int, default=DEFAULT_TEMPORAL_K)
    temporal.add_argument("--metric", choices=METRICS, default="cosine")
    temporal.add_argument("--layer-video", type=_layer_flag, default="best")
    temporal.add_argument("--layer-text", type=_layer_flag, default="best")
    temporal.add_argument("--groups", default=None, help="CSV with header anchor,related")
    temporal.add_argument("--out", default=None)
    temporal.set_defaults(func=cmd_temporal)

    curve = sub.add_parser("curve", help="alignment score across several k values")
    curve.add_argument("--x", required=True)
    curve.add_argument("--y", required=True)
    curve.add_argument("--ks", type=_int_list, required=True, help="comma-separated k values")
    curve.add_argument("--metric", choices=METRICS, default="cosine")
    curve.add_argument("--layer-x", type=int, default=0)
    curve.add_argument("--layer-y", type=int, default=0)
    curve.add_argument("--segments-x", type=int, default=None)
    curve.add_argument("--segments-y", type=int, default=None)
    curve.add_argument("--out", default=None, help="write plot-ready CSV k,score here")
    curve.set_defaults(func=cmd_curve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ArchiveIOError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PlatonicAlignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
