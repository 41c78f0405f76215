"""platonic-extract command line: vision, text, captions, models."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .captions import HttpLLMClient, synthesize_captions
from .dataset import load_items
from .errors import (
    CaptionClientError,
    CaptionSynthesisError,
    ConfigError,
    DatasetError,
    DecodeError,
    ExtractError,
    ModelError,
)
from .extract import ExtractionConfig, extract_text, extract_vision
from .models import list_models

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def cmd_vision(args) -> int:
    items = load_items(args.dataset)
    config = ExtractionConfig(
        model_id=args.model,
        modality="vision",
        pooling=args.pooling,
        n_o=args.n_o,
        frame_plan=args.frame_plan,
    )
    result = extract_vision(config, items, args.out, allow_skip=args.allow_skip)
    _emit({
        "command": "vision",
        "version": __version__,
        "archive": str(result.path),
        "item_count": len(result.item_ids),
        "skipped": list(result.skipped),
    })
    return EXIT_OK


def cmd_text(args) -> int:
    items = load_items(args.dataset)
    archives = []
    for n_c in args.n_c:
        config = ExtractionConfig(
            model_id=args.model,
            modality="text",
            pooling=args.pooling,
            n_c=n_c,
            caption_seed=args.caption_seed,
        )
        result = extract_text(config, items, f"{args.out_root}/nc{n_c}")
        archives.append({"n_c": n_c, "path": str(result.path)})
    _emit({
        "command": "text",
        "version": __version__,
        "archives": archives,
        "item_count": len(items),
    })
    return EXIT_OK


def cmd_captions(args) -> int:
    client = HttpLLMClient.from_env()
    if args.caption is not None:
        _emit({
            "command": "captions",
            "version": __version__,
            "captions": synthesize_captions(args.caption, client, cache_dir=args.cache),
        })
        return EXIT_OK
    written = 0
    with open(args.input, "r", encoding="utf-8") as src, \
            open(args.out, "w", encoding="utf-8") as dst:
        for line in src:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            captions = synthesize_captions(record["caption"], client, cache_dir=args.cache)
            dst.write(json.dumps({"item_id": record["item_id"], "captions": captions}) + "\n")
            written += 1
    _emit({"command": "captions", "version": __version__, "out": args.out, "items": written})
    return EXIT_OK


def cmd_models(args) -> int:
    _emit({"command": "models", "version": __version__, "models": list_models()})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="platonic-extract",
                                     description="Encode datasets into embedding archives.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    vision = commands.add_parser("vision", help="encode video frames into one archive")
    vision.add_argument("--dataset", required=True, help="JSONL dataset manifest")
    vision.add_argument("--model", required=True)
    vision.add_argument("--out", required=True, help="archive directory to write")
    vision.add_argument("--n-o", dest="n_o", type=int, required=True,
                        help="native sub-clip length of the model")
    vision.add_argument("--frame-plan", type=_int_list, required=True,
                        help="comma-separated frame budgets, e.g. 16,32,80")
    vision.add_argument("--pooling", choices=("class_token", "token_mean"),
                        default="token_mean")
    vision.add_argument("--allow-skip", action="store_true",
                        help="drop undecodable items instead of refusing the archive")
    vision.set_defaults(func=cmd_vision)

    text = commands.add_parser("text", help="encode captions; one archive per n_c")
    text.add_argument("--dataset", required=True)
    text.add_argument("--model", required=True)
    text.add_argument("--out-root", required=True,
                      help="parent directory; archives land at <out-root>/nc<N>")
    text.add_argument("--n-c", dest="n_c", type=_int_list, default=(1,),
                      help="comma-separated caption counts, e.g. 1,10")
    text.add_argument("--pooling", choices=("class_token", "token_mean"),
                      default="token_mean")
    text.add_argument("--caption-seed", type=int, default=0)
    text.set_defaults(func=cmd_text)

    captions = commands.add_parser("captions",
                                   help="synthesize ten short captions per long caption")
    source = captions.add_mutually_exclusive_group(required=True)
    source.add_argument("--caption", help="one long caption; prints the ten results")
    source.add_argument("--input", help="JSONL of {item_id, caption} records")
    captions.add_argument("--out", help="JSONL output (required with --input)")
    captions.add_argument("--cache", help="directory for the on-disk response cache")
    captions.set_defaults(func=cmd_captions)

    models = commands.add_parser("models", help="list registered model ids")
    models.set_defaults(func=cmd_models)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "captions" and args.input is not None and not args.out:
        parser.error("--out is required with --input")
    try:
        return args.func(args)
    except (ConfigError, DatasetError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DecodeError, CaptionClientError, CaptionSynthesisError, ExtractError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
