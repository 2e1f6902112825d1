"""Command line entry point for the bridge server."""

from __future__ import annotations

import argparse
import logging
import sys

from mlmbridge.config import BridgeConfig, ConfigError
from mlmbridge.server import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlm-bridge",
        description=(
            "Serve a fill-mask language model (and optional classifier) over "
            "the newline-delimited JSON protocol: ping, predict, fill_mask."
        ),
    )
    parser.add_argument(
        "--model",
        required=True,
        help="model identifier: a save_pretrained directory or hub name",
    )
    parser.add_argument(
        "--classifier",
        default=None,
        help="optional classifier spec: triggers:<file> or linear:<file>",
    )
    parser.add_argument(
        "--transport",
        choices=("stdio", "tcp"),
        default="stdio",
        help="serve over stdin/stdout or a TCP socket (default: stdio)",
    )
    parser.add_argument(
        "--port",
        type=int,
        default=0,
        help="TCP port to bind; 0 picks a free one and prints 'PORT <n>'",
    )
    parser.add_argument(
        "--max-batch",
        type=int,
        default=16,
        help="most mask positions accepted per fill_mask request (default 16)",
    )
    parser.add_argument(
        "--verbose", action="store_true", help="log request handling to stderr"
    )
    return parser


def entry(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = BridgeConfig(
            model=args.model,
            classifier=args.classifier,
            transport=args.transport,
            port=args.port,
            max_batch=args.max_batch,
        )
        serve(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 0
    return 0


if __name__ == "__main__":
    sys.exit(entry())
