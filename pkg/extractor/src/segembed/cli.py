"""Command line: extract embeddings for one document.

    segembed extract --input doc.json --encoder stub:16 --context 512 \
        --out doc.emb

Exit codes: 1 usage, 2 input problems, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from .encoders import MisalignmentError, make_encoder
from .extract import extract


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class UsageError(Exception):
    pass


def build_parser() -> _Parser:
    parser = _Parser(prog="segembed",
                     description="Contextual token embedding extraction")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("extract", help="embed one document")
    p.add_argument("--input", required=True, help="document JSON file")
    p.add_argument("--encoder", required=True,
                   help="encoder id, e.g. stub:16")
    p.add_argument("--context", type=int, required=True,
                   help="segment length L (even); stride is L/2")
    p.add_argument("--out", required=True, help="output .emb path")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        encoder = make_encoder(args.encoder)
        out = extract(args.input, encoder, args.context, args.out)
        print(f"wrote {out} and {out.name}.json")
        return 0
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except (FileNotFoundError, MisalignmentError, ValueError) as err:
        print(f"input error: {err}", file=sys.stderr)
        return 2
    except (RuntimeError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


def run() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
