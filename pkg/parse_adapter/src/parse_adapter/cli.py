"""parse-adapter command line.

    parse-adapter --in corpus.jsonl --out corpus.conllu --backend rule

Exit codes: 0 success (parse failures become placeholder blocks and do not
fail the run), 1 usage error, 2 data error (unreadable inputs, unavailable
backend), 3 numerical error (unused here, reserved to match sibling tools).
"""

from __future__ import annotations

import argparse
import json
import sys

from .adapter import AdapterConfig, parse_corpus
from .errors import DataError

PROG = "parse-adapter"
VERSION = "0.1.0"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems; 2 is reserved for data errors here
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog=PROG, description="Parse a JSONL corpus into CoNLL-U.")
    parser.add_argument("--version", action="version", version=f"{PROG} {VERSION}")
    parser.add_argument("--in", dest="input", metavar="FILE", help="JSONL corpus to parse")
    parser.add_argument("--out", dest="output", metavar="FILE", help="CoNLL-U file to write")
    parser.add_argument(
        "--backend",
        default="rule",
        metavar="NAME",
        help="parser backend: rule or spacy[:model] (default rule)",
    )
    parser.add_argument(
        "--batch-size",
        type=int,
        default=32,
        metavar="N",
        help="documents per backend batch (default 32)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.input is None:
            raise _UsageError("--in is required")
        if args.output is None:
            raise _UsageError("--out is required")
        cfg = AdapterConfig(
            input_path=args.input,
            output_path=args.output,
            backend=args.backend,
            batch_size=args.batch_size,
        )
        summary = parse_corpus(cfg)
    except _UsageError as exc:
        print(f"{PROG}: usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except ValueError as exc:
        print(f"{PROG}: usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"{PROG}: data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{PROG}: data error: {exc}", file=sys.stderr)
        return 2
    payload = {
        "command": PROG,
        "backend": summary.backend,
        "backend_version": summary.backend_version,
        "documents": summary.documents,
        "parse_errors": summary.parse_errors,
        "failures": [
            {"doc_id": doc_id, "error": message} for doc_id, message in summary.failures
        ],
        "output": str(args.output),
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
