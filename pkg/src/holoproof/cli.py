"""Command-line front end: ``holoproof --all`` proves the shipped corpus."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dsl import DslError
from .prover import CORPUS_DIR, Options, Prover, SpecError, _id_key, document, load_corpus
from .series import CATALOG

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="holoproof",
        description="Prove special-function identities from .hid spec files by exact holonomic methods.",
        epilog="Expansion catalog: " + ", ".join(CATALOG) + ".  "
               "Exit status: 0 all proved (assumption-gated included), 1 some proof failed, "
               "2 parse or configuration error.",
    )
    sel = p.add_mutually_exclusive_group()
    sel.add_argument("--identity", action="append", metavar="ID", help="prove this identity (repeatable)")
    sel.add_argument("--all", action="store_true", help="prove every identity in the corpus (default)")
    p.add_argument("--order", type=int, default=30, metavar="N", help="series truncation order (default 30)")
    p.add_argument("--json", metavar="PATH", help="write the reports as JSON ('-' for stdout)")
    p.add_argument("--check-certificates", action="store_true",
                   help="also verify certificates stored in the spec files and print all certificates")
    p.add_argument("--corpus", metavar="DIR", default=None, help=f"directory of .hid files (default {CORPUS_DIR})")
    p.add_argument("--max-ct-order", type=int, default=4, metavar="K",
                   help="largest telescoper order to search (default 4)")
    p.add_argument("--verbose", action="store_true", help="print operators, zero tests and notes")
    return p


def _error(msg: str) -> int:
    print(f"holoproof: error: {msg}", file=sys.stderr)
    return EXIT_CONFIG


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.order < 1:
        return _error("--order must be positive")
    if args.max_ct_order < 1:
        return _error("--max-ct-order must be positive")
    try:
        doc = load_corpus(args.corpus)
    except (DslError, FileNotFoundError, OSError) as exc:
        return _error(str(exc))
    if args.identity:
        idents = []
        for name in args.identity:
            ident = doc.find(name)
            if ident is None:
                known = ", ".join(i.name for i in doc.identities)
                return _error(f"unknown identity {name!r} (known: {known})")
            idents.append(ident)
    else:
        idents = list(doc.identities)
    prover = Prover(doc, Options(args.order, args.max_ct_order, args.check_certificates))
    try:
        reports = [prover.prove(i) for i in idents]
    except SpecError as exc:
        return _error(str(exc))
    reports.sort(key=lambda r: _id_key(r.id))

    failed = [r for r in reports if not r.ok]
    gated = sum(1 for r in reports if r.verdict == "ASSUMPTION_GATED")
    out = sys.stderr if args.json == "-" else sys.stdout
    for r in reports:
        print(r.to_text(verbose=args.verbose), file=out)
        if args.check_certificates and not args.verbose:
            for c in r.certificates:
                print(f"  certificate  {c}", file=out)
    print(f"{len(reports) - len(failed)}/{len(reports)} proved"
          + (f" ({gated} assumption-gated)" if gated else "") + (f", {len(failed)} failed" if failed else ""), file=out)

    if args.json:
        text = json.dumps(document(reports, args.order), indent=2, sort_keys=True) + "\n"
        if args.json == "-":
            sys.stdout.write(text)
        else:
            try:
                Path(args.json).write_text(text, encoding="utf-8")
            except OSError as exc:
                return _error(f"cannot write {args.json}: {exc}")
    return EXIT_FAILED if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
