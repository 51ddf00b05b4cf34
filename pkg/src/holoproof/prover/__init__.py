"""Proof strategies, the identity corpus, and report generation."""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

from ..dsl import Document, DslError, Identity, ListNode, Str, parse
from ..evaluate import EvalError
from .report import ASSUMPTION_GATED, FAILED, PROVED, ProofReport, document
from .strategies import STRATEGIES, Context, Options, SpecError, stored_certificate

CORPUS_DIR = Path(__file__).resolve().parent.parent / "corpus"

__all__ = [
    "ASSUMPTION_GATED", "CORPUS_DIR", "FAILED", "PROVED", "Options", "ProofReport", "Prover", "SpecError",
    "document", "load_corpus", "mutate", "stored_certificate",
]


def load_corpus(directory=None) -> Document:
    """All identities in the ``*.hid`` files of a directory, in file-name order."""
    path = Path(directory) if directory is not None else CORPUS_DIR
    if not path.is_dir():
        raise FileNotFoundError(f"corpus directory {path} not found")
    ids = []
    seen = set()
    for f in sorted(path.glob("*.hid")):
        for ident in parse(f.read_text(encoding="utf-8"), source=f.name).identities:
            if ident.name in seen:
                raise DslError("duplicate-identity", f"identity {ident.name!r} defined twice", *ident.loc,
                               source=f.name)
            seen.add(ident.name)
            ids.append(ident)
    return Document(tuple(ids))


def mutate(ident: Identity) -> Identity:
    """The identity with its registered mutation applied to the named field."""
    m = ident.get("mutation")
    if not isinstance(m, ListNode) or len(m.items) != 2 or not isinstance(m.items[0], Str):
        raise SpecError(ident.name, "no mutation registered (expected [\"field\", value])")
    key, value = m.items[0].value, m.items[1]
    if ident.get(key) is None:
        raise SpecError(ident.name, f"mutation targets missing field '{key}'")
    fields = tuple((k, value if k == key else v) for k, v in ident.fields if k != "mutation")
    return replace(ident, fields=fields)


class Prover:
    """Proves identities of one document, caching reports so that lemmas are
    proved once and can be cited by later entries."""

    def __init__(self, doc: Document, options: Options | None = None):
        self.doc = doc
        self.options = options or Options()
        self._done: dict[str, ProofReport] = {}
        self._active: set[str] = set()

    def lookup(self, name: str) -> Identity | None:
        return self.doc.find(name)

    def resolve(self, name: str) -> ProofReport | None:
        ident = self.doc.find(name)
        return None if ident is None else self.prove(ident)

    def prove(self, ident: Identity) -> ProofReport:
        cached = self._done.get(ident.name)
        if cached is not None and self.doc.find(ident.name) is ident:
            return cached
        if ident.name in self._active:
            raise SpecError(ident.name, "circular dependency")
        self._active.add(ident.name)
        try:
            rep = self._run(ident)
        finally:
            self._active.discard(ident.name)
        if self.doc.find(ident.name) is ident:
            self._done[ident.name] = rep
        return rep

    def _run(self, ident: Identity) -> ProofReport:
        strategy = ident.get("strategy")
        fn = STRATEGIES.get(getattr(strategy, "id", None))
        if fn is None:
            raise SpecError(ident.name, "missing or unknown strategy")
        ctx = Context(self.options, self.resolve, self.lookup)
        try:
            rep = fn(ident, ctx)
        except (EvalError, ArithmeticError, ValueError) as exc:
            if isinstance(exc, (SpecError, DslError)):
                raise
            rep = ProofReport(ident.name, strategy.id)
            rep.fail(f"{type(exc).__name__}: {exc}")
        return rep.finish()

    def prove_all(self) -> list[ProofReport]:
        reps = [self.prove(ident) for ident in self.doc.identities]
        return sorted(reps, key=lambda r: _id_key(r.id))


def _id_key(name: str):
    parts = []
    for p in name.replace("-", ".").split("."):
        parts.append((0, int(p), "") if p.isdigit() else (1, 0, p))
    return tuple(parts)
