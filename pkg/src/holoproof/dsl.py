"""The identity-spec language: tokenizer, parser, canonical printer.

A document is a sequence of blocks

    identity "10.1.52" {
      strategy: telescope_de;
      var: z;
      lhs: sum(k, 0, inf, sphj(k, z)^2);
      rhs: si(2*z)/(2*z);
    }

Field values are expressions, strings or bracketed lists.  The grammar is
given in EBNF in docs/grammar.md.
"""

from __future__ import annotations

import difflib
import re
from dataclasses import dataclass, field
from fractions import Fraction


class DslError(ValueError):
    def __init__(self, code: str, message: str, line: int = 0, col: int = 0, source: str = ""):
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{col}: {code}: {message}")
        self.code = code
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Num(Node):
    value: int
    loc: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Name(Node):
    id: str
    loc: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Str(Node):
    value: str
    loc: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class OpSym(Node):
    """``D[z]`` or ``S[n]``."""
    kind: str
    var: str
    loc: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Call(Node):
    func: str
    args: tuple
    loc: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Bin(Node):
    op: str
    left: Node
    right: Node
    loc: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Neg(Node):
    operand: Node
    loc: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class ListNode(Node):
    items: tuple
    loc: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Identity:
    name: str
    fields: tuple                   # ((key, Node), ...) in source order
    loc: tuple = field(default=(0, 0), compare=False, repr=False)

    def get(self, key: str, default=None):
        for k, v in self.fields:
            if k == key:
                return v
        return default

    def keys(self):
        return [k for k, _ in self.fields]


@dataclass(frozen=True)
class Document:
    identities: tuple

    def find(self, name: str) -> Identity | None:
        for ident in self.identities:
            if ident.name == name:
                return ident
        return None


# ---------------------------------------------------------------------------
# vocabulary (arity None = variadic)

FUNCTIONS = {
    # elementary and integral functions
    "sin": 1, "cos": 1, "sinh": 1, "cosh": 1, "exp": 1, "log": 1, "sqrt": 1,
    "si": 1, "ci": 1, "ei": 1, "e1": 1,
    # Bessel family
    "sphj": 2, "sphy": 2, "sphi": 2, "legendre": 2,
    "besselj": 2, "djnu": 2, "dynu": 2, "dinu": 2, "dknu": 2,
    # discrete building blocks
    "fact": 1, "binomial": 2, "gamma": 1, "psi": 1, "harmonic": 1,
    # sums and combinators
    "sum": 4, "gf": 3, "hadamard": 2, "cauchy": 2, "plus": None, "shift": 2,
    "compose_alg": 3,
}

CONSTANTS = {"pi", "eulergamma", "sqrtpi", "inf"}
VARIABLE_NAMES = {"n", "k", "j", "m", "z", "t", "c", "a", "g", "x"}

STRATEGIES = {"de_compare", "re_coefficients", "telescope_re", "telescope_de", "coefficient_compare"}

FIELDS = {
    "strategy", "title", "var", "index", "lhs", "rhs", "point", "assume", "domain",
    "exponent", "multiplier", "coefficients", "min_checks", "cases", "lemma",
    "prefactor", "log_part", "lhs_coeff", "rhs_coeff", "weight", "mutation", "note",
    "uses", "telescoper", "certificate", "cert_prefactor",
}


def _suggest(word: str, options) -> str:
    close = difflib.get_close_matches(word, sorted(options), n=1, cutoff=0.6)
    return f" (did you mean '{close[0]}'?)" if close else ""


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<str>"[^"\n]*")
  | (?P<punct>[{}()\[\],;:+\-*/^|])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, source: str = "") -> list[Token]:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise DslError("syntax-error", f"unexpected character {text[pos]!r}", line, col, source)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line += 1
            col = 1
        else:
            if kind not in ("ws", "comment"):
                out.append(Token(kind, s, line, col))
            col += len(s)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


# ---------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, text: str, source: str):
        self.toks = tokenize(text, source)
        self.i = 0
        self.source = source
        self.bound: list[str] = []

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None, code: str = "syntax-error"):
        t = tok or self.tok
        raise DslError(code, msg, t.line, t.col, self.source)

    def expect(self, text: str) -> Token:
        t = self.tok
        if t.text != text or t.kind == "str":
            shown = t.text or "end of input"
            self.error(f"expected '{text}' but found '{shown}'")
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind != "str":
            self.i += 1
            return True
        return False

    # document -------------------------------------------------------------
    def document(self) -> Document:
        ids = []
        while self.tok.kind != "eof":
            ids.append(self.identity())
        return Document(tuple(ids))

    def identity(self) -> Identity:
        t = self.tok
        if t.text != "identity":
            self.error(f"expected 'identity' but found '{t.text}'")
        self.i += 1
        name = self.tok
        if name.kind != "str":
            self.error("expected a quoted identity name")
        self.i += 1
        self.expect("{")
        fields = []
        while not self.accept("}"):
            key = self.tok
            if key.kind != "ident":
                self.error(f"expected a field name but found '{key.text or 'end of input'}'")
            if key.text not in FIELDS:
                self.error(f"unknown field '{key.text}'{_suggest(key.text, FIELDS)}", key, "unknown-identifier")
            self.i += 1
            self.expect(":")
            value = self.value()
            if key.text == "strategy":
                if not isinstance(value, Name) or value.id not in STRATEGIES:
                    shown = value.id if isinstance(value, Name) else "?"
                    self.error(f"unknown strategy '{shown}'{_suggest(shown, STRATEGIES)}", key, "unknown-identifier")
            fields.append((key.text, value))
            self.expect(";")
        return Identity(name.text[1:-1], tuple(fields), (t.line, t.col))

    def value(self) -> Node:
        t = self.tok
        if t.kind == "str":
            self.i += 1
            return Str(t.text[1:-1], (t.line, t.col))
        if t.text == "[":
            return self.list_value()
        return self.expr()

    def list_value(self) -> ListNode:
        t = self.expect("[")
        items = []
        if not self.accept("]"):
            items.append(self.value())
            while self.accept(","):
                items.append(self.value())
            self.expect("]")
        return ListNode(tuple(items), (t.line, t.col))

    # expressions ----------------------------------------------------------
    def expr(self) -> Node:
        left = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "punct":
            t = self.tok
            self.i += 1
            left = Bin(t.text, left, self.term(), (t.line, t.col))
        return left

    def term(self) -> Node:
        left = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "punct":
            t = self.tok
            self.i += 1
            left = Bin(t.text, left, self.unary(), (t.line, t.col))
        return left

    def unary(self) -> Node:
        t = self.tok
        if t.text == "-" and t.kind == "punct":
            self.i += 1
            return Neg(self.unary(), (t.line, t.col))
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        t = self.tok
        if t.text == "^" and t.kind == "punct":
            self.i += 1
            return Bin("^", base, self.unary(), (t.line, t.col))
        return base

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(int(t.text), (t.line, t.col))
        if t.text == "(":
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.i += 1
            if t.text in ("D", "S") and self.tok.text == "[":
                self.i += 1
                v = self.tok
                if v.kind != "ident":
                    self.error("expected a variable inside the operator brackets")
                self.i += 1
                self.expect("]")
                return OpSym(t.text, v.text, (t.line, t.col))
            if self.tok.text == "(":
                return self.call(t)
            return self.name(t)
        shown = t.text or "end of input"
        self.error(f"unexpected '{shown}'")

    def name(self, t: Token) -> Name:
        known = VARIABLE_NAMES | CONSTANTS | set(self.bound) | STRATEGIES
        if t.text not in known:
            self.error(f"unknown identifier '{t.text}'{_suggest(t.text, known | set(FUNCTIONS))}", t,
                       "unknown-identifier")
        return Name(t.text, (t.line, t.col))

    def call(self, t: Token) -> Call:
        if t.text not in FUNCTIONS:
            self.error(f"unknown function '{t.text}'{_suggest(t.text, FUNCTIONS)}", t, "unknown-identifier")
        self.expect("(")
        args = []
        if t.text in ("sum", "gf"):
            # the first argument binds a summation index
            v = self.tok
            if v.kind != "ident":
                self.error("expected a summation index")
            self.i += 1
            args.append(Name(v.text, (v.line, v.col)))
            self.bound.append(v.text)
            try:
                while self.accept(","):
                    args.append(self.expr())
            finally:
                self.bound.pop()
        elif self.tok.text != ")":
            args.append(self.expr())
            while self.accept(","):
                args.append(self.expr())
        if self.tok.text != ")" or self.tok.kind == "str":
            shown = self.tok.text or "end of input"
            self.error(f"expected ',' or ')' but found '{shown}'")
        self.i += 1
        arity = FUNCTIONS[t.text]
        if arity is not None and len(args) != arity:
            raise DslError("syntax-error", f"{t.text} takes {arity} arguments, got {len(args)}",
                           t.line, t.col, self.source)
        return Call(t.text, tuple(args), (t.line, t.col))


def parse(text: str, source: str = "") -> Document:
    return _Parser(text, source).document()


def parse_expr(text: str) -> Node:
    p = _Parser(text, "")
    e = p.expr()
    if p.tok.kind != "eof":
        p.error(f"unexpected '{p.tok.text}'")
    return e


# ---------------------------------------------------------------------------
# printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def print_expr(node: Node, parent: int = 0, right: bool = False) -> str:
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Name):
        return node.id
    if isinstance(node, Str):
        return f'"{node.value}"'
    if isinstance(node, OpSym):
        return f"{node.kind}[{node.var}]"
    if isinstance(node, ListNode):
        return "[" + ", ".join(print_expr(x) for x in node.items) + "]"
    if isinstance(node, Call):
        return f"{node.func}(" + ", ".join(print_expr(a) for a in node.args) + ")"
    if isinstance(node, Neg):
        text = "-" + print_expr(node.operand, _PREC["neg"])
        return f"({text})" if parent > _PREC["neg"] or (parent == _PREC["neg"] and right) else text
    if isinstance(node, Bin):
        p = _PREC[node.op]
        if node.op == "^":
            lhs = print_expr(node.left, p + 1)
            rhs = print_expr(node.right, p - 1 if isinstance(node.right, Neg) else p, True)
            text = f"{lhs}^{rhs}"
        else:
            lhs = print_expr(node.left, p)
            # operators associate to the left, so an equal-precedence right operand keeps its parentheses
            rhs = print_expr(node.right, p + 1, True)
            sep = f" {node.op} " if node.op in ("+", "-") else node.op
            text = f"{lhs}{sep}{rhs}"
        return f"({text})" if p < parent else text
    raise TypeError(f"cannot print {node!r}")


def print_document(doc: Document) -> str:
    blocks = []
    for ident in doc.identities:
        lines = [f'identity "{ident.name}" {{']
        for key, value in ident.fields:
            lines.append(f"  {key}: {print_expr(value)};")
        lines.append("}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def node_rational(node: Node) -> Fraction | None:
    """Value of a purely numeric expression, else None."""
    if isinstance(node, Num):
        return Fraction(node.value)
    if isinstance(node, Neg):
        v = node_rational(node.operand)
        return None if v is None else -v
    if isinstance(node, Bin):
        a, b = node_rational(node.left), node_rational(node.right)
        if a is None or b is None:
            return None
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b if b else None
        if node.op == "^" and b.denominator == 1:
            return a ** int(b) if a or b >= 0 else None
    return None
