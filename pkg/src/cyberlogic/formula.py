"""Textual attestation notation: tokenizer, recursive-descent parser and printer.

Grammar (loosest binding first)::

    formula  := conj ( "->" formula )?            right-associative
    conj     := unary ( "/\\" unary )*             left-associative
    unary    := "~" unary
              | IDENT ATTEST_OP [INT] unary        k |> f, k *|><7 f, ...
              | primary
    primary  := "(" formula ")" | INT | IDENT [ "(" [formula ("," formula)*] ")" ]

Attestation operators are matched longest-first, so ``*|><`` is one token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import FrozenSet, List

from .syntax import (
    UNTIMED,
    Access,
    And,
    Atom,
    Attest,
    Formula,
    Implies,
    Not,
    TimeLit,
    TimeQualifier,
    When,
)

# operator text -> (access, qualifier kind); timed kinds take a following INT
ATTEST_OPS = {
    "*|>=": (Access.INDIRECT, When.AT),
    "*|><": (Access.INDIRECT, When.BEFORE),
    "*|>>": (Access.INDIRECT, When.AFTER),
    "*|>": (Access.INDIRECT, When.UNTIMED),
    "|>=": (Access.DIRECT, When.AT),
    "|><": (Access.DIRECT, When.BEFORE),
    "|>>": (Access.DIRECT, When.AFTER),
    "|>": (Access.DIRECT, When.UNTIMED),
}
_OP_TEXT = {v: k for k, v in ATTEST_OPS.items()}
PUNCT = ("/\\", "->", "~", "(", ")", ",")
_OPERATORS = sorted(list(ATTEST_OPS) + list(PUNCT), key=len, reverse=True)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"[0-9]+")
_START = frozenset({"~", "(", "IDENT", "INT"})


class FormulaSyntaxError(SyntaxError):
    """Malformed formula text; ``offset`` is a UTF-8 byte offset."""

    def __init__(self, message: str, offset: int, expected: FrozenSet[str]):
        full = f"{message} at byte {offset} (expected one of: {', '.join(sorted(expected))})"
        super().__init__(full)
        self.msg = full
        self.reason = message
        self.offset = offset
        self.expected = frozenset(expected)


@dataclass(frozen=True)
class Token:
    kind: str  # "IDENT", "INT", "ATTEST", "EOF" or the punctuation text itself
    text: str
    offset: int  # byte offset


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    i = 0
    n = len(text)

    def boff(idx: int) -> int:
        return len(text[:idx].encode("utf-8"))

    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        m = _IDENT.match(text, i)
        if m:
            tokens.append(Token("IDENT", m.group(), boff(i)))
            i = m.end()
            continue
        m = _INT.match(text, i)
        if m:
            tokens.append(Token("INT", m.group(), boff(i)))
            i = m.end()
            continue
        for op in _OPERATORS:
            if text.startswith(op, i):
                kind = "ATTEST" if op in ATTEST_OPS else op
                tokens.append(Token(kind, op, boff(i)))
                i += len(op)
                break
        else:
            # longest operator prefix that still matches decides where the input goes wrong
            best = 0
            for op in _OPERATORS:
                k = 0
                while k < len(op) and i + k < n and text[i + k] == op[k]:
                    k += 1
                best = max(best, k)
            if best == 0:
                expected = frozenset({"operator", "IDENT", "INT"})
            else:
                prefix = text[i : i + best]
                expected = frozenset(op[best] for op in _OPERATORS if op.startswith(prefix) and len(op) > best)
            bad = i + best
            what = "end of input" if bad >= n else repr(text[bad])
            raise FormulaSyntaxError(f"unexpected {what}", boff(bad), expected)
    tokens.append(Token("EOF", "", len(text.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def fail(self, expected) -> FormulaSyntaxError:
        tok = self.peek()
        what = "end of input" if tok.kind == "EOF" else repr(tok.text)
        return FormulaSyntaxError(f"unexpected {what}", tok.offset, frozenset(expected))

    def expect(self, kind: str) -> Token:
        if self.peek().kind != kind:
            raise self.fail({kind})
        return self.advance()

    def parse(self) -> Formula:
        f = self.formula()
        if self.peek().kind != "EOF":
            raise self.fail({"/\\", "->", "EOF"})
        return f

    def formula(self) -> Formula:
        left = self.conj()
        if self.peek().kind == "->":
            self.advance()
            return Implies(left, self.formula())
        return left

    def conj(self) -> Formula:
        left = self.unary()
        while self.peek().kind == "/\\":
            self.advance()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "~":
            self.advance()
            return Not(self.unary())
        if tok.kind == "IDENT" and self.peek(1).kind == "ATTEST":
            self.advance()
            access, kind = ATTEST_OPS[self.advance().text]
            when = UNTIMED
            if kind is not When.UNTIMED:
                when = TimeQualifier(kind, int(self.expect("INT").text))
            return Attest(tok.text, access, when, self.unary())
        return self.primary()

    def primary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "(":
            self.advance()
            inner = self.formula()
            if self.peek().kind != ")":
                raise self.fail({")", "/\\", "->"})
            self.advance()
            return inner
        if tok.kind == "INT":
            self.advance()
            return TimeLit(int(tok.text))
        if tok.kind == "IDENT":
            self.advance()
            if self.peek().kind != "(":
                return Atom(tok.text)
            self.advance()
            args = []
            if self.peek().kind != ")":
                args.append(self.formula())
                while self.peek().kind == ",":
                    self.advance()
                    args.append(self.formula())
            if self.peek().kind != ")":
                raise self.fail({",", ")", "/\\", "->"})
            self.advance()
            return Atom(tok.text, tuple(args))
        raise self.fail(_START)


def parse(text: str) -> Formula:
    """Parse attestation notation into a formula AST.

    >>> parse("k *|><7 f")
    Attest(claimer='k', access=<Access.INDIRECT: 'Indirect'>, when=TimeQualifier(kind=<When.BEFORE: 'Before'>, t=7), body=Atom(pred='f', args=()))
    """
    return _Parser(text).parse()


# binding strength used by the printer
_PREC_IMPLIES, _PREC_AND, _PREC_UNARY, _PREC_ATOM = 1, 2, 3, 4


def _prec(f: Formula) -> int:
    if isinstance(f, Implies):
        return _PREC_IMPLIES
    if isinstance(f, And):
        return _PREC_AND
    if isinstance(f, (Attest, Not)):
        return _PREC_UNARY
    return _PREC_ATOM


def _wrap(f: Formula, parens: bool) -> str:
    s = to_text(f)
    return f"({s})" if parens else s


def attest_op(access: Access, when: TimeQualifier) -> str:
    op = _OP_TEXT[(access, when.kind)]
    return op if when.t is None else f"{op}{when.t}"


def to_text(f: Formula) -> str:
    """Canonical rendering with the fewest parentheses the grammar allows."""
    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return f"{f.pred}({', '.join(to_text(a) for a in f.args)})"
    if isinstance(f, TimeLit):
        return str(f.value)
    if isinstance(f, Attest):
        return f"{f.claimer} {attest_op(f.access, f.when)} {_wrap(f.body, _prec(f.body) < _PREC_UNARY)}"
    if isinstance(f, Not):
        return "~" + _wrap(f.body, _prec(f.body) < _PREC_UNARY)
    if isinstance(f, And):
        return f"{_wrap(f.left, _prec(f.left) < _PREC_AND)} /\\ {_wrap(f.right, _prec(f.right) <= _PREC_AND)}"
    if isinstance(f, Implies):
        return f"{_wrap(f.left, _prec(f.left) <= _PREC_IMPLIES)} -> {_wrap(f.right, _prec(f.right) < _PREC_IMPLIES)}"
    raise TypeError(f"not a formula: {f!r}")


# the DSL's printer under its conventional name; shadows the builtin only inside this module's namespace
print = to_text  # noqa: A001


def to_json(f: Formula) -> dict:
    """Tagged-dict dump of an AST (the CLI's json output)."""
    if isinstance(f, Atom):
        return {"node": "Atom", "pred": f.pred, "args": [to_json(a) for a in f.args]}
    if isinstance(f, TimeLit):
        return {"node": "TimeLiteral", "value": f.value}
    if isinstance(f, Attest):
        return {
            "node": "Attest",
            "claimer": f.claimer,
            "access": f.access.value,
            "when": {"kind": f.when.kind.value, "t": f.when.t},
            "body": to_json(f.body),
        }
    if isinstance(f, Not):
        return {"node": "Not", "body": to_json(f.body)}
    if isinstance(f, (And, Implies)):
        return {"node": type(f).__name__, "left": to_json(f.left), "right": to_json(f.right)}
    raise TypeError(f"not a formula: {f!r}")


def from_json(d: dict) -> Formula:
    node = d["node"]
    if node == "Atom":
        return Atom(d["pred"], tuple(from_json(a) for a in d["args"]))
    if node == "TimeLiteral":
        return TimeLit(d["value"])
    if node == "Attest":
        w = d["when"]
        return Attest(d["claimer"], Access(d["access"]), TimeQualifier(When(w["kind"]), w["t"]), from_json(d["body"]))
    if node == "Not":
        return Not(from_json(d["body"]))
    if node in ("And", "Implies"):
        cls = And if node == "And" else Implies
        return cls(from_json(d["left"]), from_json(d["right"]))
    raise ValueError(f"unknown node {node!r}")

