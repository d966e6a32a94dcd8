"""Formula and attestation syntax shared by the engine, the DSL and the ledger.

Formulas are immutable, hashable dataclasses; structural equality is the
identity the derivation engine matches on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Tuple, Union


class Access(enum.Enum):
    DIRECT = "Direct"
    INDIRECT = "Indirect"


class When(enum.Enum):
    UNTIMED = "Untimed"
    AT = "At"
    BEFORE = "Before"
    AFTER = "After"


@dataclass(frozen=True)
class TimeQualifier:
    kind: When = When.UNTIMED
    t: Optional[int] = None

    def __post_init__(self):
        if self.kind is When.UNTIMED:
            if self.t is not None:
                raise ValueError("untimed qualifier carries no time")
        elif not isinstance(self.t, int) or isinstance(self.t, bool) or self.t < 0:
            raise ValueError(f"time must be a non-negative integer, got {self.t!r}")

    def __str__(self) -> str:
        return self.kind.value if self.t is None else f"{self.kind.value}({self.t})"


UNTIMED = TimeQualifier()


def at(t: int) -> TimeQualifier:
    return TimeQualifier(When.AT, t)


def before(t: int) -> TimeQualifier:
    return TimeQualifier(When.BEFORE, t)


def after(t: int) -> TimeQualifier:
    return TimeQualifier(When.AFTER, t)


@dataclass(frozen=True)
class Atom:
    pred: str
    args: Tuple["Formula", ...] = ()


@dataclass(frozen=True)
class TimeLit:
    value: int


@dataclass(frozen=True)
class Attest:
    claimer: str
    access: Access
    when: TimeQualifier
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Not:
    body: "Formula"


Formula = Union[Atom, TimeLit, Attest, And, Implies, Not]
FORMULA_TYPES = (Atom, TimeLit, Attest, And, Implies, Not)


def atom(pred: str, *args: Union["Formula", str, int]) -> Atom:
    """Build an atom, lifting bare strings to nullary atoms and ints to time literals."""
    return Atom(pred, tuple(term(a) for a in args))


def term(value: Union["Formula", str, int]) -> "Formula":
    if isinstance(value, FORMULA_TYPES):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not terms")
    if isinstance(value, int):
        return TimeLit(value)
    if isinstance(value, str):
        return Atom(value)
    raise TypeError(f"cannot use {value!r} as a term")


def endorsement(k0: str, prop: "Formula") -> Atom:
    """Reified endorsement: stands for ``(k0 |> prop) -> prop``."""
    return Atom("endorsement", (Atom(k0), prop))


def attest_depth(f: "Formula") -> int:
    """Deepest nesting of attestation nodes inside ``f``."""
    if isinstance(f, Attest):
        return 1 + attest_depth(f.body)
    if isinstance(f, Atom):
        return max((attest_depth(a) for a in f.args), default=0)
    if isinstance(f, (And, Implies)):
        return max(attest_depth(f.left), attest_depth(f.right))
    if isinstance(f, Not):
        return attest_depth(f.body)
    return 0
