"""Demand, deliver, control and suspect, with the policy bookkeeping each one leaves in the KB.

Every function takes the current ledger and knowledge base and returns new
ones; inputs are never modified.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Any, Optional, Sequence, Tuple

from .. import codec
from ..ledger import (
    Answer,
    Deliver,
    Demand,
    Ledger,
    Query,
    Suspects,
    UnknownVisa,
    demand_of,
    read,
    select_control,
    verify,
    write,
)
from ..logic import (
    D1,
    KnowledgeBase,
    UnknownAuthority,
    accountable_for,
    assert_delegation,
    assert_fact,
    holds,
    is_current,
)
from ..syntax import Access, Atom, TimeLit, at, before
from .records import SchengenDemand, Visa
from .validation import CountryRegistry, Modes, SchengenError, ValidationReport, validate_demand


class TimestampMismatch(SchengenError):
    pass


class NotConsulate(SchengenError):
    pass


class NoMatchingDemand(SchengenError):
    pass


class NotOfficer(SchengenError):
    pass


class NotCurrentTime(SchengenError):
    pass


class Refusal(SchengenError):
    """Delivery refused; ``report`` says which requirements failed."""

    def __init__(self, report: ValidationReport, reasons: Sequence[str]):
        super().__init__("delivery refused: " + ", ".join(reasons))
        self.report = report
        self.reasons = tuple(reasons)


def _digest_term(*args: Any) -> Atom:
    return Atom("h" + hashlib.sha256(codec.encode(args)).hexdigest()[:24])


def make(verb: str, *args: Any) -> Atom:
    """An action lifted to a proposition so it can be attested."""
    return Atom("action", (Atom(verb), _digest_term(verb, *args)))


def make_answer(verb: str, *args: Any) -> Atom:
    return Atom("answer", (Atom(verb), _digest_term(verb, *args)))


def demand_action(r: str, c: str, d: SchengenDemand) -> Atom:
    return make("demand", r, c, d.form, d.picture, d.pass_, d.travels, d.insurance, d.lodgings, d.sufficient, d.time_stamp)


def delivering_validation(cons: str, req: str, v: Visa, t: int) -> Atom:
    return Atom("delivering_validation", (Atom(cons), Atom(req), v.term(), TimeLit(t)))


def demand(
    requester: str, c: str, d: SchengenDemand, t: int, ledger: Ledger, kb: KnowledgeBase
) -> Tuple[Ledger, KnowledgeBase]:
    if d.time_stamp != t:
        raise TimestampMismatch(f"demand {d.name} stamped {d.time_stamp}, written at {t}")
    ledger = write(ledger, requester, Demand(d), t)
    kb = assert_fact(kb, requester, Access.DIRECT, at(t), demand_action(requester, c, d))
    return ledger, kb


def check_demanding(r: str, t: int, c: str, d: SchengenDemand, kb: KnowledgeBase) -> bool:
    if d.time_stamp != t:
        return False
    try:
        return holds(kb, r, Access.DIRECT, at(t), demand_action(r, c, d)) is not None
    except UnknownAuthority:
        return False


def demand_entry(ledger: Ledger, v: Visa):
    entry = ledger.by_hash(v.demand_ref)
    if entry is None or not isinstance(entry.tx, Demand):
        raise NoMatchingDemand(f"visa {v.name} points at no demand")
    return entry


def deliver(
    cons: str,
    req: str,
    v: Visa,
    t: int,
    ledger: Ledger,
    kb: KnowledgeBase,
    reg: CountryRegistry,
    modes: Modes = Modes(),
) -> Tuple[Ledger, KnowledgeBase]:
    """Consulate ``cons`` delivers ``v`` to ``req``, who may then present it while ``cons`` stays accountable."""
    if reg.consulate_of(v.country) != cons or v.delivered_by != cons:
        raise NotConsulate(f"{cons} cannot deliver visas for {v.country}")
    entry = demand_entry(ledger, v)
    d = entry.tx.demand
    report = validate_demand(req, d, reg, kb, modes)
    reasons = []
    if entry.author != req:
        reasons.append(f"demand written by {entry.author}, not {req}")
    if not check_demanding(req, d.time_stamp, reg.country_of(cons), d, kb):
        reasons.append("demanding")
    if d.form.country != v.country:
        reasons.append("visa country differs from demand")
    reasons += [f"{row.number}:{row.requirement}" for row in report.failed()]
    if reasons:
        raise Refusal(report, reasons)

    ledger = write(ledger, cons, Deliver(v), t)
    kb = assert_fact(kb, cons, Access.DIRECT, at(t), make("deliver", cons, v))
    dv = delivering_validation(cons, req, v, t)
    kb = assert_fact(kb, cons, Access.DIRECT, before(t), dv)
    kb = assert_delegation(kb, D1(req, cons, dv))
    return ledger, kb


@dataclass(frozen=True)
class ControlReport:
    officer: str
    visa: str
    time: int
    consulate: str
    delivery_accountable: Optional[str]
    validation: ValidationReport
    ledger: Ledger
    kb: KnowledgeBase

    def accountability(self) -> dict:
        """Requirement name -> accountable authorities, plus the delivery itself."""
        table = {row.requirement: list(row.accountable) for row in self.validation.rows}
        table["delivery"] = [self.delivery_accountable] if self.delivery_accountable else []
        return table


def _require_officer(officer: str, reg: CountryRegistry) -> None:
    if officer not in reg.schengen_officers:
        raise NotOfficer(officer)


def control(
    officer: str,
    v: Visa,
    t: int,
    ledger: Ledger,
    kb: KnowledgeBase,
    reg: CountryRegistry,
    modes: Modes = Modes(),
) -> ControlReport:
    """Read the visa back from the ledger and roll its trust chain up to the accountable authorities."""
    _require_officer(officer, reg)
    if not is_current(kb, t):
        raise NotCurrentTime(f"{t} is not the current time")
    found, ledger = read(ledger, officer, select_control(v), t)
    if not found:
        raise UnknownVisa(v.name)
    delivered = found[0]
    entry = demand_entry(ledger, v)
    requester = entry.author
    report = validate_demand(requester, entry.tx.demand, reg, kb, modes)
    dv = delivering_validation(delivered.author, requester, v, delivered.timestamp)
    try:
        accountable = accountable_for(kb, requester, dv)
    except UnknownAuthority:
        accountable = None
    kb = assert_fact(kb, officer, Access.DIRECT, at(t), make("control", officer, v))
    return ControlReport(officer, v.name, t, delivered.author, accountable, report, ledger, kb)


def suspect(
    officer: str,
    v: Visa,
    qs: Sequence[Query],
    t: int,
    ledger: Ledger,
    kb: KnowledgeBase,
    reg: CountryRegistry,
) -> Tuple[Answer, KnowledgeBase]:
    """Ask ``qs`` about ``v``; the officer's claim about the answer is recorded either way."""
    _require_officer(officer, reg)
    answer = verify(ledger, officer, v, qs, kb)
    # false_alert and raise_alert record the same claim; they differ in the answer
    kb = assert_fact(kb, officer, Access.DIRECT, at(t), make_answer("suspect", officer, v, tuple(qs)))
    return answer, kb


def is_alert(answer: Answer) -> bool:
    return isinstance(answer, Suspects)


__all__ = [
    "ControlReport",
    "NoMatchingDemand",
    "NotConsulate",
    "NotCurrentTime",
    "NotOfficer",
    "Refusal",
    "TimestampMismatch",
    "check_demanding",
    "control",
    "deliver",
    "delivering_validation",
    "demand",
    "demand_action",
    "demand_of",
    "is_alert",
    "make",
    "make_answer",
    "suspect",
]
