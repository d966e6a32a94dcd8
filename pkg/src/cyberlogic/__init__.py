"""Cyberlogic trust-management engine for evidential protocols.

Attestations by authorities, delegation chains and accountability
(:mod:`cyberlogic.logic`), the attestation notation (:mod:`cyberlogic.formula`),
a hash-chained ledger (:mod:`cyberlogic.ledger`), the Schengen-visa protocol
(:mod:`cyberlogic.schengen`) and a scenario runner (:mod:`cyberlogic.scenario`).
"""

from .formula import FormulaSyntaxError, parse, to_text
from .logic import (
    D1,
    D2,
    Attestation,
    Authority,
    DelegationAssertion,
    DerivationChain,
    Dinf,
    KBConfig,
    KnowledgeBase,
    Rule,
    accountable_for,
    assert_delegation,
    assert_fact,
    current_time,
    derive_indirect,
    holds,
    in_future,
    record_tick,
)
from .syntax import UNTIMED, Access, And, Atom, Attest, Implies, Not, TimeLit, TimeQualifier, When, after, at, before

__version__ = "0.1.0"
