"""Authority algebra: attestation facts, delegation closure, accountability, time.

A :class:`KnowledgeBase` is an immutable value. Every ``assert_*`` and
``record_tick`` returns a new one; nothing is ever retracted.

Derivation rules implemented by :func:`derive_indirect`:

* fact       ``k |> A``                                  gives ``k *|> A`` (accountable k)
* D1(k, k')  ``k' |> A``                                 gives ``k *|> A`` (accountable k')
* Dinf(k,k') ``k' *|> A``                                gives ``k *|> A`` (accountable as for k')
* D2(k, k')  ``k0 |> A`` and ``k' |> endorsement(k0, A)`` gives ``k *|> A`` (accountable k')

Among all derivations the shortest chain wins; ties go to the lexicographically
smallest sequence of authority ids, so results are a pure function of the KB.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

from .syntax import (
    UNTIMED,
    Access,
    Atom,
    Formula,
    TimeLit,
    TimeQualifier,
    When,
    attest_depth,
    endorsement,
)

TIME_AUTHORITY = "Kt"
DEFAULT_MAX_DEPTH = 64
DEFAULT_MAX_NESTING = 8
DAYS_PER_MONTH = 30


def months(n: int) -> int:
    return DAYS_PER_MONTH * n


class LogicError(Exception):
    pass


class UnknownAuthority(LogicError):
    pass


class NestingLimitExceeded(LogicError):
    pass


class SelfDelegation(LogicError):
    pass


class DepthLimitExceeded(LogicError):
    pass


@dataclass(frozen=True)
class Authority:
    id: str
    display_name: str = ""

    def __str__(self) -> str:
        return self.id


AuthorityRef = Union[Authority, str]


def _aid(a: AuthorityRef) -> str:
    return a.id if isinstance(a, Authority) else a


class Rule(enum.Enum):
    FACT = "Fact"
    D1 = "D1"
    D2 = "D2"
    DINF = "Dinf"


@dataclass(frozen=True)
class DerivationChain:
    links: Tuple[Tuple[str, Rule], ...]
    accountable: str

    def __len__(self) -> int:
        return len(self.links)

    def key(self) -> Tuple[int, Tuple[str, ...], Tuple[str, ...], str]:
        return len(self.links), tuple(a for a, _ in self.links), tuple(r.value for _, r in self.links), self.accountable

    def describe(self) -> str:
        return " -> ".join(f"{a}:{r.value}" for a, r in self.links) + f" [accountable {self.accountable}]"


@dataclass(frozen=True)
class Attestation:
    claimer: str
    access: Access
    when: TimeQualifier
    prop: Formula
    provenance: Optional[DerivationChain] = field(default=None, compare=False)

    @property
    def accountable(self) -> str:
        return self.provenance.accountable if self.provenance else self.claimer


@dataclass(frozen=True)
class DelegationAssertion:
    kind: Rule
    delegatee: str
    delegator: str
    prop: Formula

    def __post_init__(self):
        if self.kind is Rule.FACT:
            raise ValueError("a delegation kind is one of D1, D2, Dinf")


def D1(k: AuthorityRef, k2: AuthorityRef, prop: Formula) -> DelegationAssertion:
    return DelegationAssertion(Rule.D1, _aid(k), _aid(k2), prop)


def D2(k: AuthorityRef, k2: AuthorityRef, prop: Formula) -> DelegationAssertion:
    return DelegationAssertion(Rule.D2, _aid(k), _aid(k2), prop)


def Dinf(k: AuthorityRef, k2: AuthorityRef, prop: Formula) -> DelegationAssertion:
    return DelegationAssertion(Rule.DINF, _aid(k), _aid(k2), prop)


@dataclass(frozen=True)
class KBConfig:
    max_depth: int = DEFAULT_MAX_DEPTH
    max_nesting: int = DEFAULT_MAX_NESTING
    # predicates naming an exclusive office: p(holder, since) conflicts with p(other, since') when since' <= since
    exclusive_roles: FrozenSet[str] = frozenset()


def compatible(fact: TimeQualifier, query: TimeQualifier) -> bool:
    """Does a fact carrying ``fact`` satisfy a query asking for ``query``?"""
    if query.kind is When.UNTIMED:
        return True
    if fact.kind is When.AT:
        if query.kind is When.AT:
            return fact.t == query.t
        if query.kind is When.BEFORE:
            return fact.t < query.t
        return fact.t > query.t
    if fact.kind is When.BEFORE and query.kind is When.BEFORE:
        return fact.t <= query.t
    if fact.kind is When.AFTER and query.kind is When.AFTER:
        return fact.t >= query.t
    return False


def hasbeen(t: int) -> Atom:
    return Atom("hasbeen", (TimeLit(t),))


@dataclass(frozen=True)
class KnowledgeBase:
    facts: FrozenSet[Attestation] = frozenset()
    delegations: FrozenSet[DelegationAssertion] = frozenset()
    ticks: FrozenSet[int] = frozenset({0})
    authorities: Mapping[str, Authority] = field(
        default_factory=lambda: MappingProxyType({TIME_AUTHORITY: Authority(TIME_AUTHORITY, "time authority")})
    )
    config: KBConfig = KBConfig()

    @classmethod
    def empty(cls, authorities: Iterable[AuthorityRef] = (), config: KBConfig = KBConfig()) -> "KnowledgeBase":
        kb = cls(config=config)
        kb = kb.register(*authorities)
        return kb

    def register(self, *authorities: AuthorityRef) -> "KnowledgeBase":
        reg: Dict[str, Authority] = dict(self.authorities)
        for a in authorities:
            a = a if isinstance(a, Authority) else Authority(a, a)
            if a.id in reg and reg[a.id] != a and a.id != TIME_AUTHORITY:
                raise ValueError(f"authority id {a.id!r} already registered with another name")
            reg.setdefault(a.id, a)
        return replace(self, authorities=MappingProxyType(reg))

    def authority(self, ref: AuthorityRef) -> Authority:
        try:
            return self.authorities[_aid(ref)]
        except KeyError:
            raise UnknownAuthority(_aid(ref)) from None

    def _check(self, *refs: AuthorityRef) -> None:
        for r in refs:
            if _aid(r) not in self.authorities:
                raise UnknownAuthority(_aid(r))

    def facts_of(self, claimer: str, prop: Formula) -> List[Attestation]:
        return [f for f in self.facts if f.claimer == claimer and f.prop == prop]


def assert_fact(
    kb: KnowledgeBase,
    claimer: AuthorityRef,
    access: Access,
    when: TimeQualifier,
    prop: Formula,
) -> KnowledgeBase:
    kb._check(claimer)
    if attest_depth(prop) > kb.config.max_nesting:
        raise NestingLimitExceeded(f"proposition nests deeper than {kb.config.max_nesting} attestations")
    return replace(kb, facts=kb.facts | {Attestation(_aid(claimer), access, when, prop)})


def assert_attestation(kb: KnowledgeBase, a: Attestation) -> KnowledgeBase:
    return assert_fact(kb, a.claimer, a.access, a.when, a.prop)


def assert_delegation(kb: KnowledgeBase, d: DelegationAssertion) -> KnowledgeBase:
    kb._check(d.delegatee, d.delegator)
    if d.delegatee == d.delegator:
        if d.kind is Rule.DINF:
            return kb  # k *|> A -> k *|> A adds nothing
        raise SelfDelegation(f"{d.kind.value} from {d.delegatee} to itself")
    if attest_depth(d.prop) > kb.config.max_nesting:
        raise NestingLimitExceeded(f"proposition nests deeper than {kb.config.max_nesting} attestations")
    return replace(kb, delegations=kb.delegations | {d})


def _stored(kb: KnowledgeBase, claimer: str, prop: Formula, when: TimeQualifier, access: Optional[Access]) -> bool:
    return any(
        (access is None or f.access is access) and compatible(f.when, when) for f in kb.facts_of(claimer, prop)
    )


def _direct(kb: KnowledgeBase, claimer: str, prop: Formula, when: TimeQualifier = UNTIMED) -> bool:
    return _stored(kb, claimer, prop, when, Access.DIRECT)


def derive_indirect(
    kb: KnowledgeBase, claimer: AuthorityRef, prop: Formula, when: TimeQualifier = UNTIMED
) -> Optional[DerivationChain]:
    """Shortest derivation of ``claimer *|> prop``, or ``None`` when there is none.

    ``when`` constrains the terminal fact(s); relays preserve timing.
    Raises :class:`DepthLimitExceeded` if the search is cut off by the depth
    bound before any chain is found.
    """
    kb._check(claimer)
    start = _aid(claimer)
    relevant = [d for d in kb.delegations if d.prop == prop]
    dinf: Dict[str, List[str]] = {}
    for d in relevant:
        if d.kind is Rule.DINF:
            dinf.setdefault(d.delegatee, []).append(d.delegator)
    direct_attesters = sorted(
        {f.claimer for f in kb.facts if f.prop == prop and f.access is Access.DIRECT and compatible(f.when, when)}
    )
    endorsers = {
        (f.claimer, k0)
        for k0 in direct_attesters
        for f in kb.facts
        if f.access is Access.DIRECT and f.prop == endorsement(k0, prop)
    }

    def completions(node: str, prefix: Tuple[Tuple[str, Rule], ...]) -> List[DerivationChain]:
        out = []
        if _stored(kb, node, prop, when, None):
            out.append(DerivationChain(prefix + ((node, Rule.FACT),), node))
        for d in relevant:
            if d.delegatee != node:
                continue
            if d.kind is Rule.D1 and d.delegator in direct_attesters:
                out.append(DerivationChain(prefix + ((node, Rule.D1), (d.delegator, Rule.FACT)), d.delegator))
            elif d.kind is Rule.D2:
                for k0 in direct_attesters:
                    if (d.delegator, k0) in endorsers:
                        out.append(DerivationChain(prefix + ((node, Rule.D2), (k0, Rule.FACT)), d.delegator))
        return out

    # breadth-first over Dinf relays, keeping the lexicographically least shortest prefix per node
    best: Optional[DerivationChain] = None
    frontier: List[Tuple[str, Tuple[Tuple[str, Rule], ...]]] = [(start, ())]
    seen = {start}
    depth = 0
    while frontier:
        for node, prefix in frontier:
            for chain in completions(node, prefix):
                if best is None or chain.key() < best.key():
                    best = chain
        if best is not None and len(best) <= depth + 1:
            # every completion from a deeper level is strictly longer
            break
        depth += 1
        nxt: Dict[str, Tuple[Tuple[str, Rule], ...]] = {}
        for node, prefix in frontier:
            for succ in sorted(dinf.get(node, ())):
                if succ in seen:
                    continue
                cand = prefix + ((node, Rule.DINF),)
                if succ not in nxt or tuple(a for a, _ in cand) < tuple(a for a, _ in nxt[succ]):
                    nxt[succ] = cand
        seen.update(nxt)
        frontier = sorted(nxt.items(), key=lambda kv: (tuple(a for a, _ in kv[1]), kv[0]))
        if frontier and depth >= kb.config.max_depth and best is None:
            raise DepthLimitExceeded(f"no chain for {start} within {kb.config.max_depth} links")
    if best is not None and len(best) > kb.config.max_depth:
        raise DepthLimitExceeded(f"shortest chain for {start} has {len(best)} links")
    return best


def holds(
    kb: KnowledgeBase,
    claimer: AuthorityRef,
    access: Access,
    when: TimeQualifier,
    prop: Formula,
) -> Optional[DerivationChain]:
    """Chain supporting the attestation, or ``None`` if it is not derivable."""
    kb._check(claimer)
    k = _aid(claimer)
    if access is Access.DIRECT:
        if _direct(kb, k, prop, when):
            return DerivationChain(((k, Rule.FACT),), k)
        return None
    return derive_indirect(kb, k, prop, when)


def derive(kb: KnowledgeBase, a: Attestation) -> Optional[Attestation]:
    """``a`` with its provenance filled in, when it holds."""
    chain = holds(kb, a.claimer, a.access, a.when, a.prop)
    return None if chain is None else replace(a, provenance=chain)


def accountable_for(kb: KnowledgeBase, claimer: AuthorityRef, prop: Formula) -> Optional[str]:
    chain = derive_indirect(kb, claimer, prop)
    return None if chain is None else chain.accountable


def conflicts(kb: KnowledgeBase, prop: Formula) -> List[Attestation]:
    """Attested facts contradicting ``prop`` under the KB's exclusive roles, sorted."""
    if not (isinstance(prop, Atom) and prop.pred in kb.config.exclusive_roles and len(prop.args) == 2):
        return []
    holder, since = prop.args
    if not isinstance(since, TimeLit):
        return []
    out = []
    for f in kb.facts:
        p = f.prop
        if isinstance(p, Atom) and p.pred == prop.pred and len(p.args) == 2:
            other, other_since = p.args
            if other != holder and isinstance(other_since, TimeLit) and other_since.value <= since.value:
                out.append(f)
    return sorted(out, key=repr)


# time ------------------------------------------------------------------


def record_tick(kb: KnowledgeBase, t: int) -> KnowledgeBase:
    """Kt attests ``hasbeen(t)``; ``t`` becomes a known time."""
    if not isinstance(t, int) or t < 0:
        raise ValueError(f"time must be a non-negative integer, got {t!r}")
    if t in kb.ticks:
        return kb
    kb = replace(kb, ticks=kb.ticks | {t})
    return replace(kb, facts=kb.facts | {Attestation(TIME_AUTHORITY, Access.INDIRECT, UNTIMED, hasbeen(t))})


def is_time(kb: KnowledgeBase, t: int) -> bool:
    return t in kb.ticks


def current_time(kb: KnowledgeBase) -> int:
    return max(kb.ticks)


def is_current(kb: KnowledgeBase, t: int) -> bool:
    return is_time(kb, t) and all(t2 <= t for t2 in kb.ticks)


def in_future(kb: KnowledgeBase, t: int) -> bool:
    return t not in kb.ticks and t > current_time(kb)
