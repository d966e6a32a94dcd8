import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cyberlogic.logic import (
    D1,
    D2,
    TIME_AUTHORITY,
    Attestation,
    DepthLimitExceeded,
    Dinf,
    KBConfig,
    KnowledgeBase,
    NestingLimitExceeded,
    Rule,
    SelfDelegation,
    UnknownAuthority,
    accountable_for,
    assert_delegation,
    assert_fact,
    compatible,
    conflicts,
    current_time,
    derive,
    derive_indirect,
    hasbeen,
    holds,
    in_future,
    is_current,
    months,
    record_tick,
)
from cyberlogic.syntax import UNTIMED, Access, Atom, Attest, TimeLit, When, after, at, before, endorsement

from oracles import PROPS, chain_oracle, compat_oracle, qualifier, random_kb, reachable_oracle

A = Atom("valid", (Atom("doc"),))


def kb_of(*names, **cfg):
    return KnowledgeBase.empty(names, KBConfig(**cfg))


def test_direct_claim_is_its_own_accountable():
    kb = assert_fact(kb_of("k"), "k", Access.DIRECT, UNTIMED, A)
    chain = derive_indirect(kb, "k", A)
    assert chain.links == (("k", Rule.FACT),)
    assert accountable_for(kb, "k", A) == "k"


def test_d1_keeps_the_delegator_accountable():
    kb = assert_fact(kb_of("req", "cons"), "cons", Access.DIRECT, UNTIMED, A)
    kb = assert_delegation(kb, D1("req", "cons", A))
    chain = holds(kb, "req", Access.INDIRECT, UNTIMED, A)
    assert chain.links == (("req", Rule.D1), ("cons", Rule.FACT))
    assert chain.accountable == "cons"
    # D1 gives indirect rights only
    assert holds(kb, "req", Access.DIRECT, UNTIMED, A) is None


def test_d1_needs_a_direct_attestation_by_the_delegator():
    kb = assert_fact(kb_of("req", "cons"), "cons", Access.INDIRECT, UNTIMED, A)
    kb = assert_delegation(kb, D1("req", "cons", A))
    assert derive_indirect(kb, "req", A) is None


def test_dinf_relays_indirect_claims():
    kb = kb_of("a", "b", "c")
    kb = assert_fact(kb, "c", Access.DIRECT, UNTIMED, A)
    kb = assert_delegation(kb, Dinf("a", "b", A))
    kb = assert_delegation(kb, Dinf("b", "c", A))
    chain = derive_indirect(kb, "a", A)
    assert chain.links == (("a", Rule.DINF), ("b", Rule.DINF), ("c", Rule.FACT))
    assert chain.accountable == "c"


def test_d2_makes_the_endorser_accountable():
    kb = kb_of("k", "k1", "k0")
    kb = assert_fact(kb, "k0", Access.DIRECT, UNTIMED, A)
    kb = assert_fact(kb, "k1", Access.DIRECT, UNTIMED, endorsement("k0", A))
    kb = assert_delegation(kb, D2("k", "k1", A))
    chain = derive_indirect(kb, "k", A)
    assert chain.links == (("k", Rule.D2), ("k0", Rule.FACT))
    assert chain.accountable == "k1"


def test_d2_without_endorsement_does_not_fire():
    kb = kb_of("k", "k1", "k0")
    kb = assert_fact(kb, "k0", Access.DIRECT, UNTIMED, A)
    kb = assert_delegation(kb, D2("k", "k1", A))
    assert derive_indirect(kb, "k", A) is None


def test_shortest_chain_wins():
    kb = kb_of("a", "b", "c", "d")
    kb = assert_fact(kb, "d", Access.DIRECT, UNTIMED, A)
    for k, k2 in [("a", "b"), ("b", "c"), ("c", "d")]:
        kb = assert_delegation(kb, Dinf(k, k2, A))
    kb = assert_delegation(kb, D1("a", "d", A))
    assert derive_indirect(kb, "a", A).links == (("a", Rule.D1), ("d", Rule.FACT))


def test_ties_break_on_authority_ids():
    kb = kb_of("a", "y", "z")
    for k in ("y", "z"):
        kb = assert_fact(kb, k, Access.DIRECT, UNTIMED, A)
        kb = assert_delegation(kb, D1("a", k, A))
    assert accountable_for(kb, "a", A) == "y"


def test_unrelated_proposition_is_not_derived():
    kb = assert_fact(kb_of("a", "b"), "b", Access.DIRECT, UNTIMED, A)
    kb = assert_delegation(kb, D1("a", "b", Atom("other")))
    assert derive_indirect(kb, "a", A) is None


def test_cycles_terminate():
    kb = kb_of("a", "b")
    kb = assert_delegation(kb, Dinf("a", "b", A))
    kb = assert_delegation(kb, Dinf("b", "a", A))
    assert derive_indirect(kb, "a", A) is None


def test_depth_limit():
    names = [f"n{i}" for i in range(6)]
    kb = kb_of(*names, max_depth=3)
    for k, k2 in zip(names, names[1:]):
        kb = assert_delegation(kb, Dinf(k, k2, A))
    kb = assert_fact(kb, names[-1], Access.DIRECT, UNTIMED, A)
    with pytest.raises(DepthLimitExceeded):
        derive_indirect(kb, "n0", A)
    assert derive_indirect(kb, "n4", A) is not None


def test_unknown_authorities_are_rejected():
    kb = kb_of("a")
    with pytest.raises(UnknownAuthority):
        assert_fact(kb, "ghost", Access.DIRECT, UNTIMED, A)
    with pytest.raises(UnknownAuthority):
        assert_delegation(kb, D1("a", "ghost", A))
    with pytest.raises(UnknownAuthority):
        holds(kb, "ghost", Access.INDIRECT, UNTIMED, A)


def test_self_delegation():
    kb = kb_of("a")
    with pytest.raises(SelfDelegation):
        assert_delegation(kb, D1("a", "a", A))
    with pytest.raises(SelfDelegation):
        assert_delegation(kb, D2("a", "a", A))
    assert assert_delegation(kb, Dinf("a", "a", A)) == kb


def test_nesting_limit():
    f = A
    for _ in range(3):
        f = Attest("a", Access.DIRECT, UNTIMED, f)
    kb = kb_of("a", max_nesting=2)
    with pytest.raises(NestingLimitExceeded):
        assert_fact(kb, "a", Access.DIRECT, UNTIMED, f)
    assert assert_fact(kb_of("a", max_nesting=3), "a", Access.DIRECT, UNTIMED, f)


def test_derive_attaches_provenance():
    kb = assert_fact(kb_of("k"), "k", Access.DIRECT, at(4), A)
    a = derive(kb, Attestation("k", Access.DIRECT, before(9), A))
    assert a.provenance.accountable == "k"
    assert derive(kb, Attestation("k", Access.DIRECT, after(9), A)) is None


def test_timed_queries():
    kb = assert_fact(kb_of("k"), "k", Access.DIRECT, at(5), A)
    assert holds(kb, "k", Access.DIRECT, at(5), A)
    assert holds(kb, "k", Access.DIRECT, UNTIMED, A)
    assert not holds(kb, "k", Access.DIRECT, at(6), A)
    assert holds(kb, "k", Access.DIRECT, before(6), A)
    assert not holds(kb, "k", Access.DIRECT, before(5), A)
    assert holds(kb, "k", Access.DIRECT, after(4), A)
    untimed = assert_fact(kb_of("k"), "k", Access.DIRECT, UNTIMED, A)
    assert not holds(untimed, "k", Access.DIRECT, at(5), A)


def test_compatibility_table_matches_enumeration():
    for fk, qk in itertools.product(list(When), repeat=2):
        for ft, qt in itertools.product(range(8), repeat=2):
            f, q = qualifier(fk, ft), qualifier(qk, qt)
            assert compatible(f, q) == compat_oracle(f, q), (f, q)


def test_conflicting_office_holders():
    role = "KingOfTheNorth"
    kb = kb_of("w", "c", exclusive_roles=frozenset({role}))
    claim = Atom(role, (Atom("Jon"), TimeLit(60)))
    assert conflicts(kb, claim) == []
    kb = assert_fact(kb, "w", Access.DIRECT, UNTIMED, Atom(role, (Atom("Sansa"), TimeLit(55))))
    assert [f.claimer for f in conflicts(kb, claim)] == ["w"]
    # a successor taking office later does not contradict an earlier claim
    assert conflicts(kb, Atom(role, (Atom("Jon"), TimeLit(50)))) == []
    assert conflicts(kb_of("w"), claim) == []


# time -----------------------------------------------------------------


def test_ticks():
    kb = KnowledgeBase.empty()
    assert current_time(kb) == 0
    kb = record_tick(record_tick(kb, 7), 3)
    assert current_time(kb) == 7
    assert is_current(kb, 7) and not is_current(kb, 3)
    assert in_future(kb, 8) and not in_future(kb, 7) and not in_future(kb, 5)
    assert holds(kb, TIME_AUTHORITY, Access.INDIRECT, UNTIMED, hasbeen(3))
    assert record_tick(kb, 7) == kb
    with pytest.raises(ValueError):
        record_tick(kb, -1)


def test_months_are_thirty_days():
    assert months(3) == 90


@given(st.sets(st.integers(min_value=0, max_value=50), max_size=8), st.integers(min_value=0, max_value=60))
def test_current_time_is_the_latest_tick(ticks, probe):
    kb = KnowledgeBase.empty()
    for t in ticks:
        kb = record_tick(kb, t)
    assert current_time(kb) == max(ticks | {0})
    assert in_future(kb, probe) == (probe > max(ticks | {0}))


# oracle agreement --------------------------------------------------------


@given(st.integers(min_value=0, max_value=2**32))
def test_closure_agrees_with_oracles(seed):
    kb = random_kb(random.Random(seed))
    for k in kb.authorities:
        for p in PROPS:
            chain = derive_indirect(kb, k, p)
            assert (None if chain is None else chain.key()) == chain_oracle(kb, k, p)
            assert (chain is not None) == (k in reachable_oracle(kb, p))


@given(st.integers(min_value=0, max_value=2**32), st.sampled_from(list(Access)), st.sampled_from(PROPS))
def test_adding_facts_is_monotone(seed, access, prop):
    rng = random.Random(seed)
    kb = random_kb(rng)
    before_ = {k for k in kb.authorities if derive_indirect(kb, k, prop)}
    bigger = assert_fact(kb, rng.choice(sorted(kb.authorities)), access, UNTIMED, prop)
    after_ = {k for k in bigger.authorities if derive_indirect(bigger, k, prop)}
    assert before_ <= after_


def test_results_do_not_depend_on_insertion_order(rng):
    kb = random_kb(rng)
    facts = sorted(kb.facts, key=repr)
    dels = sorted(kb.delegations, key=repr)
    for _ in range(5):
        rng.shuffle(facts)
        rng.shuffle(dels)
        other = KnowledgeBase.empty(kb.authorities.values())
        for f in facts:
            other = assert_fact(other, f.claimer, f.access, f.when, f.prop)
        for d in dels:
            other = assert_delegation(other, d)
        for k in kb.authorities:
            for p in PROPS:
                assert derive_indirect(kb, k, p) == derive_indirect(other, k, p)
