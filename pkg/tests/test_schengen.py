from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cyberlogic.ledger import VALID, Ledger, Suspects, UnknownVisa, verify
from cyberlogic.logic import accountable_for, assert_attestation, record_tick
from cyberlogic.scenario import build_jon_snow, suspicious_clue
from cyberlogic.schengen import (
    REQUIREMENTS,
    ClaimQuery,
    MeansKind,
    MeansRule,
    Modes,
    NoMatchingDemand,
    NotConsulate,
    NotCurrentTime,
    NotOfficer,
    Refusal,
    SufficientMeansQuery,
    TimestampMismatch,
    UnknownCountry,
    accommodations_consistency,
    accommodations_validation,
    check_demanding,
    control,
    deliver,
    delivering_validation,
    demand,
    suspect,
    travels_consistency,
    travels_validation,
    valid_passport_at,
    validate_demand,
)
from cyberlogic.schengen.records import Accommodation, Flight, Passport, SchengenForm, SufficientMeans, cash, credit_card

from oracles import consistency_oracle

S = build_jon_snow()
D = S.demands["JSdemand"]
REG = S.registry


def kb_without(index=None):
    facts = [f for i, f in enumerate(S.initial_facts) if i != index]
    return replace(S, initial_facts=tuple(facts)).initial_kb()


# supporting attestation of each requirement, as an index into the fixture's facts
SUPPORT = {"form": 0, "photo": 1, "itinerary": 2, "insurance": 4, "accommodation": 5, "sufficient_means": 6, "passport": 7}


def test_fixture_demand_passes_all_seven_rows():
    rep = validate_demand("JonSnow", D, REG, S.initial_kb(), S.modes)
    assert [(r.number, r.requirement) for r in rep.rows] == list(REQUIREMENTS)
    assert rep.passed
    claimers = {r.requirement: r.accountable for r in rep.rows}
    assert claimers == {
        "form": ("CFrance",),
        "photo": ("JonSnow",),
        "itinerary": ("Drogo",),
        "insurance": ("ThreeEyedCrow",),
        "accommodation": ("IcyWall",),
        "sufficient_means": ("Cwinterfell",),
        "passport": ("Cwinterfell",),
    }


@pytest.mark.parametrize("requirement", [name for _, name in REQUIREMENTS])
def test_deleting_one_attestation_fails_exactly_its_row(requirement):
    rep = validate_demand("JonSnow", D, REG, kb_without(SUPPORT[requirement]), S.modes)
    assert len(rep.rows) == 7
    assert [r.requirement for r in rep.failed()] == [requirement]


def test_wrong_claimer_does_not_count():
    kb = kb_without(SUPPORT["insurance"])
    fake = replace(S.initial_facts[SUPPORT["insurance"]], claimer="Drogo")
    rep = validate_demand("JonSnow", D, REG, assert_attestation(kb, fake), S.modes)
    assert not rep.row("insurance").passed


def test_empty_itinerary_and_lodgings_are_vacuously_fine():
    d = replace(D, travels=(), lodgings=())
    rep = validate_demand("JonSnow", d, REG, S.initial_kb(), S.modes)
    assert rep.row("itinerary").passed and rep.row("accommodation").passed
    assert travels_validation([], S.initial_kb()) and accommodations_validation([], S.initial_kb())


def test_strict_chaining_rejects_a_stay_between_flights():
    rep = validate_demand("JonSnow", D, REG, S.initial_kb(), replace(S.modes, itinerary_rule="strict"))
    assert [r.requirement for r in rep.failed()] == ["itinerary"]


def test_passport_rules():
    p = Passport("P", "Cwinterfell", 400, "JonSnow")
    assert valid_passport_at(p, 300, "prose") and not valid_passport_at(p, 311, "prose")
    assert not valid_passport_at(p, 300, "paper")
    assert valid_passport_at(Passport("P", "C", 0, "J"), 50, "paper")
    with pytest.raises(ValueError):
        valid_passport_at(p, 0, "other")


def test_passport_must_belong_to_the_requester():
    d = replace(D, pass_=replace(D.pass_, holder="SansaStark"))
    rep = validate_demand("JonSnow", d, REG, S.initial_kb(), S.modes)
    assert [r.requirement for r in rep.failed()] == ["passport"]
    assert dict(rep.row("passport").conditions)["passport_of_requester"] is False


@pytest.mark.parametrize(
    "modes,allowed",
    [
        (Modes(passport_rule="paper"), {"passport"}),
        (Modes(itinerary_rule="strict"), {"itinerary", "accommodation"}),
        (Modes(record_controls=False), set()),
    ],
)
def test_modes_only_touch_their_own_predicate(modes, allowed):
    kb = S.initial_kb()
    base = validate_demand("JonSnow", D, REG, kb, Modes())
    other = validate_demand("JonSnow", D, REG, kb, modes)
    changed = {a.requirement for a, b in zip(base.rows, other.rows) if a != b}
    assert changed <= allowed
    assert all(a.claims == b.claims for a, b in zip(base.rows, other.rows))


def test_country_means_rule():
    reg = replace(REG, means_rules={"France": MeansRule(frozenset({MeansKind.CASH}), 500)})
    rep = validate_demand("JonSnow", D, reg, S.initial_kb(), S.modes)
    assert [r.requirement for r in rep.failed()] == ["sufficient_means"]
    assert MeansRule(frozenset({MeansKind.CASH}), 500).admits(cash(600, D.sufficient.claim))
    assert not MeansRule(frozenset({MeansKind.CASH}), 500).admits(cash(100, D.sufficient.claim))


def test_means_records_validate_their_shape():
    with pytest.raises(ValueError):
        SufficientMeans(MeansKind.EMPLOYMENT, D.sufficient.claim)
    assert credit_card("Bank", 10, D.sufficient.claim).amount == 10


def test_unknown_country():
    d = replace(D, form=replace(D.form, country="Essos"))
    with pytest.raises(UnknownCountry):
        validate_demand("JonSnow", d, REG, S.initial_kb(), S.modes)


def test_form_needs_a_proper_window():
    with pytest.raises(ValueError):
        SchengenForm("F", 10, 10, "JonSnow", "France")


# consistency ---------------------------------------------------------------


def flight(s, e):
    return Flight("f", "A", 1, "x", ("X", s), ("Y", e), 1, 2, 0)


def test_consistency_examples():
    assert travels_consistency([], 3, 1)
    assert travels_consistency([flight(0, 1)], 0, 1, "strict")
    assert not travels_consistency([flight(1, 1)], 1, 1, "strict")
    assert travels_consistency([flight(1, 1)], 1, 1, "relaxed")
    assert travels_consistency([flight(0, 2), flight(2, 5)], 0, 5, "strict")
    assert not travels_consistency([flight(0, 2), flight(3, 5)], 0, 5, "strict")
    assert travels_consistency([flight(0, 2), flight(3, 5)], 0, 5, "relaxed")
    acc = Accommodation("a", "S", 151, 242)
    assert accommodations_consistency([acc], 151, 242, "strict")
    with pytest.raises(ValueError):
        travels_consistency([flight(0, 1)], 0, 1, "loose")


legs = st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), max_size=3)


@given(legs, st.integers(0, 5), st.integers(0, 5), st.sampled_from(["strict", "relaxed"]))
def test_consistency_matches_oracle(ls, tfrom, tto, rule):
    expected = consistency_oracle(ls, tfrom, tto, rule)
    assert travels_consistency([flight(s, e) for s, e in ls], tfrom, tto, rule) == expected
    accs = [Accommodation("a", "S", s, e) for s, e in ls]
    assert accommodations_consistency(accs, tfrom, tto, rule) == expected


# protocol ------------------------------------------------------------------


def delivered(kb=None):
    """Ledger, KB and visa after Jon Snow's demand and the consulate's delivery."""
    kb = record_tick(kb if kb is not None else S.initial_kb(), 60)
    ledger, kb = demand("JonSnow", "France", D, 60, Ledger(), kb)
    kb = record_tick(kb, 90)
    v = S.visas["JSvisa"].bind(ledger.entries[0].hash)
    ledger, kb = deliver("CFrance", "JonSnow", v, 90, ledger, kb, REG, S.modes)
    return ledger, kb, v


def test_demand_records_the_requesters_claim():
    kb = record_tick(S.initial_kb(), 60)
    ledger, kb = demand("JonSnow", "France", D, 60, Ledger(), kb)
    assert len(ledger.entries) == 1 and ledger.entries[0].author == "JonSnow"
    assert check_demanding("JonSnow", 60, "France", D, kb)
    assert not check_demanding("JonSnow", 61, "France", D, kb)
    with pytest.raises(TimestampMismatch):
        demand("JonSnow", "France", D, 61, Ledger(), kb)


def test_delivery_keeps_the_consulate_accountable():
    ledger, kb, v = delivered()
    assert [type(e.tx).__name__ for e in ledger.entries] == ["Demand", "Deliver"]
    assert accountable_for(kb, "JonSnow", delivering_validation("CFrance", "JonSnow", v, 90)) == "CFrance"


def test_delivery_errors():
    kb = record_tick(S.initial_kb(), 60)
    ledger, kb = demand("JonSnow", "France", D, 60, Ledger(), kb)
    v = S.visas["JSvisa"].bind(ledger.entries[0].hash)
    with pytest.raises(NotConsulate):
        deliver("Cwinterfell", "JonSnow", v, 90, ledger, kb, REG, S.modes)
    with pytest.raises(NoMatchingDemand):
        deliver("CFrance", "JonSnow", replace(v, demand_ref=b"\x00" * 32), 90, ledger, kb, REG, S.modes)
    with pytest.raises(Refusal) as info:
        deliver("CFrance", "SansaStark", v, 90, ledger, kb, REG, S.modes)
    assert any("demand written by JonSnow" in r for r in info.value.reasons)


@pytest.mark.parametrize("requirement", ["insurance", "passport", "photo"])
def test_refusal_names_the_failing_conjunct(requirement):
    kb = record_tick(kb_without(SUPPORT[requirement]), 60)
    ledger, kb = demand("JonSnow", "France", D, 60, Ledger(), kb)
    v = S.visas["JSvisa"].bind(ledger.entries[0].hash)
    with pytest.raises(Refusal) as info:
        deliver("CFrance", "JonSnow", v, 90, ledger, kb, REG, S.modes)
    assert [r.split(":")[1] for r in info.value.reasons] == [requirement]
    assert [r.requirement for r in info.value.report.failed()] == [requirement]


def test_delivery_soundness():
    ledger, kb, v = delivered()
    assert validate_demand("JonSnow", ledger.entries[0].tx.demand, REG, kb, S.modes).passed


def test_control():
    ledger, kb, v = delivered()
    kb = record_tick(kb, 181)
    rep = control("JaimeL", v, 181, ledger, kb, REG, S.modes)
    assert rep.accountability()["sufficient_means"] == ["Cwinterfell"]
    assert rep.accountability()["delivery"] == ["CFrance"]
    assert type(rep.ledger.entries[-1].tx).__name__ == "Control"
    with pytest.raises(NotOfficer):
        control("JonSnow", v, 181, ledger, kb, REG, S.modes)
    with pytest.raises(NotCurrentTime):
        control("JaimeL", v, 90, ledger, kb, REG, S.modes)
    with pytest.raises(UnknownVisa):
        control("JaimeL", replace(v, name="other"), 181, ledger, kb, REG, S.modes)


def query():
    return SufficientMeansQuery(D.sufficient, D.sufficient.claim)


def test_suspect_with_and_without_the_clue():
    ledger, kb, v = delivered()
    kb = record_tick(kb, 181)
    answer, _ = suspect("JaimeL", v, [query()], 181, ledger, kb, REG)
    assert answer == VALID
    answer, kb2 = suspect("JaimeL", v, [query()], 181, ledger, assert_attestation(kb, suspicious_clue()), REG)
    assert isinstance(answer, Suspects)
    [claim] = answer.claims
    assert (claim.claimer, claim.prop, claim.accountable) == ("Cwinterfell", D.sufficient.claim, "Cwinterfell")
    assert len(kb2.facts) > len(kb.facts) + 1  # the clue plus the officer's answer
    with pytest.raises(NotOfficer):
        suspect("JonSnow", v, [query()], 181, ledger, kb, REG)


def test_claim_query_flags_missing_attestations():
    ledger, kb, v = delivered()
    present = S.initial_facts[SUPPORT["insurance"]]
    assert verify(ledger, "JaimeL", v, [ClaimQuery(present)], kb) == VALID
    missing = replace(present, claimer="Drogo")
    assert verify(ledger, "JaimeL", v, [ClaimQuery(missing)], kb) == Suspects((missing,))


def test_a_control_never_changes_a_later_answer():
    for with_clue in (False, True):
        ledger, kb, v = delivered()
        kb = record_tick(kb, 181)
        if with_clue:
            kb = assert_attestation(kb, suspicious_clue())
        before = verify(ledger, "JaimeL", v, [query()], kb)
        rep = control("JaimeL", v, 181, ledger, kb, REG, S.modes)
        assert verify(rep.ledger, "JaimeL", v, [query()], rep.kb) == before


def test_requirement_names_are_stable():
    assert [name for _, name in REQUIREMENTS] == [
        "form",
        "photo",
        "itinerary",
        "insurance",
        "accommodation",
        "sufficient_means",
        "passport",
    ]
