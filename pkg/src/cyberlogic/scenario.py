"""Scenario replay: steps folded through the protocol against a fresh ledger and KB.

:func:`build_jon_snow` encodes the reference workload: Jon Snow's visa
application, its delivery by the French consulate, and the control in which
officer Jaime L spots a contradiction about his employment.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple, Union

from .ledger import Answer, Ledger, LedgerEntry, Query, Suspects, audit_chain, select_demands
from .logic import (
    Attestation,
    Authority,
    DelegationAssertion,
    KBConfig,
    KnowledgeBase,
    LogicError,
    assert_attestation,
    assert_delegation,
    record_tick,
)
from .ledger import LedgerError
from .schengen import (
    ControlReport,
    CountryRegistry,
    MeansKind,
    MeansRule,
    Modes,
    NoMatchingDemand,
    SchengenDemand,
    SchengenError,
    SufficientMeansQuery,
    Visa,
    control,
    deliver,
    demand,
    suspect,
)
from .schengen.records import (
    Accommodation,
    Flight,
    Passport,
    Photo,
    SchengenForm,
    TravelHealth,
    employment,
)
from .syntax import UNTIMED, Access, Atom, Formula, TimeLit


class ScenarioError(Exception):
    """The scenario itself is malformed."""


class StepFailure(Exception):
    def __init__(self, index: int, step: "Step", error: Exception):
        super().__init__(f"step {index} ({step.kind}) failed: {type(error).__name__}: {error}")
        self.index = index
        self.step = step
        self.error = error


# steps ------------------------------------------------------------------


@dataclass(frozen=True)
class Tick:
    t: int
    kind = "tick"


@dataclass(frozen=True)
class AssertFact:
    fact: Attestation
    label: str = ""
    kind = "assert_fact"


@dataclass(frozen=True)
class DemandStep:
    requester: str
    country: str
    demand: str
    t: int
    kind = "demand"


@dataclass(frozen=True)
class DeliverStep:
    consulate: str
    requester: str
    visa: str
    demand: str
    t: int
    kind = "deliver"


@dataclass(frozen=True)
class ControlStep:
    officer: str
    visa: str
    t: int
    kind = "control"


@dataclass(frozen=True)
class SuspectStep:
    officer: str
    visa: str
    queries: Tuple[Query, ...]
    t: int
    kind = "suspect"


Step = Union[Tick, AssertFact, DemandStep, DeliverStep, ControlStep, SuspectStep]


@dataclass(frozen=True)
class VisaTemplate:
    """A visa as the consulate drafts it, before it is tied to a ledger demand."""

    name: str
    delivered_by: str
    duration: int
    kind: Formula
    country: str

    def bind(self, demand_ref: bytes) -> Visa:
        return Visa(self.name, self.delivered_by, self.duration, self.kind, self.country, demand_ref)


@dataclass(frozen=True)
class Scenario:
    name: str
    authorities: Tuple[Authority, ...]
    registry: CountryRegistry
    initial_facts: Tuple[Attestation, ...] = ()
    delegations: Tuple[DelegationAssertion, ...] = ()
    demands: Mapping[str, SchengenDemand] = field(default_factory=dict)
    visas: Mapping[str, VisaTemplate] = field(default_factory=dict)
    steps: Tuple[Step, ...] = ()
    modes: Modes = Modes()
    exclusive_roles: FrozenSet[str] = frozenset()
    times: Mapping[str, int] = field(default_factory=dict)
    definitions: Mapping[str, Formula] = field(default_factory=dict)

    def check(self) -> None:
        known = {a.id for a in self.authorities}
        last = -1
        for i, step in enumerate(self.steps):
            people = [getattr(step, n) for n in ("requester", "consulate", "officer") if hasattr(step, n)]
            if isinstance(step, AssertFact):
                people.append(step.fact.claimer)
            for p in people:
                if p not in known:
                    raise ScenarioError(f"step {i} names undeclared authority {p!r}")
            if isinstance(step, Tick):
                if step.t < last:
                    raise ScenarioError(f"step {i}: tick {step.t} goes back from {last}")
                last = step.t
            if isinstance(step, (DemandStep, DeliverStep)) and step.demand not in self.demands:
                raise ScenarioError(f"step {i} names undeclared demand {step.demand!r}")
            if isinstance(step, (DeliverStep, ControlStep, SuspectStep)) and step.visa not in self.visas:
                raise ScenarioError(f"step {i} names undeclared visa {step.visa!r}")
        for a in self.initial_facts:
            if a.claimer not in known:
                raise ScenarioError(f"fact by undeclared authority {a.claimer!r}")

    def without_step(self, label: str) -> "Scenario":
        """Drop the fact-assertion steps carrying ``label``."""
        kept = tuple(s for s in self.steps if not (isinstance(s, AssertFact) and s.label == label))
        return replace(self, steps=kept)

    def initial_kb(self) -> KnowledgeBase:
        kb = KnowledgeBase.empty(self.authorities, KBConfig(exclusive_roles=self.exclusive_roles))
        for a in self.initial_facts:
            kb = assert_attestation(kb, a)
        for d in self.delegations:
            kb = assert_delegation(kb, d)
        return kb


# replay -------------------------------------------------------------------


@dataclass(frozen=True)
class StepOutcome:
    index: int
    kind: str
    summary: str
    answer: Optional[Answer] = None
    control: Optional[ControlReport] = None


@dataclass(frozen=True)
class ScenarioReport:
    scenario: str
    modes: Modes
    outcomes: Tuple[StepOutcome, ...]
    ledger: Ledger
    kb: KnowledgeBase

    @property
    def answers(self) -> List[Tuple[int, Answer]]:
        return [(o.index, o.answer) for o in self.outcomes if o.answer is not None]

    @property
    def alerts(self) -> List[Tuple[int, Suspects]]:
        return [(i, a) for i, a in self.answers if isinstance(a, Suspects)]

    def accountability(self) -> List[Tuple[str, str, str]]:
        """(requirement, claim, accountable) rows gathered from controls and alerts."""
        from .formula import to_text

        rows: Dict[Tuple[str, str], str] = {}
        for o in self.outcomes:
            if o.control is not None:
                for row in o.control.validation.rows:
                    for c in row.claims:
                        rows[(row.requirement, to_text(_as_formula(c.claim)))] = c.accountable
                if o.control.delivery_accountable:
                    rows[("delivery", f"visa {o.control.visa}")] = o.control.delivery_accountable
            if isinstance(o.answer, Suspects):
                for c in o.answer.claims:
                    rows[("suspicious", to_text(_as_formula(c)))] = c.accountable
        return [(req, claim, who) for (req, claim), who in rows.items()]


def _as_formula(a: Attestation) -> Formula:
    from .syntax import Attest

    return Attest(a.claimer, a.access, a.when, a.prop)


class _Replay:
    def __init__(self, s: Scenario):
        self.s = s
        self.ledger = Ledger(record_controls=s.modes.record_controls)
        self.kb = s.initial_kb()
        self.delivered: Dict[str, Visa] = {}

    def demand_entry(self, name: str) -> Optional[LedgerEntry]:
        hits = [e for e in self.ledger.entries if getattr(e.tx, "demand", None) is not None and e.tx.demand.name == name]
        return hits[-1] if hits else None

    def visa(self, name: str) -> Visa:
        if name not in self.delivered:
            from .ledger import UnknownVisa

            raise UnknownVisa(f"{name} has not been delivered")
        return self.delivered[name]

    def apply(self, i: int, step: Step) -> StepOutcome:
        s = self.s
        if isinstance(step, Tick):
            self.kb = record_tick(self.kb, step.t)
            return StepOutcome(i, step.kind, f"time {step.t}")
        if isinstance(step, AssertFact):
            self.kb = assert_attestation(self.kb, step.fact)
            return StepOutcome(i, step.kind, step.label or "fact asserted")
        if isinstance(step, DemandStep):
            d = s.demands[step.demand]
            self.ledger, self.kb = demand(step.requester, step.country, d, step.t, self.ledger, self.kb)
            return StepOutcome(i, step.kind, f"{step.requester} demands {d.name}")
        if isinstance(step, DeliverStep):
            entry = self.demand_entry(step.demand)
            if entry is None:
                raise NoMatchingDemand(f"no {step.demand} on the ledger")
            v = s.visas[step.visa].bind(entry.hash)
            self.ledger, self.kb = deliver(
                step.consulate, step.requester, v, step.t, self.ledger, self.kb, s.registry, s.modes
            )
            self.delivered[v.name] = v
            return StepOutcome(i, step.kind, f"{step.consulate} delivers {v.name} to {step.requester}")
        if isinstance(step, ControlStep):
            rep = control(step.officer, self.visa(step.visa), step.t, self.ledger, self.kb, s.registry, s.modes)
            self.ledger, self.kb = rep.ledger, rep.kb
            return StepOutcome(i, step.kind, f"{step.officer} controls {step.visa}", control=rep)
        if isinstance(step, SuspectStep):
            answer, self.kb = suspect(
                step.officer, self.visa(step.visa), step.queries, step.t, self.ledger, self.kb, s.registry
            )
            verdict = "alert" if isinstance(answer, Suspects) else "false alert"
            return StepOutcome(i, step.kind, f"{step.officer} suspects {step.visa}: {verdict}", answer=answer)
        raise ScenarioError(f"unknown step {step!r}")


def run(s: Scenario) -> ScenarioReport:
    """Replay every step in order; the first protocol error aborts with :class:`StepFailure`."""
    s.check()
    replay = _Replay(s)
    outcomes = []
    for i, step in enumerate(s.steps):
        try:
            outcomes.append(replay.apply(i, step))
        except (LogicError, LedgerError, SchengenError, ValueError) as exc:
            raise StepFailure(i, step, exc) from exc
    report = ScenarioReport(s.name, s.modes, tuple(outcomes), replay.ledger, replay.kb)
    assert audit_chain(report.ledger).ok
    return report


# the reference workload ------------------------------------------------------

# days since 2018-01-01
FIRST_JUNE_2018 = 151
THIRTY_FIRST_AUGUST_2018 = 242
FIRST_JULY_2018 = 181
DEMAND_T = 60
DELIVER_T = 90
SUSPICIOUS_T = FIRST_JULY_2018
# the clue's "took his job" date, demand_t - 5
CLUE_T = DEMAND_T - 5

JON_SNOW_AUTHORITIES = (
    Authority("JonSnow", "Jon Snow"),
    Authority("CFrance", "French consulate"),
    Authority("Cwinterfell", "Kingdom of Winterfell"),
    Authority("Drogo", "Drogo airline"),
    Authority("ThreeEyedCrow", "Three-eyed crow & cie"),
    Authority("IcyWall", "The Icy Wall"),
    Authority("WinterfellTime", "The Winterfell Times"),
    Authority("JaimeL", "Jaime L, police officer"),
    Authority("SansaStark", "Lady Sansa Stark"),
)


def _direct(k: str, prop: Formula) -> Attestation:
    return Attestation(k, Access.DIRECT, UNTIMED, prop)


def was_king_of_the_north() -> Atom:
    return Atom("KingOfTheNorth", (Atom("JonSnow"), TimeLit(DEMAND_T)))


def suspicious_clue() -> Attestation:
    return _direct("WinterfellTime", Atom("KingOfTheNorth", (Atom("SansaStark"), TimeLit(CLUE_T))))


def build_jon_snow() -> Scenario:
    w_iata, f_iata = 1, 2
    form = SchengenForm("JSform", FIRST_JUNE_2018, THIRTY_FIRST_AUGUST_2018, "JonSnow", "France")
    outward = Flight(
        "JSoutward", "Drogo", 3, "JonSnow",
        ("Winterfell", FIRST_JUNE_2018), ("France", FIRST_JUNE_2018), w_iata, f_iata, 100,
    )
    ret = Flight(
        "JSreturn", "Drogo", 10, "JonSnow",
        ("France", THIRTY_FIRST_AUGUST_2018), ("Winterfell", THIRTY_FIRST_AUGUST_2018), f_iata, w_iata, 100,
    )
    acc = Accommodation("JSacc", "IcyWall", FIRST_JUNE_2018, THIRTY_FIRST_AUGUST_2018)
    suff = employment("Cwinterfell", was_king_of_the_north())
    js_demand = SchengenDemand(
        name="JSdemand",
        form=form,
        picture=Photo("JSpic"),
        pass_=Passport("JSpassport", "Cwinterfell", 730, "JonSnow"),
        travels=(outward, ret),
        insurance=TravelHealth("JSinsurance", "ThreeEyedCrow", "JonSnow", "TEC-1"),
        lodgings=(acc,),
        sufficient=suff,
        time_stamp=DEMAND_T,
    )
    registry = CountryRegistry(
        countries=("France", "Winterfell"),
        consulates={"France": "CFrance", "Winterfell": "Cwinterfell"},
        affiliations={"JonSnow": "Winterfell", "SansaStark": "Winterfell", "JaimeL": "France"},
        schengen_officers=frozenset({"JaimeL"}),
        schengen_area=frozenset({"France"}),
        means_rules={"France": MeansRule(frozenset({MeansKind.EMPLOYMENT, MeansKind.BANK_STATEMENT}))},
    )
    facts = (
        _direct("CFrance", Atom("schengen_form_requirement", (Atom("JSform"),))),
        _direct("JonSnow", Atom("passport_photo", (Atom("JSpic"),))),
        _direct("Drogo", Atom("travel_valid", (Atom("JSoutward"),))),
        _direct("Drogo", Atom("travel_valid", (Atom("JSreturn"),))),
        _direct("ThreeEyedCrow", Atom("travel_health_valid", (Atom("JSinsurance"),))),
        _direct("IcyWall", Atom("accommodation_valid", (Atom("JSacc"),))),
        _direct("Cwinterfell", was_king_of_the_north()),
        _direct("Cwinterfell", Atom("valid_passport", (Atom("JSpassport"),))),
    )
    query = SufficientMeansQuery(suff, was_king_of_the_north())
    steps = (
        Tick(DEMAND_T),
        DemandStep("JonSnow", "France", "JSdemand", DEMAND_T),
        Tick(DELIVER_T),
        DeliverStep("CFrance", "JonSnow", "JSvisa", "JSdemand", DELIVER_T),
        Tick(SUSPICIOUS_T),
        AssertFact(suspicious_clue(), "suspicious_clue"),
        ControlStep("JaimeL", "JSvisa", SUSPICIOUS_T),
        SuspectStep("JaimeL", "JSvisa", (query,), SUSPICIOUS_T),
    )
    return Scenario(
        name="jon-snow",
        authorities=JON_SNOW_AUTHORITIES,
        registry=registry,
        initial_facts=facts,
        demands={"JSdemand": js_demand},
        visas={
            "JSvisa": VisaTemplate(
                "JSvisa", "CFrance", THIRTY_FIRST_AUGUST_2018 - FIRST_JUNE_2018 + 1, Atom("short_stay"), "France"
            )
        },
        steps=steps,
        modes=Modes(itinerary_rule="relaxed"),
        exclusive_roles=frozenset({"KingOfTheNorth"}),
        times={
            "FirstJune2018": FIRST_JUNE_2018,
            "ThirtyFirstAugust2018": THIRTY_FIRST_AUGUST_2018,
            "demand_t": DEMAND_T,
            "deliver_t": DELIVER_T,
            "suspicious_t": SUSPICIOUS_T,
        },
        definitions={"was_KingOfTheNorth": was_king_of_the_north()},
    )
