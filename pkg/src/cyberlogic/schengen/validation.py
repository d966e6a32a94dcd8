"""The seven visa requirements, the itinerary/accommodation fixpoints and the country registry."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from ..logic import (
    Attestation,
    DerivationChain,
    KnowledgeBase,
    UnknownAuthority,
    holds,
    months,
)
from ..syntax import UNTIMED, Access, Atom, Formula
from .records import Accommodation, Flight, MeansKind, Passport, SchengenDemand, SufficientMeans

PASSPORT_RULES = ("prose", "paper")
ITINERARY_RULES = ("strict", "relaxed")


class SchengenError(Exception):
    pass


class UnknownCountry(SchengenError):
    pass


@dataclass(frozen=True)
class Modes:
    passport_rule: str = "prose"
    itinerary_rule: str = "relaxed"
    record_controls: bool = True

    def __post_init__(self):
        if self.passport_rule not in PASSPORT_RULES:
            raise ValueError(f"passport_rule must be one of {PASSPORT_RULES}")
        if self.itinerary_rule not in ITINERARY_RULES:
            raise ValueError(f"itinerary_rule must be one of {ITINERARY_RULES}")


@dataclass(frozen=True)
class MeansRule:
    """A country's acceptance rule for proofs of sufficient means."""

    accepts: FrozenSet[MeansKind] = frozenset(MeansKind)
    min_amount: int = 0

    def admits(self, means: SufficientMeans) -> bool:
        if means.kind not in self.accepts:
            return False
        return means.amount is None or means.amount >= self.min_amount


@dataclass(frozen=True)
class CountryRegistry:
    countries: Tuple[str, ...]
    consulates: Mapping[str, str] = field(default_factory=dict)  # country -> consulate authority
    affiliations: Mapping[str, str] = field(default_factory=dict)  # authority -> country
    schengen_officers: FrozenSet[str] = frozenset()
    schengen_area: FrozenSet[str] = frozenset()
    means_rules: Mapping[str, MeansRule] = field(default_factory=dict)

    def __post_init__(self):
        for country, consul in self.consulates.items():
            if country not in self.countries:
                raise ValueError(f"consulate for unregistered country {country!r}")
            home = self.affiliations.get(consul)
            if home is not None and home != country:
                raise ValueError(f"{consul} is consulate of {country} but affiliated with {home}")
        for area in self.schengen_area:
            if area not in self.countries:
                raise ValueError(f"unregistered Schengen country {area!r}")

    def _known(self, country: str) -> str:
        if country not in self.countries:
            raise UnknownCountry(country)
        return country

    def consulate_of(self, country: str) -> str:
        self._known(country)
        try:
            return self.consulates[country]
        except KeyError:
            raise UnknownCountry(f"{country} has no consulate") from None

    def country_of(self, authority: str) -> Optional[str]:
        if authority in self.affiliations:
            return self.affiliations[authority]
        for country, consul in self.consulates.items():
            if consul == authority:
                return country
        return None

    def means_rule(self, country: str) -> MeansRule:
        self._known(country)
        return self.means_rules.get(country, MeansRule())


# single-claim predicates -----------------------------------------------


def months_before(t: int, n: int) -> int:
    """Truncated subtraction on naturals: never goes below zero."""
    return max(0, t - months(n))


def valid_passport_at(p: Passport, departure: int, rule: str = "prose") -> bool:
    if rule == "prose":
        return p.expiry >= departure + months(3)
    if rule == "paper":
        return p.expiry <= months_before(departure, 3)
    raise ValueError(f"unknown passport rule {rule!r}")


def travel_valid(fl: Flight) -> Atom:
    return Atom("travel_valid", (Atom(fl.name),))


def accommodation_valid(ac: Accommodation) -> Atom:
    return Atom("accommodation_valid", (Atom(ac.name),))


def _claim(kb: KnowledgeBase, claimer: str, prop: Formula) -> Optional[DerivationChain]:
    try:
        return holds(kb, claimer, Access.DIRECT, UNTIMED, prop)
    except UnknownAuthority:
        return None


def travels_validation(itin: Sequence[Flight], kb: KnowledgeBase) -> bool:
    return all(_claim(kb, fl.airline, travel_valid(fl)) for fl in itin)


def accommodations_validation(accs: Sequence[Accommodation], kb: KnowledgeBase) -> bool:
    return all(_claim(kb, ac.shelter_at, accommodation_valid(ac)) for ac in accs)


def _consistency(
    items: Sequence, start: Callable, end: Callable, tfrom: int, tto: int, rule: str
) -> bool:
    if rule == "strict":
        # each leg starts exactly where the previous one ended
        if not items:
            return True
        a, rest = items[0], items[1:]
        if not start(a) < end(a):
            return False
        if not rest:
            return start(a) == tfrom and end(a) == tto
        return start(a) == tfrom and _consistency(rest, start, end, end(a), tto, rule)
    if rule == "relaxed":
        if not items:
            return True
        # same-day legs allowed; stays between legs allowed
        if start(items[0]) != tfrom or end(items[-1]) != tto:
            return False
        prev_end = None
        for a in items:
            if not start(a) <= end(a):
                return False
            if prev_end is not None and start(a) < prev_end:
                return False
            prev_end = end(a)
        return True
    raise ValueError(f"unknown itinerary rule {rule!r}")


def travels_consistency(itin: Sequence[Flight], tfrom: int, tto: int, rule: str = "strict") -> bool:
    return _consistency(tuple(itin), lambda f: f.dep_time, lambda f: f.arr_time, tfrom, tto, rule)


def accommodations_consistency(accs: Sequence[Accommodation], tfrom: int, tto: int, rule: str = "strict") -> bool:
    return _consistency(tuple(accs), lambda a: a.from_time, lambda a: a.to_time, tfrom, tto, rule)


# the seven requirements ------------------------------------------------

REQUIREMENTS = (
    (1, "form"),
    (2, "photo"),
    (3, "itinerary"),
    (4, "insurance"),
    (5, "accommodation"),
    (6, "sufficient_means"),
    (7, "passport"),
)


@dataclass(frozen=True)
class ClaimCheck:
    claim: Attestation
    chain: Optional[DerivationChain]

    @property
    def holds(self) -> bool:
        return self.chain is not None

    @property
    def accountable(self) -> str:
        return self.chain.accountable if self.chain else self.claim.claimer


@dataclass(frozen=True)
class RequirementRow:
    number: int
    requirement: str
    claims: Tuple[ClaimCheck, ...] = ()
    conditions: Tuple[Tuple[str, bool], ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.holds for c in self.claims) and all(ok for _, ok in self.conditions)

    @property
    def accountable(self) -> Tuple[str, ...]:
        return tuple(dict.fromkeys(c.accountable for c in self.claims))


@dataclass(frozen=True)
class ValidationReport:
    requester: str
    demand: str
    rows: Tuple[RequirementRow, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failed(self) -> List[RequirementRow]:
        return [r for r in self.rows if not r.passed]

    def row(self, requirement: str) -> RequirementRow:
        for r in self.rows:
            if r.requirement == requirement:
                return r
        raise KeyError(requirement)


def requirement_claims(requester: str, d: SchengenDemand, reg: CountryRegistry) -> List[List[Attestation]]:
    """The attestations each requirement rests on, in requirement order."""

    def direct(k: str, prop: Formula) -> Attestation:
        return Attestation(k, Access.DIRECT, UNTIMED, prop)

    consul = reg.consulate_of(d.form.country)
    means = d.sufficient
    return [
        [direct(consul, Atom("schengen_form_requirement", (Atom(d.form.name),)))],
        [direct(requester, Atom("passport_photo", (Atom(d.picture.name),)))],
        [direct(fl.airline, travel_valid(fl)) for fl in d.travels],
        [direct(d.insurance.insurer, Atom("travel_health_valid", (Atom(d.insurance.name),)))],
        [direct(ac.shelter_at, accommodation_valid(ac)) for ac in d.lodgings],
        [direct(means.authority or requester, means.claim)],
        [direct(d.pass_.delivered_by, Atom("valid_passport", (Atom(d.pass_.name),)))],
    ]


def validate_demand(
    requester: str,
    d: SchengenDemand,
    reg: CountryRegistry,
    kb: KnowledgeBase,
    modes: Modes = Modes(),
) -> ValidationReport:
    country = d.form.country
    reg._known(country)
    tfrom, tto = d.form.schengen_from, d.form.schengen_to
    conditions = {
        3: (("travels_consistency", travels_consistency(d.travels, tfrom, tto, modes.itinerary_rule)),),
        5: (("accommodations_consistency", accommodations_consistency(d.lodgings, tfrom, tto, modes.itinerary_rule)),),
        6: ((f"means_of_sufficiency({country})", reg.means_rule(country).admits(d.sufficient)),),
        7: (
            ("valid_passport_at", valid_passport_at(d.pass_, tto, modes.passport_rule)),
            ("passport_of_requester", d.pass_.holder == requester),
        ),
    }
    rows = []
    for (number, name), claims in zip(REQUIREMENTS, requirement_claims(requester, d, reg)):
        checks = tuple(ClaimCheck(a, _claim(kb, a.claimer, a.prop)) for a in claims)
        rows.append(RequirementRow(number, name, checks, conditions.get(number, ())))
    return ValidationReport(requester, d.name, tuple(rows))
