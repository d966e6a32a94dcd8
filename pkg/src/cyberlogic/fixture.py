"""Versioned JSON fixtures for scenarios.

Facts, delegated propositions and claims are written in the attestation
notation, so a fixture reads like the policy it encodes. Record fields keep
the protocol's names (form, picture, pass, travels, insurance, lodgings,
sufficient, time_stamp).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Union

from .formula import parse, to_text
from .logic import Attestation, Authority, DelegationAssertion, Rule
from .schengen import ClaimQuery, CountryRegistry, MeansKind, MeansRule, Modes, SufficientMeansQuery
from .schengen.records import (
    Accommodation,
    Flight,
    Passport,
    Photo,
    SchengenDemand,
    SchengenForm,
    SufficientMeans,
    TravelHealth,
)
from .scenario import (
    AssertFact,
    ControlStep,
    DeliverStep,
    DemandStep,
    Scenario,
    Step,
    SuspectStep,
    Tick,
    VisaTemplate,
)
from .syntax import Attest

FORMAT = "cyberlogic-scenario"
VERSION = 1


class FixtureError(ValueError):
    pass


def attestation_of(text: str) -> Attestation:
    f = parse(text)
    if not isinstance(f, Attest):
        raise FixtureError(f"not an attestation: {text!r}")
    return Attestation(f.claimer, f.access, f.when, f.body)


def attestation_text(a: Attestation) -> str:
    return to_text(Attest(a.claimer, a.access, a.when, a.prop))


# records -----------------------------------------------------------------


def _means_to(m: SufficientMeans) -> dict:
    return {"kind": m.kind.value, "claim": to_text(m.claim), "authority": m.authority, "amount": m.amount}


def _means_from(d: dict) -> SufficientMeans:
    return SufficientMeans(MeansKind(d["kind"]), parse(d["claim"]), d.get("authority"), d.get("amount"))


def _flight_to(f: Flight) -> dict:
    return {
        "name": f.name,
        "airline": f.airline,
        "flight_no": f.flight_no,
        "passenger": f.passenger,
        "departure": list(f.departure),
        "arrival": list(f.arrival),
        "dep_airport": f.dep_airport,
        "arr_airport": f.arr_airport,
        "price": f.price,
    }


def _flight_from(d: dict) -> Flight:
    return Flight(
        d["name"], d["airline"], d["flight_no"], d["passenger"],
        tuple(d["departure"]), tuple(d["arrival"]), d["dep_airport"], d["arr_airport"], d["price"],
    )


def demand_to_json(d: SchengenDemand) -> dict:
    f, p = d.form, d.pass_
    return {
        "name": d.name,
        "form": {
            "name": f.name,
            "schengen_from": f.schengen_from,
            "schengen_to": f.schengen_to,
            "requester": f.requester,
            "country": f.country,
            "body": f.body,
        },
        "picture": {"name": d.picture.name, "blob": d.picture.blob.hex()},
        "pass": {"name": p.name, "delivered_by": p.delivered_by, "expiry": p.expiry, "holder": p.holder, "visas": list(p.visas)},
        "travels": [_flight_to(fl) for fl in d.travels],
        "insurance": {
            "name": d.insurance.name,
            "insurer": d.insurance.insurer,
            "insured": d.insurance.insured,
            "policy_id": d.insurance.policy_id,
        },
        "lodgings": [
            {"name": a.name, "shelter_at": a.shelter_at, "from": a.from_time, "to": a.to_time} for a in d.lodgings
        ],
        "sufficient": _means_to(d.sufficient),
        "time_stamp": d.time_stamp,
    }


def demand_from_json(d: dict) -> SchengenDemand:
    f, p, ins = d["form"], d["pass"], d["insurance"]
    return SchengenDemand(
        name=d["name"],
        form=SchengenForm(f["name"], f["schengen_from"], f["schengen_to"], f["requester"], f["country"], f.get("body", "")),
        picture=Photo(d["picture"]["name"], bytes.fromhex(d["picture"].get("blob", ""))),
        pass_=Passport(p["name"], p["delivered_by"], p["expiry"], p["holder"], tuple(p.get("visas", ()))),
        travels=tuple(_flight_from(x) for x in d["travels"]),
        insurance=TravelHealth(ins["name"], ins["insurer"], ins["insured"], ins.get("policy_id", "")),
        lodgings=tuple(Accommodation(a["name"], a["shelter_at"], a["from"], a["to"]) for a in d["lodgings"]),
        sufficient=_means_from(d["sufficient"]),
        time_stamp=d["time_stamp"],
    )


def registry_to_json(r: CountryRegistry) -> dict:
    return {
        "countries": list(r.countries),
        "consulates": dict(sorted(r.consulates.items())),
        "affiliations": dict(sorted(r.affiliations.items())),
        "schengen_officers": sorted(r.schengen_officers),
        "schengen_area": sorted(r.schengen_area),
        "means_rules": {
            c: {"accepts": sorted(k.value for k in rule.accepts), "min_amount": rule.min_amount}
            for c, rule in sorted(r.means_rules.items())
        },
    }


def registry_from_json(d: dict) -> CountryRegistry:
    return CountryRegistry(
        countries=tuple(d["countries"]),
        consulates=dict(d.get("consulates", {})),
        affiliations=dict(d.get("affiliations", {})),
        schengen_officers=frozenset(d.get("schengen_officers", ())),
        schengen_area=frozenset(d.get("schengen_area", ())),
        means_rules={
            c: MeansRule(frozenset(MeansKind(k) for k in rule["accepts"]), rule.get("min_amount", 0))
            for c, rule in d.get("means_rules", {}).items()
        },
    )


# steps ---------------------------------------------------------------------


def _query_to(q) -> dict:
    if isinstance(q, SufficientMeansQuery):
        return {"query": "sufficient_means", "means": _means_to(q.means), "conclusion": to_text(q.conclusion)}
    if isinstance(q, ClaimQuery):
        return {"query": "claim", "claim": attestation_text(q.claim)}
    raise FixtureError(f"query {type(q).__name__} has no fixture form")


def _query_from(d: dict):
    if d["query"] == "sufficient_means":
        return SufficientMeansQuery(_means_from(d["means"]), parse(d["conclusion"]))
    if d["query"] == "claim":
        return ClaimQuery(attestation_of(d["claim"]))
    raise FixtureError(f"unknown query {d['query']!r}")


def step_to_json(s: Step) -> dict:
    if isinstance(s, Tick):
        return {"step": "tick", "t": s.t}
    if isinstance(s, AssertFact):
        return {"step": "assert_fact", "fact": attestation_text(s.fact), "label": s.label}
    if isinstance(s, DemandStep):
        return {"step": "demand", "requester": s.requester, "country": s.country, "demand": s.demand, "t": s.t}
    if isinstance(s, DeliverStep):
        return {
            "step": "deliver",
            "consulate": s.consulate,
            "requester": s.requester,
            "visa": s.visa,
            "demand": s.demand,
            "t": s.t,
        }
    if isinstance(s, ControlStep):
        return {"step": "control", "officer": s.officer, "visa": s.visa, "t": s.t}
    if isinstance(s, SuspectStep):
        return {"step": "suspect", "officer": s.officer, "visa": s.visa, "t": s.t, "queries": [_query_to(q) for q in s.queries]}
    raise FixtureError(f"unknown step {s!r}")


def step_from_json(d: dict) -> Step:
    kind = d["step"]
    if kind == "tick":
        return Tick(d["t"])
    if kind == "assert_fact":
        return AssertFact(attestation_of(d["fact"]), d.get("label", ""))
    if kind == "demand":
        return DemandStep(d["requester"], d["country"], d["demand"], d["t"])
    if kind == "deliver":
        return DeliverStep(d["consulate"], d["requester"], d["visa"], d["demand"], d["t"])
    if kind == "control":
        return ControlStep(d["officer"], d["visa"], d["t"])
    if kind == "suspect":
        return SuspectStep(d["officer"], d["visa"], tuple(_query_from(q) for q in d["queries"]), d["t"])
    raise FixtureError(f"unknown step kind {kind!r}")


# scenarios -------------------------------------------------------------------


def scenario_to_json(s: Scenario) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "name": s.name,
        "authorities": [{"id": a.id, "name": a.display_name} for a in s.authorities],
        "registry": registry_to_json(s.registry),
        "modes": {
            "passport_rule": s.modes.passport_rule,
            "itinerary_rule": s.modes.itinerary_rule,
            "record_controls": s.modes.record_controls,
        },
        "exclusive_roles": sorted(s.exclusive_roles),
        "times": dict(s.times),
        "definitions": {k: to_text(v) for k, v in s.definitions.items()},
        "facts": [attestation_text(a) for a in s.initial_facts],
        "delegations": [
            {"rule": d.kind.value, "delegatee": d.delegatee, "delegator": d.delegator, "prop": to_text(d.prop)}
            for d in s.delegations
        ],
        "demands": [demand_to_json(d) for d in s.demands.values()],
        "visas": [
            {"name": v.name, "delivered_by": v.delivered_by, "duration": v.duration, "kind": to_text(v.kind), "country": v.country}
            for v in s.visas.values()
        ],
        "steps": [step_to_json(st) for st in s.steps],
    }


def scenario_from_json(d: Dict[str, Any]) -> Scenario:
    if d.get("format") != FORMAT:
        raise FixtureError(f"not a scenario fixture (format={d.get('format')!r})")
    if d.get("version") != VERSION:
        raise FixtureError(f"unsupported fixture version {d.get('version')!r}")
    try:
        m = d.get("modes", {})
        demands = [demand_from_json(x) for x in d.get("demands", [])]
        return Scenario(
            name=d.get("name", ""),
            authorities=tuple(Authority(a["id"], a.get("name", a["id"])) for a in d["authorities"]),
            registry=registry_from_json(d["registry"]),
            initial_facts=tuple(attestation_of(t) for t in d.get("facts", [])),
            delegations=tuple(
                DelegationAssertion(Rule(x["rule"]), x["delegatee"], x["delegator"], parse(x["prop"]))
                for x in d.get("delegations", [])
            ),
            demands={x.name: x for x in demands},
            visas={
                v["name"]: VisaTemplate(v["name"], v["delivered_by"], v["duration"], parse(v["kind"]), v["country"])
                for v in d.get("visas", [])
            },
            steps=tuple(step_from_json(x) for x in d.get("steps", [])),
            modes=Modes(m.get("passport_rule", "prose"), m.get("itinerary_rule", "relaxed"), m.get("record_controls", True)),
            exclusive_roles=frozenset(d.get("exclusive_roles", ())),
            times=dict(d.get("times", {})),
            definitions={k: parse(v) for k, v in d.get("definitions", {}).items()},
        )
    except FixtureError:
        raise
    except (KeyError, TypeError, ValueError, SyntaxError) as exc:
        raise FixtureError(f"malformed fixture: {type(exc).__name__}: {exc}") from exc


def dumps(s: Scenario) -> str:
    return json.dumps(scenario_to_json(s), indent=2, ensure_ascii=False) + "\n"


def load(path: Union[str, Path]) -> Scenario:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FixtureError(f"{path}: not JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise FixtureError(f"{path}: top level must be an object")
    return scenario_from_json(raw)


def save(s: Scenario, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(s), encoding="utf-8")


def bundled(name: str) -> Path:
    """Path of a fixture shipped inside the package."""
    return Path(__file__).parent / "fixtures" / f"{name}.json"
