"""Data records of a Schengen visa application.

Each record carries a ``name`` so propositions about it (``travel_valid(JSoutward)``)
can refer to it in the attestation notation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Tuple

from .. import codec
from ..syntax import Atom, Formula


@codec.register
@dataclass(frozen=True)
class SchengenForm:
    name: str
    schengen_from: int
    schengen_to: int
    requester: str
    country: str
    body: str = ""

    def __post_init__(self):
        if not self.schengen_from < self.schengen_to:
            raise ValueError(f"form {self.name}: stay must start before it ends")


@codec.register
@dataclass(frozen=True)
class Photo:
    name: str
    blob: bytes = b""


@codec.register
@dataclass(frozen=True)
class Passport:
    name: str
    delivered_by: str
    expiry: int
    holder: str
    visas: Tuple[str, ...] = ()


@codec.register
@dataclass(frozen=True)
class Flight:
    name: str
    airline: str
    flight_no: int
    passenger: str
    departure: Tuple[str, int]  # (country, time)
    arrival: Tuple[str, int]
    dep_airport: int  # IATA codes are plain numbers here
    arr_airport: int
    price: int

    @property
    def dep_time(self) -> int:
        return self.departure[1]

    @property
    def arr_time(self) -> int:
        return self.arrival[1]


@codec.register
@dataclass(frozen=True)
class TravelHealth:
    name: str
    insurer: str
    insured: str
    policy_id: str = ""


@codec.register
@dataclass(frozen=True)
class Accommodation:
    name: str
    shelter_at: str
    from_time: int
    to_time: int


@codec.register
class MeansKind(enum.Enum):
    BANK_STATEMENT = "Bank_statement"
    CREDIT_CARD = "Credit_card"
    CASH = "Cash"
    EMPLOYMENT = "Employment"


@codec.register
@dataclass(frozen=True)
class SufficientMeans:
    kind: MeansKind
    claim: Formula
    authority: Optional[str] = None  # bank, card issuer or employer; None for cash
    amount: Optional[int] = None

    def __post_init__(self):
        needs_authority = self.kind is not MeansKind.CASH
        if needs_authority != (self.authority is not None):
            raise ValueError(f"{self.kind.value} {'needs' if needs_authority else 'takes no'} authority")
        needs_amount = self.kind in (MeansKind.CREDIT_CARD, MeansKind.CASH)
        if needs_amount != (self.amount is not None):
            raise ValueError(f"{self.kind.value} {'needs' if needs_amount else 'takes no'} amount")


def bank_statement(bank: str, claim: Formula) -> SufficientMeans:
    return SufficientMeans(MeansKind.BANK_STATEMENT, claim, bank)


def credit_card(issuer: str, amount: int, claim: Formula) -> SufficientMeans:
    return SufficientMeans(MeansKind.CREDIT_CARD, claim, issuer, amount)


def cash(amount: int, claim: Formula) -> SufficientMeans:
    return SufficientMeans(MeansKind.CASH, claim, None, amount)


def employment(employer: str, claim: Formula) -> SufficientMeans:
    return SufficientMeans(MeansKind.EMPLOYMENT, claim, employer)


@codec.register
@dataclass(frozen=True)
class SchengenDemand:
    name: str
    form: SchengenForm
    picture: Photo
    pass_: Passport
    travels: Tuple[Flight, ...]
    insurance: TravelHealth
    lodgings: Tuple[Accommodation, ...]
    sufficient: SufficientMeans
    time_stamp: int


@codec.register
@dataclass(frozen=True)
class Visa:
    name: str
    delivered_by: str
    duration: int
    kind: Formula  # stored, never interpreted
    country: str
    demand_ref: bytes  # hash of the ledger entry holding the originating demand

    def term(self) -> Atom:
        return Atom(self.name)
