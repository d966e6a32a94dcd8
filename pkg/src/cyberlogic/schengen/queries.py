"""Queries an officer can raise against a delivered visa."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional

from .. import codec
from ..ledger import Query
from ..logic import Attestation, KnowledgeBase, UnknownAuthority, conflicts, derive
from ..syntax import UNTIMED, Access, Formula
from .records import SchengenDemand, SufficientMeans, Visa


def _checked(kb: KnowledgeBase, claim: Attestation, about: Formula) -> Optional[Attestation]:
    """``claim`` annotated with its provenance if it is suspicious, else ``None``."""
    try:
        derived = derive(kb, claim)
    except UnknownAuthority:
        derived = None
    if derived is not None and not conflicts(kb, about) and not conflicts(kb, claim.prop):
        return None
    return derived or claim


@codec.register
@dataclass(frozen=True)
class SufficientMeansQuery(Query):
    """For any demand behind the visa whose means are ``means``, ``conclusion`` must hold.

    The claim backing the means is suspicious when it cannot be derived or when
    the knowledge base holds an attestation contradicting ``conclusion``.
    """

    means: SufficientMeans
    conclusion: Formula
    name = "sufficient_means"

    def suspicious(self, visa: Visa, demand: Optional[SchengenDemand], kb: KnowledgeBase) -> List[Attestation]:
        if demand is None or demand.sufficient != self.means:
            return []
        claimer = self.means.authority or demand.form.requester
        claim = Attestation(claimer, Access.DIRECT, UNTIMED, self.means.claim)
        hit = _checked(kb, claim, self.conclusion)
        return [] if hit is None else [hit]


@codec.register
@dataclass(frozen=True)
class ClaimQuery(Query):
    """A single attestation that must hold and must not be contradicted."""

    claim: Attestation
    name = "claim"

    def suspicious(self, visa: Visa, demand: Optional[SchengenDemand], kb: KnowledgeBase) -> List[Attestation]:
        hit = _checked(kb, replace(self.claim, provenance=None), self.claim.prop)
        return [] if hit is None else [hit]
