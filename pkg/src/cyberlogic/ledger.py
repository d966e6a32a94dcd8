"""Single-node, append-only, hash-chained ledger with write/read/verify.

Each entry's hash covers its index, author, canonical transaction bytes,
timestamp and the previous entry's hash. The on-disk form starts with the
magic ``CYBL1`` and the hash algorithm name, followed by the entries.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

from . import codec
from .logic import Attestation, AuthorityRef, KnowledgeBase, _aid

MAGIC = b"CYBL1"
DEFAULT_HASH = "sha256"
ZERO_HASH = bytes(32)


class LedgerError(Exception):
    pass


class ClockRegression(LedgerError):
    pass


class UnknownVisa(LedgerError):
    pass


class LedgerFormatError(LedgerError):
    pass


@codec.register
@dataclass(frozen=True)
class Demand:
    demand: Any  # SchengenDemand


@codec.register
@dataclass(frozen=True)
class Deliver:
    visa: Any  # Visa


@codec.register
@dataclass(frozen=True)
class Control:
    visa: Any  # Visa


Transaction = Union[Demand, Deliver, Control]


def _hasher(name: str):
    try:
        h = hashlib.new(name)
    except ValueError as exc:
        raise LedgerFormatError(f"unknown hash algorithm {name!r}") from exc
    if h.digest_size != 32:
        raise LedgerFormatError(f"{name} is not a 256-bit hash")
    return lambda data: hashlib.new(name, data).digest()


def entry_hash(index: int, author: str, tx_bytes: bytes, timestamp: int, prev_hash: bytes, hash_name: str = DEFAULT_HASH) -> bytes:
    payload = codec.u64(index) + codec.text(author) + codec.blob(tx_bytes) + codec.u64(timestamp) + prev_hash
    return _hasher(hash_name)(payload)


@dataclass(frozen=True)
class LedgerEntry:
    index: int
    author: str
    tx: Transaction
    timestamp: int
    prev_hash: bytes
    hash: bytes

    def tx_bytes(self) -> bytes:
        return codec.encode(self.tx)

    def to_bytes(self) -> bytes:
        return (
            codec.u64(self.index)
            + codec.text(self.author)
            + codec.blob(self.tx_bytes())
            + codec.u64(self.timestamp)
            + self.prev_hash
            + self.hash
        )


@dataclass(frozen=True)
class Ledger:
    entries: Tuple[LedgerEntry, ...] = ()
    hash_name: str = DEFAULT_HASH
    record_controls: bool = True

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[LedgerEntry]:
        return iter(self.entries)

    @property
    def head(self) -> bytes:
        return self.entries[-1].hash if self.entries else ZERO_HASH

    def by_hash(self, digest: bytes) -> Optional[LedgerEntry]:
        for e in self.entries:
            if e.hash == digest:
                return e
        return None

    def to_bytes(self) -> bytes:
        return MAGIC + codec.text(self.hash_name) + b"".join(e.to_bytes() for e in self.entries)

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_bytes(self.to_bytes())


def write(ledger: Ledger, author: AuthorityRef, tx: Transaction, t: int) -> Ledger:
    """Append ``tx`` by ``author`` at time ``t``; the clock may not run backwards."""
    if ledger.entries and t < ledger.entries[-1].timestamp:
        raise ClockRegression(f"time {t} precedes last entry at {ledger.entries[-1].timestamp}")
    if t < 0:
        raise ClockRegression(f"negative time {t}")
    index = len(ledger.entries)
    author = _aid(author)
    digest = entry_hash(index, author, codec.encode(tx), t, ledger.head, ledger.hash_name)
    entry = LedgerEntry(index, author, tx, t, ledger.head, digest)
    return replace(ledger, entries=ledger.entries + (entry,))


@dataclass(frozen=True)
class TransactionSelector:
    """Which entries a read returns.

    ``kind`` filters on transaction type; ``visa`` on the carried visa;
    ``author`` on the writer. A ``Control`` selector returns the visa's
    Deliver entries and, unless the ledger says otherwise, records the control.
    """

    kind: Optional[str] = None
    visa: Any = None
    author: Optional[str] = None

    def __post_init__(self):
        if self.kind not in (None, "Demand", "Deliver", "Control"):
            raise ValueError(f"unknown transaction kind {self.kind!r}")
        if self.kind == "Control" and self.visa is None:
            raise ValueError("a control read names its visa")

    def matches(self, e: LedgerEntry) -> bool:
        kind = "Deliver" if self.kind == "Control" else self.kind
        if kind is not None and type(e.tx).__name__ != kind:
            return False
        if self.author is not None and e.author != self.author:
            return False
        if self.visa is not None and getattr(e.tx, "visa", None) != self.visa:
            return False
        return True


def select_demands(author: Optional[str] = None) -> TransactionSelector:
    return TransactionSelector("Demand", author=author)


def select_delivers(visa: Any = None) -> TransactionSelector:
    return TransactionSelector("Deliver", visa=visa)


def select_control(visa: Any) -> TransactionSelector:
    return TransactionSelector("Control", visa=visa)


class ReadResult(NamedTuple):
    entries: List[LedgerEntry]
    ledger: Ledger


def read(ledger: Ledger, reader: AuthorityRef, selector: TransactionSelector, t: Optional[int] = None) -> ReadResult:
    found = [e for e in ledger.entries if selector.matches(e)]
    if selector.kind == "Control" and ledger.record_controls:
        when = t if t is not None else (ledger.entries[-1].timestamp if ledger.entries else 0)
        ledger = write(ledger, reader, Control(selector.visa), when)
    return ReadResult(found, ledger)


# verification ------------------------------------------------------------


@dataclass(frozen=True)
class Valid:
    def __str__(self) -> str:
        return "Valid"


VALID = Valid()


@dataclass(frozen=True)
class Suspects:
    claims: Tuple[Attestation, ...]

    def __post_init__(self):
        if not self.claims:
            raise ValueError("Suspects carries at least one claim")


Answer = Union[Valid, Suspects]


class Query:
    """A question an officer asks about a visa.

    Subclasses return the claims that make the visa suspicious; an empty list
    means the query is satisfied.
    """

    name = "query"

    def suspicious(self, visa: Any, demand: Any, kb: KnowledgeBase) -> List[Attestation]:
        raise NotImplementedError


def delivered(ledger: Ledger, visa: Any) -> Optional[LedgerEntry]:
    for e in ledger.entries:
        if isinstance(e.tx, Deliver) and e.tx.visa == visa:
            return e
    return None


def demand_of(ledger: Ledger, visa: Any) -> Optional[Any]:
    entry = ledger.by_hash(visa.demand_ref)
    if entry is None or not isinstance(entry.tx, Demand):
        return None
    return entry.tx.demand


def verify(ledger: Ledger, verifier: AuthorityRef, v: Any, qs: Sequence[Query], kb: KnowledgeBase) -> Answer:
    """Valid when every query is satisfied, else the suspicious claims in query order."""
    if not qs:
        raise ValueError("verify needs at least one query")
    if delivered(ledger, v) is None:
        raise UnknownVisa(getattr(v, "name", repr(v)))
    demand = demand_of(ledger, v)
    claims: List[Attestation] = []
    for q in qs:
        for c in q.suspicious(v, demand, kb):
            if c not in claims:
                claims.append(c)
    return Suspects(tuple(claims)) if claims else VALID


# audit -------------------------------------------------------------------


@dataclass(frozen=True)
class AuditReport:
    broken_at: Optional[int] = None
    entries: int = 0
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.broken_at is None

    def __str__(self) -> str:
        if self.ok:
            return f"Ok ({self.entries} entries)"
        return f"Broken({self.broken_at}): {self.reason}"


def _check_links(records, hash_name: str) -> AuditReport:
    prev = ZERO_HASH
    count = 0
    for i, (index, author, tx_bytes, ts, prev_hash, digest) in enumerate(records):
        if index != i:
            return AuditReport(i, count, f"index {index} at position {i}")
        if prev_hash != prev:
            return AuditReport(i, count, "prev_hash does not match predecessor")
        if entry_hash(index, author, tx_bytes, ts, prev_hash, hash_name) != digest:
            return AuditReport(i, count, "hash mismatch")
        prev = digest
        count += 1
    return AuditReport(None, count)


def audit_chain(ledger: Ledger) -> AuditReport:
    records = ((e.index, e.author, e.tx_bytes(), e.timestamp, e.prev_hash, e.hash) for e in ledger.entries)
    return _check_links(records, ledger.hash_name)


def _read_header(data: bytes) -> Tuple[str, int]:
    if not data.startswith(MAGIC):
        raise LedgerFormatError("missing CYBL1 header")
    r = codec.Reader(data)
    r.take(len(MAGIC))
    try:
        name = r.text()
    except codec.CodecError as exc:
        raise LedgerFormatError("unreadable hash algorithm id") from exc
    _hasher(name)
    return name, r.pos


def _raw_entries(data: bytes, start: int):
    """Yield raw entry fields; a parse failure surfaces as ``None`` for that entry."""
    r = codec.Reader(data)
    r.pos = start
    while r.pos < len(data):
        try:
            index = struct.unpack(">Q", r.take(8))[0]
            author = r.text()
            tx_bytes = r.blob()
            ts = struct.unpack(">Q", r.take(8))[0]
            prev_hash = r.take(32)
            digest = r.take(32)
        except codec.CodecError:
            yield None
            return
        yield index, author, tx_bytes, ts, prev_hash, digest


def audit_bytes(data: bytes) -> AuditReport:
    """Audit a serialized ledger without trusting or decoding its transactions."""
    hash_name, start = _read_header(data)
    records = []
    for i, rec in enumerate(_raw_entries(data, start)):
        if rec is None:
            earlier = _check_links(records, hash_name)
            return earlier if not earlier.ok else AuditReport(i, i, "truncated or malformed entry")
        records.append(rec)
    return _check_links(records, hash_name)


def audit_file(path: Union[str, Path]) -> AuditReport:
    return audit_bytes(Path(path).read_bytes())


def from_bytes(data: bytes, record_controls: bool = True) -> Ledger:
    """Rebuild a ledger; refuses data that does not audit clean."""
    report = audit_bytes(data)
    if not report.ok:
        raise LedgerFormatError(f"ledger does not audit: {report}")
    hash_name, start = _read_header(data)
    entries = []
    for index, author, tx_bytes, ts, prev_hash, digest in _raw_entries(data, start):
        try:
            tx = codec.decode(tx_bytes)
        except codec.CodecError as exc:
            raise LedgerFormatError(f"entry {index}: {exc}") from exc
        entries.append(LedgerEntry(index, author, tx, ts, prev_hash, digest))
    ledger = Ledger(tuple(entries), hash_name, record_controls)
    if ledger.to_bytes() != data:
        raise LedgerFormatError("entries do not re-serialize canonically")
    return ledger


def load(path: Union[str, Path], record_controls: bool = True) -> Ledger:
    return from_bytes(Path(path).read_bytes(), record_controls)
