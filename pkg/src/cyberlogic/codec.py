"""Canonical binary serialization for ledger payloads.

Every value is a one-byte tag followed by its body. Integers are 8-byte
big-endian (signed), strings and byte strings are 4-byte length-prefixed,
records list their fields in declaration order. Sets are encoded sorted by
their members' encodings, so equal values always serialize to equal bytes.
"""

from __future__ import annotations

import dataclasses
import enum
import struct
from typing import Any, Dict, Tuple, Type

_RECORDS: Dict[str, Type] = {}
_ENUMS: Dict[str, Type[enum.Enum]] = {}


class CodecError(ValueError):
    pass


def register(cls):
    """Class decorator (or plain call) making a dataclass or enum serializable."""
    if isinstance(cls, type) and issubclass(cls, enum.Enum):
        _ENUMS[cls.__name__] = cls
    elif dataclasses.is_dataclass(cls):
        _RECORDS[cls.__name__] = cls
    else:
        raise TypeError(f"{cls!r} is neither a dataclass nor an enum")
    return cls


def u64(n: int) -> bytes:
    return struct.pack(">Q", n)


def i64(n: int) -> bytes:
    return struct.pack(">q", n)


def blob(b: bytes) -> bytes:
    return struct.pack(">I", len(b)) + b


def text(s: str) -> bytes:
    return blob(s.encode("utf-8"))


def encode(value: Any) -> bytes:
    if value is None:
        return b"N"
    if isinstance(value, bool):
        return b"T" if value else b"F"
    if isinstance(value, enum.Enum):
        return b"E" + text(type(value).__name__) + text(str(value.value))
    if isinstance(value, int):
        if not -(2**63) <= value < 2**63:
            raise CodecError(f"integer {value} does not fit in 8 bytes")
        return b"I" + i64(value)
    if isinstance(value, str):
        return b"S" + text(value)
    if isinstance(value, bytes):
        return b"B" + blob(value)
    if isinstance(value, (tuple, list)):
        return b"L" + struct.pack(">I", len(value)) + b"".join(encode(v) for v in value)
    if isinstance(value, (frozenset, set)):
        items = sorted(encode(v) for v in value)
        return b"Z" + struct.pack(">I", len(items)) + b"".join(items)
    if dataclasses.is_dataclass(value) and type(value).__name__ in _RECORDS:
        fields = [f for f in dataclasses.fields(value) if f.compare]
        body = b"".join(encode(getattr(value, f.name)) for f in fields)
        return b"R" + text(type(value).__name__) + struct.pack(">I", len(fields)) + body
    raise CodecError(f"cannot serialize {type(value).__name__}")


class Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise CodecError("truncated input")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def blob(self) -> bytes:
        return self.take(self.u32())

    def text(self) -> str:
        try:
            return self.blob().decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CodecError("invalid utf-8") from exc

    def value(self) -> Any:
        tag = self.take(1)
        if tag == b"N":
            return None
        if tag == b"T":
            return True
        if tag == b"F":
            return False
        if tag == b"I":
            return struct.unpack(">q", self.take(8))[0]
        if tag == b"S":
            return self.text()
        if tag == b"B":
            return self.blob()
        if tag == b"E":
            name, raw = self.text(), self.text()
            try:
                return _ENUMS[name](raw)
            except (KeyError, ValueError) as exc:
                raise CodecError(f"bad enum {name}.{raw}") from exc
        if tag == b"L":
            return tuple(self.value() for _ in range(self.u32()))
        if tag == b"Z":
            return frozenset(self.value() for _ in range(self.u32()))
        if tag == b"R":
            name = self.text()
            cls = _RECORDS.get(name)
            if cls is None:
                raise CodecError(f"unknown record type {name!r}")
            n = self.u32()
            fields = [f for f in dataclasses.fields(cls) if f.compare]
            if n != len(fields):
                raise CodecError(f"{name} expects {len(fields)} fields, got {n}")
            try:
                return cls(**{f.name: self.value() for f in fields})
            except (TypeError, ValueError) as exc:
                raise CodecError(f"cannot rebuild {name}: {exc}") from exc
        raise CodecError(f"unknown tag {tag!r}")


def decode(data: bytes) -> Any:
    r = Reader(data)
    value = r.value()
    if r.pos != len(data):
        raise CodecError("trailing bytes")
    return value


def _register_core() -> Tuple[type, ...]:
    from . import logic, syntax

    kinds = (
        syntax.Access,
        syntax.When,
        syntax.TimeQualifier,
        syntax.Atom,
        syntax.TimeLit,
        syntax.Attest,
        syntax.And,
        syntax.Implies,
        syntax.Not,
        logic.Rule,
        logic.Attestation,
        logic.DerivationChain,
    )
    for k in kinds:
        register(k)
    return kinds


_register_core()
