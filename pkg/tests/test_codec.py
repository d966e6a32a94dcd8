import enum
from dataclasses import dataclass

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cyberlogic import codec
from cyberlogic.logic import Attestation
from cyberlogic.scenario import build_jon_snow
from cyberlogic.syntax import UNTIMED, Access, Atom, at


@codec.register
class Colour(enum.Enum):
    RED = "red"


@codec.register
@dataclass(frozen=True)
class Pair:
    left: object
    right: object


ints = st.integers(min_value=-(2**63), max_value=2**63 - 1)
scalars = st.one_of(
    st.none(),
    st.booleans(),
    ints,
    st.text(max_size=20),
    st.binary(max_size=20),
)
values = st.recursive(
    scalars,
    lambda sub: st.one_of(
        st.lists(sub, max_size=4).map(tuple),
        st.frozensets(st.one_of(ints, st.text(max_size=5)), max_size=4),
        st.builds(Pair, sub, sub),
    ),
    max_leaves=10,
)


@given(values)
def test_round_trip(v):
    assert codec.decode(codec.encode(v)) == v


@given(st.frozensets(ints, max_size=6))
def test_sets_encode_independently_of_iteration_order(s):
    assert codec.encode(s) == codec.encode(frozenset(sorted(s, reverse=True)))


def test_integers_are_big_endian_eight_bytes():
    assert codec.encode(1) == b"I" + b"\x00" * 7 + b"\x01"
    assert codec.u64(258) == b"\x00" * 6 + b"\x01\x02"


def test_records_and_enums():
    a = Attestation("k", Access.DIRECT, at(3), Atom("p"))
    assert codec.decode(codec.encode(a)) == a
    assert codec.decode(codec.encode(Colour.RED)) is Colour.RED


def test_provenance_is_not_serialized():
    from cyberlogic.logic import DerivationChain, Rule

    a = Attestation("k", Access.DIRECT, UNTIMED, Atom("p"))
    b = Attestation("k", Access.DIRECT, UNTIMED, Atom("p"), DerivationChain((("k", Rule.FACT),), "k"))
    assert codec.encode(a) == codec.encode(b)


def test_demand_round_trip():
    d = build_jon_snow().demands["JSdemand"]
    assert codec.decode(codec.encode(d)) == d


def test_trailing_bytes_and_unknown_tags_are_errors():
    with pytest.raises(codec.CodecError):
        codec.decode(codec.encode(1) + b"\x00")
    with pytest.raises(codec.CodecError):
        codec.decode(b"?")
    with pytest.raises(codec.CodecError):
        codec.decode(codec.encode("abc")[:-1])


def test_unregistered_types_are_refused():
    @dataclass
    class Loose:
        x: int

    with pytest.raises(codec.CodecError):
        codec.encode(Loose(1))
    with pytest.raises(codec.CodecError):
        codec.encode(2**64)
