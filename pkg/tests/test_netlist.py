import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from supernodal.errors import (
    DisconnectedCircuit,
    DuplicateElementId,
    MissingGroundNode,
    NetlistSyntaxError,
    NonpositiveAdmittance,
    ShortedSource,
    UnboundSymbol,
    UnknownControlElement,
    UnsupportedNullor,
)
from supernodal.fuzz import random_circuit
from supernodal.netlist import (
    Kind,
    bind_values,
    connected_components,
    parse_netlist,
    serialize_netlist,
    validate_circuit,
)


def test_example1_parses(ex1):
    assert [e.id for e in ex1.elements] == ["V01", "V02", "Y1", "Y2", "Y3", "Y4", "I01"]
    assert ex1.nodes == ["0", "1", "2", "3", "4"]
    v01 = ex1.by_id["V01"]
    assert (v01.kind, v01.pos, v01.neg, v01.value) == (Kind.VSOURCE, "2", "1", "v01")
    assert ex1.references == ("2",)
    assert ex1.symbols() == {"v01", "v02", "G1", "G2", "G3", "G4", "i01"}


def test_rational_and_symbolic_values():
    c = parse_netlist("Y1 1 0 3/4\nY2 1 0 0.25\nV1 1 0 -2\nI1 0 1 1e3\nY3 1 0 Gx\n")
    vals = [e.value for e in c.elements]
    assert vals == [Fraction(3, 4), Fraction(1, 4), Fraction(-2), Fraction(1000), "Gx"]


def test_comments_case_and_end():
    c = parse_netlist("# comment\n* another\n\ny1 1 0 1\n.END\nY2 1 0 1\n")
    assert [e.id for e in c.elements] == ["y1"]
    assert c.elements[0].kind is Kind.ADMITTANCE


def test_resistor_card_is_reciprocal():
    c = parse_netlist("R1 1 0 4\nR2 1 0 Rx\n")
    assert c.by_id["R1"].value == Fraction(1, 4)
    assert c.by_id["R2"].value == "1/Rx"
    bound = bind_values(c, {"Rx": Fraction(2)})
    assert bound.by_id["R2"].value == Fraction(1, 2)


def test_controlled_cards():
    c = parse_netlist("V1 1 0 1\nY1 1 2 1\nE1 2 0 1 0 3\nG1 2 0 1 0 1/2\nH1 3 0 V1 2\nF1 3 0 Y1 -1\nY2 3 0 1\n")
    assert c.by_id["E1"].ctrl_nodes == ("1", "0")
    assert c.by_id["H1"].ctrl_element == "V1"
    assert c.by_id["G1"].value == Fraction(1, 2)
    assert c.has_controlled()


@pytest.mark.parametrize(
    "text, error",
    [
        ("Y1 1 0\n", NetlistSyntaxError),
        ("Q1 1 0 1\n", NetlistSyntaxError),
        ("Y1 1 0 1$\n", NetlistSyntaxError),
        (".frobnicate\nY1 1 0 1\n", NetlistSyntaxError),
        ("Y1 1 0 1\nY1 1 0 2\n", DuplicateElementId),
        ("Y1 1 0 1\nH1 2 0 Z9 1\n", UnknownControlElement),
        ("Y1 1 0 1\nG1 1 0 1 0 2\nF1 1 0 G1 1\n", UnknownControlElement),
        ("Y1 1 2 1\n", MissingGroundNode),
    ],
)
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_netlist(text)


def test_syntax_error_reports_line():
    with pytest.raises(NetlistSyntaxError) as err:
        parse_netlist("Y1 1 0 1\n\nV1 1 0\n")
    assert err.value.line == 3


def test_ground_directive():
    c = parse_netlist(".ground g\nY1 1 g 1\n")
    assert c.ground == "g"
    validate_circuit(c)


def test_disconnected():
    with pytest.raises(DisconnectedCircuit) as err:
        validate_circuit(parse_netlist("Y1 1 0 1\nY2 2 3 1\n"))
    assert err.value.components == [["0", "1"], ["2", "3"]]


def test_nullor_rejected():
    c = parse_netlist("Y1 1 0 1\nN1 1 0\nO1 2 0\nY2 2 1 1\n")
    with pytest.raises(UnsupportedNullor) as err:
        validate_circuit(c)
    assert err.value.elements == ["N1", "O1"]
    assert "nullor" in str(err.value)


def test_shorted_source():
    with pytest.raises(ShortedSource):
        validate_circuit(parse_netlist("Y1 1 0 1\nV1 1 1 2\n"))


def test_bind_values_errors(ex1):
    with pytest.raises(UnboundSymbol):
        bind_values(ex1, {"G1": 1})
    bindings = {"G1": 1, "G2": 1, "G3": 0, "G4": 1, "v01": 1, "v02": 1, "i01": 1}
    with pytest.raises(NonpositiveAdmittance):
        bind_values(ex1, bindings)
    # Source values may be negative or zero.
    bindings.update(G3=1, v01=-3, i01=0)
    assert not bind_values(ex1, bindings).symbols()


def _brute_components(nodes, edges):
    # Transitive closure, independent of the BFS under test.
    reach = {n: {n} for n in nodes}
    changed = True
    while changed:
        changed = False
        for a, b in edges:
            u = reach[a] | reach[b]
            for n in u:
                if reach[n] != u | reach[n]:
                    reach[n] |= u
                    changed = True
    return sorted({tuple(sorted(s)) for s in reach.values()})


@settings(max_examples=100)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), max_size=8))
def test_connected_components_matches_closure(pairs):
    edges = [(str(a), str(b)) for a, b in pairs]
    nodes = sorted({n for e in edges for n in e} | {"0"})
    got = sorted(tuple(c) for c in connected_components(nodes, edges))
    assert got == _brute_components(nodes, edges)


@pytest.mark.parametrize("seed", range(40))
def test_serialize_roundtrip(seed):
    c = random_circuit(random.Random(seed))
    text = serialize_netlist(c)
    back = parse_netlist(text)
    assert back == c
    assert serialize_netlist(back) == text


def test_serialize_roundtrip_resistors(ex2):
    c = parse_netlist(".ground g\n.ref 2\nR1 1 g 4\nR2 2 1 Rx\nV1 2 g 3/2\n")
    assert parse_netlist(serialize_netlist(c)) == c
    assert parse_netlist(serialize_netlist(ex2)) == ex2
