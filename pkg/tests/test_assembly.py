import random
from fractions import Fraction

import pytest
from conftest import symbolize
from oracles import literal_path_sum, na_stamp

from supernodal.assembly import build_reduced_system, path_sum, trace
from supernodal.fuzz import inject_source_loop, random_circuit
from supernodal.netlist import Kind, parse_netlist, validate_circuit
from supernodal.symbolic import Poly, parse_poly


def _strings(rs):
    return [[str(x) for x in row] for row in rs.matrix], [str(x) for x in rs.rhs]


def test_example1(ex1):
    rs = build_reduced_system(validate_circuit(ex1))
    assert rs.unknowns == ["v2", "v3"]
    matrix, rhs = _strings(rs)
    assert matrix == [["G1 + G3 + G4", "-G1"], ["-G1", "G1 + G2"]]
    assert [parse_poly(r) for r in rhs] == [parse_poly("G3*v01"), parse_poly("-i01 + G2*v02")]


def test_example2(ex2):
    rs = build_reduced_system(validate_circuit(ex2))
    assert rs.unknowns == ["v1", "v5"]
    expected = [["G1 + G3 + G4 + G5", "-G3 - G4 - G5"], ["-G3 - G4 - G5", "G3 + G4 + G5"]]
    assert rs.matrix == [[parse_poly(x) for x in row] for row in expected]
    assert rs.rhs == [
        parse_poly("i01 - i02 + G5*u04 - G5*u03 + G4*u04 - G4*u02 - G3*u03"),
        parse_poly("i02 + G5*u03 - G5*u04 + G4*u02 - G4*u04 + G3*u03"),
    ]


def test_path_sums_examples(ex1, ex2):
    rs = build_reduced_system(validate_circuit(ex1))
    edges = {e.element: e for e in rs.contraction.edges}
    a = rs.partition.of_node("1").id
    assert path_sum(rs.partition, rs.expressions, edges["Y3"], a) == Poly.symbol("v01")
    assert path_sum(rs.partition, rs.expressions, edges["Y1"], a) == Poly()

    rs = build_reduced_system(validate_circuit(ex2))
    edges = {e.element: e for e in rs.contraction.edges}
    a = rs.partition.of_node("1").id
    assert path_sum(rs.partition, rs.expressions, edges["Y5"], a) == parse_poly("u04 - u03")


def test_voltage_divider():
    c = parse_netlist("V1 1 0 1\nR1 1 2 1\nR2 2 0 1\n")
    rs = build_reduced_system(validate_circuit(c))
    assert rs.unknowns == ["v2"]
    assert rs.matrix == [[Poly.const(2)]] and rs.rhs == [Poly.const(1)]


def test_trace_example1(ex1):
    t = trace(build_reduced_system(validate_circuit(ex1)))
    assert t["matrix"]["v2,v2"] == ["Y1", "Y3", "Y4"]
    assert t["matrix"]["v2,v3"] == ["Y1"]
    terms = {x["element"]: x["term"] for x in t["rhs"]["v3"]}
    assert terms == {"Y1": "0", "Y2": "G2*v02", "I01": "-i01"}


def test_controlled_needs_full_pipeline():
    c = parse_netlist("Y1 1 0 1\nE1 2 0 1 0 2\nY2 2 1 1\n")
    with pytest.raises(ValueError):
        build_reduced_system(validate_circuit(c))


def _loopy(seed, **kw):
    rng = random.Random(seed)
    c = random_circuit(rng, controlled=False, **kw)
    for _ in range(2):
        c = inject_source_loop(rng, c, consistent=True) or c
    return c


@pytest.mark.parametrize("seed", range(40))
def test_na_when_no_voltage_sources(seed):
    c = symbolize(random_circuit(random.Random(seed), controlled=False, voltage_sources=False))
    rs = build_reduced_system(validate_circuit(c))
    unknowns, y, j = na_stamp(c)
    assert (rs.unknowns, rs.matrix, rs.rhs) == (unknowns, y, j)


@pytest.mark.parametrize("seed", range(40))
def test_path_sum_matches_literal_walk(seed):
    c = _loopy(seed)
    rs = build_reduced_system(validate_circuit(c))
    for e in rs.contraction.edges:
        if e.kind is Kind.ADMITTANCE:
            for side in (e.from_, e.to):
                want = literal_path_sum(c, rs.partition, e.element, side)
                assert path_sum(rs.partition, rs.expressions, e, side) == want


@pytest.mark.parametrize("seed", range(40))
def test_symmetric_and_diagonally_dominant(seed):
    c = symbolize(_loopy(seed), kinds=(Kind.ADMITTANCE,))
    rs = build_reduced_system(validate_circuit(c))
    assert rs.is_symmetric()
    # Weak diagonal dominance holds for every positive binding of the admittances.
    rng = random.Random(seed)
    env = {s: Fraction(rng.randint(1, 9), rng.randint(1, 4)) for s in c.symbols()}
    m = [[x.evaluate(env) for x in row] for row in rs.matrix]
    for i, row in enumerate(m):
        assert row[i] >= sum(abs(x) for k, x in enumerate(row) if k != i)
