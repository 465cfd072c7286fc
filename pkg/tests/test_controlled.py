import random
from dataclasses import replace
from fractions import Fraction

import pytest
from conftest import CIRCUITS, EX1_BINDINGS

from supernodal.assembly import build_reduced_system
from supernodal.controlled import build_system, controlling_value, tape
from supernodal.errors import ControlBranchNotTree, CyclicControlDependency
from supernodal.fuzz import random_circuit
from supernodal.netlist import Kind, bind_values, parse_netlist, validate_circuit
from supernodal.supergraph import build_partition, internal_expressions
from supernodal.symbolic import AffineForm, Poly, parse_poly
from supernodal.verify import differential_check, mna_solve, mna_system, solve_circuit


def _taped_context(c):
    vc, record = tape(validate_circuit(c))
    p = build_partition(vc, c.references)
    exprs = {x.node: x for x in internal_expressions(p)}
    return vc, record, p, exprs


def test_tape_vcvs():
    c = parse_netlist("Y1 1 0 1\nE1 2 0 1 0 mu\nY2 2 1 1\n")
    vc, record = tape(validate_circuit(c))
    e1 = vc.circuit.by_id["E1"]
    assert (e1.kind, e1.value, e1.ctrl_nodes) == (Kind.VSOURCE, "_w_E1", None)
    (entry,) = record.entries
    assert (entry.kind, entry.ctrl_nodes, entry.gain) == (Kind.VCVS, ("1", "0"), "mu")


def test_tape_identity_without_controlled(ex1):
    vc = validate_circuit(ex1)
    taped, record = tape(vc)
    assert taped is vc and not record


def test_tape_cccs():
    c = parse_netlist("Y2 1 0 1\nF1 2 0 Y2 3\nY3 2 1 1\n")
    vc, record = tape(validate_circuit(c))
    assert vc.circuit.by_id["F1"].kind is Kind.ISOURCE
    assert vc.circuit.by_id["F1"].value == "_w_F1"
    assert (record.entries[0].kind, record.entries[0].ctrl_element) == (Kind.CCCS, "Y2")


def test_fresh_symbol_avoids_collisions():
    c = parse_netlist("Y1 1 0 _w_E1\nE1 2 0 1 0 2\nY2 2 1 1\n")
    _, record = tape(validate_circuit(c))
    assert record.symbols == ["__w_E1"]


def _ex1_with(cards):
    return parse_netlist((CIRCUITS / "ex1.ckt").read_text() + cards)


def test_ccvs_through_admittance_example1():
    c = _ex1_with("H1 5 0 Y3 r\nY5 5 0 1\n")
    vc, record, p, exprs = _taped_context(c)
    value = controlling_value(record.entries[0], vc, p, exprs)
    assert value == AffineForm(-parse_poly("G3*v01"), {"v2": Poly.symbol("G3")})


def test_cccs_through_source_example1(ex1):
    # Current through V01 from its + terminal (node 2) to its - terminal (node 1).
    c = _ex1_with("F1 5 0 V01 1\nY5 5 0 1\n")
    vc, record, p, exprs = _taped_context(c)
    value = controlling_value(record.entries[0], vc, p, exprs)
    # KCL at node 2: the current entering V01 at its + end is whatever Y1 and Y4 do not take.
    assert value == AffineForm(Poly(), {"v2": -parse_poly("G1 + G4"), "v3": Poly.symbol("G1")})

    # Brute force: the oracle's current unknown for V01 on bound values.
    bound = bind_values(ex1, EX1_BINDINGS)
    oracle = mna_solve(mna_system(bound))
    env = dict(EX1_BINDINGS)
    unknowns = {"v2": oracle.node_voltages["2"], "v3": oracle.node_voltages["3"]}
    assert value.evaluate(env, unknowns) == oracle.branch_currents["V01"]


def test_control_on_voltage_loop_is_rejected():
    c = parse_netlist("V1 1 0 1\nV2 1 0 1\nY1 1 2 1\nY2 2 0 1\nH1 3 0 V1 2\nY3 3 0 1\n")
    with pytest.raises(ControlBranchNotTree):
        build_system(validate_circuit(c))


def test_vccs_gives_na_stamp():
    # gm from node pair (3, 0) into nodes 1 -> 2; NA stamp: +gm at (1, 3), -gm at (2, 3).
    c = parse_netlist("Y1 1 0 1\nY2 2 0 1\nY3 3 0 1\nY4 1 2 1\nI1 0 3 1\nG1 1 2 3 0 5/2\n")
    rs = build_system(validate_circuit(c))
    plain = build_reduced_system(validate_circuit(replace(c, elements=c.elements[:-1])))
    gm = Fraction(5, 2)
    expected = [row[:] for row in plain.matrix]
    expected[0][2] += gm
    expected[1][2] -= gm
    assert rs.matrix == expected
    assert rs.rhs == plain.rhs


def test_symbolic_gain_vccs_stays_linear():
    c = parse_netlist("Y1 1 0 1\nY2 2 0 1\nG1 2 0 1 0 gm\nI1 0 1 1\nY3 1 2 1\n")
    rs = build_system(validate_circuit(c))
    assert rs.matrix[1][0] == Poly.symbol("gm") - 1


def test_no_taped_symbols_remain():
    for seed in range(80):
        c = random_circuit(random.Random(seed))
        try:
            rs = build_system(validate_circuit(c))
        except Exception:
            continue
        _, record = tape(validate_circuit(c))
        syms = set(record.symbols)
        assert not any(x.symbols() & syms for row in rs.matrix for x in row)
        assert not any(x.symbols() & syms for x in rs.rhs)
        assert not any(x.offset.symbols() & syms for x in rs.expressions)


def test_zero_gain_equals_removed_source():
    # A zero-gain VCCS contributes nothing; a zero-gain VCVS is a short to its - node.
    base = "Y1 1 0 1\nY2 2 0 1\nY3 1 2 1/2\nI1 0 1 3\n"
    with_g = parse_netlist(base + "G1 1 2 2 0 0\n")
    without = parse_netlist(base)
    assert solve_circuit(with_g).node_voltages == solve_circuit(without).node_voltages
    with_e = parse_netlist(base + "E1 3 0 1 0 0\nY4 3 1 1\n")
    shorted = parse_netlist(base + "V9 3 0 0\nY4 3 1 1\n")
    assert solve_circuit(with_e).node_voltages == solve_circuit(shorted).node_voltages


def test_vcvs_unity_buffer():
    c = parse_netlist("V1 1 0 3/7\nY1 1 0 1\nE1 2 0 1 0 1\nY2 2 0 5\n")
    s = solve_circuit(c)
    assert s.node_voltages["2"] == s.node_voltages["1"] == Fraction(3, 7)


def test_acyclic_chain_matches_oracle():
    for seed in range(5):
        rng = random.Random(seed)
        g = [Fraction(rng.randint(1, 9), rng.randint(1, 4)) for _ in range(4)]
        mu = Fraction(rng.randint(-5, 5) or 1, rng.randint(1, 3))
        c = parse_netlist(
            f"V1 1 0 {rng.randint(1, 9)}\nY1 1 2 {g[0]}\nY2 2 0 {g[1]}\n"
            f"E1 3 0 2 0 {mu}\nY3 3 4 {g[2]}\nY4 4 0 {g[3]}\nH1 5 0 Y4 2\nY5 5 0 1\n"
        )
        v = differential_check(c)
        assert v and v.sna is not None, v.reason


def test_unity_gain_feedback_is_resolved():
    # E1 forces v6 - v4 = v6 - v5, i.e. v4 = v5: the taped value itself stays free
    # of the control law and must be eliminated through KCL.
    c = parse_netlist("V1 5 0 2\nY1 5 4 1\nY2 4 0 1\nE1 6 4 6 5 1\nY3 6 0 1\n")
    v = differential_check(c)
    assert v and v.sna is not None, v.reason


def test_symbolic_cycle_is_reported():
    c = parse_netlist("Y1 1 0 1\nY2 2 0 1\nE1 1 0 2 0 a\nE2 2 0 1 0 b\nI1 0 1 1\n")
    with pytest.raises(CyclicControlDependency):
        build_system(validate_circuit(c))
