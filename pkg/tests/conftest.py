import random
from dataclasses import replace
from pathlib import Path

import pytest

from supernodal.netlist import Kind, load_netlist

ROOT = Path(__file__).resolve().parents[1]
CIRCUITS = ROOT / "circuits"

EX1_BINDINGS = {"G1": 1, "G2": 1, "G3": 1, "G4": 1, "v01": 1, "v02": 2, "i01": 0}


@pytest.fixture
def ex1():
    return load_netlist(CIRCUITS / "ex1.ckt")


@pytest.fixture
def ex2():
    return load_netlist(CIRCUITS / "ex2.ckt")


def symbolize(c, kinds=(Kind.ADMITTANCE, Kind.ISOURCE, Kind.VSOURCE)):
    """Give every element of the listed kinds its own symbolic value, named after its id."""
    prefix = {Kind.ADMITTANCE: "g", Kind.ISOURCE: "j", Kind.VSOURCE: "u"}
    out = []
    for e in c.elements:
        if e.kind in kinds:
            e = replace(e, value=f"{prefix[e.kind]}{e.id}")
        out.append(e)
    return replace(c, elements=tuple(out))


def random_bindings(c, rng: random.Random):
    from fractions import Fraction

    out = {}
    for e in c.elements:
        if isinstance(e.value, str):
            lo = 1 if e.kind is Kind.ADMITTANCE else -5
            v = 0
            while v == 0:
                v = Fraction(rng.randint(lo, 7), rng.randint(1, 5))
            out[e.value] = v
    return out


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
