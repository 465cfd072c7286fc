"""Exact solving, back-substitution and the independent MNA oracle.

The oracle in :func:`mna_system` stamps the full modified-nodal system
directly from the element list and shares no code with the supernode
pipeline beyond the netlist model and the rational linear solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from . import linalg
from .assembly import ReducedSystem
from .controlled import build_system
from .errors import AnalysisError, SingularSystem
from .netlist import Circuit, Kind, VOLTAGE_KINDS, validate_circuit
from .supergraph import side_of_branch, vbranch_bridges


@dataclass
class Solution:
    node_voltages: dict[str, Fraction]
    branch_currents: dict[str, Fraction] = field(default_factory=dict)


def _bindings(rs: ReducedSystem, bindings: Mapping | None) -> dict[str, Fraction]:
    return {k: Fraction(v) for k, v in (bindings or {}).items()}


def solve_reduced(rs: ReducedSystem, bindings: Mapping | None = None) -> dict[str, Fraction]:
    b = _bindings(rs, bindings)
    a = [[entry.evaluate(b) for entry in row] for row in rs.matrix]
    rhs = [entry.evaluate(b) for entry in rs.rhs]
    if not a:
        return {}
    x = linalg.solve(a, rhs)
    return dict(zip(rs.unknowns, x))


def back_substitute(rs: ReducedSystem, ref_solution: Mapping[str, Fraction], bindings: Mapping | None = None) -> Solution:
    """Node voltages from the expressions; voltage-branch currents by KCL over tree cuts.

    Currents through branches on a voltage-source loop are not unique and are left out.
    """
    b = _bindings(rs, bindings)
    volts = {x.node: x.as_affine().evaluate(b, ref_solution) for x in rs.expressions}
    full = dict(b)
    for sym, form in rs.taped.items():
        full[sym] = form.evaluate(b, ref_solution)

    c = rs.circuit
    values = {e.id: _eval_value(e.value, full) for e in c.elements}
    currents: dict[str, Fraction] = {}
    for s in rs.partition.supernodes:
        bridges = vbranch_bridges(s)
        for e in s.vbranches:
            if e.id not in bridges:
                continue
            side = side_of_branch(s, e, e.pos)
            leaving = Fraction(0)
            crossing = [o for o in c.elements if o.id != e.id and (o.pos in side) != (o.neg in side)]
            if any(values[o.id] is None for o in crossing):
                continue  # depends on a taped value the circuit leaves open
            for o in crossing:
                sign = 1 if o.pos in side else -1
                if o.kind is Kind.ADMITTANCE:
                    leaving += sign * values[o.id] * (volts[o.pos] - volts[o.neg])
                else:  # current source; bridges never share a cut with other voltage branches
                    leaving += sign * values[o.id]
            currents[e.id] = -leaving
    return Solution(volts, currents)


def _eval_value(value, bindings) -> Fraction | None:
    if isinstance(value, str):
        return Fraction(bindings[value]) if value in bindings else None
    return Fraction(value)


def solve_circuit(c: Circuit, bindings: Mapping | None = None, references: Iterable[str] | None = None) -> Solution:
    rs = build_system(validate_circuit(c), references)
    return back_substitute(rs, solve_reduced(rs, bindings), bindings)


# ---------------------------------------------------------------------------
# Independent MNA oracle


@dataclass
class MnaSystem:
    unknowns: list[str]  # "v(node)" for non-ground nodes, then "i(element)"
    matrix: list[list[Fraction]]
    rhs: list[Fraction]
    nodes: list[str]
    branches: list[str]
    ground: str


def mna_system(c: Circuit) -> MnaSystem:
    for e in c.elements:
        if isinstance(e.value, str):
            raise ValueError(f"{e.id}: the MNA oracle needs numeric values (symbol {e.value!r})")
        if e.kind in (Kind.NULLATOR, Kind.NORATOR):
            raise ValueError(f"{e.id}: nullors are not stamped")
    nodes = [n for n in c.nodes if n != c.ground]
    branches = [e.id for e in c.elements if e.kind in VOLTAGE_KINDS]
    col = {n: i for i, n in enumerate(nodes)}
    for k, eid in enumerate(branches):
        col[("i", eid)] = len(nodes) + k
    size = len(col)
    a = [[Fraction(0)] * size for _ in range(size)]
    z = [Fraction(0)] * size
    by_id = c.by_id

    def vdiff(p, n):
        # linear form of v(p) - v(n) as {column: coefficient}
        out = {}
        if p != c.ground:
            out[col[p]] = out.get(col[p], 0) + 1
        if n != c.ground:
            out[col[n]] = out.get(col[n], 0) - 1
        return out

    def current_of(eid):
        """Linear form and constant for the current through ``eid`` from + to -."""
        e = by_id[eid]
        if e.kind is Kind.ADMITTANCE:
            return {k: v * e.value for k, v in vdiff(e.pos, e.neg).items()}, Fraction(0)
        if e.kind is Kind.ISOURCE:
            return {}, Fraction(e.value)
        return {col[("i", eid)]: Fraction(1)}, Fraction(0)

    def kcl(node, form, const, sign):
        # adds sign * (current leaving ``node``) to that node's KCL row
        if node == c.ground:
            return
        r = col[node]
        for k, v in form.items():
            a[r][k] += sign * v
        z[r] -= sign * const

    for e in c.elements:
        if e.kind is Kind.ADMITTANCE:
            form = {k: v * e.value for k, v in vdiff(e.pos, e.neg).items()}
            kcl(e.pos, form, 0, 1)
            kcl(e.neg, form, 0, -1)
        elif e.kind is Kind.ISOURCE:
            kcl(e.pos, {}, e.value, 1)
            kcl(e.neg, {}, e.value, -1)
        elif e.kind is Kind.VCCS:
            form = {k: v * e.value for k, v in vdiff(*e.ctrl_nodes).items()}
            kcl(e.pos, form, 0, 1)
            kcl(e.neg, form, 0, -1)
        elif e.kind is Kind.CCCS:
            f, k0 = current_of(e.ctrl_element)
            form = {k: v * e.value for k, v in f.items()}
            kcl(e.pos, form, k0 * e.value, 1)
            kcl(e.neg, form, k0 * e.value, -1)
        else:  # voltage branches: current unknown plus a constraint row
            r = col[("i", e.id)]
            kcl(e.pos, {r: Fraction(1)}, 0, 1)
            kcl(e.neg, {r: Fraction(1)}, 0, -1)
            for k, v in vdiff(e.pos, e.neg).items():
                a[r][k] += v
            if e.kind is Kind.VSOURCE:
                z[r] += e.value
            elif e.kind is Kind.VCVS:
                for k, v in vdiff(*e.ctrl_nodes).items():
                    a[r][k] -= e.value * v
            else:  # CCVS
                f, k0 = current_of(e.ctrl_element)
                for k, v in f.items():
                    a[r][k] -= e.value * v
                z[r] += e.value * k0

    names = [f"v({n})" for n in nodes] + [f"i({b})" for b in branches]
    return MnaSystem(names, a, z, nodes, branches, c.ground)


def mna_solve(ms: MnaSystem) -> Solution:
    """Solve the oracle system; node voltages must be unique, branch currents may not be."""
    if not ms.matrix:
        return Solution({ms.ground: Fraction(0)})
    x = linalg.solve_partial(ms.matrix, ms.rhs)
    n = len(ms.nodes)
    undetermined = [ms.nodes[i] for i in range(n) if x[i] is None]
    if undetermined:
        raise SingularSystem(
            linalg.rank(ms.matrix), len(ms.matrix), f"node voltages {', '.join(undetermined)} not determined"
        )
    volts = {ms.ground: Fraction(0)}
    volts.update({node: x[i] for i, node in enumerate(ms.nodes)})
    currents = {b: x[n + k] for k, b in enumerate(ms.branches) if x[n + k] is not None}
    return Solution(volts, currents)


# ---------------------------------------------------------------------------
# Checks


@dataclass
class Verdict:
    passed: bool
    reason: str
    sna: Solution | None = None
    mna: Solution | None = None
    sna_error: AnalysisError | None = None
    mna_error: AnalysisError | None = None
    first_difference: str | None = None

    def __bool__(self) -> bool:
        return self.passed


def differential_check(c: Circuit, references: Iterable[str] | None = None) -> Verdict:
    """Run the supernodal pipeline and the MNA oracle; node voltages must agree exactly."""
    vc = validate_circuit(c)
    sna = mna = None
    sna_err = mna_err = None
    try:
        rs = build_system(vc, references)
        sna = back_substitute(rs, solve_reduced(rs))
    except AnalysisError as exc:
        sna_err = exc
    try:
        mna = mna_solve(mna_system(c))
    except SingularSystem as exc:
        mna_err = exc

    if sna_err and mna_err:
        return Verdict(True, f"both reject: {sna_err}; {mna_err}", sna_error=sna_err, mna_error=mna_err)
    if sna_err or mna_err:
        side = "supernodal" if sna_err else "MNA"
        return Verdict(False, f"only the {side} side failed: {sna_err or mna_err}", sna, mna, sna_err, mna_err)
    for node in sorted(mna.node_voltages):
        if sna.node_voltages.get(node) != mna.node_voltages[node]:
            return Verdict(
                False,
                f"v({node}): supernodal {sna.node_voltages.get(node)} != MNA {mna.node_voltages[node]}",
                sna, mna, first_difference=node,
            )
    return Verdict(True, "node voltages agree", sna, mna)


@dataclass
class ResidualReport:
    kcl: dict[str, Fraction]  # keyed by node, or by "{a,b,...}" for nodes joined by loop branches
    laws: dict[str, Fraction]  # element id -> constitutive residual

    @property
    def ok(self) -> bool:
        return not self.failures()

    def failures(self) -> dict[str, Fraction]:
        out = {f"KCL {k}": v for k, v in self.kcl.items() if v}
        out.update({f"law {k}": v for k, v in self.laws.items() if v})
        return out


def check_solution(c: Circuit, s: Solution) -> ResidualReport:
    """KCL at every node and every element law, in exact arithmetic.

    Voltage branches whose current the solution leaves out are handled by
    checking KCL on the node set they join instead of on single nodes.
    """
    v = s.node_voltages
    by_id = c.by_id
    known: dict[str, Fraction] = {}
    laws: dict[str, Fraction] = {}

    def current(eid):
        e = by_id[eid]
        if e.kind is Kind.ADMITTANCE:
            return e.value * (v[e.pos] - v[e.neg])
        if e.kind is Kind.ISOURCE:
            return Fraction(e.value)
        if e.kind is Kind.VCCS:
            return e.value * (v[e.ctrl_nodes[0]] - v[e.ctrl_nodes[1]])
        if e.kind is Kind.CCCS:
            inner = current(e.ctrl_element)
            return None if inner is None else e.value * inner
        return s.branch_currents.get(eid)

    for e in c.elements:
        i = current(e.id)
        if i is not None:
            known[e.id] = i
        if e.kind is Kind.VSOURCE:
            laws[e.id] = v[e.pos] - v[e.neg] - e.value
        elif e.kind is Kind.VCVS:
            laws[e.id] = v[e.pos] - v[e.neg] - e.value * (v[e.ctrl_nodes[0]] - v[e.ctrl_nodes[1]])
        elif e.kind is Kind.CCVS:
            ic = current(e.ctrl_element)
            if ic is not None:
                laws[e.id] = v[e.pos] - v[e.neg] - e.value * ic

    # group nodes joined by branches of unknown current
    parent = {n: n for n in c.nodes}

    def find(n):
        while parent[n] != n:
            parent[n] = parent[parent[n]]
            n = parent[n]
        return n

    for e in c.elements:
        if e.id not in known:
            parent[find(e.pos)] = find(e.neg)
    groups: dict[str, list[str]] = {}
    for n in c.nodes:
        groups.setdefault(find(n), []).append(n)

    kcl: dict[str, Fraction] = {}
    for members in groups.values():
        ms = set(members)
        if c.ground in ms:
            continue
        total = Fraction(0)
        for e in c.elements:
            if e.id in known and (e.pos in ms) != (e.neg in ms):
                total += known[e.id] if e.pos in ms else -known[e.id]
        key = members[0] if len(members) == 1 else "{" + ",".join(sorted(members)) + "}"
        kcl[key] = total
    return ResidualReport(kcl, laws)
