"""Reduced system assembly by inspection.

Matrix: the node-admittance matrix of the contraction (diagonal = admittances
with exactly one end on the supernode, off-diagonal = minus the admittances
joining two supernodes).  Right-hand side: currents injected into the
supernode minus currents drawn out of it, plus ``G * path_sum`` for every
admittance edge, where the path sum is the offset difference between the
admittance's far and near terminals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .contraction import ContractionEdge, ContractionGraph, contract
from .netlist import Circuit, Kind, ValidatedCircuit
from .supergraph import SupernodePartition, VoltageExpression, build_partition, internal_expressions
from .symbolic import ZERO, AffineForm, Poly

Matrix = list[list[Poly]]


@dataclass
class ReducedSystem:
    unknowns: list[str]
    matrix: Matrix
    rhs: list[Poly]
    expressions: list[VoltageExpression]
    partition: SupernodePartition
    contraction: ContractionGraph
    circuit: Circuit  # the circuit that was assembled (taped, if controlled sources were present)
    taped: Mapping[str, AffineForm] = field(default_factory=dict)  # resolved taped values
    controlled: bool = False
    row_labels: list[str] | None = None  # "KCL <unknown>" or "law <element>" per row, after untaping
    interim: "ReducedSystem | None" = None  # the taped system before untaping

    @property
    def size(self) -> int:
        return len(self.unknowns)

    def expression_of(self, node: str) -> VoltageExpression:
        for x in self.expressions:
            if x.node == node:
                return x
        raise KeyError(node)

    def is_symmetric(self) -> bool:
        n = self.size
        return all(self.matrix[i][j] == self.matrix[j][i] for i in range(n) for j in range(i + 1, n))


def _index(g: ContractionGraph) -> dict[str, int]:
    return {sid: i for i, sid in enumerate(g.supernodes[:-1])}


def assemble_matrix(g: ContractionGraph) -> Matrix:
    idx = _index(g)
    n = len(idx)
    m = [[ZERO] * n for _ in range(n)]
    for e in g.edges:
        if e.kind is not Kind.ADMITTANCE:
            continue
        y = Poly.of(e.value)
        a, b = idx.get(e.from_), idx.get(e.to)
        if a is not None:
            m[a][a] = m[a][a] + y
        if b is not None:
            m[b][b] = m[b][b] + y
        if a is not None and b is not None:
            m[a][b] = m[a][b] - y
            m[b][a] = m[b][a] - y
    return m


def _offsets(exprs) -> dict[str, Poly]:
    if isinstance(exprs, Mapping):
        return {k: (v.offset if isinstance(v, VoltageExpression) else v) for k, v in exprs.items()}
    return {x.node: x.offset for x in exprs}


def path_sum(p: SupernodePartition, exprs, edge: ContractionEdge, side: str) -> Poly:
    """Signed source sum along the path far reference -> admittance -> reference of ``side``."""
    offsets = _offsets(exprs)
    near, far = edge.terminal_in(side)
    return offsets[far] - offsets[near]


def assemble_rhs(c, g: ContractionGraph, p: SupernodePartition, exprs) -> list[Poly]:
    offsets = _offsets(exprs)
    idx = _index(g)
    rhs = [ZERO] * len(idx)
    for sid, i in idx.items():
        total = ZERO
        for e in g.incident(sid):
            value = Poly.of(e.value)
            if e.kind is Kind.ISOURCE:
                # The netlist current flows out of + and into -, so it enters the supernode of -.
                total = total + value if e.to == sid else total - value
            else:
                near, far = e.terminal_in(sid)
                total = total + value * (offsets[far] - offsets[near])
        rhs[i] = total
    return rhs


def assemble(vc: ValidatedCircuit, p: SupernodePartition) -> ReducedSystem:
    exprs = internal_expressions(p)
    g = contract(vc, p)
    return ReducedSystem(
        unknowns=p.unknowns,
        matrix=assemble_matrix(g),
        rhs=assemble_rhs(vc, g, p, exprs),
        expressions=exprs,
        partition=p,
        contraction=g,
        circuit=vc.circuit,
    )


def build_reduced_system(vc: ValidatedCircuit, references: Iterable[str] | None = None) -> ReducedSystem:
    """Partition, contract and fill in the reduced system of an independent-source circuit.

    ``references`` defaults to the circuit's ``.ref`` directives.
    """
    if vc.circuit.has_controlled():
        raise ValueError("circuit has controlled sources; use supernodal.controlled.build_system")
    refs = vc.circuit.references if references is None else references
    p = build_partition(vc, refs)
    return assemble(vc, p)


def trace(rs: ReducedSystem) -> dict:
    """Which contraction edges produced each matrix entry and right-hand-side term.

    For circuits with controlled sources this describes the taped interim system.
    """
    rs = rs.interim or rs
    g = rs.contraction
    idx = _index(g)
    offsets = _offsets(rs.expressions)
    names = {sid: rs.unknowns[i] for sid, i in idx.items()}
    matrix: dict[str, list[str]] = {}
    rhs: dict[str, list[dict]] = {names[s]: [] for s in idx}
    for e in g.edges:
        if e.kind is Kind.ADMITTANCE:
            a, b = names.get(e.from_), names.get(e.to)
            for u in (a, b):
                if u is not None:
                    matrix.setdefault(f"{u},{u}", []).append(e.element)
            if a is not None and b is not None:
                matrix.setdefault(f"{a},{b}", []).append(e.element)
                matrix.setdefault(f"{b},{a}", []).append(e.element)
        for sid in (e.from_, e.to):
            if sid not in names:
                continue
            if e.kind is Kind.ISOURCE:
                sign = "+" if e.to == sid else "-"
                rhs[names[sid]].append({"element": e.element, "rule": "current", "sign": sign,
                                        "term": str(Poly.of(e.value) if sign == "+" else -Poly.of(e.value))})
            else:
                near, far = e.terminal_in(sid)
                ps = offsets[far] - offsets[near]
                rhs[names[sid]].append({"element": e.element, "rule": "path_sum", "path_sum": str(ps),
                                        "term": str(Poly.of(e.value) * ps)})
    return {"matrix": dict(sorted(matrix.items())), "rhs": rhs}
