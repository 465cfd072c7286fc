"""Controlled sources: taping, controlling values and untaping.

Taping swaps every controlled source for an independent one whose value is a
fresh symbol ``w``.  The ordinary pipeline then runs unchanged.  Untaping
expresses each ``w`` through the reference-node unknowns (``w = gain *
control``), eliminates it and folds the result back: terms in the unknowns
move from the right-hand side into the matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .assembly import ReducedSystem, assemble
from .contraction import ContractionGraph
from .errors import (
    ControlBranchNotTree,
    CyclicControlDependency,
    SingularControlSystem,
    SingularSystem,
    UnknownControlElement,
)
from .netlist import CONTROLLED_KINDS, Element, Kind, ValidatedCircuit, Value
from .supergraph import SupernodePartition, VoltageExpression, build_partition, side_of_branch, vbranch_bridges
from .symbolic import ZERO, AffineForm, Poly


@dataclass(frozen=True)
class TapeEntry:
    symbol: str
    element: str
    kind: Kind
    gain: Value
    ctrl_nodes: tuple[str, str] | None = None
    ctrl_element: str | None = None


@dataclass(frozen=True)
class TapeRecord:
    entries: tuple[TapeEntry, ...] = ()

    @property
    def symbols(self) -> list[str]:
        return [t.symbol for t in self.entries]

    def __bool__(self) -> bool:
        return bool(self.entries)


def _fresh(base: str, taken: set[str]) -> str:
    name = base
    while name in taken:
        name = "_" + name
    taken.add(name)
    return name


def tape(vc: ValidatedCircuit) -> tuple[ValidatedCircuit, TapeRecord]:
    taken = set(vc.circuit.symbols())
    elements, entries = [], []
    for e in vc.elements:
        if e.kind not in CONTROLLED_KINDS:
            elements.append(e)
            continue
        sym = _fresh(f"_w_{e.id}", taken)
        entries.append(TapeEntry(sym, e.id, e.kind, e.value, e.ctrl_nodes, e.ctrl_element))
        kind = Kind.VSOURCE if e.kind in (Kind.VCVS, Kind.CCVS) else Kind.ISOURCE
        elements.append(replace(e, kind=kind, value=sym, ctrl_nodes=None, ctrl_element=None))
    if not entries:
        return vc, TapeRecord()
    return ValidatedCircuit(replace(vc.circuit, elements=tuple(elements))), TapeRecord(tuple(entries))


def _node_voltage(exprs: Mapping[str, VoltageExpression], node: str) -> AffineForm:
    return exprs[node].as_affine()


def branch_current(
    element: Element, c: ValidatedCircuit, p: SupernodePartition, exprs: Mapping[str, VoltageExpression]
) -> AffineForm:
    """Current through ``element`` from its + to its - terminal, over the reduced unknowns."""
    v = lambda n: _node_voltage(exprs, n)  # noqa: E731
    if element.kind is Kind.ADMITTANCE:
        return (v(element.pos) - v(element.neg)).times(element.value)
    if element.kind is Kind.ISOURCE:
        return AffineForm(Poly.of(element.value))
    if element.kind is not Kind.VSOURCE:
        raise ValueError(f"{element.id}: current of a {element.kind.name} branch is not a control quantity")

    s = p.of_node(element.pos)
    if element.id not in vbranch_bridges(s):
        raise ControlBranchNotTree("", element.id)
    side = side_of_branch(s, element, element.pos)
    # KCL on ``side``: the branch current leaves it through ``element``; nothing else
    # crosses the cut inside the supernode, so it equals minus everything else leaving.
    leaving = AffineForm()
    for e in c.elements:
        if e.id == element.id:
            continue
        a, b = e.pos in side, e.neg in side
        if a == b:
            continue
        if e.kind is Kind.ADMITTANCE:
            inner, outer = (e.pos, e.neg) if a else (e.neg, e.pos)
            leaving = leaving + (v(inner) - v(outer)).times(e.value)
        elif e.kind is Kind.ISOURCE:
            out = AffineForm(Poly.of(e.value))
            leaving = leaving + (out if a else -out)
        else:
            raise ControlBranchNotTree("", element.id)
    return -leaving


def controlling_value(
    entry: TapeEntry,
    c: ValidatedCircuit,
    p: SupernodePartition,
    exprs,
    g: ContractionGraph | None = None,
) -> AffineForm:
    """The controlling voltage or current of a taped source, affine in the reduced unknowns."""
    if not isinstance(exprs, Mapping):
        exprs = {x.node: x for x in exprs}
    if entry.ctrl_nodes is not None:
        cp, cn = entry.ctrl_nodes
        return _node_voltage(exprs, cp) - _node_voltage(exprs, cn)
    by_id = c.circuit.by_id
    if entry.ctrl_element not in by_id:
        raise UnknownControlElement(entry.element, entry.ctrl_element)
    try:
        return branch_current(by_id[entry.ctrl_element], c, p, exprs)
    except ControlBranchNotTree:
        raise ControlBranchNotTree(entry.element, entry.ctrl_element) from None


@dataclass
class _Row:
    """Linear row over reduced unknowns and taped symbols.

    Equation rows read ``sum(coeffs[x] * x) = const``; value rows (node
    offsets) read ``value = const + sum(coeffs[x] * x)``.
    """

    label: str
    coeffs: dict[str, Poly]
    const: Poly
    value: bool = False

    def get(self, x: str) -> Poly:
        return self.coeffs.get(x, ZERO)

    def mentions(self, names) -> list[str]:
        return [x for x in names if self.coeffs.get(x)]

    def eliminate(self, x: str, pivot: "_Row") -> None:
        a = self.coeffs.get(x)
        if not a:
            return
        for k, v in pivot.coeffs.items():
            self.coeffs[k] = self.get(k) - a * v
        self.coeffs = {k: v for k, v in self.coeffs.items() if v}
        self.const = self.const + a * pivot.const if self.value else self.const - a * pivot.const


def _split(poly: Poly, symbols: list[str]) -> tuple[Poly, dict[str, Poly]]:
    """poly = rest + sum(coeff[w] * w), with ``poly`` at most linear in the taped symbols."""
    coeffs = {}
    for w in symbols:
        k = poly.coefficient(w)
        if k:
            if k.symbols() & set(symbols):
                raise ValueError(f"{poly} is not linear in the taped symbols")
            coeffs[w] = k
    return poly.without(symbols), coeffs


def _law_row(entry: TapeEntry, control: AffineForm, syms: list[str]) -> _Row:
    # w - gain * control = 0
    law = control.times(entry.gain)
    if any(v.symbols() & set(syms) for v in law.coefficients.values()):
        raise ValueError(f"{entry.element}: taped symbol inside an unknown's coefficient")
    rest, dep = _split(law.constant, syms)
    coeffs = {k: -v for k, v in law.coefficients.items()}
    for w, k in dep.items():
        coeffs[w] = -k
    coeffs[entry.symbol] = coeffs.get(entry.symbol, ZERO) + 1
    return _Row(f"law {entry.element}", {k: v for k, v in coeffs.items() if v}, rest)


def _pivot(rows: list[_Row], x: str, pivot: _Row) -> None:
    scale = 1 / pivot.get(x).constant_value()
    pivot.coeffs = {k: v.scale(scale) for k, v in pivot.coeffs.items()}
    pivot.const = pivot.const.scale(scale)
    for r in rows:
        if r is not pivot:
            r.eliminate(x, pivot)


def untape(rs: ReducedSystem, record: TapeRecord, controls: Mapping[str, AffineForm]) -> ReducedSystem:
    """Eliminate the taped symbols from the reduced system and the node offsets.

    Each control law ``w = gain * control`` is used to eliminate a taped
    symbol with a constant coefficient; this is plain substitution when the
    control dependencies are acyclic.  A symbol the laws cannot pin down (a
    unity-gain feedback loop, say) is eliminated through a KCL row instead,
    and the law it leaves behind becomes a constraint row of the system.
    """
    if not record:
        return rs
    syms = record.symbols
    kcl = []
    for label, row, entry in zip(rs.unknowns, rs.matrix, rs.rhs):
        rest, dep = _split(entry, syms)
        coeffs = {u: v for u, v in zip(rs.unknowns, row) if v}
        coeffs.update({w: -k for w, k in dep.items()})
        kcl.append(_Row(f"KCL {label}", coeffs, rest))
    laws = {t.symbol: _law_row(t, controls[t.symbol], syms) for t in record.entries}
    values = []
    for x in rs.expressions:
        rest, dep = _split(x.offset, syms)
        values.append(_Row(x.node, dict(dep), rest, value=True))
    rows = kcl + list(laws.values()) + values

    pivots: dict[str, _Row] = {}
    progress = True
    while progress:
        progress = False
        for own, row in laws.items():
            if any(row is p for p in pivots.values()):
                continue
            for x in [own] + [w for w in syms if w != own]:
                if x not in pivots and row.get(x) and row.get(x).is_constant():
                    _pivot(rows, x, row)
                    pivots[x] = row
                    progress = True
                    break

    spare_laws = [r for r in laws.values() if not any(r is p for p in pivots.values())]
    stuck = sorted({w for r in spare_laws for w in r.mentions(syms)}, key=syms.index)
    if stuck:
        raise CyclicControlDependency(stuck)

    consumed: list[int] = []
    for w in syms:
        if w in pivots:
            continue
        choice = next((i for i, r in enumerate(kcl) if i not in consumed and r.get(w) and r.get(w).is_constant()), None)
        if choice is None:
            if any(r.get(w) for i, r in enumerate(kcl) if i not in consumed):
                raise CyclicControlDependency([w])
            if any(r.get(w) for r in values):
                raise SingularSystem(0, len(rs.unknowns), f"taped value {w} is not determined")
            continue
        _pivot(rows, w, kcl[choice])
        pivots[w] = kcl[choice]
        consumed.append(choice)

    constraints = []
    for r in spare_laws:
        if not r.coeffs:
            if r.const:
                raise SingularSystem(0, len(rs.unknowns), f"inconsistent {r.label}")
            continue
        constraints.append(r)
    if len(constraints) < len(consumed):
        raise SingularSystem(len(rs.unknowns) - len(consumed) + len(constraints), len(rs.unknowns),
                             "control laws leave the system underdetermined")
    if len(constraints) > len(consumed):
        raise SingularControlSystem([w for w in syms if w not in pivots] or syms)

    final, spare = [], iter(constraints)
    for i, r in enumerate(kcl):
        final.append(next(spare) if i in consumed else r)
    matrix = [[r.get(u) for u in rs.unknowns] for r in final]
    rhs = [r.const for r in final]
    labels = [r.label for r in final]

    resolved = {}
    for w, r in pivots.items():
        if not r.mentions([s for s in syms if s != w]):
            resolved[w] = AffineForm(r.const, {u: -r.get(u) for u in rs.unknowns if r.get(u)})
    exprs = [
        replace(x, offset=v.const, coupling={u: c for u, c in v.coeffs.items()})
        for x, v in zip(rs.expressions, values)
    ]
    return replace(rs, matrix=matrix, rhs=rhs, expressions=exprs, taped=resolved, controlled=True,
                   row_labels=labels, interim=rs)


def build_system(vc: ValidatedCircuit, references: Iterable[str] | None = None) -> ReducedSystem:
    """The whole pipeline: tape, partition, contract, fill in, untape."""
    refs = vc.circuit.references if references is None else references
    taped, record = tape(vc)
    p = build_partition(taped, refs)
    rs = assemble(taped, p)
    if not record:
        return rs
    exprs = {x.node: x for x in rs.expressions}
    controls = {t.symbol: controlling_value(t, taped, p, exprs, rs.contraction) for t in record.entries}
    return untape(rs, record, controls)
