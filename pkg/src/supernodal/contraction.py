"""Contraction of a circuit along its supernodes."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .netlist import Kind, ValidatedCircuit
from .supergraph import SupernodePartition, is_voltage_branch


@dataclass(frozen=True)
class ContractionEdge:
    element: str
    kind: Kind  # ADMITTANCE or ISOURCE
    from_: str  # supernode of the element's + terminal
    to: str
    near: str  # original + terminal
    far: str
    value: object

    def terminal_in(self, side: str) -> tuple[str, str]:
        """(terminal inside ``side``, terminal on the other supernode)."""
        if side == self.from_:
            return self.near, self.far
        if side == self.to:
            return self.far, self.near
        raise ValueError(f"edge {self.element} is not incident to {side}")


@dataclass(frozen=True)
class ContractionGraph:
    supernodes: tuple[str, ...]  # datum last
    edges: tuple[ContractionEdge, ...]
    internal: tuple[str, ...]

    def incident(self, sid: str) -> list[ContractionEdge]:
        return [e for e in self.edges if sid in (e.from_, e.to)]


def contract(c: ValidatedCircuit, p: SupernodePartition) -> ContractionGraph:
    """Collapse supernodes; admittance and current-source branches inside one supernode go to ``internal``.

    Controlled current sources must have been taped to plain current sources first.
    """
    super_of = p.super_of
    edges, internal = [], []
    for e in c.elements:
        if is_voltage_branch(e, include_taped=True):
            continue
        if e.kind not in (Kind.ADMITTANCE, Kind.ISOURCE):
            raise ValueError(f"{e.id}: {e.kind.name} must be taped before contraction")
        a, b = super_of[e.pos], super_of[e.neg]
        if a == b:
            internal.append(e.id)
        else:
            edges.append(ContractionEdge(e.id, e.kind, a, b, e.pos, e.neg, e.value))
    return ContractionGraph(tuple(s.id for s in p.supernodes), tuple(edges), tuple(internal))


def deactivate(g: ContractionGraph) -> ContractionGraph:
    return replace(g, edges=tuple(e for e in g.edges if e.kind is Kind.ADMITTANCE))
