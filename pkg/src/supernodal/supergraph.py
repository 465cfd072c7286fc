"""Supernodes: partition, local references, spanning trees and node offsets.

A supernode is a connected component of the subgraph formed by the
voltage-source branches (singletons included).  Each supernode gets one
local reference node; every member's voltage is then the reference voltage
plus an *offset*, the signed sum of source values along the tree path from
the reference.  The supernode holding ground is the datum supernode and its
reference is ground itself.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .errors import InvalidReferenceOverride, KVLViolation
from .netlist import VOLTAGE_KINDS, Element, Kind, ValidatedCircuit, connected_components
from .symbolic import ZERO, AffineForm, Poly


@dataclass(frozen=True)
class TreeEdge:
    element: str
    parent: str
    child: str


@dataclass(frozen=True)
class Supernode:
    id: str
    members: tuple[str, ...]
    vbranches: tuple[Element, ...] = ()
    reference: str | None = None
    tree: tuple[TreeEdge, ...] = ()
    loop_branches: tuple[str, ...] = ()

    @property
    def smallest(self) -> str:
        return self.members[0]


@dataclass(frozen=True)
class SupernodePartition:
    supernodes: tuple[Supernode, ...]  # datum supernode last
    ground: str
    validated: bool = False

    @property
    def super_of(self) -> dict[str, str]:
        return {n: s.id for s in self.supernodes for n in s.members}

    @property
    def members(self) -> dict[str, tuple[str, ...]]:
        return {s.id: s.members for s in self.supernodes}

    @property
    def local_ref(self) -> dict[str, str | None]:
        return {s.id: s.reference for s in self.supernodes}

    @property
    def datum_super(self) -> str:
        return self.supernodes[-1].id

    def get(self, sid: str) -> Supernode:
        for s in self.supernodes:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def of_node(self, node: str) -> Supernode:
        return self.get(self.super_of[node])

    def non_datum(self) -> tuple[Supernode, ...]:
        return self.supernodes[:-1]

    def unknown_of(self, sid: str) -> str | None:
        """Name of the reduced-system unknown for a supernode; None for the datum."""
        if sid == self.datum_super:
            return None
        return unknown_name(self.get(sid).reference)

    @property
    def unknowns(self) -> list[str]:
        return [unknown_name(s.reference) for s in self.non_datum()]


def unknown_name(reference: str) -> str:
    return f"v{reference}"


@dataclass(frozen=True)
class VoltageExpression:
    """``v(node) = v(reference) + offset`` (+ ``coupling`` once controlled sources are untaped)."""

    node: str
    reference: str
    offset: Poly
    unknown: str | None = None  # reduced-system unknown of the reference; None for datum
    coupling: Mapping[str, Poly] = field(default_factory=dict)

    def as_affine(self) -> AffineForm:
        base = AffineForm.unknown(self.unknown)
        return base + AffineForm(self.offset, dict(self.coupling))


def is_voltage_branch(e: Element, include_taped: bool) -> bool:
    if e.kind is Kind.VSOURCE:
        return True
    return include_taped and e.kind in VOLTAGE_KINDS


def find_supernodes(c: ValidatedCircuit, include_taped: bool = False) -> SupernodePartition:
    vbranches = [e for e in c.elements if is_voltage_branch(e, include_taped)]
    comps = connected_components(c.nodes, [e.terminals for e in vbranches])
    ground = c.ground
    datum = next(comp for comp in comps if ground in comp)
    others = sorted((comp for comp in comps if ground not in comp), key=lambda m: m[0])

    def make(sid: str, members: list[str]) -> Supernode:
        ms = set(members)
        own = tuple(e for e in vbranches if e.pos in ms)
        return Supernode(sid, tuple(members), own)

    supernodes = [make(f"S{i}", comp) for i, comp in enumerate(others, start=1)]
    supernodes.append(make("S0", datum))
    return SupernodePartition(tuple(supernodes), ground)


def choose_references(
    p: SupernodePartition, ground: str | None = None, overrides: Mapping[str, str] | None = None
) -> SupernodePartition:
    """Assign local references: ground for the datum, else the smallest member.

    ``overrides`` maps supernode id to the node that should be its reference.
    """
    ground = p.ground if ground is None else ground
    overrides = dict(overrides or {})
    ids = {s.id for s in p.supernodes}
    for sid in overrides:
        if sid not in ids:
            raise InvalidReferenceOverride(f"no supernode {sid!r}")
    out = []
    for s in p.supernodes:
        if ground in s.members:
            ref = ground
            if overrides.get(s.id, ground) != ground:
                raise InvalidReferenceOverride(
                    f"the datum supernode {s.id} must use ground {ground!r} as its reference"
                )
        else:
            ref = overrides.get(s.id, s.smallest)
            if ref not in s.members:
                raise InvalidReferenceOverride(
                    f"node {ref!r} is not a member of supernode {s.id} {{{', '.join(s.members)}}}"
                )
        out.append(replace(s, reference=ref, tree=(), loop_branches=()))
    return replace(p, supernodes=tuple(out), validated=False)


def overrides_from_nodes(p: SupernodePartition, nodes: Iterable[str]) -> dict[str, str]:
    """Turn a list of desired reference nodes into a supernode-keyed override map."""
    super_of = p.super_of
    out: dict[str, str] = {}
    for n in nodes:
        if n not in super_of:
            raise InvalidReferenceOverride(f"reference node {n!r} does not exist")
        sid = super_of[n]
        if sid in out and out[sid] != n:
            raise InvalidReferenceOverride(
                f"nodes {out[sid]!r} and {n!r} are both requested as reference of supernode {sid}"
            )
        out[sid] = n
    return out


def spanning_tree(root: str, vbranches: Sequence[Element]) -> tuple[list[TreeEdge], list[Element]]:
    """BFS tree from ``root``; neighbours are visited in the order of ``vbranches``.

    Returns the tree edges and the branches left out (loop branches).
    """
    incident: dict[str, list[Element]] = {}
    for e in vbranches:
        incident.setdefault(e.pos, []).append(e)
        incident.setdefault(e.neg, []).append(e)
    visited = {root}
    used: set[str] = set()
    tree: list[TreeEdge] = []
    queue = deque([root])
    while queue:
        n = queue.popleft()
        for e in incident.get(n, []):
            other = e.neg if e.pos == n else e.pos
            if other in visited:
                continue
            visited.add(other)
            used.add(e.id)
            tree.append(TreeEdge(e.id, n, other))
            queue.append(other)
    loops = [e for e in vbranches if e.id not in used]
    return tree, loops


def tree_offsets(root: str, tree: Sequence[TreeEdge], vbranches: Sequence[Element]) -> dict[str, Poly]:
    by_id = {e.id: e for e in vbranches}
    offsets = {root: ZERO}
    for t in tree:  # BFS order: parents come first
        e = by_id[t.element]
        value = Poly.of(e.value)
        # Traversing a source from its - to its + terminal raises the potential.
        step = value if e.pos == t.child else -value
        offsets[t.child] = offsets[t.parent] + step
    return offsets


def _tree_path(a: str, b: str, tree: Sequence[TreeEdge]) -> list[str]:
    parent = {t.child: (t.parent, t.element) for t in tree}

    def ancestry(n):
        chain = [n]
        while chain[-1] in parent:
            chain.append(parent[chain[-1]][0])
        return chain

    up_a, up_b = ancestry(a), ancestry(b)
    common = next(n for n in up_a if n in set(up_b))
    path = [parent[n][1] for n in up_a[: up_a.index(common)]]
    path += reversed([parent[n][1] for n in up_b[: up_b.index(common)]])
    return path


def validate_sources(p: SupernodePartition) -> SupernodePartition:
    """Build the spanning trees and check every voltage-source loop for KVL."""
    out = []
    for s in p.supernodes:
        if s.reference is None:
            raise ValueError("choose_references must run before validate_sources")
        tree, loops = spanning_tree(s.reference, s.vbranches)
        offsets = tree_offsets(s.reference, tree, s.vbranches)
        for e in loops:
            residual = offsets[e.pos] - offsets[e.neg] - Poly.of(e.value)
            if residual:
                raise KVLViolation(s.id, _tree_path(e.pos, e.neg, tree) + [e.id], residual)
        out.append(replace(s, tree=tuple(tree), loop_branches=tuple(e.id for e in loops)))
    return replace(p, supernodes=tuple(out), validated=True)


def internal_expressions(p: SupernodePartition) -> list[VoltageExpression]:
    if not p.validated:
        raise ValueError("validate_sources must run before internal_expressions")
    exprs = []
    for s in p.supernodes:
        offsets = tree_offsets(s.reference, s.tree, s.vbranches)
        unknown = p.unknown_of(s.id)
        for n in s.members:
            exprs.append(VoltageExpression(n, s.reference, offsets[n], unknown))
    exprs.sort(key=lambda x: x.node)
    return exprs


def build_partition(
    c: ValidatedCircuit, references: Iterable[str] = (), include_taped: bool = False
) -> SupernodePartition:
    """find_supernodes -> choose_references -> validate_sources."""
    p = find_supernodes(c, include_taped)
    p = choose_references(p, c.ground, overrides_from_nodes(p, references))
    return validate_sources(p)


def vbranch_bridges(s: Supernode) -> set[str]:
    """Tree branches of ``s`` that are not on any voltage-source loop."""
    on_loop: set[str] = set()
    by_id = {e.id: e for e in s.vbranches}
    for lid in s.loop_branches:
        e = by_id[lid]
        on_loop.update(_tree_path(e.pos, e.neg, s.tree))
    return {t.element for t in s.tree} - on_loop


def subtree_nodes(s: Supernode, element: str) -> set[str]:
    """Nodes on the far (child) side of tree branch ``element``."""
    children: dict[str, list[str]] = {}
    start = None
    for t in s.tree:
        children.setdefault(t.parent, []).append(t.child)
        if t.element == element:
            start = t.child
    if start is None:
        raise KeyError(element)
    out, stack = set(), [start]
    while stack:
        n = stack.pop()
        out.add(n)
        stack.extend(children.get(n, []))
    return out


def side_of_branch(s: Supernode, e: Element, node: str) -> set[str]:
    """Member nodes that stay connected to ``node`` when bridge ``e`` is cut."""
    below = subtree_nodes(s, e.id)
    return below if node in below else set(s.members) - below
