"""Random connected circuits for differential campaigns.

Connectivity is guaranteed by first growing a spanning tree out of
admittances and voltage-type branches (so no cutset consists of current
sources alone), then sprinkling extra elements.  Independent voltage
sources take values from hidden node potentials, which makes every loop
they close KVL-consistent.  Controlled voltage sources are only ever placed
as bridges between voltage-source components, and current-controlled
sources only sense branches that lie on no voltage-source loop.
"""

from __future__ import annotations

import random
from dataclasses import replace
from fractions import Fraction

from .netlist import VOLTAGE_KINDS, Circuit, Element, Kind

_KIND_WEIGHTS = {
    Kind.ADMITTANCE: 6,
    Kind.ISOURCE: 2,
    Kind.VSOURCE: 3,
    Kind.VCVS: 1,
    Kind.VCCS: 1,
    Kind.CCVS: 1,
    Kind.CCCS: 1,
}
_TREE_WEIGHTS = {Kind.ADMITTANCE: 6, Kind.VSOURCE: 3, Kind.VCVS: 1, Kind.CCVS: 1}


class _DSU:
    def __init__(self):
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: str, b: str) -> None:
        self.parent[self.find(a)] = self.find(b)

    def same(self, a: str, b: str) -> bool:
        return self.find(a) == self.find(b)


def _rational(rng: random.Random, lo: int = -5, hi: int = 5, nonzero: bool = False) -> Fraction:
    while True:
        q = Fraction(rng.randint(lo, hi), rng.randint(1, 4))
        if q or not nonzero:
            return q


def _conductance(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(1, 6), rng.randint(1, 3))


def _gain(rng: random.Random) -> Fraction:
    return _rational(rng, -4, 4, nonzero=True)


def _pick(rng: random.Random, weights: dict) -> Kind:
    kinds = list(weights)
    return rng.choices(kinds, [weights[k] for k in kinds])[0]


def random_circuit(
    rng: random.Random,
    max_nodes: int = 8,
    max_elements: int = 12,
    controlled: bool = True,
    voltage_sources: bool = True,
    min_nodes: int = 2,
) -> Circuit:
    n = rng.randint(min_nodes, max(min_nodes, max_nodes))
    nodes = [str(i) for i in range(n)]
    phi = {x: _rational(rng) for x in nodes}
    phi["0"] = Fraction(0)
    anyv, indep = _DSU(), _DSU()
    elements: list[Element] = []
    counter: dict[str, int] = {}

    def new_id(kind: Kind) -> str:
        counter[kind.value] = counter.get(kind.value, 0) + 1
        return f"{kind.value}{counter[kind.value]}"

    tree_w = dict(_TREE_WEIGHTS)
    extra_w = dict(_KIND_WEIGHTS)
    if not controlled:
        for k in (Kind.VCVS, Kind.CCVS, Kind.VCCS, Kind.CCCS):
            tree_w.pop(k, None)
            extra_w.pop(k, None)
    if not voltage_sources:
        for k in (Kind.VSOURCE, Kind.VCVS, Kind.CCVS):
            tree_w.pop(k, None)
            extra_w.pop(k, None)

    def make(kind: Kind, a: str, b: str) -> Element | None:
        if kind is Kind.VSOURCE:
            if anyv.same(a, b) and not indep.same(a, b):
                return None
            anyv.union(a, b)
            indep.union(a, b)
            return Element(new_id(kind), kind, a, b, phi[a] - phi[b])
        if kind in (Kind.VCVS, Kind.CCVS):
            if anyv.same(a, b):
                return None
            anyv.union(a, b)
        eid = new_id(kind)
        if kind is Kind.ADMITTANCE:
            return Element(eid, kind, a, b, _conductance(rng))
        if kind is Kind.ISOURCE:
            return Element(eid, kind, a, b, _rational(rng, nonzero=True))
        if kind in (Kind.VCVS, Kind.VCCS):
            cp, cn = rng.sample(nodes, 2)
            return Element(eid, kind, a, b, _gain(rng), ctrl_nodes=(cp, cn))
        return Element(eid, kind, a, b, _gain(rng), ctrl_element="?")

    for i in range(1, n):
        a, b = nodes[i], rng.choice(nodes[:i])
        if rng.random() < 0.5:
            a, b = b, a
        el = None
        while el is None:
            el = make(_pick(rng, tree_w), a, b)
        elements.append(el)

    total = rng.randint(len(elements), max(len(elements), max_elements))
    attempts = 0
    while len(elements) < total and attempts < 10 * max_elements:
        attempts += 1
        a, b = rng.sample(nodes, 2)
        el = make(_pick(rng, extra_w), a, b)
        if el is not None:
            elements.append(el)

    return _assign_controls(rng, Circuit(tuple(elements)))


def _on_voltage_loop(c: Circuit, e: Element) -> bool:
    others = [o for o in c.elements if o.kind in VOLTAGE_KINDS and o.id != e.id]
    dsu = _DSU()
    for o in others:
        dsu.union(o.pos, o.neg)
    return dsu.same(e.pos, e.neg)


def _assign_controls(rng: random.Random, c: Circuit) -> Circuit:
    sensors = [
        e.id for e in c.elements
        if e.kind in (Kind.ADMITTANCE, Kind.ISOURCE)
        or (e.kind in VOLTAGE_KINDS and not _on_voltage_loop(c, e))
    ]
    out = []
    for e in c.elements:
        if e.ctrl_element == "?":
            e = replace(e, ctrl_element=rng.choice(sensors))
        out.append(e)
    return replace(c, elements=tuple(out))


def source_offsets(c: Circuit) -> dict[str, tuple[str, Fraction]]:
    """(component root, potential relative to it) over independent voltage sources only."""
    adj: dict[str, list[tuple[str, Fraction]]] = {}
    for e in c.elements:
        if e.kind is Kind.VSOURCE:
            adj.setdefault(e.pos, []).append((e.neg, -e.value))
            adj.setdefault(e.neg, []).append((e.pos, e.value))
    out: dict[str, tuple[str, Fraction]] = {}
    for root in sorted(adj):
        if root in out:
            continue
        out[root] = (root, Fraction(0))
        stack = [root]
        while stack:
            x = stack.pop()
            for y, step in adj[x]:
                if y not in out:
                    out[y] = (root, out[x][1] + step)
                    stack.append(y)
    return out


def inject_source_loop(rng: random.Random, c: Circuit, consistent: bool) -> Circuit | None:
    """Add a voltage source closing a loop of independent sources.

    The new value matches the loop (``consistent``) or misses it by a nonzero
    amount.  Returns None when no suitable pair of nodes exists.
    """
    sensed = {e.ctrl_element for e in c.elements if e.ctrl_element}
    blocked = set()
    for e in c.elements:
        if e.id in sensed and e.kind is Kind.VSOURCE:
            blocked.add(e.id)
    offsets = source_offsets(c)
    comps: dict[str, list[str]] = {}
    for node, (root, _) in offsets.items():
        comps.setdefault(root, []).append(node)
    # components touched by a sensed branch must stay loop-free
    bad_roots = {offsets[c.by_id[b].pos][0] for b in blocked}
    pairs = [
        (a, b)
        for root, members in comps.items() if root not in bad_roots
        for a in members for b in members if a < b
    ]
    if not pairs:
        return None
    a, b = rng.choice(sorted(pairs))
    if rng.random() < 0.5:
        a, b = b, a
    value = offsets[a][1] - offsets[b][1]
    if not consistent:
        value += _rational(rng, nonzero=True)
    eid = "V" + str(1 + sum(1 for e in c.elements if e.id.startswith("V"))) + "x"
    return replace(c, elements=c.elements + (Element(eid, Kind.VSOURCE, a, b, value),))
