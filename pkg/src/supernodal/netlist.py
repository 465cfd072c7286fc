"""Netlist parsing, validation and symbol binding.

Line-based format; ``#`` or ``*`` starts a comment line::

    Y<id> n+ n- <value>          admittance (conductance)
    R<id> n+ n- <value>          resistor, stored as the admittance 1/value
    V<id> n+ n- <value>          v(n+) - v(n-) = value
    I<id> n+ n- <value>          current drawn out of n+, injected into n-
    E<id> n+ n- cp cn <gain>     VCVS
    G<id> n+ n- cp cn <gain>     VCCS, current gain*(v(cp)-v(cn)) from n+ to n-
    H<id> n+ n- <elem> <gain>    CCVS on the current through <elem>
    F<id> n+ n- <elem> <gain>    CCCS on the current through <elem>
    N<id> n+ n-                  nullator (rejected by validation)
    O<id> n+ n-                  norator (rejected by validation)
    .ground <node>
    .ref <node>                  make <node> the local reference of its supernode
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Mapping, Union

from .errors import (
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

Value = Union[Fraction, str]


class Kind(Enum):
    ADMITTANCE = "Y"
    VSOURCE = "V"
    ISOURCE = "I"
    VCVS = "E"
    VCCS = "G"
    CCVS = "H"
    CCCS = "F"
    NULLATOR = "N"
    NORATOR = "O"


VOLTAGE_KINDS = frozenset({Kind.VSOURCE, Kind.VCVS, Kind.CCVS})
CONTROLLED_KINDS = frozenset({Kind.VCVS, Kind.VCCS, Kind.CCVS, Kind.CCCS})
NULLOR_KINDS = frozenset({Kind.NULLATOR, Kind.NORATOR})
# Branches whose current may control a CCVS/CCCS.
CONTROL_BRANCH_KINDS = frozenset({Kind.ADMITTANCE, Kind.VSOURCE, Kind.ISOURCE, Kind.VCVS, Kind.CCVS})

_CARD_KIND = {k.value: k for k in Kind}
_CARD_KIND["R"] = Kind.ADMITTANCE

_TOKEN_RE = re.compile(r"^\S+$")
_SYMBOL_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_NUMBER_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?(/\d+)?$")


@dataclass(frozen=True)
class Element:
    id: str
    kind: Kind
    pos: str
    neg: str
    value: Value | None = None
    ctrl_nodes: tuple[str, str] | None = None
    ctrl_element: str | None = None
    resistor: bool = False  # came from an R card; value holds the conductance

    @property
    def terminals(self) -> tuple[str, str]:
        return (self.pos, self.neg)

    def nodes(self) -> tuple[str, ...]:
        if self.ctrl_nodes:
            return (self.pos, self.neg) + self.ctrl_nodes
        return (self.pos, self.neg)


@dataclass(frozen=True)
class Circuit:
    elements: tuple[Element, ...]
    ground: str = "0"
    references: tuple[str, ...] = ()

    @property
    def nodes(self) -> list[str]:
        seen: dict[str, None] = {}
        for e in self.elements:
            for n in e.nodes():
                seen.setdefault(n, None)
        return sorted(seen)

    def element(self, eid: str) -> Element:
        for e in self.elements:
            if e.id == eid:
                return e
        raise KeyError(eid)

    @property
    def by_id(self) -> dict[str, Element]:
        return {e.id: e for e in self.elements}

    def symbols(self) -> set[str]:
        return {e.value for e in self.elements if isinstance(e.value, str)}

    def has_controlled(self) -> bool:
        return any(e.kind in CONTROLLED_KINDS for e in self.elements)


@dataclass(frozen=True)
class ValidatedCircuit:
    """A circuit that passed :func:`validate_circuit`."""

    circuit: Circuit

    @property
    def elements(self) -> tuple[Element, ...]:
        return self.circuit.elements

    @property
    def ground(self) -> str:
        return self.circuit.ground

    @property
    def nodes(self) -> list[str]:
        return self.circuit.nodes


def parse_value(token: str, line: int) -> Value:
    if _NUMBER_RE.match(token):
        try:
            return Fraction(token)
        except (ValueError, ZeroDivisionError):
            raise NetlistSyntaxError(line, f"bad rational literal {token!r}") from None
    if _SYMBOL_RE.match(token):
        return token
    raise NetlistSyntaxError(line, f"value {token!r} is neither a rational nor a symbol")


def _resistor_value(value: Value, line: int) -> Value:
    if isinstance(value, str):
        return f"1/{value}"
    if value == 0:
        raise NetlistSyntaxError(line, "resistor value must be nonzero")
    return 1 / value


def parse_netlist(text: str) -> Circuit:
    elements: list[Element] = []
    seen: dict[str, int] = {}
    ground = "0"
    refs: list[str] = []
    pending_controls: list[tuple[Element, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#*":
            continue
        tokens = line.split()
        head = tokens[0]
        if head.startswith("."):
            directive = head.lower()
            if directive == ".end":
                break
            if directive in (".ground", ".ref"):
                if len(tokens) != 2:
                    raise NetlistSyntaxError(lineno, f"{directive} takes exactly one node")
                if directive == ".ground":
                    ground = tokens[1]
                else:
                    refs.append(tokens[1])
                continue
            raise NetlistSyntaxError(lineno, f"unknown directive {head!r}")

        card = head[0].upper()
        if card not in _CARD_KIND:
            raise NetlistSyntaxError(lineno, f"unknown element card {head[0]!r}")
        kind = _CARD_KIND[card]
        if head in seen:
            raise DuplicateElementId(head, lineno)

        if kind in NULLOR_KINDS:
            arity = 3
        elif kind in (Kind.VCVS, Kind.VCCS):
            arity = 6
        else:
            arity = 5 if kind in (Kind.CCVS, Kind.CCCS) else 4
        if len(tokens) != arity:
            raise NetlistSyntaxError(
                lineno, f"{head}: expected {arity - 1} fields after the id, got {len(tokens) - 1}"
            )

        pos, neg = tokens[1], tokens[2]
        if kind in NULLOR_KINDS:
            el = Element(head, kind, pos, neg)
        elif kind in (Kind.VCVS, Kind.VCCS):
            el = Element(head, kind, pos, neg, parse_value(tokens[5], lineno),
                         ctrl_nodes=(tokens[3], tokens[4]))
        elif kind in (Kind.CCVS, Kind.CCCS):
            el = Element(head, kind, pos, neg, parse_value(tokens[4], lineno),
                         ctrl_element=tokens[3])
            pending_controls.append((el, lineno))
        else:
            value = parse_value(tokens[3], lineno)
            if card == "R":
                el = Element(head, kind, pos, neg, _resistor_value(value, lineno), resistor=True)
            else:
                el = Element(head, kind, pos, neg, value)
        seen[head] = lineno
        elements.append(el)

    kinds = {e.id: e.kind for e in elements}
    for el, _ in pending_controls:
        ctrl = el.ctrl_element
        if ctrl not in kinds:
            raise UnknownControlElement(el.id, ctrl)
        if kinds[ctrl] not in CONTROL_BRANCH_KINDS:
            raise UnknownControlElement(
                el.id, ctrl, f"a {kinds[ctrl].name} branch cannot serve as a controlling branch"
            )

    circuit = Circuit(tuple(elements), ground, tuple(refs))
    terminals = {n for e in elements for n in e.terminals}
    if ground not in terminals:
        raise MissingGroundNode(ground)
    return circuit


def _format_value(value: Value) -> str:
    if isinstance(value, str):
        return value
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def serialize_netlist(c: Circuit) -> str:
    """Emit text that :func:`parse_netlist` reads back to the same element list."""
    lines = []
    if c.ground != "0":
        lines.append(f".ground {c.ground}")
    for r in c.references:
        lines.append(f".ref {r}")
    for e in c.elements:
        if e.kind in NULLOR_KINDS:
            lines.append(f"{e.id} {e.pos} {e.neg}")
        elif e.ctrl_nodes:
            lines.append(f"{e.id} {e.pos} {e.neg} {e.ctrl_nodes[0]} {e.ctrl_nodes[1]} {_format_value(e.value)}")
        elif e.ctrl_element:
            lines.append(f"{e.id} {e.pos} {e.neg} {e.ctrl_element} {_format_value(e.value)}")
        else:
            value = e.value
            if e.resistor:
                value = value[2:] if isinstance(value, str) else 1 / value
            lines.append(f"{e.id} {e.pos} {e.neg} {_format_value(value)}")
    return "\n".join(lines) + "\n"


def connected_components(nodes, edges) -> list[list[str]]:
    adj: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen: set[str] = set()
    comps = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp, queue = [], deque([start])
        seen.add(start)
        while queue:
            n = queue.popleft()
            comp.append(n)
            for m in adj[n]:
                if m not in seen:
                    seen.add(m)
                    queue.append(m)
        comps.append(sorted(comp))
    return comps


def validate_circuit(c: Circuit) -> ValidatedCircuit:
    nullors = [e.id for e in c.elements if e.kind in NULLOR_KINDS]
    if nullors:
        raise UnsupportedNullor(nullors)
    for e in c.elements:
        if e.kind in VOLTAGE_KINDS and e.pos == e.neg:
            raise ShortedSource(e.id)
    if c.ground not in {n for e in c.elements for n in e.terminals}:
        raise MissingGroundNode(c.ground)
    comps = connected_components(c.nodes, [e.terminals for e in c.elements])
    if len(comps) > 1:
        raise DisconnectedCircuit(comps)
    return ValidatedCircuit(c)


def admittance_symbols(c: Circuit) -> set[str]:
    return {e.value for e in c.elements if e.kind is Kind.ADMITTANCE and isinstance(e.value, str)}


def _lookup(symbol: str, bindings: Mapping[str, Fraction], admittance: bool) -> Fraction:
    if symbol in bindings:
        value = Fraction(bindings[symbol])
    elif symbol.startswith("1/") and symbol[2:] in bindings:
        r = Fraction(bindings[symbol[2:]])
        if r <= 0:
            raise NonpositiveAdmittance(symbol[2:], r)
        value = 1 / r
    else:
        raise UnboundSymbol(symbol)
    if admittance and value <= 0:
        raise NonpositiveAdmittance(symbol, value)
    return value


def bind_values(c: Circuit, bindings: Mapping[str, Fraction]) -> Circuit:
    """Replace every symbolic value by its bound rational."""
    out = []
    for e in c.elements:
        if isinstance(e.value, str):
            e = replace(e, value=_lookup(e.value, bindings, e.kind is Kind.ADMITTANCE))
        out.append(e)
    return replace(c, elements=tuple(out))


def is_numeric(c: Circuit) -> bool:
    return not c.symbols()


def load_netlist(path) -> Circuit:
    with open(path) as fh:
        return parse_netlist(fh.read())
