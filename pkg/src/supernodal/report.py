"""Analysis reports: a JSON-ready dict plus text and LaTeX views of it."""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Mapping

from .assembly import ReducedSystem, trace
from .symbolic import AffineForm, Poly, parse_poly


def format_rational(q: Fraction) -> str:
    return str(Fraction(q))


def build_report(rs: ReducedSystem, solution=None, with_trace: bool = False) -> dict:
    p = rs.partition
    exprs = {x.node: x for x in rs.expressions}
    supernodes = []
    for s in p.supernodes:
        supernodes.append({
            "id": s.id,
            "members": list(s.members),
            "reference": s.reference,
            "tree": [{"element": t.element, "parent": t.parent, "child": t.child} for t in s.tree],
        })
    # after untaping an offset may also involve the unknowns; they are shown as plain symbols
    expressions = [
        {"node": x.node, "reference": x.reference, "offset": str(AffineForm(x.offset, x.coupling).as_poly())}
        for x in rs.expressions
    ]
    contraction = [
        {"element": e.element, "kind": e.kind.value, "from": e.from_, "to": e.to}
        for e in rs.contraction.edges
    ]
    internal = []
    by_id = rs.circuit.by_id
    for eid in rs.contraction.internal:
        e = by_id[eid]
        bv = exprs[e.pos].as_affine() - exprs[e.neg].as_affine()
        internal.append({"element": eid, "branch_voltage": str(bv.as_poly())})
    system = {
        "unknowns": list(rs.unknowns),
        "matrix": [[str(x) for x in row] for row in rs.matrix],
        "rhs": [str(x) for x in rs.rhs],
    }
    if rs.row_labels and any(not lbl.startswith("KCL") for lbl in rs.row_labels):
        system["rows"] = list(rs.row_labels)
    report = {
        "supernodes": supernodes,
        "expressions": expressions,
        "contraction_edges": contraction,
        "internal_elements": internal,
        "system": system,
    }
    if solution is not None:
        report["solution"] = {n: format_rational(v) for n, v in sorted(solution.node_voltages.items())}
        if solution.branch_currents:
            report["branch_currents"] = {
                k: format_rational(v) for k, v in sorted(solution.branch_currents.items())
            }
    if with_trace:
        report["provenance"] = trace(rs)
    return report


def to_json(report: Mapping) -> str:
    return json.dumps(report, indent=2) + "\n"


def voltage_text(entry: Mapping, datum_members) -> str:
    """``v2 - v01`` style: the reference voltage first, then its offset."""
    offset = entry["offset"]
    if entry["node"] in datum_members:
        return offset
    base = f"v{entry['reference']}"
    if offset == "0":
        return base
    return f"{base} - {offset[1:]}" if offset.startswith("-") else f"{base} + {offset}"


def to_text(report: Mapping) -> str:
    lines = ["Supernodes:"]
    ground_id = report["supernodes"][-1]["id"]
    for s in report["supernodes"]:
        tag = " (datum)" if s["id"] == ground_id else ""
        lines.append(f"  {s['id']}{tag}: {{{', '.join(s['members'])}}}  reference {s['reference']}")
        for t in s["tree"]:
            lines.append(f"    {t['element']}: {t['parent']} -> {t['child']}")
    datum_members = set(report["supernodes"][-1]["members"])
    lines.append("Node voltages:")
    for x in report["expressions"]:
        lines.append(f"  v{x['node']} = {voltage_text(x, datum_members)}")
    if report["internal_elements"]:
        lines.append("Branch voltages inside supernodes:")
        for x in report["internal_elements"]:
            lines.append(f"  {x['element']}: {x['branch_voltage']}")
    sys_ = report["system"]
    lines.append(f"Reduced system in ({', '.join(sys_['unknowns'])}):")
    rows = sys_.get("rows")
    for i, (row, rhs) in enumerate(zip(sys_["matrix"], sys_["rhs"])):
        cells = " | ".join(row)
        label = f"  [{rows[i]}]" if rows else ""
        lines.append(f"  [ {cells} ] = {rhs}{label}")
    if "solution" in report:
        lines.append("Solution:")
        for n, v in report["solution"].items():
            lines.append(f"  v{n} = {v}")
        for k, v in report.get("branch_currents", {}).items():
            lines.append(f"  i({k}) = {v}")
    if "provenance" in report:
        lines.append("Provenance:")
        for key, elems in report["provenance"]["matrix"].items():
            lines.append(f"  Y[{key}] <- {', '.join(elems)}")
        for u, terms in report["provenance"]["rhs"].items():
            for t in terms:
                extra = f" path sum {t['path_sum']}" if "path_sum" in t else ""
                lines.append(f"  J[{u}] += {t['term']}  ({t['element']}{extra})")
    return "\n".join(lines) + "\n"


_SUB_RE = re.compile(r"^([A-Za-z]+)_?(\w+)$")


def _latex_symbol(sym: str) -> str:
    if sym.startswith("1/"):
        return r"\frac{1}{" + _latex_symbol(sym[2:]) + "}"
    if sym.startswith("_"):
        return r"\mathit{" + sym.replace("_", r"\_") + "}"
    m = _SUB_RE.match(sym)
    if m and len(m.group(1)) <= 2:
        return f"{m.group(1)}_{{{m.group(2)}}}"
    return r"\mathrm{" + sym.replace("_", r"\_") + "}"


def latex_poly(text: str) -> str:
    p = parse_poly(text)
    if not p:
        return "0"
    out = []
    for i, (mono, coef) in enumerate(p.items()):
        mag = abs(coef)
        sign = "-" if coef < 0 else "+"
        num = "" if (mag == 1 and mono) else (
            str(mag.numerator) if mag.denominator == 1 else rf"\tfrac{{{mag.numerator}}}{{{mag.denominator}}}"
        )
        body = r" \cdot ".join(_latex_symbol(s) for s in mono)
        term = num + (r" \cdot " if num and body else "") + body
        if i == 0:
            out.append(("-" if sign == "-" else "") + term)
        else:
            out.append(f" {sign} {term}")
    return "".join(out)


def to_latex(report: Mapping) -> str:
    sys_ = report["system"]
    datum_members = set(report["supernodes"][-1]["members"])
    lines = [r"\begin{align*}"]
    for x in report["expressions"]:
        offset = parse_poly(x["offset"])
        base = Poly() if x["node"] in datum_members else Poly.symbol(f"v{x['reference']}")
        lines.append(f"  v_{{{x['node']}}} &= {latex_poly(str(base + offset))} \\\\")
    lines.append(r"\end{align*}")
    rows = [" & ".join(latex_poly(c) for c in row) for row in sys_["matrix"]]
    unknowns = [_latex_symbol(u) for u in sys_["unknowns"]]
    rhs = [latex_poly(r) for r in sys_["rhs"]]
    lines.append(r"\[")
    lines.append(r"\begin{pmatrix}" + r" \\ ".join(rows) + r"\end{pmatrix}")
    lines.append(r"\cdot \begin{pmatrix}" + r" \\ ".join(unknowns) + r"\end{pmatrix}")
    lines.append(r"= \begin{pmatrix}" + r" \\ ".join(rhs) + r"\end{pmatrix}")
    lines.append(r"\]")
    return "\n".join(lines) + "\n"
