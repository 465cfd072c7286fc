"""Exact multivariate polynomials over the rationals.

A :class:`Poly` maps monomials (sorted tuples of symbol tokens, repeats
allowed) to nonzero :class:`~fractions.Fraction` coefficients.  Every matrix
entry, voltage offset and right-hand side in the engine is a ``Poly``.

The canonical text form is ``term ( (+|-) term )*`` where a term is
``[coef*]symbol(*symbol)*``; a coefficient of +-1 is omitted and the zero
polynomial renders as ``0``.  :func:`parse_poly` reads that form back.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import UnboundSymbol

Monomial = tuple[str, ...]
Number = Union[int, Fraction]

_RATIONAL_RE = re.compile(r"^\d+(/\d+)?$")


class Poly:
    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None):
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for mono, coef in terms.items():
                coef = Fraction(coef)
                if coef:
                    key = tuple(sorted(mono))
                    clean[key] = clean.get(key, Fraction(0)) + coef
                    if not clean[key]:
                        del clean[key]
        self._terms = clean
        self._hash = None

    # construction helpers

    @classmethod
    def const(cls, value: Number) -> "Poly":
        return cls({(): value})

    @classmethod
    def symbol(cls, name: str) -> "Poly":
        return cls({(name,): 1})

    @classmethod
    def of(cls, value: "Poly | Number | str") -> "Poly":
        """Coerce a rational, a symbol token or a Poly to a Poly."""
        if isinstance(value, Poly):
            return value
        if isinstance(value, str):
            return cls.symbol(value)
        return cls.const(value)

    # inspection

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items())

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(mono == () for mono in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        return self._terms.get((), Fraction(0))

    def symbols(self) -> set[str]:
        return {s for mono in self._terms for s in mono}

    def degree_in(self, name: str) -> int:
        return max((mono.count(name) for mono in self._terms), default=0)

    def coefficient(self, name: str) -> "Poly":
        """Coefficient of ``name`` in a polynomial at most linear in it."""
        out: dict[Monomial, Fraction] = {}
        for mono, coef in self._terms.items():
            k = mono.count(name)
            if k > 1:
                raise ValueError(f"{self} is not linear in {name}")
            if k == 1:
                rest = list(mono)
                rest.remove(name)
                out[tuple(rest)] = coef
        return Poly(out)

    def without(self, names: Iterable[str]) -> "Poly":
        """Drop every term that mentions one of ``names``."""
        names = set(names)
        return Poly({m: c for m, c in self._terms.items() if not names.intersection(m)})

    # arithmetic

    def __add__(self, other) -> "Poly":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for mono, coef in other._terms.items():
            out[mono] = out.get(mono, Fraction(0)) + coef
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Poly":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return _coerce(other) - self

    def __mul__(self, other) -> "Poly":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = tuple(sorted(m1 + m2))
                out[mono] = out.get(mono, Fraction(0)) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def scale(self, factor: Number) -> "Poly":
        factor = Fraction(factor)
        return Poly({m: c * factor for m, c in self._terms.items()})

    def subs(self, name: str, value: "Poly | Number | str") -> "Poly":
        value = Poly.of(value)
        out = Poly()
        for mono, coef in self._terms.items():
            k = mono.count(name)
            rest = Poly({tuple(s for s in mono if s != name): coef})
            for _ in range(k):
                rest = rest * value
            out = out + rest
        return out

    def evaluate(self, bindings: Mapping[str, Number]) -> Fraction:
        total = Fraction(0)
        for mono, coef in self._terms.items():
            term = coef
            for s in mono:
                if s not in bindings:
                    raise UnboundSymbol(s)
                term *= Fraction(bindings[s])
            total += term
        return total

    # comparison

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Poly({str(self)!r})"

    def __str__(self) -> str:
        return render(self)


def _coerce(value):
    if isinstance(value, Poly):
        return value
    if isinstance(value, (int, Fraction)):
        return Poly.const(value)
    return NotImplemented


ZERO = Poly()
ONE = Poly.const(1)


def _format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _render_term(mono: Monomial, coef: Fraction) -> str:
    mag = abs(coef)
    if not mono:
        return _format_rational(mag)
    body = "*".join(mono)
    return body if mag == 1 else f"{_format_rational(mag)}*{body}"


def render(p: Poly) -> str:
    items = p.items()
    if not items:
        return "0"
    parts = []
    for i, (mono, coef) in enumerate(items):
        text = _render_term(mono, coef)
        if i == 0:
            parts.append(f"-{text}" if coef < 0 else text)
        else:
            parts.append(f" - {text}" if coef < 0 else f" + {text}")
    return "".join(parts)


def parse_poly(text: str) -> Poly:
    """Parse the canonical rendering (and any sum of products in that grammar)."""
    text = text.strip()
    if not text:
        raise ValueError("empty polynomial text")
    if text == "0":
        return Poly()
    tokens = re.split(r"\s+([+-])\s+", text)
    first = tokens[0]
    sign = 1
    if first.startswith("-"):
        sign, first = -1, first[1:]
    result = _parse_term(first).scale(sign)
    for op, term in zip(tokens[1::2], tokens[2::2]):
        t = _parse_term(term)
        result = result + t if op == "+" else result - t
    return result


def _parse_term(term: str) -> Poly:
    coef = Fraction(1)
    symbols: list[str] = []
    for factor in term.split("*"):
        factor = factor.strip()
        if not factor:
            raise ValueError(f"malformed term {term!r}")
        if _RATIONAL_RE.match(factor):
            coef *= Fraction(factor)
        else:
            symbols.append(factor)
    return Poly({tuple(symbols): coef})


@dataclass(frozen=True)
class AffineForm:
    """``constant + sum(coefficients[u] * u)`` over reference-voltage unknowns ``u``."""

    constant: Poly = ZERO
    coefficients: Mapping[str, Poly] = field(default_factory=dict)

    @classmethod
    def unknown(cls, name: str | None) -> "AffineForm":
        # ``None`` stands for the grounded datum reference: the constant 0.
        if name is None:
            return cls()
        return cls(ZERO, {name: ONE})

    def __add__(self, other: "AffineForm") -> "AffineForm":
        coeffs = dict(self.coefficients)
        for k, v in other.coefficients.items():
            coeffs[k] = coeffs.get(k, ZERO) + v
        return AffineForm(self.constant + other.constant, _prune(coeffs))

    def __neg__(self) -> "AffineForm":
        return AffineForm(-self.constant, {k: -v for k, v in self.coefficients.items()})

    def __sub__(self, other: "AffineForm") -> "AffineForm":
        return self + (-other)

    def times(self, factor: "Poly | Number | str") -> "AffineForm":
        factor = Poly.of(factor)
        return AffineForm(
            self.constant * factor,
            _prune({k: v * factor for k, v in self.coefficients.items()}),
        )

    def shift(self, offset: Poly) -> "AffineForm":
        return AffineForm(self.constant + offset, dict(self.coefficients))

    def symbols(self) -> set[str]:
        out = set(self.constant.symbols())
        for v in self.coefficients.values():
            out |= v.symbols()
        return out

    def evaluate(self, bindings: Mapping[str, Number], unknowns: Mapping[str, Number]) -> Fraction:
        total = self.constant.evaluate(bindings)
        for k, v in self.coefficients.items():
            total += v.evaluate(bindings) * Fraction(unknowns[k])
        return total

    def as_poly(self) -> Poly:
        """Fold unknowns in as plain symbols, for display only."""
        out = self.constant
        for k, v in self.coefficients.items():
            out = out + v * Poly.symbol(k)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, AffineForm):
            return NotImplemented
        return self.constant == other.constant and _prune(dict(self.coefficients)) == _prune(
            dict(other.coefficients)
        )

    def __hash__(self) -> int:
        return hash((self.constant, frozenset(_prune(dict(self.coefficients)).items())))


def _prune(coeffs: dict[str, Poly]) -> dict[str, Poly]:
    return {k: v for k, v in coeffs.items() if v}
