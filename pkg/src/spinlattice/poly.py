"""Sparse multivariate polynomials with exact coefficients."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, Sequence, Tuple

from .exact import WittElem

Exponent = Tuple[int, ...]


class MultiPoly:
    """Immutable polynomial: an ordered variable tuple and {exponent: coefficient}.

    Coefficients may be ``int``/``Fraction`` or :class:`WittElem`; zero
    coefficients are never stored.
    """

    __slots__ = ("vars", "terms")

    def __init__(self, variables: Sequence[str], terms: Dict[Exponent, object] | None = None):
        self.vars = tuple(variables)
        clean = {}
        n = len(self.vars)
        for e, c in (terms or {}).items():
            if len(e) != n:
                raise ValueError(f"exponent {e} does not match variables {self.vars}")
            if c != 0:
                clean[tuple(e)] = c
        self.terms = clean

    # -- constructors ---------------------------------------------------------

    @classmethod
    def const(cls, variables, c):
        return cls(variables, {(0,) * len(tuple(variables)): c})

    @classmethod
    def var(cls, variables, name, coeff=1):
        variables = tuple(variables)
        e = [0] * len(variables)
        e[variables.index(name)] = 1
        return cls(variables, {tuple(e): coeff})

    @classmethod
    def gens(cls, variables, coeff=1):
        return [cls.var(variables, v, coeff) for v in variables]

    # -- basic protocol -------------------------------------------------------

    def _lift(self, other):
        if isinstance(other, MultiPoly):
            if other.vars != self.vars:
                raise ValueError(f"variable mismatch: {self.vars} vs {other.vars}")
            return other
        return MultiPoly.const(self.vars, other)

    def __eq__(self, other):
        try:
            o = self._lift(other)
        except (ValueError, TypeError):
            return NotImplemented
        d = self - o
        return not d.terms

    def __hash__(self):
        return hash((self.vars, frozenset((e, repr(c)) for e, c in self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        o = self._lift(other)
        out = dict(self.terms)
        for e, c in o.terms.items():
            out[e] = out[e] + c if e in out else c
        return MultiPoly(self.vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return MultiPoly(self.vars, {e: c * other for e, c in self.terms.items()})
        o = self._lift(other)
        out: Dict[Exponent, object] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = c1 * c2
                out[e] = out[e] + v if e in out else v
        return MultiPoly(self.vars, out)

    def __rmul__(self, other):
        return MultiPoly(self.vars, {e: other * c for e, c in self.terms.items()})

    def __pow__(self, n: int):
        result = MultiPoly.const(self.vars, self._one())
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def _one(self):
        for c in self.terms.values():
            if isinstance(c, WittElem):
                return c.ring.one
        return 1

    # -- structure ------------------------------------------------------------

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def lowest_degree(self):
        return min((sum(e) for e in self.terms), default=None)

    def homogeneous_part(self, d: int) -> "MultiPoly":
        return MultiPoly(self.vars, {e: c for e, c in self.terms.items() if sum(e) == d})

    def truncate(self, d: int) -> "MultiPoly":
        """Drop all terms of total degree > d."""
        return MultiPoly(self.vars, {e: c for e, c in self.terms.items() if sum(e) <= d})

    def constant_term(self):
        return self.terms.get((0,) * len(self.vars), 0)

    def variables_used(self):
        return tuple(v for i, v in enumerate(self.vars) if any(e[i] for e in self.terms))

    def degree_in(self, name: str) -> int:
        i = self.vars.index(name)
        return max((e[i] for e in self.terms), default=-1)

    def coefficient_in(self, name: str, power: int) -> "MultiPoly":
        """Coefficient of name**power, as a polynomial in the same variables."""
        i = self.vars.index(name)
        out = {}
        for e, c in self.terms.items():
            if e[i] == power:
                e2 = list(e)
                e2[i] = 0
                out[tuple(e2)] = c
        return MultiPoly(self.vars, out)

    def derivative(self, name: str) -> "MultiPoly":
        i = self.vars.index(name)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = c * e[i]
        return MultiPoly(self.vars, out)

    def map_coefficients(self, f: Callable) -> "MultiPoly":
        return MultiPoly(self.vars, {e: f(c) for e, c in self.terms.items()})

    def with_vars(self, variables) -> "MultiPoly":
        """Re-express in a variable tuple containing every variable actually used."""
        variables = tuple(variables)
        idx = []
        for i, v in enumerate(self.vars):
            if v in variables:
                idx.append(variables.index(v))
            else:
                if any(e[i] for e in self.terms):
                    raise ValueError(f"variable {v} in use")
                idx.append(None)
        out = {}
        for e, c in self.terms.items():
            e2 = [0] * len(variables)
            for i, j in enumerate(idx):
                if j is not None:
                    e2[j] = e[i]
            out[tuple(e2)] = c
        return MultiPoly(variables, out)

    def drop_var(self, name: str) -> "MultiPoly":
        return self.with_vars([v for v in self.vars if v != name])

    # -- evaluation / substitution --------------------------------------------

    def substitute(self, mapping: Dict[str, object], truncate_at: int | None = None) -> "MultiPoly":
        """Simultaneously replace variables by polynomials (or scalars)."""
        subs = []
        for v in self.vars:
            if v in mapping:
                s = mapping[v]
                subs.append(s if isinstance(s, MultiPoly) else MultiPoly.const(self.vars, s))
            else:
                subs.append(MultiPoly.var(self.vars, v, self._one()))
        powers: Dict[Tuple[int, int], MultiPoly] = {}

        def pw(i, n):
            key = (i, n)
            if key not in powers:
                if n == 0:
                    powers[key] = MultiPoly.const(self.vars, self._one())
                else:
                    r = pw(i, n - 1) * subs[i]
                    powers[key] = r.truncate(truncate_at) if truncate_at is not None else r
            return powers[key]

        out = MultiPoly(self.vars)
        for e, c in self.terms.items():
            t = MultiPoly.const(self.vars, c)
            for i, n in enumerate(e):
                if n:
                    t = t * pw(i, n)
                    if truncate_at is not None:
                        t = t.truncate(truncate_at)
            out = out + t
        return out

    def evaluate(self, point: Dict[str, object]):
        total = 0
        for e, c in self.terms.items():
            t = c
            for v, n in zip(self.vars, e):
                if n:
                    t = t * point[v] ** n
            total = t + total
        return total

    def translate(self, shift: Dict[str, object]) -> "MultiPoly":
        """Substitute v -> v + shift[v]."""
        mapping = {}
        for v, a in shift.items():
            mapping[v] = MultiPoly.var(self.vars, v, self._one()) + a
        return self.substitute(mapping)

    # -- display --------------------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), tuple(-x for x in t[0])))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                (v if n == 1 else f"{v}^{n}") for v, n in zip(self.vars, e) if n
            )
            cs = _coef_str(c)
            if not mono:
                parts.append(cs)
            elif cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append("-" + mono)
            else:
                parts.append(f"{cs}*{mono}" if "+" not in cs else f"({cs})*{mono}")
        s = " + ".join(parts)
        return s.replace("+ -", "- ")

    def __repr__(self):
        return f"MultiPoly({self})"


def _coef_str(c) -> str:
    if isinstance(c, WittElem):
        m = c.ring.modulus
        a = c.a if c.a <= m // 2 else c.a - m
        b = c.b if c.b <= m // 2 else c.b - m
        if b == 0:
            return str(a)
        if a == 0:
            return "w" if b == 1 else ("-w" if b == -1 else f"{b}*w")
        return f"{a}+{b}*w"
    if isinstance(c, Fraction) and c.denominator == 1:
        return str(c.numerator)
    return str(c)


def lex_leading(f: MultiPoly, order: Sequence[int]):
    """Leading (exponent, coefficient) under lex with variable priority ``order``."""
    return max(f.terms.items(), key=lambda t: tuple(t[0][i] for i in order))


def reduce_by(f: MultiPoly, divisors: Sequence[MultiPoly], order: Sequence[int],
              is_unit: Callable[[object], bool]) -> MultiPoly:
    """Multivariate division remainder of f by ``divisors`` (lex, unit leading coefficients only)."""
    leads = []
    for g in divisors:
        if g.is_zero():
            continue
        e, c = lex_leading(g, order)
        if is_unit(c):
            leads.append((g, e, c))
    r = MultiPoly(f.vars)
    p = f
    while p.terms:
        e, c = lex_leading(p, order)
        for g, ge, gc in leads:
            if all(a >= b for a, b in zip(e, ge)):
                shift = tuple(a - b for a, b in zip(e, ge))
                q = MultiPoly(f.vars, {shift: c / gc if not isinstance(c, int) else Fraction(c) / gc})
                p = p - q * g
                break
        else:
            r = r + MultiPoly(f.vars, {e: c})
            p = p - MultiPoly(f.vars, {e: c})
    return r
