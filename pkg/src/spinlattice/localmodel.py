"""The quadric of isotropic lines of a lattice, its charts, and their singularities.

Points are enumerated over F_p and F_{p^2}.  Charts are affine pieces of the
quadric (or of its refined modification when t = 2) written over W(F_{p^2})/p^k
with the distinguished point moved to the origin; the classifier decides
between smooth points, points where ``p`` has small order in ``m``, the
two-variable escape test, and the irregular case where ``p`` cannot be solved
for.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg as la
from .errors import InvariantViolation, PreconditionError, ResourceLimitError
from .exact import (
    DEFAULT_PRECISION,
    FiniteField,
    WittElem,
    WittRing,
    hensel_sqrt,
    valuation,
)
from .poly import MultiPoly, lex_leading, reduce_by
from .quadlattice import (
    EXHAUSTION_CAP,
    QuadLattice,
    diagonalize,
    discriminant_form,
    is_maximal,
    radical_mod_p,
)

SMOOTH = "Smooth"
QH_ORDER = "QuasiHealthyOrder"
QH_MAIN = "QuasiHealthyMain"
IRREGULAR = "Irregular"
UNCLASSIFIED = "Unclassified"


# --- projective points ------------------------------------------------------------


@dataclass(frozen=True)
class ProjPoint:
    coords: Tuple[WittElem, ...]
    q: int
    on_quadric: bool
    singular: bool
    irregular: bool = False

    def key(self):
        return tuple(c.key() for c in self.coords)

    def __str__(self):
        return "[" + ":".join(_elem_str(c) for c in self.coords) + "]"


def _elem_str(c: WittElem) -> str:
    p = c.ring.p
    a = c.a if c.a <= p // 2 else c.a - p
    b = c.b if c.b <= p // 2 else c.b - p
    if b == 0:
        return str(a)
    w = "w" if b == 1 else ("-w" if b == -1 else f"{b}w")
    if a == 0:
        return w
    return f"{a}+{w}" if not w.startswith("-") else f"{a}{w}"


def projective_points(n: int, F: FiniteField):
    """All points of P^{n-1}(F), first nonzero coordinate equal to 1."""
    elems = list(F.elements())
    zero, one = F.ring.zero, F.ring.one
    for lead in range(n):
        for tail in itertools.product(elems, repeat=n - lead - 1):
            yield (zero,) * lead + (one,) + tuple(tail)


def _count_projective(n: int, q: int) -> int:
    return (q**n - 1) // (q - 1)


def _qform(G, x):
    return la.bilinear(list(x), G, list(x)) / 2


@dataclass(frozen=True)
class DiscOnRadical:
    """The induced form on N = p L^v / p L, in the basis n_i = p g_i."""

    vectors: Tuple[Tuple[Fraction, ...], ...]  # n_i in L-coordinates
    gram: Tuple[Tuple[int, ...], ...]  # [n_i, n_j] / p  mod p


def disc_on_radical(L: QuadLattice) -> DiscOnRadical | None:
    D = discriminant_form(L)
    if not D.is_elementary():
        return None
    p = L.p
    vecs = tuple(tuple(p * x for x in g) for g in D.generators)
    B = L.gram_matrix()
    gram = tuple(
        tuple(_frac_mod_p(la.bilinear(list(u), B, list(v)) / p, p) for v in vecs) for u in vecs
    )
    return DiscOnRadical(vecs, gram)


def _frac_mod_p(x: Fraction, p: int) -> int:
    return (x.numerator * pow(x.denominator, -1, p)) % p


def _reduce_vec(v, ring):
    return [ring.coerce(x) for x in v]


def enumerate_mloc(L: QuadLattice, q: int, cap: int = EXHAUSTION_CAP) -> List[ProjPoint]:
    """All F_q points of the quadric Q = 0 in P(L (x) F_q), with flags."""
    p = L.p
    F = FiniteField.of_order(q)
    if F.p != p:
        raise PreconditionError(f"q={q} is not a power of p={p}")
    rad = radical_mod_p(L)
    if rad.s < 0:
        raise PreconditionError("the radical is everything")
    m = L.rank
    if _count_projective(m, q) > cap:
        raise ResourceLimitError(f"P^{m - 1}(F_{q}) exceeds the cap {cap}")
    G = L.gram_mod_p(F)
    irr_data = None
    if rad.t == 2 and F.degree == 2:
        irr_data = disc_on_radical(L)
    out = []
    for x in projective_points(m, F):
        if _qform(G, x) != 0:
            continue
        grad = la.mat_vec(G, list(x))
        singular = all(g == 0 for g in grad)
        irregular = False
        if singular and irr_data is not None:
            irregular = _is_irregular(x, irr_data, F)
        out.append(ProjPoint(tuple(x), q, True, singular, irregular))
    return out


def _is_irregular(x, data: DiscOnRadical, F: FiniteField) -> bool:
    ring = F.ring
    nvecs = [_reduce_vec(v, ring) for v in data.vectors]
    c = la.solve(la.from_columns(nvecs), list(x))
    if c is None:
        return False
    Bn = [[ring(a) for a in row] for row in data.gram]
    return _qform(Bn, c) == 0


# --- normal form over W(F_{p^2}) / p^k ----------------------------------------------


@dataclass
class WittNormalForm:
    ring: WittRing
    t: int
    names: List[str]
    basis: list  # columns: new basis vectors in original coordinates
    inverse: list  # original coordinates -> normal coordinates
    gram: list  # Gram in the new basis
    form: MultiPoly  # Q in the normal coordinates

    @property
    def r(self) -> int:
        return len(self.names)


def normal_form_witt(L: QuadLattice, k: int = DEFAULT_PRECISION) -> WittNormalForm:
    """Basis of L (x) W/p^k in which Q = sum X_i^2 (+ p Y^2 if t = 1, + p Y Z if t = 2).

    Every p-unit of Z_(p) is a square in F_{p^2}, so Hensel square roots
    normalize all unit diagonal entries to 1.
    """
    ok, _ = is_maximal(L)
    if not ok:
        raise PreconditionError("normal form needs a maximal lattice")
    p = L.p
    ring = WittRing(p, k)
    t = radical_mod_p(L).t
    if t > 2:
        raise PreconditionError("t must be at most 2")
    P, diag = diagonalize(L)
    cols = la.transpose(P)
    units = [(c, d) for c, d in zip(cols, diag) if valuation(d, p) == 0]
    pblock = [(c, d) for c, d in zip(cols, diag) if valuation(d, p) > 0]
    if len(pblock) != t or any(valuation(d, p) != 1 for _, d in pblock):
        raise InvariantViolation("diagonal shape does not match the radical")
    newcols, names = [], []
    for i, (c, d) in enumerate(units):
        s = hensel_sqrt(ring.coerce(d))
        newcols.append([ring.coerce(x) / s for x in c])
        names.append(f"X{i + 1}")
    scaled = []
    for c, d in pblock:
        s = hensel_sqrt(ring.coerce(d / p))
        scaled.append([ring.coerce(x) / s for x in c])
    if t == 1:
        newcols.append(scaled[0])
        names.append("Y")
    elif t == 2:
        i_ = hensel_sqrt(ring(-1))
        b1, b2 = scaled
        half = ring.one / 2
        newcols.append([half * (a - i_ * b) for a, b in zip(b1, b2)])
        newcols.append([half * (a + i_ * b) for a, b in zip(b1, b2)])
        names += ["Y", "Z"]
    Bm = la.from_columns(newcols)
    B = [[ring.coerce(x) for x in row] for row in L.gram]
    gram = la.mat_mul(la.mat_mul(la.transpose(Bm), B), Bm)
    n_units = len(units)
    r = len(names)
    expect = [[ring.zero] * r for _ in range(r)]
    for i in range(n_units):
        expect[i][i] = ring(2)
    if t == 1:
        expect[r - 1][r - 1] = ring(2 * p)
    elif t == 2:
        expect[r - 2][r - 1] = expect[r - 1][r - 2] = ring(p)
    if gram != expect:
        raise InvariantViolation("normal form Gram mismatch")
    inv = la.inverse(Bm)
    gens = MultiPoly.gens(names, ring.one)
    form = MultiPoly(names)
    for i in range(n_units):
        form = form + gens[i] * gens[i]
    if t == 1:
        form = form + gens[-1] * gens[-1] * ring(p)
    elif t == 2:
        form = form + gens[-2] * gens[-1] * ring(p)
    return WittNormalForm(ring, t, names, Bm, inv, gram, form)


# --- charts and the classifier ------------------------------------------------------


@dataclass
class VZVerdict:
    kind: str
    ord_p: Optional[int] = None
    witness: Optional[dict] = None
    note: str = ""

    def as_dict(self):
        d = {"kind": self.kind}
        if self.ord_p is not None:
            d["ord_p"] = self.ord_p
        if self.witness:
            d["witness"] = self.witness
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class Chart:
    variables: Tuple[str, ...]
    relations: List[MultiPoly]
    ring: WittRing
    name: str = ""
    point: Optional[tuple] = None  # the distinguished point before translation
    verdict: Optional[VZVerdict] = None

    @property
    def ord_p(self):
        return self.verdict.ord_p if self.verdict else None

    def relation_strings(self):
        return [str(f) for f in self.relations]


def _reduce_poly(f: MultiPoly) -> MultiPoly:
    return f.map_coefficients(lambda c: c.reduce(1))


def _split_p(f: MultiPoly):
    """f = f0 + p f1 with f0 having digit coefficients (units or 0)."""
    ring = None
    t0, t1 = {}, {}
    for e, c in f.terms.items():
        ring = c.ring
        d = c.digit()
        t0[e] = d
        rest = c - d
        if not rest.is_zero():
            q = rest.divide_by_p(1)
            t1[e] = WittElem(ring, q.a, q.b)
    return MultiPoly(f.vars, t0), MultiPoly(f.vars, t1)


def _linear_coeff(f: MultiPoly, i: int):
    e = tuple(1 if j == i else 0 for j in range(len(f.vars)))
    return f.terms.get(e)


def _series_inverse(f: MultiPoly, D: int) -> MultiPoly:
    """1/f as a power series truncated at total degree D (f(0) a unit)."""
    c0 = f.constant_term()
    inv0 = c0.ring.one / c0
    g = (f - c0) * inv0  # f = c0 (1 + g)
    out = MultiPoly.const(f.vars, c0.ring.one)
    term = MultiPoly.const(f.vars, c0.ring.one)
    for _ in range(D):
        term = (term * (-g)).truncate(D)
        if term.is_zero():
            break
        out = out + term
    return (out * inv0).truncate(D)


def _implicit_eliminate(g: MultiPoly, var: str, polys: List[MultiPoly], D: int) -> List[MultiPoly]:
    """Solve g = 0 for ``var`` as a truncated series and substitute into ``polys``.

    Requires the linear coefficient of ``var`` in g to be a unit and g(0) to
    be divisible by p.
    """
    i = g.vars.index(var)
    c = _linear_coeff(g, i)
    ring = c.ring
    ci = ring.one / c
    v = MultiPoly.var(g.vars, var, ring.one)
    h = g - v * c  # g = c v + h
    phi = MultiPoly(g.vars)
    for _ in range(D + ring.k + 2):
        nxt = (h.substitute({var: phi}, truncate_at=D) * (-ci)).truncate(D)
        if nxt == phi:
            break
        phi = nxt
    else:
        raise InvariantViolation("implicit elimination did not converge")
    out = []
    for f in polys:
        out.append(f.substitute({var: phi}, truncate_at=D).drop_var(var))
    return out


def _jacobian_rank(relations: List[MultiPoly], ring: WittRing) -> int:
    """Rank modulo p of the Jacobian at the origin."""
    zero = ring.residue_ring().zero
    rows = []
    for f in relations:
        row = []
        for i in range(len(f.vars)):
            c = _linear_coeff(f, i)
            row.append(c.reduce(1) if c is not None else zero)
        rows.append(row)
    return la.rank(rows) if rows and rows[0] else 0


def vz_classify(chart: Chart) -> VZVerdict:
    """Classify the complete local ring of a chart at its origin."""
    rels = [f for f in chart.relations if not f.is_zero()]
    ring = chart.ring
    p = ring.p
    for f in rels:
        if not f.constant_term() == 0 and f.constant_term().valuation() < 1:
            raise PreconditionError("origin is not on the special fibre of the chart")
    if not rels:
        return VZVerdict(SMOOTH, note="no relations")
    if _jacobian_rank(rels, ring) == len(rels):
        return VZVerdict(SMOOTH, note="Jacobian has full rank modulo p")
    D = 2 * p
    # eliminate relations that are smooth in some variable (unit linear coefficient)
    work = list(rels)
    while len(work) > 1:
        done = False
        for idx, g in enumerate(work):
            for i, name in enumerate(g.vars):
                c = _linear_coeff(g, i)
                if c is not None and c.is_unit():
                    others = work[:idx] + work[idx + 1:]
                    work = [f for f in _implicit_eliminate(g, name, others, D) if not f.is_zero()]
                    done = True
                    break
            if done:
                break
        if not done:
            break
    if len(work) != 1:
        return VZVerdict(UNCLASSIFIED, note=f"{len(work)} relations remain after elimination")
    f = work[0]
    f0, f1 = _split_p(f)
    c1 = f1.constant_term()
    if not (c1 != 0 and c1.is_unit()):
        return VZVerdict(IRREGULAR, note="the coefficient of p vanishes at the point; p cannot be solved for")
    f0bar = _reduce_poly(f0)
    if f0bar.is_zero():
        return VZVerdict(UNCLASSIFIED, note="p vanishes in the completed ring")
    ordp = f0bar.lowest_degree()
    if ordp < p:
        return VZVerdict(QH_ORDER, ord_p=ordp)
    f1bar = _reduce_poly(f1)
    names = f.vars
    for a, b in itertools.combinations(range(len(names)), 2):
        zero = {n: WittRing(p, 1).zero for j, n in enumerate(names) if j not in (a, b)}
        g0 = f0bar.substitute(zero) if zero else f0bar
        g1 = f1bar.substitute(zero) if zero else f1bar
        if g1.constant_term() == 0:
            continue
        h = (-(g0 * _series_inverse(g1, 2 * p - 2))).truncate(2 * p - 2)
        for e, c in sorted(h.terms.items(), key=lambda t: (sum(t[0]), t[0])):
            ea, eb = e[a], e[b]
            if any(e[j] for j in range(len(names)) if j not in (a, b)):
                continue
            if ea < p and eb < p and not (ea >= p - 1 and eb >= p - 1):
                hh = _restrict(h, [names[a], names[b]])
                return VZVerdict(
                    QH_MAIN,
                    ord_p=ordp,
                    witness={
                        "variables": [names[a], names[b]],
                        "h": str(hh),
                        "monomial": [ea, eb],
                    },
                )
    return VZVerdict(UNCLASSIFIED, ord_p=ordp, note="no two-variable escape found")


def _restrict(h: MultiPoly, keep: Sequence[str]) -> MultiPoly:
    idx = [h.vars.index(n) for n in keep]
    terms = {}
    for e, c in h.terms.items():
        if any(e[j] for j in range(len(e)) if j not in idx):
            continue
        terms[tuple(e[j] for j in idx)] = c
    return MultiPoly(keep, terms)


def _lift(c: WittElem, ring: WittRing) -> WittElem:
    return WittElem(ring, c.a, c.b)


def _lower(name: str) -> str:
    if name.startswith("X"):
        return "u" + name[1:]
    return name.lower()


def chart_at(L: QuadLattice, point: ProjPoint, k: int = DEFAULT_PRECISION, nf: WittNormalForm | None = None) -> Chart:
    """Affine chart of the quadric around ``point``, translated to the origin, with its verdict."""
    if not point.on_quadric:
        raise PreconditionError("point is not on the quadric")
    nf = nf or normal_form_witt(L, k)
    ring = nf.ring
    x = [_lift(c, ring) for c in point.coords]
    y = [c.reduce(1) for c in la.mat_vec(nf.inverse, x)]
    j = next(i for i, c in enumerate(y) if c != 0)
    y = [c / y[j] for c in y]
    names = nf.names
    chart_vars = tuple(_lower(n) for i, n in enumerate(names) if i != j)
    allvars = tuple(names) + chart_vars
    f = nf.form.with_vars(allvars)
    sub = {}
    for i, n in enumerate(names):
        if i == j:
            sub[n] = MultiPoly.const(allvars, ring.one)
        else:
            sub[n] = MultiPoly.var(allvars, _lower(n), ring.one) + _lift(y[i], ring)
    f = f.substitute(sub)
    for n in names:
        f = f.drop_var(n)
    f = f.with_vars(chart_vars)
    if _reduce_poly(f).constant_term() != 0:
        raise InvariantViolation("chart relation does not vanish at the point")
    chart = Chart(chart_vars, [f], ring, name=f"{names[j]}=1", point=tuple(point.coords))
    chart.verdict = vz_classify(chart)
    return chart


def chart_points(chart: Chart, q: int, cap: int = EXHAUSTION_CAP):
    """F_q points of the special fibre of an affine chart."""
    F = FiniteField.of_order(q)
    n = len(chart.variables)
    if q**n > cap:
        raise ResourceLimitError(f"{q}^{n} chart points exceed the cap {cap}")
    reds = [_reduce_poly(f) for f in chart.relations]
    out = []
    elems = list(F.elements())
    for pt in itertools.product(elems, repeat=n):
        env = dict(zip(chart.variables, pt))
        if all(f.is_zero() or f.evaluate(env) == 0 for f in reds):
            out.append(pt)
    return out


def translate_chart(chart: Chart, pt) -> Chart:
    ring = chart.ring
    shift = {n: _lift(c, ring) for n, c in zip(chart.variables, pt)}
    rels = [f.translate(shift) for f in chart.relations]
    return Chart(chart.variables, rels, ring, chart.name, tuple(pt))


def classify_chart_points(chart: Chart, q: int):
    """(point, verdict) for every F_q point of the chart."""
    out = []
    for pt in chart_points(chart, q):
        c = translate_chart(chart, pt)
        out.append((pt, vz_classify(c)))
    return out


# --- the self-dual lattice over the quadratic extension -------------------------------


@dataclass
class LDiamondLattice:
    base: QuadLattice
    line: Tuple[WittElem, ...]  # coordinates in the basis n_i of N (over F_{p^2})
    v_tilde: list  # isotropic lift, in L-coordinates over W/p^k
    basis: list  # basis vectors of L^diamond, numerators over W/p^k
    shifts: List[int]  # basis[i] is divided by p^shifts[i]
    gram: list  # Gram of L^diamond over W/p^k
    inclusion: list  # L-coordinates -> L^diamond coordinates
    k: int

    def is_self_dual(self) -> bool:
        return all(v == 0 for v in la.witt_elementary_valuations(self.gram))

    def contains(self, num, shift: int = 0) -> bool:
        """Is p^{-shift} * num (num in L-coordinates) inside L^diamond?"""
        ring = self.inclusion[0][0].ring
        y = la.mat_vec(self.inclusion, [ring.coerce(x) for x in num])
        return all(c.valuation() >= shift for c in y if not c.is_zero())

    def contains_base(self) -> bool:
        ring = self.inclusion[0][0].ring
        m = self.base.rank
        return all(self.contains([ring.one if i == j else ring.zero for i in range(m)]) for j in range(m))

    def same_as(self, other: "LDiamondLattice") -> bool:
        return all(other.contains(b, s) for b, s in zip(self.basis, self.shifts)) and all(
            self.contains(b, s) for b, s in zip(other.basis, other.shifts)
        )

    def inclusion_valuations(self):
        return la.witt_elementary_valuations(self.inclusion)


def isotropic_disc_lines(L: QuadLattice):
    """The isotropic lines of the induced form on N (x) F_{p^2}, sorted."""
    data = disc_on_radical(L)
    if data is None or len(data.vectors) != 2:
        raise PreconditionError("needs an elementary discriminant of rank 2")
    F = FiniteField(L.p, 2)
    Bn = [[F.ring(a) for a in row] for row in data.gram]
    lines = [c for c in projective_points(2, F) if _qform(Bn, c) == 0]
    lines.sort(key=lambda c: tuple(x.key() for x in c))
    return data, lines


def ldiamond(L: QuadLattice, line_choice: int = 0, k: int = DEFAULT_PRECISION) -> LDiamondLattice:
    ok, _ = is_maximal(L)
    if not ok:
        raise PreconditionError("L must be maximal")
    if radical_mod_p(L).t != 2:
        raise PreconditionError("L must have t = 2")
    data, lines = isotropic_disc_lines(L)
    if len(lines) != 2:
        raise InvariantViolation(f"expected 2 isotropic lines, found {len(lines)}")
    if line_choice not in (0, 1):
        raise PreconditionError("line_choice must be 0 or 1")
    p = L.p
    c = lines[line_choice]
    R2 = WittRing(p, k + 2)
    B2 = [[R2.coerce(x) for x in row] for row in L.gram]
    nvecs = [[R2.coerce(x) for x in v] for v in data.vectors]
    ct = [_lift(x, R2) for x in c]
    v = [sum((a * n[i] for a, n in zip(ct, nvecs)), R2.zero) for i in range(L.rank)]
    # Hensel step inside N: v + s * m stays in p L^v and becomes exactly isotropic
    Fp2 = FiniteField(p, 2)
    Bn = [[Fp2.ring(a) for a in row] for row in data.gram]
    bc = la.mat_vec(Bn, list(c))
    j = next(i for i, x in enumerate(bc) if x != 0)
    mvec = nvecs[j]
    A = (la.bilinear(mvec, B2, mvec) / 2).divide_by_p(1)
    Bc = la.bilinear(v, B2, mvec).divide_by_p(1)
    C = (la.bilinear(v, B2, v) / 2).divide_by_p(1)
    s = A.ring.zero
    for _ in range(k + 3):
        g = A * s * s + Bc * s + C
        if g == 0:
            break
        s = s - g / (2 * A * s + Bc)
    if A * s * s + Bc * s + C != 0:
        raise InvariantViolation("isotropic lift failed")
    s2 = _lift(s, R2)
    v = [a + s2 * b for a, b in zip(v, mvec)]
    if la.bilinear(v, B2, v) != 0:
        raise InvariantViolation("lifted vector is not isotropic")
    j0 = next((i for i, x in enumerate(v) if x.is_unit()), None)
    if j0 is None:
        raise InvariantViolation("lift has no unit coordinate")
    inv = R2.one / v[j0]
    v = [x * inv for x in v]
    ring = WittRing(p, k)
    m = L.rank
    basis_num, shifts = [], []
    for i in range(m):
        if i == j0:
            basis_num.append(v)
            shifts.append(1)
        else:
            basis_num.append([R2.one if a == i else R2.zero for a in range(m)])
            shifts.append(0)
    gram = []
    for a in range(m):
        row = []
        for b in range(m):
            x = la.bilinear(basis_num[a], B2, basis_num[b])
            sh = shifts[a] + shifts[b]
            row.append(_lift(x.divide_by_p(sh), ring) if sh else x.reduce(k))
        gram.append(row)
    incl = [[ring.zero] * m for _ in range(m)]
    for i in range(m):
        if i != j0:
            incl[i][i] = ring.one
    for i in range(m):
        incl[i][j0] = ring(p) if i == j0 else -v[i].reduce(k)
    lat = LDiamondLattice(
        L, tuple(c), [x.reduce(k) for x in v], [[x.reduce(k) for x in b] for b in basis_num], shifts, gram, incl, k
    )
    if not lat.is_self_dual():
        raise InvariantViolation("L-diamond is not self-dual")
    if not lat.contains_base():
        raise InvariantViolation("L-diamond does not contain L")
    return lat


# --- refined local model: ideal and charts --------------------------------------------


@dataclass
class MrefIdeal:
    ring: WittRing
    variables: Tuple[str, ...]
    generators: List[Tuple[str, MultiPoly]]
    charts: Dict[str, Chart]


def _unit_const(c) -> bool:
    return isinstance(c, WittElem) and c.is_unit()


def _solve_linear(g: MultiPoly, var: str):
    """If var occurs in g only linearly with a constant unit coefficient, return var = solution."""
    if g.degree_in(var) != 1:
        return None
    coeff = g.coefficient_in(var, 1)
    if coeff.degree() != 0:
        return None
    c = coeff.constant_term()
    if not _unit_const(c):
        return None
    v = MultiPoly.var(g.vars, var, c.ring.one)
    rest = g - v * c
    return rest * (-(c.ring.one / c))


def _buchberger_closure(gens, order, max_new=25):
    def lead(f):
        return lex_leading(f, order)

    basis = [g for g in gens if not g.is_zero() and lead(g)[1].is_unit()]
    pairs = [(i, j) for i in range(len(basis)) for j in range(i + 1, len(basis))]
    added = 0
    while pairs and added < max_new:
        i, j = pairs.pop(0)
        (ea, ca), (eb, cb) = lead(basis[i]), lead(basis[j])
        lcm = tuple(max(a, b) for a, b in zip(ea, eb))
        if all(a + b == c for a, b, c in zip(ea, eb, lcm)):
            continue  # coprime leading monomials
        ma = MultiPoly(basis[i].vars, {tuple(c - a for a, c in zip(ea, lcm)): ca.ring.one / ca})
        mb = MultiPoly(basis[j].vars, {tuple(c - b for b, c in zip(eb, lcm)): cb.ring.one / cb})
        s = ma * basis[i] - mb * basis[j]
        r = reduce_by(s, basis, order, lambda c: c.is_unit())
        if not r.is_zero() and lead(r)[1].is_unit():
            basis.append(r)
            added += 1
            pairs += [(a, len(basis) - 1) for a in range(len(basis) - 1)]
    return basis


def _minimal_generators(gens, order):
    """Drop generators that reduce to zero modulo the ones kept before them."""
    def content(g):
        return min(c.valuation() for c in g.terms.values())

    gens = sorted([g for g in gens if not g.is_zero()], key=lambda g: (content(g), g.degree(), len(g.terms), str(g)))
    kept = []
    for g in gens:
        if kept:
            basis = _buchberger_closure(kept, order)
            if reduce_by(g, basis, order, lambda c: c.is_unit()).is_zero():
                continue
        kept.append(g)
    return kept


def _normalize_sign(f: MultiPoly) -> MultiPoly:
    e, c = f.sorted_terms()[0]
    m = c.ring.modulus
    a = c.a if c.a <= m // 2 else c.a - m
    b = c.b if c.b <= m // 2 else c.b - m
    return -f if (a, b) < (0, 0) else f


def _directed_chart(gens, base_vars, proj_vars, dehom: str, ring, rename) -> Chart:
    allvars = gens[0].vars
    one = ring.one
    cur = [g.substitute({dehom: one}) for g in gens]
    priority = [v for v in base_vars + proj_vars if v != dehom]
    eliminated = {dehom}

    def eliminate(var):
        for g in cur:
            if g.is_zero():
                continue
            sol = _solve_linear(g, var)
            if sol is not None:
                return sol
        return None

    def order_idx():
        return [allvars.index(v) for v in priority if v not in eliminated]

    def step(candidates, need_two):
        nonlocal cur
        changed = True
        while changed:
            changed = False
            if need_two and len(_minimal_generators(cur, order_idx())) < 2:
                return
            for var in candidates:
                if var in eliminated:
                    continue
                sol = eliminate(var)
                if sol is None:
                    continue
                cur = [g.substitute({var: sol}) for g in cur]
                eliminated.add(var)
                changed = True
                break

    step([v for v in base_vars], need_two=False)
    cur = _minimal_generators(cur, order_idx())
    step([v for v in proj_vars if v != dehom], need_two=True)
    cur = _minimal_generators(cur, order_idx())
    keep = [v for v in priority if v not in eliminated]
    rels = []
    for g in cur:
        f = g
        for v in allvars:
            if v not in keep:
                f = f.drop_var(v)
        f = f.with_vars(keep)
        new = tuple(rename.get(v, v) for v in keep)
        rels.append(_normalize_sign(MultiPoly(new, dict(f.terms))))
    return Chart(tuple(rename.get(v, v) for v in keep), rels, ring, name=f"{dehom}!=0")


def mref_ideal(L: QuadLattice, k: int = DEFAULT_PRECISION) -> MrefIdeal:
    """Generators of the refined model over the Y=0 neighbourhood, and its three charts."""
    nf = normal_form_witt(L, k)
    if nf.t != 2:
        raise PreconditionError("refined model needs t = 2")
    ring = nf.ring
    p = ring(ring.p)
    n = nf.r - 2
    xs = [f"x{i + 1}" for i in range(n)]
    Ws = [f"W{i + 1}" for i in range(n)]
    variables = tuple(xs + ["y"] + Ws + ["U", "T"])
    V = {name: MultiPoly.var(variables, name, ring.one) for name in variables}
    gens: List[Tuple[str, MultiPoly]] = []
    base = sum((V[x] * V[x] for x in xs), MultiPoly(variables)) + V["y"] * p
    gens.append(("sum x_i^2 + p*y", base))
    gens.append(("sum W_k^2 + U*T", sum((V[w] * V[w] for w in Ws), MultiPoly(variables)) + V["U"] * V["T"]))
    for i in range(n):
        for j in range(i + 1, n):
            gens.append((f"x{j + 1}*W{i + 1} - x{i + 1}*W{j + 1}", V[xs[j]] * V[Ws[i]] - V[xs[i]] * V[Ws[j]]))
    for i in range(n):
        gens.append((f"p*W{i + 1} - x{i + 1}*U", V[Ws[i]] * p - V[xs[i]] * V["U"]))
    for i in range(n):
        gens.append((f"y*W{i + 1} - x{i + 1}*T", V["y"] * V[Ws[i]] - V[xs[i]] * V["T"]))
    gens.append(("y*U - p*T", V["y"] * V["U"] - V["T"] * p))
    polys = [g for _, g in gens]
    rename = {w: w.lower() for w in Ws}
    rename.update({"U": "u", "T": "t"})
    charts = {}
    for dehom in ("U", "T", "W1"):
        c = _directed_chart(polys, xs + ["y"], Ws + ["U", "T"], dehom, ring, rename)
        charts[dehom] = c
    return MrefIdeal(ring, variables, gens, charts)


# --- comparison of the refined model with the quadric ------------------------------------


@dataclass
class MrefComparison:
    q: int
    mloc_points: int
    mref_points: int
    fibers: List[Tuple[str, int, bool]]  # (point, fiber size, irregular)
    bijective_off_irregular: bool
    irregular_fibers: List[Tuple[str, int]]


def _isotropic_points(G, F, r):
    return [x for x in projective_points(r, F) if _qform(G, x) == 0]


def mref_vs_mloc(L: QuadLattice, q: int, line_choice: int = 0, k: int = 2) -> MrefComparison:
    """Brute-force fibres of M^ref(F_q) -> M^loc(F_q)."""
    p = L.p
    if radical_mod_p(L).t != 2:
        raise PreconditionError("refined model needs t = 2")
    F = FiniteField.of_order(q)
    Fp2 = FiniteField(p, 2)
    comps = [ldiamond(L, line_choice, k)]
    if F.degree == 2:
        comps.append(ldiamond(L, 1 - line_choice, k))
    r = L.rank
    if _count_projective(r, p * p) > EXHAUSTION_CAP:
        raise ResourceLimitError("L-diamond quadric too large to enumerate")
    comp_data = []
    for c in comps:
        incl = [[x.reduce(1) for x in row] for row in c.inclusion]
        G = [[x.reduce(1) for x in row] for row in c.gram]
        comp_data.append((incl, G, _isotropic_points(G, Fp2, r)))
    pts = enumerate_mloc(L, q)
    fibers, irregular = [], []
    total = 0
    ok = True
    for pt in pts:
        size = 1
        for incl, G, iso in comp_data:
            y = la.mat_vec(incl, list(pt.coords))
            if all(c == 0 for c in y):
                size *= len(iso)
            else:
                size *= 1 if _qform(G, y) == 0 else 0
        total += size
        fibers.append((str(pt), size, pt.irregular))
        if pt.irregular:
            irregular.append((str(pt), size))
        elif size != 1:
            ok = False
    return MrefComparison(q, len(pts), total, fibers, ok, irregular)
