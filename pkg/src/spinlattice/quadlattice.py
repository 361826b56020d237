"""Quadratic lattices over Z_(p) and quadratic spaces over finite fields.

A lattice is stored through the Gram matrix ``B`` of the bilinear form
``[v, w] = Q(v + w) - Q(v) - Q(w)``, so ``Q(v) = v^T B v / 2``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from . import linalg as la
from .errors import InvariantViolation, PreconditionError, ResourceLimitError
from .exact import (
    INF,
    FiniteField,
    WittElem,
    is_odd_prime,
    is_p_integral,
    is_p_unit,
    qz_class,
    valuation,
)

EXHAUSTION_CAP = 10**6


def _frac_matrix(M):
    return [[Fraction(x) for x in row] for row in M]


class QuadLattice:
    """Rank-m quadratic lattice over Z_(p), given by its bilinear Gram matrix."""

    __slots__ = ("p", "gram", "label")

    def __init__(self, p: int, gram, label: str | None = None):
        if not is_odd_prime(p):
            raise PreconditionError(f"p={p} must be an odd prime")
        B = _frac_matrix(gram)
        m = len(B)
        if any(len(row) != m for row in B):
            raise PreconditionError("Gram matrix must be square")
        for i in range(m):
            for j in range(m):
                if B[i][j] != B[j][i]:
                    raise PreconditionError("Gram matrix must be symmetric")
                if not is_p_integral(B[i][j], p):
                    raise PreconditionError(f"Gram entry {B[i][j]} is not {p}-integral")
        if m and la.det(B) == 0:
            raise PreconditionError("Gram matrix is degenerate over Q")
        self.p = p
        self.gram = tuple(tuple(row) for row in B)
        self.label = label

    @classmethod
    def from_diagonal(cls, p: int, qvalues, label=None) -> "QuadLattice":
        """Orthogonal sum of rank-one lattices <a_i> with Q(e_i) = a_i."""
        q = [Fraction(a) for a in qvalues]
        n = len(q)
        return cls(p, [[2 * q[i] if i == j else Fraction(0) for j in range(n)] for i in range(n)], label)

    @property
    def rank(self) -> int:
        return len(self.gram)

    def gram_matrix(self):
        return [list(row) for row in self.gram]

    def Q(self, v) -> Fraction:
        return la.bilinear(v, self.gram, v) / 2

    def pair(self, v, w) -> Fraction:
        return Fraction(la.bilinear(v, self.gram, w))

    def det(self) -> Fraction:
        return la.det(self.gram_matrix()) if self.rank else Fraction(1)

    def is_unimodular(self) -> bool:
        return is_p_unit(self.det(), self.p)

    def __eq__(self, other):
        return isinstance(other, QuadLattice) and (self.p, self.gram) == (other.p, other.gram)

    def __hash__(self):
        return hash((self.p, self.gram))

    def __repr__(self):
        return f"QuadLattice(p={self.p}, gram={[list(map(str, r)) for r in self.gram]})"

    def transport(self, P) -> "QuadLattice":
        """Lattice spanned by the columns of P (Gram P^T B P)."""
        G = la.mat_mul(la.mat_mul(la.transpose(P), self.gram_matrix()), P)
        return QuadLattice(self.p, G)

    def gram_mod_p(self, field: FiniteField):
        return [[field.ring.coerce(x) for x in row] for row in self.gram]


# --- diagonalization -----------------------------------------------------------


def diagonalize(L: QuadLattice):
    """Orthogonal basis by repeated splitting-off of a vector of minimal ``v_p(Q)``.

    Candidates are the current basis vectors followed by pairwise sums
    ``b_i + b_j`` (i < j); for odd p the minimum over these equals the minimum
    over the whole lattice.  Ties go to the earliest candidate.
    Returns ``(P, diag)``: columns of ``P`` are the new basis (original
    coordinates) and ``P^T B P = 2 diag(diag)``.
    """
    p = L.p
    m = L.rank
    B = L.gram_matrix()
    basis = [[Fraction(int(i == j)) for i in range(m)] for j in range(m)]
    out_vecs, out_diag = [], []

    def Qv(v):
        return la.bilinear(v, B, v) / 2

    while basis:
        n = len(basis)
        cands = [(i, None) for i in range(n)] + [(i, j) for i in range(n) for j in range(i + 1, n)]
        best, best_val = None, INF
        for i, j in cands:
            v = basis[i] if j is None else [a + b for a, b in zip(basis[i], basis[j])]
            val = valuation(Qv(v), p)
            if best is None or val < best_val:
                best, best_val = (i, j, v), val
        i, j, v = best
        if best_val is INF:
            raise InvariantViolation("degenerate form: every candidate is isotropic")
        rest = [b for idx, b in enumerate(basis) if idx != i]
        vv = la.bilinear(v, B, v)
        new_rest = []
        for w in rest:
            c = la.bilinear(w, B, v) / vv
            if not is_p_integral(c, p):
                raise InvariantViolation("projection coefficient not p-integral")
            new_rest.append([a - c * b for a, b in zip(w, v)])
        out_vecs.append(v)
        out_diag.append(Qv(v))
        basis = new_rest
    P = la.transpose(out_vecs) if out_vecs else []
    return P, out_diag


def signature(L: QuadLattice) -> Tuple[int, int]:
    _, d = diagonalize(L)
    return sum(1 for x in d if x > 0), sum(1 for x in d if x < 0)


# --- discriminant form -----------------------------------------------------------


@dataclass(frozen=True)
class FiniteQuadModule:
    """p-part of L^v / L with its Q/Z-valued quadratic form.

    ``generators`` are vectors of L^v in the coordinates of L; ``qbar[i]`` is
    ``Q(generators[i]) mod Z_(p)`` and ``bbar[i][j]`` the bilinear values.
    """

    p: int
    orders: Tuple[int, ...]
    generators: Tuple[Tuple[Fraction, ...], ...]
    qbar: Tuple[Fraction, ...]
    bbar: Tuple[Tuple[Fraction, ...], ...]

    @property
    def size(self) -> int:
        n = 1
        for o in self.orders:
            n *= o
        return n

    def is_elementary(self) -> bool:
        return all(o == self.p for o in self.orders)

    def exponents(self):
        return tuple(valuation(o, self.p) for o in self.orders)

    def value(self, coeffs) -> Fraction:
        """q-bar of sum c_i g_i, as a class in [0, 1)."""
        s = Fraction(0)
        n = len(self.orders)
        for i in range(n):
            if coeffs[i]:
                s += coeffs[i] * coeffs[i] * self.qbar[i]
                for j in range(i + 1, n):
                    if coeffs[j]:
                        s += coeffs[i] * coeffs[j] * self.bbar[i][j]
        return qz_class(s, self.p)

    def pairing(self, a, b) -> Fraction:
        s = Fraction(0)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                if x and y:
                    s += x * y * self.bbar[i][j]
        return qz_class(s, self.p)

    def elements(self):
        return itertools.product(*(range(o) for o in self.orders))

    def lift(self, coeffs):
        m = len(self.generators[0]) if self.generators else 0
        v = [Fraction(0)] * m
        for c, g in zip(coeffs, self.generators):
            if c:
                v = [a + c * b for a, b in zip(v, g)]
        return v


def _integer_scaled(L: QuadLattice):
    den = 1
    for row in L.gram:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    return [[int(x * den) for x in row] for row in L.gram], den


def discriminant_form(L: QuadLattice) -> FiniteQuadModule:
    """p-part of disc(L) = L^v/L via Smith normal form of the (scaled) Gram matrix."""
    p = L.p
    if L.rank == 0:
        return FiniteQuadModule(p, (), (), (), ())
    Bint, _den = _integer_scaled(L)  # den is a p-unit
    U, D, V = la.smith_normal_form(Bint)
    orders, gens = [], []
    for i in range(L.rank):
        a = valuation(D[i][i], p)
        if a > 0:
            pa = p**a
            orders.append(pa)
            gens.append(tuple(Fraction(V[r][i], pa) for r in range(L.rank)))
    B = L.gram_matrix()
    qbar = tuple(qz_class(la.bilinear(g, B, g) / 2, p) for g in gens)
    bbar = tuple(tuple(qz_class(la.bilinear(g, B, h), p) for h in gens) for g in gens)
    mod = FiniteQuadModule(p, tuple(orders), tuple(gens), qbar, bbar)
    if mod.size != p ** valuation(L.det(), p):
        raise InvariantViolation("disc order does not match the determinant")
    return mod


def in_lattice(v, p: int) -> bool:
    return all(is_p_integral(x, p) for x in v)


# --- radical ---------------------------------------------------------------------


@dataclass(frozen=True)
class RadicalData:
    t: int
    basis: Tuple[Tuple[WittElem, ...], ...]
    s: int


def radical_mod_p(L: QuadLattice) -> RadicalData:
    F = FiniteField(L.p, 1)
    Bbar = L.gram_mod_p(F)
    N = la.nullspace(Bbar) if L.rank else []
    t = len(N)
    return RadicalData(t, tuple(tuple(v) for v in N), L.rank - t - 1)


# --- anisotropy -----------------------------------------------------------------


def quadratic_value(gram, x):
    return _pair(gram, x, x) / 2


def is_anisotropic(V, field: FiniteField | None = None, cap: int = EXHAUSTION_CAP) -> bool:
    """True iff no nonzero vector is isotropic.

    ``V`` is either a :class:`FiniteQuadModule` (must be elementary) or a
    bilinear Gram matrix over ``field``.
    """
    if isinstance(V, FiniteQuadModule):
        if not V.is_elementary():
            raise PreconditionError("anisotropy test needs an elementary discriminant")
        if V.size > cap:
            raise ResourceLimitError(f"{V.size} elements exceed the cap {cap}")
        return all(V.value(c) != 0 for c in V.elements() if any(c))
    if field is None:
        raise PreconditionError("a field is required for a Gram-matrix input")
    n = len(V)
    if n == 0:
        return True
    if field.order**n > cap:
        raise ResourceLimitError(f"{field.order}^{n} vectors exceed the cap {cap}")
    G = [[field.ring.coerce(x) for x in row] for row in V]
    elems = list(field.elements())
    for x in itertools.product(elems, repeat=n):
        if any(c for c in x) and quadratic_value(G, list(x)) == 0:
            return False
    return True


# --- maximality -----------------------------------------------------------------


@dataclass(frozen=True)
class MaximalityWitness:
    """Why a lattice is not maximal, with a vector y such that L + <y> is integral."""

    kind: str  # "non_elementary" | "isotropic"
    vector: Tuple[Fraction, ...]
    divisor: Optional[int] = None
    disc_element: Optional[Tuple[int, ...]] = None


def is_maximal(L: QuadLattice):
    """(True, None) if L is maximal, else (False, MaximalityWitness)."""
    p = L.p
    D = discriminant_form(L)
    for o, g in zip(D.orders, D.generators):
        if o > p:
            # g of order p^a (a >= 2): y = p^(a-1) g lies in L^v, and Q(y) is integral
            y = tuple(x * (o // p) for x in g)
            return False, MaximalityWitness("non_elementary", y, divisor=o)
    for c in D.elements():
        if any(c) and D.value(c) == 0:
            y = tuple(D.lift(c))
            return False, MaximalityWitness("isotropic", y, disc_element=tuple(c))
    return True, None


def extends_integrally(L: QuadLattice, y) -> bool:
    """True iff y is not in L and L + <y> still has p-integral Q."""
    p = L.p
    if in_lattice(y, p):
        return False
    B = L.gram_matrix()
    if not all(is_p_integral(x, p) for x in la.mat_vec(B, y)):
        return False
    return is_p_integral(la.bilinear(y, B, y) / 2, p)


# --- Lie algebra extension ------------------------------------------------------


def _pair(G, u, v):
    s = la.bilinear(u, G, v)
    return la._unit_of(G) * s if isinstance(s, int) else s


def _lin_comb(coeffs, vecs, zero):
    n = len(vecs[0]) if vecs else 0
    out = [zero] * n
    for c, v in zip(coeffs, vecs):
        if c != 0:
            out = [a + c * b for a, b in zip(out, v)]
    return out


def _perp(G, vecs, dim):
    """Basis of the orthogonal complement of span(vecs)."""
    if not vecs:
        return [list(r) for r in la.identity(dim, *_one_zero(G))]
    return la.nullspace([la.mat_vec(la.transpose(G), v) for v in vecs])


def _one_zero(G):
    one = la._unit_of(G)
    return one, one * 0


def _perp_within(G, vecs, ambient):
    """Basis of {x in span(ambient) : x ⟂ vecs}."""
    _, zero = _one_zero(G)
    if not vecs:
        return [list(a) for a in ambient]
    M = [[_pair(G, a, v) for a in ambient] for v in vecs]
    sols = la.nullspace(M)
    return [_lin_comb(s, ambient, zero) for s in sols]


def _gram_of(G, vecs):
    return [[_pair(G, u, v) for v in vecs] for u in vecs]


def dual_isotropic(G, R, ambient):
    """Isotropic vectors n'_i in span(ambient), mutually orthogonal, with [n'_i, r_j] = δ_ij."""
    one, zero = _one_zero(G)
    out = []
    for i, r in enumerate(R):
        rows = [[_pair(G, a, rr) for a in ambient] for rr in R] + [[_pair(G, a, n) for a in ambient] for n in out]
        rhs = [one if j == i else zero for j in range(len(R))] + [zero] * len(out)
        c = la.solve(rows, rhs)
        if c is None:
            raise PreconditionError("ambient space does not pair perfectly with the isotropic subspace")
        y = _lin_comb(c, ambient, zero)
        qy = _pair(G, y, y) / 2
        y = [a - qy * b for a, b in zip(y, r)]
        out.append(y)
    return out


def _matrix_from_basis(basis, images):
    """Matrix X with X b_i = images_i (b_i a basis of the full space)."""
    Bm = la.from_columns(basis)
    Im = la.from_columns(images)
    return la.mat_mul(Im, la.inverse(Bm))


def _extend_nondegenerate(G, N, F):
    """Case: G restricted to N is nondegenerate; X = f on N and X(N^perp) ⊂ N."""
    n = len(G)
    _, zero = _one_zero(G)
    GN = _gram_of(G, N)
    comp = _perp(G, N, n)
    images = list(F)
    for z in comp:
        rhs = [-_pair(G, z, f) for f in F]
        a = la.solve(la.transpose(GN), rhs)
        images.append(_lin_comb(a, N, zero))
    return _matrix_from_basis(list(N) + comp, images)


def _extend_isotropic(G, N, F):
    """Case: N isotropic.  Split M = N + P + N' and use -f^dual on P and N'."""
    n = len(G)
    _, zero = _one_zero(G)
    Np = dual_isotropic(G, N, [list(r) for r in la.identity(n, *_one_zero(G))])
    P = _perp(G, list(N) + Np, n)
    images = list(F)
    for z in P:
        images.append(_lin_comb([-_pair(G, z, f) for f in F], Np, zero))
    for y in Np:
        images.append(_lin_comb([-_pair(G, y, f) for f in F], Np, zero))
    return _matrix_from_basis(list(N) + P + Np, images)


def _extend_coisotropic(G, R, P, F1, Np):
    """Case: S = R + P with R = S^perp isotropic, f = 0 on R and f(P) ⊂ R."""
    _, zero = _one_zero(G)
    GP = _gram_of(G, P)
    images = [[zero] * len(G) for _ in R] + list(F1)
    for y in Np:
        rhs = [-_pair(G, y, f) for f in F1]
        a = la.solve(la.transpose(GP), rhs)
        images.append(_lin_comb(a, P, zero))
    return _matrix_from_basis(list(R) + list(P) + list(Np), images)


def _apply_on_span(N, F, X, zero):
    return [[a - b for a, b in zip(f, la.mat_vec(X, v))] for v, f in zip(N, F)]


def check_so(G, X) -> bool:
    """[Xv, w] + [v, Xw] = 0 on all basis vectors, i.e. G X is antisymmetric."""
    GX = la.mat_mul(G, X)
    n = len(G)
    return all(GX[i][j] + GX[j][i] == 0 for i in range(n) for j in range(n))


def extend_to_so(gram, N, images):
    """Extend a compatible map f: N -> M to an element X of so(M).

    ``gram`` is the (nondegenerate) bilinear Gram matrix over a field, ``N`` a
    list of linearly independent vectors and ``images[i] = f(N[i])``.
    Follows the three-case reduction: radical N0 of N first (isotropic case),
    then N/N0 inside N0^perp/N0 (nondegenerate case), then the remainder
    landing in N0 (coisotropic case).
    """
    G = [list(r) for r in gram]
    n = len(G)
    one, zero = _one_zero(G)
    N = [list(v) for v in N]
    F = [list(v) for v in images]
    F_orig = [list(v) for v in images]
    if len(N) != len(F):
        raise PreconditionError("need one image per vector of N")
    if la.det(G) == 0:
        raise PreconditionError("ambient form must be nondegenerate")
    if N and la.rank(N) != len(N):
        raise PreconditionError("N must be given by independent vectors")
    for i in range(len(N)):
        for j in range(len(N)):
            if _pair(G, F[i], N[j]) + _pair(G, N[i], F[j]) != 0:
                raise PreconditionError("f is not skew on N")
    if not N:
        return [[zero] * n for _ in range(n)]

    GN = _gram_of(G, N)
    rad = la.nullspace(GN)
    N0 = [_lin_comb(c, N, zero) for c in rad]
    if not N0:
        X = _extend_nondegenerate(G, N, F)
        _check_extension(G, X, N, images)
        return X

    # N1: complement of N0 inside N
    N1 = []
    cur = list(N0)
    for v in N:
        if la.rank(cur + [v]) > len(cur):
            cur.append(v)
            N1.append(v)

    def f_on(v):
        c = la.solve(la.transpose(N), v)
        return _lin_comb(c, F, zero)

    # step 1: isotropic case on N0
    X1 = _extend_isotropic(G, N0, [f_on(v) for v in N0])
    F = _apply_on_span(N, F, X1, zero)

    def f_on2(v, FF):
        c = la.solve(la.transpose(N), v)
        return _lin_comb(c, FF, zero)

    full = [list(r) for r in la.identity(n, one, zero)]
    ambient = _perp_within(G, N1, full) if N1 else full
    Np = dual_isotropic(G, N0, ambient)
    P = _perp(G, N0 + Np, n)

    X = X1
    if N1:
        # step 2: nondegenerate case in N0^perp / N0 ≅ P
        decomp_basis = N0 + P
        GP = _gram_of(G, P)
        N1_P, F1_P = [], []
        for v in N1:
            fv = f_on2(v, F)
            c = la.solve(la.transpose(decomp_basis), fv)
            if c is None:
                raise InvariantViolation("f(N) left N0^perp after the isotropic step")
            F1_P.append(c[len(N0):])
            N1_P.append(la.solve(la.transpose(P), v))
        Xbar = _extend_nondegenerate(GP, N1_P, F1_P)
        images = [[zero] * n for _ in N0]
        for j in range(len(P)):
            col = [Xbar[i][j] for i in range(len(P))]
            images.append(_lin_comb(col, P, zero))
        images += [[zero] * n for _ in Np]
        X2 = _matrix_from_basis(N0 + P + Np, images)
        F = _apply_on_span(N, F, X2, zero)
        X = la.mat_add(X, X2)

        # step 3: coisotropic case on N0^perp = N0 + P, f extended by 0
        Pbasis = list(N1)
        cur = list(N1)
        for v in P:
            if la.rank(cur + [v]) > len(cur):
                cur.append(v)
                Pbasis.append(v)
        F1 = [f_on2(v, F) for v in N1] + [[zero] * n for _ in Pbasis[len(N1):]]
        X3 = _extend_coisotropic(G, N0, Pbasis, F1, Np)
        X = la.mat_add(X, X3)
    _check_extension(G, X, N, F_orig)
    return X


def _check_extension(G, X, N, F):
    if not check_so(G, X):
        raise InvariantViolation("extension is not in so(M)")
    for v, f in zip(N, F):
        if la.mat_vec(X, v) != list(f):
            raise InvariantViolation("extension does not restrict to f")


# --- Witt extension --------------------------------------------------------------


def _orthogonal_basis(G, basis):
    """Orthogonal basis of span(basis) (nondegenerate) as coefficient combos of ``basis``."""
    one, zero = _one_zero(G)
    k = len(basis)
    combos = [[one if i == j else zero for i in range(k)] for j in range(k)]
    out = []

    def vec(c):
        return _lin_comb(c, basis, zero)

    while combos:
        pick = None
        cands = [(i, None) for i in range(len(combos))] + [
            (i, j) for i in range(len(combos)) for j in range(i + 1, len(combos))
        ]
        for i, j in cands:
            c = combos[i] if j is None else [a + b for a, b in zip(combos[i], combos[j])]
            v = vec(c)
            if _pair(G, v, v) != 0:
                pick = (i, c, v)
                break
        if pick is None:
            raise PreconditionError("subspace is degenerate")
        i, c, v = pick
        vv = _pair(G, v, v)
        rest = []
        for idx, d in enumerate(combos):
            if idx == i:
                continue
            w = vec(d)
            t = _pair(G, w, v) / vv
            rest.append([a - t * b for a, b in zip(d, c)])
        out.append(c)
        combos = rest
    return out


def _reflection(G, a):
    """Matrix of y -> y - ([y, a] / Q(a)) a."""
    n = len(G)
    one, zero = _one_zero(G)
    qa = _pair(G, a, a) / 2
    Ga = la.mat_vec(G, a)
    return [[(one if i == j else zero) - a[i] * Ga[j] / qa for j in range(n)] for i in range(n)]


def witt_extend(gram, iota0, iota):
    """An isometry g of M with g(iota0[i]) = iota[i] for every source basis vector."""
    G = [list(r) for r in gram]
    n = len(G)
    one, zero = _one_zero(G)
    U0 = [list(v) for v in iota0]
    U1 = [list(v) for v in iota]
    if len(U0) != len(U1):
        raise PreconditionError("embeddings have different source dimensions")
    if la.det(G) == 0:
        raise PreconditionError("ambient form must be nondegenerate")
    if U0 and (la.rank(U0) != len(U0) or la.rank(U1) != len(U1)):
        raise PreconditionError("embeddings must be injective")
    G0, G1 = _gram_of(G, U0), _gram_of(G, U1)
    if G0 != G1:
        raise PreconditionError("embeddings are not isometric to the same source")
    if not U0:
        return la.identity(n, one, zero)
    # split the source into radical + complement, identically on both sides
    rad = la.nullspace(G0)
    comp = []
    cur = list(rad)
    k = len(U0)
    for j in range(k):
        e = [one if i == j else zero for i in range(k)]
        if la.rank(cur + [e]) > len(cur):
            cur.append(e)
            comp.append(e)
    W0 = [_lin_comb(c, U0, zero) for c in comp]
    W1 = [_lin_comb(c, U1, zero) for c in comp]
    R0 = [_lin_comb(c, U0, zero) for c in rad]
    R1 = [_lin_comb(c, U1, zero) for c in rad]
    full = [list(r) for r in la.identity(n, one, zero)]
    H0 = dual_isotropic(G, R0, _perp_within(G, W0, full)) if R0 else []
    H1 = dual_isotropic(G, R1, _perp_within(G, W1, full)) if R1 else []
    S0, S1 = W0 + R0 + H0, W1 + R1 + H1
    if _gram_of(G, S0) != _gram_of(G, S1):
        raise InvariantViolation("hyperbolic enlargement is not isometric")
    combos = _orthogonal_basis(G, S0)
    us = [_lin_comb(c, S0, zero) for c in combos]
    vs = [_lin_comb(c, S1, zero) for c in combos]
    g = la.identity(n, one, zero)
    for u, v in zip(us, vs):
        x = la.mat_vec(g, u)
        if x == v:
            continue
        d = [a - b for a, b in zip(x, v)]
        if _pair(G, d, d) != 0:
            h = _reflection(G, d)
        else:
            s = [a + b for a, b in zip(x, v)]
            h = la.mat_mul(_reflection(G, v), _reflection(G, s))
        g = la.mat_mul(h, g)
    gt = la.transpose(g)
    if la.mat_mul(la.mat_mul(gt, G), g) != G:
        raise InvariantViolation("Witt extension is not an isometry")
    for a, b in zip(U0, U1):
        if la.mat_vec(g, a) != b:
            raise InvariantViolation("Witt extension does not extend the embedding")
    return g


# --- action on the discriminant --------------------------------------------------


def acts_trivially_on_disc(L: QuadLattice, g) -> bool:
    """For an isometry g with gL = L: does g fix every element of disc(L)?"""
    p = L.p
    g = _frac_matrix(g)
    B = L.gram_matrix()
    if la.mat_mul(la.mat_mul(la.transpose(g), B), g) != B:
        raise PreconditionError("g is not an isometry")
    if not all(is_p_integral(x, p) for row in g for x in row) or not is_p_unit(la.det(g), p):
        raise PreconditionError("g does not preserve the lattice")
    D = discriminant_form(L)
    for x in D.generators:
        gx = la.mat_vec(g, list(x))
        if not in_lattice([a - b for a, b in zip(gx, x)], p):
            return False
    return True
