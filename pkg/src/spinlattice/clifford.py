"""Clifford algebras of (possibly non-diagonal) quadratic lattices.

Basis monomials are bitmasks over {0..m-1}; a mask stands for the ordered
product of its generators in increasing index order.  Products are brought
to this normal form with ``e_i e_i = Q(e_i)`` and
``e_a e_b = -e_b e_a + [e_a, e_b]`` for a > b.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from . import linalg as la
from .errors import (
    DomainError,
    InvariantViolation,
    PreconditionError,
    RankError,
    ResourceLimitError,
)
from .exact import WittElem, WittRing, is_p_integral, is_p_unit

MAX_RANK = 8


def _popcount(x: int) -> int:
    return bin(x).count("1")


def mask_indices(mask: int):
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def _mask_of(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


class CliffordAlgebra:
    """C(L) for a bilinear Gram matrix with entries Fraction/int or WittElem."""

    def __init__(self, gram, p: int | None = None):
        m = len(gram)
        if m > MAX_RANK:
            raise ResourceLimitError(f"rank {m} exceeds the Clifford cap {MAX_RANK}")
        self.one = la._unit_of(gram)
        self.zero = self.one * 0
        self.gram = [[self.one * x for x in row] for row in gram]
        self.m = m
        self.p = p if p is not None else (self.one.ring.p if isinstance(self.one, WittElem) else None)
        self.qdiag = [self.gram[i][i] / 2 for i in range(m)]
        self.basis = sorted(range(1 << m), key=lambda s: (_popcount(s), mask_indices(s)))
        self.index = {s: i for i, s in enumerate(self.basis)}
        self._words: Dict[tuple, Dict[int, object]] = {}
        self._prod: Dict[tuple, Dict[int, object]] = {}
        self._star: Dict[int, Dict[int, object]] = {}
        self._trace: Optional[List[object]] = None
        self._lmat_cache: Dict[int, list] = {}

    @classmethod
    def from_lattice(cls, L) -> "CliffordAlgebra":
        return cls(L.gram_matrix(), L.p)

    @property
    def dim(self) -> int:
        return 1 << self.m

    def is_witt(self) -> bool:
        return isinstance(self.one, WittElem)

    # -- normal ordering --------------------------------------------------

    def _normal(self, word: tuple) -> Dict[int, object]:
        if word in self._words:
            return self._words[word]
        pos = None
        for i in range(len(word) - 1):
            if word[i] >= word[i + 1]:
                pos = i
                break
        if pos is None:
            res = {_mask_of(word): self.one}
        else:
            a, b = word[pos], word[pos + 1]
            rest = word[:pos] + word[pos + 2:]
            if a == b:
                res = _scale(self._normal(rest), self.qdiag[a])
            else:
                swapped = word[:pos] + (b, a) + word[pos + 2:]
                res = _scale(self._normal(swapped), -self.one)
                if self.gram[a][b] != 0:
                    res = _add(res, _scale(self._normal(rest), self.gram[a][b]))
        self._words[word] = res
        return res

    def mono_mul(self, s: int, t: int) -> Dict[int, object]:
        key = (s, t)
        if key not in self._prod:
            self._prod[key] = self._normal(mask_indices(s) + mask_indices(t))
        return self._prod[key]

    def mono_star(self, s: int) -> Dict[int, object]:
        if s not in self._star:
            self._star[s] = self._normal(tuple(reversed(mask_indices(s))))
        return self._star[s]

    # -- element constructors ---------------------------------------------

    def element(self, coeffs: Dict[int, object]) -> "CliffordElement":
        return CliffordElement(self, coeffs)

    def scalar(self, c) -> "CliffordElement":
        return CliffordElement(self, {0: self.one * c})

    def gen(self, i: int) -> "CliffordElement":
        return CliffordElement(self, {1 << i: self.one})

    def monomial(self, indices) -> "CliffordElement":
        x = self.scalar(1)
        for i in indices:
            x = x * self.gen(i)
        return x

    def vector(self, v: Sequence) -> "CliffordElement":
        return CliffordElement(self, {1 << i: self.one * c for i, c in enumerate(v)})

    def from_coords(self, coords: Sequence) -> "CliffordElement":
        """Element from a coefficient vector in the ``self.basis`` order."""
        return CliffordElement(self, {s: self.one * c for s, c in zip(self.basis, coords)})

    def Q(self, v) -> object:
        return la.bilinear(v, self.gram, v) / 2

    # -- matrices -----------------------------------------------------------

    def left_matrix(self, x: "CliffordElement"):
        """Matrix of h -> x h in the monomial basis (columns = images of basis monomials)."""
        n = self.dim
        M = [[self.zero] * n for _ in range(n)]
        for j, t in enumerate(self.basis):
            for s, c in x.coeffs.items():
                for u, d in self.mono_mul(s, t).items():
                    M[self.index[u]][j] = M[self.index[u]][j] + c * d
        return M

    def gen_matrix(self, i: int):
        if i not in self._lmat_cache:
            self._lmat_cache[i] = self.left_matrix(self.gen(i))
        return self._lmat_cache[i]

    def monomial_traces(self):
        """Regular trace of left multiplication by each basis monomial."""
        if self._trace is None:
            tr = []
            for s in self.basis:
                acc = self.zero
                for t in self.basis:
                    acc = acc + self.mono_mul(s, t).get(t, self.zero)
                tr.append(acc)
            self._trace = tr
        return self._trace

    def regular_trace(self, x: "CliffordElement"):
        tr = self.monomial_traces()
        acc = self.zero
        for s, c in x.coeffs.items():
            acc = acc + c * tr[self.index[s]]
        return acc

    def trd(self, x: "CliffordElement"):
        """Reduced trace: regular trace divided by 2^floor(m/2)."""
        return self.regular_trace(x) / (2 ** (self.m // 2))


def _scale(d: Dict[int, object], c) -> Dict[int, object]:
    return {k: v * c for k, v in d.items() if v * c != 0}


def _add(a: Dict[int, object], b: Dict[int, object]) -> Dict[int, object]:
    out = dict(a)
    for k, v in b.items():
        out[k] = out[k] + v if k in out else v
    return {k: v for k, v in out.items() if v != 0}


class CliffordElement:
    __slots__ = ("alg", "coeffs")

    def __init__(self, alg: CliffordAlgebra, coeffs: Dict[int, object]):
        self.alg = alg
        self.coeffs = {s: c for s, c in coeffs.items() if c != 0}

    def _check(self, other):
        if not isinstance(other, CliffordElement):
            return self.alg.scalar(other)
        if other.alg is not self.alg:
            raise PreconditionError("elements belong to different algebras")
        return other

    def __add__(self, other):
        o = self._check(other)
        return CliffordElement(self.alg, _add(self.coeffs, o.coeffs))

    __radd__ = __add__

    def __neg__(self):
        return CliffordElement(self.alg, {s: -c for s, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if not isinstance(other, CliffordElement):
            return CliffordElement(self.alg, {s: c * other for s, c in self.coeffs.items()})
        return cl_mul(self, other)

    def __rmul__(self, other):
        return CliffordElement(self.alg, {s: other * c for s, c in self.coeffs.items()})

    def __eq__(self, other):
        try:
            o = self._check(other)
        except PreconditionError:
            return False
        return not (self - o).coeffs

    def __hash__(self):
        return hash(tuple(sorted((s, repr(c)) for s, c in self.coeffs.items())))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for s in self.alg.basis:
            if s in self.coeffs:
                mono = "*".join(f"e{i + 1}" for i in mask_indices(s)) or "1"
                parts.append(f"{self.coeffs[s]}*{mono}")
        return " + ".join(parts)

    def coords(self):
        return [self.coeffs.get(s, self.alg.zero) for s in self.alg.basis]

    def scalar_part(self):
        return self.coeffs.get(0, self.alg.zero)

    def is_scalar(self) -> bool:
        return all(s == 0 for s in self.coeffs)

    def is_even(self) -> bool:
        return all(_popcount(s) % 2 == 0 for s in self.coeffs)

    def is_odd(self) -> bool:
        return all(_popcount(s) % 2 == 1 for s in self.coeffs)

    def vector_part(self):
        """Coordinates in e_1..e_m if the element lies in L, else None."""
        if any(_popcount(s) != 1 for s in self.coeffs):
            return None
        return [self.coeffs.get(1 << i, self.alg.zero) for i in range(self.alg.m)]

    def even_part(self):
        return CliffordElement(self.alg, {s: c for s, c in self.coeffs.items() if _popcount(s) % 2 == 0})

    def odd_part(self):
        return CliffordElement(self.alg, {s: c for s, c in self.coeffs.items() if _popcount(s) % 2 == 1})


def cl_mul(x: CliffordElement, y: CliffordElement) -> CliffordElement:
    if x.alg is not y.alg:
        raise PreconditionError("elements belong to different algebras")
    alg = x.alg
    out: Dict[int, object] = {}
    for s, a in x.coeffs.items():
        for t, b in y.coeffs.items():
            ab = a * b
            for u, c in alg.mono_mul(s, t).items():
                out[u] = out[u] + ab * c if u in out else ab * c
    return CliffordElement(alg, out)


def star(x: CliffordElement) -> CliffordElement:
    """Main anti-involution: identity on L, reverses products."""
    alg = x.alg
    out: Dict[int, object] = {}
    for s, a in x.coeffs.items():
        for u, c in alg.mono_star(s).items():
            out[u] = out[u] + a * c if u in out else a * c
    return CliffordElement(alg, out)


# --- invertibility, spinor norm, GSpin ---------------------------------------


def inverse(x: CliffordElement) -> CliffordElement:
    """Two-sided inverse, decided through the left-multiplication matrix."""
    alg = x.alg
    try:
        Minv = la.inverse(alg.left_matrix(x))
    except RankError as exc:
        raise DomainError("element is not invertible") from exc
    col = [Minv[i][alg.index[0]] for i in range(alg.dim)]
    return alg.from_coords(col)


def is_invertible(x: CliffordElement) -> bool:
    M = x.alg.left_matrix(x)
    try:
        la.inverse(M)
    except RankError:
        return False
    return True


def spinor_norm(x: CliffordElement):
    """nu(x) = x* x when that is a scalar; ``None`` when it is not.

    Raises DomainError for non-invertible x and PreconditionError for odd parts.
    """
    if not x.is_even():
        raise PreconditionError("spinor norm is defined on the even part")
    if not is_invertible(x):
        raise DomainError("element is not invertible")
    y = star(x) * x
    if not y.is_scalar():
        return None
    return y.scalar_part()


@dataclass
class GSpinResult:
    ok: bool
    matrix: Optional[list] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def conjugation_matrix(x: CliffordElement, xinv: CliffordElement | None = None):
    """Matrix of v -> x v x^{-1} on L, or None if L is not preserved."""
    alg = x.alg
    xinv = inverse(x) if xinv is None else xinv
    cols = []
    for i in range(alg.m):
        c = (x * alg.gen(i) * xinv).vector_part()
        if c is None:
            return None
        cols.append(c)
    return la.from_columns(cols)


def is_gspin(x: CliffordElement) -> GSpinResult:
    if not x.is_even():
        return GSpinResult(False, None, "not in the even part")
    if not is_invertible(x):
        raise DomainError("element is not invertible")
    alg = x.alg
    M = conjugation_matrix(x)
    if M is None:
        return GSpinResult(False, None, "conjugation does not preserve L")
    if alg.is_witt():
        if not la.det(M).is_unit():
            return GSpinResult(False, M, "determinant is not a unit")
    elif alg.p is not None:
        if not all(is_p_integral(a, alg.p) for row in M for a in row):
            return GSpinResult(False, M, "matrix is not p-integral")
        if not is_p_unit(la.det(M), alg.p):
            return GSpinResult(False, M, "determinant is not a p-unit")
    return GSpinResult(True, M, "")


def reflection_matrix(gram, w):
    """tau_w(v) = v - ([v, w] / Q(w)) w."""
    n = len(gram)
    one = la._unit_of(gram)
    qw = la.bilinear(w, gram, w) / 2
    Gw = la.mat_vec(gram, w)
    return [[(one if i == j else one * 0) - w[i] * Gw[j] / qw for j in range(n)] for i in range(n)]


# --- the projector onto L inside End(H) ----------------------------------------


@dataclass
class ProjectorTensor:
    """pi(phi) = sum_i [phi, e_i] * (A e_i) with the normalized trace pairing.

    Stored in factored form: ``functionals[i]`` is a sparse map (a, b) -> c with
    ``[phi, e_i] = sum c * phi[a][b]``; the images are the left multiplications
    by the dual vectors ``A e_i``.
    """

    alg: CliffordAlgebra
    A: list
    normalizer_exp: int
    functionals: List[Dict[tuple, object]]
    images: List[list] = field(repr=False)

    @property
    def m(self) -> int:
        return self.alg.m

    def coefficients(self, phi) -> list:
        """[phi, e_i] for each i."""
        out = []
        for f in self.functionals:
            acc = self.alg.zero
            for (a, b), c in f.items():
                if phi[a][b] != 0:
                    acc = acc + c * phi[a][b]
            out.append(acc)
        return out

    def vector(self, phi) -> list:
        """pi(phi) as a vector of L (x) Q in the coordinates e_1..e_m."""
        c = self.coefficients(phi)
        return la.mat_vec(self.A, c)

    def apply(self, phi):
        c = self.coefficients(phi)
        n = self.alg.dim
        out = [[self.alg.zero] * n for _ in range(n)]
        for ci, img in zip(c, self.images):
            if ci != 0:
                out = la.mat_add(out, la.mat_scale(ci, img))
        return out

    def rank(self) -> int:
        n = self.alg.dim
        rows = []
        for f in self.functionals:
            row = [self.alg.zero] * (n * n)
            for (a, b), c in f.items():
                row[a * n + b] = c
            rows.append(row)
        return la.rank(rows)

    def trace_pairing(self, phi1, phi2):
        return _trace_product(phi1, phi2) / (2**self.normalizer_exp)


def _trace_product(A, B):
    n = len(A)
    acc = 0
    for a in range(n):
        for b in range(n):
            if A[a][b] != 0 and B[b][a] != 0:
                acc = A[a][b] * B[b][a] + acc
    return acc


def projector_pi(L_or_alg) -> ProjectorTensor:
    alg = L_or_alg if isinstance(L_or_alg, CliffordAlgebra) else CliffordAlgebra.from_lattice(L_or_alg)
    G = alg.gram
    m = alg.m
    try:
        A = la.inverse(G)
    except RankError as exc:
        raise PreconditionError("form is degenerate") from exc
    mats = [alg.gen_matrix(i) for i in range(m)]
    # normalizer: Tr(l_i l_j) = 2^n [e_i, e_j]
    ref = next(((i, j) for i in range(m) for j in range(m) if G[i][j] != 0), None)
    if ref is None:
        raise PreconditionError("form is identically zero")
    i, j = ref
    ratio = _trace_product(mats[i], mats[j]) / G[i][j]
    n_exp = None
    for e in range(0, 2 * m + 1):
        if ratio == 2**e:
            n_exp = e
            break
    if n_exp is None:
        raise InvariantViolation(f"trace ratio {ratio} is not a power of 2")
    for a in range(m):
        for b in range(m):
            if _trace_product(mats[a], mats[b]) != G[a][b] * 2**n_exp:
                raise InvariantViolation("trace pairing does not restrict to the form on L")
    scale = alg.one / (2**n_exp)
    functionals = []
    for M in mats:
        f = {}
        n = alg.dim
        for b in range(n):
            for a in range(n):
                if M[b][a] != 0:
                    f[(a, b)] = M[b][a] * scale
        functionals.append(f)
    images = []
    for k in range(m):
        col = [A[r][k] for r in range(m)]
        images.append(alg.left_matrix(alg.vector(col)))
    return ProjectorTensor(alg, A, n_exp, functionals, images)


def pi_image_lattice(proj: ProjectorTensor):
    """Z_(p)-basis (vectors in e-coordinates) of pi applied to the integral End(H)."""
    p = proj.alg.p
    if p is None or proj.alg.is_witt():
        raise PreconditionError("needs a rational algebra with a prime")
    vecs = set()
    for f in proj.functionals:
        for (a, b) in f:
            vecs.add((a, b))
    gens = []
    for a, b in sorted(vecs):
        c = [f.get((a, b), 0) for f in proj.functionals]
        gens.append(la.mat_vec(proj.A, c))
    return la.plocal_basis(gens, p)


def dual_lattice_basis(gram):
    A = la.inverse([[Fraction(x) for x in row] for row in gram])
    return la.transpose(A)


def conjugate_operator(Lg, Lginv, phi):
    return la.mat_mul(la.mat_mul(Lg, phi), Lginv)


# --- symplectic form -------------------------------------------------------------


def psi_delta(delta: CliffordElement):
    """Matrix of psi(x, y) = Trd(x delta y*) on the monomial basis."""
    alg = delta.alg
    if star(delta) != -delta:
        raise PreconditionError("delta must satisfy delta* = -delta")
    if not is_invertible(delta):
        raise PreconditionError("delta must be invertible")
    monos = [alg.element({s: alg.one}) for s in alg.basis]
    stars = [star(e) for e in monos]
    rows = []
    for x in monos:
        xd = x * delta
        rows.append([alg.trd(xd * ys) for ys in stars])
    return rows


def psi_value(Psi, x: CliffordElement, y: CliffordElement):
    return la.bilinear(x.coords(), Psi, y.coords())


def is_alternating(M) -> bool:
    n = len(M)
    return all(M[i][i] == 0 for i in range(n)) and all(
        M[i][j] == -M[j][i] for i in range(n) for j in range(n)
    )


# --- parabolic filtrations -------------------------------------------------------


def _subspace(vectors):
    vs = [list(v) for v in vectors if any(x != 0 for x in v)]
    return la.span_basis(vs) if vs else []


def _image(mats):
    cols = []
    for M in mats:
        cols.extend(la.transpose(M))
    return _subspace(cols)


def _kernel(mats, n):
    if not mats:
        return []
    rows = [list(r) for M in mats for r in M]
    return la.nullspace(rows) if rows else []


def _wedge_ops(alg, vecs, i):
    """Left multiplications by products v_{j1}...v_{ji}, j1 < ... < ji."""
    ops = []
    for J in itertools.combinations(range(len(vecs)), i):
        x = alg.scalar(1)
        for j in J:
            x = x * alg.vector(vecs[j])
        ops.append(alg.left_matrix(x))
    return ops


def _identity(alg):
    return la.identity(alg.dim, alg.one, alg.zero)


@dataclass
class ParabolicFiltration:
    alg: CliffordAlgebra
    L1: list
    L0: list
    Lm1: list
    F: List[list]  # F[i] = F^i H, i = 0..r+1
    E: List[list]  # E[i] = E_i H, i = 0..r
    H: List[list]  # H[i] = H^i, i = 0..r
    checks: Dict[str, bool]

    @property
    def r(self) -> int:
        return len(self.L1)

    def ok(self) -> bool:
        return all(self.checks.values())


def _in_sub(sub, vec) -> bool:
    return la.in_span(sub, vec) if sub else all(x == 0 for x in vec)


def _sub_eq(U, V) -> bool:
    return la.subspace_equal(U, V)


def parabolic_filtration(alg: CliffordAlgebra, L1, L0, Lm1) -> ParabolicFiltration:
    G = alg.gram
    m = alg.m
    L1 = [list(v) for v in L1]
    L0 = [list(v) for v in L0]
    Lm1 = [list(v) for v in Lm1]
    r = len(L1)
    if len(Lm1) != r or r + len(L0) + r != m:
        raise PreconditionError("splitting ranks do not add up")
    if la.rank(L1 + L0 + Lm1) != m:
        raise PreconditionError("L1 + L0 + L-1 is not a direct sum decomposition")

    def pr(u, v):
        return la.bilinear(u, G, v)

    for S, name in ((L1, "L1"), (Lm1, "L-1")):
        for u in S:
            for v in S:
                if pr(u, v) != 0:
                    raise PreconditionError(f"{name} is not isotropic")
    if r and la.det([[pr(u, v) for v in Lm1] for u in L1]) == 0:
        raise PreconditionError("L-1 does not pair perfectly with L1")
    for w in L0:
        if any(pr(w, v) != 0 for v in L1 + Lm1):
            raise PreconditionError("L0 is not orthogonal to L1 + L-1")

    N = alg.dim
    full = _identity(alg)

    def im_wedge(vecs, i):
        if i == 0:
            return _subspace(full)
        if i > len(vecs):
            return []
        return _image(_wedge_ops(alg, vecs, i))

    def ker_wedge(vecs, j):
        if j == 0:
            return []
        if j > len(vecs):
            return _subspace(full)
        return _subspace(_kernel(_wedge_ops(alg, vecs, j), N))

    checks: Dict[str, bool] = {}
    F = [im_wedge(L1, i) for i in range(r + 2)]
    for i in range(r + 2):
        checks[f"im_ker_L1_{i}"] = _sub_eq(F[i], ker_wedge(L1, r - i + 1))
    for i in range(1, r + 2):
        checks[f"F_decreasing_{i}"] = all(_in_sub(F[i - 1], v) for v in F[i])
    E = []
    for i in range(r + 1):
        Ei = ker_wedge(Lm1, i + 1)
        checks[f"E_ker_im_{i}"] = _sub_eq(Ei, im_wedge(Lm1, r - i))
        E.append(Ei)
    Hs = [la.intersect(E[i], F[i], N) if E[i] and F[i] else [] for i in range(r + 1)]
    allv = [v for h in Hs for v in h]
    checks["H_direct_sum"] = sum(len(h) for h in Hs) == N and (la.rank(allv) if allv else 0) == N
    for i in range(r + 1):
        tail = [v for h in Hs[i:] for v in h]
        checks[f"F_split_{i}"] = _sub_eq(F[i], _subspace(tail))

    def target(i):
        return Hs[i] if 0 <= i <= r else []

    for shift, vecs, name in ((1, L1, "L1"), (0, L0, "L0"), (-1, Lm1, "L-1")):
        ok = True
        for v in vecs:
            Mv = alg.left_matrix(alg.vector(v))
            for i in range(r + 1):
                for h in Hs[i]:
                    if not _in_sub(target(i + shift), la.mat_vec(Mv, h)):
                        ok = False
        checks[f"mu_table_{name}"] = ok
    return ParabolicFiltration(alg, L1, L0, Lm1, F, E, Hs, checks)


def hodge_multiplication_check(filt: ParabolicFiltration):
    """Left multiplication gr^{-1} L (x) F^1 H -> gr^0 H = H / F^1 H.

    Returns (source_dim, target_dim, rank); an isomorphism iff all three agree.
    """
    alg = filt.alg
    F1 = filt.F[1]
    images = []
    for v in filt.Lm1:
        Mv = alg.left_matrix(alg.vector(v))
        for h in F1:
            images.append(la.mat_vec(Mv, h))
    src = len(filt.Lm1) * len(F1)
    tgt = alg.dim - len(F1)
    base = len(F1)
    total = la.rank(F1 + images) if (F1 or images) else 0
    return src, tgt, total - base


# --- left multiplication by v^{-1} ------------------------------------------------


@dataclass
class VisomReport:
    ok: bool
    alpha: object
    beta: object
    u: list
    u_dual: list
    lengths: Dict[str, int]

    def __bool__(self):
        return self.ok


def _isotropic_lift(G, v, ring):
    """u = v + s x with Q(u) = 0 exactly and s divisible by p."""
    one = ring.one
    n = len(v)
    j = next((j for j in range(n) if la.bilinear(v, G, [one if i == j else ring.zero for i in range(n)]).is_unit()), None)
    if j is None:
        raise PreconditionError("v is degenerate modulo p")
    x = [one if i == j else ring.zero for i in range(n)]
    a = la.bilinear(x, G, x) / 2
    b = la.bilinear(v, G, x)
    c = la.bilinear(v, G, v) / 2
    s = ring.zero
    for _ in range(ring.k + 2):
        g = a * s * s + b * s + c
        if g == 0:
            break
        s = s - g / (2 * a * s + b)
    if a * s * s + b * s + c != 0:
        raise InvariantViolation("isotropic lift did not converge")
    return [vi + s * xi for vi, xi in zip(v, x)], s, x


def visom_check(gram, v, k: int | None = None, u=None, u_dual=None) -> VisomReport:
    """Check v^{-1} H = p^{-1} H^1 + H^0 inside C(L) (x) W/p^k.

    ``gram`` is a self-dual bilinear Gram over W/p^k (or rational, coerced to
    W/p^k when ``k`` and the prime are known through ``v``).  ``H^1`` is the
    image of left multiplication by an isotropic ``u`` lifting v mod p, and
    ``H^0`` that of an isotropic ``u_dual`` with [u, u_dual] = 1.
    """
    ring = next((x.ring for x in list(v) + [a for row in gram for a in row] if isinstance(x, WittElem)), None)
    if ring is None:
        raise PreconditionError("visom_check works over a Witt ring")
    if k is not None and k != ring.k:
        ring = WittRing(ring.p, k)
    p = ring.p
    G = [[ring.coerce(x) for x in row] for row in gram]
    v = [ring.coerce(x) for x in v]
    qv = la.bilinear(v, G, v) / 2
    if qv.valuation() != 1:
        raise PreconditionError(f"need v_p(Q(v)) = 1, got {qv.valuation()}")
    if not la.det(G).is_unit():
        raise PreconditionError("ambient lattice must be self-dual")
    beta = qv.divide_by_p(1)
    if u is None:
        u, s, x = _isotropic_lift(G, v, ring)
    else:
        u = [ring.coerce(a) for a in u]
    if la.bilinear(u, G, u) != 0:
        raise PreconditionError("u must be isotropic")
    diff = [a - b for a, b in zip(v, u)]
    if any(d.valuation() < 1 for d in diff if not d.is_zero()):
        raise PreconditionError("u must reduce to v modulo p")
    w = [d.divide_by_p(1) for d in diff]
    alpha = la.bilinear([a.reduce(ring.k - 1) for a in u], [[a.reduce(ring.k - 1) for a in row] for row in G], w)
    if not alpha.is_unit():
        raise InvariantViolation("[u, w] is not a unit")
    if u_dual is None:
        from .quadlattice import dual_isotropic

        u_dual = dual_isotropic(G, [u], la.identity(len(G), ring.one, ring.zero))[0]
    else:
        u_dual = [ring.coerce(a) for a in u_dual]
    alg = CliffordAlgebra(G)
    Lu = alg.left_matrix(alg.vector(u))
    Ld = alg.left_matrix(alg.vector(u_dual))
    Lv = alg.left_matrix(alg.vector(v))
    n = alg.dim
    H1 = la.WittModule(Lu)
    H0 = la.WittModule(Ld)
    both = [ru + rd for ru, rd in zip(Lu, Ld)]
    target = [ru + [p * x for x in rd] for ru, rd in zip(Lu, Ld)]
    lengths = {
        "H1": H1.length(),
        "H0": H0.length(),
        "H": la.WittModule(both).length(),
        "vH": la.WittModule(Lv).length(),
        "target": la.WittModule(target).length(),
    }
    ok = (
        la.is_zero_matrix(la.mat_mul(Lu, Lu))
        and lengths["H1"] + lengths["H0"] == n * ring.k
        and lengths["H"] == n * ring.k
        and la.witt_module_equal(Lv, target)
    )
    return VisomReport(ok, alpha, beta, u, u_dual, lengths)
