"""Dense exact linear algebra on lists of lists.

Entries can be ``Fraction``, ``int`` or :class:`~spinlattice.exact.WittElem`.
Elimination routines only pivot on invertible entries, so they work over
fields (Q, F_q) and, for unit-determinant systems, over W/p^k.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import RankError
from .exact import INF, WittElem


def zeros(n, m, zero=0):
    return [[zero] * m for _ in range(n)]


def identity(n, one=1, zero=0):
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def transpose(A):
    return [list(col) for col in zip(*A)] if A else []


def mat_mul(A, B):
    Bt = transpose(B)
    return [[_dot(row, col) for col in Bt] for row in A]


def mat_vec(A, v):
    return [_dot(row, v) for row in A]


def _dot(u, v):
    s = 0
    for a, b in zip(u, v):
        if a and b:
            s = a * b + s
    if type(s) is int and s == 0 and u and v:
        s = u[0] * v[0] * 0  # zero of the entry type, never a bare int
    return s


def mat_add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scale(c, A):
    return [[c * a for a in row] for row in A]


def columns(A):
    return transpose(A)


def from_columns(cols):
    return transpose(cols)


def bilinear(u, G, v):
    return _dot(u, mat_vec(G, v))


def map_entries(f, A):
    return [[f(a) for a in row] for row in A]


def is_zero_matrix(A):
    return all(a == 0 for row in A for a in row)


def _invertible(x) -> bool:
    if isinstance(x, WittElem):
        return x.is_unit()
    return x != 0


def _one_like(x):
    if isinstance(x, WittElem):
        return x.ring.one
    return Fraction(1)


def _unit_of(A):
    """Multiplicative identity matching the entry type of matrix A."""
    for row in A:
        for x in row:
            if isinstance(x, WittElem):
                return x.ring.one
    return Fraction(1)


def rref(A):
    """Reduced row echelon form; returns (R, pivot_columns)."""
    R = [list(row) for row in A]
    n = len(R)
    m = len(R[0]) if n else 0
    pivots = []
    r = 0
    for c in range(m):
        piv = None
        for i in range(r, n):
            if _invertible(R[i][c]):
                piv = i
                break
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = _one_like(R[r][c]) / R[r][c]
        R[r] = [inv * x for x in R[r]]
        for i in range(n):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [x - f * y for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == n:
            break
    return R, pivots


def rank(A) -> int:
    if not A or not A[0]:
        return 0
    return len(rref(A)[1])


def nullspace(A, ncols=None):
    """Basis of {x : A x = 0} (as a list of vectors)."""
    if not A:
        one = Fraction(1)
        return [[one if i == j else 0 * one for i in range(ncols)] for j in range(ncols)]
    one = _unit_of(A)
    zero = one * 0
    m = len(A[0])
    R, pivots = rref(A)
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for f in free:
        v = [zero] * m
        v[f] = one
        for r, pc in enumerate(pivots):
            v[pc] = -R[r][f]
        basis.append(v)
    return basis


def solve(A, b):
    """Some solution x of A x = b, or None."""
    n = len(A)
    m = len(A[0]) if n else 0
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    R, pivots = rref(aug)
    if m in pivots:
        return None
    for r in range(len(pivots), n):
        if R[r][m] != 0:
            return None
    zero = _unit_of(aug) * 0
    x = [zero] * m
    for r, pc in enumerate(pivots):
        x[pc] = R[r][m]
    return x


def inverse(A):
    n = len(A)
    one = _unit_of(A)
    zero = one * 0
    aug = [list(A[i]) + [one if i == j else zero for j in range(n)] for i in range(n)]
    R, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise RankError("matrix is not invertible")
    return [row[n:] for row in R]


def det(A):
    """Determinant by elimination (over a field, or unit pivots over W/p^k)."""
    n = len(A)
    if n == 0:
        return 1
    M = [list(row) for row in A]
    d = _unit_of(M)
    for c in range(n):
        piv = None
        for i in range(c, n):
            if _invertible(M[i][c]):
                piv = i
                break
        if piv is None:
            if all(M[i][c] == 0 for i in range(c, n)):
                return M[0][0] * 0
            raise RankError("no invertible pivot; use witt_elementary_valuations")
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            d = -d
        d = d * M[c][c]
        inv = _one_like(M[c][c]) / M[c][c]
        for i in range(c + 1, n):
            if M[i][c] != 0:
                f = M[i][c] * inv
                M[i] = [x - f * y for x, y in zip(M[i], M[c])]
    return d


def det_int(A) -> int:
    """Bareiss fraction-free determinant of an integer matrix."""
    n = len(A)
    if n == 0:
        return 1
    M = [list(map(int, row)) for row in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def column_space(A):
    """Basis (list of vectors) of the span of the columns of A."""
    if not A or not A[0]:
        return []
    R, pivots = rref(transpose(A))
    return [R[i] for i in range(len(pivots))]


def span_basis(vectors):
    """Row-reduced basis of span(vectors)."""
    vectors = [list(v) for v in vectors]
    if not vectors:
        return []
    R, pivots = rref(vectors)
    return [R[i] for i in range(len(pivots))]


def in_span(basis, v) -> bool:
    if not basis:
        return all(x == 0 for x in v)
    return rank(basis + [list(v)]) == rank(basis)


def subspace_equal(U, V) -> bool:
    rU, rV = rank(U) if U else 0, rank(V) if V else 0
    if rU != rV:
        return False
    if rU == 0:
        return True
    return rank(U + V) == rU


def intersect(U, V, dim):
    """Basis of span(U) ∩ span(V) inside a space of dimension ``dim``."""
    if not U or not V:
        return []
    # solve sum a_i u_i = sum b_j v_j
    M = transpose([list(u) for u in U] + [[-x for x in v] for v in V])
    sols = nullspace(M)
    out = []
    for s in sols:
        a = s[: len(U)]
        vec = [sum((a[i] * U[i][c] for i in range(len(U))), U[0][0] * 0) for c in range(dim)]
        out.append(vec)
    return span_basis(out)


# --- Smith normal form over Z -------------------------------------------------


def smith_normal_form(M):
    """Return (U, D, V) with U*M*V = D diagonal, d_i | d_{i+1}, U and V unimodular.

    ``M`` must be a nonsingular square integer matrix.
    """
    n = len(M)
    if any(len(row) != n for row in M):
        raise RankError("smith_normal_form expects a square matrix")
    A = [list(map(int, row)) for row in M]
    if det_int(A) == 0:
        raise RankError("matrix is singular")
    U = identity(n)
    V = identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, c):
        A[dst] = [x + c * y for x, y in zip(A[dst], A[src])]
        U[dst] = [x + c * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, c):
        for row in A:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    for t in range(n):
        while True:
            # smallest nonzero entry of the trailing block goes to (t, t)
            best = None
            for i in range(t, n):
                for j in range(t, n):
                    if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                        best = (i, j)
            i, j = best
            swap_rows(t, i)
            swap_cols(t, j)
            piv = A[t][t]
            dirty = False
            for i in range(t + 1, n):
                q = A[i][t] // piv
                if q:
                    add_row(i, t, -q)
                if A[i][t]:
                    dirty = True
            for j in range(t + 1, n):
                q = A[t][j] // piv
                if q:
                    add_col(j, t, -q)
                if A[t][j]:
                    dirty = True
            if dirty:
                continue
            bad = None
            for i in range(t + 1, n):
                for j in range(t + 1, n):
                    if A[i][j] % piv:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
    return U, A, V


def elementary_divisors(M):
    _, D, _ = smith_normal_form(M)
    return [D[i][i] for i in range(len(D))]


# --- valuations over W/p^k ----------------------------------------------------


def witt_elementary_valuations(A):
    """Valuations of the elementary divisors of a square matrix over W/p^k.

    Entries that vanish mod p^k give ``INF``; results are exact as long as the
    finite valuations stay below the precision k.
    """
    M = [list(row) for row in A]
    n = len(M)
    if n == 0:
        return []
    ring = M[0][0].ring
    out = []
    rows = list(range(n))
    cols = list(range(n))
    while rows:
        best = None
        bv = INF
        for i in rows:
            for j in cols:
                v = M[i][j].valuation()
                if v < bv:
                    bv, best = v, (i, j)
        if best is None or bv >= ring.k:
            out.extend([INF] * len(rows))
            break
        i0, j0 = best
        x = M[i0][j0]
        xu = x.divide_by_p(bv) if bv else x
        for i in rows:
            if i == i0 or M[i][j0].is_zero():
                continue
            y = M[i][j0]
            yu = y.divide_by_p(bv) if bv else y
            q = yu / xu
            q = WittElem(ring, q.a, q.b)
            M[i] = [a - q * b for a, b in zip(M[i], M[i0])]
        out.append(bv)
        rows.remove(i0)
        cols.remove(j0)
    return sorted(out, key=lambda v: (v is INF, v if v is not INF else 0))


def witt_smith(A):
    """Diagonal reduction over the chain ring W/p^k.

    Returns ``(U, d, V)`` with ``U A V`` diagonal with entries ``d`` (each
    ``p^e * unit`` or zero) and U, V invertible.  Pivots are chosen with
    minimal valuation, so every elimination quotient is exact.
    """
    n = len(A)
    m = len(A[0]) if n else 0
    if n == 0 or m == 0:
        return [], [], []
    ring = A[0][0].ring
    M = [list(row) for row in A]
    U = identity(n, ring.one, ring.zero)
    V = identity(m, ring.one, ring.zero)
    d = []
    for t in range(min(n, m)):
        best, bv = None, INF
        for i in range(t, n):
            for j in range(t, m):
                v = M[i][j].valuation()
                if v < bv:
                    bv, best = v, (i, j)
        if best is None:
            break
        i0, j0 = best
        M[t], M[i0] = M[i0], M[t]
        U[t], U[i0] = U[i0], U[t]
        for row in M:
            row[t], row[j0] = row[j0], row[t]
        for row in V:
            row[t], row[j0] = row[j0], row[t]
        x = M[t][t]
        xu = x.divide_by_p(bv) if bv else x
        for i in range(t + 1, n):
            if M[i][t].is_zero():
                continue
            y = M[i][t]
            q = (y.divide_by_p(bv) if bv else y) / xu
            q = WittElem(ring, q.a, q.b)
            M[i] = [a - q * b for a, b in zip(M[i], M[t])]
            U[i] = [a - q * b for a, b in zip(U[i], U[t])]
        for j in range(t + 1, m):
            if M[t][j].is_zero():
                continue
            y = M[t][j]
            q = (y.divide_by_p(bv) if bv else y) / xu
            q = WittElem(ring, q.a, q.b)
            for row in M:
                row[j] = row[j] - q * row[t]
            for row in V:
                row[j] = row[j] - q * row[t]
        d.append(M[t][t])
    return U, d, V


class WittModule:
    """The W/p^k-submodule spanned by the columns of a matrix."""

    def __init__(self, A):
        self.n = len(A)
        self.U, self.d, _ = witt_smith(A)
        self.ring = A[0][0].ring

    def length(self) -> int:
        k = self.ring.k
        return sum(k - v for v in (x.valuation() for x in self.d) if v is not INF)

    def contains(self, b) -> bool:
        ub = mat_vec(self.U, b)
        for i, c in enumerate(ub):
            if c == 0:
                continue
            if i >= len(self.d) or self.d[i].is_zero():
                return False
            if c.valuation() < self.d[i].valuation():
                return False
        return True

    def contains_columns(self, B) -> bool:
        return all(self.contains(col) for col in transpose(B))


def witt_module_equal(A, B) -> bool:
    MA, MB = WittModule(A), WittModule(B)
    return MA.length() == MB.length() and MA.contains_columns(B)


# --- lattices over Z_(p) ----------------------------------------------------


def plocal_basis(vectors, p: int):
    """Echelon basis of the Z_(p)-module spanned by rational vectors."""
    from .exact import valuation

    vecs = [list(map(Fraction, v)) for v in vectors if any(x != 0 for x in v)]
    if not vecs:
        return []
    dim = len(vecs[0])
    basis = []
    for c in range(dim):
        best, bv = None, INF
        for idx, v in enumerate(vecs):
            if v[c] != 0:
                val = valuation(v[c], p)
                if val < bv:
                    best, bv = idx, val
        if best is None:
            continue
        piv = vecs.pop(best)
        rest = []
        for v in vecs:
            if v[c] != 0:
                f = v[c] / piv[c]
                v = [a - f * b for a, b in zip(v, piv)]
            if any(x != 0 for x in v):
                rest.append(v)
        vecs = rest
        basis.append(piv)
    return basis


def plocal_lattice_equal(A, B, p: int) -> bool:
    """Do two lists of independent vectors span the same Z_(p)-lattice?"""
    from .exact import is_p_integral

    if len(A) != len(B):
        return False
    if not A:
        return True
    MA, MB = from_columns(A), from_columns(B)
    if rank(MA) != len(A) or rank(MB) != len(B):
        return False
    for X, Y in ((A, MB), (B, MA)):
        for v in X:
            c = solve(Y, list(v))
            if c is None or not all(is_p_integral(x, p) for x in c):
                return False
    return True
