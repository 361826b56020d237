"""Quadric points, normal forms, charts and their verdicts."""

import itertools
import random

import pytest

from spinlattice import linalg as la
from spinlattice.errors import PreconditionError
from spinlattice.exact import FiniteField, WittRing
from spinlattice.localmodel import (
    IRREGULAR,
    QH_MAIN,
    QH_ORDER,
    SMOOTH,
    UNCLASSIFIED,
    Chart,
    chart_at,
    classify_chart_points,
    enumerate_mloc,
    ldiamond,
    mref_ideal,
    mref_vs_mloc,
    normal_form_witt,
    vz_classify,
)
from spinlattice.poly import MultiPoly
from spinlattice.quadlattice import QuadLattice

FIX = QuadLattice.from_diagonal(3, [1, 1, 3, 3])


def affine_count(L, q):
    """Oracle: nonzero affine solutions of Q = 0 over F_q, divided by q - 1."""
    Fq = FiniteField.of_order(q)
    G = L.gram_mod_p(Fq)
    n = 0
    for x in itertools.product(list(Fq.elements()), repeat=L.rank):
        if any(c != 0 for c in x) and la.bilinear(list(x), G, list(x)) == 0:
            n += 1
    return n // (q - 1)


def nondegenerate_count(n, q, disc_square):
    """Points of a nondegenerate quadric in P^{n-1}(F_q)."""
    base = (q ** (n - 1) - 1) // (q - 1)
    if n % 2:
        return base
    eps = 1 if disc_square else -1
    return base + eps * q ** (n // 2 - 1)


def test_fixture_counts():
    p3 = enumerate_mloc(FIX, 3)
    assert len(p3) == 4 == affine_count(FIX, 3)
    assert all(x.singular for x in p3)
    p9 = enumerate_mloc(FIX, 9)
    assert len(p9) == 172 == affine_count(FIX, 9)
    irr = sorted(str(x) for x in p9 if x.irregular)
    assert irr == ["[0:0:1:-w]", "[0:0:1:w]"]


def test_unimodular_points_are_smooth_and_counted():
    rng = random.Random(4)
    for _ in range(12):
        p = rng.choice([3, 5])
        qs = [rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(2, 4))]
        L = QuadLattice.from_diagonal(p, qs)
        det = 1
        for d in qs:
            det *= 2 * d
        n = len(qs)
        for q in (p, p * p):
            pts = enumerate_mloc(L, q)
            assert not any(x.singular for x in pts)
            disc = (-1) ** (n // 2) * det
            square = q == p * p or pow(disc % p, (p - 1) // 2, p) == 1
            assert len(pts) == nondegenerate_count(n, q, square)
            if q**n <= 20000:
                assert len(pts) == affine_count(L, q)


def test_counts_invariant_under_permutation_and_unit_rescaling():
    base = QuadLattice.from_diagonal(3, [1, 1, 3, 3])
    perm = QuadLattice.from_diagonal(3, [3, 1, 3, 1])
    scaled = QuadLattice.from_diagonal(3, [4, 1, 3, 12])  # rescale by squares of units
    for q in (3, 9):
        counts = [len(enumerate_mloc(L, q)) for L in (base, perm, scaled)]
        assert len(set(counts)) == 1
        irr = [sum(x.irregular for x in enumerate_mloc(L, q)) for L in (base, perm, scaled)]
        assert len(set(irr)) == 1


def test_normal_forms():
    assert str(normal_form_witt(QuadLattice.from_diagonal(3, [1, 1, -3])).form) == "X1^2 + X2^2 + 3*Y^2"
    assert str(normal_form_witt(FIX).form) == "X1^2 + X2^2 + 3*Y*Z"
    nf = normal_form_witt(QuadLattice.from_diagonal(3, [1, -1, 2]))
    assert nf.t == 0 and str(nf.form) == "X1^2 + X2^2 + X3^2"
    with pytest.raises(PreconditionError):
        normal_form_witt(QuadLattice.from_diagonal(3, [1, 1, -9]))


def test_normal_form_basis_transports_the_gram():
    for qs in ([1, 1, 3, 3], [2, 1, -3], [1, -1, 5, 10]):
        p = 5 if 5 in qs else 3
        L = QuadLattice.from_diagonal(p, qs)
        nf = normal_form_witt(L, 5)
        R = nf.ring
        B = [[R.coerce(x) for x in row] for row in L.gram]
        assert la.mat_mul(la.mat_mul(la.transpose(nf.basis), B), nf.basis) == nf.gram
        assert all(v == 0 for v in la.witt_elementary_valuations(nf.basis))


def test_t1_singular_chart():
    L = QuadLattice.from_diagonal(3, [1, 1, -3])
    sing = [x for x in enumerate_mloc(L, 3) if x.singular]
    assert len(sing) == 1
    c = chart_at(L, sing[0])
    assert c.relation_strings() == ["u1^2 + u2^2 + 3"]
    assert c.verdict.kind == QH_ORDER and c.ord_p == 2


def test_t2_charts_on_the_fixture():
    nf = normal_form_witt(FIX)
    for x in enumerate_mloc(FIX, 9):
        c = chart_at(FIX, x, nf=nf)
        if not x.singular:
            assert c.verdict.kind == SMOOTH
        elif x.irregular:
            assert c.verdict.kind == IRREGULAR
            assert c.relation_strings()[0] in ("u1^2 + u2^2 + 3*y", "u1^2 + u2^2 + 3*z")
        else:
            assert c.verdict.kind == QH_ORDER and c.ord_p == 2
            (rel,) = c.relation_strings()
            assert rel.startswith("u1^2 + u2^2 + 3*z")


def _chart(names, build, p=3, k=6):
    R = WittRing(p, k)
    gens = MultiPoly.gens(names, R.one)
    return Chart(tuple(names), [build(R, *gens)], R)


def test_vz_classify_examples():
    c = _chart(("u1", "u2"), lambda R, a, b: a * a + b * b + R(3))
    v = vz_classify(c)
    assert v.kind == QH_ORDER and v.ord_p == 2
    c = _chart(("y", "w1", "w2"), lambda R, y, a, b: y * (a * a + b * b) + R(3))
    v = vz_classify(c)
    assert v.kind == QH_MAIN and v.ord_p == 3
    assert v.witness["h"] == "-y*w1^2"
    c = _chart(("u", "v"), lambda R, u, v: u + v * v)
    assert vz_classify(c).kind == SMOOTH
    # p in m^p and every escape monomial blocked: not decided by these criteria
    c = _chart(("u1", "u2"), lambda R, a, b: a * a * a + b * b * b + R(3))
    assert vz_classify(c).kind == UNCLASSIFIED
    c = _chart(("u1", "u2"), lambda R, a, b: a * a + b * b + R(5), p=5)
    assert vz_classify(c).ord_p == 2


def test_mref_ideal_and_charts():
    ideal = mref_ideal(FIX)
    labels = [lab for lab, _ in ideal.generators]
    assert labels[0] == "sum x_i^2 + p*y" and labels[-1] == "y*U - p*T"
    assert len(labels) == 2 + 1 + 2 + 2 + 1
    ch = ideal.charts
    assert ch["U"].relation_strings() == ["w1^2 + w2^2 + t"]
    assert ch["T"].relation_strings() == ["y*w1^2 + y*w2^2 + 3"]
    assert sorted(ch["W1"].relation_strings()) == ["w2^2 + u*t + 1", "x1*u - 3"]


def test_mref_chart_verdicts():
    ch = mref_ideal(FIX).charts
    for q in (3, 9):
        for pt, v in classify_chart_points(ch["U"], q):
            assert v.kind == SMOOTH
        for pt, v in classify_chart_points(ch["T"], q):
            if all(c == 0 for c in pt):
                assert v.kind == QH_MAIN
            else:
                assert v.kind == SMOOTH or (v.kind == QH_ORDER and v.ord_p <= 2)
    for pt, v in classify_chart_points(ch["W1"], 9):
        assert v.kind == SMOOTH or (v.kind == QH_ORDER and v.ord_p <= 2)


def test_ldiamond():
    a, b = ldiamond(FIX, 0), ldiamond(FIX, 1)
    for D in (a, b):
        assert D.is_self_dual() and D.contains_base()
        assert D.inclusion_valuations() == [0, 0, 0, 1]
    assert not a.same_as(b)
    R = WittRing(3, 6)
    w = R.omega
    # (e3 + w e4) / 3 lies in the first lattice, not in the second
    assert a.contains([0, 0, R(1), w], 1)
    assert not b.contains([0, 0, R(1), w], 1)
    with pytest.raises(PreconditionError):
        ldiamond(QuadLattice.from_diagonal(3, [1, 3, -3]))


def test_mref_vs_mloc():
    c3 = mref_vs_mloc(FIX, 3)
    assert c3.bijective_off_irregular and c3.mloc_points == c3.mref_points == 4
    c9 = mref_vs_mloc(FIX, 9)
    assert c9.bijective_off_irregular and len(c9.irregular_fibers) == 2
    assert all(n > 1 for _, n in c9.irregular_fibers)
    with pytest.raises(PreconditionError):
        mref_vs_mloc(QuadLattice.from_diagonal(3, [1, 1, -3]), 3)


def test_non_diagonal_t2_lattice_at_p5():
    L = QuadLattice(5, [[2, 1, 0, 0], [1, 2, 0, 0], [0, 0, 10, 5], [0, 0, 5, 20]])
    assert str(normal_form_witt(L).form) == "X1^2 + X2^2 + 5*Y*Z"
    pts = enumerate_mloc(L, 25)
    assert sum(x.irregular for x in pts) == 2
    a, b = ldiamond(L, 0), ldiamond(L, 1)
    assert a.is_self_dual() and b.is_self_dual() and not a.same_as(b)
    assert mref_vs_mloc(L, 5).bijective_off_irregular
    assert mref_ideal(L).charts["T"].relation_strings() == ["y*w1^2 + y*w2^2 + 5"]
    nf = normal_form_witt(L)
    for x in pts:
        if x.singular:
            v = chart_at(L, x, nf=nf).verdict
            assert v.kind == (IRREGULAR if x.irregular else QH_ORDER)
