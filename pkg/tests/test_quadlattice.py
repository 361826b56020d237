"""Lattice invariants, maximality, Lie extension and Witt extension."""

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from spinlattice import linalg as la
from spinlattice.errors import DomainError, PreconditionError
from spinlattice.exact import FiniteField, WittRing, valuation
from spinlattice.quadlattice import (
    QuadLattice,
    acts_trivially_on_disc,
    check_so,
    diagonalize,
    discriminant_form,
    extend_to_so,
    extends_integrally,
    is_anisotropic,
    is_maximal,
    radical_mod_p,
    signature,
    witt_extend,
)
from spinlattice.selftest import brute_force_maximal, random_lattice

F = Fraction


def diag(p, *qs):
    return QuadLattice.from_diagonal(p, list(qs))


def test_constructor_validation():
    with pytest.raises((DomainError, PreconditionError)):
        QuadLattice(4, [[2]])
    with pytest.raises((DomainError, PreconditionError)):
        QuadLattice(3, [[2, 1], [0, 2]])
    with pytest.raises((DomainError, PreconditionError)):
        QuadLattice(3, [[2, 0], [0, 0]])
    with pytest.raises((DomainError, PreconditionError)):
        QuadLattice(3, [[F(2, 3)]])


def test_diagonalize_examples():
    P, d = diagonalize(diag(3, 1, 5))
    assert d == [1, 5] and P == [[1, 0], [0, 1]]
    L = QuadLattice(3, [[0, 1], [1, 0]])
    P, d = diagonalize(L)
    # first vector e1 + e2; the second Q-value lies in the square class of -1
    assert la.transpose(P)[0] == [1, 1]
    assert d[0] == 1 and d[1] < 0 and valuation(d[1], 3) == 0
    assert L.transport(P).gram_matrix() == [[2 * d[0], 0], [0, 2 * d[1]]]
    P, d = diagonalize(QuadLattice(3, [[2, 1], [1, 6]]))
    assert d == [1, F(11, 4)]
    assert valuation(la.det(P), 3) == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([3, 5, 7]), st.integers(1, 4))
def test_diagonalize_is_an_integral_change_of_basis(seed, p, m):
    L = random_lattice(random.Random(seed), p, m)
    P, d = diagonalize(L)
    assert valuation(la.det(P), p) == 0
    assert all(valuation(x, p) >= 0 for row in P for x in row)
    D = L.transport(P).gram_matrix()
    assert D == [[2 * d[i] if i == j else 0 for j in range(m)] for i in range(m)]


def test_signature_examples():
    assert signature(diag(3, 1, 1, -3)) == (2, 1)
    assert signature(diag(3, 1, -3, -1)) == (1, 2)
    assert signature(QuadLattice(3, [[0, 1], [1, 0]])) == (1, 1)


def test_discriminant_examples():
    D = discriminant_form(diag(3, 1, 1, -3))
    assert D.orders == (3,)
    assert (D.value([1]) + F(1, 3)).denominator == 1  # q(g) = -1/3 mod Z
    assert discriminant_form(diag(3, 1, 1, 1)).size == 1
    assert discriminant_form(diag(3, 1, 1, -9)).orders == (9,)


def test_discriminant_size_is_p_part_of_det():
    rng = random.Random(11)
    for _ in range(40):
        p = rng.choice([3, 5])
        L = random_lattice(rng, p, rng.randint(1, 4))
        # |L^v / L| = p-part of det of the bilinear Gram
        assert discriminant_form(L).size == p ** valuation(la.det(L.gram_matrix()), p)


def test_radical_examples():
    r = radical_mod_p(diag(3, 1, 1, 3, 3))
    assert (r.t, r.s) == (2, 1)
    assert la.subspace_equal([list(v) for v in r.basis], [[0, 0, 1, 0], [0, 0, 0, 1]])
    assert radical_mod_p(diag(3, 1, 1)).t == 0
    r = radical_mod_p(diag(3, 1, 1, -3))
    assert r.t == 1 and la.subspace_equal([list(v) for v in r.basis], [[0, 0, 1]])


def test_anisotropic_examples():
    F3, F9 = FiniteField(3, 1), FiniteField(3, 2)
    R = F3.ring
    G = [[R(2), R(0)], [R(0), R(2)]]
    assert is_anisotropic(G, F3)
    assert not is_anisotropic(G, F9)
    assert is_anisotropic([], F3)


def test_maximal_examples():
    assert is_maximal(diag(3, 1, 1, -3))[0]
    ok, w = is_maximal(diag(3, 1, 1, -9))
    assert not ok and w.divisor == 9 and list(w.vector) == [0, 0, F(1, 3)]
    assert extends_integrally(diag(3, 1, 1, -9), w.vector)
    ok, w = is_maximal(diag(3, 1, 3, -3))
    assert not ok and w.kind == "isotropic"
    assert list(w.vector) == [0, F(1, 3), F(1, 3)]
    assert extends_integrally(diag(3, 1, 3, -3), w.vector)


def test_maximal_agrees_with_brute_force_on_random_grams():
    rng = random.Random(5)
    for _ in range(60):
        p = rng.choice([3, 5])
        L = random_lattice(rng, p, rng.randint(1, 3), spread=9)
        ok, w = is_maximal(L)
        assert ok == brute_force_maximal(L)
        if not ok:
            assert extends_integrally(L, w.vector)


def test_extend_to_so_examples():
    R = WittRing(3, 1)
    one, zero = R(1), R(0)
    G = [[R(2) if i == j else zero for j in range(3)] for i in range(3)]
    X = extend_to_so(G, [[one, zero, zero]], [[zero, zero, zero]])
    assert X == [[zero] * 3 for _ in range(3)]
    X = extend_to_so(G, [[one, zero, zero]], [[zero, one, zero]])
    assert check_so(G, X)
    assert la.mat_vec(X, [one, zero, zero]) == [zero, one, zero]
    R5 = WittRing(5, 1)
    H = [[R5(0), R5(1)], [R5(1), R5(0)]]
    X = extend_to_so(H, [[R5(1), R5(0)]], [[R5(1), R5(0)]])
    assert X == [[R5(1), R5(0)], [R5(0), R5(-1)]]


def test_extend_to_so_rejects_non_skew_data():
    R = WittRing(3, 1)
    G = [[R(2), R(0)], [R(0), R(2)]]
    with pytest.raises(PreconditionError):
        extend_to_so(G, [[R(1), R(0)]], [[R(1), R(0)]])


def test_witt_extend_examples():
    R = WittRing(3, 1)
    G = [[R(2), R(0)], [R(0), R(2)]]
    g = witt_extend(G, [[R(1), R(0)]], [[R(1), R(0)]])
    assert la.mat_vec(g, [R(1), R(0)]) == [R(1), R(0)]
    g = witt_extend(G, [[R(1), R(0)]], [[R(0), R(1)]])
    assert la.mat_vec(g, [R(1), R(0)]) == [R(0), R(1)]
    assert la.mat_mul(la.mat_mul(la.transpose(g), G), g) == G
    R5 = WittRing(5, 1)
    G5 = [[R5(2), R5(0)], [R5(0), R5(2)]]
    with pytest.raises(PreconditionError):
        witt_extend(G5, [[R5(1), R5(0)]], [[R5(0), R5(2)]])


def test_witt_extend_random_isometries():
    rng = random.Random(7)
    for p in (3, 5):
        F1 = FiniteField(p, 1)
        elems = list(F1.elements())
        for _ in range(20):
            n = rng.choice([2, 3, 4])
            G = [[F1.ring(2 * rng.choice([1, 2]) if i == j else 0) for j in range(n)] for i in range(n)]
            u = [rng.choice(elems) for _ in range(n)]
            q = la.bilinear(u, G, u)
            # any other vector with the same Q-value
            targets = [v for v in itertools.product(elems, repeat=n) if any(v) and la.bilinear(list(v), G, list(v)) == q]
            v = list(rng.choice(targets)) if any(x != 0 for x in u) else None
            if v is None:
                continue
            g = witt_extend(G, [u], [v])
            assert la.mat_vec(g, u) == v
            assert la.mat_mul(la.mat_mul(la.transpose(g), G), g) == G


def test_acts_trivially_on_disc_examples():
    L = diag(3, 1, 1, -3)
    assert acts_trivially_on_disc(L, la.identity(3, F(1), F(0)))
    assert acts_trivially_on_disc(L, [[-1, 0, 0], [0, 1, 0], [0, 0, 1]])
    L = diag(3, 1, 1, 3, 3)
    swap = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
    assert not acts_trivially_on_disc(L, swap)
