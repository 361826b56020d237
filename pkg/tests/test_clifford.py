"""Clifford multiplication, the anti-involution, spinor norms, pi, psi and filtrations."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from spinlattice import linalg as la
from spinlattice.clifford import (
    CliffordAlgebra,
    inverse,
    is_alternating,
    is_gspin,
    parabolic_filtration,
    projector_pi,
    psi_delta,
    reflection_matrix,
    spinor_norm,
    star,
    visom_check,
)
from spinlattice.errors import PreconditionError, ResourceLimitError
from spinlattice.exact import WittRing
from spinlattice.quadlattice import QuadLattice
from spinlattice.selftest import filtration_fixtures, random_lattice

F = Fraction


def alg_diag(*qs, p=3):
    return CliffordAlgebra.from_lattice(QuadLattice.from_diagonal(p, list(qs)))


def test_multiplication_examples():
    A = alg_diag(1, 1)
    e1, e2 = A.gen(0), A.gen(1)
    assert e1 * e1 == A.scalar(1)
    anti = e1 * e2 + e2 * e1
    assert anti.is_scalar() and anti.scalar_part() == 0
    assert (e1 + e2) * (e1 + e2) == A.scalar(2)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_vectors_square_to_q(seed):
    rng = random.Random(seed)
    L = random_lattice(rng, rng.choice([3, 5]), rng.randint(1, 4))
    A = CliffordAlgebra.from_lattice(L)
    v = [F(rng.randint(-3, 3)) for _ in range(L.rank)]
    x = A.vector(v)
    assert x * x == A.scalar(L.Q(v))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_associativity_and_star_antimultiplicative(seed):
    rng = random.Random(seed)
    L = random_lattice(rng, 3, rng.randint(2, 4))
    A = CliffordAlgebra.from_lattice(L)

    def rand():
        return A.from_coords([F(rng.randint(-2, 2)) for _ in range(A.dim)])

    x, y, z = rand(), rand(), rand()
    assert (x * y) * z == x * (y * z)
    assert star(x * y) == star(y) * star(x)
    assert star(star(x)) == x


def test_star_on_generators():
    A = alg_diag(1, 1)
    e1, e2 = A.gen(0), A.gen(1)
    assert star(e1) == e1
    assert star(e1 * e2) == e2 * e1 == -(e1 * e2)


def test_spinor_norm_examples():
    A = alg_diag(1, 1)
    assert spinor_norm(A.scalar(3)) == 9
    assert spinor_norm(A.gen(0) * A.gen(1)) == 1
    B = alg_diag(2, 3)
    assert spinor_norm(B.gen(0) * B.gen(1)) == 6
    with pytest.raises(PreconditionError):
        spinor_norm(A.gen(0))


def test_gspin_products_of_reflections():
    G = [[F(2), F(1), F(0)], [F(1), F(4), F(1)], [F(0), F(1), F(6)]]
    A = CliffordAlgebra(G, 5)
    w1, w2 = [F(1), F(0), F(0)], [F(0), F(1), F(1)]
    g = A.vector(w1) * A.vector(w2)
    res = is_gspin(g)
    assert res.ok
    expect = la.mat_mul(reflection_matrix(G, w1), reflection_matrix(G, w2))
    assert res.matrix == expect
    assert is_gspin(A.scalar(1)).matrix == la.identity(3, F(1), F(0))


def test_gspin_rejects_generic_element():
    rng = random.Random(2)
    L = random_lattice(rng, 3, 4)
    A = CliffordAlgebra.from_lattice(L)
    x = A.scalar(1) + A.monomial([0, 1, 2, 3])
    assert not is_gspin(x).ok


def test_inverse():
    A = alg_diag(1, 2, 3)
    x = A.gen(0) * A.gen(1) + A.scalar(2)
    assert x * inverse(x) == A.scalar(1)


def test_projector_on_self_dual_lattice():
    L = QuadLattice.from_diagonal(3, [1, 1, 1])
    proj = projector_pi(L)
    for k in range(3):
        ek = [F(int(i == k)) for i in range(3)]
        assert proj.vector(proj.alg.gen_matrix(k)) == ek
    assert proj.rank() == 3


def test_psi_delta_example():
    A = alg_diag(1, 1)
    Psi = psi_delta(A.gen(0) * A.gen(1))
    assert len(Psi) == 4 and is_alternating(Psi) and la.det(Psi) != 0


def test_rank_cap():
    G = [[F(2 if i == j else 0) for j in range(9)] for i in range(9)]
    with pytest.raises(ResourceLimitError):
        CliffordAlgebra(G, 3)


def test_filtration_fixtures():
    for name, G, L1, L0, Lm1 in filtration_fixtures():
        filt = parabolic_filtration(CliffordAlgebra(G, 3), L1, L0, Lm1)
        assert filt.ok(), (name, {k: v for k, v in filt.checks.items() if not v})
        assert sum(len(h) for h in filt.H) == 2 ** len(G)


def test_filtration_rejects_bad_splitting():
    G = [[F(0), F(1)], [F(1), F(0)]]
    with pytest.raises(PreconditionError):
        parabolic_filtration(CliffordAlgebra(G, 3), [[F(1), F(1)]], [], [[F(0), F(1)]])


def test_visom_toy_and_preconditions():
    R = WittRing(3, 6)
    G = [[R(0), R(1)], [R(1), R(0)]]
    assert visom_check(G, [R(1), R(3)]).ok
    with pytest.raises(PreconditionError):
        visom_check(G, [R(1), R(1)])  # Q(v) a unit
    with pytest.raises(PreconditionError):
        visom_check(G, [R(1), R(9)])  # Q(v) divisible by p^2
