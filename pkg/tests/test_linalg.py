"""Smith normal form, chain-ring Smith form and p-local spans against simple oracles."""

import random
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import assume, given, settings, strategies as st

from spinlattice.errors import RankError

from spinlattice import linalg as la
from spinlattice.exact import WittRing


def _det_minors_gcd(M, k):
    """gcd of all k x k minors: the product of the first k elementary divisors."""
    from itertools import combinations

    n, m = len(M), len(M[0])
    g = 0
    for rows in combinations(range(n), k):
        for cols in combinations(range(m), k):
            g = gcd(g, abs(la.det_int([[M[i][j] for j in cols] for i in rows])))
    return g


def test_snf_examples():
    assert la.elementary_divisors([[2, 0, 0], [0, 2, 0], [0, 0, -6]]) == [2, 2, 6]
    assert la.elementary_divisors([[1, 0], [0, 1]]) == [1, 1]
    assert la.elementary_divisors([[0, 1], [1, 0]]) == [1, 1]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=3, max_size=3))
def test_snf_against_minor_gcds(M):
    assume(la.det_int(M) != 0)
    U, D, V = la.smith_normal_form(M)
    assert la.mat_mul(la.mat_mul(U, M), V) == D
    assert abs(la.det_int(U)) == 1 and abs(la.det_int(V)) == 1
    d = [abs(D[i][i]) for i in range(3)]
    prod = 1
    for k in range(1, 4):
        prod *= d[k - 1]
        assert prod == _det_minors_gcd(M, k)
    for i in range(2):
        if d[i + 1]:
            assert d[i] and d[i + 1] % d[i] == 0


def test_snf_rejects_singular_input():
    with pytest.raises(RankError):
        la.smith_normal_form([[1, 2], [2, 4]])


def test_witt_smith_valuations_match_integer_snf():
    rng = random.Random(3)
    R = WittRing(3, 5)
    for _ in range(30):
        M = [[rng.randint(-20, 20) for _ in range(3)] for _ in range(3)]
        ed = la.elementary_divisors(M)
        expect = []
        for d in ed:
            v = 0
            d = abs(d)
            while d and d % 3 == 0 and v < 5:
                d //= 3
                v += 1
            expect.append(5 if d == 0 else v)
        got = la.witt_elementary_valuations([[R(x) for x in row] for row in M])
        assert sorted(got) == sorted(expect)


def test_rational_linear_algebra():
    A = [[Fraction(2), Fraction(1)], [Fraction(4), Fraction(3)]]
    Ai = la.inverse(A)
    assert la.mat_mul(A, Ai) == la.identity(2, Fraction(1), Fraction(0))
    assert la.det(A) == 2
    assert la.solve(A, [Fraction(3), Fraction(7)]) == [Fraction(1), Fraction(1)]
    assert la.solve([[Fraction(1), Fraction(1)], [Fraction(1), Fraction(1)]], [Fraction(0), Fraction(1)]) is None
    assert la.rank([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]]) == 1


def test_plocal_lattice_equality():
    p = 3
    A = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    B = [[Fraction(2), Fraction(0)], [Fraction(1), Fraction(1)]]  # index 2, a 3-unit
    C = [[Fraction(3), Fraction(0)], [Fraction(0), Fraction(1)]]
    assert la.plocal_lattice_equal(A, B, p)
    assert not la.plocal_lattice_equal(A, C, p)


def test_witt_module_length_and_membership():
    R = WittRing(3, 4)
    A = [[R(3), R(0)], [R(0), R(1)]]
    mod = la.WittModule(A)
    assert mod.length() == 3 + 4
    assert mod.contains([R(9), R(2)])
    assert not mod.contains([R(1), R(0)])
