from spinlattice.exact import WittRing
from spinlattice.poly import MultiPoly, lex_leading, reduce_by


def test_substitute_and_translate():
    R = WittRing(3, 4)
    x, y = MultiPoly.gens(("x", "y"), R.one)
    f = x * x + y * R(3)
    g = f.translate({"x": R(1)})
    assert str(g) == "x^2 + 2*x + 3*y + 1"
    assert f.substitute({"y": x}).drop_var("y").vars == ("x",)
    assert f.evaluate({"x": R(2), "y": R(1)}) == R(7)


def test_reduce_by_division():
    R = WittRing(3, 4)
    x, y = MultiPoly.gens(("x", "y"), R.one)
    g = x * y - R(3)
    f = x * x * y * y - R(9)
    assert reduce_by(f, [g], [0, 1], lambda c: c.is_unit()).is_zero()
    assert lex_leading(g, [0, 1])[0] == (1, 1)


def test_degrees():
    x, y = MultiPoly.gens(("x", "y"))
    f = x * x * y + y + 1
    assert f.degree() == 3 and f.lowest_degree() == 0
    assert f.degree_in("x") == 2
    assert str(f.coefficient_in("x", 2)) == "y"
