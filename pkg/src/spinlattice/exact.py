"""Exact scalars: p-local rationals, F_p / F_{p^2}, and W(F_{p^2}) / p^k.

p-local rationals are plain :class:`fractions.Fraction` values; the prime is
always passed explicitly.  Elements of the truncated unramified quadratic
extension are :class:`WittElem` instances ``a + b*w`` with ``w**2 = c`` for
``c`` the balanced lift of the smallest positive quadratic non-residue mod
``p`` (so ``w**2 = -1`` for ``p = 3``).  The finite
fields F_p and F_{p^2} are the ``k = 1`` case of the same ring.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache, total_ordering
from numbers import Rational

from .errors import DomainError

DEFAULT_PRECISION = 6


@total_ordering
class _Infinity:
    """The valuation of zero.  Compares above every integer; not a number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("spinlattice.INF")

    def __add__(self, other):
        return self

    __radd__ = __add__


INF = _Infinity()


def _int_val(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def valuation(x, p: int):
    """p-adic valuation of a rational (or int); ``INF`` for zero."""
    x = Fraction(x)
    if x == 0:
        return INF
    return _int_val(x.numerator, p) - _int_val(x.denominator, p)


def is_p_integral(x, p: int) -> bool:
    return Fraction(x).denominator % p != 0


def is_p_unit(x, p: int) -> bool:
    x = Fraction(x)
    return x.denominator % p != 0 and x.numerator % p != 0


def split_unit(x, p: int):
    """Write nonzero ``x = p**v * u`` and return ``(v, u)``."""
    v = valuation(x, p)
    if v is INF:
        raise DomainError("zero has no unit part")
    return v, Fraction(x) / Fraction(p) ** v


def mod_pk(x, p: int, k: int) -> int:
    """Image of a p-integral rational in Z/p^k."""
    x = Fraction(x)
    if x.denominator % p == 0:
        raise DomainError(f"{x} is not {p}-integral")
    m = p**k
    return x.numerator * pow(x.denominator, -1, m) % m


def qz_class(x, p: int) -> Fraction:
    """Canonical representative in [0, 1) with p-power denominator of x mod Z_(p)."""
    x = Fraction(x)
    v = _int_val(x.denominator, p)
    if v == 0:
        return Fraction(0)
    pe = p**v
    d_rest = x.denominator // pe
    r = x.numerator * pow(d_rest, -1, pe) % pe
    return Fraction(r, pe)


@lru_cache(maxsize=None)
def smallest_nonresidue(p: int) -> int:
    """Smallest positive quadratic non-residue mod p."""
    for c in range(2, p):
        if pow(c, (p - 1) // 2, p) == p - 1:
            return c
    raise DomainError(f"{p} is not an odd prime")


def omega_square(p: int) -> int:
    """The integer c with w^2 = c: balanced lift of the smallest non-residue (p=3 gives -1)."""
    c = smallest_nonresidue(p)
    return c - p if c > p // 2 else c


def is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


class WittRing:
    """W(F_{p^2}) / p^k, realised as (Z/p^k)[w] / (w^2 - c)."""

    __slots__ = ("p", "k", "c", "modulus")
    _cache: dict = {}

    def __new__(cls, p: int, k: int = DEFAULT_PRECISION):
        key = (p, k)
        if key in cls._cache:
            return cls._cache[key]
        if not is_odd_prime(p):
            raise DomainError(f"p={p} must be an odd prime")
        if k < 1:
            raise DomainError("truncation level must be >= 1")
        self = super().__new__(cls)
        self.p = p
        self.k = k
        self.c = omega_square(p)
        self.modulus = p**k
        cls._cache[key] = self
        return self

    def __repr__(self):
        return f"WittRing(p={self.p}, k={self.k})"

    def __reduce__(self):
        return (WittRing, (self.p, self.k))

    def __call__(self, a=0, b=0) -> "WittElem":
        return WittElem(self, a, b)

    @property
    def zero(self):
        return WittElem(self, 0, 0)

    @property
    def one(self):
        return WittElem(self, 1, 0)

    @property
    def omega(self):
        return WittElem(self, 0, 1)

    def coerce(self, x) -> "WittElem":
        if isinstance(x, WittElem):
            if x.ring is self:
                return x
            if x.ring.p == self.p and x.ring.k >= self.k:
                return WittElem(self, x.a, x.b)
            raise DomainError(f"cannot coerce {x!r} into {self!r}")
        if isinstance(x, int):
            return WittElem(self, x, 0)
        if isinstance(x, Rational):
            return WittElem(self, mod_pk(x, self.p, self.k), 0)
        raise TypeError(f"cannot coerce {type(x).__name__} into {self!r}")

    def residue_ring(self) -> "WittRing":
        return WittRing(self.p, 1)

    def __iter__(self):
        m = self.modulus
        for a in range(m):
            for b in range(m):
                yield WittElem(self, a, b)


class WittElem:
    """Immutable element a + b*w of a :class:`WittRing`."""

    __slots__ = ("ring", "a", "b")

    def __init__(self, ring: WittRing, a=0, b=0):
        m = ring.modulus
        if not isinstance(a, int):
            a = mod_pk(a, ring.p, ring.k)
        if not isinstance(b, int):
            b = mod_pk(b, ring.p, ring.k)
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "a", a % m)
        object.__setattr__(self, "b", b % m)

    def __setattr__(self, name, value):
        raise AttributeError("WittElem is immutable")

    def __repr__(self):
        if self.b == 0:
            return f"{self.a}"
        return f"{self.a}+{self.b}w"

    def key(self):
        return (self.a, self.b)

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.ring.p, self.ring.k, self.a, self.b))

    def _other(self, other):
        try:
            return self.ring.coerce(other)
        except TypeError:
            return None

    def __eq__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return WittElem(self.ring, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return WittElem(self.ring, -self.a, -self.b)

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return WittElem(self.ring, self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        r = self.ring
        return WittElem(r, self.a * o.a + r.c * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.ring.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def norm(self) -> int:
        return (self.a * self.a - self.ring.c * self.b * self.b) % self.ring.modulus

    def conjugate(self) -> "WittElem":
        """Image under the Frobenius lift (w -> -w)."""
        return WittElem(self.ring, self.a, -self.b)

    def is_unit(self) -> bool:
        return self.norm() % self.ring.p != 0

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __bool__(self):
        return not self.is_zero()

    def inverse(self) -> "WittElem":
        if not self.is_unit():
            raise DomainError(f"{self!r} is not a unit mod {self.ring.p}")
        m = self.ring.modulus
        ninv = pow(self.norm(), -1, m)
        return WittElem(self.ring, self.a * ninv, -self.b * ninv)

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def valuation(self):
        if self.is_zero():
            return INF
        p = self.ring.p
        return min(_int_val(x, p) if x else self.ring.k for x in (self.a, self.b))

    def reduce(self, k: int = 1) -> "WittElem":
        """Image in W / p^k for k <= current precision."""
        return WittElem(WittRing(self.ring.p, k), self.a, self.b)

    def divide_by_p(self, e: int = 1) -> "WittElem":
        """Exact division by p^e; the result lives in W / p^(k-e)."""
        p, k = self.ring.p, self.ring.k
        pe = p**e
        if e >= k:
            raise DomainError("not enough precision to divide by p^%d" % e)
        if self.a % pe or self.b % pe:
            raise DomainError(f"{self!r} is not divisible by p^{e}")
        return WittElem(WittRing(p, k - e), self.a // pe, self.b // pe)

    def digit(self) -> "WittElem":
        """Digit representative: coordinates reduced into [0, p), same ring."""
        p = self.ring.p
        return WittElem(self.ring, self.a % p, self.b % p)

    def in_prime_field(self) -> bool:
        return self.b == 0


class FiniteField:
    """F_p (degree 1) or F_{p^2} (degree 2), elements are WittElem with k=1."""

    __slots__ = ("p", "degree", "ring")

    def __init__(self, p: int, degree: int = 1):
        if degree not in (1, 2):
            raise DomainError("only degrees 1 and 2 are supported")
        self.p = p
        self.degree = degree
        self.ring = WittRing(p, 1)

    @classmethod
    def of_order(cls, q: int) -> "FiniteField":
        for p in range(3, q + 1, 2):
            if is_odd_prime(p):
                if q == p:
                    return cls(p, 1)
                if q == p * p:
                    return cls(p, 2)
        raise DomainError(f"q={q} is not p or p^2 for an odd prime p")

    @property
    def order(self) -> int:
        return self.p**self.degree

    def __repr__(self):
        return f"GF({self.order})"

    def __eq__(self, other):
        return isinstance(other, FiniteField) and (self.p, self.degree) == (other.p, other.degree)

    def __hash__(self):
        return hash((self.p, self.degree))

    def __call__(self, a=0, b=0):
        if self.degree == 1 and b % self.p:
            raise DomainError("element not in the prime field")
        return WittElem(self.ring, a, b)

    def elements(self):
        p = self.p
        bs = range(p) if self.degree == 2 else (0,)
        for a in range(p):
            for b in bs:
                yield WittElem(self.ring, a, b)

    def contains(self, x: WittElem) -> bool:
        return self.degree == 2 or x.b % self.p == 0

    def sqrt(self, x):
        """Some square root of x in this field (smallest by (a, b)), or None."""
        x = self.ring.coerce(x)
        for s in self.elements():
            if s * s == x:
                return s
        return None


def hensel_sqrt(u: WittElem):
    """Square root of a unit ``u`` in W/p^k, or ``None`` if its residue is a non-square.

    The residue root is the smallest one in (a, b) order; it is lifted by Newton
    iteration, so the result is deterministic.
    """
    if not isinstance(u, WittElem):
        raise TypeError("hensel_sqrt expects a WittElem")
    if not u.is_unit():
        raise DomainError(f"{u!r} is not a unit")
    ring = u.ring
    r0 = FiniteField(ring.p, 2).sqrt(u.reduce(1))
    if r0 is None:
        return None
    s = WittElem(ring, r0.a, r0.b)
    two = ring(2)
    for _ in range(ring.k + 1):
        s_next = s - (s * s - u) / (two * s)
        if s_next == s:
            break
        s = s_next
    if s * s != u:
        raise AssertionError("Hensel iteration failed to converge")
    return s
