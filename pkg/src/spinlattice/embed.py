"""Embedding a quadratic lattice into a self-dual one with definite complement."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List

from . import linalg as la
from .errors import InvariantViolation, PreconditionError
from .exact import FiniteField, is_p_integral, is_p_unit, valuation
from .quadlattice import QuadLattice, diagonalize, discriminant_form, signature

HYPERBOLIC = [[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]]


def eplus(a, p: int):
    """Gram of the positive definite form a x^2 + x y + p c' y^2 (c' minimal with 4 a c' > 1)."""
    a = Fraction(a)
    if a <= 0:
        raise PreconditionError("eplus needs a > 0")
    c = int(1 / (4 * a)) + 1
    return [[2 * a, Fraction(1)], [Fraction(1), Fraction(2 * p * c)]]


def hyperbolic_embed(b):
    """The vector e + b f of the hyperbolic plane (Q(x e + y f) = x y); Q-value b."""
    return [Fraction(1), Fraction(b)]


def _block_diag(blocks):
    n = sum(len(b) for b in blocks)
    out = [[Fraction(0)] * n for _ in range(n)]
    off = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                out[off + i][off + j] = Fraction(x)
        off += len(b)
    return out


def _rank_mod_p(M, p):
    F = FiniteField(p, 1)
    return la.rank([[F.ring.coerce(x) for x in row] for row in M]) if M and M[0] else 0


@dataclass
class SelfDualEmbedding:
    source: QuadLattice
    target_gram: list
    embed_matrix: list  # columns: images of the source basis
    complement_basis: list  # vectors of the target spanning L^perp
    notes: List[str] = field(default_factory=list)

    @property
    def target(self) -> QuadLattice:
        return QuadLattice(self.source.p, self.target_gram)

    @property
    def target_rank(self) -> int:
        return len(self.target_gram)

    def complement_gram(self):
        G = self.target_gram
        C = self.complement_basis
        return [[la.bilinear(u, G, v) for v in C] for u in C]

    def complement(self) -> QuadLattice | None:
        if not self.complement_basis:
            return None
        return QuadLattice(self.source.p, self.complement_gram())

    def check(self) -> dict:
        """Every structural invariant, as name -> bool."""
        p = self.source.p
        G = self.target_gram
        E = self.embed_matrix
        C = self.complement_basis
        res = {}
        res["target_self_dual"] = is_p_unit(la.det(G), p) if G else True
        res["p_integral"] = all(is_p_integral(x, p) for row in G + E for x in row) and all(
            is_p_integral(x, p) for v in C for x in v
        )
        res["isometric"] = la.mat_mul(la.mat_mul(la.transpose(E), G), E) == self.source.gram_matrix()
        m = self.source.rank
        res["direct_summand"] = _rank_mod_p(E, p) == m
        cols = la.transpose(E)
        res["complement_orthogonal"] = all(la.bilinear(c, G, v) == 0 for c in C for v in cols)
        # a saturated sublattice of L^perp of full rank is L^perp itself
        res["complement_is_perp"] = len(cols) + len(C) == len(G) and (
            not C or _rank_mod_p(la.from_columns(C), p) == len(C)
        )
        if C:
            pos, neg = signature(QuadLattice(p, self.complement_gram()))
            res["complement_positive_definite"] = neg == 0 and pos == len(C)
        else:
            res["complement_positive_definite"] = True
        return res

    def verify(self):
        bad = [k for k, v in self.check().items() if not v]
        if bad:
            raise InvariantViolation("self-dual embedding invariants failed: " + ", ".join(bad))
        return self


def selfdual_overlattice(L: QuadLattice) -> SelfDualEmbedding:
    """Embed L as a direct summand of a self-dual lattice with positive definite complement.

    After diagonalization each unit entry is kept, each positive non-unit
    entry a is realized primitively inside E+(a), and each negative non-unit
    entry d inside the hyperbolic plane as e + d f.  Every non-unit entry costs
    one extra dimension, so the rank grows by the number of non-unit entries
    (at most one when disc(L) is cyclic).
    """
    p = L.p
    notes = []
    if L.is_unimodular():
        m = L.rank
        I = la.identity(m, Fraction(1), Fraction(0))
        return SelfDualEmbedding(L, L.gram_matrix(), I, [], ["unimodular: identity embedding"]).verify()
    P, diag = diagonalize(L)
    blocks, images, comps = [], [], []
    offset = 0
    for d in diag:
        if valuation(d, p) == 0:
            blocks.append([[2 * d]])
            images.append((offset, [Fraction(1)]))
            offset += 1
        elif d > 0:
            G2 = eplus(d, p)
            blocks.append(G2)
            images.append((offset, [Fraction(1), Fraction(0)]))
            comps.append((offset, [Fraction(1), -2 * d]))  # orthogonal to x inside E+(d)
            offset += 2
        else:
            blocks.append(HYPERBOLIC)
            images.append((offset, hyperbolic_embed(d)))
            comps.append((offset, [Fraction(1), -d]))
            offset += 2
    n = offset
    G = _block_diag(blocks)

    def place(off, local):
        v = [Fraction(0)] * n
        for i, x in enumerate(local):
            v[off + i] = x
        return v

    diag_images = [place(o, v) for o, v in images]
    complement = [place(o, v) for o, v in comps]
    # the source basis is P^{-1} applied to the diagonal basis
    Pinv = la.inverse(P)
    Ediag = la.from_columns(diag_images)
    E = la.mat_mul(Ediag, Pinv)
    nonunit = sum(1 for d in diag if valuation(d, p) > 0)
    disc = discriminant_form(L)
    if len(disc.orders) <= 1:
        notes.append("cyclic discriminant: rank grows by at most one")
    sig = signature(L)
    if sig[1] == 2:
        tsig = signature(QuadLattice(p, G))
        if tsig[1] != 2:
            raise InvariantViolation("target signature is not of type (n, 2)")
        notes.append(f"target signature {tsig}")
    else:
        notes.append("signature bookkeeping skipped (source does not have two negative entries)")
    notes.append(f"non-unit diagonal entries: {nonunit}")
    return SelfDualEmbedding(L, G, E, complement, notes).verify()
