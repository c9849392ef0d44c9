"""Ray class groups of modulus P^N (times all real places) for K = Q or quadratic K.

The group G_N is assembled from the exact sequence

    1 -> (O/P^N)^x / image(U+) -> G_N -> Cl+(K) -> 1

as an abelian group on free generators (a basis of the residue unit group,
plus fixed ideals a_j representing a basis of Cl+), modulo the relations
coming from residue orders, totally positive units and a_j^{h_j} = (beta_j).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from sympy import factorint, isprime

from .groups import AbelianGroup, AbelianGroupPresentation, abelian_from_relations
from .padic import unit_order
from .quadfield import (
    QuadElement,
    QuadField,
    QuadIdeal,
    _mul_coords,
    narrow_class_group,
    primes_above,
    principal_generator,
    torsion_units,
    totally_positive_unit_generators,
    fundamental_unit,
)


def prime_below(P: QuadIdeal) -> int:
    (p, _), = factorint(P.norm).items()
    return p


@dataclass
class ResidueUnitGroup:
    """(O/P^N)^x with residues stored as canonical coordinate pairs."""

    K: QuadField
    P: QuadIdeal
    N: int
    modulus: QuadIdeal
    group: AbelianGroupPresentation

    @property
    def order(self) -> int:
        return self.group.order

    def reduce(self, alpha) -> tuple[int, int]:
        if isinstance(alpha, QuadElement):
            num, den = _split_denominator(alpha)
            p = prime_below(self.P)
            if den % p == 0:
                raise ValueError("element is not P-integral")
            r = self.modulus.reduce(num)
            inv = pow(den, -1, self.modulus.a)
            return self.modulus.reduce((r[0] * inv, r[1] * inv))
        return self.modulus.reduce(alpha)

    def is_unit(self, alpha) -> bool:
        return not self.P.contains(self.reduce(alpha))

    def mul(self, a, b):
        return self.modulus.reduce(_mul_coords(self.K, a, b))

    def dlog(self, alpha) -> tuple[int, ...]:
        r = self.reduce(alpha)
        if self.P.contains(r):
            raise ValueError("not a unit modulo P")
        return self.group.dlog(r)


def _split_denominator(alpha: QuadElement) -> tuple[tuple[int, int], int]:
    from math import lcm

    d = lcm(alpha.x.denominator, alpha.y.denominator)
    return (int(alpha.x * d), int(alpha.y * d)), d


def _residue_field_generator(K: QuadField, P: QuadIdeal) -> tuple[int, int]:
    q = P.norm
    mulP = lambda a, b: P.reduce(_mul_coords(K, a, b))
    one = P.reduce((1, 0))
    for r in P.residues():
        if r == (0, 0) or P.contains(r):
            continue
        if unit_order(r, mulP, one, q - 1) == q - 1:
            return r
    raise RuntimeError("no generator of the residue field found")


@lru_cache(maxsize=None)
def residue_unit_group(K: QuadField, P: QuadIdeal, N: int) -> ResidueUnitGroup:
    if N < 1:
        raise ValueError("N must be at least 1")
    mod = P**N
    q = P.norm
    order = (q - 1) * q ** (N - 1)
    mulm = lambda a, b: mod.reduce(_mul_coords(K, a, b))
    gens = [mod.reduce(_residue_field_generator(K, P))]
    Pj = P
    for _ in range(1, N):
        for b in Pj.basis:
            gens.append(mod.reduce((1 + b[0], b[1])))
        Pj = Pj * P
    pres = AbelianGroupPresentation.from_generators(
        gens, mulm, mod.reduce((1, 0)), order=order, witness="residue units"
    )
    return ResidueUnitGroup(K, P, N, mod, pres)


# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def class_representatives(K: QuadField, P: QuadIdeal) -> tuple[QuadIdeal, ...]:
    """Prime ideals prime to P representing the SNF basis of Cl+(K)."""
    cl = narrow_class_group(K)
    k = len(cl.group.invariants)
    found: dict[int, QuadIdeal] = {}
    p = prime_below(P)
    l = 1
    while len(found) < k:
        l += 1
        if not isprime(l) or l == p:
            continue
        for Q in primes_above(K, l):
            v = cl.class_of(Q)
            nz = [i for i, c in enumerate(v) if c]
            if len(nz) == 1 and v[nz[0]] == 1 and nz[0] not in found:
                found[nz[0]] = Q
        if l > 10**6:
            raise RuntimeError("class representatives not found")
    return tuple(found[i] for i in range(k))


@dataclass
class RayLevel:
    K: QuadField
    P: QuadIdeal
    N: int
    narrow: bool
    residue: ResidueUnitGroup
    class_reps: tuple[QuadIdeal, ...]
    class_orders: tuple[int, ...]
    group: AbelianGroup
    relations: list[list[int]]
    _to_group: object = field(repr=False)
    _from_group: object = field(repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return self.group.order

    @property
    def invariants(self) -> tuple[int, ...]:
        return self.group.invariants

    @property
    def nfree(self) -> int:
        return len(self.residue.group.invariants) + len(self.class_reps)

    def to_group(self, free) -> tuple[int, ...]:
        return self._to_group(free)

    def from_group(self, g) -> list[int]:
        return self._from_group(g)

    def residue_class(self, alpha) -> tuple[int, ...]:
        """Image of the principal ideal (alpha) for totally positive alpha prime to P."""
        v = list(self.residue.dlog(alpha)) + [0] * len(self.class_reps)
        return self.to_group(v)

    def _free_vector(self, I: QuadIdeal) -> list[int]:
        if _divides(self.P, I):
            raise ValueError(f"{I} is not prime to {self.P}")
        K = self.K
        cl = narrow_class_group(K)
        e = cl.class_of(I) if self.class_reps else ()
        J = I
        for a, h, ej in zip(self.class_reps, self.class_orders, e):
            if (h - ej) % h:
                J = J * a ** ((h - ej) % h)
        alpha = principal_generator(J, totally_positive=self.narrow)
        if alpha is None:
            alpha = principal_generator(J, totally_positive=False)
            if alpha is None:
                raise RuntimeError("ideal class decomposition failed")
        v = list(self.residue.dlog(alpha)) + [0] * len(self.class_reps)
        nres = len(self.residue.group.invariants)
        for j, (h, ej) in enumerate(zip(self.class_orders, e)):
            v[nres + j] -= (h - ej) % h
        return v

    def frobenius(self, I: QuadIdeal) -> tuple[int, ...]:
        """Class of an ideal prime to P (for a prime ideal: its Frobenius)."""
        key = (I.a, I.b, I.c)
        if key not in self._cache:
            self._cache[key] = self.to_group(self._free_vector(I))
        return self._cache[key]

    def frobenius_of_rational_prime(self, l: int) -> tuple[int, ...]:
        """Frobenius class for K = Q."""
        return self.frobenius(QuadIdeal(self.K, l))

    def to_json(self, primes=()) -> dict:
        return {
            "K": self.K.m,
            "p_ideal": self.P.to_json()["ideal"],
            "N": self.N,
            "narrow": self.narrow,
            "snf": list(self.invariants),
            "frobenius": {repr(I): list(self.frobenius(I)) for I in primes},
        }


def _divides(P: QuadIdeal, I: QuadIdeal) -> bool:
    return I.issubset(P)


def _unit_relation_elements(K: QuadField, narrow: bool) -> list[QuadElement]:
    if narrow:
        return totally_positive_unit_generators(K)
    if K.is_rational:
        return [K(-1)]
    out = list(torsion_units(K))
    if K.is_real:
        out.append(fundamental_unit(K))
    return out


def ray_class_group(K: QuadField, P: QuadIdeal, N: int, narrow: bool = True) -> RayLevel:
    return _ray_class_group(K, P, N, narrow)


@lru_cache(maxsize=None)
def _ray_class_group(K: QuadField, P: QuadIdeal, N: int, narrow: bool) -> RayLevel:
    res = residue_unit_group(K, P, N)
    nres = len(res.group.invariants)
    cl = narrow_class_group(K)
    reps = class_representatives(K, P)
    horders = tuple(cl.group.invariants)
    nfree = nres + len(reps)
    rels: list[list[int]] = []
    for i, d in enumerate(res.group.invariants):
        r = [0] * nfree
        r[i] = d
        rels.append(r)
    for u in _unit_relation_elements(K, narrow):
        rels.append(list(res.dlog(u)) + [0] * len(reps))
    for j, (a, h) in enumerate(zip(reps, horders)):
        beta = principal_generator(a**h, totally_positive=narrow)
        r = [-c for c in res.dlog(beta)] + [0] * len(reps)
        r[nres + j] += h
        rels.append(r)
    level = None
    group, to_group, from_group = abelian_from_relations(rels, nfree)
    level = RayLevel(K, P, N, narrow, res, reps, horders, group, rels, to_group, from_group)
    if not narrow and K.is_real:
        # the wide group also kills the class of one element of negative norm
        alpha = _negative_norm_element(K, P)
        v = [a - b for a, b in zip(level._free_vector(QuadIdeal.principal(alpha)),
                                   list(res.dlog(alpha)) + [0] * len(reps))]
        rels.append(v)
        group, to_group, from_group = abelian_from_relations(rels, nfree)
        level = RayLevel(K, P, N, narrow, res, reps, horders, group, rels, to_group, from_group)
    return level


def _negative_norm_element(K: QuadField, P: QuadIdeal) -> QuadElement:
    for s in range(1, 1000):
        for x in range(-s, s + 1):
            alpha = K(x, s)
            if alpha.norm() < 0 and not P.contains(alpha.int_coords):
                return alpha
    raise RuntimeError("no element of negative norm found")


def level_projection(high: RayLevel, low: RayLevel):
    """The natural surjection G_high -> G_low as a function on group tuples."""
    if (high.K, high.P, high.narrow) != (low.K, low.P, low.narrow) or high.N < low.N:
        raise ValueError("levels are not comparable")
    if high.class_reps != low.class_reps:
        raise ValueError("levels use different class representatives")
    nres_h = len(high.residue.group.invariants)
    nres_l = len(low.residue.group.invariants)
    images = []
    for b in high.residue.group.basis:
        images.append(list(low.residue.dlog(b)) + [0] * len(low.class_reps))
    for j in range(len(high.class_reps)):
        r = [0] * low.nfree
        r[nres_l + j] = 1
        images.append(r)

    def project(g):
        free = high.from_group(g)
        out = [0] * low.nfree
        for c, img in zip(free, images):
            for k, x in enumerate(img):
                out[k] += c * x
        return low.to_group(out)

    return project


def frobenius_rational(l: int, p: int, N: int) -> int:
    """For K = Q the class of l is the residue l mod p^N."""
    return l % p**N
