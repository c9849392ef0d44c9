"""Arithmetic quandles: slot machines, abelian cover quandles over ray class
levels, finite Galois quandles, and towers of levels."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from sympy import isprime, primerange
from sympy.functions.combinatorial.numbers import kronecker_symbol

from .groups import AbelianGroup, PermutationGroup, perm_mul, perm_inv
from .quandle import FiniteQuandle, coset_quandle, fiber_translation_action, is_morphism
from .quadfield import QuadField, QuadIdeal, prime_root, split_prime, RATIONALS
from .rayclass import RayLevel, level_projection, prime_below, ray_class_group


class ConfigError(ValueError):
    pass


def prime_label(P: QuadIdeal) -> str:
    """Short name of a prime ideal: "l" if it is the only prime over l,
    otherwise "l:r" for (l, w - r)."""
    l = prime_below(P)
    sp = split_prime(P.K, l)
    if len(sp.primes) == 1:
        return str(l)
    return f"{l}:{prime_root(P)}"


def prime_from_label(K: QuadField, label: str) -> QuadIdeal:
    if ":" in label:
        l, r = map(int, label.split(":"))
        for P, _, _ in split_prime(K, l).primes:
            if prime_root(P) == r:
                return P
        raise ValueError(f"no prime {label} in {K}")
    l = int(label)
    return split_prime(K, l).primes[0][0]


def prime_set(K: QuadField, P: QuadIdeal, B: int, split_only: bool = False,
              include_ramified: bool = False, extra: tuple[int, ...] = ()) -> list[QuadIdeal]:
    """Primes of K over rational primes <= B (plus ``extra``), excluding P."""
    p = prime_below(P)
    out = []
    for l in sorted(set(primerange(2, B + 1)) | set(extra)):
        sp = split_prime(K, l)
        if sp.type == "ramified" and not include_ramified and not K.is_rational:
            continue
        if split_only and sp.type != "split":
            continue
        for Q, _, _ in sp.primes:
            if Q != P and l != p:
                out.append(Q)
    return out


def chebotarev_witness(K: QuadField, P: QuadIdeal, N: int, start: int = 2,
                       split_only: bool = False, narrow: bool = True) -> int:
    """Smallest rational prime l >= start, prime to P and unramified, all of
    whose primes have trivial Frobenius at level N."""
    level = ray_class_group(K, P, N, narrow)
    p = prime_below(P)
    ident = level.group.identity
    l = start - 1
    while True:
        l += 1
        if not isprime(l) or l == p:
            continue
        sp = split_prime(K, l)
        if sp.type == "ramified" and not K.is_rational:
            continue
        if split_only and sp.type != "split":
            continue
        if all(level.frobenius(Q) == ident for Q, _, _ in sp.primes):
            return l


@dataclass
class ArithmeticLevel:
    """One level Q_N: a coset quandle over G_N with one fiber per prime."""

    K: QuadField
    P: QuadIdeal
    N: int
    ray: RayLevel
    primes: list[QuadIdeal]
    frob: list[tuple[int, ...]]
    quandle: FiniteQuandle

    @property
    def group(self) -> AbelianGroup:
        return self.ray.group

    @property
    def fiber_labels(self) -> list[str]:
        return [prime_label(Q) for Q in self.primes]

    def fiber_sizes(self) -> list[int]:
        return [f.size for f in self.quandle.fibers]

    def augmentation(self, x: int) -> tuple[int, ...]:
        return self.frob[int(self.quandle.fiber_of[x])]

    def action(self, g) -> np.ndarray:
        """Permutation of the elements given by g in G_N."""
        return np.asarray(fiber_translation_action(self.quandle, [tuple(g)] * len(self.primes)))

    @cached_property
    def _index(self) -> list[dict]:
        G = self.group
        out = []
        base = 0
        for f in self.quandle.fibers:
            H = G.subgroup_elements(list(f.H))
            d = {}
            for k, x in enumerate(f.reps):
                for h in H:
                    d[G.mul(x, h)] = base + k
            out.append(d)
            base += f.size
        return out

    def element(self, fiber: int, g) -> int:
        """Index of the coset g H in the given fiber."""
        return self._index[fiber][self.group.reduce(g)]

    def to_json(self) -> dict:
        return {
            "K": self.K.m,
            "p_ideal": self.P.to_json()["ideal"],
            "N": self.N,
            "primes": self.fiber_labels,
            "quandle": self.quandle.to_json(),
        }


def build_abelian_quandle(K: QuadField, P: QuadIdeal, primes: list[QuadIdeal], N: int,
                          narrow: bool = True) -> ArithmeticLevel:
    for Q in primes:
        if Q == P or Q.issubset(P):
            raise ConfigError(f"ramified prime in M: {prime_label(Q)} divides the modulus")
        l = prime_below(Q)
        if not K.is_rational and split_prime(K, l).type == "ramified":
            raise ConfigError(f"ramified prime in M: {prime_label(Q)} is ramified in {K}")
    ray = ray_class_group(K, P, N, narrow)
    frob = [ray.frobenius(Q) for Q in primes]
    data = [(z, [z]) for z in frob]
    Q = coset_quandle(ray.group, data)
    names = [prime_label(Q_) for Q_ in primes]
    Q.labels = [(names[lam], rep) for lam, f in enumerate(Q.fibers) for rep in f.reps]
    return ArithmeticLevel(K, P, N, ray, list(primes), frob, Q)


def build_slot_machine(p: int, M: list[int], N: int) -> ArithmeticLevel:
    if p in M:
        raise ConfigError(f"ramified prime in M: {p}")
    P = QuadIdeal(RATIONALS, p)
    return build_abelian_quandle(RATIONALS, P, [QuadIdeal(RATIONALS, l) for l in M], N)


def residue_of(level: ArithmeticLevel, g) -> int:
    """For K = Q: the residue mod p^N represented by a group element."""
    if not level.K.is_rational:
        raise ValueError("residue_of is only defined over Q")
    ray = level.ray
    free = ray.from_group(g)
    return ray.residue.group.element(free[: len(ray.residue.group.invariants)])[0]


# ---------------------------------------------------------------------------
# towers


@dataclass
class QuandleTower:
    K: QuadField
    P: QuadIdeal
    primes: list[QuadIdeal]
    levels: dict[int, ArithmeticLevel]
    B: int | None = None
    exclusions: list[str] = field(default_factory=list)
    _proj: dict = field(default_factory=dict, repr=False)

    @property
    def N_max(self) -> int:
        return max(self.levels)

    @property
    def top(self) -> ArithmeticLevel:
        return self.levels[self.N_max]

    def group_projection(self, N: int, M: int):
        return level_projection(self.levels[N].ray, self.levels[M].ray)

    def projection(self, N: int, M: int) -> np.ndarray:
        """Element map Q_N -> Q_M (N >= M)."""
        key = (N, M)
        if key not in self._proj:
            hi, lo = self.levels[N], self.levels[M]
            pg = self.group_projection(N, M)
            out = []
            for lam, f in enumerate(hi.quandle.fibers):
                out.extend(lo.element(lam, pg(x)) for x in f.reps)
            self._proj[key] = np.asarray(out, dtype=np.int64)
        return self._proj[key]

    def verify(self) -> dict:
        """Projections are quandle morphisms commuting with augmentation and action."""
        report = {}
        Ns = sorted(self.levels)
        for hiN, loN in zip(Ns[1:], Ns[:-1]):
            hi, lo = self.levels[hiN], self.levels[loN]
            pi = self.projection(hiN, loN)
            pg = self.group_projection(hiN, loN)
            morph = is_morphism(hi.quandle, lo.quandle, pi)
            aug = all(lo.augmentation(int(pi[x])) == pg(hi.augmentation(x)) for x in range(hi.quandle.n))
            equi = True
            for i in range(len(hi.group.invariants)):
                g = [0] * len(hi.group.invariants)
                g[i] = 1
                g = tuple(g)
                a_hi = hi.action(g)
                a_lo = lo.action(pg(g))
                if not np.array_equal(pi[a_hi], a_lo[pi]):
                    equi = False
            report[(hiN, loN)] = {"morphism": morph, "augmentation": aug, "equivariant": equi}
        return report

    def to_json(self) -> dict:
        return {
            "K": self.K.m,
            "p": prime_below(self.P),
            "p_ideal": self.P.to_json()["ideal"],
            "B": self.B,
            "exclusions": self.exclusions,
            "N": sorted(self.levels),
            "primes": [prime_label(Q) for Q in self.primes],
            "levels": {str(N): lev.quandle.to_json() for N, lev in sorted(self.levels.items())},
        }


def tower(K: QuadField, P: QuadIdeal, primes: list[QuadIdeal], N_max: int, N_min: int = 1,
          B: int | None = None, exclusions=()) -> QuandleTower:
    levels = {N: build_abelian_quandle(K, P, primes, N) for N in range(N_min, N_max + 1)}
    return QuandleTower(K, P, list(primes), levels, B, list(exclusions))


# ---------------------------------------------------------------------------
# finite nonabelian Galois quandles


def cubic_root_count(coeffs: tuple[int, ...], l: int) -> int:
    """Number of roots mod l of the monic polynomial with the given
    coefficients (highest degree first)."""
    count = 0
    for x in range(l):
        v = 0
        for c in coeffs:
            v = (v * x + c) % l
        count += v == 0
    return count


def smallest_in_class(G: PermutationGroup, g) -> tuple[int, ...]:
    """Lexicographically smallest conjugate of g."""
    return min(perm_mul(perm_mul(h, g), perm_inv(h)) for h in G.elements())


def cubic_frobenius(coeffs: tuple[int, ...], l: int) -> tuple[int, ...]:
    """Frobenius class in S_3 from the factorization pattern of a cubic mod l."""
    r = cubic_root_count(coeffs, l)
    if r == 0:
        return (1, 2, 0)
    if r == 1:
        return (1, 0, 2)
    if r == 3:
        return (0, 1, 2)
    raise ValueError(f"{l} divides the discriminant")


@dataclass
class GaloisQuandle:
    group: PermutationGroup
    labels: list[int]
    frob: list[tuple[int, ...]]
    quandle: FiniteQuandle


def build_finite_galois_quandle(G: PermutationGroup, frobenius: dict) -> GaloisQuandle:
    """Coset quandle with canonical class representatives z_l and H_l = <z_l>."""
    labels = sorted(frobenius)
    frob = []
    for l in labels:
        g = tuple(frobenius[l])
        if g not in G:
            raise ConfigError(f"invalid class label for {l}: {g} is not in G")
        frob.append(smallest_in_class(G, g))
    Q = coset_quandle(G, [(z, [z]) for z in frob])
    Q.labels = [(labels[lam], rep) for lam, f in enumerate(Q.fibers) for rep in f.reps]
    return GaloisQuandle(G, labels, frob, Q)


S3 = PermutationGroup([(1, 0, 2), (1, 2, 0)])
CUBIC_23 = (1, 0, -1, -1)  # x^3 - x - 1, discriminant -23


def kronecker_quandle(labels: list[int], D: int) -> FiniteQuandle:
    """C_2 coset quandle with z_l = 1 exactly when (D|l) = -1."""
    C2 = AbelianGroup((2,))
    z = [((1,) if kronecker_symbol(D, l) == -1 else (0,)) for l in labels]
    Q = coset_quandle(C2, [(x, [x]) for x in z])
    Q.labels = [(labels[lam], rep) for lam, f in enumerate(Q.fibers) for rep in f.reps]
    return Q


# ---------------------------------------------------------------------------
# fixtures


@dataclass(frozen=True)
class FixtureConfig:
    m: int
    p: int
    B: int
    N: int
    split_only: bool = False
    witness: bool = True
    p_root: int | None = None  # which prime over p, for split p

    def field(self) -> QuadField:
        return QuadField(self.m)

    def p_ideal(self) -> QuadIdeal:
        K = self.field()
        primes = [Q for Q, _, _ in split_prime(K, self.p).primes]
        if self.p_root is not None:
            primes = [Q for Q in primes if prime_root(Q) == self.p_root]
        return primes[0]


F1 = FixtureConfig(1, 5, 50, 3)
F2 = FixtureConfig(5, 3, 100, 4)
F3 = FixtureConfig(-1, 3, 100, 3, split_only=True)


def fixture_primes(cfg: FixtureConfig, N: int | None = None) -> list[QuadIdeal]:
    K, P = cfg.field(), cfg.p_ideal()
    N = cfg.N if N is None else N
    extra = ()
    if cfg.witness:
        extra = (chebotarev_witness(K, P, N, start=cfg.B + 1, split_only=cfg.split_only),)
    return prime_set(K, P, cfg.B, split_only=cfg.split_only, extra=extra)


def fixture_level(cfg: FixtureConfig, N: int | None = None) -> ArithmeticLevel:
    N = cfg.N if N is None else N
    return build_abelian_quandle(cfg.field(), cfg.p_ideal(), fixture_primes(cfg, N), N)


def fixture_tower(cfg: FixtureConfig, N_max: int | None = None) -> QuandleTower:
    N_max = cfg.N if N_max is None else N_max
    primes = fixture_primes(cfg, N_max)
    return tower(cfg.field(), cfg.p_ideal(), primes, N_max, B=cfg.B)


def fixture_F4(B: int = 60) -> GaloisQuandle:
    frob = {l: cubic_frobenius(CUBIC_23, l) for l in primerange(2, B + 1) if l != 23}
    return build_finite_galois_quandle(S3, frob)


def parity(perm) -> int:
    return sum(perm[i] > perm[j] for i in range(len(perm)) for j in range(i + 1, len(perm))) % 2


def abelianization_map(gq: GaloisQuandle, D: int = -23):
    """Map Q/[Inn, Inn] -> Kronecker C_2 quandle, x H_l -> sign(x) H'_l.

    Returns (quotient, target, f) with f None when the map is not a
    well-defined bijective quandle morphism."""
    from .quandle import quotient_by_commutator

    Qab, cls = quotient_by_commutator(gq.quandle)
    C = kronecker_quandle(gq.labels, D)
    base = np.cumsum([0] + [f.size for f in C.fibers])
    f = np.full(Qab.n, -1, dtype=np.int64)
    for x in range(gq.quandle.n):
        lam = int(gq.quandle.fiber_of[x])
        g = gq.quandle.labels[x][1]
        y = base[lam] + (parity(g) if C.fibers[lam].size == 2 else 0)
        if f[cls[x]] < 0:
            f[cls[x]] = y
        elif f[cls[x]] != y:
            return Qab, C, None
    if (f < 0).any() or len(set(f.tolist())) != C.n or Qab.n != C.n:
        return Qab, C, None
    return Qab, C, (f if is_morphism(Qab, C, f) else None)
