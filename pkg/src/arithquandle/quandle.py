"""Finite quandles: tables, coset quandles, augmented quandles, Inn and Aut.

A quandle on {0..n-1} is stored by its distinct left multiplications: row i
of ``perms`` is a permutation, and ``smap[q]`` says which row is s_q, so
that ``q |> r = perms[smap[q], r]``.  Coset quandles of abelian groups have
one row per fiber, which keeps large levels cheap.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

from .groups import AbelianGroup, PermutationGroup, perm_inv, perm_mul

EXHAUSTIVE_AXIOM_BOUND = 200
AUT_BOUND = 24


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass
class CosetFiber:
    z: Hashable
    H: tuple  # generators of H
    reps: list  # coset representatives in element order

    @property
    def size(self) -> int:
        return len(self.reps)


@dataclass
class FiniteQuandle:
    perms: np.ndarray  # (m, n) distinct left multiplications
    smap: np.ndarray  # (n,) element -> row of perms
    mode: str = "table"
    group: object = None
    fibers: list[CosetFiber] = field(default_factory=list)
    fiber_of: np.ndarray | None = None
    labels: list | None = None

    @property
    def n(self) -> int:
        return len(self.smap)

    def __len__(self):
        return self.n

    def op(self, q: int, r: int) -> int:
        return int(self.perms[self.smap[q], r])

    def s(self, q: int) -> np.ndarray:
        return self.perms[self.smap[q]]

    def table(self) -> np.ndarray:
        return self.perms[self.smap]

    @classmethod
    def from_table(cls, table, labels=None) -> "FiniteQuandle":
        T = np.asarray(table, dtype=np.int64)
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise ValueError("operation table must be square")
        rows, smap = np.unique(T, axis=0, return_inverse=True)
        return cls(rows, smap.reshape(-1).astype(np.int64), "table", labels=labels)

    def distinct_perms(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in row) for row in self.perms]

    def relabel(self, perm: Sequence[int]) -> "FiniteQuandle":
        """Copy with element i renamed to perm[i]; coset data and labels dropped."""
        perm = np.asarray(perm, dtype=np.int64)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        new_perms = perm[self.perms[:, inv]]
        new_smap = self.smap[inv]
        return FiniteQuandle(new_perms, new_smap, "table")

    def stripped(self) -> "FiniteQuandle":
        return FiniteQuandle(self.perms.copy(), self.smap.copy(), "table")

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        out: dict = {"n": self.n, "mode": self.mode}
        if self.mode == "table":
            out["table"] = self.table().tolist()
        else:
            out["group"] = _group_json(self.group)
            out["fibers"] = [
                {"z": _jsonable(f.z), "H": [_jsonable(h) for h in f.H], "size": f.size}
                for f in self.fibers
            ]
        if self.labels is not None:
            out["labels"] = [_jsonable(x) for x in self.labels]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, d: dict) -> "FiniteQuandle":
        labels = d.get("labels")
        if labels is not None:
            labels = [_tuplify(x) for x in labels]
        if d["mode"] == "table":
            Q = cls.from_table(d["table"], labels)
        else:
            G = _group_from_json(d["group"])
            data = [(_tuplify(f["z"]), [_tuplify(h) for h in f["H"]]) for f in d["fibers"]]
            Q = coset_quandle(G, data)
            Q.labels = labels
        if Q.n != d["n"]:
            raise ValueError("element count mismatch")
        return Q


def _jsonable(x):
    if isinstance(x, (tuple, list)):
        return [_jsonable(y) for y in x]
    if isinstance(x, np.integer):
        return int(x)
    return x


def _tuplify(x):
    if isinstance(x, list):
        return tuple(_tuplify(y) for y in x)
    return x


def _group_json(G) -> dict:
    if isinstance(G, AbelianGroup):
        return {"type": "abelian", "invariants": list(G.invariants)}
    if isinstance(G, PermutationGroup):
        return {"type": "perm", "degree": G.degree, "generators": [list(g) for g in G.generators]}
    raise TypeError(f"cannot serialize group {G!r}")


def _group_from_json(d: dict):
    if d["type"] == "abelian":
        return AbelianGroup(tuple(d["invariants"]))
    return PermutationGroup([tuple(g) for g in d["generators"]], d["degree"])


# ---------------------------------------------------------------------------
# constructions


def _identity_of(G):
    return G.identity


def _subgroup(G, gens) -> frozenset:
    if isinstance(G, AbelianGroup):
        return frozenset(G.subgroup_elements(gens))
    return frozenset(PermutationGroup(gens or [G.identity], G.degree).elements())


def coset_quandle(G, data: Sequence[tuple], labels=None) -> FiniteQuandle:
    """Quandle on the disjoint union of G/H_l with xH |> yH' = x z x^-1 y H'.

    ``data`` lists pairs (z_l, generators of H_l)."""
    elems = G.elements()
    eidx = {g: i for i, g in enumerate(elems)}
    mul, inv = G.mul, G.inv
    fibers: list[CosetFiber] = []
    coset_id: list[dict] = []  # per fiber: element -> global index
    offset = 0
    for lam, (z, Hgens) in enumerate(data):
        H = _subgroup(G, list(Hgens))
        if z not in H:
            raise ValueError(f"fiber {lam}: z is not in H")
        if any(mul(z, h) != mul(h, z) for h in H):
            raise ValueError(f"fiber {lam}: H does not centralize z")
        ids: dict = {}
        reps = []
        for x in elems:
            if x in ids:
                continue
            coset = [mul(x, h) for h in H]
            k = offset + len(reps)
            reps.append(x)
            for y in coset:
                ids[y] = k
        coset_id.append(ids)
        fibers.append(CosetFiber(z, tuple(Hgens), reps))
        offset += len(reps)
    n = offset
    fiber_of = np.concatenate([np.full(f.size, i, dtype=np.int64) for i, f in enumerate(fibers)]) if fibers else np.zeros(0, dtype=np.int64)

    def translation(g) -> tuple[int, ...]:
        out = []
        for ids, f in zip(coset_id, fibers):
            out.extend(ids[mul(g, y)] for y in f.reps)
        return tuple(out)

    rows: dict[tuple, int] = {}
    perm_list = []
    smap = np.zeros(n, dtype=np.int64)
    k = 0
    trans_cache: dict = {}
    for lam, f in enumerate(fibers):
        for x in f.reps:
            g = mul(mul(x, f.z), inv(x))
            if g not in trans_cache:
                trans_cache[g] = translation(g)
            t = trans_cache[g]
            if t not in rows:
                rows[t] = len(perm_list)
                perm_list.append(t)
            smap[k] = rows[t]
            k += 1
    perms = np.array(perm_list, dtype=np.int64).reshape(len(perm_list), n)
    return FiniteQuandle(perms, smap, "coset", G, fibers, fiber_of, labels)


def conjugation_quandle(G: PermutationGroup, mirrored: bool = False) -> FiniteQuandle:
    """g |> h = g^-1 h g (or g h g^-1 when ``mirrored``) on the elements of G."""
    elems = G.elements()
    idx = {g: i for i, g in enumerate(elems)}
    table = []
    for g in elems:
        gi = perm_inv(g)
        a, b = (g, gi) if mirrored else (gi, g)
        table.append([idx[perm_mul(perm_mul(a, h), b)] for h in elems])
    return FiniteQuandle.from_table(table, labels=list(elems))


def trivial_quandle(n: int) -> FiniteQuandle:
    return FiniteQuandle(np.arange(n, dtype=np.int64).reshape(1, n), np.zeros(n, dtype=np.int64), "table")


# ---------------------------------------------------------------------------
# axioms


@dataclass
class AxiomReport:
    passed: bool
    mode: str
    checked: int
    failed_axiom: int | None = None
    witness: tuple | None = None


def verify_axioms(Q: FiniteQuandle, exhaustive_bound: int | None = None, samples: int = 10**4,
                  seed: int = 0) -> AxiomReport:
    """Check idempotency, bijectivity of every s_q and self-distributivity.

    Self-distributivity s_q s_r = s_{q|>r} s_q only depends on the rows of
    s_q, s_r and s_{q|>r}, so the exhaustive check runs over distinct row
    triples.  If ``exhaustive_bound`` is given and n exceeds it, random
    triples are sampled instead.
    """
    n = Q.n
    P, smap = Q.perms, Q.smap
    idx = np.arange(n)
    if n and np.any(P[smap, idx] != idx):
        q = int(np.nonzero(P[smap, idx] != idx)[0][0])
        return AxiomReport(False, "exhaustive", 0, 1, (q,))
    for i, row in enumerate(P):
        if len(np.unique(row)) != n:
            q = int(np.nonzero(smap == i)[0][0])
            vals, first = np.unique(row, return_index=True)
            dup = [r for r in range(n) if r not in set(first.tolist())][0]
            r1 = int(np.nonzero(row == row[dup])[0][0])
            return AxiomReport(False, "exhaustive", 0, 2, (q, r1, dup))
    if exhaustive_bound is not None and n > exhaustive_bound:
        rng = random.Random(seed)
        for _ in range(samples):
            q, r, s = rng.randrange(n), rng.randrange(n), rng.randrange(n)
            lhs = Q.op(q, Q.op(r, s))
            rhs = Q.op(Q.op(q, r), Q.op(q, s))
            if lhs != rhs:
                return AxiomReport(False, "sampled", samples, 3, (q, r, s))
        return AxiomReport(True, "sampled", samples)
    checked = 0
    for i in range(len(P)):
        si = P[i]
        # pairs (row of r, row of s_i(r)) that occur
        combos = np.unique(np.stack([smap, smap[si]], axis=1), axis=0)
        for j, k in combos:
            checked += 1
            lhs = si[P[j]]
            rhs = P[k][si]
            if not np.array_equal(lhs, rhs):
                q = int(np.nonzero(smap == i)[0][0])
                r = int(np.nonzero((smap == j) & (smap[si] == k))[0][0])
                s = int(np.nonzero(lhs != rhs)[0][0])
                return AxiomReport(False, "exhaustive", checked, 3, (q, r, s))
    return AxiomReport(True, "exhaustive", checked)


def is_morphism(Q1: FiniteQuandle, Q2: FiniteQuandle, f: Sequence[int]) -> bool:
    """f(q |> r) = f(q) |> f(r) for all q, r."""
    f = np.asarray(f, dtype=np.int64)
    lhs = f[Q1.table()]
    rhs = Q2.perms[Q2.smap[f]][:, f]
    return bool(np.array_equal(lhs, rhs))


# ---------------------------------------------------------------------------
# groups attached to a quandle


def inner_group(Q: FiniteQuandle, transvections: bool = False) -> PermutationGroup:
    gens = Q.distinct_perms()
    if not transvections:
        return PermutationGroup(gens, Q.n)
    base = gens[0] if gens else tuple(range(Q.n))
    tr = [perm_mul(g, perm_inv(base)) for g in gens]
    # normal closure under Inn: conjugate by all s_q
    H = PermutationGroup(tr or [tuple(range(Q.n))], Q.n)
    while True:
        extra = [perm_mul(perm_mul(g, h), perm_inv(g)) for h in H.generators for g in gens]
        extra = [c for c in extra if c not in H]
        if not extra:
            return H
        H = PermutationGroup(list(H.generators) + extra, Q.n)


def orbits(Q: FiniteQuandle) -> list[list[int]]:
    parent = list(range(Q.n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for row in Q.perms:
        for i, j in enumerate(row.tolist()):
            a, b = find(i), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for i in range(Q.n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def quotient_by_partition(Q: FiniteQuandle, parts: list[list[int]]) -> tuple[FiniteQuandle, list[int]]:
    cls = [0] * Q.n
    for k, part in enumerate(parts):
        for x in part:
            cls[x] = k
    cls_a = np.asarray(cls, dtype=np.int64)
    m = len(parts)
    table = np.zeros((m, m), dtype=np.int64)
    for a, pa in enumerate(parts):
        for b, pb in enumerate(parts):
            vals = {int(cls_a[Q.perms[Q.smap[q], r]]) for q in pa for r in pb}
            if len(vals) != 1:
                raise ValueError("partition is not compatible with the operation")
            table[a, b] = vals.pop()
    return FiniteQuandle.from_table(table), cls


def quotient_by_commutator(Q: FiniteQuandle) -> tuple[FiniteQuandle, list[int]]:
    """Q modulo the orbits of [Inn Q, Inn Q], with the projection map."""
    C = inner_group(Q).commutator_subgroup()
    return quotient_by_partition(Q, C.orbits())


# ---------------------------------------------------------------------------
# automorphisms


def _invariants(Q: FiniteQuandle) -> list[tuple]:
    """Isomorphism-invariant data per element."""
    orb = orbits(Q)
    osize = {x: len(o) for o in orb for x in o}
    fixed = (Q.perms == np.arange(Q.n)).sum(axis=1)
    row_count = np.bincount(Q.smap, minlength=len(Q.perms))
    return [(osize[x], int(fixed[Q.smap[x]]), int(row_count[Q.smap[x]])) for x in range(Q.n)]


def _generating_sequence(Q: FiniteQuandle) -> list[int]:
    T = Q.table()
    Tinv = np.argsort(T, axis=1)
    gens: list[int] = []
    span: set[int] = set()
    for x in range(Q.n):
        if x in span:
            continue
        gens.append(x)
        span = _closure(T, Tinv, set(gens))
    return gens


def _closure(T, Tinv, S: set[int]) -> set[int]:
    S = set(S)
    frontier = list(S)
    while frontier:
        new = []
        cur = list(S)
        for a in frontier:
            for b in cur:
                for c in (T[a, b], T[b, a], Tinv[a, b], Tinv[b, a]):
                    c = int(c)
                    if c not in S:
                        S.add(c)
                        new.append(c)
        frontier = new
    return S


def isomorphisms(Q1: FiniteQuandle, Q2: FiniteQuandle, limit: int | None = None,
                 budget: int = 10**6) -> list[tuple[int, ...]]:
    """All (up to ``limit``) isomorphisms Q1 -> Q2 by backtracking on a
    generating sequence with propagation."""
    if Q1.n != Q2.n:
        return []
    n = Q1.n
    T1, T2 = Q1.table(), Q2.table()
    I1, I2 = np.argsort(T1, axis=1), np.argsort(T2, axis=1)
    inv1, inv2 = _invariants(Q1), _invariants(Q2)
    if sorted(inv1) != sorted(inv2):
        return []
    gens = _generating_sequence(Q1)
    out: list[tuple[int, ...]] = []
    steps = [0]

    def propagate(f: dict, rev: dict) -> bool:
        frontier = list(f)
        while frontier:
            new = []
            keys = list(f)
            for a in frontier:
                for b in keys:
                    for c1, c2 in ((T1[a, b], T2[f[a], f[b]]), (T1[b, a], T2[f[b], f[a]]),
                                   (I1[a, b], I2[f[a], f[b]]), (I1[b, a], I2[f[b], f[a]])):
                        c1, c2 = int(c1), int(c2)
                        if c1 in f:
                            if f[c1] != c2:
                                return False
                        else:
                            if c2 in rev or inv1[c1] != inv2[c2]:
                                return False
                            f[c1] = c2
                            rev[c2] = c1
                            new.append(c1)
                keys = list(f)
            frontier = new
        return True

    def search(k: int, f: dict, rev: dict):
        steps[0] += 1
        if steps[0] > budget:
            raise SearchBudgetExceeded(f"isomorphism search exceeded {budget} steps")
        if limit is not None and len(out) >= limit:
            return
        if k == len(gens):
            if len(f) == n:
                out.append(tuple(f[i] for i in range(n)))
            return
        g = gens[k]
        if g in f:
            search(k + 1, f, rev)
            return
        for c in range(n):
            if c in rev or inv1[g] != inv2[c]:
                continue
            f2, rev2 = dict(f), dict(rev)
            f2[g] = c
            rev2[c] = g
            if propagate(f2, rev2):
                search(k + 1, f2, rev2)

    search(0, {}, {})
    return out


def automorphism_group(Q: FiniteQuandle, bound: int = AUT_BOUND, budget: int = 10**6) -> PermutationGroup:
    if Q.n > bound:
        raise SearchBudgetExceeded(f"|Q|={Q.n} exceeds the exhaustive bound {bound}")
    auts = isomorphisms(Q, Q, budget=budget)
    return PermutationGroup(auts, Q.n)


def automorphism_list(Q: FiniteQuandle, bound: int = AUT_BOUND, budget: int = 10**6) -> list[tuple[int, ...]]:
    if Q.n > bound:
        raise SearchBudgetExceeded(f"|Q|={Q.n} exceeds the exhaustive bound {bound}")
    return sorted(isomorphisms(Q, Q, budget=budget))


# ---------------------------------------------------------------------------
# augmented quandles


@dataclass
class AugmentedQuandle:
    """A group G acting on {0..n-1} with an augmentation eps: Q -> G.

    ``act(g, q)`` is the action and ``eps[q]`` the augmentation."""

    group: object
    n: int
    act: Callable
    eps: list

    def quandle(self) -> FiniteQuandle:
        table = [[self.act(self.eps[q], r) for r in range(self.n)] for q in range(self.n)]
        return FiniteQuandle.from_table(table)

    def check(self) -> bool:
        G = self.group
        for q in range(self.n):
            if self.act(self.eps[q], q) != q:
                return False
        for g in G.elements():
            gi = G.inv(g)
            for q in range(self.n):
                if self.eps[self.act(g, q)] != G.mul(G.mul(g, self.eps[q]), gi):
                    return False
        return True


@dataclass
class FromAugmentedResult:
    quandle: FiniteQuandle
    iso: list[int]  # element of A -> element of the coset quandle
    representatives: list[int]
    stabilizers_cyclic: list[bool]


def from_augmented(A: AugmentedQuandle, require_cyclic_stabilizers: bool = False) -> FromAugmentedResult:
    """Coset model Q(G, {Stab(q_l)}, {eps(q_l)}) of an augmented quandle."""
    G = A.group
    elems = G.elements()
    seen: set[int] = set()
    reps = []
    data = []
    cyc = []
    for q in range(A.n):
        if q in seen:
            continue
        orbit = {A.act(g, q) for g in elems}
        seen |= orbit
        reps.append(q)
        stab = [g for g in elems if A.act(g, q) == q]
        data.append((A.eps[q], stab))
        gen = _subgroup(G, [A.eps[q]])
        cyc.append(gen == frozenset(stab))
        if require_cyclic_stabilizers and not cyc[-1]:
            raise ValueError(f"stabilizer of {q} is not generated by its augmentation")
    C = coset_quandle(G, data)
    iso = [0] * A.n
    base = 0
    for lam, (q, f) in enumerate(zip(reps, C.fibers)):
        stab = _subgroup(G, list(data[lam][1]))
        for k, x in enumerate(f.reps):
            iso[A.act(x, q)] = base + k
        base += f.size
    return FromAugmentedResult(C, iso, reps, cyc)


# ---------------------------------------------------------------------------
# abelian coset quandles: translations


def fiber_translation_action(Q: FiniteQuandle, u: Sequence) -> tuple[int, ...]:
    """The automorphism x H_l -> u_l x H_l of an abelian coset quandle."""
    G = Q.group
    if not isinstance(G, AbelianGroup):
        raise ValueError("fiber translations need an abelian coset quandle")
    if len(u) != len(Q.fibers):
        raise ValueError("one group element per fiber is required")
    out = []
    base = 0
    for f, ul in zip(Q.fibers, u):
        H = _subgroup(G, list(f.H))
        ids = {}
        for k, x in enumerate(f.reps):
            for h in H:
                ids[G.mul(x, h)] = base + k
        out.extend(ids[G.mul(ul, x)] for x in f.reps)
        base += f.size
    return tuple(out)


def fiber_permutation(Q: FiniteQuandle, f: Sequence[int]) -> tuple[int, ...]:
    """The permutation of fibers induced by an automorphism."""
    fo = Q.fiber_of
    out = []
    for lam in range(len(Q.fibers)):
        x = int(np.nonzero(fo == lam)[0][0])
        out.append(int(fo[f[x]]))
    return tuple(out)
