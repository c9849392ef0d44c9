"""Finite groups used throughout: integer Smith normal form, abelian groups
given by invariant factors, black-box abelian groups with discrete logs, and
permutation groups closed by breadth-first search."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, isqrt, prod
from typing import Callable, Hashable, Iterable, Sequence

from sympy import factorint

ENUMERATION_CEILING = 2_000_000
DLOG_CEILING = 10**9


class GroupTooLarge(ValueError):
    pass


# ---------------------------------------------------------------------------
# integer linear algebra


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(A: Sequence[Sequence[int]]):
    """Return (D, U, V) with U*A*V = D diagonal, U and V unimodular, and the
    diagonal entries forming a divisibility chain d_1 | d_2 | ... ."""
    m = len(A)
    n = len(A[0]) if m else 0
    D = [list(map(int, row)) for row in A]
    U = _identity(m)
    V = _identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (D, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero absolute value in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j] and (best is None or abs(D[i][j]) < abs(D[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        done = False
        while not done:
            done = True
            for i in range(t + 1, m):
                if D[i][t]:
                    g, x, y = _xgcd(D[t][t], D[i][t])
                    a, b = D[t][t] // g, D[i][t] // g
                    for M in (D, U):
                        ri, rt = M[i], M[t]
                        M[t], M[i] = (
                            [x * u + y * v for u, v in zip(rt, ri)],
                            [-b * u + a * v for u, v in zip(rt, ri)],
                        )
            for j in range(t + 1, n):
                if D[t][j]:
                    done = False
                    g, x, y = _xgcd(D[t][t], D[t][j])
                    a, b = D[t][t] // g, D[t][j] // g
                    for M in (D, V):
                        for row in M:
                            ct, cj = row[t], row[j]
                            row[t], row[j] = x * ct + y * cj, -b * ct + a * cj
            if any(D[i][t] for i in range(t + 1, m)):
                done = False
        if D[t][t] < 0:
            D[t] = [-v for v in D[t]]
            U[t] = [-v for v in U[t]]
        # divisibility: fold later entries not divisible by the pivot
        bad = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if D[i][j] % D[t][t]:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            D[t] = [u + v for u, v in zip(D[t], D[bad])]
            U[t] = [u + v for u, v in zip(U[t], U[bad])]
            continue
        t += 1
    return D, U, V


def matmul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def inverse_unimodular(V: Sequence[Sequence[int]]) -> list[list[int]]:
    """Exact inverse of an integer matrix with determinant +-1."""
    from fractions import Fraction

    n = len(V)
    M = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(V)]
    for c in range(n):
        p = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[p] = M[p], M[c]
        piv = M[c][c]
        M[c] = [x / piv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    out = [[row[n + j] for j in range(n)] for row in M]
    if any(x.denominator != 1 for row in out for x in row):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]


def kernel_mod(A: Sequence[Sequence[int]], moduli: Sequence[int]) -> list[list[int]]:
    """Basis of {c in Z^k : sum_i c_i A_i = 0 in (+) Z/moduli}, rows A_i."""
    k = len(A)
    r = len(moduli)
    # stack [A | I_k] over [diag(moduli) | 0] and row-reduce on the first r columns
    rows = [list(A[i]) + [int(i == j) for j in range(k)] for i in range(k)]
    rows += [[moduli[i] if j == i else 0 for j in range(r)] + [0] * k for i in range(r)]
    H = _hermite_rows(rows, r)
    return [row[r:] for row in H if not any(row[:r]) and any(row[r:])]


def _hermite_rows(rows: list[list[int]], ncols: int) -> list[list[int]]:
    rows = [list(r) for r in rows]
    pivot_row = 0
    for c in range(ncols):
        while True:
            nz = [i for i in range(pivot_row, len(rows)) if rows[i][c]]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(rows[i][c]))
            rows[pivot_row], rows[i0] = rows[i0], rows[pivot_row]
            clean = True
            for i in range(pivot_row + 1, len(rows)):
                if rows[i][c]:
                    q = rows[i][c] // rows[pivot_row][c]
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[pivot_row])]
                    if rows[i][c]:
                        clean = False
            if clean:
                break
        if any(rows[i][c] for i in range(pivot_row, len(rows))):
            pivot_row += 1
    return rows


def hnf_lattice(vectors: Iterable[Sequence[int]], dim: int) -> list[list[int]]:
    """Row-style Hermite basis of the lattice spanned by ``vectors`` in Z^dim."""
    rows = _hermite_rows([list(v) for v in vectors], dim)
    return [r for r in rows if any(r)]


# ---------------------------------------------------------------------------
# abelian groups given by invariant factors


@dataclass(frozen=True)
class AbelianGroup:
    """The group Z/d_1 + ... + Z/d_k with elements stored as integer tuples."""

    invariants: tuple[int, ...]

    @property
    def order(self) -> int:
        return prod(self.invariants)

    @property
    def identity(self) -> tuple[int, ...]:
        return tuple(0 for _ in self.invariants)

    def reduce(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(int(x) % d for x, d in zip(v, self.invariants))

    def mul(self, a, b):
        return tuple((x + y) % d for x, y, d in zip(a, b, self.invariants))

    def inv(self, a):
        return tuple((-x) % d for x, d in zip(a, self.invariants))

    def pow(self, a, k: int):
        return tuple((x * k) % d for x, d in zip(a, self.invariants))

    def element_order(self, a) -> int:
        o = 1
        for x, d in zip(a, self.invariants):
            o = o * (d // gcd(x, d)) // gcd(o, d // gcd(x, d))
        return o

    def elements(self) -> list[tuple[int, ...]]:
        if self.order > ENUMERATION_CEILING:
            raise GroupTooLarge(f"refusing to enumerate a group of order {self.order}")
        out = [()]
        for d in self.invariants:
            out = [e + (i,) for e in out for i in range(d)]
        return out

    def subgroup_elements(self, gens: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
        seen = {self.identity}
        frontier = [self.identity]
        gens = [self.reduce(g) for g in gens]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return sorted(seen)

    def sylow_order(self, q: int) -> int:
        out = 1
        for d in self.invariants:
            while d % q == 0:
                d //= q
                out *= q
        return out


def abelian_from_relations(relations: Sequence[Sequence[int]], ngens: int):
    """Presentation Z^ngens / <relations> as (AbelianGroup, to_group, from_group).

    ``to_group`` maps a free coordinate vector to invariant-factor coordinates;
    ``from_group`` maps back to one free representative.
    """
    rel = [list(r) for r in relations] or [[0] * ngens]
    D, _, V = smith_normal_form(rel)
    diag = [D[i][i] if i < len(D) else 0 for i in range(ngens)]
    if any(d == 0 for d in diag):
        raise ValueError("relations do not define a finite group")
    keep = [i for i, d in enumerate(diag) if d != 1]
    group = AbelianGroup(tuple(diag[i] for i in keep))
    Vinv = inverse_unimodular(V)

    def to_group(x: Sequence[int]) -> tuple[int, ...]:
        y = [sum(x[j] * V[j][i] for j in range(ngens)) for i in range(ngens)]
        return tuple(y[i] % diag[i] for i in keep)

    def from_group(v: Sequence[int]) -> list[int]:
        y = [0] * ngens
        for c, i in zip(v, keep):
            y[i] = c
        return [sum(y[i] * Vinv[i][j] for i in range(ngens)) for j in range(ngens)]

    return group, to_group, from_group


# ---------------------------------------------------------------------------
# black-box abelian groups


@dataclass
class AbelianGroupPresentation:
    """A finite abelian group of concrete elements with an SNF basis.

    ``basis[i]`` has order ``invariants[i]`` and every element is uniquely
    ``prod basis[i]**v[i]`` with ``0 <= v[i] < invariants[i]``.
    """

    invariants: tuple[int, ...]
    basis: list
    mul: Callable
    identity: Hashable
    witness: str = ""
    _pow_cache: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return prod(self.invariants)

    @property
    def abstract(self) -> AbelianGroup:
        return AbelianGroup(self.invariants)

    def power(self, g, k: int):
        out = self.identity
        base = g
        while k:
            if k & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            k >>= 1
        return out

    def element(self, v: Sequence[int]):
        out = self.identity
        for g, k in zip(self.basis, v):
            out = self.mul(out, self.power(g, k % self.order))
        return out

    def dlog(self, h) -> tuple[int, ...]:
        """Pohlig-Hellman reduction to prime-power parts, then baby-step
        giant-step inside each Sylow subgroup."""
        if self.order > DLOG_CEILING:
            raise GroupTooLarge(f"group order {self.order} exceeds the dlog ceiling")
        n = self.order
        if n == 1:
            return ()
        residues: list[list[tuple[int, int]]] = [[] for _ in self.invariants]
        for q, a in factorint(n).items():
            qa = q**a
            cof = n // qa
            hq = self.power(h, cof)
            # Sylow basis: cof * basis[i] has order q^{v_q(d_i)}
            sub_orders = []
            sub_basis = []
            for g, d in zip(self.basis, self.invariants):
                e = 0
                while d % q == 0:
                    d //= q
                    e += 1
                sub_orders.append(q**e)
                sub_basis.append(self.power(g, cof))
            coords = self._sylow_bsgs(hq, sub_basis, sub_orders)
            # (g_i^cof)^c = (g_i^x)^cof, so coords[i] is x_i mod q^e_i
            for i, (c, o) in enumerate(zip(coords, sub_orders)):
                if o > 1:
                    residues[i].append((c % o, o))
        out = []
        for d, parts in zip(self.invariants, residues):
            x, m = 0, 1
            for r, o in parts:
                # CRT
                t = ((r - x) * pow(m, -1, o)) % o
                x, m = x + m * t, m * o
            out.append(x % d)
        return tuple(out)

    def _sylow_bsgs(self, h, basis, orders):
        idx = [i for i, o in enumerate(orders) if o > 1]
        if not idx:
            return [0] * len(orders)
        idx.sort(key=lambda i: -orders[i])
        top, rest = idx[0], idx[1:]
        n_top = orders[top]
        step = isqrt(n_top - 1) + 1
        # baby steps: all combinations of the smaller factors times g_top^j, j < step
        rest_elems = [((), self.identity)]
        for i in rest:
            new = []
            for vec, el in rest_elems:
                cur = el
                for k in range(orders[i]):
                    new.append((vec + (k,), cur))
                    cur = self.mul(cur, basis[i])
            rest_elems = new
        table = {}
        g_top = basis[top]
        for vec, el in rest_elems:
            cur = el
            for j in range(step):
                table.setdefault(cur, (j, vec))
                cur = self.mul(cur, g_top)
        giant = self.power(g_top, (n_top - step) % n_top)  # g_top^{-step}
        cur = h
        for t in range(step + 1):
            hit = table.get(cur)
            if hit is not None:
                j, vec = hit
                out = [0] * len(orders)
                out[top] = (t * step + j) % n_top
                for i, k in zip(rest, vec):
                    out[i] = k
                return out
            cur = self.mul(cur, giant)
        raise ValueError("element is not in the group")

    @classmethod
    def from_generators(cls, gens: Sequence, mul: Callable, identity, order: int | None = None,
                        witness: str = "") -> "AbelianGroupPresentation":
        """Discover the structure of <gens> by incremental enumeration and an
        SNF of the collected relations."""
        elems = {identity: ()}
        used: list = []
        relations: list[list[int]] = []
        for g in gens:
            k = len(used)
            # powers of g until one lands in the current subgroup
            pw = g
            m = 1
            while pw not in elems:
                pw = mul(pw, g)
                m += 1
                if m * len(elems) > ENUMERATION_CEILING:
                    raise GroupTooLarge("subgroup enumeration ceiling exceeded")
            if m == 1:
                continue
            prev = {e: v + (0,) for e, v in elems.items()}
            relations = [r + [0] for r in relations]
            relations.append([-c for c in prev[pw][:k]] + [m])
            new = dict(prev)
            cur_list = list(prev.items())
            for j in range(1, m):
                nxt = []
                for e, v in cur_list:
                    e2 = mul(e, g)
                    v2 = v[:k] + (j,)
                    new[e2] = v2
                    nxt.append((e2, v2))
                cur_list = nxt
            elems = new
            used.append(g)
            if order is not None and len(elems) == order:
                break
        if order is not None and len(elems) != order:
            raise ValueError(f"generators span {len(elems)} elements, expected {order}")
        k = len(used)
        if k == 0:
            return cls((), [], mul, identity, witness)
        group, to_group, from_group = abelian_from_relations(relations, k)
        basis = []
        for i in range(len(group.invariants)):
            unit = [0] * len(group.invariants)
            unit[i] = 1
            free = from_group(unit)
            el = identity
            for g, c in zip(used, free):
                c %= len(elems)
                p = identity
                b = g
                while c:
                    if c & 1:
                        p = mul(p, b)
                    b = mul(b, b)
                    c >>= 1
                el = mul(el, p)
            basis.append(el)
        return cls(group.invariants, basis, mul, identity, witness)


# ---------------------------------------------------------------------------
# permutation groups


def perm_mul(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    """Composition a after b: (a*b)(i) = a[b[i]]."""
    return tuple(a[i] for i in b)


def perm_inv(a: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(a)
    for i, x in enumerate(a):
        out[x] = i
    return tuple(out)


def perm_order(a: Sequence[int]) -> int:
    seen = [False] * len(a)
    o = 1
    for i in range(len(a)):
        if not seen[i]:
            length = 0
            j = i
            while not seen[j]:
                seen[j] = True
                j = a[j]
                length += 1
            o = o * length // gcd(o, length)
    return o


class PermutationGroup:
    """Permutation group on range(degree), elements enumerated by BFS.

    Elements are tuples; the element list is sorted lexicographically so that
    iteration order is reproducible.
    """

    def __init__(self, generators: Iterable[Sequence[int]], degree: int | None = None,
                 limit: int = ENUMERATION_CEILING):
        gens = [tuple(g) for g in generators]
        if degree is None:
            degree = len(gens[0]) if gens else 0
        self.degree = degree
        self.identity = tuple(range(degree))
        gens = [g for g in dict.fromkeys(gens) if g != self.identity]
        self.generators = gens
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = perm_mul(g, x)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
                        if len(seen) * max(degree, 1) > limit * 64:
                            raise GroupTooLarge("permutation group too large to enumerate")
            frontier = nxt
        self._elements = sorted(seen)
        self._set = seen

    @property
    def order(self) -> int:
        return len(self._elements)

    def elements(self) -> list[tuple[int, ...]]:
        return list(self._elements)

    def __contains__(self, g) -> bool:
        return tuple(g) in self._set

    def mul(self, a, b):
        return perm_mul(a, b)

    def inv(self, a):
        return perm_inv(a)

    def is_abelian(self) -> bool:
        return all(perm_mul(a, b) == perm_mul(b, a) for a in self.generators for b in self.generators)

    def orbits(self) -> list[list[int]]:
        parent = list(range(self.degree))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for g in self.generators:
            for i, j in enumerate(g):
                a, b = find(i), find(j)
                if a != b:
                    parent[max(a, b)] = min(a, b)
        groups: dict[int, list[int]] = {}
        for i in range(self.degree):
            groups.setdefault(find(i), []).append(i)
        return sorted(groups.values())

    def commutator_subgroup(self) -> "PermutationGroup":
        comms = set()
        gens = self.generators
        for a in gens:
            for b in gens:
                c = perm_mul(perm_mul(perm_inv(a), perm_inv(b)), perm_mul(a, b))
                comms.add(c)
        # normal closure under conjugation by the generators
        H = PermutationGroup(comms or [self.identity], self.degree)
        while True:
            extra = set()
            for h in H.generators:
                for g in gens:
                    c = perm_mul(perm_mul(g, h), perm_inv(g))
                    if c not in H:
                        extra.add(c)
            if not extra:
                return H
            H = PermutationGroup(list(H.generators) + sorted(extra), self.degree)

    def sylow_order(self, q: int) -> int:
        n = self.order
        out = 1
        while n % q == 0:
            n //= q
            out *= q
        return out

    def abelian_invariants(self) -> tuple[int, ...]:
        """Invariant factors, valid only for abelian groups.

        Counts elements of order dividing q^k for each prime q and rebuilds the
        q-primary decomposition from those counts."""
        if not self.is_abelian():
            raise ValueError("group is not abelian")
        orders = [perm_order(g) for g in self._elements]
        primary: dict[int, list[int]] = {}
        for q in factorint(self.order):
            counts = []
            k = 0
            while True:
                c = sum(1 for o in orders if (q**k) % o == 0) if k else 1
                counts.append(c)
                if c == self.sylow_order(q):
                    break
                k += 1
            # counts[k] = q^{sum_i min(k, e_i)}; number of factors with e_i >= k
            logs = [0]
            for c in counts[1:]:
                e = 0
                while c > 1:
                    c //= q
                    e += 1
                logs.append(e)
            ge = [logs[k] - logs[k - 1] for k in range(1, len(logs))]  # #{e_i >= k}
            exps = []
            for k in range(len(ge)):
                nxt = ge[k + 1] if k + 1 < len(ge) else 0
                exps += [k + 1] * (ge[k] - nxt)
            primary[q] = sorted(exps)
        # combine primary parts into a divisibility chain
        width = max((len(v) for v in primary.values()), default=0)
        inv = [1] * width
        for q, exps in primary.items():
            exps = [0] * (width - len(exps)) + exps
            for i, e in enumerate(exps):
                inv[i] *= q**e
        return tuple(d for d in inv if d > 1)
