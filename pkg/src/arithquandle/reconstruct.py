"""Recovering arithmetic from quandles.

The group Inn(Q) and the fibers come straight from the finite tables, the
prime p from the growth of |Inn(Q_N)| along a tower, and the residue
characteristics of the primes in M from p-adic logarithm coordinates of
the Frobenius elements, which the tower carries as its limit data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np
from sympy import factorint, primerange

from .groups import PermutationGroup
from .padic import Inconclusive, LocalElement, LocalField, padic_log, qp_rank, rational_ratio
from .quadfield import (
    QuadField,
    QuadIdeal,
    embed,
    ideal_power_class_exponent,
    local_field,
    principal_generator,
    split_prime,
)
from .quandle import FiniteQuandle, automorphism_list, fiber_permutation, fiber_translation_action, inner_group, is_morphism, orbits
from .rayclass import prime_below

MIN_HEIGHT = 2


# ---------------------------------------------------------------------------
# cases and reciprocity coordinates


def classify_case(K: QuadField, P: QuadIdeal) -> str:
    if K.is_rational:
        return "1"
    sp = split_prime(K, prime_below(P))
    local_degree = 1 if sp.type == "split" else 2
    if K.is_real:
        return "2-0" if local_degree == 1 else "2-1"
    return "2-2" if local_degree == 1 else "2-3"


CASE_RANK = {"1": 1, "2-0": 0, "2-1": 1, "2-2": 1, "2-3": 2}


def qp_vector(z: LocalElement) -> tuple[LocalElement, ...]:
    """Coordinates of z over Q_p in the basis {1, w}."""
    F = z.field
    Qp = LocalField(F.p)
    if F.kind == "triv":
        return (z,)
    return (LocalElement(Qp, z.shift, z.a, 0, z.rel), LocalElement(Qp, z.shift, z.b, 0, z.rel))


@dataclass
class ReciprocityData:
    """Logarithm coordinates r(l) in V (dimension R over Q_p), one per fiber."""

    case: str
    p: int
    R: int
    precision: int
    values: list[tuple[LocalElement, ...]]
    labels: list[str] | None = None
    exponents: list[int] = field(default_factory=list)

    def scalars(self) -> list[LocalElement]:
        if self.R != 1:
            raise ValueError("scalar coordinates need R = 1")
        return [v[0] for v in self.values]


def frobenius_log(K: QuadField, P: QuadIdeal, l_ideal: QuadIdeal, precision: int,
                  unit=None) -> tuple[int, tuple[LocalElement, ...]]:
    """(n, r) with r the log-coordinates of a generator of l^n divided by n.

    For real K with P inert or ramified the unit line is divided out through
    the trace, so r = ln N(alpha) / n in Q_p.  ``unit`` multiplies the
    generator, to test independence of that choice."""
    case = classify_case(K, P)
    if case == "2-0":
        raise ValueError("no reciprocity coordinates in case 2-0: G is finite")
    if K.is_rational:
        n, alpha = 1, principal_generator(l_ideal)
    elif K.is_real:
        n, alpha = ideal_power_class_exponent(l_ideal)
    else:
        n = 1
        J = l_ideal
        while (alpha := principal_generator(J, totally_positive=False)) is None:
            n += 1
            J = J * l_ideal
    if unit is not None:
        alpha = alpha * unit
    F = local_field(K, P)
    extra = 2 + math.ceil(math.log(n + 1, F.p))

    def log_at(digits):
        z = padic_log(embed(alpha, P, digits + extra + 2), digits + extra)
        if K.is_real and not K.is_rational:
            z = z.trace()
        return z

    # precision counts significant digits of r and of r + conj(r)
    z = log_at(precision)
    v = _shift(z)
    if F.kind != "triv":
        v = max(v, _shift(z.trace()))
    if v:
        z = log_at(precision + v)
    r = z.div_int(n).truncate(precision + v)
    return n, qp_vector(r)


def _shift(z: LocalElement) -> int:
    return z.shift if not z.is_zero() else 0


def reciprocity_coordinates(level, precision: int = 12) -> ReciprocityData:
    """Coordinates r(l) for every prime of an ArithmeticLevel."""
    from .arith import prime_label

    K, P = level.K, level.P
    case = classify_case(K, P)
    if case == "2-0":
        raise ValueError("case 2-0: G is finite, there is nothing to take logarithms of")
    vals, ns = [], []
    for Q in level.primes:
        n, r = frobenius_log(K, P, Q, precision)
        vals.append(r)
        ns.append(n)
    return ReciprocityData(case, prime_below(P), CASE_RANK[case], precision, vals,
                           [prime_label(Q) for Q in level.primes], ns)


def effective_height(p: int, digits: int, H: int, guard: int = 2) -> int:
    """Largest usable height for ratios of numbers known to ``digits`` digits."""
    P = digits - guard
    cap = math.isqrt(p**P // 100) if P > 0 else 0
    return min(H, cap)


# ---------------------------------------------------------------------------
# residue characteristics (R = 1 values)


@dataclass
class ResidueCharResult:
    chars: list[int | None]
    ratios: list[object]  # r(x) / ln c(x), relative to the anchor
    height: int
    anchor: int
    diagnostics: list[str] = field(default_factory=list)


def _logs(p: int, cands: list[int], digits: int) -> dict[int, LocalElement]:
    """ln l to ``digits`` significant digits."""
    F = LocalField(p)
    out = {}
    for l in cands:
        z = padic_log(F(l, 0, digits + 2), digits)
        if _shift(z):
            z = padic_log(F(l, 0, digits + _shift(z) + 2), digits + _shift(z))
        out[l] = z
    return out


def recover_residue_chars(values: list[LocalElement], p: int, B_c: int = 500, H: int = 10**3) -> ResidueCharResult:
    """Residue characteristics c(x) for values r(x) in Q^x ln c(x).

    c is characterised by r(y)/r(x) = ln c(y) / ln c(x) mod Q^x.  Heights are
    tried in increasing order up to min(H, precision cap); at each height an
    anchor fiber a is resolved first (only its true l_a leaves every other
    fiber a compatible prime), the remaining fibers are fixed against the
    established ones, and the assignment is checked on every pair."""
    n = len(values)
    if n < 2:
        raise Inconclusive("at least two fibers are needed to fix residue characteristics")
    digits = min(v.abs_prec - v.valuation for v in values)
    h_max = effective_height(p, digits, H)
    if h_max < MIN_HEIGHT:
        raise Inconclusive(f"{digits} digits at p={p} cannot separate ratios of height {MIN_HEIGHT}")
    cands = [l for l in primerange(2, B_c + 1) if l != p]
    logs = _logs(p, cands, max(v.abs_prec - v.valuation for v in values) + 2)
    diagnostics = []
    if h_max < H:
        diagnostics.append(f"height capped at {h_max} by the precision rule")
    h = MIN_HEIGHT
    while True:
        out = _assign(values, cands, logs, h)
        if out is not None:
            chars, a = out
            break
        if h >= h_max:
            raise Inconclusive(f"no consistent assignment up to height {h_max}")
        h = min(2 * h, h_max)
    ratios = [rational_ratio(values[a] * logs[c], values[x] * logs[chars[a]], h) if c else None
              for x, c in enumerate(chars)]
    missing = [x for x, c in enumerate(chars) if c is None]
    if missing:
        diagnostics.append(f"fibers {missing}: residue characteristic exceeds B_c={B_c}")
    return ResidueCharResult(chars, ratios, h, a, diagnostics)


def _assign(values, cands, logs, h):
    """Assignment at height h (None for fibers whose prime exceeds the
    candidate bound), or None if the anchor is not yet resolved."""
    n = len(values)

    def ok(x, lx, y, ly) -> bool:
        return rational_ratio(values[x] * logs[ly], values[y] * logs[lx], h) is not None

    a = min(range(n), key=lambda i: values[i].valuation)
    cover = []
    for la in cands:
        S = {x: [l for l in cands if ok(a, la, x, l)] for x in range(n) if x != a}
        cover.append((sum(bool(c) for c in S.values()), la, S))
    cover.sort(key=lambda t: -t[0])
    best, la, S = cover[0]
    second = cover[1][0] if len(cover) > 1 else 0
    if 2 * best < n - 1:
        return None
    if 2 * second >= best:
        raise Inconclusive(f"height {h}: anchor fiber admits {la} and {cover[1][1]}")
    chars: dict[int, int | None] = {a: la}
    chars.update({x: c[0] for x, c in S.items() if len(c) == 1})
    for x, cand in S.items():
        if not cand:
            chars[x] = None
        if len(cand) <= 1:
            continue
        fixed = [y for y in chars if y != x and chars[y] is not None]
        scores = sorted(((sum(ok(x, l, y, chars[y]) for y in fixed), l) for l in cand), reverse=True)
        if scores[0][0] == scores[1][0]:
            raise Inconclusive(f"fiber {x}: residue characteristic ambiguous between {scores[0][1]} and {scores[1][1]}")
        chars[x] = scores[0][1]
    out = [chars[x] for x in range(n)]
    known = [x for x in range(n) if out[x] is not None]
    for i, x in enumerate(known):
        for y in known[i + 1:]:
            if not ok(x, out[x], y, out[y]):
                raise Inconclusive(f"fibers {x}, {y}: assignment fails the pairwise check")
    return out, a


def recover_residue_char(data: ReciprocityData, index: int, B_c: int = 500, H: int = 10**3) -> int:
    return _residue_chars_of(data, B_c, H).chars[index]


def _residue_chars_of(data: ReciprocityData, B_c: int, H: int) -> ResidueCharResult:
    if data.R == 1:
        return recover_residue_chars(data.scalars(), data.p, B_c, H)
    if data.R == 2:
        w = detect_W(data.values)
        return recover_residue_chars(w.norm_sums, data.p, B_c, H)
    raise ValueError("no residue characteristics without reciprocity coordinates")


# ---------------------------------------------------------------------------
# R = 2: the line W = Q_p inside V and the conjugation pairing


def _det(u, v) -> LocalElement:
    return u[0] * v[1] - u[1] * v[0]


def _add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def _projective_key(u, k: int):
    """Point of P^1(Z/p^k) spanned by u."""
    a, b = u
    if a.valuation <= b.valuation:
        t = b / a
        return ("a", (t.p**t.shift * t.a) % t.p**k if t.shift >= 0 else None)
    t = a / b
    return ("b", (t.p**t.shift * t.a) % t.p**k if t.shift >= 0 else None)


def dependent(u, v, t: int) -> bool:
    """u and v span at most a line over Q_p, tested with qp_rank."""
    return qp_rank([list(u), list(v)], t) <= 1


@dataclass
class WLine:
    basis: tuple[LocalElement, LocalElement]
    pairing: list[int]  # fiber -> conjugate fiber (itself when r(x) lies in W)
    norm_sums: list[LocalElement]  # (r(x) + r(conj x)) / basis, in Q_p
    support: int  # number of pair sums found on W


def detect_W(values: list[tuple[LocalElement, LocalElement]], min_support: int = 3) -> WLine:
    """The Q_p-line W containing at least ``min_support`` distinct pair sums,
    and the resulting pairing x <-> conj x."""
    n = len(values)
    prec = min(c.abs_prec for v in values for c in v)
    k = max(prec - max(min(c.valuation for c in v) for v in values) - 3, 1)
    sums = {}
    for x in range(n):
        for y in range(x, n):
            s = _add(values[x], values[y]) if y > x else values[x]
            if all(c.is_zero() for c in s):
                continue
            sums[(x, y)] = s
    buckets: dict = {}
    for key, s in sums.items():
        buckets.setdefault(_projective_key(s, k), []).append(key)
    lines = [b for b in buckets.values() if len({i for pair in b for i in pair}) >= 2 * min_support - 1
             and len(b) >= min_support]
    if len(lines) != 1:
        raise Inconclusive(f"{len(lines)} candidate lines for W")
    members = lines[0]
    w = max((sums[m] for m in members), key=lambda s: -min(c.valuation for c in s))
    t = min(c.precision for c in w) - 2
    pairing = [-1] * n
    for x in range(n):
        partners = [y for y in range(n) if dependent(_add(values[x], values[y]) if y != x else values[x], w, t)]
        if len(partners) != 1:
            raise Inconclusive(f"fiber {x}: {len(partners)} candidate conjugates")
        pairing[x] = partners[0]
    if any(pairing[pairing[x]] != x for x in range(n)):
        raise Inconclusive("conjugation pairing is not an involution")
    idx = 0 if w[0].valuation <= w[1].valuation else 1
    norm_sums = []
    for x in range(n):
        y = pairing[x]
        s = _add(values[x], values[y]) if y != x else _add(values[x], values[x])
        norm_sums.append(s[idx] / w[idx])
    return WLine(w, pairing, norm_sums, len(members))


# ---------------------------------------------------------------------------
# unlabeled towers


@dataclass
class StrippedTower:
    """What the reconstruction sees: shuffled tables at each level, the
    projections between them, and the limit coordinates of the top-level
    elements in some Q_p-frame of V (None in case 2-0)."""

    levels: dict[int, FiniteQuandle]
    projections: dict[tuple[int, int], np.ndarray]
    p: int | None
    coords: list[tuple[LocalElement, ...]] | None

    @property
    def top(self) -> FiniteQuandle:
        return self.levels[max(self.levels)]


@dataclass
class StripKey:
    """Hidden ground truth: the fiber label of every top-level element."""

    labels: list[str]
    perms: dict[int, np.ndarray]


def conjugate_label(K: QuadField, label: str) -> str:
    if ":" not in label:
        return label
    l, r = map(int, label.split(":"))
    return f"{l}:{(K.T - r) % l}"


def _frame(R: int, p: int, rng: np.random.Generator) -> list[list[int]]:
    while True:
        M = [[int(rng.integers(-50, 51)) for _ in range(R)] for _ in range(R)]
        det = M[0][0] if R == 1 else M[0][0] * M[1][1] - M[0][1] * M[1][0]
        if det % p:
            return M


def _apply_frame(M, v):
    return tuple(
        sum((c.scale(m) for m, c in zip(row[1:], v[1:])), v[0].scale(row[0]))
        for row in M
    )


def strip(tower, seed: int = 0, precision: int = 12, frame: str = "natural",
          relabel: str | None = None) -> tuple[StrippedTower, StripKey]:
    """Shuffle every level, forget labels and coset data, and attach limit
    coordinates.  ``frame="random"`` rewrites the coordinates in a random
    Z_p-basis of V; ``relabel="conjugation"`` renames every prime in the key
    by its conjugate."""
    from .arith import ArithmeticLevel, QuandleTower

    if isinstance(tower, ArithmeticLevel):
        tower = QuandleTower(tower.K, tower.P, tower.primes, {tower.N: tower})
    rng = np.random.default_rng(seed)
    perms, levels = {}, {}
    for N, lev in tower.levels.items():
        perm = rng.permutation(lev.quandle.n)
        perms[N] = perm
        levels[N] = lev.quandle.relabel(perm)
    projections = {}
    Ns = sorted(tower.levels)
    for hi, lo in zip(Ns[1:], Ns[:-1]):
        old = tower.projection(hi, lo)
        inv = np.empty_like(perms[hi])
        inv[perms[hi]] = np.arange(len(inv))
        projections[(hi, lo)] = perms[lo][old[inv]]
    top = tower.top
    case = classify_case(tower.K, tower.P)
    coords = None
    if case != "2-0":
        data = reciprocity_coordinates(top, precision)
        vals = data.values
        if frame == "random":
            M = _frame(data.R, data.p, rng)
            vals = [_apply_frame(M, v) for v in vals]
        fo = top.quandle.fiber_of
        coords = [None] * top.quandle.n
        for x in range(top.quandle.n):
            coords[perms[max(Ns)][x]] = vals[int(fo[x])]
    names = top.fiber_labels
    if relabel == "conjugation":
        names = [conjugate_label(tower.K, s) for s in names]
    labels = [None] * top.quandle.n
    for x in range(top.quandle.n):
        labels[perms[max(Ns)][x]] = names[int(top.quandle.fiber_of[x])]
    return StrippedTower(levels, projections, prime_below(tower.P), coords), StripKey(labels, perms)


# ---------------------------------------------------------------------------
# group, orbits, p


@dataclass
class GroupReport:
    order: int
    abelian: bool
    invariants: tuple[int, ...] | None
    orbit_sizes: list[int]
    transitive_on_fibers: bool | None
    diagnostics: list[str] = field(default_factory=list)


def recover_group(Q: FiniteQuandle, fibers: list[list[int]] | None = None, expected_order: int | None = None) -> GroupReport:
    """Inn(Q) with its orbits.  With known fibers, non-transitivity of Inn
    on a fiber is flagged, and so is |Inn| < expected_order (Inn != G_N)."""
    G = inner_group(Q)
    ab = G.is_abelian()
    orb = orbits(Q)
    diag = []
    transitive = None
    if fibers is not None:
        where = {x: i for i, o in enumerate(orb) for x in o}
        transitive = True
        for k, f in enumerate(fibers):
            parts = {where[x] for x in f}
            if len(parts) > 1:
                transitive = False
                diag.append(f"Inn is not transitive on fiber {k}: {len(parts)} orbits")
    if expected_order is not None and G.order != expected_order:
        diag.append(f"|Inn| = {G.order} differs from |G_N| = {expected_order}")
    return GroupReport(G.order, ab, G.abelian_invariants() if ab else None, sorted(len(o) for o in orb),
                       transitive, diag)


def recover_orbits(Q: FiniteQuandle) -> list[list[int]]:
    return orbits(Q)


@dataclass
class GrowthReport:
    table: dict[int, dict[int, int]]  # N -> {q: v_q(|Inn Q_N|)}
    outcome: str  # "p", "finite-G" or "ambiguous"
    p: int | None
    rate: int | None


def recover_p(levels) -> GrowthReport:
    """The prime whose part of |Inn(Q_N)| keeps growing with N.

    ``levels`` maps N to a quandle (or a level carrying one); towers are
    accepted too."""
    levels = getattr(levels, "levels", levels)
    levels = {N: getattr(q, "quandle", q) for N, q in levels.items()}
    Ns = sorted(levels)
    if len(Ns) < 3:
        raise ValueError("recover_p needs at least three levels")
    orders = {N: inner_group(levels[N]).order for N in Ns}
    primes = sorted({q for o in orders.values() for q in factorint(o)})
    table = {N: {q: factorint(orders[N]).get(q, 0) for q in primes} for N in Ns}
    last, prev = Ns[-1], Ns[-2]
    growing = [q for q in primes if table[last][q] > table[prev][q]
               and all(table[b][q] >= table[a][q] for a, b in zip(Ns, Ns[1:]))]
    if not growing:
        return GrowthReport(table, "finite-G", None, None)
    if len(growing) > 1:
        return GrowthReport(table, "ambiguous", None, None)
    q = growing[0]
    return GrowthReport(table, "p", q, table[last][q] - table[prev][q])


# ---------------------------------------------------------------------------
# matching


def extend_to_homomorphism(s1: list[np.ndarray], s2: list[np.ndarray]) -> dict | None:
    """psi: <s1> -> <s2> with psi(s1[a]) = s2[a], grown breadth-first; None
    if the assignment is inconsistent.  Values are (g, psi(g)) keyed by g."""
    e1, e2 = np.arange(len(s1[0])), np.arange(len(s2[0]))
    psi = {e1.tobytes(): (e1, e2)}
    queue = [(e1, e2)]
    while queue:
        g1, g2 = queue.pop()
        for a in range(len(s1)):
            h1, h2 = s1[a][g1], s2[a][g2]
            key = h1.tobytes()
            if key in psi:
                if not np.array_equal(psi[key][1], h2):
                    return None
            else:
                psi[key] = (h1, h2)
                queue.append((h1, h2))
    return psi


def exhibit_isomorphism(Q1: FiniteQuandle, Q2: FiniteQuandle, fmap: list[int],
                        orb1: list[list[int]], orb2: list[list[int]]) -> np.ndarray | None:
    """A quandle isomorphism sending orbit a to orbit fmap[a], if one exists
    with psi(s_a) = s'_{fmap[a]} on base points.

    psi: Inn(Q1) -> Inn(Q2) is grown breadth-first from s_x -> s'_{fmap x};
    each element g(b_a) goes to psi(g)(b'_{fmap a}).  Consistency of psi and
    of the element map, bijectivity and the morphism property are checked."""
    n1, n2 = Q1.n, Q2.n
    if n1 != n2 or len(orb1) != len(orb2):
        return None
    s1 = [Q1.s(o[0]) for o in orb1]
    s2 = [Q2.s(orb2[fmap[a]][0]) for a in range(len(orb1))]
    psi = extend_to_homomorphism(s1, s2)
    if psi is None:
        return None
    f = np.full(n1, -1, dtype=np.int64)
    for a, o in enumerate(orb1):
        b1, b2 = o[0], orb2[fmap[a]][0]
        for g1, g2 in psi.values():
            x, y = g1[b1], g2[b2]
            if f[x] < 0:
                f[x] = y
            elif f[x] != y:
                return None
    if (f < 0).any() or len(set(f.tolist())) != n1:
        return None
    return f if is_morphism(Q1, Q2, f) else None


def _solve2(va, vb, vx):
    """(s, t) with vx = s va + t vb."""
    d = _det(va, vb)
    return _det(vx, vb) / d, _det(va, vx) / d


def _close(u, v) -> bool:
    return all((a - b).is_zero() for a, b in zip(u, v))


@dataclass
class MatchResult:
    case: str | None
    p: int | None
    growth: dict | None
    matching: list[int] | None  # orbit of A -> orbit of B
    alternatives: list[list[int]]
    frame_identity: bool | None
    orbits_a: list[list[int]]
    orbits_b: list[list[int]]
    isomorphism: np.ndarray | None
    chars: list | None = None
    diagnostics: list[str] = field(default_factory=list)

    def labelled(self, key_a: StripKey, key_b: StripKey, K: QuadField | None = None) -> dict:
        """The report with fibers named by the hidden labels, and sigma read
        off from them."""
        out = {
            "case": self.case,
            "p": self.p,
            "growthTable": self.growth,
            "matching": None,
            "sigma": None,
            "diagnostics": list(self.diagnostics),
        }
        if self.matching is None:
            return out
        name_a = [key_a.labels[o[0]] for o in self.orbits_a]
        name_b = [key_b.labels[o[0]] for o in self.orbits_b]
        pairs = [[name_a[i], name_b[j]] for i, j in enumerate(self.matching)]
        out["matching"] = pairs
        out["residue_chars_preserved"] = all(a.split(":")[0] == b.split(":")[0] for a, b in pairs)
        out["sigma"] = sigma_of(pairs, K, self.case)
        out["alternatives"] = [sigma_of([[name_a[i], name_b[j]] for i, j in enumerate(m)], K, self.case)
                               for m in self.alternatives]
        out["isomorphism_verified"] = self.isomorphism is not None
        return out


def sigma_of(pairs: list[list[str]], K: QuadField | None, case: str | None) -> str:
    if case == "2-1":
        return "undetermined(real-quadratic)"
    if all(a == b for a, b in pairs):
        return "identity"
    if K is not None and all(conjugate_label(K, a) == b for a, b in pairs):
        return "conjugation"
    return "invalid"


def _orbit_coords(T: StrippedTower, orb: list[list[int]]):
    out = []
    for o in orb:
        c = T.coords[o[0]]
        if any(not _close(T.coords[x], c) for x in o[1:]):
            raise ValueError("limit coordinates are not constant on an orbit")
        out.append(c)
    return out


def match_quandles(A: StrippedTower, B: StrippedTower, B_c: int = 500, H: int = 10**3,
                   case: str | None = None) -> MatchResult:
    """Fiber bijection between two unlabeled towers, following the
    reconstruction: Inn and p first, then residue characteristics from the
    limit coordinates (through W and norm sums when R = 2), then a linear
    map of frames fixing the pairing inside each residue characteristic,
    and finally an explicit quandle isomorphism at the top level."""
    res = MatchResult(case, None, None, None, [], None, [], [], None)
    diag = res.diagnostics
    gA, gB = recover_group(A.top), recover_group(B.top)
    if (gA.order, gA.invariants) != (gB.order, gB.invariants):
        diag.append(f"group mismatch: Inn orders {gA.order} and {gB.order}")
        return res
    if len(A.levels) > 2 and len(B.levels) > 2:
        ga, gb = recover_p(A.levels), recover_p(B.levels)
        res.growth = {str(N): {str(q): v for q, v in row.items()} for N, row in ga.table.items()}
        if (ga.outcome, ga.p) != (gb.outcome, gb.p):
            diag.append(f"group mismatch: p = {ga.p} ({ga.outcome}) against {gb.p} ({gb.outcome})")
            return res
        res.p = ga.p
        if ga.outcome == "finite-G":
            diag.append("finite-G: G is finite, the matching is not determined by this method")
    orbA, orbB = recover_orbits(A.top), recover_orbits(B.top)
    res.orbits_a, res.orbits_b = orbA, orbB
    if sorted(map(len, orbA)) != sorted(map(len, orbB)):
        diag.append(f"unmatched fiber: orbit sizes differ ({len(orbA)} against {len(orbB)} orbits)")
        return res
    if A.coords is None or B.coords is None:
        diag.append("no limit coordinates (case 2-0): matching undetermined")
        return res
    cA, cB = _orbit_coords(A, orbA), _orbit_coords(B, orbB)
    for name, T in (("first", A), ("second", B)):
        coh = limit_coherence(T)
        if coh is False:
            diag.append(f"limit coordinates of the {name} input disagree with its top level")
            return res
    R = len(cA[0])
    p = A.p
    try:
        if R == 1:
            chA = recover_residue_chars([c[0] for c in cA], p, B_c, H)
            chB = recover_residue_chars([c[0] for c in cB], p, B_c, H)
            wA = wB = None
        else:
            wA, wB = detect_W(cA), detect_W(cB)
            chA = recover_residue_chars(wA.norm_sums, p, B_c, H)
            chB = recover_residue_chars(wB.norm_sums, p, B_c, H)
    except Inconclusive as exc:
        diag.append(f"inconclusive: {exc}")
        return res
    diag.extend(chA.diagnostics)
    res.chars = chA.chars
    classes_a: dict = {}
    classes_b: dict = {}
    for i, l in enumerate(chA.chars):
        classes_a.setdefault(l, []).append(i)
    for j, l in enumerate(chB.chars):
        classes_b.setdefault(l, []).append(j)
    for l in set(classes_a) | set(classes_b):
        if len(classes_a.get(l, ())) != len(classes_b.get(l, ())):
            diag.append(f"unmatched fiber: residue characteristic {l} has "
                        f"{len(classes_a.get(l, ()))} and {len(classes_b.get(l, ()))} fibers")
            return res
    if R == 1:
        fmap = [0] * len(orbA)
        for l, xs in classes_a.items():
            for x, y in zip(xs, classes_b[l]):
                fmap[x] = y
        candidates = [fmap]
        res.frame_identity = None
    else:
        candidates, frames = _r2_branches(cA, cB, wA, wB, chA.chars, chB.chars)
        if not candidates:
            diag.append("inconclusive: no linear frame map is compatible with the pairing")
            return res
        order = sorted(range(len(candidates)), key=lambda k: not frames[k])
        candidates = [candidates[k] for k in order]
        res.frame_identity = frames[order[0]]
    for fmap in candidates:
        iso = exhibit_isomorphism(A.top, B.top, fmap, orbA, orbB)
        if iso is not None:
            res.matching, res.isomorphism = fmap, iso
            break
    else:
        diag.append("no quandle isomorphism realizes the fiber bijection")
        return res
    res.alternatives = [m for m in candidates if m != res.matching]
    return res


def _r2_branches(cA, cB, wA: WLine, wB: WLine, chA, chB):
    """Fiber bijections induced by linear maps V_A -> V_B that respect the
    residue characteristics and the conjugation pairing, one per choice of
    image for an anchor fiber; with a flag telling whether the map is the
    identity matrix."""
    n = len(cA)
    split = [x for x in range(n) if wA.pairing[x] != x and chA[x] is not None]
    if not split:
        return [], []
    a = split[0]
    abar = wA.pairing[a]
    out, frames = [], []
    for b in [y for y in range(n) if chB[y] == chA[a] and wB.pairing[y] != y]:
        bbar = wB.pairing[b]
        fmap = [-1] * n
        fmap[a], fmap[abar] = b, bbar
        ok = True
        for x in range(n):
            if fmap[x] >= 0:
                continue
            s, t = _solve2(cA[a], cA[abar], cA[x])
            img = tuple(s * u + t * v for u, v in zip(cB[b], cB[bbar]))
            ys = [y for y in range(n) if chB[y] == chA[x] and _close(img, cB[y])]
            if len(ys) != 1:
                ok = False
                break
            fmap[x] = ys[0]
        if ok and len(set(fmap)) == n:
            out.append(fmap)
            frames.append(_close(cA[a], cB[b]) and _close(cA[abar], cB[bbar]))
    return out, frames


def limit_coherence(T: StrippedTower) -> bool | None:
    """Check the limit coordinates against the top table: when R = 1 and the
    p-part of Inn is cyclic of order p^k, the p-part e_a of s_a must be
    proportional to r(a) mod p^k (e_a r(b) = e_b r(a) after removing the
    common power of p).  None when the check does not apply."""
    from .groups import AbelianGroupPresentation, perm_mul

    if T.coords is None or len(T.coords[0]) != 1 or T.p is None:
        return None
    Q = T.top
    p = T.p
    gens = Q.distinct_perms()
    pres = AbelianGroupPresentation.from_generators(gens, perm_mul, tuple(range(Q.n)))
    cyc = [i for i, d in enumerate(pres.invariants) if d % p == 0]
    if len(cyc) != 1:
        return None
    i = cyc[0]
    k = factorint(pres.invariants[i])[p]
    mod = p**k
    orb = orbits(Q)
    e = [pres.dlog(tuple(int(v) for v in Q.s(o[0])))[i] % mod for o in orb]
    r = [T.coords[o[0]][0] for o in orb]
    vmin = min(x.valuation for x in r)
    if any(x.abs_prec - vmin < k for x in r):
        return None
    rho = [(x.p ** (x.shift - vmin) * x.a) % mod for x in r]
    return all((e[a] * rho[b] - e[b] * rho[a]) % mod == 0 for a in range(len(orb)) for b in range(a + 1, len(orb)))


# ---------------------------------------------------------------------------
# the labeled side: G_N = Inn, automorphisms


def inner_isomorphism(level) -> dict:
    """Exhibit G_N -> Inn(Q_N), g -> action of g, as an isomorphism: it is a
    homomorphism on generators, injective, and onto Inn."""
    G = level.group
    Inn = inner_group(level.quandle)
    images = {}
    for g in G.elements():
        images[g] = tuple(int(v) for v in level.action(g))
    hom = all(
        images[G.mul(g, h)] == tuple(np.asarray(images[g])[list(images[h])].tolist())
        for g in G.elements()
        for h in [tuple(int(j == i) for j in range(len(G.invariants))) for i in range(len(G.invariants))]
    )
    injective = len(set(images.values())) == G.order
    onto = set(images.values()) == set(Inn.elements())
    return {"homomorphism": hom, "injective": injective, "onto_inn": onto,
            "isomorphism": hom and injective and onto, "order": G.order, "inn_order": Inn.order}


def fiber_exchange(level, i: int, j: int) -> np.ndarray | None:
    """The automorphism x H_i <-> x H_j (identity elsewhere) when fibers i and
    j carry the same Frobenius; verified as a quandle automorphism."""
    Q = level.quandle
    fi, fj = Q.fibers[i], Q.fibers[j]
    if fi.z != fj.z:
        return None
    G = level.group
    f = np.arange(Q.n)
    base = np.cumsum([0] + [fb.size for fb in Q.fibers])
    for k, x in enumerate(fi.reps):
        y = level.element(j, x)
        f[base[i] + k] = y
        f[y] = base[i] + k
    return f if is_morphism(Q, Q, f) else None


@dataclass
class AutReport:
    aut_order: int
    generated_order: int
    equal: bool
    kernel_order: int
    translation_order: int
    kernel_is_translations: bool
    translations_are_automorphisms: bool
    image: list[tuple[int, ...]]
    image_preserves_frobenius: bool
    mode: str


def aut_structure_report(level, bound: int = 24) -> AutReport:
    """Aut(Q) against translations and Frobenius-preserving fiber
    permutations.  Exhaustive when |Q| <= bound."""
    Q = level.quandle
    G = level.group
    nf = len(Q.fibers)
    # fiber translations: one SNF generator of G on one fiber at a time
    trans = []
    for lam in range(nf):
        for i in range(len(G.invariants)):
            u = [G.identity] * nf
            u[lam] = tuple(int(j == i) for j in range(len(G.invariants)))
            trans.append(fiber_translation_action(Q, u))
    trans_ok = all(is_morphism(Q, Q, t) for t in trans)
    T = PermutationGroup(trans or [tuple(range(Q.n))], Q.n)
    fib = [list(np.nonzero(Q.fiber_of == lam)[0]) for lam in range(nf)]
    perm_autos = []
    for sigma in permutations(range(nf)):
        if any(len(fib[a]) != len(fib[sigma[a]]) for a in range(nf)):
            continue
        f = exhibit_isomorphism(Q, Q, list(sigma), fib, fib)
        if f is not None:
            perm_autos.append(tuple(int(v) for v in f))
    gen = PermutationGroup(list(T.generators) + perm_autos, Q.n)
    s_of = [tuple(Q.s(f[0]).tolist()) for f in fib]
    if Q.n > bound:
        image = sorted({fiber_permutation(Q, f) for f in perm_autos})
        return AutReport(-1, gen.order, False, -1, T.order, False, trans_ok, image,
                         _preserves(Q, image, s_of, fib), "property")
    auts = automorphism_list(Q, bound=bound)
    kernel = [f for f in auts if fiber_permutation(Q, f) == tuple(range(nf))]
    image = sorted({fiber_permutation(Q, f) for f in auts})
    return AutReport(
        len(auts), gen.order, set(auts) == set(gen.elements()),
        len(kernel), T.order, set(kernel) == set(T.elements()), trans_ok, image,
        _preserves(Q, image, s_of, fib), "exhaustive",
    )


def _preserves(Q, image, s_of, fib) -> bool:
    """Each realized fiber permutation is induced by an automorphism of Inn
    carrying s_a to s_{sigma a}."""
    s = [np.asarray(x) for x in s_of]
    for sig in image:
        psi = extend_to_homomorphism(s, [s[sig[a]] for a in range(len(s))])
        if psi is None or len({v[1].tobytes() for v in psi.values()}) != len(psi):
            return False
    return True


def rank_demo(p: int, ls: list[int], ls2: list[int], ls3: list[int] | None = None, digits: int = 20) -> int:
    """qp_rank of a matrix of logarithms [ln l_ij] (rows: the given lists)."""
    F = LocalField(p)
    rows = [ls, ls2] + ([ls3] if ls3 else [])
    A = [[padic_log(F(l, 0, digits + 4), digits) for l in row] for row in rows]
    return qp_rank(A, digits - 2)
