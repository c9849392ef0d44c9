"""Exact arithmetic in Q and in quadratic fields Q(sqrt m).

Integers are written x + y*w with w = sqrt(m) (m = 2, 3 mod 4) or
w = (1 + sqrt(m))/2 (m = 1 mod 4), so w**2 = T*w - n0.  The field Q is the
degenerate case ``QuadField(1)``; all downstream code goes through the
same interface.

Narrow ideal classes are handled through primitive binary quadratic forms
(a, b, c) of discriminant D.  An ideal with oriented Z-basis (b1, b2)
corresponds to f(x, y) = N(x*b1 + y*b2) / N(I).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from sympy import factorint, isprime
from sympy.ntheory import sqrt_mod

from .groups import AbelianGroupPresentation, hnf_lattice
from .padic import LocalElement, LocalField

FORM_DISC_BOUND = 10**7


def _squarefree(m: int) -> bool:
    return all(e == 1 for e in factorint(abs(m)).values())


@dataclass(frozen=True)
class QuadField:
    m: int

    def __post_init__(self):
        if self.m == 0 or (self.m != 1 and not _squarefree(self.m)):
            raise ValueError(f"m={self.m} is not a squarefree integer")

    @property
    def is_rational(self) -> bool:
        return self.m == 1

    @property
    def degree(self) -> int:
        return 1 if self.is_rational else 2

    @property
    def T(self) -> int:
        return 1 if self.m % 4 == 1 and not self.is_rational else 0

    @property
    def n0(self) -> int:
        if self.is_rational:
            return 0
        return (1 - self.m) // 4 if self.m % 4 == 1 else -self.m

    @property
    def D(self) -> int:
        if self.is_rational:
            return 1
        return self.m if self.m % 4 == 1 else 4 * self.m

    @property
    def is_real(self) -> bool:
        return self.m > 0

    @property
    def signature(self) -> str:
        return "real" if self.is_real else "complex"

    def __call__(self, x, y=0) -> "QuadElement":
        return QuadElement(self, Fraction(x), Fraction(y))

    def __repr__(self):
        return "Q" if self.is_rational else f"Q(sqrt({self.m}))"

    def minpoly_roots(self, l: int) -> list[int]:
        """Roots of X^2 - T X + n0 modulo the prime l."""
        if self.is_rational:
            return []
        if l == 2:
            return [r for r in range(2) if (r * r - self.T * r + self.n0) % 2 == 0]
        d = (self.T * self.T - 4 * self.n0) % l
        inv2 = pow(2, -1, l)
        roots = {((self.T + s) * inv2) % l for s in sqrt_mod(d, l, all_roots=True)}
        return sorted(roots)

    def to_json(self) -> dict:
        return {"m": self.m}


RATIONALS = QuadField(1)


# ---------------------------------------------------------------------------
# elements


def _sign_real(u: Fraction, v: Fraction, m: int) -> int:
    """Sign of u + v*sqrt(m) for m > 0, exactly."""
    su = (u > 0) - (u < 0)
    sv = (v > 0) - (v < 0)
    if sv == 0:
        return su
    if su == 0 or su == sv:
        return sv
    return su if u * u > v * v * m else sv


@dataclass(frozen=True)
class QuadElement:
    K: QuadField
    x: Fraction
    y: Fraction = Fraction(0)

    def _c(self, other) -> "QuadElement":
        if isinstance(other, QuadElement):
            return other
        return QuadElement(self.K, Fraction(other), Fraction(0))

    def __add__(self, o):
        o = self._c(o)
        return QuadElement(self.K, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __neg__(self):
        return QuadElement(self.K, -self.x, -self.y)

    def __sub__(self, o):
        return self + (-self._c(o))

    def __rsub__(self, o):
        return self._c(o) - self

    def __mul__(self, o):
        o = self._c(o)
        K = self.K
        return QuadElement(
            K,
            self.x * o.x - K.n0 * self.y * o.y,
            self.x * o.y + self.y * o.x + K.T * self.y * o.y,
        )

    __rmul__ = __mul__

    def conj(self) -> "QuadElement":
        return QuadElement(self.K, self.x + self.K.T * self.y, -self.y)

    def norm(self) -> Fraction:
        K = self.K
        if K.is_rational:
            return self.x
        return self.x * self.x + K.T * self.x * self.y + K.n0 * self.y * self.y

    def trace(self) -> Fraction:
        if self.K.is_rational:
            return self.x
        return 2 * self.x + self.K.T * self.y

    def inverse(self) -> "QuadElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.K.is_rational:
            return QuadElement(self.K, 1 / self.x)
        c = self.conj()
        return QuadElement(self.K, c.x / n, c.y / n)

    def __truediv__(self, o):
        return self * self._c(o).inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadElement(self.K, Fraction(1))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def is_integral(self) -> bool:
        return self.x.denominator == 1 and self.y.denominator == 1

    def sqrt_coords(self) -> tuple[Fraction, Fraction]:
        """(u, v) with self = u + v*sqrt(m)."""
        if self.K.T == 1:
            return self.x + self.y / 2, self.y / 2
        return self.x, self.y

    def real_signs(self) -> tuple[int, ...]:
        """Signs at the real embeddings (sqrt m > 0 first)."""
        K = self.K
        if K.is_rational:
            return ((self.x > 0) - (self.x < 0),)
        if not K.is_real:
            return ()
        u, v = self.sqrt_coords()
        return _sign_real(u, v, K.m), _sign_real(u, -v, K.m)

    def is_totally_positive(self) -> bool:
        if self.is_zero():
            return False
        return all(s > 0 for s in self.real_signs())

    def as_float(self) -> float:
        u, v = self.sqrt_coords()
        return float(u) + float(v) * math.sqrt(self.K.m) if self.K.is_real else complex(
            float(u), float(v) * math.sqrt(-self.K.m))

    @property
    def int_coords(self) -> tuple[int, int]:
        if not self.is_integral():
            raise ValueError("element is not integral")
        return int(self.x), int(self.y)

    def __repr__(self):
        if self.K.is_rational or self.y == 0:
            return str(self.x)
        return f"{self.x} + {self.y}*w"


# ---------------------------------------------------------------------------
# ideals


def _mul_coords(K: QuadField, g, h):
    x1, y1 = g
    x2, y2 = h
    return (x1 * x2 - K.n0 * y1 * y2, x1 * y2 + x2 * y1 + K.T * y1 * y2)


@dataclass(frozen=True)
class QuadIdeal:
    """Ideal a*Z + (b + c*w)*Z in Hermite normal form (0 <= b < a, c | a, c | b).

    Over Q only ``a`` is meaningful and the ideal is a*Z."""

    K: QuadField
    a: int
    b: int = 0
    c: int = 1

    @classmethod
    def from_generators(cls, K: QuadField, gens: Iterable) -> "QuadIdeal":
        vecs = []
        for g in gens:
            if isinstance(g, QuadElement):
                g = g.int_coords
            elif isinstance(g, int):
                g = (g, 0)
            x, y = int(g[0]), int(g[1])
            if K.is_rational:
                vecs.append((x, 0))
                continue
            vecs.append((x, y))
            vecs.append(_mul_coords(K, (x, y), (0, 1)))
        if K.is_rational:
            return cls(K, abs(math.gcd(*[v[0] for v in vecs])))
        rows = hnf_lattice([(y, x) for x, y in vecs], 2)
        if len(rows) != 2:
            raise ValueError("generators do not span a full-rank ideal")
        (c, b), (zero, a) = rows
        assert zero == 0
        if c < 0:
            c, b = -c, -b
        a = abs(a)
        return cls(K, a, b % a, c)

    @classmethod
    def principal(cls, alpha) -> "QuadIdeal":
        if isinstance(alpha, QuadElement):
            return cls.from_generators(alpha.K, [alpha])
        raise TypeError("principal needs a QuadElement")

    @property
    def norm(self) -> int:
        return self.a if self.K.is_rational else self.a * self.c

    @property
    def basis(self) -> list[tuple[int, int]]:
        if self.K.is_rational:
            return [(self.a, 0)]
        return [(self.a, 0), (self.b, self.c)]

    def contains(self, g) -> bool:
        if isinstance(g, QuadElement):
            if not g.is_integral():
                return False
            g = g.int_coords
        x, y = g
        if self.K.is_rational:
            return x % self.a == 0
        if y % self.c:
            return False
        k = y // self.c
        return (x - k * self.b) % self.a == 0

    def issubset(self, other: "QuadIdeal") -> bool:
        return all(other.contains(v) for v in self.basis)

    def reduce(self, g) -> tuple[int, int]:
        """Canonical representative of g modulo the ideal."""
        if isinstance(g, QuadElement):
            g = g.int_coords
        x, y = g
        if self.K.is_rational:
            return (x % self.a, 0)
        k = y // self.c
        return ((x - k * self.b) % self.a, y - k * self.c)

    def residues(self) -> Iterable[tuple[int, int]]:
        if self.K.is_rational:
            return ((x, 0) for x in range(self.a))
        return ((x, y) for y in range(self.c) for x in range(self.a))

    def __mul__(self, other: "QuadIdeal") -> "QuadIdeal":
        gens = [_mul_coords(self.K, u, v) for u in self.basis for v in other.basis]
        return QuadIdeal.from_generators(self.K, gens)

    def __pow__(self, k: int) -> "QuadIdeal":
        if k < 0:
            raise ValueError("negative ideal powers are not supported")
        out = unit_ideal(self.K)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> "QuadIdeal":
        if self.K.is_rational:
            return self
        gens = [(x + self.K.T * y, -y) for x, y in self.basis]
        return QuadIdeal.from_generators(self.K, gens)

    def is_prime(self) -> bool:
        n = self.norm
        f = factorint(n)
        if len(f) != 1:
            return False
        (l, e), = f.items()
        return any(P == self for P, _, _ in split_prime(self.K, l).primes)

    def to_json(self) -> dict:
        return {"m": self.K.m, "ideal": [self.a, 0, self.b, self.c]}

    @classmethod
    def from_json(cls, d: dict) -> "QuadIdeal":
        a, _, b, c = d["ideal"]
        return cls(QuadField(d["m"]), a, b, c)

    def __repr__(self):
        if self.K.is_rational:
            return f"({self.a})"
        return f"[{self.a}, {self.b}+{self.c}w]"


def unit_ideal(K: QuadField) -> QuadIdeal:
    return QuadIdeal(K, 1, 0, 1)


def conjugate_ideal(I: QuadIdeal) -> QuadIdeal:
    return I.conj()


@dataclass(frozen=True)
class Splitting:
    l: int
    type: str  # split | inert | ramified
    primes: tuple  # ((ideal, e, f), ...)


@lru_cache(maxsize=None)
def split_prime(K: QuadField, l: int) -> Splitting:
    if not isprime(l):
        raise ValueError(f"{l} is not prime")
    if K.is_rational:
        return Splitting(l, "split", ((QuadIdeal(K, l), 1, 1),))
    roots = K.minpoly_roots(l)
    if not roots:
        return Splitting(l, "inert", ((QuadIdeal(K, l, 0, l), 1, 2),))
    ideals = tuple(
        (QuadIdeal.from_generators(K, [(l, 0), (-r, 1)]), 2 if len(roots) == 1 else 1, 1)
        for r in roots
    )
    return Splitting(l, "ramified" if len(roots) == 1 else "split", ideals)


def prime_root(P: QuadIdeal) -> int | None:
    """r with P = (l, w - r) for a degree-one prime P, else None."""
    if P.K.is_rational or P.c != 1 or not isprime(P.a):
        return None
    # b + w in P, so w = -b mod P
    return (-P.b) % P.a


def primes_above(K: QuadField, l: int) -> list[QuadIdeal]:
    return [P for P, _, _ in split_prime(K, l).primes]


def ideal_valuation(I: QuadIdeal, P: QuadIdeal) -> int:
    k = 0
    Pk = P
    kmax = math.log(I.norm, P.norm) + 1
    while k <= kmax and I.issubset(Pk):
        k += 1
        Pk = Pk * P
    return k


def factor_ideal(I: QuadIdeal) -> dict[QuadIdeal, int]:
    out = {}
    for l in factorint(I.norm):
        for P in primes_above(I.K, l):
            v = ideal_valuation(I, P)
            if v:
                out[P] = v
    return out


def multiplicative_independence(ideals: Sequence[QuadIdeal]) -> bool:
    """Whether the ideals are multiplicatively independent in the ideal group."""
    facs = [factor_ideal(I) for I in ideals]
    support = sorted({P for f in facs for P in f}, key=lambda P: (P.norm, P.a, P.b, P.c))
    if not support:
        return len(ideals) == 0
    rows = [[f.get(P, 0) for P in support] for f in facs]
    return len(hnf_lattice(rows, len(support))) == len(ideals)


# ---------------------------------------------------------------------------
# binary quadratic forms

Form = tuple[int, int, int]
Mat = tuple[int, int, int, int]  # (p, q, r, s) = [[p, q], [r, s]]

_ID: Mat = (1, 0, 0, 1)


def _mmul(A: Mat, B: Mat) -> Mat:
    return (A[0] * B[0] + A[1] * B[2], A[0] * B[1] + A[1] * B[3],
            A[2] * B[0] + A[3] * B[2], A[2] * B[1] + A[3] * B[3])


def form_disc(f: Form) -> int:
    return f[1] * f[1] - 4 * f[0] * f[2]


def form_eval(f: Form, x: int, y: int) -> int:
    return f[0] * x * x + f[1] * x * y + f[2] * y * y


def form_act(f: Form, M: Mat) -> Form:
    """The form (x, y) -> f(M (x, y))."""
    p, q, r, s = M
    a, b, c = f
    return (form_eval(f, p, r), 2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s, form_eval(f, q, s))


def _lt_sqrt(t: int, D: int) -> bool:
    """t < sqrt(D) for non-square D > 0."""
    return t < 0 or t * t < D


def _gt_sqrt(t: int, D: int) -> bool:
    return t > 0 and t * t > D


def is_reduced(f: Form) -> bool:
    a, b, c = f
    D = form_disc(f)
    if D < 0:
        return abs(b) <= a <= c and not (b < 0 and (a == c or -b == a))
    return b > 0 and _lt_sqrt(b, D) and _gt_sqrt(2 * abs(a) + b, D) and _lt_sqrt(2 * abs(a) - b, D)


def _rho(f: Form) -> tuple[Form, Mat]:
    a, b, c = f
    D = form_disc(f)
    cc = abs(c)
    if _gt_sqrt(cc, D):
        r = (-b) % (2 * cc)
        if r > cc:
            r -= 2 * cc
    else:
        r0 = math.isqrt(D)
        r = r0 - (r0 + b) % (2 * cc)
    k = (r + b) // (2 * c)
    return (c, r, (r * r - D) // (4 * c)), (0, -1, 1, k)


def reduce_form(f: Form) -> tuple[Form, Mat]:
    """Reduced form g and M in SL2(Z) with g = f o M."""
    a, b, c = f
    D = form_disc(f)
    M = _ID
    if D < 0:
        if a < 0:
            raise ValueError("negative definite forms are not handled")
        while True:
            if not (-a < b <= a):
                k = (a - b) // (2 * a)
                T = (1, k, 0, 1)
                f = form_act(f, T)
                M = _mmul(M, T)
                a, b, c = f
            if a > c or (a == c and b < 0):
                S = (0, -1, 1, 0)
                f = form_act(f, S)
                M = _mmul(M, S)
                a, b, c = f
                continue
            return f, M
    if math.isqrt(D) ** 2 == D:
        raise ValueError("square discriminant")
    steps = 0
    while not is_reduced(f):
        f, R = _rho(f)
        M = _mmul(M, R)
        steps += 1
        if steps > 10 * (D.bit_length() + 10) ** 2 + 1000:
            raise RuntimeError("indefinite reduction did not terminate")
    return f, M


def form_cycle(f: Form) -> list[tuple[Form, Mat]]:
    """Cycle of reduced forms under rho starting at reduced f, with the
    transformations from f to each member."""
    out = [(f, _ID)]
    g, M = _rho(f)
    while g != f:
        out.append((g, M))
        g, R = _rho(g)
        M = _mmul(M, R)
    return out


def canonical_form(f: Form) -> Form:
    g, _ = reduce_form(f)
    if form_disc(g) < 0:
        return g
    return min(h for h, _ in form_cycle(g) if h[0] > 0)


def principal_form(D: int) -> Form:
    b = D % 2
    return (1, b, (b * b - D) // 4)


def compose_forms(f1: Form, f2: Form) -> Form:
    """Gaussian composition of primitive forms of equal discriminant with a > 0."""
    if f1[0] > f2[0]:
        f1, f2 = f2, f1
    a1, b1, c1 = f1
    a2, b2, c2 = f2
    D = form_disc(f1)
    if form_disc(f2) != D:
        raise ValueError("forms of different discriminants")
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, u, _ = _xgcd_pos(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1, x2, y2 = _xgcd_pos(s, d)
        y2 = -y2
    v1 = a1 // d1
    v2 = a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (b3 * b3 - D) // (4 * a3)
    return (a3, b3, c3)


def _xgcd_pos(a: int, b: int) -> tuple[int, int, int]:
    """(d, u, v) with u*a + v*b = d = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_u, u = 1, 0
    old_v, v = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_u, u = u, old_u - q * u
        old_v, v = v, old_v - q * v
    if old_r < 0:
        old_r, old_u, old_v = -old_r, -old_u, -old_v
    return old_r, old_u, old_v


def reduced_forms(D: int) -> list[Form]:
    """All primitive reduced forms of discriminant D (a > 0 when D < 0)."""
    if abs(D) > FORM_DISC_BOUND:
        raise ValueError(f"|D|={abs(D)} exceeds the configured bound")
    out = []
    if D < 0:
        amax = math.isqrt(-D // 3)
        for a in range(1, amax + 1):
            for b in range(-a + 1, a + 1):
                if (b * b - D) % (4 * a):
                    continue
                c = (b * b - D) // (4 * a)
                f = (a, b, c)
                if c >= a and math.gcd(a, b, c) == 1 and is_reduced(f):
                    out.append(f)
        return out
    r = math.isqrt(D)
    for b in range(1, r + 1):
        if (b - D) % 2:
            continue
        q = (D - b * b) // 4
        if q <= 0:
            continue
        for a in range(1, q + 1):
            if q % a:
                continue
            for sa in (a, -a):
                f = (sa, b, -q // sa)
                if math.gcd(*f) == 1 and is_reduced(f):
                    out.append(f)
    return out


def narrow_class_number(D: int) -> int:
    forms = reduced_forms(D)
    if D < 0:
        return len(forms)
    return len({canonical_form(f) for f in forms})


# ---------------------------------------------------------------------------
# ideal <-> form dictionary


def primitive_part(I: QuadIdeal) -> tuple[int, QuadIdeal]:
    """(c, J) with I = c*J and J primitive."""
    if I.K.is_rational:
        return I.a, unit_ideal(I.K)
    c = I.c
    return c, QuadIdeal(I.K, I.a // c, I.b // c, 1)


def ideal_to_form(I: QuadIdeal) -> Form:
    K = I.K
    if K.is_rational:
        return (1, 1, 0)
    _, J = primitive_part(I)
    A, B = J.a, J.b
    return (A, 2 * B + K.T, (B * B + K.T * B + K.n0) // A)


def form_to_ideal(K: QuadField, f: Form) -> QuadIdeal:
    """Ideal whose form is exactly f (needs a > 0)."""
    a, b, c = f
    if a <= 0:
        raise ValueError("form_to_ideal needs a > 0")
    return QuadIdeal(K, a, ((b - K.T) // 2) % a, 1)


@dataclass
class NarrowClassGroup:
    K: QuadField
    group: AbelianGroupPresentation
    forms: tuple[Form, ...]

    @property
    def order(self) -> int:
        return self.group.order

    def class_of(self, I: QuadIdeal) -> tuple[int, ...]:
        return self.group.dlog(canonical_form(ideal_to_form(I)))

    def generator_ideals(self) -> list[QuadIdeal]:
        return [form_to_ideal(self.K, f) for f in self.group.basis]


def _compose_classes(f: Form, g: Form) -> Form:
    return canonical_form(compose_forms(f, g))


@lru_cache(maxsize=None)
def narrow_class_group(K: QuadField) -> NarrowClassGroup:
    if K.is_rational:
        triv = AbelianGroupPresentation.from_generators([], lambda x, y: x, (1, 1, 0), witness="trivial")
        return NarrowClassGroup(K, triv, ((1, 1, 0),))
    D = K.D
    h = narrow_class_number(D)
    ident = canonical_form(principal_form(D))
    gens: list[Form] = []
    pres = AbelianGroupPresentation.from_generators([], _compose_classes, ident, witness="forms")
    l = 1
    while pres.order < h:
        l += 1
        if not isprime(l):
            continue
        for P in primes_above(K, l):
            f = canonical_form(ideal_to_form(P))
            if f == ident or f in gens:
                continue
            gens.append(f)
            pres = AbelianGroupPresentation.from_generators(gens, _compose_classes, ident, witness="forms")
    forms = tuple(sorted({canonical_form(f) for f in reduced_forms(D)}))
    return NarrowClassGroup(K, pres, forms)


# ---------------------------------------------------------------------------
# units and generators


def fundamental_unit(K: QuadField) -> QuadElement:
    """Fundamental unit > 1 of a real quadratic field, from the continued
    fraction of w."""
    if not K.is_real or K.is_rational:
        raise ValueError("fundamental_unit needs a real quadratic field")
    m = K.m
    P, Q = (1, 2) if K.T == 1 else (0, 1)
    s = math.isqrt(m)
    p_prev, p_cur = 0, 1
    q_prev, q_cur = 1, 0
    while True:
        a = (P + s) // Q
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        eta = K(p_cur, -q_cur)
        if abs(eta.norm()) == 1:
            eps = eta.inverse()
            if eps.real_signs()[0] < 0:
                eps = -eps
            return eps
        P = a * Q - P
        Q = (m - P * P) // Q


def totally_positive_unit(K: QuadField) -> QuadElement:
    """Generator of the totally positive units modulo torsion (real case)."""
    eps = fundamental_unit(K)
    return eps if eps.norm() == 1 else eps * eps


def torsion_units(K: QuadField) -> list[QuadElement]:
    if K.is_rational or K.is_real:
        return [K(1), K(-1)]
    if K.m == -1:
        return [K(1), K(0, 1), K(-1), K(0, -1)]
    if K.m == -3:
        # w = (1 + sqrt(-3))/2 is a primitive 6th root of unity
        w = K(0, 1)
        return [w**k for k in range(6)]
    return [K(1), K(-1)]


def totally_positive_unit_generators(K: QuadField) -> list[QuadElement]:
    """Generators of the group of totally positive units."""
    if K.is_rational:
        return []
    if K.is_real:
        return [totally_positive_unit(K)]
    tors = torsion_units(K)
    return [tors[1]]


def principal_generator(I: QuadIdeal, totally_positive: bool = True) -> QuadElement | None:
    """Generator of I (totally positive if requested), or None."""
    K = I.K
    if K.is_rational:
        return K(I.a)
    c, J = primitive_part(I)
    f = ideal_to_form(J)
    b1, b2 = K(J.a), K(J.b, 1)
    g, M = reduce_form(f)
    targets = (1,) if totally_positive else (1, -1)
    candidates = [(g, M)]
    if form_disc(g) > 0:
        candidates = [(h, _mmul(M, R)) for h, R in form_cycle(g)]
    for h, N in candidates:
        if h[0] in targets:
            x, y = N[0], N[2]
            alpha = (b1 * x + b2 * y) * c
            if K.is_real and alpha.real_signs()[0] < 0:
                alpha = -alpha
            if totally_positive and not alpha.is_totally_positive():
                continue
            return alpha
    return None


def ideal_power_class_exponent(I: QuadIdeal) -> tuple[int, QuadElement]:
    """Smallest n >= 1 with I^n narrowly principal, and a totally positive generator."""
    n = 1
    J = I
    while True:
        alpha = principal_generator(J, totally_positive=True)
        if alpha is not None:
            return n, alpha
        n += 1
        J = J * I
        if n > 10**6:
            raise RuntimeError("class order search did not terminate")


# ---------------------------------------------------------------------------
# local embeddings


def local_field(K: QuadField, P: QuadIdeal) -> LocalField:
    """Completion of K at P."""
    l = factorint(P.norm)
    (p, _), = l.items()
    if K.is_rational:
        return LocalField(p)
    kind = split_prime(K, p).type
    if kind == "split":
        return LocalField(p)
    return LocalField(p, "ur" if kind == "inert" else "ram", K.m, K.T, K.n0)


def _hensel_root(K: QuadField, r: int, p: int, prec: int) -> int:
    mod = p
    while mod < p**prec:
        mod = min(mod * mod, p**prec)
        fr = r * r - K.T * r + K.n0
        dr = 2 * r - K.T
        r = (r - fr * pow(dr, -1, mod)) % mod
    return r % p**prec


def embed(alpha: QuadElement, P: QuadIdeal, prec: int) -> LocalElement:
    """Image of alpha in the completion at P, to ``prec`` p-adic digits."""
    K = alpha.K
    F = local_field(K, P)
    if K.is_rational:
        return F(alpha.x, 0, prec)
    if F.kind == "triv":
        r = _hensel_root(K, prime_root(P), F.p, prec + 4)
        return F(alpha.x + alpha.y * r, 0, prec)
    return F(alpha.x, alpha.y, prec)
