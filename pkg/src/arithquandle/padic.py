"""Truncated arithmetic in Q_p and in quadratic local fields K_P.

Elements are stored as ``p**shift * (a + b*w)`` where ``w`` is the integral
basis element of the global field (``sqrt(m)`` or ``(1+sqrt(m))/2``), the
pair ``(a, b)`` is known modulo ``p**rel``, and ``rel`` is the relative
precision in p-adic digits.  Valuations are reported in units of v(pi), so
they are integers in the ramified case too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from sympy import factorint


class PrecisionError(ArithmeticError):
    """Raised when a computation cannot be certified at the available precision."""


class Inconclusive(PrecisionError):
    pass


@dataclass(frozen=True)
class LocalField:
    """Completion of Q or of a quadratic field at a prime over p.

    ``kind`` is "triv" (Q_p itself, including split primes of a quadratic
    field), "ur" (unramified quadratic) or "ram" (ramified quadratic).  For
    the quadratic kinds ``w**2 = trace*w - norm``.
    """

    p: int
    kind: str = "triv"
    m: int | None = None
    trace: int = 0
    norm: int = 0

    @property
    def e(self) -> int:
        return 2 if self.kind == "ram" else 1

    @property
    def f(self) -> int:
        return 2 if self.kind == "ur" else 1

    @property
    def q(self) -> int:
        return self.p**self.f

    @property
    def degree(self) -> int:
        return 1 if self.kind == "triv" else 2

    @property
    def sqrt_factor(self) -> int:
        # (w - conj w) / sqrt(m)
        return 1 if self.m is not None and self.m % 4 == 1 else 2

    def __call__(self, a, b=0, prec: int = 20) -> "LocalElement":
        return LocalElement.from_pair(self, a, b, prec)

    def descriptor(self) -> dict:
        return {"p": self.p, "ext": self.kind, "m": self.m}


@dataclass(frozen=True)
class PrecisionLedger:
    requested: int
    guard: int
    series_length: int
    loss: int


def _vp(n: int, p: int) -> int:
    if n == 0:
        return math.inf
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _pair_mul(F: LocalField, x, y, mod):
    a1, b1 = x
    a2, b2 = y
    if F.kind == "triv":
        return (a1 * a2 % mod, 0)
    return (
        (a1 * a2 - F.norm * b1 * b2) % mod,
        (a1 * b2 + a2 * b1 + F.trace * b1 * b2) % mod,
    )


class LocalElement:
    __slots__ = ("field", "shift", "a", "b", "rel")

    def __init__(self, field: LocalField, shift: int, a: int, b: int, rel: int):
        self.field = field
        p = field.p
        if rel <= 0:
            self.shift, self.a, self.b, self.rel = shift + max(rel, 0), 0, 0, 0
            return
        mod = p**rel
        a %= mod
        b = b % mod if field.kind != "triv" else 0
        while rel > 0 and a % p == 0 and b % p == 0:
            if a == 0 and b == 0:
                shift += rel
                rel = 0
                break
            a //= p
            b //= p
            shift += 1
            rel -= 1
        self.shift, self.a, self.b, self.rel = shift, a, b, rel

    # -- construction -------------------------------------------------------

    @classmethod
    def from_pair(cls, F: LocalField, a, b=0, prec: int = 20) -> "LocalElement":
        """Element a + b*w with rational a, b, correct to absolute precision ``prec``."""
        a, b = Fraction(a), Fraction(b)
        den = math.lcm(a.denominator, b.denominator)
        s = -_vp(den, F.p) if den != 1 else 0
        unit_den = den // F.p ** (-s)
        num_a, num_b = int(a * den), int(b * den)
        rel = prec - s
        mod = F.p ** max(rel, 1)
        inv = pow(unit_den, -1, mod)
        return cls(F, s, num_a * inv, num_b * inv, rel)

    @classmethod
    def zero(cls, F: LocalField, prec: int) -> "LocalElement":
        return cls(F, prec, 0, 0, 0)

    # -- basic properties ---------------------------------------------------

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def abs_prec(self) -> int:
        """Absolute precision in p-adic digits."""
        return self.shift + self.rel

    @property
    def precision(self) -> int:
        """Absolute precision in units of v(pi)."""
        return self.field.e * self.abs_prec

    def is_zero(self) -> bool:
        return self.rel == 0

    @property
    def valuation(self) -> float | int:
        """Valuation in units of v(pi); ``math.inf`` for zero at precision."""
        if self.rel == 0:
            return math.inf
        F = self.field
        v = F.e * self.shift
        if F.kind == "ram":
            v += min(_vp(self.unit_norm(), F.p), 1)
        return v

    def unit_norm(self) -> int:
        """Norm of the pair part a + b*w, as an integer mod p**rel."""
        F = self.field
        mod = F.p**self.rel
        if F.kind == "triv":
            return self.a % mod
        return (self.a * self.a + F.trace * self.a * self.b + F.norm * self.b * self.b) % mod

    def coords(self) -> tuple[Fraction, Fraction]:
        """Rational representatives of the two coordinates."""
        s = Fraction(self.p) ** self.shift
        return s * self.a, s * self.b

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "LocalElement":
        if isinstance(other, LocalElement):
            if other.field != self.field:
                raise ValueError("elements of different local fields")
            return other
        return LocalElement.from_pair(self.field, other, 0, self.abs_prec + 2)

    def __add__(self, other):
        other = self._coerce(other)
        s = min(self.shift, other.shift)
        A = min(self.abs_prec, other.abs_prec)
        rel = A - s
        if rel <= 0:
            return LocalElement.zero(self.field, A)
        p = self.p
        mod = p**rel
        f1 = p ** (self.shift - s)
        f2 = p ** (other.shift - s)
        return LocalElement(
            self.field, s, (self.a * f1 + other.a * f2) % mod, (self.b * f1 + other.b * f2) % mod, rel
        )

    __radd__ = __add__

    def __neg__(self):
        return LocalElement(self.field, self.shift, -self.a, -self.b, self.rel)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        other = self._coerce(other)
        s = self.shift + other.shift
        rel = min(self.rel, other.rel)
        if self.rel == 0 or other.rel == 0:
            return LocalElement.zero(self.field, s + rel)
        mod = self.p**rel
        a, b = _pair_mul(self.field, (self.a, self.b), (other.a, other.b), mod)
        return LocalElement(self.field, s, a, b, rel)

    __rmul__ = __mul__

    def scale(self, c: int) -> "LocalElement":
        """Multiply by a rational integer without losing relative precision."""
        if c == 0:
            return LocalElement.zero(self.field, 10**6)
        j = _vp(c, self.p)
        u = c // self.p**j
        return LocalElement(self.field, self.shift + j, self.a * u, self.b * u, self.rel)

    def div_int(self, n: int) -> "LocalElement":
        j = _vp(n, self.p)
        u = n // self.p**j
        if self.rel == 0:
            return LocalElement.zero(self.field, self.shift - j)
        inv = pow(u, -1, self.p**self.rel)
        return LocalElement(self.field, self.shift - j, self.a * inv, self.b * inv, self.rel)

    def conj(self) -> "LocalElement":
        """Image under the nontrivial automorphism of K_P over Q_p."""
        F = self.field
        if F.kind == "triv":
            return self
        return LocalElement(F, self.shift, self.a + F.trace * self.b, -self.b, self.rel)

    def norm(self) -> "LocalElement":
        F = self.field
        Fq = LocalField(F.p)
        if F.kind == "triv":
            return self
        if self.rel == 0:
            return LocalElement.zero(Fq, 2 * self.shift)
        return LocalElement(Fq, 2 * self.shift, self.unit_norm(), 0, self.rel)

    def trace(self) -> "LocalElement":
        F = self.field
        Fq = LocalField(F.p)
        if F.kind == "triv":
            return self.scale(2)
        return LocalElement(Fq, self.shift, 2 * self.a + F.trace * self.b, 0, self.rel)

    def inverse(self) -> "LocalElement":
        if self.rel == 0:
            raise ZeroDivisionError("inverse of zero at precision")
        F = self.field
        p = F.p
        if F.kind == "triv":
            return LocalElement(F, -self.shift, pow(self.a, -1, p**self.rel), 0, self.rel)
        n = self.unit_norm()
        t = _vp(n, p)
        if t >= self.rel:
            raise PrecisionError("norm vanishes at precision")
        rel = self.rel - t
        w = pow(n // p**t, -1, p**rel)
        cb = self.a + F.trace * self.b
        return LocalElement(F, -self.shift - t, cb * w, -self.b * w, rel)

    def __truediv__(self, other):
        if isinstance(other, int):
            return self.div_int(other)
        return self * self._coerce(other).inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = LocalElement.from_pair(self.field, 1, 0, self.rel + max(self.shift, 0) * k + 1)
        if self.rel == 0:
            return LocalElement.zero(self.field, self.shift * k)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def truncate(self, prec: int) -> "LocalElement":
        """Drop digits beyond absolute precision ``prec`` (p-adic digits)."""
        if prec >= self.abs_prec:
            return self
        return LocalElement(self.field, self.shift, self.a, self.b, prec - self.shift)

    def equals(self, other, prec: int | None = None) -> bool:
        d = self - other
        if prec is None:
            return d.is_zero()
        return d.is_zero() or d.shift >= prec

    def __eq__(self, other):
        if not isinstance(other, LocalElement):
            return NotImplemented
        return (self.field, self.shift, self.a, self.b, self.rel) == (
            other.field, other.shift, other.a, other.b, other.rel)

    def __hash__(self):
        return hash((self.field, self.shift, self.a, self.b, self.rel))

    def __repr__(self):
        F = self.field
        if self.rel == 0:
            return f"O({F.p}^{self.shift})"
        if F.kind == "triv":
            return f"{F.p}^{self.shift}*{self.a} + O({F.p}^{self.abs_prec})"
        return f"{F.p}^{self.shift}*({self.a} + {self.b}w) + O({F.p}^{self.abs_prec})"

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        F = self.field
        out = {"p": F.p, "ext": F.kind}
        if F.kind != "triv":
            out.update(m=F.m, trace=F.trace, norm=F.norm)
        a, b = self.coords()
        out.update(
            a=str(a), b=str(b), N=self.precision,
            v=None if self.rel == 0 else int(self.valuation),
        )
        return out

    @classmethod
    def from_json(cls, d: dict) -> "LocalElement":
        F = LocalField(d["p"], d["ext"], d.get("m"), d.get("trace", 0), d.get("norm", 0))
        prec = d["N"] // F.e
        out = cls.from_pair(F, Fraction(d["a"]), Fraction(d["b"]), prec)
        return out


# ---------------------------------------------------------------------------
# logarithm and exponential


def guard_digits(p: int, series_length: int) -> int:
    return math.ceil(math.log(max(series_length, 2), p)) + 2


def _log_series(x: LocalElement, target: int) -> LocalElement:
    """sum_{n>=1} (-1)^(n-1) x^n / n, to absolute p-adic precision ``target``."""
    F = x.field
    v = x.valuation / F.e  # p-adic units
    lnp = math.log(F.p)
    total = x
    pw = x
    n = 1
    while True:
        n += 1
        # n*v - log_p(n) bounds the valuation of term n and increases once n*v*ln p > 1
        if n * v * lnp > 1 and n * v - math.log(n, F.p) > target + 1:
            break
        pw = pw * x
        term = pw.div_int(n)
        total = total - term if n % 2 == 0 else total + term
    return total


def _raise_to_principal(u: LocalElement) -> tuple[LocalElement, int, int]:
    """Return (z, M, k) with z = u**M, M = (q-1) p**k and v(z-1) > e/(p-1)."""
    F = u.field
    M = F.q - 1
    z = u**M
    k = 0
    bound = F.e / (F.p - 1)
    while (z - 1).valuation <= bound:
        if (z - 1).is_zero():
            raise PrecisionError("unit too close to a root of unity for the given precision")
        z = z**F.p
        k += 1
    return z, M * F.p**k, k


def padic_log(u: LocalElement, N: int | None = None) -> LocalElement:
    """p-adic logarithm of a unit, extended from principal units via
    ln(u) = ln(u**M)/M.  ``N`` caps the absolute precision (p-adic digits).

    The precision of the result is the one tracked through the arithmetic,
    so it is never overstated."""
    if u.is_zero() or u.valuation != 0:
        raise ValueError("padic_log needs a unit")
    z, M, k = _raise_to_principal(u)
    x = z - 1
    if x.is_zero():
        out = LocalElement.zero(u.field, x.abs_prec).div_int(M)
    else:
        out = _log_series(x, x.abs_prec).div_int(M)
    if N is not None:
        out = out.truncate(N)
    return out


def log_ledger(F: LocalField, N: int) -> PrecisionLedger:
    """Input precision (p-adic digits) that is sufficient for ``padic_log`` to
    return N digits for any unit of F."""
    k = 0
    while F.p**k * (F.p - 1) <= F.e:
        k += 1
    loss = k + 1 if F.p == 2 else k
    g = guard_digits(F.p, N + loss)
    return PrecisionLedger(N, g, N + loss + g, loss)


def padic_exp(x: LocalElement, N: int | None = None) -> LocalElement:
    """sum x^n/n! for v(x) > e/(p-1)."""
    F = x.field
    if not x.is_zero() and x.valuation <= F.e / (F.p - 1):
        raise ValueError("padic_exp outside its convergence domain")
    target = x.abs_prec if N is None else min(N, x.abs_prec)
    one = LocalElement.from_pair(F, 1, 0, x.abs_prec + 1)
    if x.is_zero():
        return one.truncate(target)
    v = x.valuation / F.e
    total = one
    term = one
    n = 0
    while True:
        n += 1
        if n * v - (n - 1) / (F.p - 1) > target + 2 and n > 1:
            break
        term = (term * x).div_int(n)
        total = total + term
    return total.truncate(target)


def principal_unit_part(u: LocalElement) -> tuple[int, LocalElement]:
    """Split u = tau * u1 with tau a root of unity of order dividing q-1 and
    u1 a principal unit (for p = 2 over Q_2, also u1 = 1 mod 4).

    Returns (order of tau, u1)."""
    if u.is_zero() or u.valuation != 0:
        raise ValueError("principal_unit_part needs a unit")
    F = u.field
    q = F.q
    tau = u
    # Teichmueller limit: tau <- tau^q stabilizes after abs_prec steps
    for _ in range(u.abs_prec + 1):
        nxt = tau**q
        if nxt.equals(tau):
            break
        tau = nxt
    u1 = u / tau
    if F.p == 2 and F.kind == "triv" and (u1.a % 4) != 1:
        tau = -tau
        u1 = -u1
    order = 1
    one = LocalElement.from_pair(F, 1, 0, u.abs_prec)
    while not (tau**order).equals(one):
        order += 1
        if order > 2 * q:
            raise PrecisionError("torsion part not detected")
    return order, u1


# ---------------------------------------------------------------------------
# multiplicative orders


def unit_order(u, mul, identity, group_order: int) -> int:
    """Exact order of ``u`` in a finite group of known order."""
    def power(g, k):
        out = identity
        while k:
            if k & 1:
                out = mul(out, g)
            g = mul(g, g)
            k >>= 1
        return out

    if power(u, group_order) != identity:
        raise ValueError("element is not invertible in this group")
    n = group_order
    for q, a in factorint(group_order).items():
        for _ in range(a):
            if power(u, n // q) == identity:
                n //= q
            else:
                break
    return n


def residue_order(u: int, modulus: int) -> int:
    """Multiplicative order of u modulo an integer."""
    if math.gcd(u, modulus) != 1:
        raise ValueError(f"{u} is not invertible mod {modulus}")
    from sympy import totient

    return unit_order(u % modulus, lambda a, b: a * b % modulus, 1 % modulus, int(totient(modulus)))


# ---------------------------------------------------------------------------
# rational dependence and rank


def _gauss_reduce(u, v):
    def n2(w):
        return w[0] * w[0] + w[1] * w[1]

    if n2(u) > n2(v):
        u, v = v, u
    while True:
        d = n2(u)
        if d == 0:
            return u, v
        mu = round(Fraction(u[0] * v[0] + u[1] * v[1], d))
        v = (v[0] - mu * u[0], v[1] - mu * u[1])
        if n2(v) >= n2(u):
            return u, v
        u, v = v, u


def rational_ratio(x: LocalElement, y: LocalElement, H: int, guard: int = 2) -> Fraction | None:
    """Rational r = a/b with |a|, |b| <= H and y = r*x, or None.

    The candidate comes from Gauss reduction of the two-dimensional lattice
    {(b, a) : a = b*(y/x) mod p^P}.  Requires H^2 <= p^P / 100 where P is the
    certified precision of y/x minus ``guard``; otherwise raises
    Inconclusive.  Any returned ratio has been re-checked at full precision.
    """
    if x.is_zero() or y.is_zero():
        raise ValueError("rational_ratio needs nonzero inputs")
    F = x.field
    flip = x.valuation > y.valuation
    num, den = (x, y) if flip else (y, x)
    rho = num / den
    if F.kind != "triv" and rho.b % (F.p**rho.rel) != 0:
        # y/x is not in Q_p at this precision; the second coordinate is a unit
        return None
    P = rho.abs_prec - guard
    if P <= 0 or H * H * 100 > F.p**P:
        raise Inconclusive(f"H={H} too large for {P} digits of p={F.p}")
    s = rho.shift
    mod = F.p**P
    r = (F.p**s * rho.a) % mod
    u, w = _gauss_reduce((1, r), (0, mod))
    best = None
    for cand in (u, w):
        b, a = cand
        if b == 0:
            continue
        if max(abs(a), abs(b)) <= H and (best is None or max(abs(a), abs(b)) < max(map(abs, best))):
            best = (a, b)
    if best is None:
        return None
    a, b = best
    if a == 0:
        return None
    out = Fraction(a, b)
    if flip:
        out = 1 / out
    # verification at full precision
    if not (x.scale(out.numerator) - y.scale(out.denominator)).is_zero():
        return None
    return out


def qp_rank(A: Sequence[Sequence[LocalElement]], t: int) -> int:
    """Rank of a matrix of local elements, counting pivots of valuation < t
    (t in units of v(pi)).  Pivoting by minimal valuation."""
    rows = [list(r) for r in A]
    if not rows or not rows[0]:
        return 0
    rank = 0
    nrows, ncols = len(rows), len(rows[0])
    active_r = list(range(nrows))
    active_c = list(range(ncols))
    while active_r and active_c:
        best = None
        for i in active_r:
            for j in active_c:
                e = rows[i][j]
                if e.is_zero():
                    if e.precision < t:
                        raise Inconclusive(f"precision exhausted; rank >= {rank}")
                    continue
                if best is None or e.valuation < rows[best[0]][best[1]].valuation:
                    best = (i, j)
        if best is None:
            break
        i0, j0 = best
        piv = rows[i0][j0]
        if piv.valuation >= t:
            break
        rank += 1
        inv = piv.inverse()
        for i in active_r:
            if i == i0:
                continue
            f = rows[i][j0] * inv
            for j in active_c:
                rows[i][j] = rows[i][j] - f * rows[i0][j]
        active_r.remove(i0)
        active_c.remove(j0)
    return rank
