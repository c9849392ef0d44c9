import random

import pytest
from hypothesis import given, strategies as st
from sympy import primerange

from arithquandle.quadfield import (
    QuadField,
    QuadIdeal,
    narrow_class_group,
    primes_above,
    split_prime,
    totally_positive_unit_generators,
)
from arithquandle.rayclass import (
    frobenius_rational,
    level_projection,
    ray_class_group,
    residue_unit_group,
)

Q, Q5, Qi, Q3 = QuadField(1), QuadField(5), QuadField(-1), QuadField(3)


def p_ideal(K, p):
    return split_prime(K, p).primes[0][0]


def residue_int(level, g) -> int:
    """K = Q: the residue mod p^N of a group element."""
    free = level.from_group(g)
    res = level.residue.group
    return res.element(free[: len(res.invariants)])[0]


@pytest.mark.parametrize("K,p,N,inv", [(Q, 3, 2, (6,)), (Q5, 3, 1, (8,)), (Q, 2, 4, (2, 4)), (Q, 5, 3, (100,))])
def test_residue_unit_groups(K, p, N, inv):
    P = p_ideal(K, p)
    res = residue_unit_group(K, P, N)
    assert res.group.invariants == inv
    q = P.norm
    assert res.order == (q - 1) * q ** (N - 1)


def test_rational_ray_class_groups():
    assert ray_class_group(Q, p_ideal(Q, 5), 3).invariants == (100,)
    assert ray_class_group(Q, p_ideal(Q, 2), 4).invariants == (2, 4)


def units_mod(K, n):
    return [(a, b) for a in range(n) for b in range(n) if K(a, b).norm() % prime_factor(n)]


def prime_factor(n):
    return next(q for q in range(2, n + 1) if n % q == 0)


def test_gaussian_level_two():
    # |(O/9)^x| / |<i>| = 72 / 4
    assert len(units_mod(Qi, 9)) == 72
    assert ray_class_group(Qi, p_ideal(Qi, 3), 2).order == 18


def test_real_quadratic_orders():
    P = p_ideal(Q5, 3)
    for N in range(1, 5):
        assert ray_class_group(Q5, P, N).order == 2 * 3 ** (N - 1)


@pytest.mark.parametrize("K,p,N", [(Q5, 3, 3), (Qi, 3, 2), (Q3, 5, 2), (QuadField(-5), 3, 2), (QuadField(-23), 5, 1), (Q, 7, 2)])
def test_exact_sequence_bookkeeping(K, p, N):
    P = p_ideal(K, p)
    level = ray_class_group(K, P, N)
    res = level.residue
    image = res.group.abstract.subgroup_elements([res.dlog(u) for u in totally_positive_unit_generators(K)])
    h = narrow_class_group(K).order
    assert level.order * len(image) == res.order * h


def test_frobenius_over_Q_is_reduction():
    for p, N in [(5, 2), (5, 3), (7, 2), (2, 4)]:
        level = ray_class_group(Q, p_ideal(Q, p), N)
        for l in primerange(2, 300):
            if l == p:
                continue
            g = level.frobenius(QuadIdeal(Q, l))
            assert residue_int(level, g) == frobenius_rational(l, p, N) == l % p**N


def test_conjugate_primes_share_frobenius():
    level = ray_class_group(Q5, p_ideal(Q5, 3), 3)
    P, Pb = primes_above(Q5, 11)
    assert level.frobenius(P) == level.frobenius(Pb)


def test_gaussian_frobenius_from_generator():
    level = ray_class_group(Qi, p_ideal(Qi, 3), 3)
    for a, b in [(2, 1), (2, -1), (1, 4), (5, 2)]:
        alpha = Qi(a, b)
        P = QuadIdeal.principal(alpha)
        # every unit of Q(i) is killed, so any generator gives the class
        assert level.frobenius(P) == level.residue_class(alpha) == level.residue_class(alpha * Qi(0, 1))


def test_ramified_input_rejected():
    level = ray_class_group(Q5, p_ideal(Q5, 3), 2)
    with pytest.raises(ValueError):
        level.frobenius(QuadIdeal.from_generators(Q5, [3]))


def test_projection_identity_and_reduction():
    lo = ray_class_group(Q, p_ideal(Q, 5), 2)
    hi = ray_class_group(Q, p_ideal(Q, 5), 3)
    same = level_projection(hi, hi)
    assert all(same(g) == g for g in hi.group.elements())
    pr = level_projection(hi, lo)
    for g in hi.group.elements():
        assert residue_int(lo, pr(g)) == residue_int(hi, g) % 25
    assert {pr(g) for g in hi.group.elements()} == set(lo.group.elements())


@pytest.mark.parametrize("K,p,hi,lo", [(Q5, 3, 3, 2), (Q5, 3, 4, 1), (Qi, 3, 3, 1), (Q3, 5, 2, 1)])
def test_projection_commutes_with_frobenius(K, p, hi, lo):
    H = ray_class_group(K, p_ideal(K, p), hi)
    L = ray_class_group(K, p_ideal(K, p), lo)
    pr = level_projection(H, L)
    split = [P for l in primerange(5, 400) for P in primes_above(K, l)
             if split_prime(K, l).type == "split" and l != p][:30]
    assert len(split) == 30
    for P in split:
        assert pr(H.frobenius(P)) == L.frobenius(P)
    # a homomorphism onto G_lo
    G = H.group
    gens = [tuple(int(i == j) for j in range(len(G.invariants))) for i in range(len(G.invariants))]
    for a in gens:
        for b in G.elements()[:50]:
            assert pr(G.mul(a, b)) == L.group.mul(pr(a), pr(b))
    assert {pr(g) for g in G.elements()} == set(L.group.elements())


primes_q5 = [P for l in primerange(2, 120) if l not in (3, 5) for P in primes_above(Q5, l)]
primes_qi = [P for l in primerange(2, 120) if l != 3 for P in primes_above(Qi, l)]


@given(st.sampled_from([(Q5, primes_q5), (Qi, primes_qi)]), st.integers(0, 2**32))
def test_frobenius_is_multiplicative(data, seed):
    K, primes = data
    level = ray_class_group(K, p_ideal(K, 3), 3)
    rng = random.Random(seed)
    for _ in range(20):
        I, J = rng.choice(primes), rng.choice(primes)
        assert level.frobenius(I * J) == level.group.mul(level.frobenius(I), level.frobenius(J))


def test_frobenius_is_multiplicative_bulk():
    level = ray_class_group(Q3, p_ideal(Q3, 5), 2)
    primes = [P for l in primerange(2, 200) if l not in (2, 3, 5) for P in primes_above(Q3, l)]
    rng = random.Random(0)
    for _ in range(1000):
        I, J = rng.choice(primes), rng.choice(primes)
        assert level.frobenius(I * J) == level.group.mul(level.frobenius(I), level.frobenius(J))
