import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sympy import primerange

from arithquandle.arith import F1, F2, F3, build_slot_machine, fixture_level, fixture_tower, tower
from arithquandle.padic import Inconclusive, LocalField, padic_log, rational_ratio
from arithquandle.quadfield import QuadField, QuadIdeal, conjugate_ideal, fundamental_unit, primes_above, split_prime
from arithquandle.quandle import FiniteQuandle, is_morphism, trivial_quandle
from arithquandle.reconstruct import (
    aut_structure_report,
    classify_case,
    detect_W,
    fiber_exchange,
    frobenius_log,
    inner_isomorphism,
    limit_coherence,
    match_quandles,
    qp_vector,
    reciprocity_coordinates,
    recover_group,
    recover_orbits,
    recover_p,
    recover_residue_chars,
    strip,
)

Q, Q5, Qi = QuadField(1), QuadField(5), QuadField(-1)


def p_ideal(K, p):
    return split_prime(K, p).primes[0][0]


@pytest.mark.parametrize("K,p,case", [
    (Q, 5, "1"), (Q5, 11, "2-0"), (Q5, 3, "2-1"), (Q5, 5, "2-1"), (Qi, 5, "2-2"), (Qi, 3, "2-3"),
])
def test_classify_case(K, p, case):
    assert classify_case(K, p_ideal(K, p)) == case


def test_recover_group():
    assert recover_group(trivial_quandle(4)).order == 1
    lev = fixture_level(F1)
    Q1 = lev.quandle
    fibers = [list(np.nonzero(Q1.fiber_of == i)[0]) for i in range(len(Q1.fibers))]
    rep = recover_group(Q1, fibers, expected_order=lev.group.order)
    assert rep.order == 100 and rep.abelian and rep.invariants == (100,)
    assert rep.transitive_on_fibers and rep.diagnostics == []


def test_recover_group_flags_small_inn():
    # the fiber of 2 is a point, and 2 acts on the fiber of 7 through G/<7>
    lev = build_slot_machine(5, [2, 7], 2)
    rep = recover_group(lev.quandle, expected_order=lev.group.order)
    assert rep.order == 5
    assert any("differs" in d for d in rep.diagnostics)


def test_recover_orbits_are_fibers():
    Q2 = fixture_tower(F2).levels[3].quandle
    fibers = sorted(sorted(int(x) for x in np.nonzero(Q2.fiber_of == i)[0]) for i in range(len(Q2.fibers)))
    assert sorted(sorted(int(x) for x in o) for o in recover_orbits(Q2)) == fibers


def test_recover_p_finite_group():
    P = p_ideal(Q5, 11)
    M = [Pl for l in primerange(2, 40) if l not in (5, 11) for Pl in primes_above(Q5, l)]
    T = tower(Q5, P, M, 3)
    rep = recover_p(T)
    assert rep.outcome == "finite-G" and rep.p is None


def test_recover_p_needs_three_levels():
    with pytest.raises(ValueError):
        recover_p(fixture_tower(F1, 2))


def test_rational_reciprocity_is_log():
    lev = fixture_level(F1)
    data = reciprocity_coordinates(lev, 16)
    assert data.case == "1" and data.R == 1
    F = LocalField(5)
    for label, r in zip(data.labels, data.scalars()):
        l = int(label)
        ll = padic_log(F(l, 0, 24), 16)
        assert rational_ratio(r, ll, 100) == 1


def test_real_quadratic_reciprocity_over_11():
    # r(l) is ln N(alpha) / n: a rational multiple of ln 11 for l over 11
    lev = fixture_level(F2, 3)
    data = reciprocity_coordinates(lev, 16)
    assert data.case == "2-1"
    F = LocalField(3, "ur", 5, 1, -1)
    l11 = padic_log(F(11, 0, 24), 16)
    idx = [i for i, lab in enumerate(data.labels) if lab.startswith("11")]
    assert idx
    for i in idx:
        (r,) = data.values[i]
        assert rational_ratio(r, qp_vector(l11)[0], 100) is not None


def test_gaussian_reciprocity():
    P = p_ideal(Qi, 3)
    L = QuadIdeal.principal(Qi(2, 1))
    n, r = frobenius_log(Qi, P, L, 12)
    assert n == 1 and len(r) == 2
    F = LocalField(3, "ur", -1, 0, 1)
    ref = qp_vector(padic_log(F(2, 1, 20), 12))
    assert all(a.equals(b, 12) for a, b in zip(r, ref))


def test_generator_choice_is_irrelevant():
    P = p_ideal(Q5, 3)
    eps = fundamental_unit(Q5)
    for l in (11, 19, 29, 31):
        for L in primes_above(Q5, l):
            _, r = frobenius_log(Q5, P, L, 12)
            _, s = frobenius_log(Q5, P, L, 12, unit=eps)
            _, t = frobenius_log(Q5, P, L, 12, unit=eps * eps * eps)
            assert r[0].equals(s[0], 12) and r[0].equals(t[0], 12)
    Pi = p_ideal(Qi, 3)
    L = QuadIdeal.principal(Qi(2, 1))
    _, r = frobenius_log(Qi, Pi, L, 12)
    _, s = frobenius_log(Qi, Pi, L, 12, unit=Qi(0, 1))
    assert all(a.equals(b, 12) for a, b in zip(r, s))


def test_case_2_0_has_no_coordinates():
    with pytest.raises(ValueError):
        frobenius_log(Q5, p_ideal(Q5, 11), primes_above(Q5, 19)[0], 12)


def test_rational_residue_chars():
    M = [l for l in primerange(2, 101) if l != 5]
    lev = build_slot_machine(5, M, 2)
    data = reciprocity_coordinates(lev, 16)
    res = recover_residue_chars(data.scalars(), 5)
    assert res.chars == M


def test_residue_chars_need_precision():
    M = [2, 3, 7, 11]
    lev = build_slot_machine(5, M, 2)
    data = reciprocity_coordinates(lev, 4)
    with pytest.raises(Inconclusive):
        recover_residue_chars(data.scalars(), 5)


def test_detect_W_pairs_conjugates():
    lev = fixture_level(F3)
    data = reciprocity_coordinates(lev, 12)
    rng = np.random.default_rng(0)
    order = rng.permutation(len(data.values))
    vals = [data.values[i] for i in order]
    labels = [data.labels[i] for i in order]
    w = detect_W(vals)
    pos = {lab: k for k, lab in enumerate(labels)}
    K = lev.K
    from arithquandle.arith import prime_from_label, prime_label

    for k, lab in enumerate(labels):
        conj = prime_label(conjugate_ideal(prime_from_label(K, lab)))
        if conj in pos:
            assert w.pairing[k] == pos[conj]


def test_match_relabelled_rational_tower():
    T = fixture_tower(F1, 3)
    A, ka = strip(T, seed=1)
    B, kb = strip(T, seed=2)
    rep = match_quandles(A, B, case="1").labelled(ka, kb)
    assert rep["p"] == 5 and rep["isomorphism_verified"]
    assert rep["sigma"] == "identity"
    assert all(a == b for a, b in rep["matching"])
    assert limit_coherence(A) is True


def test_inner_isomorphism():
    for lev in (fixture_level(F1), fixture_level(F2, 3)):
        rep = inner_isomorphism(lev)
        assert rep["isomorphism"] and rep["order"] == rep["inn_order"]


def test_fiber_exchange_requires_equal_frobenius():
    # 2 and 127 agree mod 25
    lev = build_slot_machine(5, [2, 127, 3], 2)
    f = fiber_exchange(lev, 0, 1)
    assert f is not None and is_morphism(lev.quandle, lev.quandle, f)
    assert fiber_exchange(lev, 0, 2) is None


def test_aut_single_fiber():
    lev = build_slot_machine(3, [7], 2)
    rep = aut_structure_report(lev)
    assert rep.mode == "exhaustive" and rep.equal
    assert rep.kernel_order == rep.translation_order == lev.quandle.n
    assert rep.kernel_is_translations


@settings(max_examples=10)
@given(st.integers(0, 2**16))
def test_strip_is_a_relabelling(seed):
    T = fixture_tower(F1, 3)
    A, key = strip(T, seed=seed)
    for N, lev in T.levels.items():
        perm = key.perms[N]
        assert sorted(perm.tolist()) == list(range(lev.quandle.n))
        assert is_morphism(lev.quandle, A.levels[N], perm)
    # the projections commute with the hidden relabelling
    pi, pa = T.projection(3, 2), A.projections[(3, 2)]
    assert np.array_equal(pa[key.perms[3]], key.perms[2][pi])
