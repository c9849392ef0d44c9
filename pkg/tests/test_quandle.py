from itertools import product
from math import prod

import numpy as np
import pytest
from hypothesis import given, strategies as st

from arithquandle.arith import F1, S3, fixture_F4, fixture_level
from arithquandle.groups import AbelianGroup, PermutationGroup, perm_inv, perm_mul
from arithquandle.quandle import (
    AugmentedQuandle,
    FiniteQuandle,
    SearchBudgetExceeded,
    automorphism_group,
    coset_quandle,
    conjugation_quandle,
    fiber_translation_action,
    from_augmented,
    inner_group,
    is_morphism,
    isomorphisms,
    orbits,
    quotient_by_commutator,
    trivial_quandle,
    verify_axioms,
)


def brute_axioms(Q: FiniteQuandle) -> bool:
    T = Q.table()
    n = Q.n
    idem = all(T[q, q] == q for q in range(n))
    bij = all(len(set(T[q])) == n for q in range(n))
    dist = all(T[q, T[r, s]] == T[T[q, r], T[q, s]] for q in range(n) for r in range(n) for s in range(n))
    return idem and bij and dist


def test_axioms_small_cases():
    assert verify_axioms(trivial_quandle(1)).passed
    assert verify_axioms(conjugation_quandle(S3)).passed
    # s_0 sends 1 and 2 to 2
    bad = FiniteQuandle.from_table([[0, 2, 2], [0, 1, 2], [0, 1, 2]])
    rep = verify_axioms(bad)
    assert not rep.passed and rep.failed_axiom == 2
    q, r1, r2 = rep.witness
    assert r1 != r2 and bad.op(q, r1) == bad.op(q, r2)


def test_axioms_detect_distributivity_failure():
    # bijective rows, idempotent, but not self-distributive
    T = [[0, 2, 1, 3], [0, 1, 3, 2], [1, 0, 2, 3], [0, 1, 2, 3]]
    Q = FiniteQuandle.from_table(T)
    assert brute_axioms(Q) is False
    rep = verify_axioms(Q)
    assert not rep.passed and rep.failed_axiom == 3


def test_sampled_mode():
    Q = fixture_level(F1).quandle
    rep = verify_axioms(Q, exhaustive_bound=50, samples=2000)
    assert rep.passed and rep.mode == "sampled" and rep.checked == 2000


def test_coset_trivial_fiber():
    C4 = AbelianGroup((4,))
    Q = coset_quandle(C4, [((1,), [(1,)])])
    assert Q.n == 1


def _log2_mod25(a: int) -> int:
    return next(k for k in range(20) if pow(2, k, 25) == a % 25)


def test_slot_machine_level_two():
    G = AbelianGroup((20,))  # (Z/25)^x = <2>
    data = [((_log2_mod25(l),), [(_log2_mod25(l),)]) for l in (2, 3, 7)]
    Q = coset_quandle(G, data)
    ords = [next(k for k in range(1, 21) if pow(l, k, 25) == 1) for l in (2, 3, 7)]
    assert [f.size for f in Q.fibers] == [20 // o for o in ords]
    assert brute_axioms(Q)


def test_coset_quandle_s3():
    Q = coset_quandle(S3, [((1, 2, 0), [(1, 2, 0)]), ((1, 0, 2), [(1, 0, 2)])])
    assert [f.size for f in Q.fibers] == [2, 3]
    assert Q.n == 5
    assert brute_axioms(Q)


def test_coset_quandle_rejects_bad_data():
    with pytest.raises(ValueError):
        coset_quandle(S3, [((1, 2, 0), [(1, 0, 2)])])


def test_conjugation_quandles():
    C3 = PermutationGroup([(1, 2, 0)])
    Q = conjugation_quandle(C3)
    assert (Q.table() == np.arange(3)).all()
    Q = conjugation_quandle(S3)
    Inn = inner_group(Q)
    assert Inn.order == 6 and not Inn.is_abelian()
    assert verify_axioms(conjugation_quandle(S3, mirrored=True)).passed


def test_inner_groups():
    assert inner_group(trivial_quandle(5)).order == 1
    from arithquandle.arith import build_slot_machine

    lev = build_slot_machine(5, [2, 3, 7], 1)
    # the Frobenius values generate (Z/5)^x, but every fiber is a point, so
    # the permutation group Inn is trivial
    assert len(lev.group.subgroup_elements(lev.frob)) == 4
    assert inner_group(lev.quandle).order == 1
    # mod 25 only 7 (of order 4) leaves a nontrivial fiber, of size 5
    lev = build_slot_machine(5, [2, 3, 7], 2)
    assert inner_group(lev.quandle).order == 5
    F4 = fixture_F4().quandle
    Inn = inner_group(F4)
    assert Inn.order == 6 and not Inn.is_abelian()


def test_transvections_subgroup():
    assert inner_group(conjugation_quandle(S3), transvections=True).order == 6
    # transpositions: s_a s_b^-1 are the 3-cycles
    Q = coset_quandle(S3, [((1, 0, 2), [(1, 0, 2)])])
    assert inner_group(Q).order == 6
    assert inner_group(Q, transvections=True).order == 3


def test_automorphism_groups():
    assert automorphism_group(trivial_quandle(1)).order == 1
    assert automorphism_group(trivial_quandle(4)).order == 24
    with pytest.raises(SearchBudgetExceeded):
        automorphism_group(trivial_quandle(30))


def test_aut_contains_inn():
    Q = coset_quandle(S3, [((1, 2, 0), [(1, 2, 0)]), ((1, 0, 2), [(1, 0, 2)])])
    Aut = automorphism_group(Q)
    assert all(g in Aut for g in inner_group(Q).elements())


def test_quotient_by_commutator():
    from arithquandle.arith import build_slot_machine

    Q = build_slot_machine(5, [2, 3, 7], 2).quandle
    Qab, cls = quotient_by_commutator(Q)
    assert Qab.n == Q.n and sorted(cls) == list(range(Q.n))
    Qab, _ = quotient_by_commutator(fixture_F4().quandle)
    Inn = inner_group(Qab)
    assert Inn.is_abelian() and Inn.order == 2
    # identity, the two 3-cycles, one class for the transpositions
    Qab, _ = quotient_by_commutator(conjugation_quandle(S3))
    assert Qab.n == 4


def test_from_augmented_conjugation():
    elems = S3.elements()
    idx = {g: i for i, g in enumerate(elems)}

    def act(g, q):
        return idx[perm_mul(perm_mul(g, elems[q]), perm_inv(g))]

    A = AugmentedQuandle(S3, 6, act, list(elems))
    assert A.check()
    res = from_augmented(A)
    assert is_morphism(A.quandle(), res.quandle, res.iso)
    assert len(set(res.iso)) == 6
    assert np.array_equal(A.quandle().table(), conjugation_quandle(S3, mirrored=True).table())


def test_from_augmented_on_coset_data():
    lev = fixture_level(F1)
    Q = lev.quandle
    G = lev.group
    A = AugmentedQuandle(G, Q.n, lambda g, q: int(lev.action(g)[q]), [lev.augmentation(q) for q in range(Q.n)])
    res = from_augmented(A)
    assert [f.size for f in res.quandle.fibers] == [f.size for f in Q.fibers]
    assert is_morphism(Q, res.quandle, res.iso)


def test_relabelled_copy_is_isomorphic():
    Q = fixture_level(F1).quandle
    perm = np.random.default_rng(3).permutation(Q.n)
    R = Q.relabel(perm)
    (f,) = isomorphisms(Q, R, limit=1)
    assert is_morphism(Q, R, f)
    # fibers go to orbits of the copy
    orb = {x: i for i, o in enumerate(orbits(R)) for x in o}
    for fib in range(len(Q.fibers)):
        xs = np.nonzero(Q.fiber_of == fib)[0]
        assert len({orb[f[x]] for x in xs}) == 1


def test_orbits():
    assert orbits(trivial_quandle(3)) == [[0], [1], [2]]
    for Q in (fixture_level(F1).quandle, fixture_F4().quandle):
        fibers = [list(np.nonzero(Q.fiber_of == i)[0]) for i in range(len(Q.fibers))]
        assert sorted(orbits(Q)) == sorted(fibers)


def test_fiber_translations():
    lev = fixture_level(F1)
    Q, G = lev.quandle, lev.group
    e = G.identity
    nf = len(Q.fibers)
    assert fiber_translation_action(Q, [e] * nf) == tuple(range(Q.n))
    lam = max(range(nf), key=lambda i: Q.fibers[i].size)
    u = [e] * nf
    u[lam] = (1,)
    t = fiber_translation_action(Q, u)
    moved = [x for x in range(Q.n) if t[x] != x]
    assert moved and all(Q.fiber_of[x] == lam for x in moved)
    assert is_morphism(Q, Q, t)
    v = [e] * nf
    v[lam] = (3,)
    w = [e] * nf
    w[lam] = (4,)
    tv, tw = fiber_translation_action(Q, v), fiber_translation_action(Q, w)
    assert perm_mul(tv, t) == tw


@st.composite
def abelian_coset_data(draw):
    d = draw(st.sampled_from([(4,), (6,), (2, 2), (2, 4), (9,), (3, 3)]))
    G = AbelianGroup(d)
    k = draw(st.integers(1, 3))
    zs = [tuple(draw(st.integers(0, m - 1)) for m in d) for _ in range(k)]
    return G, zs


@given(abelian_coset_data())
def test_abelian_coset_quandles_are_quandles(data):
    G, zs = data
    Q = coset_quandle(G, [(z, [z]) for z in zs])
    assert brute_axioms(Q)
    assert verify_axioms(Q).passed
    # prod G/H_l acts faithfully by fiber translations
    seen = {fiber_translation_action(Q, list(u)) for u in product(*(f.reps for f in Q.fibers))}
    assert len(seen) == prod(f.size for f in Q.fibers)
    assert all(is_morphism(Q, Q, t) for t in seen)


@given(abelian_coset_data())
def test_json_round_trip(data):
    G, zs = data
    Q = coset_quandle(G, [(z, [z]) for z in zs])
    R = FiniteQuandle.from_json(Q.to_json())
    assert np.array_equal(Q.table(), R.table())
    T = FiniteQuandle.from_json(Q.stripped().to_json())
    assert np.array_equal(Q.table(), T.table())
