from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cohpow import orders, pcf
from cohpow.orders import code_of_int, code_of_rat

F = orders.ToyInjection()
TOY = orders.thm4_order(F)


def toy_key(x: int) -> tuple[int, int]:
    # independent model: 2c sits at (c, 0), 2k+1 at (f(k), 1)
    return (x // 2, 0) if x % 2 == 0 else (F(x // 2), 1)


def test_std_examples():
    assert orders.std_int().less(code_of_int(-1), code_of_int(0))
    assert orders.std_rat().less(code_of_rat(Fraction(1, 3)), code_of_rat(Fraction(1, 2)))
    nqz = orders.nat_plus_rat_times_int()
    left = [pcf.pair(0, k) for k in range(20)]
    right = [pcf.pair(1, pcf.pair(q, z)) for q in range(8) for z in range(8)]
    assert all(nqz.less(a, b) for a in left for b in right)


def test_int_fold_encoding():
    assert [orders.int_of(c) for c in range(7)] == [0, -1, 1, -2, 2, -3, 3]
    for z in range(-50, 51):
        assert orders.int_of(code_of_int(z)) == z


def test_rat_enumeration_order():
    # by height |p| + q, then |p|, then q, then sign
    first = [orders.rat_of(c) for c in range(9)]
    assert first == [0, 1, -1, Fraction(1, 2), Fraction(-1, 2), 2, -2, Fraction(1, 3), Fraction(-1, 3)]
    for c in range(300):
        assert code_of_rat(orders.rat_of(c)) == c


def test_combinator_examples():
    nat, zz, qq = orders.std_nat(), orders.std_int(), orders.std_rat()
    assert orders.sum_order(nat, nat).less(pcf.pair(0, 100), pcf.pair(1, 0))
    L = orders.lex(qq, zz)
    a = pcf.pair(code_of_rat(Fraction(1, 2)), code_of_int(7))
    b = pcf.pair(code_of_rat(Fraction(2, 3)), code_of_int(-5))
    assert L.less(a, b)
    assert orders.reverse(nat).less(5, 3)


def test_domain_errors():
    S = orders.sum_order(orders.std_nat(), orders.std_nat())
    with pytest.raises(orders.OrderDomainError):
        S.less(pcf.pair(2, 0), pcf.pair(0, 0))
    assert not S.in_domain(pcf.pair(5, 1))


def test_combinators_against_direct_rules():
    rng = random.Random(3)
    nat, zz = orders.std_nat(), orders.std_int()
    S, P, R = orders.sum_order(nat, zz), orders.lex(zz, nat), orders.reverse(zz)
    for _ in range(1000):
        i, j = rng.randint(0, 1), rng.randint(0, 1)
        l, m = rng.randint(0, 300), rng.randint(0, 300)
        want = i < j or (i == j and (l < m if i == 0 else orders.int_of(l) < orders.int_of(m)))
        assert S.less(pcf.pair(i, l), pcf.pair(j, m)) == want
        k, n = rng.randint(0, 300), rng.randint(0, 300)
        want = orders.int_of(k) < orders.int_of(l) or (k == l and n < m)
        assert P.less(pcf.pair(k, n), pcf.pair(l, m)) == want
        assert R.less(k, l) == (orders.int_of(l) < orders.int_of(k))


def test_toy_examples():
    assert TOY.less(6, 1) and TOY.less(1, 8) and TOY.less(3, 1) and TOY.less(4, 6)


@given(st.integers(min_value=0, max_value=5000), st.integers(min_value=0, max_value=5000))
def test_toy_matches_model(x, y):
    assert TOY.less(x, y) == (toy_key(x) < toy_key(y))


def test_evens_natural():
    assert all(TOY.less(2 * c, 2 * d) == (c < d) for c in range(201) for d in range(201))


@pytest.mark.parametrize("name", ["nat", "int", "rat", "nqz", "thm4:toy"])
def test_axioms_exhaustive_and_random(name):
    L = orders.get_order(name)
    assert orders.axioms_check(L, L.domain_upto(100))["ok"]
    assert orders.random_triples_check(L, 2000, 10**5, seed=2)["ok"]


def test_axioms_catches_corruption():
    bad = orders.CompOrder("parity", lambda x: True, lambda x, y: x % 2 < y % 2)
    r = orders.axioms_check(bad, range(10))
    assert not r["ok"] and r["violation"]["axiom"] == "totality"


def test_interval_examples():
    nat = orders.std_nat()
    assert orders.interval_card_bounded(nat, 2, 3, 1000) == 0
    assert orders.interval_card_bounded(TOY, 6, 20, 200) >= 6
    rat = orders.std_rat()
    z, one = code_of_rat(0), code_of_rat(1)
    counts = [orders.interval_card_bounded(rat, z, one, b) for b in (50, 200, 500)]
    assert counts[0] < counts[1] < counts[2]


def test_successor_examples():
    assert orders.succ_at_stage(orders.std_nat(), 4, 50) == 5
    assert orders.succ_at_stage(TOY, 6, 7) == 1
    # 4 is outside the toy range, so nothing odd sits above 8
    assert orders.succ_at_stage(TOY, 8, 500) == 10


def test_successor_matrix():
    for a in range(101):
        s = orders.succ_at_stage(TOY, 2 * a, 4 * a + 8)
        assert (F.preimage(a) is not None) == (s != 2 * a + 2)


def test_pred_count_formula():
    for b in range(0, 60):
        bound = 2 * b + 40
        kmax = (bound - 1) // 2
        want = b + sum(1 for k in range(kmax + 1) if F(k) < b)
        assert orders.pred_count_at_stage(TOY, 2 * b, bound) == want


def test_simple_set_enumeration_order():
    f = orders.SimpleSetEnumeration(pcf.DEFAULT)
    L = orders.thm4_order(f)
    assert orders.axioms_check(L, range(40))["ok"]
    seen = [f(k) for k in range(12)]
    assert len(set(seen)) == len(seen)


def test_less_matrix_is_boolean_square():
    M = orders.less_matrix(orders.std_nat(), [3, 1, 2])
    assert M.tolist() == [[False, False, False], [True, False, True], [True, False, False]]


def test_registry():
    assert set(orders.ORDER_NAMES) >= {"nat", "int", "rat", "nqz", "thm4:toy", "lemma5"}
    with pytest.raises(KeyError):
        orders.get_order("nope")
