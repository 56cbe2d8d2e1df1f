from __future__ import annotations

import random

import pytest

from cohpow import avoidsucc, cohesive, orders, pcf, power
from cohpow.avoidsucc import Construction, ExtendedR
from cohpow.cohesive import AscendingR, ArithmeticR

DEAD = pcf.Machine((pcf.build_diverging(),) * 4)


@pytest.fixture(scope="module")
def R(approx):
    return avoidsucc.default_R(approx)


@pytest.fixture(scope="module")
def run2000(R):
    return avoidsucc.run_construction(2000, R)


@pytest.mark.parametrize("stages", [60, 150, 300, 700])
@pytest.mark.parametrize("which", ["toy", "default"])
def test_matches_literal_replay(stages, which, R):
    r = ArithmeticR(3, 2) if which == "toy" else R
    fast = avoidsucc.run_construction(stages, r).actions
    assert fast == avoidsucc.replay_naive(stages, r)


def test_matches_literal_replay_other_machine():
    m = pcf.Machine((pcf.build_add(2), pcf.build_double(), pcf.build_successor()))
    r = ArithmeticR(5, 1)
    assert avoidsucc.run_construction(400, r, m).actions == avoidsucc.replay_naive(400, r, m)


def test_three_quiet_stages():
    st = avoidsucc.run_construction(3, ArithmeticR(3, 2), DEAD)
    assert st.order_list() == [0, 1, 2, 3]
    assert not st.actions
    assert avoidsucc.as_order(st).less(0, 1)


def test_every_stage_enters(run2000):
    assert all(s in run2000 for s in range(2001))


def test_actions_are_unique_and_from_R(run2000, R):
    codes = [pcf.pair(a.e, a.n) for a in run2000.actions]
    assert len(codes) == len(set(codes))
    assert all(a.m in R for a in run2000.actions)
    assert len(run2000.actions) == 24  # frozen from the default run


def test_inserted_elements_sit_between(run2000):
    L = avoidsucc.as_order(run2000)
    for a in run2000.actions:
        target = run2000.machine.eval(a.e, a.n, 10**5).value
        assert L.less(a.n, a.m) and L.less(a.m, target)


def test_planted_successor_is_defeated(run2000):
    # slot 0 computes n + 1; wherever the claim applies, something sits between
    r = avoidsucc.star_check(run2000, cohesive.CohesiveView.from_members([], 300), [0], range(301), 10**4)
    assert r["counts"]["violation"] == 0
    acted = {a.n for a in run2000.actions if a.e == 0}
    for row in r["rows"]:
        if row["outcome"] == "clean" and row["reason"] == "element between":
            assert row["n"] in acted


def test_star_check_skips_and_vacuous(run2000, R):
    view = cohesive.CohesiveView.from_members([], 200)
    r = avoidsucc.star_check(run2000, view, [5], range(201), 10**4)
    assert r["counts"]["vacuous"] + r["counts"]["skipped"] == len(r["rows"])
    skipped = {row["n"] for row in r["rows"] if row["reason"] == "n in R"}
    assert skipped == {n for n in range(201) if n in R}


def test_determinism(R):
    a = avoidsucc.run_construction(2000, R).action_log_jsonl()
    b = avoidsucc.run_construction(2000, R).action_log_jsonl()
    assert a == b
    assert a.splitlines()[0].startswith('{"stage": ')


def test_insertion_stability(R):
    rng = random.Random(11)
    st = Construction(R, cap=2000)
    snaps = []
    for s in sorted(rng.sample(range(5, 2000), 25)):
        st.advance_to(s)
        xs = [rng.randint(0, s) for _ in range(4)]
        snaps.append([(x, y, st.less(x, y)) for x in xs for y in xs if x != y])
    st.advance_to(2000)
    assert all(st.less(x, y) == v for snap in snaps for x, y, v in snap)


def test_pred_counts_settle(run2000):
    last = run2000.below_changed
    assert all(last.get(k) is None or last[k] < 1500 for k in range(51))
    L = avoidsucc.stage_order(run2000)
    for k in range(0, 51, 5):
        direct = sum(1 for y in run2000.lab if L.less(y, k))
        assert run2000.pred_count(k) == direct


def test_axioms(run2000):
    L = avoidsucc.as_order(run2000)
    assert orders.axioms_check(L, range(151))["ok"]


def test_as_order_advances():
    st = Construction(ArithmeticR(3, 2), cap=50)
    L = avoidsucc.as_order(st)
    assert L.less(0, 30) or L.less(30, 0)
    assert st.stage >= 30


def test_extended_R(approx):
    base = cohesive.extract_R(approx)
    ext = ExtendedR(base)
    assert all((x in ext) == (x in base) for x in range(base.decided_below + 1))
    above = [x for x in range(base.decided_below + 1, base.decided_below + 40) if x in ext]
    assert above and all(x % 3 == 2 for x in above)
    it = iter(ext)
    first = [next(it) for _ in range(len(base) + 3)]
    assert first[:len(base)] == list(base.elements)


def test_R_exhausted():
    with pytest.raises(avoidsucc.RExhausted):
        avoidsucc.run_construction(200, AscendingR([]))


def test_required_stage():
    assert avoidsucc.required_stage(range(8), 500) == pcf.pair(7, 500) + 2


def test_between_psi():
    from cohpow import harness

    st, ctx = harness.lemma5_parts(harness.ExperimentConfig())
    ident = power.identity()
    for phi in (power.program(ctx, 0), power.program(ctx, 7)):
        psi = avoidsucc.between_psi(ctx, phi)
        assert power.less_c(ctx, ident, psi).value is True
        assert power.less_c(ctx, psi, phi).value is True
        for n in ctx.points()[:60]:
            m = psi.value(n, 10**5)
            v = phi.value(n, 10**5)
            # least code strictly between, checked by brute force over X
            between = [x for x in st.lab if st.less(n, x) and st.less(x, v)]
            assert m == (min(between) if between else None)
    with pytest.raises(ValueError):
        avoidsucc.between_psi(ctx, ident)


def test_stage_order_is_finite(run2000):
    L = avoidsucc.stage_order(run2000)
    assert L.in_domain(5) and not L.in_domain(10**9)
