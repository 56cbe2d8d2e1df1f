from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from cohpow import cohesive, pcf
from cohpow.cohesive import AscendingR, ArithmeticR, CohesiveView, Horizon, Verdict


def test_one_stage():
    a = cohesive.build_maximal(1)
    assert a.markers[0] == 0
    assert a.members == frozenset()


def test_marker_count_and_disjointness():
    a = cohesive.build_maximal(200)
    assert len(a.markers) >= 200
    assert list(a.markers) == sorted(set(a.markers))
    assert not set(a.markers) & a.members


def test_evens_state_switches_once():
    # W_0 = evens: marker bits read 1...1 0...0 at most, never interleaved
    evens = pcf.build_halt_iff_even()
    a = cohesive.build_maximal(200, pcf.Machine((evens,)))
    bits = [pcf.eval(evens, x, 200).converged for x in a.markers]
    changes = sum(1 for u, v in zip(bits, bits[1:]) if u != v)
    assert changes <= 1
    assert bits[0]


def test_monotone_members(approx):
    prev = frozenset()
    for s in range(0, approx.stage + 1, 50):
        cur = approx.members_at(s)
        assert prev <= cur
        prev = cur
    assert approx.members_at(approx.stage) == approx.members


def test_marker_stability(approx):
    last = approx.last_moves(10)
    quiet_from = approx.stage - approx.stage // 4
    assert all(m is None or m < quiet_from for m in last[:6])


def test_frozen_shape_of_default_c(approx, view):
    # frozen from the 2000-stage run: settled window 1000, 172 included points,
    # tail congruent to 4 mod 6
    assert view.window_bound == 1000
    assert len(view.included) == 172
    assert all(x % 6 == 4 for x in view.included[-50:])
    assert view.doubled().window_bound == 2001


@pytest.mark.parametrize("n", [0, 10, 137, 1000])
def test_view_partition(approx, n):
    v = approx.view(n)
    assert set(v.included) | v.excluded == set(range(n + 1))
    assert not set(v.included) & v.excluded


def test_view_rejects_bad_partition():
    with pytest.raises(ValueError):
        CohesiveView(3, frozenset({0, 1}), (1, 2, 3))


def test_almost_inclusion_examples(view, horizon):
    assert cohesive.almost_inclusion(lambda x: x >= 0, view, horizon).value is True
    assert cohesive.almost_inclusion(lambda x: x < 5, view, horizon).value is False
    v500 = cohesive.settled_view(cohesive.build_maximal(500), horizon)
    assert cohesive.almost_inclusion(lambda x: x % 2 == 0, v500, horizon).value is not None


def test_unknown_on_alternation(view, horizon):
    inc = view.included
    alt = {x for i, x in enumerate(inc) if i % 2}
    assert cohesive.almost_inclusion(lambda x: x in alt, view, horizon).value is None


def test_verdict_is_not_a_bool(horizon):
    with pytest.raises(TypeError):
        bool(Verdict(True, horizon))


def test_horizon_invariants():
    with pytest.raises(ValueError):
        Horizon(tail_window=0)
    with pytest.raises(ValueError):
        Horizon(window_bound=10, cut=11)


def test_extract_R_examples():
    assert AscendingR([5, 3, 9, 7, 12]).elements == (5, 9, 12)
    assert AscendingR(range(6)).elements == tuple(range(6))
    assert AscendingR([]).elements == ()


def test_extract_R_from_run(approx):
    R = cohesive.extract_R(approx)
    assert set(R.elements) <= approx.members
    order = [x for x, _ in approx.enumeration]
    # oracle: a member is a record iff it beats everything before it
    records = [x for i, x in enumerate(order) if all(x > y for y in order[:i])]
    assert list(R.elements) == records


def test_arithmetic_R():
    R = ArithmeticR(3, 2)
    assert [x for x in range(12) if x in R] == [2, 5, 8, 11]


def test_cohesiveness_examples():
    a = cohesive.build_maximal(500)
    rows = {r["e"]: r for r in cohesive.cohesiveness_report(a, 9, Horizon())}
    assert rows[5]["complement"]["verdict"] == "true"      # diverging: W empty
    assert rows[4]["inclusion"]["verdict"] == "true"       # identity: W everything
    sides = (rows[1]["inclusion"]["verdict"], rows[1]["complement"]["verdict"])
    assert sorted(sides) == ["false", "true"]              # evens: exactly one side
    assert not any(r["split"] for r in rows.values())
    assert rows[1]["inclusion"]["horizon"]["window_bound"] == 250


def test_no_split_on_first_16(approx, horizon):
    rows = cohesive.cohesiveness_report(approx, 16, horizon)
    assert not [r["e"] for r in rows if r["split"]]


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=2, max_value=12), st.integers(min_value=0, max_value=11),
       st.integers(min_value=1, max_value=40))
def test_tail_soundness(view, horizon, m, r, w2):
    pred = lambda x: x % m != r % m  # noqa: E731
    v = cohesive.almost_inclusion(pred, view, horizon)
    n_tail = len(view.tail(horizon))
    if v.value is True and w2 <= n_tail:
        v2 = cohesive.almost_inclusion(pred, view, cohesive.with_horizon(horizon, tail_window=w2))
        assert v2.value is not False


def test_marker_table(approx):
    rows = cohesive.marker_table(approx, 5)
    assert [r["marker"] for r in rows] == list(range(5))
    assert rows[0]["position"] == approx.markers[0]
