from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from cohpow import pcf, power, structures
from cohpow.structures import f_code, f_pair, in_B, in_F, in_S

INF = float("inf")


def test_partition():
    assert all(in_S(n) + in_F(n) + in_B(n) == 1 for n in range(10_001))


def test_f_ranks_against_sorted_oracle():
    # Cantor order of (i/2, j/2) over stems i < j
    pairs = sorted(((a, b) for a in range(80) for b in range(a + 1, 80)), key=lambda p: pcf.pair(*p))
    for k, (a, b) in enumerate(pairs[:1000]):
        assert f_code(2 * a, 2 * b) == 4 * k + 1
        assert f_pair(4 * k + 1) == (2 * a, 2 * b)


@given(st.integers(min_value=0, max_value=10**6))
def test_f_pair_round_trip(k):
    x, y = f_pair(4 * k + 1)
    assert in_S(x) and in_S(y) and x < y
    assert f_code(x, y) == 4 * k + 1


def b_oracle(m, T):
    """Backward labels by brute force: rank eligible pairs by (stage, Cantor code)."""
    pairs = []
    for j in range(0, T + 1, 2):
        for i in range(0, j, 2):
            e = m.elig(j, i)
            if e <= T:
                pairs.append((e, pcf.pair(j, i), (j, i)))
    pairs.sort()
    return {p: 4 * k + 3 for k, (_, _, p) in enumerate(pairs)}


@pytest.mark.parametrize("modulus", [4, 8])
def test_b_ranks_against_oracle(modulus):
    m = structures.d_instance(modulus)
    T = 60
    want = b_oracle(m, T)
    for (j, i), z in want.items():
        assert m.b_code(j, i) == z
        assert m.b_pair(z) == (j, i)


def test_b_labels_do_not_depend_on_snapshot():
    early, late = structures.d_instance(stage=100), structures.d_instance(stage=400)
    for z in range(3, 4000, 4):
        assert early.b_pair(z) == late.b_pair(z)


def test_p_examples():
    m = structures.d_instance(stage=500)
    assert m.p_holds(0, f_code(0, 2), 2)
    assert not m.p_holds(2, f_code(0, 2), 0)
    # 2 enters A1 at stage 2; the arrow 6 -> 2 opens once 6 is reached
    assert m.p_holds(6, m.b_code(6, 2), 2, 6)
    assert not m.p_holds(6, m.b_code(6, 2), 2, 5)


def test_phi_examples():
    m = structures.d_instance(stage=500)
    assert m.phi_base(0, 4) is True and m.phi_base(4, 0) is False
    assert all(m.phi_base(2, y) is False for y in range(0, 200, 2) if y != 2)
    assert all(m.phi_base(y, 2) is False for y in range(0, 200, 2) if y != 2)


def test_theta_neighbours():
    m = structures.d_instance()
    for s in range(0, 20):
        ok, t = m.theta_base(4 * s)
        assert ok and t == 4 * s + 4
    assert m.theta_base(6, stage=500) == (False, None)


def test_arrows_follow_natural_order_on_d():
    m = structures.d_instance()
    D = range(0, 401, 4)
    for x in D:
        for y in D:
            if x != y:
                assert (m.arrow(x, y) is not None) == (x < y)
                assert m.phi_base(x, y) == (x < y)


def test_facts_on_d():
    r = structures.check_facts_1_to_4(structures.d_instance(), 200, 500)
    assert r["ok"], r["counts"]


def test_facts_on_empty_instance():
    r = structures.check_facts_1_to_4(structures.empty_instance(), 60, 100)
    assert r["ok"]


def test_corruption_is_caught():
    m = structures.d_instance()
    m.corrupt_b((6, 2), (10, 2))
    r = structures.check_facts_1_to_4(m, 40, 100)
    assert not r["ok"] and r["counts"]["1"] > 0


def test_facts_on_c(approx):
    m = structures.c_instance(approx)
    r = structures.check_facts_1_to_4(m, 200, m.stage)
    assert r["ok"], r["counts"]


def test_c_instance_unsettled_is_unknown(approx):
    m = structures.c_instance(approx)
    top = m.known_below
    assert m.in_A(top + 2) in (None, False)
    stems_above = [x for x in range(top + 2, top + 200, 2) if not m.in_A1(x)]
    assert stems_above and all(m.in_A(x) is None for x in stems_above)


def test_iso_d_to_e():
    r = structures.iso_MD_ME(structures.d_instance(4), structures.d_instance(8), 200)
    assert r["ok"] and r["pairs_checked"] > 0
    assert r["sigma_sample"]["4"] == 8
    same = structures.iso_MD_ME(structures.d_instance(4), structures.d_instance(4), 100)
    assert same["ok"] and all(int(k) == v for k, v in same["sigma_sample"].items())


def test_iso_needs_decidable(approx):
    with pytest.raises(ValueError):
        structures.iso_MD_ME(structures.d_instance(), structures.c_instance(approx), 50)


def test_d_instance_rejects_bad_modulus():
    with pytest.raises(ValueError):
        structures.d_instance(3)


@pytest.fixture(scope="module")
def doubled(view):
    return view.doubled()


def test_psi_d(doubled, horizon):
    ctx = power.make_context(structures.d_instance(), doubled, horizon)
    ident = power.identity()
    els = [power.constant(12), power.pointwise("4id", lambda x: 4 * x, ident), ident]
    r = structures.psi_experiments(ctx, els, "d")
    rows = {p["element"]: p for p in r["fact8"]}
    assert rows["const:12"]["phi"] == "true"
    assert rows["4id"]["phi"] == "true"
    assert r["psi"]["fails_evidence"]


def test_psi_c(doubled, horizon, approx):
    from cohpow import harness
    ctx = power.make_context(structures.c_instance(approx), doubled, horizon)
    els = harness.ma_elements(doubled, ctx)
    assert len(els) >= 20
    r = structures.psi_experiments(ctx, els, "c")
    assert r["psi"]["holds_evidence"] and r["psi"]["tested_against_id"] >= 20
    lerman = {row["element"]: row for row in r["lerman"]}
    assert lerman["id"]["agrees_with_identity_on_tail"]


def test_phi_power_constants(doubled, horizon):
    ctx = power.make_context(structures.d_instance(), doubled, horizon)
    assert structures.phi_power(ctx, power.constant(0), power.constant(4)).value is True
    assert structures.phi_power(ctx, power.constant(4), power.constant(0)).value is False
    assert structures.theta_power(ctx, power.constant(8)).value is True
    assert structures.theta_power(ctx, power.constant(6)).value is False
