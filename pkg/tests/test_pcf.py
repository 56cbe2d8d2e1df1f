from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from cohpow import pcf

nat = st.integers(min_value=0, max_value=10**6)


def test_pair_examples():
    assert pcf.pair(0, 0) == 0
    assert pcf.pair(1, 2) == 7
    assert pcf.unpair(7) == (1, 2)


def test_unpair_matches_brute_scan():
    # invert by scanning m + n <= k
    for k in range(300):
        hits = [(m, d - m) for d in range(k + 1) for m in range(d + 1) if pcf.pair(m, d - m) == k]
        assert hits == [pcf.unpair(k)]


@given(nat, nat)
def test_pair_round_trip(m, n):
    k = pcf.pair(m, n)
    assert pcf.unpair(k) == (m, n)
    assert (pcf.proj1(k), pcf.proj2(k)) == (m, n)


@given(st.integers(min_value=0, max_value=10**12))
def test_unpair_round_trip(k):
    assert pcf.pair(*pcf.unpair(k)) == k


@given(st.integers(min_value=0, max_value=10**5))
def test_decode_total_and_stable(e):
    p = pcf.decode(e)
    assert isinstance(p, pcf.Program)
    assert pcf.decode(pcf.encode(p)) == p


def test_encode_decode_text_program():
    p = pcf.parse_program("""
        loop: DJZ 0 done
        INC 1
        INC 1
        DJZ 2 loop
        done: CPY 1 0
        HALT
    """)
    assert pcf.decode(pcf.encode(p)) == p
    assert pcf.run(pcf.encode(p), 7, 1000).value == 14


def test_parse_program_errors():
    with pytest.raises(ValueError):
        pcf.parse_program("JMP 3")
    with pytest.raises(ValueError):
        pcf.parse_program("DJZ 0 nowhere")


def test_eval_examples():
    assert pcf.eval(pcf.build_identity(), 17, 1000).value == 17
    assert not pcf.eval(pcf.build_diverging(), 3, 10**6).converged
    assert pcf.eval(pcf.build_constant(5), 0, 1000).value == 5


def test_builders():
    assert pcf.eval(pcf.build_constant(3), 99, 10**4).value == 3
    assert pcf.eval(pcf.build_compose(pcf.build_constant(3), pcf.build_identity()), 5, 10**4).value == 3
    succ = pcf.build_successor()
    assert pcf.eval(pcf.build_compose(succ, succ), 4, 10**4).value == 6
    assert pcf.eval(pcf.build_double(), 21, 10**4).value == 42
    assert pcf.eval(pcf.build_add(3), 4, 10**4).value == 7


def test_compose_propagates_divergence():
    e = pcf.build_compose(pcf.build_identity(), pcf.build_diverging())
    assert not pcf.eval(e, 2, 10**5).converged


def test_enumerate_ce_examples():
    assert pcf.enumerate_ce(pcf.build_identity(), 5) == frozenset(range(6))
    assert pcf.enumerate_ce(pcf.build_diverging(), 100) == frozenset()
    # one step per instruction: deciding parity of n takes about 2n steps, so
    # the full set of even inputs up to 10 shows once the budget allows it
    assert pcf.enumerate_ce(pcf.build_halt_iff_even(), 10) <= frozenset({0, 2, 4, 6, 8, 10})
    evens = pcf.enumerate_ce(pcf.build_halt_iff_even(), 200)
    assert {x for x in evens if x <= 10} == {0, 2, 4, 6, 8, 10}


def test_threshold_builders():
    ge, lt, mod = pcf.build_halt_if_ge(10), pcf.build_halt_if_lt(40), pcf.build_halt_if_mod(3, [1])
    for n in range(60):
        assert pcf.eval(ge, n, 10**4).converged == (n >= 10)
        assert pcf.eval(lt, n, 10**4).converged == (n < 40)
        assert pcf.eval(mod, n, 10**4).converged == (n % 3 == 1)


def test_monotone_in_budget():
    rng = random.Random(5)
    for _ in range(500):
        e, n = rng.randrange(200), rng.randrange(50)
        s = rng.randrange(1, 5000)
        s2 = rng.randrange(s, 10**4 + 1)
        a = pcf.eval(e, n, s)
        if a.converged:
            assert pcf.eval(e, n, s2).value == a.value


def test_composition_law():
    rng = random.Random(9)
    templates = [pcf.build_identity(), pcf.build_successor(), pcf.build_double(), pcf.build_add(2),
                 pcf.build_constant(4), pcf.build_halt_iff_even(), pcf.build_diverging()]
    for _ in range(100):
        g, f = rng.choice(templates), rng.choice(templates)
        n = rng.randrange(30)
        inner = pcf.eval(f, n, 10**4)
        whole = pcf.eval(pcf.build_compose(g, f), n, 10**5)
        if inner.converged:
            outer = pcf.eval(g, inner.value, 10**4)
            if outer.converged and whole.converged:
                assert whole.value == outer.value
        else:
            assert not whole.converged


def test_machine_slots():
    m = pcf.DEFAULT
    assert m.eval(0, 4, 1000).value == 5
    assert m.eval(4, 9, 1000).value == 9
    assert not m.eval(5, 1, 10**4).converged
    assert m.eval(7, 6, 1000).value == 12
    assert m.ce(2, 30) == frozenset(range(10, 31))
    # past the slots, the raw numbering resumes
    k = len(pcf.default_slots())
    assert m.index(k) == 0 and m.index(k + 5) == 5


@settings(max_examples=50)
@given(st.integers(min_value=0, max_value=400), st.integers(min_value=0, max_value=50))
def test_ce_monotone(e, s):
    assert pcf.enumerate_ce(e, s) <= pcf.enumerate_ce(e, s + 25)
