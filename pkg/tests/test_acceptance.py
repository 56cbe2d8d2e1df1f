"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

from __future__ import annotations

import random
import time

import pytest

from cohpow import cohesive, harness, orders, pcf, power

CFG = harness.ExperimentConfig()


def _line(capsys, n: int, title: str, ok: bool, note: str = "") -> None:
    with capsys.disabled():
        print(f"\n[acceptance {n}] {'PASS' if ok else 'FAIL'}  {title}  {note}".rstrip())


def _checks(report: dict) -> dict[str, dict]:
    return {c["name"]: c for c in report["checks"]}


@pytest.fixture(scope="module")
def reports():
    t = time.perf_counter()
    first = {name: harness.run_experiment(name, CFG) for name in harness.EXPERIMENTS}
    elapsed = time.perf_counter() - t
    return first, elapsed


def test_1_pairing_and_numbering(capsys):
    t = time.perf_counter()
    bad_pair = sum(1 for k in range(10**5 + 1) if pcf.pair(*pcf.unpair(k)) != k)
    bad_decode = 0
    for e in range(10**4):
        try:
            pcf.decode(e)
        except Exception:
            bad_decode += 1
    secs = time.perf_counter() - t
    ok = bad_pair == 0 and bad_decode == 0 and secs < 5
    _line(capsys, 1, "pairing round trip and decode totality", ok,
          f"({bad_pair} pair, {bad_decode} decode failures, {secs:.2f}s)")
    assert ok


def test_2_maximal_construction(capsys):
    t = time.perf_counter()
    approx = cohesive.build_maximal(2000)
    secs = time.perf_counter() - t
    stages = [s for _, s in approx.enumeration]
    monotone = stages == sorted(stages) and len(set(x for x, _ in approx.enumeration)) == len(stages)
    monotone &= all(approx.members_at(s) <= approx.members_at(s + 100) for s in range(0, 2000, 100))
    last = approx.last_moves(6)
    quiet = all(m is None or m < 1500 for m in last)
    rows = cohesive.cohesiveness_report(approx, 16, CFG.horizon)
    split = [r["e"] for r in rows if r["split"]]
    ok = secs < 60 and monotone and quiet and not split
    _line(capsys, 2, "maximal-set construction", ok,
          f"({secs:.1f}s, last moves of markers 0-5 {last}, split sets {split})")
    assert ok


AXIOM_ORDERS = ("nat", "int", "rat", "nqz", "thm4:toy", "lemma5")


def test_3_order_axioms(capsys):
    orders_ = {n: orders.get_order(n) for n in AXIOM_ORDERS}
    orders_["lemma5"].less(0, 1)  # build the default construction outside the timed region
    t = time.perf_counter()
    bad = {}
    for name, L in orders_.items():
        sample = L.domain_upto(100)
        ex = orders.axioms_check(L, sample)
        rnd = orders.random_triples_check(L, 10**4, 1000, seed=CFG.seed)
        if not (ex["ok"] and rnd["ok"]):
            bad[name] = (ex["violation"], rnd["violation"])
    secs = time.perf_counter() - t
    ok = not bad and secs < 30
    _line(capsys, 3, "linear-order axioms", ok, f"({len(orders_)} orders, {secs:.1f}s, violations {bad})")
    assert ok


def _suite(capsys, n: int, title: str, report: dict, required: list[str] | None = None):
    checks = _checks(report)
    missing = [r for r in (required or []) if r not in checks]
    not_passing = {c["name"]: c["status"] for c in report["checks"] if c["status"] != "pass"}
    ok = not missing and not not_passing
    _line(capsys, n, title, ok, f"({len(checks)} checks, missing {missing}, not passing {not_passing})")
    assert ok


def test_4_step_construction_suite(capsys, reports):
    _suite(capsys, 4, "two-step order exact suite", reports[0]["thm4"], [
        "evens compare naturally up to 400",
        "successor of 2a differs from 2a+2 exactly on the range of f",
        "successor: nothing scanned strictly between",
        "midpoint: even and strictly between",
        "far apart: 0 and 2id",
        "far apart: 0 and 2",
    ])


def test_5_embedding_exactness(capsys):
    rng = random.Random(CFG.seed)
    t = time.perf_counter()
    bad = {}
    for name in orders.ORDER_NAMES:
        L = orders.get_order(name)
        ctx = harness.context(CFG, L)
        sample = L.first_elements(200)
        emb = [power.canonical_embed(ctx, a) for a in sample]
        wrong = 0
        for i in range(len(sample)):
            for j in range(i + 1, len(sample)):
                v = power.less_c(ctx, emb[i], emb[j]).value
                wrong += v is None or v != L.less(sample[i], sample[j])
        for i in rng.sample(range(len(sample)), 20):
            wrong += power.eq_c(ctx, emb[i], emb[i]).value is not True
        if wrong:
            bad[name] = wrong
    secs = time.perf_counter() - t
    ok = not bad
    _line(capsys, 5, "canonical embedding decides and matches the base", ok,
          f"({len(orders.ORDER_NAMES)} orders x 200 elements, {secs:.1f}s, mismatches {bad})")
    assert ok


def test_6_ternary_structure_suite(capsys, reports):
    _suite(capsys, 6, "ternary-relation structure suite", reports[0]["ma"], [
        "arrow invariants on the D-instance, bound 200, stage 500",
        "D = {4s} to E = {8s} carries P",
        "D-instance: every Theta-element has a Phi-greater one",
        "C-instance: nothing tested is Phi-above [id]",
    ])


def test_7_successor_avoiding_suite(capsys, reports):
    _suite(capsys, 7, "successor-avoiding construction suite", reports[0]["lemma5"], [
        "two runs give the same action log",
        "comparisons never change once made",
        "elements below each k <= 50 settle before the last quarter",
        "no program e < 8 names a successor on C up to 500",
        "every tested element above [id] has one strictly between",
    ])


def test_8_transfer_corpus(capsys, reports):
    rep = reports[0]["ftcp"]
    gap = _checks(rep).get("lemma5 power: [id] has no successor among tested elements", {})
    witness = (gap.get("detail") or {}).get("gaps")
    _suite(capsys, 8, "transfer corpus and the successor sentence", rep, [
        "BC1 formulas agree between the base and the power",
        "two-block sentences agree between the base and the power",
        "lemma5 base: every element up to 50 has a successor",
        "lemma5 power: [id] has no successor among tested elements",
    ])
    assert witness


def test_9_end_to_end(capsys, reports):
    first, elapsed = reports
    again = {name: harness.run_experiment(name, CFG) for name in harness.EXPERIMENTS}
    schema = {n: harness.validate_report(r) for n, r in first.items() if harness.validate_report(r)}
    unstable = [n for n in first if harness.strip_timing(first[n]) != harness.strip_timing(again[n])]
    ok = elapsed < 600 and not schema and not unstable
    _line(capsys, 9, "all experiments end to end", ok,
          f"({elapsed:.1f}s, schema errors {schema}, unstable {unstable})")
    assert ok
