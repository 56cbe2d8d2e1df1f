"""The structures M_A = <omega; P> with a single ternary relation.

Even numbers S are stem elements, F = {4s+1} forward witnesses and
B = {4s+3} backward witnesses.  Every pair i < j of stems gets a forward
arrow i -> j labelled f(i, j).  Once a stem enters the c.e. set A1 = S - A,
the pairs it belongs to also get backward arrows, labelled by b.  Phi(x, y)
(an arrow x -> y and none back) then orders exactly the stems of A.

A pair (j, i), i < j, becomes eligible for a backward arrow at stage
max(j, min(stage(i), stage(j))), where stage(x) is when x enters A1.  Pairs
are ranked by (eligibility stage, Cantor code); the k-th gets 4k+3.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from math import isqrt
from typing import Callable, Optional

from . import formulas as fm
from . import pcf
from .cohesive import Horizon, MaximalSetApprox, Verdict, almost_inclusion

INF = float("inf")


def in_S(x: int) -> bool:
    return x % 2 == 0


def in_F(x: int) -> bool:
    return x % 4 == 1


def in_B(x: int) -> bool:
    return x % 4 == 3


def _fwd_rank(a: int, b: int) -> int:
    """Rank of (a, b), a < b, in Cantor order among such pairs."""
    d = a + b
    return d * d // 4 + a


def _fwd_unrank(k: int) -> tuple[int, int]:
    d = 2 * isqrt(k)
    while (d + 1) * (d + 1) // 4 <= k:
        d += 1
    while d * d // 4 > k:
        d -= 1
    a = k - d * d // 4
    return a, d - a


def f_code(x: int, y: int) -> int:
    if not (in_S(x) and in_S(y) and x < y):
        raise ValueError("f is defined on stems x < y")
    return 4 * _fwd_rank(x // 2, y // 2) + 1


def f_pair(z: int) -> tuple[int, int]:
    if not in_F(z):
        raise ValueError(f"{z} is not a forward witness")
    a, b = _fwd_unrank((z - 1) // 4)
    return 2 * a, 2 * b


class MAStructure:
    """M_A given the stage at which each stem enters A1.

    ``a1_stage(x)`` returns that stage or None.  ``stage`` is the snapshot
    every query defaults to; None means the enumeration is known outright
    (a decidable A) and queries are exact.
    """

    def __init__(self, a1_stage: Callable[[int], Optional[int]], stage: Optional[int], name: str,
                 a_decider: Optional[Callable[[int], bool]] = None, known_below: Optional[int] = None):
        self.name = name
        # stems above known_below may still enter A1 later than we can see
        self.known_below = known_below
        self._st = a1_stage
        self.stage = stage
        self.a_decider = a_decider
        self._active = [0]  # _active[t] = #{x in S, x <= t : stage(x) <= t}
        self._enter: dict[int, int] = {}
        self._by_stage: dict[int, list[int]] = {}
        self._grown = -1
        self._new_cache: dict[int, list[tuple[int, int]]] = {}
        self._b_override: dict[tuple[int, int], int] = {}

    # -- A and A1 ----------------------------------------------------------

    def st(self, x: int) -> float:
        if not in_S(x):
            return INF
        s = self._st(x)
        return INF if s is None else s

    def in_A1(self, x: int, stage: Optional[int] = None) -> bool:
        s = self.st(x)
        return in_S(x) and s != INF and s <= self._stage(stage)

    def in_A(self, x: int, stage: Optional[int] = None) -> Optional[bool]:
        if not in_S(x):
            return False
        if self.in_A1(x, stage):
            return False
        return None if self._unsettled(x) else True

    def _unsettled(self, x: int) -> bool:
        return self.known_below is not None and x > self.known_below

    def _stage(self, stage):
        if stage is not None:
            return stage
        return INF if self.stage is None else self.stage

    # -- eligibility and ranks ---------------------------------------------

    def elig(self, j: int, i: int) -> float:
        return max(j, min(self.st(i), self.st(j)))

    def _grow(self, t: int):
        while self._grown < t:
            u = self._grown = self._grown + 1
            if in_S(u):
                s = self.st(u)
                if s != INF:
                    self._enter[max(u, int(s))] = self._enter.get(max(u, int(s)), 0) + 1
                    self._by_stage.setdefault(int(s), []).append(u)
            # every x entering at stage u has x <= u, so it has been seen
            prev = self._active[-1] if u > 0 else 0
            if u == 0:
                self._active[0] = self._enter.get(0, 0)
            else:
                self._active.append(prev + self._enter.get(u, 0))

    def count_upto(self, t: int) -> int:
        """Number of eligible pairs with eligibility stage <= t."""
        if t < 0:
            return 0
        self._grow(t)
        e = t // 2 + 1
        a = self._active[t]
        return e * (e - 1) // 2 - (e - a) * (e - a - 1) // 2

    def new_pairs(self, t: int) -> list[tuple[int, int]]:
        """Pairs (j, i) with eligibility stage exactly t, in Cantor order."""
        if t in self._new_cache:
            return self._new_cache[t]
        self._grow(t)
        out = set()
        if in_S(t):
            if self.st(t) <= t:
                out.update((t, i) for i in range(0, t, 2))
            else:
                out.update((t, i) for i in range(0, t, 2) if self.st(i) <= t)
        for k in self._by_stage.get(t, ()):
            for p in range(0, t, 2):
                if p != k and k < t and self.st(p) >= t:
                    out.add((max(k, p), min(k, p)))
        res = sorted(out, key=lambda ji: pcf.pair(*ji))
        self._new_cache[t] = res
        return res

    def b_code(self, j: int, i: int) -> Optional[int]:
        """Label of the backward arrow j -> i (i < j), None if never eligible."""
        if (j, i) in self._b_override:
            return self._b_override[(j, i)]
        if not (in_S(i) and in_S(j) and i < j):
            return None
        t = self.elig(j, i)
        if t == INF:
            return None
        t = int(t)
        rank = self.count_upto(t - 1) + self.new_pairs(t).index((j, i))
        return 4 * rank + 3

    def b_pair(self, z: int) -> Optional[tuple[int, int]]:
        if not in_B(z):
            return None
        k = (z - 3) // 4
        hi = max(4, self._grown)
        limit = 4 * (self.stage or 0) + 8 * isqrt(8 * k + 8) + 64
        while self.count_upto(hi) <= k:
            if hi > limit:
                return None
            hi *= 2
        lo = 0
        while lo < hi:
            mid = (lo + hi) // 2
            if self.count_upto(mid) > k:
                hi = mid
            else:
                lo = mid + 1
        return self.new_pairs(lo)[k - self.count_upto(lo - 1)]

    def corrupt_b(self, pair_from: tuple[int, int], pair_to: tuple[int, int]):
        """Give pair_to the same backward label as pair_from (checker sanity)."""
        self._b_override[pair_to] = self.b_code(*pair_from)

    # -- the relation ------------------------------------------------------

    def _back_open(self, x: int, y: int, stage) -> bool:
        e = self.elig(x, y)
        return e != INF and e <= self._stage(stage)

    def p_holds(self, x: int, z: int, y: int, stage: Optional[int] = None) -> Optional[bool]:
        """P at the snapshot; None for a backward triple between stems that
        are not settled yet (only possible when ``known_below`` is set)."""
        if not (in_S(x) and in_S(y)):
            return False
        if x < y:
            return in_F(z) and z == f_code(x, y)
        if x > y and in_B(z):
            if not self._back_open(x, y, stage):
                return None if self._unsettled(x) else False
            return self.b_code(x, y) == z
        return False

    def arrow(self, x: int, y: int, stage: Optional[int] = None) -> Optional[int]:
        """The unique w with P(x, w, y) at the snapshot, or None."""
        if not (in_S(x) and in_S(y)) or x == y:
            return None
        if x < y:
            return f_code(x, y)
        if not self._back_open(x, y, stage):
            return None
        return self.b_code(x, y)

    def arrow_known(self, x: int, y: int, stage: Optional[int] = None) -> bool:
        """Whether the presence of an arrow x -> y is settled."""
        return x < y or self.arrow(x, y, stage) is not None or not self._unsettled(max(x, y))

    def phi_base(self, x: int, y: int, stage: Optional[int] = None) -> Optional[bool]:
        there = self.arrow(x, y, stage) is not None
        back = self.arrow(y, x, stage) is not None
        if there and not back:
            return None if not (self.arrow_known(x, y, stage) and self.arrow_known(y, x, stage)) else True
        if not self.arrow_known(x, y, stage) or not self.arrow_known(y, x, stage):
            return None
        return False

    def theta_base(self, x: int, stage: Optional[int] = None, t_bound: int = 200) -> tuple[bool, Optional[int]]:
        # look upward first, then downward
        x2 = x - x % 2
        for t in [*range(x2 + 2, x2 + t_bound + 1, 2), *range(x2 - 2, -1, -2)]:
            if self.phi_base(x, t, stage) is True or self.phi_base(t, x, stage) is True:
                return True, t
        return False, None

    # formulas hooks
    def less(self, x, y):
        raise TypeError("M_A has no order symbol; use P")

    def quantifier_domain(self, q, env, ev):
        body = q.body
        if q.kind == "E" and isinstance(body, fm.Atom) and body.rel == "P":
            a, w, b = body.args
            if isinstance(w, fm.Var) and w.name == q.var and all(
                    not (isinstance(t, fm.Var) and t.name == q.var) for t in (a, b)):
                x, y = ev.term(a, env), ev.term(b, env)
                z = self.arrow(x, y)
                return ([z] if z is not None else []), self.arrow_known(x, y)
        return None

    # -- the generative description ----------------------------------------

    def arrow_log(self, bound: int, stage: Optional[int] = None) -> set[tuple[int, int, int]]:
        """Arrows among stems <= bound, replayed as described: forward
        arrows first, then for each k entering A1 the arrows k -> i (i < k)
        and j -> k (j > k), each appearing once its larger end is reached."""
        s = self._stage(stage)
        log = set()
        for i in range(0, bound + 1, 2):
            for j in range(i + 2, bound + 1, 2):
                log.add((i, f_code(i, j), j))
        entered = sorted((self.st(k), k) for k in range(0, bound + 1, 2) if self.st(k) <= s)
        for _, k in entered:
            for i in range(0, k, 2):
                if max(k, self.st(k)) <= s:
                    log.add((k, self.b_code(k, i), i))
            for j in range(k + 2, bound + 1, 2):
                if j <= s:
                    log.add((j, self.b_code(j, k), k))
        return log


# --------------------------------------------------------------------------
# instances
# --------------------------------------------------------------------------

def d_instance(modulus: int = 4, stage: Optional[int] = None) -> MAStructure:
    """A = {modulus * s}; every other stem x enters A1 at stage x."""
    if modulus % 2 or modulus < 4:
        raise ValueError("modulus must be even and >= 4")

    def st(x: int) -> Optional[int]:
        return x if x % modulus else None

    return MAStructure(st, stage, f"D{modulus}", a_decider=lambda x: in_S(x) and x % modulus == 0)


def empty_instance() -> MAStructure:
    return MAStructure(lambda x: None, None, "A=S", a_decider=in_S)


def c_instance(approx: MaximalSetApprox, stage: Optional[int] = None) -> MAStructure:
    """A = {2s : s in C}; 2s enters A1 when s enters the maximal set."""
    ms = approx.member_stage

    def st(x: int) -> Optional[int]:
        return ms.get(x // 2)

    return MAStructure(st, 2 * approx.stage if stage is None else stage, "C",
                       known_below=2 * (approx.stage // 2))


# --------------------------------------------------------------------------
# arrow invariants: unique labels, excluded stems, stems in A, decision rule
# --------------------------------------------------------------------------

def check_facts_1_to_4(m: MAStructure, bound: int, stage: int) -> dict:
    viol = {"1": [], "2": [], "3": [], "4": []}
    stems = list(range(0, bound + 1, 2))

    # (1) brute force: each w <= bound labels at most one pair
    for z in range(bound + 1):
        hits = [(x, y) for x in stems for y in stems if m.p_holds(x, z, y, stage)]
        if len(hits) > 1:
            viol["1"].append({"w": z, "pairs": hits})
    # labels above the bound: collisions among the arrows of stems <= bound
    seen: dict[int, tuple[int, int]] = {}
    for x in stems:
        for y in stems:
            w = m.arrow(x, y, stage)
            if w is None:
                continue
            if w in seen and seen[w] != (x, y):
                viol["1"].append({"w": w, "pairs": [seen[w], (x, y)]})
            seen[w] = (x, y)

    # (2) excluded x: exactly one arrow each way to every other stem
    for x in stems:
        if not m.in_A1(x, stage):
            continue
        for y in stems:
            if y == x:
                continue
            for a, b in ((x, y), (y, x)):
                w = m.arrow(a, b, stage)
                if w is None or not m.p_holds(a, w, b, stage):
                    viol["2"].append({"x": a, "y": b, "why": "missing"})

    # (3) on A: x < y iff an arrow x -> y
    inA = [x for x in stems if m.in_A(x, stage) is True]
    for x in inA:
        for y in inA:
            if x != y and (x < y) != (m.arrow(x, y, stage) is not None):
                viol["3"].append({"x": x, "y": y})

    # (4) decision rule agrees with the generative arrow log
    log = m.arrow_log(bound, stage)
    for x, w, y in log:
        if not m.p_holds(x, w, y, stage):
            viol["4"].append({"triple": (x, w, y), "why": "logged but P fails"})
    for x in stems:
        for y in stems:
            w = m.arrow(x, y, stage)
            if w is not None and (x, w, y) not in log:
                viol["4"].append({"triple": (x, w, y), "why": "P holds but not logged"})

    return {
        "instance": m.name, "bound": bound, "stage": stage,
        "violations": {k: v[:20] for k, v in viol.items()},
        "counts": {k: len(v) for k, v in viol.items()},
        "ok": not any(viol.values()),
    }


# --------------------------------------------------------------------------
# transport between two decidable instances
# --------------------------------------------------------------------------

def iso_MD_ME(mD: MAStructure, mE: MAStructure, bound: int) -> dict:
    """Map the stems of M_D up to ``bound`` into M_E and carry the arrows.

    D-stems go to E-stems in increasing order, excluded stems to excluded
    stems in order of size, and each arrow label to the label of the image
    arrow.  P is then compared on every triple formed by mapped stems and
    their arrow labels.
    """
    if mD.a_decider is None or mE.a_decider is None:
        raise ValueError("both instances need a decidable A")
    stems = list(range(0, bound + 1, 2))
    d_in = [x for x in stems if mD.a_decider(x)]
    d_out = [x for x in stems if not mD.a_decider(x)]

    def first(pred, k):
        out, x = [], 0
        while len(out) < k:
            if pred(x):
                out.append(x)
            x += 2
        return out

    e_in = first(mE.a_decider, len(d_in))
    e_out = first(lambda x: not mE.a_decider(x), len(d_out))
    sigma = dict(zip(d_in, e_in)) | dict(zip(d_out, e_out))

    tau: dict[int, int] = {}
    unclosed, bad = [], []
    checked = 0
    for x in stems:
        for y in stems:
            if x == y:
                continue
            w = mD.arrow(x, y)
            w2 = mE.arrow(sigma[x], sigma[y])
            checked += 1
            if (w is None) != (w2 is None):
                bad.append({"x": x, "y": y, "w": w, "image": w2})
                continue
            if w is None:
                continue
            if w in tau and tau[w] != w2:
                bad.append({"w": w, "why": "label mapped twice"})
            tau[w] = w2
            if not (mD.p_holds(x, w, y) and mE.p_holds(sigma[x], w2, sigma[y])):
                unclosed.append({"x": x, "y": y, "w": w})
    if len(set(tau.values())) != len(tau):
        bad.append({"why": "label map not injective"})
    return {
        "stems": len(stems), "pairs_checked": checked, "labels_mapped": len(tau),
        "violations": bad[:20], "unclosed": unclosed[:20], "ok": not bad,
        "sigma_sample": {str(k): sigma[k] for k in stems[:10]},
    }


# --------------------------------------------------------------------------
# the power of M_A
# --------------------------------------------------------------------------

def phi_power(ctx, g, h) -> Verdict:
    """Phi([g], [h]) in the power, through the formula evaluator."""
    f = fm.parse(fm.phi_text("x", "y"))
    return fm.eval_power_bc1(ctx, f, {"x": g, "y": h}, complete=True)


def theta_power(ctx, g) -> Verdict:
    """[g] lies in the Theta-defined order iff g(C) is almost inside A."""
    m: MAStructure = ctx.base
    return almost_inclusion(
        lambda n: (lambda v: None if v is None else m.in_A(v))(g.value(n, ctx.budget)),
        ctx.view, ctx.horizon)


@dataclass
class ElementRow:
    name: str
    theta: str
    facts: dict = field(default_factory=dict)


def _tail_const(ctx, g) -> Optional[int]:
    vals = ctx.values(g)
    w = ctx.horizon.tail_window
    last = vals[-w:]
    if len(last) == w and last[0] is not None and all(v == last[0] for v in last):
        return last[0]
    return None


def psi_experiments(ctx, elements: list, kind: str) -> dict:
    """Phi, Theta and Psi evidence on one instance.

    ``kind`` is "c" (A from the co-maximal set; Psi expected) or "d"
    (A decidable; Psi expected to fail).
    """
    from . import power

    m: MAStructure = ctx.base
    h = ctx.horizon
    rows = []
    theta_pos = []
    for g in elements:
        try:
            if power.domain_status(ctx, g).value is False:
                rows.append({"element": g.name, "theta": "diverges"})
                continue
            th = theta_power(ctx, g)
        except Exception as exc:  # recorded, not fatal
            rows.append({"element": g.name, "error": repr(exc)})
            continue
        rows.append({"element": g.name, "theta": th.label})
        if th.value is True:
            theta_pos.append(g)

    report: dict = {"instance": m.name, "horizon": h.as_dict(), "tested": len(elements),
                    "theta_positive": [g.name for g in theta_pos], "elements": rows}

    # (6) below a constant: tail-constant
    below = []
    consts = [g for g in theta_pos if _tail_const(ctx, g) is not None]
    for g in theta_pos:
        for c in consts:
            if g is c:
                continue
            if phi_power(ctx, g, c).value is True:
                v = _tail_const(ctx, g)
                below.append({"element": g.name, "below": c.name,
                              "equals_constant": None if v is None else v,
                              "eq_c": None if v is None else power.eq_c(ctx, g, power.constant(v)).label})
                break
    report["fact6"] = below

    if kind == "c":
        ident = power.identity()
        above_id = []
        top_like, const_like, other = [], [], []
        for g in elements:
            if g.name == ident.name:
                continue
            try:
                if power.domain_status(ctx, g).value is False:
                    continue
                v = phi_power(ctx, ident, g)
            except Exception:
                continue
            if v.value is True:
                above_id.append(g.name)
        for g in theta_pos:
            if power.eq_c(ctx, g, ident).value is True:
                top_like.append(g.name)
            elif _tail_const(ctx, g) is not None:
                const_like.append(g.name)
            else:
                other.append(g.name)
        id_above = [c.name for c in consts if phi_power(ctx, c, ident).value is True]
        report["fact7"] = {
            "eq_id": top_like, "eq_constant": const_like, "neither": other,
            "id_above_constants": id_above, "constants_tested": [c.name for c in consts],
        }
        report["psi"] = {"phi_above_id": above_id, "holds_evidence": not above_id,
                         "tested_against_id": len(elements) - 1}
        report["lerman"] = _lerman(ctx, elements)
    else:
        g_next = _d_successor(m)
        missing, pairs = [], []
        for f in theta_pos:
            gf = power.pointwise(f"g({f.name})", g_next, f)
            v = phi_power(ctx, f, gf)
            pairs.append({"element": f.name, "greater": gf.name, "phi": v.label})
            if v.value is not True:
                missing.append(f.name)
        report["fact8"] = pairs
        report["psi"] = {"without_greater": missing, "fails_evidence": not missing and bool(theta_pos)}
    return report


def _d_successor(m: MAStructure) -> Callable[[int], int]:
    """g(d_i) = d_{i+1} on A, identity elsewhere."""
    dec = m.a_decider

    def g(x: int) -> int:
        if not dec(x):
            return x
        y = x + 2
        while not dec(y):
            y += 2
        return y

    return g


def _lerman(ctx, elements: list) -> list[dict]:
    """For each element mapping C into C with many values, does it agree
    with the identity on the included tail?"""
    out = []
    pts = ctx.points()
    for g in elements:
        vals = [g.value(n, ctx.budget) for n in pts]
        inside = almost_inclusion(
            lambda n: (lambda v: None if v is None or v > ctx.view.window_bound else ctx.view.contains(v))(
                g.value(n, ctx.budget)),
            ctx.view, ctx.horizon)
        distinct = len({v for v in vals if v is not None})
        if inside.value is True and distinct >= ctx.horizon.tail_window:
            agree = all(v == n for v, n in zip(vals[-ctx.horizon.tail_window:], pts[-ctx.horizon.tail_window:]))
            out.append({"element": g.name, "maps_C_into_C": True, "distinct_values": distinct,
                        "agrees_with_identity_on_tail": agree})
    return out
