"""A computable omega-order on which no program tracks successors along C.

At stage s the number s is put on top of the current finite order X_s.  Then
every pair <e, n> < s is considered in increasing code order; if phi_e(n)
has converged within s steps to the current immediate successor of n, n is
not in R and n is not below any of 0..e, a fresh element of R is slotted in
between n and phi_e(n).  Each pair acts at most once.

``Construction`` replays this event by event: a pair is re-examined only
when something it depends on has changed (it became eligible, its
computation converged, its value entered X, or the successor of n moved).
``replay_naive`` is the literal stage-by-stage scan, kept as an oracle.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from . import pcf
from .cohesive import AscendingR, ArithmeticR, CohesiveView, extract_R, MaximalSetApprox
from .orders import CompOrder
from .pcf import pair, unpair

GAP = 1 << 32


class RExhausted(RuntimeError):
    """The supplied R ran out of fresh elements."""


class ExtendedR:
    """R decided by a finite enumeration replay up to ``base.decided_below``,
    continued above it by an arithmetic progression."""

    def __init__(self, base: AscendingR, tail: ArithmeticR | None = None):
        self.base = base
        self.tail = tail or ArithmeticR(3, 2)
        self.cutoff = base.decided_below

    def __contains__(self, x: int) -> bool:
        if x <= self.cutoff:
            return x in self.base
        return x in self.tail

    def __call__(self, x: int) -> bool:
        return x in self

    def __iter__(self) -> Iterator[int]:
        yield from self.base
        for x in self.tail:
            if x > self.cutoff:
                yield x


@dataclass(frozen=True)
class Action:
    stage: int
    e: int
    n: int
    m: int

    def as_dict(self) -> dict:
        return {"stage": self.stage, "e": self.e, "n": self.n, "m": self.m}


class Construction:
    """Mutable, single-owner replay of the construction."""

    def __init__(self, R, machine: pcf.Machine = pcf.DEFAULT, cap: int = 2000):
        self.R = R
        self.machine = machine
        self.stage = 0
        self.cap = max(cap, 1)  # step budget used when probing halting times
        self.succ: dict[int, Optional[int]] = {0: None}
        self.pred: dict[int, Optional[int]] = {0: None}
        self.lab: dict[int, int] = {0: 0}
        self.head = self.top = 0
        self.acted: set[int] = set()
        self.actions: list[Action] = []
        self._r_iter = iter(R)
        self._r_next: Optional[int] = None
        self._value: dict[int, int] = {}  # code -> phi_e(n), once converged
        self._pending: dict[int, list[int]] = {}  # stage -> codes converging then
        self._unresolved: list[int] = []  # codes not converged within cap
        self._waiting: dict[int, list[int]] = {}  # value v -> codes waiting for v in X
        self._by_target: dict[tuple[int, int], list[int]] = {}
        self._greatest: list[int] = [0]  # _greatest[e] = L-greatest of 0..e
        self._deferred: set[int] = set()
        self.below_changed: dict[int, int] = {}  # k -> last stage something went below k
        self.track_below = 51

    # -- order primitives --------------------------------------------------

    def __contains__(self, x: int) -> bool:
        return x in self.lab

    def less(self, x: int, y: int) -> bool:
        return self.lab[x] < self.lab[y]

    def _place_top(self, x: int):
        old = self.top
        self.lab[x] = self.lab[old] + GAP
        self.succ[old], self.pred[x], self.succ[x] = x, old, None
        self.top = x

    def _insert_after(self, n: int, m: int):
        v = self.succ[n]
        lo = self.lab[n]
        hi = self.lab[v] if v is not None else lo + 2 * GAP
        if hi - lo < 2:
            self._relabel()
            lo = self.lab[n]
            hi = self.lab[v] if v is not None else lo + 2 * GAP
        self.lab[m] = (lo + hi) // 2
        self.succ[n], self.pred[m], self.succ[m] = m, n, v
        if v is not None:
            self.pred[v] = m
        else:
            self.top = m
        for k in range(min(self.track_below, self.stage + 1)):
            if k in self.lab and self.lab[m] < self.lab[k]:
                self.below_changed[k] = self.stage

    def _relabel(self):
        x, lab = self.head, 0
        while x is not None:
            self.lab[x] = lab
            lab += GAP
            x = self.succ[x]

    def order_list(self) -> list[int]:
        out, x = [], self.head
        while x is not None:
            out.append(x)
            x = self.succ[x]
        return out

    def greatest_upto(self, e: int) -> int:
        return self._greatest[e]

    # -- R -----------------------------------------------------------------

    def _fresh_r(self) -> int:
        while True:
            if self._r_next is None:
                try:
                    self._r_next = next(self._r_iter)
                except StopIteration:
                    raise RExhausted(f"R has no element outside X at stage {self.stage}") from None
            if self._r_next not in self.lab:
                return self._r_next
            self._r_next = None

    # -- pair bookkeeping --------------------------------------------------

    def _probe(self, code: int):
        """Find when pair ``code`` converges, scheduling it for that stage."""
        e, n = unpair(code)
        out = self.machine.eval(e, n, max(self.cap, self.stage))
        if out.converged:
            t = max(code + 1, out.steps_used)
            self._value[code] = out.value
            if t <= self.stage:
                self._arrive(code)
            else:
                self._pending.setdefault(t, []).append(code)
        else:
            self._unresolved.append(code)

    def _arrive(self, code: int):
        """Pair ``code`` has converged by the current stage."""
        v = self._value[code]
        n = unpair(code)[1]
        self._by_target.setdefault((n, v), []).append(code)
        if v in self.lab:
            self._deferred.add(code)
        else:
            self._waiting.setdefault(v, []).append(code)

    def _touch(self, n: int, v: int, heap: list[int], cursor: int, queued: set[int]):
        """Successor of n became v, or v entered X."""
        for code in self._by_target.get((n, v), ()):
            self._queue(code, heap, cursor, queued)

    def _queue(self, code, heap, cursor, queued):
        if code in self.acted:
            return
        if code > cursor and code < self.stage:
            if code not in queued:
                queued.add(code)
                heapq.heappush(heap, code)
        else:
            self._deferred.add(code)

    def _eligible(self, code: int) -> bool:
        e, n = unpair(code)
        v = self._value[code]
        return (
            code not in self.acted
            and v in self.lab
            and self.succ.get(n) == v
            and n not in self.R
            and self.lab[n] >= self.lab[self._greatest[e]]
        )

    # -- stages ------------------------------------------------------------

    def _extend_cap(self, new_cap: int):
        self.cap = new_cap
        old, self._unresolved = self._unresolved, []
        for code in old:
            self._probe(code)

    def step(self):
        s = self.stage = self.stage + 1
        if s > self.cap:
            self._extend_cap(max(2 * self.cap, s))
        heap: list[int] = []
        queued: set[int] = set()
        carried, self._deferred = self._deferred, set()

        # step (1)
        if s not in self.lab:
            old_top = self.top
            self._place_top(s)
            carried.update(self._by_target.get((old_top, s), ()))
            for code in self._waiting.pop(s, ()):
                carried.add(code)
        self._greatest.append(s if self.lab[s] > self.lab[self._greatest[-1]] else self._greatest[-1])

        # pairs becoming eligible or converging now
        self._probe(s - 1)
        for code in self._pending.pop(s, ()):
            self._arrive(code)
        carried |= self._deferred
        self._deferred = set()

        for code in carried:
            if code < s and code not in queued and code not in self.acted and code in self._value:
                queued.add(code)
                heapq.heappush(heap, code)

        # step (2)
        while heap:
            code = heapq.heappop(heap)
            if not self._eligible(code):
                continue
            e, n = unpair(code)
            v = self._value[code]
            m = self._fresh_r()
            self._insert_after(n, m)
            self.acted.add(code)
            self.actions.append(Action(s, e, n, m))
            self._touch(n, m, heap, code, queued)
            for c in self._waiting.pop(m, ()):
                self._queue(c, heap, code, queued)

    def advance_to(self, stage: int) -> "Construction":
        while self.stage < stage:
            self.step()
        return self

    # -- reports -----------------------------------------------------------

    def action_log(self) -> list[dict]:
        return [a.as_dict() for a in self.actions]

    def action_log_jsonl(self) -> str:
        return "".join(json.dumps(a) + "\n" for a in self.action_log())

    def pred_count(self, k: int) -> int:
        n, x = 0, self.pred.get(k)
        while x is not None:
            n += 1
            x = self.pred[x]
        return n


def run_construction(stages: int, R, machine: pcf.Machine = pcf.DEFAULT) -> Construction:
    if stages < 1:
        raise ValueError("stages must be >= 1")
    return Construction(R, machine, cap=stages).advance_to(stages)


def replay_naive(stages: int, R, machine: pcf.Machine = pcf.DEFAULT) -> list[Action]:
    """Literal replay: every stage rescans every pair below it."""
    order = [0]
    X = {0}
    acted: set[int] = set()
    log: list[Action] = []
    r_all = iter(R)
    r_seen: list[int] = []

    def fresh():
        for r in r_seen:
            if r not in X:
                return r
        for r in r_all:
            r_seen.append(r)
            if r not in X:
                return r
        raise RExhausted

    for s in range(1, stages + 1):
        if s not in X:
            order.append(s)
            X.add(s)
        for code in range(s):
            if code in acted:
                continue
            e, n = unpair(code)
            out = machine.eval(e, n, s)
            if not out.converged or out.value not in X:
                continue
            i = order.index(n)
            if i + 1 >= len(order) or order[i + 1] != out.value:
                continue
            if n in R:
                continue
            if any(order.index(k) > i for k in range(e + 1)):
                continue
            m = fresh()
            order.insert(i + 1, m)
            X.add(m)
            acted.add(code)
            log.append(Action(s, e, n, m))
    return log


# --------------------------------------------------------------------------
# as a CompOrder
# --------------------------------------------------------------------------

def as_order(state: Construction, name: str = "lemma5") -> CompOrder:
    """Comparisons read off the replay, advancing it until both are placed."""

    def less(x: int, y: int) -> bool:
        if x not in state.lab or y not in state.lab:
            state.advance_to(max(x, y))
        return state.lab[x] < state.lab[y]

    return CompOrder(name, lambda x: True, less, random_element=lambda rng, b: rng.randint(0, b),
                     stage_sensitive=False, parts=(state,))


_DEFAULT_CACHE: dict = {}


def default_R(approx: MaximalSetApprox | None = None):
    from .cohesive import build_maximal
    if approx is None:
        approx = _DEFAULT_CACHE.get("approx")
        if approx is None:
            approx = _DEFAULT_CACHE["approx"] = build_maximal(2000)
    return ExtendedR(extract_R(approx))


def default_construction(stages: int = 2000) -> Construction:
    key = ("construction",)
    c = _DEFAULT_CACHE.get(key)
    if c is None:
        c = _DEFAULT_CACHE[key] = Construction(default_R(), pcf.DEFAULT, cap=stages)
    return c.advance_to(stages)


def default_order(stages: int = 2000, **_kw) -> CompOrder:
    return as_order(default_construction(stages))


# --------------------------------------------------------------------------
# (*) evidence
# --------------------------------------------------------------------------

def required_stage(e_range: Iterable[int], n_max: int) -> int:
    """First stage by which every pair <e, n>, n <= n_max, has been considered."""
    return max(pair(e, n_max) for e in e_range) + 2


def star_check(state: Construction, view: CohesiveView, e_range: Iterable[int],
               n_range: Iterable[int], budget: int) -> dict:
    """Check that no phi_e (e in e_range) names the successor of an included n.

    The construction is advanced first so that every checked pair has been
    considered at least once.
    """
    e_range = list(e_range)
    n_set = [n for n in n_range if view.contains(n)]
    if e_range and n_set:
        state.advance_to(max(state.stage, required_stage(e_range, max(n_set))))
    rows, violations = [], []
    counts = {"clean": 0, "vacuous": 0, "skipped": 0, "violation": 0}
    for e in e_range:
        ell = state.greatest_upto(e)
        for n in n_set:
            if n in state.R:
                outcome, why = "skipped", "n in R"
            elif state.lab[n] <= state.lab[ell]:
                outcome, why = "skipped", "restraint"
            else:
                out = state.machine.eval(e, n, budget)
                if not out.converged:
                    outcome, why = "vacuous", "diverges within budget"
                else:
                    v = out.value
                    if v not in state.lab:
                        outcome, why = "clean", "value outside X"
                    elif state.lab[v] <= state.lab[n]:
                        outcome, why = "clean", "value not above n"
                    elif state.succ[n] != v:
                        outcome, why = "clean", "element between"
                    else:
                        outcome, why = "violation", "immediate successor"
                        violations.append({"e": e, "n": n, "value": v})
            counts[outcome] += 1
            rows.append({"e": e, "n": n, "outcome": outcome, "reason": why})
    return {"stage": state.stage, "counts": counts, "violations": violations, "rows": rows}


def between_psi(ctx, phi):
    """psi(n) = least m with n <_L m <_L phi(n); diverges where there is none.

    Requires less_c([id], phi) to be True at the context horizon.
    """
    from . import power

    state: Construction = ctx.base.parts[0]
    ident = power.identity(ctx)
    pre = power.less_c(ctx, ident, phi)
    if pre.value is not True:
        raise ValueError(f"less_c([id], phi) is {pre.label}, not true")

    def psi(n: int, budget: int) -> Optional[int]:
        v = phi.value(n, budget)
        if v is None or n not in state.lab or v not in state.lab:
            return None
        lo, hi = state.lab[n], state.lab[v]
        if lo >= hi:
            return None
        best = None
        x = state.succ[n]
        while x is not None and x != v:
            if best is None or x < best:
                best = x
            x = state.succ[x]
        return best

    return power.PowerElement(f"between({phi.name})", psi)


def stage_order(state: Construction, name: str = "lemma5@stage") -> CompOrder:
    """The finite order X at the construction's current stage (no advancing)."""
    return CompOrder(f"{name}{state.stage}", lambda x: x in state.lab,
                     lambda x, y: state.lab[x] < state.lab[y], parts=(state,))
