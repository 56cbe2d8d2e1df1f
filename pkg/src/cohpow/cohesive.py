"""Stage approximations of a maximal set and horizon-bounded almost inclusion.

The maximal set M is built with the marker / e-state construction: markers
a_0 < a_1 < ... sit on the current complement; marker i is moved onto a later
marker whenever that one has a strictly larger i-state, and everything it
jumps over is dumped into M.  C is the complement of M.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

import numpy as np

from . import pcf

Truth = Optional[bool]  # True / False / None (unknown)


@dataclass(frozen=True)
class Horizon:
    window_bound: int = 2000
    step_budget: int = 100_000
    tail_window: int = 8
    cut: int = 16

    def __post_init__(self):
        if self.tail_window < 1:
            raise ValueError("tail_window must be >= 1")
        if self.cut > self.window_bound:
            raise ValueError("cut must not exceed window_bound")

    def as_dict(self) -> dict:
        return {
            "window_bound": self.window_bound,
            "step_budget": self.step_budget,
            "tail_window": self.tail_window,
            "cut": self.cut,
        }


@dataclass(frozen=True)
class Verdict:
    value: Truth
    horizon: Horizon
    witness: Optional[int] = None
    detail: Optional[dict] = None

    @property
    def label(self) -> str:
        return {True: "true", False: "false", None: "unknown"}[self.value]

    def __bool__(self):
        raise TypeError("a Verdict is three-valued; compare .value instead")

    def as_dict(self) -> dict:
        d = {"verdict": self.label, "horizon": self.horizon.as_dict(), "witness": self.witness}
        if self.detail:
            d["detail"] = self.detail
        return d


# --------------------------------------------------------------------------
# maximal set construction
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MaximalSetApprox:
    stage: int
    members: frozenset[int]
    markers: tuple[int, ...]
    moved_log: tuple[tuple[int, int, int, int], ...]  # (stage, marker, old, new)
    enumeration: tuple[tuple[int, int], ...]  # (member, stage) in enumeration order
    width: int
    member_stage: dict = field(default_factory=dict, compare=False, repr=False)

    def members_at(self, s: int) -> frozenset[int]:
        return frozenset(x for x, t in self.enumeration if t <= s)

    def last_moves(self, k: int) -> list[Optional[int]]:
        """Last stage each of markers 0..k-1 moved (None if never)."""
        # a move of marker i re-seats every marker above it as well
        last: list[Optional[int]] = [None] * k
        for st, i, _, _ in self.moved_log:
            for m in range(i, k):
                last[m] = st
        return last

    def view(self, window_bound: int) -> "CohesiveView":
        return CohesiveView.from_members(self.members, window_bound)


def build_maximal(stages: int, machine: pcf.Machine = pcf.DEFAULT, width: int = 16) -> MaximalSetApprox:
    """Run ``stages`` stages of the e-state construction.

    ``width`` is how many c.e. sets W_0..W_{width-1} enter an e-state; marker
    i uses W_0..W_{min(i, width-1)}.  W_{e,s} = {x <= s : phi_{e,s}(x) halts}.
    At most one marker moves per stage.
    """
    if stages < 1:
        raise ValueError("stages must be >= 1")
    if not 1 <= width <= 62:
        raise ValueError("width must lie in [1, 62]")

    entry: dict[int, list[tuple[int, int]]] = {}  # stage -> [(x, e)]

    def schedule(x: int):
        # x enters W_e at stage max(x, halting time)
        if x > stages:
            return
        for e in range(width):
            out = machine.eval(e, x, stages)
            if out.converged:
                t = max(x, out.steps_used)
                if t <= stages:
                    entry.setdefault(t, []).append((x, e))

    state: dict[int, int] = {}  # position -> bitmask, W_0 as the top bit
    markers: list[int] = []
    members: set[int] = set()
    enumeration: list[tuple[int, int]] = []
    member_stage: dict[int, int] = {}
    moved: list[tuple[int, int, int, int]] = []
    fresh = 0

    def new_marker():
        nonlocal fresh
        x = fresh
        fresh += 1
        state.setdefault(x, 0)
        schedule(x)
        markers.append(x)

    shifts = np.array([width - 1 - min(i, width - 1) for i in range(0)], dtype=np.int64)
    for s in range(1, stages + 1):
        while len(markers) < s:
            new_marker()
        for x, e in entry.pop(s, ()):
            state[x] = state.get(x, 0) | (1 << (width - 1 - e))

        k = len(markers)
        if len(shifts) < k:
            shifts = np.array([width - 1 - min(i, width - 1) for i in range(k + 64)], dtype=np.int64)
        st = np.fromiter((state[x] for x in markers), dtype=np.int64, count=k)
        # best[i] = max state over markers j > i
        suf = np.maximum.accumulate(st[::-1])[::-1]
        best = np.empty(k, dtype=np.int64)
        best[:-1] = suf[1:]
        best[-1] = -1
        sh = shifts[:k]
        want = np.nonzero((best >> sh) > (st >> sh))[0]
        if len(want):
            i = int(want[0])
            target = best[i] >> sh[i]
            j = i + 1 + int(np.nonzero((st[i + 1:] >> sh[i]) == target)[0][0])
            dumped = markers[i:j]
            moved.append((s, i, markers[i], markers[j]))
            for x in sorted(dumped):
                members.add(x)
                enumeration.append((x, s))
                member_stage[x] = s
            del markers[i:j]
            while len(markers) < s:
                new_marker()

    return MaximalSetApprox(
        stage=stages,
        members=frozenset(members),
        markers=tuple(markers),
        moved_log=tuple(moved),
        enumeration=tuple(enumeration),
        width=width,
        member_stage=member_stage,
    )


# --------------------------------------------------------------------------
# views and verdicts
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CohesiveView:
    window_bound: int
    excluded: frozenset[int]
    included: tuple[int, ...]  # sorted

    def __post_init__(self):
        inc = set(self.included)
        if inc & self.excluded:
            raise ValueError("included and excluded overlap")
        if len(inc) + len(self.excluded) != self.window_bound + 1:
            raise ValueError("included and excluded must partition [0, N]")

    @classmethod
    def from_members(cls, members: Iterable[int], window_bound: int) -> "CohesiveView":
        ex = frozenset(x for x in members if x <= window_bound)
        inc = tuple(x for x in range(window_bound + 1) if x not in ex)
        return cls(window_bound, ex, inc)

    @classmethod
    def from_predicate(cls, in_c: Callable[[int], bool], window_bound: int) -> "CohesiveView":
        inc = tuple(x for x in range(window_bound + 1) if in_c(x))
        ex = frozenset(set(range(window_bound + 1)) - set(inc))
        return cls(window_bound, ex, inc)

    def doubled(self) -> "CohesiveView":
        """View of {2s : s in C} on [0, 2N+1]."""
        inc = tuple(2 * x for x in self.included)
        n2 = 2 * self.window_bound + 1
        ex = frozenset(set(range(n2 + 1)) - set(inc))
        return CohesiveView(n2, ex, inc)

    def tail(self, h: Horizon) -> tuple[int, ...]:
        top = min(self.window_bound, h.window_bound)
        lo = bisect.bisect_left(self.included, h.cut)
        hi = bisect.bisect_right(self.included, top)
        return self.included[lo:hi]

    def contains(self, x: int) -> Optional[bool]:
        if x > self.window_bound:
            return None
        return x not in self.excluded


def tail_verdict(values: list[Truth], points: tuple[int, ...], h: Horizon, detail=None) -> Verdict:
    """Verdict from pointwise truth values over the included tail.

    True when the longest all-True suffix has at least ``tail_window``
    points, False likewise for all-False, Unknown otherwise.  The witness is
    the first point of the deciding suffix.
    """
    for want in (True, False):
        k = len(values)
        while k > 0 and values[k - 1] is want:
            k -= 1
        if len(values) - k >= h.tail_window:
            return Verdict(want, h, points[k] if k < len(points) else None, detail)
    return Verdict(None, h, None, detail)


def almost_inclusion(pred: Callable[[int], Truth], view: CohesiveView, h: Horizon) -> Verdict:
    """Horizon surrogate for C subset* {x : pred(x)}."""
    pts = view.tail(h)
    vals = [pred(x) for x in pts]
    return tail_verdict(vals, pts, h)


# --------------------------------------------------------------------------
# R and cohesiveness evidence
# --------------------------------------------------------------------------

class AscendingR:
    """The records of an enumeration: members that exceed every member
    enumerated before them.  Decided by replaying the enumeration; numbers
    above the last enumerated member are undecided at this approximation."""

    def __init__(self, order: Iterable[int]):
        rec = []
        top = -1
        seen_max = -1
        for x in order:
            if x > top:
                rec.append(x)
                top = x
            seen_max = max(seen_max, x)
        self.elements: tuple[int, ...] = tuple(rec)
        self._set = frozenset(rec)
        self.decided_below = seen_max

    def __contains__(self, x: int) -> bool:
        return x in self._set

    def __call__(self, x: int) -> bool:
        return x in self._set

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)


class ArithmeticR:
    """Computable fallback R = {a*s + b}; always infinite."""

    def __init__(self, a: int = 3, b: int = 2):
        self.a, self.b = a, b

    def __contains__(self, x: int) -> bool:
        return x >= self.b and (x - self.b) % self.a == 0

    def __call__(self, x: int) -> bool:
        return x in self

    def __iter__(self):
        s = 0
        while True:
            yield self.a * s + self.b
            s += 1


def settled_view(approx: MaximalSetApprox, h: Horizon) -> CohesiveView:
    """View cut at stage//2: a point x only shows its W-memberships from
    about stage 2x on, so markers above that are not yet meaningful."""
    n = max(min(h.window_bound, approx.stage // 2), min(h.cut, approx.stage))
    return approx.view(n)


def extract_R(approx: MaximalSetApprox) -> AscendingR:
    if approx.stage < 2:
        raise ValueError("need at least 2 stages")
    return AscendingR(x for x, _ in approx.enumeration)


def cohesiveness_report(
    approx: MaximalSetApprox,
    first_k_ce: int,
    h: Horizon,
    machine: pcf.Machine = pcf.DEFAULT,
    view: CohesiveView | None = None,
) -> list[dict]:
    view = view or settled_view(approx, h)
    # stamp the window actually inspected
    h = replace(h, window_bound=view.window_bound, cut=min(h.cut, view.window_bound))
    rows = []
    for e in range(first_k_ce):
        cache: dict[int, bool] = {}

        def in_w(x: int) -> bool:
            if x not in cache:
                cache[x] = x <= h.step_budget and machine.eval(e, x, h.step_budget).converged
            return cache[x]

        inside = almost_inclusion(in_w, view, h)
        outside = almost_inclusion(lambda x: not in_w(x), view, h)
        rows.append({
            "e": e,
            "inclusion": inside.as_dict(),
            "complement": outside.as_dict(),
            "split": inside.value is None and outside.value is None,
        })
    return rows


def marker_table(approx: MaximalSetApprox, k: int = 10) -> list[dict]:
    last = approx.last_moves(k)
    return [
        {"marker": i, "position": approx.markers[i] if i < len(approx.markers) else None,
         "last_move": last[i]}
        for i in range(k)
    ]


def with_horizon(h: Horizon, **kw) -> Horizon:
    return replace(h, **kw)
