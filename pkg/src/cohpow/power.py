"""Elements of a cohesive power and their comparisons at a horizon.

An element is a partial function n -> value, given natively as a callable
``fn(n, budget)`` returning None on divergence, optionally backed by a raw
program index computing the same function.  Comparisons look at the
pointwise predicate on the included tail of the cohesive view.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Callable, Optional

from . import pcf
from .cohesive import CohesiveView, Horizon, Verdict, almost_inclusion, tail_verdict
from .orders import CompOrder, interval_card_bounded, rat_of, code_of_rat

PointFn = Callable[[int, int], Optional[int]]


@dataclass(frozen=True)
class PowerElement:
    name: str
    fn: PointFn
    index: Optional[int] = None  # raw pcf index computing the same function

    def value(self, n: int, budget: int) -> Optional[int]:
        return self.fn(n, budget)

    def via_program(self, n: int, budget: int) -> Optional[int]:
        if self.index is None:
            raise ValueError(f"{self.name} has no program index")
        return pcf.run(self.index, n, budget).value

    def __repr__(self):
        return f"[{self.name}]"


@dataclass(frozen=True)
class PowerContext:
    base: Any  # CompOrder, or an MAStructure for the ternary-relation power
    view: CohesiveView
    horizon: Horizon
    machine: pcf.Machine = pcf.DEFAULT

    def __post_init__(self):
        if self.view.window_bound != self.horizon.window_bound:
            raise ValueError("view and horizon must share window_bound")

    @property
    def budget(self) -> int:
        return self.horizon.step_budget

    def points(self) -> tuple[int, ...]:
        return self.view.tail(self.horizon)

    def over(self, base) -> "PowerContext":
        return replace(self, base=base)

    def values(self, a: PowerElement) -> list[Optional[int]]:
        return [a.value(n, self.budget) for n in self.points()]


def make_context(base, view: CohesiveView, h: Horizon | None = None,
                 machine: pcf.Machine = pcf.DEFAULT) -> PowerContext:
    """Context whose horizon is ``h`` cut down to the view's window."""
    h = h or Horizon()
    n = view.window_bound
    h = replace(h, window_bound=n, cut=min(h.cut, n))
    return PowerContext(base, view, h, machine)


# --------------------------------------------------------------------------
# element constructors
# --------------------------------------------------------------------------

def constant(a: int) -> PowerElement:
    return PowerElement(f"const:{a}", lambda n, b: a, pcf.build_constant(a))


def identity(ctx: PowerContext | None = None) -> PowerElement:
    return PowerElement("id", lambda n, b: n, pcf.build_identity())


def double_id() -> PowerElement:
    return PowerElement("2id", lambda n, b: 2 * n, pcf.build_double())


def from_program(raw: int, name: str | None = None) -> PowerElement:
    return PowerElement(name or f"raw:{raw}", lambda n, b: pcf.run(raw, n, b).value, raw)


def program(ctx: PowerContext, e: int) -> PowerElement:
    """phi_e of the context's machine."""
    return from_program(ctx.machine.index(e), f"prog:{e}")


def pointwise(name: str, f: Callable[..., Optional[int]], *elems: PowerElement) -> PowerElement:
    """n -> f(a_1(n), ..., a_k(n)); diverges where any argument does."""

    def fn(n: int, b: int) -> Optional[int]:
        vals = []
        for a in elems:
            v = a.value(n, b)
            if v is None:
                return None
            vals.append(v)
        return f(*vals)

    return PowerElement(name, fn)


def canonical_embed(ctx: PowerContext, a: int) -> PowerElement:
    if isinstance(ctx.base, CompOrder) and not ctx.base.in_domain(a):
        raise ValueError(f"{a} is not in {ctx.base.name}")
    return constant(a)


def term_apply(ctx: PowerContext, g: int, a: PowerElement) -> PowerElement:
    """[phi_g o a] for g an index of the context's machine."""
    raw = ctx.machine.index(g)

    def fn(n: int, b: int) -> Optional[int]:
        v = a.value(n, b)
        return None if v is None else pcf.run(raw, v, b).value

    idx = pcf.build_compose(raw, a.index) if a.index is not None else None
    return PowerElement(f"prog:{g}({a.name})", fn, idx)


def parse_element(ctx: PowerContext, text: str) -> PowerElement:
    """CLI constructors: const:<n>, id, 2id, prog:<i>, compose:<i>:<j>."""
    parts = text.strip().split(":")
    try:
        if parts == ["id"]:
            return identity(ctx)
        if parts == ["2id"]:
            return double_id()
        if parts[0] == "const" and len(parts) == 2:
            return canonical_embed(ctx, int(parts[1]))
        if parts[0] == "prog" and len(parts) == 2:
            return program(ctx, int(parts[1]))
        if parts[0] == "compose" and len(parts) == 3:
            return term_apply(ctx, int(parts[1]), program(ctx, int(parts[2])))
    except ValueError as exc:
        raise ValueError(f"bad element {text!r}: {exc}") from None
    raise ValueError(f"bad element {text!r}; expected const:<n>, id, 2id, prog:<i> or compose:<i>:<j>")


# --------------------------------------------------------------------------
# comparisons
# --------------------------------------------------------------------------

def domain_status(ctx: PowerContext, a: PowerElement) -> Verdict:
    """Horizon surrogate for C subset* dom(a)."""
    return almost_inclusion(lambda n: a.value(n, ctx.budget) is not None, ctx.view, ctx.horizon)


def _check_domain(ctx, *elems):
    for a in elems:
        if domain_status(ctx, a).value is False:
            raise ValueError(f"{a!r} diverges on the included tail")


def _relation(ctx: PowerContext, test, *elems: PowerElement) -> Verdict:
    """Pointwise relation over the tail; each element is evaluated once and
    the values serve both the domain check and the relation."""
    pts = ctx.points()
    cols = [[a.value(n, ctx.budget) for n in pts] for a in elems]
    for a, col in zip(elems, cols):
        if tail_verdict([v is not None for v in col], pts, ctx.horizon).value is False:
            raise ValueError(f"{a!r} diverges on the included tail")
    truth = [None if None in row else test(*row) for row in zip(*cols)]
    return tail_verdict(truth, pts, ctx.horizon)


def eq_c(ctx: PowerContext, a: PowerElement, b: PowerElement) -> Verdict:
    return _relation(ctx, lambda x, y: x == y, a, b)


def less_c(ctx: PowerContext, a: PowerElement, b: PowerElement) -> Verdict:
    L: CompOrder = ctx.base

    def test(x, y):
        if not (L.in_domain(x) and L.in_domain(y)):
            return None
        return L.less(x, y)

    return _relation(ctx, test, a, b)


# --------------------------------------------------------------------------
# successors over the order built from an injection f
# --------------------------------------------------------------------------

def _preimage(f, a: int, budget: int) -> Optional[int]:
    if hasattr(f, "preimage"):
        return f.preimage(a)
    if hasattr(f, "preimage_upto"):
        return f.preimage_upto(a, min(budget, 4 * a + 64))
    for k in range(min(budget, 4 * a + 64)):
        if f(k) == a:
            return k
    return None


@dataclass(frozen=True)
class CaseResult:
    case: str  # "1" | "2" | "3" | "mixed"
    element: PowerElement
    tally: dict

    def as_dict(self) -> dict:
        return {"case": self.case, "element": self.element.name, "tally": self.tally}


def _classify(f, x: int, budget: int) -> tuple[str, Optional[int]]:
    if x % 2 == 1:
        return "1", (x - 1) // 2
    k = _preimage(f, x // 2, budget)
    return ("2", k) if k is not None else ("3", None)


def _case_vote(ctx: PowerContext, psi: PowerElement, classify) -> tuple[Optional[str], dict]:
    tags = []
    for n in ctx.points():
        v = psi.value(n, ctx.budget)
        tags.append(None if v is None else classify(v)[0])
    tally = dict(sorted(Counter(t or "diverge" for t in tags).items()))
    w = ctx.horizon.tail_window
    last = tags[-w:]
    if len(last) == w and last[0] is not None and all(t == last[0] for t in last):
        return last[0], tally
    return None, tally


def _thm4_f(ctx):
    return ctx.base.parts[0]


def thm4_succ(ctx: PowerContext, psi: PowerElement) -> CaseResult:
    """Immediate successor of [psi] by the odd / even-in-range / even-outside case split.

    Odd 2k+1 sits just above 2f(k), so its successor is 2f(k)+2; an even 2a
    with a = f(k) is followed by 2k+1; any other even 2a by 2a+2.
    """
    _check_domain(ctx, psi)
    f, b = _thm4_f(ctx), ctx.budget
    case, tally = _case_vote(ctx, psi, lambda x: _classify(f, x, b))

    def step(x: int, bud: int) -> Optional[int]:
        c, k = _classify(f, x, bud)
        if c == "1":
            return 2 * f(k) + 2
        if c == "2":
            return 2 * k + 1
        return x + 2

    rules = {
        "1": lambda x, bud: 2 * f((x - 1) // 2) + 2 if x % 2 else None,
        "2": lambda x, bud: (lambda k: None if k is None else 2 * k + 1)(_preimage(f, x // 2, bud))
        if x % 2 == 0 else None,
        "3": lambda x, bud: x + 2 if x % 2 == 0 else None,
    }
    rule = rules.get(case, step)
    label = f"phi{case}" if case else "succ"

    def fn(n: int, bud: int) -> Optional[int]:
        v = psi.value(n, bud)
        return None if v is None else rule(v, bud)

    return CaseResult(case or "mixed", PowerElement(f"{label}({psi.name})", fn), tally)


def thm4_pred(ctx: PowerContext, psi: PowerElement) -> CaseResult:
    """Mirror of thm4_succ: 2k+1 is preceded by 2f(k); 2a (a > 0) by 2k+1
    when a-1 = f(k), else by 2a-2; 0 has no predecessor."""
    _check_domain(ctx, psi)
    f, b = _thm4_f(ctx), ctx.budget

    def classify(x: int, bud: int):
        if x % 2 == 1:
            return "1", (x - 1) // 2
        if x == 0:
            return "none", None
        k = _preimage(f, x // 2 - 1, bud)
        return ("2", k) if k is not None else ("3", None)

    case, tally = _case_vote(ctx, psi, lambda x: classify(x, b))

    def rule(x: int, bud: int) -> Optional[int]:
        c, k = classify(x, bud)
        if case is not None and c != case:
            return None
        if c == "1":
            return 2 * f(k)
        if c == "2":
            return 2 * k + 1
        if c == "3":
            return x - 2
        return None

    def fn(n: int, bud: int) -> Optional[int]:
        v = psi.value(n, bud)
        return None if v is None else rule(v, bud)

    return CaseResult(case or "mixed", PowerElement(f"pred({psi.name})", fn), tally)


def empty_interval_check(ctx: PowerContext, lo: PowerElement, hi: PowerElement,
                         scan: Callable[[int, int], int] | None = None) -> dict:
    """Pointwise: no scanned code lies strictly between lo(n) and hi(n)."""
    L: CompOrder = ctx.base
    scan = scan or (lambda x, y: 2 * max(x, y) + 2)
    bad, checked, cache = [], 0, {}
    for n in ctx.points():
        x, y = lo.value(n, ctx.budget), hi.value(n, ctx.budget)
        if x is None or y is None:
            continue
        checked += 1
        key = (x, y)
        if key not in cache:
            cache[key] = L.less(x, y) and interval_card_bounded(L, x, y, scan(x, y)) == 0
        if not cache[key]:
            bad.append({"n": n, "low": x, "high": y})
    return {"checked": checked, "violations": bad}


def blocks_far_apart(ctx: PowerContext, a: PowerElement, b: PowerElement) -> Verdict:
    """Surrogate for limsup |(a(n), b(n))_L| = infinity over n in C.

    Interval sizes are counted among codes <= N (the window).  True when at
    least ``tail_window`` included points have size above n/4; False when
    the sizes on the upper half of the tail do not exceed those on the lower
    half and the last ``tail_window`` points stay below n/4; else Unknown.
    """
    L: CompOrder = ctx.base
    h = ctx.horizon
    N = ctx.view.window_bound
    pts = ctx.points()
    sizes: list[Optional[int]] = []
    cache: dict = {}
    for n in pts:
        x, y = a.value(n, ctx.budget), b.value(n, ctx.budget)
        if x is None or y is None:
            sizes.append(None)
            continue
        if (x, y) not in cache:
            cache[(x, y)] = interval_card_bounded(L, x, y, N) if L.less(x, y) else 0
        sizes.append(cache[(x, y)])
    over = [n for n, s in zip(pts, sizes) if s is not None and s > n / 4]
    detail = {"points": len(pts), "above_threshold": len(over),
              "max_size": max((s for s in sizes if s is not None), default=None)}
    w = h.tail_window
    if len(over) >= w:
        return Verdict(True, h, over[-w], detail)
    half = len(sizes) // 2
    if sizes and all(s is not None for s in sizes) and len(sizes) >= w:
        lower, upper = sizes[:half] or [0], sizes[half:]
        calm = all(s <= n / 4 for n, s in zip(pts[-w:], sizes[-w:]))
        if max(upper) <= max(lower) and calm:
            return Verdict(False, h, pts[-w], detail)
    return Verdict(None, h, None, detail)


def midpoint_theta(ctx: PowerContext, psi: PowerElement, phi: PowerElement) -> PowerElement:
    """theta(n) = floor((psi(n)+phi(n))/2), moved up by one when odd."""

    def mid(x: int, y: int) -> int:
        t = (x + y) // 2
        return t + (t % 2)

    return pointwise(f"mid({psi.name},{phi.name})", mid, psi, phi)


def theta_check(ctx: PowerContext, psi, phi, theta) -> dict:
    L: CompOrder = ctx.base
    bad, checked = [], 0
    for n in ctx.points():
        x, y, t = (e.value(n, ctx.budget) for e in (psi, phi, theta))
        if None in (x, y, t):
            continue
        checked += 1
        if t % 2:
            bad.append({"n": n, "why": "odd"})
        elif y - x >= 4 and not (L.less(x, t) and L.less(t, y)):
            bad.append({"n": n, "why": "not between"})
    return {"checked": checked, "violations": bad}


def unbounded_witness(ctx: PowerContext, psi: PowerElement) -> PowerElement:
    """[2id] when psi is eventually constant on the view, else [2 psi]."""
    vals = ctx.values(psi)
    w = ctx.horizon.tail_window
    last = vals[-w:]
    if len(last) == w and last[0] is not None and all(v == last[0] for v in last):
        return double_id()
    return pointwise(f"2({psi.name})", lambda x: 2 * x, psi)


# --------------------------------------------------------------------------
# sums, products, reverses
# --------------------------------------------------------------------------

def proj(i: int, a: PowerElement) -> PowerElement:
    p = pcf.proj1 if i == 1 else pcf.proj2
    return pointwise(f"pi{i}({a.name})", p, a)


def sum_iso(ctx: PowerContext, a: PowerElement) -> tuple[Optional[str], PowerElement]:
    """Side of the sum that a lives in (by tail vote) and its coordinate there."""
    _check_domain(ctx, a)
    tags = [None if v is None else pcf.proj1(v) for v in ctx.values(a)]
    w = ctx.horizon.tail_window
    last = tags[-w:]
    side = None
    if len(last) == w and last[0] in (0, 1) and all(t == last[0] for t in last):
        side = ("left", "right")[last[0]]
    return side, proj(2, a)


def prod_iso(ctx: PowerContext, a: PowerElement) -> tuple[PowerElement, PowerElement]:
    _check_domain(ctx, a)
    return proj(1, a), proj(2, a)


def rev_iso(a: PowerElement) -> PowerElement:
    return a


def lex_less_images(ctx0: PowerContext, ctx1: PowerContext, a, b) -> Verdict:
    """Lexicographic comparison of prod_iso images of a and b."""
    a1, a2 = prod_iso(ctx0, a)
    b1, b2 = prod_iso(ctx0, b)
    first = less_c(ctx0, a1, b1)
    if first.value is True:
        return first
    tie = eq_c(ctx0, a1, b1)
    if tie.value is True:
        return less_c(ctx1, a2, b2)
    if first.value is False:
        return Verdict(False, ctx0.horizon, first.witness)
    return Verdict(None, ctx0.horizon)


def rat_midpoint(a: PowerElement, b: PowerElement) -> PowerElement:
    def mid(x: int, y: int) -> int:
        return code_of_rat((rat_of(x) + rat_of(y)) / 2)

    return pointwise(f"mid({a.name},{b.name})", mid, a, b)


def rat_const(fr) -> PowerElement:
    c = code_of_rat(Fraction(fr))
    return constant(c)


def verdict_from_points(ctx: PowerContext, values: list) -> Verdict:
    return tail_verdict(values, ctx.points(), ctx.horizon)
