"""Computable linear orders presented on the natural numbers.

Every presentation is a ``CompOrder``: a decidable domain and a decidable
strict comparison.  Tagged elements (sums, products) are Cantor pairs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import pcf
from .pcf import pair, unpair


class OrderDomainError(ValueError):
    """An element code outside the order's domain."""


class ContractBreach(RuntimeError):
    """A function promised to be total did not converge within budget."""


@dataclass(frozen=True, eq=False)
class CompOrder:
    name: str
    in_domain: Callable[[int], bool]
    less: Callable[[int, int], bool]
    show: Callable[[int], str] = str
    random_element: Optional[Callable[[random.Random, int], int]] = None
    stage_sensitive: bool = False
    parts: tuple = field(default=(), repr=False)

    def lt(self, x: int, y: int) -> bool:
        return self.less(x, y)

    def domain_upto(self, bound: int) -> list[int]:
        return [x for x in range(bound + 1) if self.in_domain(x)]

    def first_elements(self, k: int) -> list[int]:
        """The k smallest codes in the domain."""
        out, x = [], 0
        while len(out) < k:
            if self.in_domain(x):
                out.append(x)
            x += 1
        return out

    def sample(self, rng: random.Random, bound: int) -> int:
        if self.random_element is not None:
            return self.random_element(rng, bound)
        while True:
            x = rng.randint(0, bound)
            if self.in_domain(x):
                return x


def _everything(_x: int) -> bool:
    return True


def _uniform(rng: random.Random, bound: int) -> int:
    return rng.randint(0, bound)


# --------------------------------------------------------------------------
# standard presentations
# --------------------------------------------------------------------------

def std_nat() -> CompOrder:
    return CompOrder("nat", _everything, lambda x, y: x < y, random_element=_uniform)


def int_of(code: int) -> int:
    return code // 2 if code % 2 == 0 else -(code // 2) - 1


def code_of_int(z: int) -> int:
    return 2 * z if z >= 0 else -2 * z - 1


def std_int() -> CompOrder:
    return CompOrder(
        "int", _everything, lambda x, y: int_of(x) < int_of(y),
        show=lambda x: str(int_of(x)), random_element=_uniform,
    )


class _RatTable:
    """Reduced fractions p/q ordered by (|p|+q, |p|, q, sign)."""

    def __init__(self):
        self.fracs: list[Fraction] = []
        self.index: dict[Fraction, int] = {}
        self.height = 0

    def _grow(self):
        self.height += 1
        h = self.height
        for a in range(h):
            q = h - a
            if (a == 0 and q != 1) or gcd(a, q) != 1:
                continue
            for p in ((a, -a) if a else (0,)):
                fr = Fraction(p, q)
                self.index[fr] = len(self.fracs)
                self.fracs.append(fr)

    def frac(self, code: int) -> Fraction:
        while code >= len(self.fracs):
            self._grow()
        return self.fracs[code]

    def code(self, fr: Fraction) -> int:
        fr = Fraction(fr)
        while fr not in self.index:
            self._grow()
        return self.index[fr]


RAT = _RatTable()


def rat_of(code: int) -> Fraction:
    return RAT.frac(code)


def code_of_rat(fr) -> int:
    return RAT.code(Fraction(fr))


def std_rat() -> CompOrder:
    return CompOrder(
        "rat", _everything, lambda x, y: RAT.frac(x) < RAT.frac(y),
        show=lambda x: str(RAT.frac(x)), random_element=_uniform,
    )


# --------------------------------------------------------------------------
# combinators
# --------------------------------------------------------------------------

def sum_order(L0: CompOrder, L1: CompOrder) -> CompOrder:
    parts = (L0, L1)

    def dom(x: int) -> bool:
        i, l = unpair(x)
        return i < 2 and parts[i].in_domain(l)

    def less(x: int, y: int) -> bool:
        i, l = unpair(x)
        j, m = unpair(y)
        if i > 1 or j > 1 or not parts[i].in_domain(l) or not parts[j].in_domain(m):
            raise OrderDomainError(f"{x} or {y} is not in {L0.name}+{L1.name}")
        return i < j or (i == j and parts[i].less(l, m))

    def show(x: int) -> str:
        i, l = unpair(x)
        return f"<{i},{parts[i].show(l)}>"

    def rnd(rng, bound):
        i = rng.randint(0, 1)
        return pair(i, parts[i].sample(rng, bound))

    return CompOrder(f"({L0.name}+{L1.name})", dom, less, show, rnd, parts=parts)


def lex(L0: CompOrder, L1: CompOrder) -> CompOrder:
    """L0 x L1: compare first coordinates in L0, break ties in L1."""

    def dom(x: int) -> bool:
        k, m = unpair(x)
        return L0.in_domain(k) and L1.in_domain(m)

    def less(x: int, y: int) -> bool:
        k, m = unpair(x)
        l, n = unpair(y)
        if not (L0.in_domain(k) and L1.in_domain(m) and L0.in_domain(l) and L1.in_domain(n)):
            raise OrderDomainError(f"{x} or {y} is not in {L0.name}x{L1.name}")
        return L0.less(k, l) or (k == l and L1.less(m, n))

    def show(x: int) -> str:
        k, m = unpair(x)
        return f"<{L0.show(k)},{L1.show(m)}>"

    def rnd(rng, bound):
        return pair(L0.sample(rng, bound), L1.sample(rng, bound))

    return CompOrder(f"({L0.name}x{L1.name})", dom, less, show, rnd, parts=(L0, L1))


def reverse(L0: CompOrder) -> CompOrder:
    return CompOrder(
        f"{L0.name}^rev", L0.in_domain, lambda x, y: L0.less(y, x), L0.show,
        L0.random_element, parts=(L0,),
    )


def nat_plus_rat_times_int() -> CompOrder:
    L = sum_order(std_nat(), lex(std_rat(), std_int()))
    return CompOrder("nqz", L.in_domain, L.less, L.show, L.random_element, parts=L.parts)


# --------------------------------------------------------------------------
# the order with a noncomputable-flavoured successor
# --------------------------------------------------------------------------

class ToyInjection:
    """f(0)=3, f(1)=0, f(2)=5, f(k)=2k+4 for k >= 3.

    Range: {0, 3, 5} together with the even numbers >= 10, so membership and
    preimages are decidable.
    """

    name = "toy"

    def __call__(self, k: int) -> int:
        return (3, 0, 5)[k] if k < 3 else 2 * k + 4

    def preimage(self, a: int) -> Optional[int]:
        if a in (3, 0, 5):
            return (3, 0, 5).index(a)
        if a >= 10 and a % 2 == 0:
            return (a - 4) // 2
        return None


class SimpleSetEnumeration:
    """Injective enumeration of a Post-style simple set.

    At stage s every program e <= s that has not contributed yet is tried on
    the new input x = s with budget s; at stages that are powers of two all
    inputs 2e < x <= s are retried with the larger budget.  The first halting
    x > 2e is enumerated (when new) and e is retired.  f(k) is the k-th new
    element.
    """

    name = "simple"

    def __init__(self, machine: pcf.Machine = pcf.DEFAULT):
        self.machine = machine
        self.values: list[int] = []
        self.where: dict[int, int] = {}
        self.retired: set[int] = set()
        self.stage = 0

    def _step(self):
        s = self.stage = self.stage + 1
        sweep = (s & (s - 1)) == 0
        for e in range(s + 1):
            if e in self.retired:
                continue
            xs = range(2 * e + 1, s + 1) if sweep else ((s,) if s > 2 * e else ())
            for x in xs:
                if self.machine.eval(e, x, s).converged:
                    self.retired.add(e)
                    if x not in self.where:
                        self.where[x] = len(self.values)
                        self.values.append(x)
                    break

    def __call__(self, k: int) -> int:
        while len(self.values) <= k:
            self._step()
        return self.values[k]

    def preimage_upto(self, a: int, k_max: int) -> Optional[int]:
        self(k_max)
        k = self.where.get(a)
        return k if k is not None and k <= k_max else None


class PcfFunction:
    """A pcf index used as a total function; divergence is a contract breach."""

    def __init__(self, index: int, budget: int = 100_000):
        self.index, self.budget = index, budget
        self.name = f"prog:{index}"
        self._cache: dict[int, int] = {}

    def __call__(self, k: int) -> int:
        v = self._cache.get(k)
        if v is None:
            out = pcf.run(self.index, k, self.budget)
            if not out.converged:
                raise ContractBreach(f"phi_{self.index}({k}) did not converge in {self.budget} steps")
            v = self._cache[k] = out.value
        return v


def thm4_order(f) -> CompOrder:
    """Evens in natural order, with 2k+1 placed just above 2f(k)."""

    def less(x: int, y: int) -> bool:
        if x % 2 == 0 and y % 2 == 0:
            return x < y
        if x % 2 == 0:
            return x // 2 <= f(y // 2)
        if y % 2 == 0:
            return f(x // 2) < y // 2
        return f(x // 2) < f(y // 2)

    return CompOrder(f"thm4:{getattr(f, 'name', 'f')}", _everything, less,
                     random_element=_uniform, parts=(f,))


# --------------------------------------------------------------------------
# checks and stage-relative queries
# --------------------------------------------------------------------------

def less_matrix(L: CompOrder, sample: Sequence[int]) -> np.ndarray:
    n = len(sample)
    M = np.zeros((n, n), dtype=bool)
    for i, x in enumerate(sample):
        for j, y in enumerate(sample):
            M[i, j] = L.less(x, y)
    return M


def axioms_check(L: CompOrder, sample: Sequence[int]) -> dict:
    """Exhaustive linear-order axiom check over ``sample``.

    Returns ``{"ok": bool, "checked": n, "violation": None | {...}}``.
    Distinct codes are treated as distinct elements.
    """
    sample = list(dict.fromkeys(sample))
    M = less_matrix(L, sample)
    n = len(sample)

    def bad(kind, *idx):
        return {"ok": False, "checked": n, "violation": {"axiom": kind, "elements": [sample[i] for i in idx]}}

    d = np.nonzero(np.diag(M))[0]
    if len(d):
        return bad("irreflexivity", int(d[0]))
    both = np.argwhere(M & M.T)
    if len(both):
        return bad("asymmetry", *map(int, both[0]))
    neither = np.argwhere(~M & ~M.T & ~np.eye(n, dtype=bool))
    if len(neither):
        return bad("totality", *map(int, neither[0]))
    Mi = M.astype(np.int32)
    trans = np.argwhere(((Mi @ Mi) > 0) & ~M)
    if len(trans):
        i, k = map(int, trans[0])
        j = int(np.nonzero(M[i] & M[:, k])[0][0])
        return bad("transitivity", i, j, k)
    return {"ok": True, "checked": n, "violation": None}


def random_triples_check(L: CompOrder, count: int, bound: int, seed: int = 1) -> dict:
    rng = random.Random(seed)
    for _ in range(count):
        x, y, z = (L.sample(rng, bound) for _ in range(3))
        for a, b in ((x, y), (y, z), (x, z)):
            ab, ba = L.less(a, b), L.less(b, a)
            if a == b and (ab or ba):
                return {"ok": False, "violation": {"axiom": "irreflexivity", "elements": [a]}}
            if a != b and ab == ba:
                return {"ok": False, "violation": {"axiom": "asymmetry/totality", "elements": [a, b]}}
        for a, b, c in ((x, y, z), (x, z, y), (y, x, z), (y, z, x), (z, x, y), (z, y, x)):
            if L.less(a, b) and L.less(b, c) and not L.less(a, c):
                return {"ok": False, "violation": {"axiom": "transitivity", "elements": [a, b, c]}}
    return {"ok": True, "checked": count, "violation": None}


def interval_card_bounded(L: CompOrder, a: int, b: int, scan_bound: int) -> int:
    """|{x <= scan_bound : a < x < b}|, a lower bound on |(a, b)_L|."""
    return sum(1 for x in range(scan_bound + 1)
               if L.in_domain(x) and L.less(a, x) and L.less(x, b))


def succ_at_stage(L: CompOrder, x: int, scan_bound: int) -> Optional[int]:
    """Least element above x among codes <= scan_bound (stage-relative)."""
    best = None
    for y in range(scan_bound + 1):
        if L.in_domain(y) and L.less(x, y) and (best is None or L.less(y, best)):
            best = y
    return best


def pred_at_stage(L: CompOrder, x: int, scan_bound: int) -> Optional[int]:
    best = None
    for y in range(scan_bound + 1):
        if L.in_domain(y) and L.less(y, x) and (best is None or L.less(best, y)):
            best = y
    return best


def pred_count_at_stage(L: CompOrder, x: int, scan_bound: int) -> int:
    return sum(1 for y in range(scan_bound + 1) if L.in_domain(y) and L.less(y, x))


# --------------------------------------------------------------------------
# registry
# --------------------------------------------------------------------------

def get_order(name: str, **kw) -> CompOrder:
    """Look up an order by its CLI name."""
    if name == "nat":
        return std_nat()
    if name == "int":
        return std_int()
    if name == "rat":
        return std_rat()
    if name == "nqz":
        return nat_plus_rat_times_int()
    if name == "thm4:toy":
        return thm4_order(ToyInjection())
    if name == "thm4:simple":
        return thm4_order(SimpleSetEnumeration(kw.get("machine", pcf.DEFAULT)))
    if name == "lemma5":
        from . import avoidsucc
        return avoidsucc.default_order(**kw)
    raise KeyError(f"unknown order {name!r}")


ORDER_NAMES = ("nat", "int", "rat", "nqz", "thm4:toy", "thm4:simple", "lemma5")
