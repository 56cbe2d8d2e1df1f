"""A small first-order language over <, = and a ternary P.

Grammar (loosest first)::

    formula := unary ('->' formula)?          right associative
             | formula '|' formula            left associative
             | formula '&' formula            left associative
    unary   := '!' unary | ('EXISTS'|'FORALL') var '.' unary | atom | '(' formula ')'
    atom    := term '<' term | term '=' term | 'P' '(' term ',' term ',' term ')'
    term    := var | natural

Quantifiers bind as tightly as negation, so ``EXISTS w . P(x,w,y) & q``
quantifies only the first conjunct.

Evaluation is three-valued.  A quantifier searches codes up to a bound;
whether an exhausted search may conclude (an existential failing, a
universal succeeding) is declared by the caller through ``complete``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Union

from .cohesive import Horizon, Verdict, almost_inclusion

Truth = Optional[bool]


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: int


Term = Union[Var, Const]


@dataclass(frozen=True)
class Atom:
    rel: str  # "<", "=", "P"
    args: tuple


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Quant:
    kind: str  # "E" or "A"
    var: str
    body: "Formula"


Formula = Union[Atom, Not, And, Or, Imp, Quant]


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset(t.name for t in f.args if isinstance(t, Var))
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, Quant):
        return free_vars(f.body) - {f.var}
    return free_vars(f.left) | free_vars(f.right)


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

class FormulaSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(->)|(EXISTS|FORALL)\b|(P)(?=\s*\()|([a-z][a-z0-9]*)|(\d+)|([()<=&|!.,]))")


def _tokens(text: str) -> list[tuple[str, str, int]]:
    out, i = [], 0
    while i < len(text):
        if text[i:].strip() == "":
            break
        m = _TOKEN.match(text, i)
        if not m:
            j = i + len(text[i:]) - len(text[i:].lstrip())
            raise FormulaSyntaxError(f"unexpected character {text[j]!r}", j)
        pos = m.start(m.lastindex)
        kind = ("op", "quant", "P", "var", "num", "op")[m.lastindex - 1]
        out.append((kind, m.group(m.lastindex), pos))
        i = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, val: str | None = None, kind: str | None = None):
        k, v, pos = self.toks[self.i]
        if (val is not None and v != val) or (kind is not None and k != kind):
            want = repr(val) if val else kind
            raise FormulaSyntaxError(f"expected {want}, found {v or 'end of input'!r}", pos)
        self.i += 1
        return v

    def formula(self) -> Formula:
        left = self.disj()
        if self.peek()[1] == "->":
            self.take("->")
            return Imp(left, self.formula())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek()[1] == "|":
            self.take("|")
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek()[1] == "&":
            self.take("&")
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        k, v, pos = self.peek()
        if v == "!":
            self.take("!")
            return Not(self.unary())
        if k == "quant":
            self.take()
            var = self.take(kind="var")
            self.take(".")
            return Quant("E" if v == "EXISTS" else "A", var, self.unary())
        if v == "(":
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        if k == "P":
            self.take()
            self.take("(")
            a = self.term()
            self.take(",")
            b = self.term()
            self.take(",")
            c = self.term()
            self.take(")")
            return Atom("P", (a, b, c))
        left = self.term()
        k2, op, pos2 = self.peek()
        if op not in ("<", "="):
            raise FormulaSyntaxError(f"expected '<' or '=', found {op or 'end of input'!r}", pos2)
        self.take()
        return Atom(op, (left, self.term()))

    def term(self) -> Term:
        k, v, pos = self.peek()
        if k == "var":
            self.take()
            return Var(v)
        if k == "num":
            self.take()
            return Const(int(v))
        raise FormulaSyntaxError(f"expected a term, found {v or 'end of input'!r}", pos)


def parse(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    k, v, pos = p.peek()
    if k != "end":
        raise FormulaSyntaxError(f"unexpected {v!r}", pos)
    return f


# --------------------------------------------------------------------------
# printer
# --------------------------------------------------------------------------

_PREC = {Imp: 1, Or: 2, And: 3, Not: 4, Quant: 4, Atom: 5}


def _term(t: Term) -> str:
    return t.name if isinstance(t, Var) else str(t.value)


def to_text(f: Formula) -> str:
    def wrap(g: Formula, need: int) -> str:
        s = to_text(g)
        return f"({s})" if _PREC[type(g)] < need else s

    if isinstance(f, Atom):
        if f.rel == "P":
            return "P(" + ",".join(_term(t) for t in f.args) + ")"
        return f"{_term(f.args[0])} {f.rel} {_term(f.args[1])}"
    if isinstance(f, Not):
        return "!" + wrap(f.body, 4)
    if isinstance(f, Quant):
        q = "EXISTS" if f.kind == "E" else "FORALL"
        return f"{q} {f.var} . " + wrap(f.body, 4)
    if isinstance(f, Imp):
        return wrap(f.left, 2) + " -> " + wrap(f.right, 1)
    if isinstance(f, Or):
        return wrap(f.left, 2) + " | " + wrap(f.right, 3)
    return wrap(f.left, 3) + " & " + wrap(f.right, 4)


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    level: str  # "QF", "BC1", "Sigma<n>", "Pi<n>"
    sigma: int  # least n with a prenex Sigma_n form (0 for quantifier-free)
    pi: int

    @property
    def at_most_bc1(self) -> bool:
        return self.level in ("QF", "BC1", "Sigma1", "Pi1")

    def __str__(self):
        return self.level


def prefix_levels(f: Formula) -> tuple[int, int]:
    """(sigma, pi): least prenex Sigma_n and Pi_n levels of f."""
    if isinstance(f, Atom):
        return 0, 0
    if isinstance(f, Not):
        s, p = prefix_levels(f.body)
        return p, s
    if isinstance(f, Quant):
        s, p = prefix_levels(f.body)
        if f.var not in free_vars(f.body):
            return s, p
        if f.kind == "E":
            s = max(1, s)
            return s, s + 1
        p = max(1, p)
        return p + 1, p
    l, r = f.left, f.right
    if isinstance(f, Imp):
        l = Not(l)
    sl, pl = prefix_levels(l)
    sr, pr = prefix_levels(r)
    return max(sl, sr), max(pl, pr)


def _is_bc1(f: Formula) -> bool:
    if isinstance(f, (Atom, Quant)):
        s, p = prefix_levels(f)
        return min(s, p) <= 1
    if isinstance(f, Not):
        return _is_bc1(f.body)
    return _is_bc1(f.left) and _is_bc1(f.right)


def classify(f: Formula) -> Classification:
    s, p = prefix_levels(f)
    if s == 0 and p == 0:
        return Classification("QF", 0, 0)
    if s == 1:
        return Classification("Sigma1", s, p)
    if p == 1:
        return Classification("Pi1", s, p)
    if _is_bc1(f):
        return Classification("BC1", s, p)
    if s <= p:
        return Classification(f"Sigma{s}", s, p)
    return Classification(f"Pi{p}", s, p)


# --------------------------------------------------------------------------
# evaluation over a base structure
# --------------------------------------------------------------------------

Bound = Union[int, Mapping[str, int]]
Complete = Union[bool, Iterable[str]]


def _bound_for(bound: Bound, var: str) -> int:
    if isinstance(bound, int):
        return bound
    return bound.get(var, bound.get("*", 0))


def _is_complete(complete: Complete, var: str) -> bool:
    if isinstance(complete, bool):
        return complete
    return var in complete


class _Eval:
    def __init__(self, struct, bound: Bound, complete: Complete):
        self.s = struct
        self.bound = bound
        self.complete = complete
        self.in_domain: Callable[[int], bool] = getattr(struct, "in_domain", lambda x: True)

    def term(self, t: Term, env) -> int:
        if isinstance(t, Const):
            return t.value
        try:
            return env[t.name]
        except KeyError:
            raise ValueError(f"variable {t.name} is unassigned") from None

    def domain(self, q: Quant, env) -> tuple[Iterable[int], bool]:
        """Candidates for q's variable and whether they are exhaustive."""
        hook = getattr(self.s, "quantifier_domain", None)
        if hook is not None:
            got = hook(q, env, self)
            if got is not None:
                return got
        b = _bound_for(self.bound, q.var)
        return (x for x in range(b + 1) if self.in_domain(x)), _is_complete(self.complete, q.var)

    def ev(self, f: Formula, env) -> tuple[Truth, Optional[int]]:
        if isinstance(f, Atom):
            vals = [self.term(t, env) for t in f.args]
            if f.rel == "=":
                return vals[0] == vals[1], None
            if f.rel == "<":
                return self.s.less(vals[0], vals[1]), None
            return self.s.p_holds(*vals), None
        if isinstance(f, Not):
            v, _ = self.ev(f.body, env)
            return (None if v is None else not v), None
        if isinstance(f, Quant):
            cand, complete = self.domain(f, env)
            want = f.kind == "E"
            unknown = False
            for x in cand:
                env2 = dict(env)
                env2[f.var] = x
                v, _ = self.ev(f.body, env2)
                if v is want:
                    return want, x
                if v is None:
                    unknown = True
            if unknown or not complete:
                return None, None
            return (not want), None
        if isinstance(f, Imp):
            return self.ev(Or(Not(f.left), f.right), env)
        a, wa = self.ev(f.left, env)
        if isinstance(f, And):
            if a is False:
                return False, wa
            b, wb = self.ev(f.right, env)
            if b is False:
                return False, wb
            return (True if a and b else None), wa if wa is not None else wb
        if a is True:
            return True, wa
        b, wb = self.ev(f.right, env)
        if b is True:
            return True, wb
        return (False if a is False and b is False else None), None


def eval_base(struct, f: Formula, assignment: Mapping[str, int] | None = None,
              search_bound: Bound = 100, complete: Complete = False) -> Verdict:
    """Three-valued truth of f in ``struct`` under ``assignment``.

    ``struct`` needs ``less`` (and ``p_holds`` for P atoms); optional
    ``in_domain`` restricts quantifier ranges and an optional
    ``quantifier_domain(q, env, evaluator)`` hook may supply an exhaustive
    candidate list for a quantifier.  ``search_bound`` is an int or a
    per-variable mapping (key "*" for the rest).
    """
    env = dict(assignment or {})
    missing = free_vars(f) - set(env)
    if missing:
        raise ValueError(f"unassigned free variables: {sorted(missing)}")
    top = search_bound if isinstance(search_bound, int) else max(search_bound.values(), default=0)
    h = Horizon(window_bound=max(top, 0), step_budget=1, tail_window=1, cut=0)
    v, w = _Eval(struct, search_bound, complete).ev(f, env)
    return Verdict(v, h, w, {"search_bound": search_bound if isinstance(search_bound, int) else dict(search_bound)})


# --------------------------------------------------------------------------
# evaluation in a cohesive power
# --------------------------------------------------------------------------

class NotBC1(ValueError):
    def __init__(self, cls: Classification):
        super().__init__(f"formula classifies as {cls.level}, not a Boolean combination of Sigma1 and Pi1")
        self.classification = cls


def eval_power_bc1(ctx, f: Formula, assignment: Mapping[str, object], h: Horizon | None = None,
                   slack: int = 2, complete: Complete = True) -> Verdict:
    """Almost-inclusion verdict for {n : base |= f(a_1(n), ...)}.

    At each included point the free variables take the elements' values
    and quantifiers search codes up to ``slack * max(values) + slack``.
    """
    cls = classify(f)
    if not cls.at_most_bc1:
        raise NotBC1(cls)
    missing = free_vars(f) - set(assignment)
    if missing:
        raise ValueError(f"unassigned free variables: {sorted(missing)}")
    h = h or ctx.horizon
    consts = [t.value for t in _consts(f)]

    def pred(n: int) -> Truth:
        env = {}
        for v in free_vars(f):
            x = assignment[v].value(n, h.step_budget)
            if x is None:
                return None
            env[v] = x
        top = max(list(env.values()) + consts + [0])
        return eval_base(ctx.base, f, env, slack * top + slack, complete).value

    return almost_inclusion(pred, ctx.view, h)


def _consts(f: Formula) -> list[Const]:
    if isinstance(f, Atom):
        return [t for t in f.args if isinstance(t, Const)]
    if isinstance(f, (Not, Quant)):
        return _consts(f.body)
    return _consts(f.left) + _consts(f.right)


def strip_prefix(f: Formula) -> tuple[list[tuple[str, str]], Formula]:
    """Leading quantifier block and the matrix below it."""
    prefix = []
    while isinstance(f, Quant):
        prefix.append((f.kind, f.var))
        f = f.body
    return prefix, f


def eval_power_prenex(ctx, f: Formula, sample: list, closure: Callable[[dict], list] | None = None,
                      h: Horizon | None = None, complete: Complete = True) -> Verdict:
    """Spot check of a prenex sentence in the power over a finite element sample.

    Every variable ranges over ``sample`` plus ``closure(env)``, elements
    built from those already chosen.  The BC1 matrix is judged by ``eval_power_bc1``.  True / False
    here are evidence relative to the sample, not proofs.
    """
    prefix, matrix = strip_prefix(f)
    if free_vars(f):
        raise ValueError("expected a sentence")
    closure = closure or (lambda env: [])
    h = h or ctx.horizon

    def go(i: int, env: dict) -> tuple[Truth, Optional[str]]:
        if i == len(prefix):
            return eval_power_bc1(ctx, matrix, env, h, complete=complete).value, None
        kind, var = prefix[i]
        want = kind == "E"
        dom = list(sample) + closure(env)
        unknown = False
        for a in dom:
            env2 = dict(env)
            env2[var] = a
            v, _ = go(i + 1, env2)
            if v is want:
                return want, a.name
            if v is None:
                unknown = True
        return (None, None) if unknown else (not want, None)

    v, w = go(0, {})
    return Verdict(v, h, None, {"witness_element": w, "sample": [a.name for a in sample]})


# --------------------------------------------------------------------------
# named formulas
# --------------------------------------------------------------------------

PHI_TEXT = "EXISTS w . P({x},w,{y}) & !EXISTS u . P({y},u,{x})"


def phi_text(x: str = "x", y: str = "y") -> str:
    return "(" + PHI_TEXT.format(x=x, y=y) + ")"


def theta_text(x: str = "x", t: str = "t") -> str:
    return f"EXISTS {t} . ({phi_text(x, t)} | {phi_text(t, x)})"


def psi_text() -> str:
    return f"EXISTS x . ({theta_text('x', 't')} & FORALL y . ({theta_text('y', 's')} -> {phi_text('y', 'x')}))"


SUCC_TEXT = "FORALL x . EXISTS y . (x < y & FORALL z . !(x < z & z < y))"


def load_corpus(text: str) -> list[tuple[str, Formula]]:
    """Corpus lines: ``# name`` comments name the formula on the next line."""
    out, name = [], None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            name = line[1:].strip()
            continue
        out.append((name or f"formula{len(out)}", parse(line)))
        name = None
    return out
