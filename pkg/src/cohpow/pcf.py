"""Register machines, their Goedel numbering, and step-bounded evaluation.

Every natural number is a program index.  Instruction set:

    INC r          r += 1
    DJZ r label    if r == 0 jump to label, else r -= 1
    CPY a b        b := a
    HALT

Input is placed in register 0, output is read from register 0.  Jumping past
the last instruction (or running off the end) halts.  One executed
instruction costs one step.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

INC, DJZ, CPY, HALT = "INC", "DJZ", "CPY", "HALT"

Instruction = tuple  # ("INC", r) | ("DJZ", r, label) | ("CPY", a, b) | ("HALT",)


# --------------------------------------------------------------------------
# pairing
# --------------------------------------------------------------------------

def pair(m: int, n: int) -> int:
    """Cantor pairing: (m+n)(m+n+1)/2 + m."""
    s = m + n
    return s * (s + 1) // 2 + m


def unpair(k: int) -> tuple[int, int]:
    s = (math.isqrt(8 * k + 1) - 1) // 2
    m = k - s * (s + 1) // 2
    return m, s - m


def proj1(k: int) -> int:
    return unpair(k)[0]


def proj2(k: int) -> int:
    return unpair(k)[1]


# --------------------------------------------------------------------------
# programs and numbering
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Program:
    instructions: tuple[Instruction, ...]

    def __len__(self) -> int:
        return len(self.instructions)

    def text(self) -> str:
        return "\n".join(" ".join(str(x) for x in ins) for ins in self.instructions)


# the canonical diverging program: register 1 is never touched, so it stays 0
DIVERGE = Program(((DJZ, 1, 0),))


def _ins_code(ins: Instruction) -> int:
    op = ins[0]
    if op == INC:
        return 4 * ins[1]
    if op == DJZ:
        return 4 * pair(ins[1], ins[2]) + 1
    if op == CPY:
        return 4 * pair(ins[1], ins[2]) + 2
    if op == HALT:
        return 3
    raise ValueError(f"unknown instruction {ins!r}")


def _ins_decode(c: int) -> Instruction | None:
    tag, arg = c % 4, c // 4
    if tag == 0:
        return (INC, arg)
    if tag == 1:
        return (DJZ, *unpair(arg))
    if tag == 2:
        return (CPY, *unpair(arg))
    return (HALT,) if arg == 0 else None


def _gamma(x: int) -> str:
    b = bin(x)[2:]
    return "0" * (len(b) - 1) + b


def encode(p: Program | Sequence[Instruction]) -> int:
    """Program -> index.  Instruction codes are Elias-gamma packed into a bit
    string which is read (behind a leading 1) as a binary numeral."""
    ins = p.instructions if isinstance(p, Program) else tuple(p)
    bits = "".join(_gamma(_ins_code(i) + 1) for i in ins)
    return int("1" + bits, 2) - 1


def decode(e: int) -> Program:
    """Index -> program.  Total: malformed codes give ``DIVERGE``."""
    bits = bin(e + 1)[3:]
    out = []
    i, n = 0, len(bits)
    while i < n:
        z = 0
        while i < n and bits[i] == "0":
            z += 1
            i += 1
        if i + z + 1 > n:
            return DIVERGE
        c = int(bits[i:i + z + 1], 2) - 1
        i += z + 1
        ins = _ins_decode(c)
        if ins is None:
            return DIVERGE
        out.append(ins)
    return Program(tuple(out))


_LABEL_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*):\s*(.*)$")


def parse_program(text: str) -> Program:
    """Parse the line format ``INC r`` / ``DJZ r label`` / ``CPY a b`` / ``HALT``.

    Labels are either instruction numbers or names declared as ``name:`` at
    the start of a line.  Blank lines and ``#`` comments are skipped.
    """
    rows: list[list[str]] = []
    labels: dict[str, int] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        while True:
            m = _LABEL_RE.match(line)
            if not m:
                break
            labels[m.group(1)] = len(rows)
            line = m.group(2).strip()
        if line:
            rows.append(line.split())
    out: list[Instruction] = []
    for k, toks in enumerate(rows):
        op = toks[0].upper()
        try:
            if op == INC and len(toks) == 2:
                out.append((INC, int(toks[1])))
            elif op == DJZ and len(toks) == 3:
                tgt = labels[toks[2]] if toks[2] in labels else int(toks[2])
                out.append((DJZ, int(toks[1]), tgt))
            elif op == CPY and len(toks) == 3:
                out.append((CPY, int(toks[1]), int(toks[2])))
            elif op == HALT and len(toks) == 1:
                out.append((HALT,))
            else:
                raise ValueError
        except (ValueError, KeyError):
            raise ValueError(f"bad instruction on line {k}: {' '.join(toks)!r}") from None
    # trailing labels may point one past the end, which halts
    return Program(tuple(out))


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalOutcome:
    value: int | None  # None means still running
    steps_used: int

    @property
    def converged(self) -> bool:
        return self.value is not None


_compiled: dict[int, tuple] = {}


def _compile(e: int) -> tuple:
    prog = _compiled.get(e)
    if prog is None:
        ops = []
        for ins in decode(e).instructions:
            if ins[0] == INC:
                ops.append((0, ins[1], 0))
            elif ins[0] == DJZ:
                ops.append((1, ins[1], ins[2]))
            elif ins[0] == CPY:
                ops.append((2, ins[1], ins[2]))
            else:
                ops.append((3, 0, 0))
        nreg = 1 + max((max(a, b) if op == 2 else a for op, a, b in ops if op != 3), default=0)
        prog = (tuple(ops), max(nreg, 2))
        if len(_compiled) < 100_000:
            _compiled[e] = prog
    return prog


def run(e: int, n: int, s: int) -> EvalOutcome:
    """Run program ``e`` on input ``n`` for at most ``s`` steps."""
    prog, nreg = _compile(e)
    size = len(prog)
    regs = [0] * nreg
    regs[0] = n
    pc = steps = 0
    while pc < size:
        if steps >= s:
            return EvalOutcome(None, steps)
        op, a, b = prog[pc]
        steps += 1
        if op == 0:
            regs[a] += 1
            pc += 1
        elif op == 1:
            if regs[a]:
                regs[a] -= 1
                pc += 1
            elif b == pc:
                # jumping to itself on a zero register never ends
                return EvalOutcome(None, s)
            else:
                pc = b
        elif op == 2:
            regs[b] = regs[a]
            pc += 1
        else:
            break
    return EvalOutcome(regs[0], steps)


def eval(e: int, n: int, s: int) -> EvalOutcome:  # noqa: A001 - mirrors phi_{e,s}(n)
    return run(e, n, s)


def enumerate_ce(e: int, s: int) -> frozenset[int]:
    """W_{e,s} = {n <= s : phi_{e,s}(n) converges}."""
    return frozenset(n for n in range(s + 1) if run(e, n, s).converged)


# --------------------------------------------------------------------------
# templates and builders
# --------------------------------------------------------------------------

def _shift(ins: Iterable[Instruction], offset: int, reg_map=None) -> list[Instruction]:
    rm = reg_map or (lambda r: r)
    out = []
    for i in ins:
        if i[0] == INC:
            out.append((INC, rm(i[1])))
        elif i[0] == DJZ:
            out.append((DJZ, rm(i[1]), i[2] + offset))
        elif i[0] == CPY:
            out.append((CPY, rm(i[1]), rm(i[2])))
        else:
            out.append(i)
    return out


def _max_reg(ins: Sequence[Instruction]) -> int:
    regs = [0, 1]
    for i in ins:
        if i[0] in (INC,):
            regs.append(i[1])
        elif i[0] in (DJZ, CPY):
            regs.append(i[1])
            if i[0] == CPY:
                regs.append(i[2])
    return max(regs)


def build_identity() -> int:
    return encode(Program(()))


def build_diverging() -> int:
    return encode(DIVERGE)


def _constant_ins(c: int, zero: int) -> list[Instruction]:
    # r1 := c by binary doubling, then r0 := r1; register ``zero`` stays 0
    ins: list[Instruction] = []
    for bit in bin(c)[2:] if c else "":
        # r1 := 2*r1 via r2
        base = len(ins)
        ins += [
            (CPY, 1, 2),
            (DJZ, 2, base + 4),
            (INC, 1),
            (DJZ, zero, base + 1),
        ]
        if bit == "1":
            ins.append((INC, 1))
    ins += [(CPY, 1, 0), (HALT,)]
    return ins


def build_constant(c: int) -> int:
    return encode(Program(tuple(_constant_ins(c, 3))))


def build_compose(e1: int, e2: int) -> int:
    """Index of n -> phi_e1(phi_e2(n)); divergence of either propagates.

    The two bodies are laid out one after the other.  Halting inside the
    first body (HALT or a jump past its end) is redirected to the start of
    the second, whose registers other than 0 are cleared first.
    """
    p2 = list(decode(e2).instructions)  # inner, runs first
    p1 = list(decode(e1).instructions)
    zero = max(_max_reg(p1), _max_reg(p2)) + 1
    end2 = len(p2)
    body2: list[Instruction] = []
    for k, i in enumerate(p2):
        if i[0] == HALT or (i[0] == DJZ and i[2] >= end2):
            tgt = end2
            body2.append((DJZ, zero, tgt) if i[0] == HALT else (DJZ, i[1], tgt))
        else:
            body2.append(i)
    # clear registers 1..zero-1 before the outer body
    clear: list[Instruction] = []
    start = end2
    for r in range(1, zero):
        at = start + len(clear)
        clear += [(DJZ, r, at + 2), (DJZ, zero, at)]
    off = end2 + len(clear)
    body1 = _shift(p1, off)
    return encode(Program(tuple(body2 + clear + body1)))


def build_successor() -> int:
    return encode(Program(((INC, 0),)))


def build_double() -> int:
    """n -> 2n."""
    return encode(parse_program("""
        loop: DJZ 0 done
              INC 1
              INC 1
              DJZ 2 loop
        done: CPY 1 0
    """))


def build_add(k: int) -> int:
    """n -> n + k."""
    return encode(Program(tuple((INC, 0) for _ in range(k))))


def build_halt_if_mod(m: int, residues: Iterable[int]) -> int:
    """Halts (with output n) iff n mod m is in ``residues``; loops otherwise."""
    res = set(r % m for r in residues)
    # r1 := n; m decrements in a row, then jump back: about n(1 + 1/m) steps
    ins: list[Instruction] = [(CPY, 0, 1)]
    exits_at = m + 2
    for j in range(m):
        ins.append((DJZ, 1, exits_at + j))
    ins.append((DJZ, 2, 1))
    for j in range(m):
        here = exits_at + j
        if j in res:
            ins.append((DJZ, 2, exits_at + m))  # jump past the end: halt
        else:
            ins.append((DJZ, 2, here))  # tight loop
    return encode(Program(tuple(ins)))


def build_halt_if_ge(k: int) -> int:
    """Halts iff n >= k."""
    ins: list[Instruction] = [(CPY, 0, 1)]
    ins += [(DJZ, 1, k + 2)] * k  # ran out early: go to the loop
    ins.append((DJZ, 2, k + 3))  # survived k decrements: jump past the end
    ins.append((DJZ, 2, k + 2))  # tight loop
    return encode(Program(tuple(ins)))


def build_halt_if_lt(k: int) -> int:
    """Halts iff n < k."""
    ins: list[Instruction] = [(CPY, 0, 1)]
    for j in range(k):
        ins.append((DJZ, 1, k + 2))
    ins.append((DJZ, 2, k + 1))  # n >= k: loop here
    ins.append((HALT,))
    return encode(Program(tuple(ins)))


def build_halt_iff_even() -> int:
    return build_halt_if_mod(2, [0])


# --------------------------------------------------------------------------
# machine handle
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Machine:
    """An enumeration phi_0, phi_1, ... used by constructions that quantify
    over all programs.  ``slots[e]`` overrides the raw numbering at small e;
    indices beyond the slots continue with the raw numbering."""

    slots: tuple[int, ...] = ()

    def index(self, e: int) -> int:
        if e < len(self.slots):
            return self.slots[e]
        return e - len(self.slots)

    def eval(self, e: int, n: int, s: int) -> EvalOutcome:
        return run(self.index(e), n, s)

    def ce(self, e: int, s: int) -> frozenset[int]:
        return enumerate_ce(self.index(e), s)


RAW = Machine()


def default_slots() -> tuple[int, ...]:
    """Templates placed in front of the raw numbering.

    Slot 0 is the successor function, so the first program already tracks
    successors in the natural order.  Only a few slots hold sets that are
    infinite and co-infinite; every such set thins the co-maximal complement
    by its density, and the raw numbering that follows is mostly N or empty.
    """
    return (
        build_successor(),
        build_halt_iff_even(),
        build_halt_if_ge(10),
        build_halt_if_lt(40),
        build_identity(),
        build_diverging(),
        build_add(2),
        build_double(),
        build_halt_if_mod(3, [1]),
    )


DEFAULT = Machine(default_slots())
