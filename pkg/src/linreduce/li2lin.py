"""Compile a Letter Insertion instance into a library, a thread count and a spec.

Insertable letter ``a_i`` becomes method ``M<i>`` (read Begin, then read End),
base letter ``g`` becomes ``M_<g>`` (read Run) and ``M_Tick`` writes Run and
then End.  With ``l`` insertables the system runs ``l + 2`` threads.  The
library has a non-linearizable trace exactly when some word over Γ admits no
insertion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .automata import Alphabet, InputError, Nfa, NfaBuilder, relabel, union
from .insertion import InsertionInstance
from .memory import Library, Method, Step, Trace, replay

BEGIN, RUN, END = "Begin", "Run", "End"
TICK = "M_Tick"


def insertable_method(i: int) -> str:
    return f"M{i}"


def gamma_method(symbol: str) -> str:
    return f"M_{symbol}"


@dataclass(frozen=True)
class ReducedSystem:
    library: Library
    threads: int
    spec: Nfa


def _names(inst: InsertionInstance) -> tuple[list[str], list[str]]:
    ins = [insertable_method(i) for i in range(1, len(inst.insertables) + 1)]
    gam = [gamma_method(g) for g in inst.base]
    if TICK in gam or len(set(ins + gam)) != len(ins) + len(gam):
        raise InputError("base letters produce clashing method names")
    return ins, gam


def build_library(inst: InsertionInstance) -> tuple[Library, int]:
    ins, gam = _names(inst)
    methods = [Method(name, ("q0", "q1", "q2"), (("q0", "read", BEGIN, "q1"), ("q1", "read", END, "q2")), "q0", "q2") for name in ins]
    methods += [Method(name, ("q0", "q1"), (("q0", "read", RUN, "q1"),), "q0", "q1") for name in gam]
    methods.append(Method(TICK, ("q0", "q1", "q2"), (("q0", "write", RUN, "q1"), ("q1", "write", END, "q2")), "q0", "q2"))
    return Library(tuple(methods), (BEGIN, RUN, END), BEGIN), len(ins) + 2


def _not_exactly_once(sigma: Alphabet, tracked: str) -> Nfa:
    # counter 0 / 1 / >=2 on the tracked letter, accepting at 0 and >=2
    b = NfaBuilder(sigma)
    zero, one, many = b.state(), b.state(), b.state()
    others = [s for s in sigma if s != tracked]
    for q in (zero, one, many):
        b.loop(q, others)
    b.edge(zero, tracked, one)
    b.edge(one, tracked, many)
    b.loop(many, tracked)
    return b.build([zero], [zero, many])


def build_spec(inst: InsertionInstance) -> Nfa:
    ins, gam = _names(inst)
    sigma = Alphabet(ins + gam + [TICK])
    parts = [_not_exactly_once(sigma, TICK)]
    parts += [_not_exactly_once(sigma, name) for name in ins]
    mapping = {a: name for a, name in zip(inst.insertables, ins)}
    mapping.update({g: name for g, name in zip(inst.base, gam)})
    projected = relabel(inst.nfa, mapping, sigma)
    loops = tuple((q, TICK, q) for q in range(projected.state_count))
    parts.append(Nfa(sigma, projected.state_count, projected.transitions + loops, projected.initial, projected.final))
    spec = union(*parts)
    return Nfa(sigma, spec.state_count, spec.transitions, spec.initial, spec.final)


def reduce(inst: InsertionInstance) -> ReducedSystem:
    lib, k = build_library(inst)
    return ReducedSystem(lib, k, build_spec(inst))


def fig4_schedule(inst: InsertionInstance, word: Iterable[str]) -> list[Step]:
    """The canonical execution for ``word``: every ``M<i>`` and ``M_Tick``
    spans the whole run while the ``M_<g>`` calls run back to back on the
    last thread between the two writes of ``M_Tick``."""
    ins, _ = _names(inst)
    word = tuple(word)
    for g in word:
        if g not in inst.base:
            raise InputError(f"letter {g!r} not in Γ")
    l = len(ins)
    tick, seq_thread = l + 1, l + 2
    steps: list[Step] = []
    for i, name in enumerate(ins, 1):
        steps += [Step(i, "call", name), Step(i, "read", BEGIN)]
    steps += [Step(tick, "call", TICK), Step(tick, "write", RUN)]
    for g in word:
        steps += [Step(seq_thread, "call", gamma_method(g)), Step(seq_thread, "read", RUN), Step(seq_thread, "ret", None)]
    steps.append(Step(tick, "write", END))
    for i in range(1, l + 1):
        steps += [Step(i, "read", END), Step(i, "ret", None)]
    steps.append(Step(tick, "ret", None))
    return steps


def fig4_execution(inst: InsertionInstance, word: Iterable[str]) -> tuple[list[Step], Trace]:
    """Schedule and trace of the canonical execution; replay validates every step."""
    lib, k = build_library(inst)
    steps = fig4_schedule(inst, word)
    trace, _ = replay(lib, k, steps)
    return steps, trace
