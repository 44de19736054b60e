"""Linearizability of traces and bounded linearizability of libraries.

A complete trace is linearizable w.r.t. a regular specification when some
total order of its method events extends happens-before and spells a word of
the specification; an arbitrary trace is linearizable when one of its
completions is.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .automata import DEFAULT_SUBSET_CAP, Nfa
from .memory import (
    Library,
    MethodEvent,
    Trace,
    explore_shapes,
    method_events,
    open_calls,
    ret,
)


@dataclass(frozen=True)
class LinWitness:
    completion: Trace
    events: tuple[MethodEvent, ...]
    order: tuple[int, ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.events[i].label for i in self.order)

    def to_dict(self) -> dict:
        return {
            "completion": [e.to_dict() for e in self.completion],
            "order": list(self.order),
            "labels": list(self.labels),
        }


def _completions_by_subset(trace: Trace):
    # appended returns all follow every call, so their relative order never
    # changes happens-before; one order per subset suffices
    pending = open_calls(trace)
    for closed_count in range(len(pending) + 1):
        for closed in itertools.combinations(pending, closed_count):
            dropped = set(pending) - set(closed)
            body = tuple(e for i, e in enumerate(trace) if i not in dropped)
            yield body + tuple(ret(trace[i].thread) for i in closed)


def linearize_complete(trace: Trace, spec: Nfa) -> tuple[int, ...] | None:
    """A happens-before-respecting order of method events accepted by ``spec``."""
    events, hb = method_events(trace)
    n = len(events)
    preds = [0] * n
    succs = [0] * n
    for a, b in hb:
        preds[b] |= 1 << a
        succs[a] |= 1 << b
    syms = [spec.symbol_id(e.label) for e in events]
    # interchangeable events share label and neighbourhood; try one of each
    signature = [(events[i].label, preds[i], succs[i]) for i in range(n)]
    full = (1 << n) - 1
    failed: dict[int, list[int]] = {}
    order: list[int] = []

    def search(placed: int, states: int) -> bool:
        if placed == full:
            return bool(states & spec.final_mask)
        for bad in failed.get(placed, ()):
            if states & ~bad == 0:
                return False
        tried = set()
        for i in range(n):
            if placed >> i & 1 or preds[i] & ~placed or signature[i] in tried:
                continue
            tried.add(signature[i])
            nxt = spec.image(states, syms[i])
            if not nxt:
                continue
            order.append(i)
            if search(placed | 1 << i, nxt):
                return True
            order.pop()
        failed.setdefault(placed, []).append(states)
        return False

    if search(0, spec.start_mask):
        return tuple(order)
    return None


def trace_linearizable(trace: Trace, spec: Nfa) -> LinWitness | None:
    """Witness completion and order, or ``None`` when the trace is not linearizable."""
    for completion in _completions_by_subset(tuple(trace)):
        order = linearize_complete(completion, spec)
        if order is not None:
            events, _ = method_events(completion)
            return LinWitness(completion, tuple(events), order)
    return None


def canonical_threads(trace: Trace) -> Trace:
    """Rename threads in order of first appearance."""
    names: dict[int, int] = {}
    out = []
    for e in trace:
        t = names.setdefault(e.thread, len(names) + 1)
        out.append(e._replace(thread=t))
    return tuple(out)


@dataclass(frozen=True)
class BoundedResult:
    ok: bool
    counterexample: Trace | None
    traces_checked: int

    @property
    def verdict(self) -> str:
        return "ok" if self.ok else "counterexample"


def library_linearizable_bounded(
    lib: Library, k: int, spec: Nfa, max_steps: int, cap: int = DEFAULT_SUBSET_CAP
) -> BoundedResult:
    """Check every trace of executions with at most ``max_steps`` steps.

    Sound for counterexamples only: ``ok`` means no violation within the bound.
    Traces with the same labels, happens-before and open calls are checked
    once; the counterexample is the first offending representative in
    breadth-first order.
    """
    # linearizability depends only on the shape of a trace
    traces = explore_shapes(lib, k, max_steps, cap=cap)
    for count, trace in enumerate(traces, 1):
        if trace_linearizable(trace, spec) is None:
            return BoundedResult(False, trace, count)
    return BoundedResult(True, None, len(traces))
