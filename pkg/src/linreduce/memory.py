"""Finite-state libraries over one shared variable, run by ``k`` threads.

A thread is either idle or inside a method at some local state.  Four kinds
of steps exist: call (idle thread enters a method's initial state), return
(thread at the method's final state goes idle), read (enabled only when the
guessed value equals the shared value) and write.  Only calls and returns
are visible in traces.
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from typing import NamedTuple

from .automata import InputError, ResourceError

READ, WRITE = "read", "write"


@dataclass(frozen=True)
class Method:
    name: str
    states: tuple[str, ...]
    delta: tuple[tuple[str, str, str, str], ...]
    initial: str
    final: str

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "delta", tuple(tuple(t) for t in self.delta))
        known = set(self.states)
        if self.initial not in known or self.final not in known:
            raise InputError(f"method {self.name}: initial/final must be states")
        for src, op, _value, dst in self.delta:
            if src not in known or dst not in known:
                raise InputError(f"method {self.name}: transition endpoint not a state")
            if op not in (READ, WRITE):
                raise InputError(f"method {self.name}: unknown instruction {op!r}")


@dataclass(frozen=True)
class Library:
    methods: tuple[Method, ...]
    domain: tuple[str, ...]
    initial_value: str

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "domain", tuple(self.domain))
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise InputError("method names must be unique")
        if self.initial_value not in self.domain:
            raise InputError("initial value must belong to the domain")
        for m in self.methods:
            for _s, _op, value, _d in m.delta:
                if value not in self.domain:
                    raise InputError(f"method {m.name}: value {value!r} outside the domain")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.methods)

    def method(self, name: str) -> Method:
        for m in self.methods:
            if m.name == name:
                return m
        raise InputError(f"no method named {name!r}")

    def to_dict(self) -> dict:
        return {
            "domain": list(self.domain),
            "initial_value": self.initial_value,
            "methods": [
                {
                    "name": m.name,
                    "states": list(m.states),
                    "initial": m.initial,
                    "final": m.final,
                    "delta": [list(t) for t in m.delta],
                }
                for m in self.methods
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> Library:
        try:
            methods = tuple(
                Method(m["name"], tuple(m["states"]), tuple(tuple(t) for t in m["delta"]), m["initial"], m["final"])
                for m in data["methods"]
            )
            return cls(methods, tuple(data["domain"]), data["initial_value"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed library object: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> Library:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Configuration:
    shared: str
    # entry i is thread i + 1: None when idle, else (method index, local state)
    threads: tuple

    @classmethod
    def initial(cls, lib: Library, k: int) -> Configuration:
        return cls(lib.initial_value, (None,) * k)

    def with_thread(self, thread: int, status, shared: str | None = None) -> Configuration:
        threads = list(self.threads)
        threads[thread - 1] = status
        return Configuration(self.shared if shared is None else shared, tuple(threads))


class Event(NamedTuple):
    kind: str  # "call" or "ret"
    thread: int
    method: str | None = None

    def to_dict(self) -> dict:
        return {"call": [self.thread, self.method]} if self.kind == "call" else {"ret": self.thread}

    def __str__(self) -> str:
        return f"call({self.thread},{self.method})" if self.kind == "call" else f"ret({self.thread})"


def call(thread: int, method: str) -> Event:
    return Event("call", thread, method)


def ret(thread: int) -> Event:
    return Event("ret", thread)


Trace = tuple[Event, ...]


def check_trace(trace: Iterable[Event]) -> Trace:
    """Validate per-thread alternation; return the trace as a tuple."""
    trace = tuple(trace)
    open_calls: dict[int, bool] = {}
    for i, e in enumerate(trace):
        if e.kind == "call":
            if open_calls.get(e.thread):
                raise InputError(f"event {i}: thread {e.thread} calls while a call is open")
            if not e.method:
                raise InputError(f"event {i}: call without a method name")
            open_calls[e.thread] = True
        elif e.kind == "ret":
            if not open_calls.get(e.thread):
                raise InputError(f"event {i}: thread {e.thread} returns without an open call")
            open_calls[e.thread] = False
        else:
            raise InputError(f"event {i}: unknown event kind {e.kind!r}")
    return trace


def trace_to_json(trace: Trace) -> str:
    return json.dumps([e.to_dict() for e in trace], ensure_ascii=False)


def trace_from_json(text: str) -> Trace:
    data = json.loads(text)
    if not isinstance(data, list):
        raise InputError("a trace is a JSON list of events")
    events = []
    for item in data:
        try:
            if isinstance(item, dict) and "call" in item:
                thread, method = item["call"]
                events.append(call(int(thread), str(method)))
            elif isinstance(item, dict) and "ret" in item:
                events.append(ret(int(item["ret"])))
            else:
                raise InputError(f"unknown trace item {item!r}")
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed trace item {item!r}") from exc
    return check_trace(events)


def open_calls(trace: Trace) -> list[int]:
    """Indices of call events without a matching return."""
    pending: dict[int, int] = {}
    for i, e in enumerate(trace):
        if e.kind == "call":
            pending[e.thread] = i
        else:
            pending.pop(e.thread, None)
    return sorted(pending.values())


def is_complete(trace: Trace) -> bool:
    return not open_calls(trace)


# -- operational semantics -----------------------------------------------


class Step(NamedTuple):
    thread: int
    kind: str  # call / ret / read / write
    arg: str | None  # method name for calls, value for reads/writes

    @property
    def event(self) -> Event | None:
        if self.kind == "call":
            return call(self.thread, self.arg)
        if self.kind == "ret":
            return ret(self.thread)
        return None


def successors(lib: Library, k: int, cfg: Configuration) -> list[tuple[Step, Configuration]]:
    """All steps enabled in ``cfg``, ordered by thread, step kind, then transition order."""
    out = []
    for thread in range(1, k + 1):
        status = cfg.threads[thread - 1]
        if status is None:
            for j, m in enumerate(lib.methods):
                out.append((Step(thread, "call", m.name), cfg.with_thread(thread, (j, m.initial))))
            continue
        j, q = status
        m = lib.methods[j]
        if q == m.final:
            out.append((Step(thread, "ret", None), cfg.with_thread(thread, None)))
        for kind in (READ, WRITE):
            for src, op, value, dst in m.delta:
                if src != q or op != kind:
                    continue
                if kind == READ and value == cfg.shared:
                    out.append((Step(thread, READ, value), cfg.with_thread(thread, (j, dst))))
                elif kind == WRITE:
                    out.append((Step(thread, WRITE, value), cfg.with_thread(thread, (j, dst), shared=value)))
    return out


def apply_step(lib: Library, k: int, cfg: Configuration, step: Step) -> Configuration:
    for s, nxt in successors(lib, k, cfg):
        if s == step:
            return nxt
    raise InputError(f"step {step} is not enabled")


def replay(lib: Library, k: int, steps: Iterable[Step]) -> tuple[Trace, Configuration]:
    """Run an explicit schedule from the initial configuration."""
    cfg = Configuration.initial(lib, k)
    trace = []
    for step in steps:
        cfg = apply_step(lib, k, cfg, step)
        if step.event is not None:
            trace.append(step.event)
    return tuple(trace), cfg


def is_trace_of(lib: Library, k: int, trace: Trace, max_steps: int | None = None) -> bool:
    """Whether some execution (optionally of bounded length) has this trace."""
    # search nodes: (events matched so far, configuration)
    layer = {(0, Configuration.initial(lib, k))}
    seen = set(layer)
    depth = 0
    while layer:
        if any(n == len(trace) for n, _ in layer):
            return True
        if max_steps is not None and depth >= max_steps:
            return False
        nxt = set()
        for n, c in layer:
            for step, c2 in successors(lib, k, c):
                ev = step.event
                if ev is None:
                    node = (n, c2)
                elif n < len(trace) and trace[n] == ev:
                    node = (n + 1, c2)
                else:
                    continue
                if node not in seen:
                    seen.add(node)
                    nxt.add(node)
        layer = nxt
        depth += 1
    return False


def _move_table(lib: Library) -> dict[tuple[int, str], list[tuple[str, str | None, str]]]:
    """Per (method index, local state): moves in :func:`successors` order."""
    table = {}
    for j, m in enumerate(lib.methods):
        for q in m.states:
            moves: list[tuple[str, str | None, str]] = [("ret", None, q)] if q == m.final else []
            for kind in (READ, WRITE):
                moves += [(kind, value, dst) for src, op, value, dst in m.delta if src == q and op == kind]
            table[(j, q)] = moves
    return table


def enumerate_traces(
    lib: Library, k: int, max_steps: int, cap: int = 1 << 21, canonical: bool = False
) -> list[Trace]:
    """Traces of all executions with at most ``max_steps`` steps.

    Returned in discovery order (breadth-first, steps in :func:`successors`
    order), without duplicates.  With ``canonical`` only traces whose threads
    are numbered in order of first call are produced; every trace is a
    renaming of one of those, since threads are interchangeable.
    """
    if max_steps < 0:
        raise InputError("max_steps must be non-negative")
    moves = _move_table(lib)
    calls = [[(call(t, m.name), (j, m.initial)) for j, m in enumerate(lib.methods)] for t in range(1, k + 1)]
    rets = [ret(t) for t in range(1, k + 1)]
    # search nodes: (trace, shared value, thread statuses, next fresh thread)
    start = ((), lib.initial_value, (None,) * k, 1)
    seen = {start[:3]}
    found: dict[Trace, None] = {(): None}
    layer = [start]
    for _ in range(max_steps):
        nxt = []
        for trace, shared, threads, fresh in layer:
            for t in range(k):
                status = threads[t]
                if status is None:
                    if canonical and t + 1 > fresh:
                        continue
                    for ev, entry in calls[t]:
                        node = (trace + (ev,), shared, threads[:t] + (entry,) + threads[t + 1 :])
                        if node not in seen:
                            seen.add(node)
                            nxt.append(node + (max(fresh, t + 2),))
                            found.setdefault(node[0], None)
                    continue
                j = status[0]
                for kind, value, dst in moves[status]:
                    if kind == "ret":
                        node = (trace + (rets[t],), shared, threads[:t] + (None,) + threads[t + 1 :])
                        found.setdefault(node[0], None)
                    elif kind == READ:
                        if value != shared:
                            continue
                        node = (trace, shared, threads[:t] + ((j, dst),) + threads[t + 1 :])
                    else:
                        node = (trace, value, threads[:t] + ((j, dst),) + threads[t + 1 :])
                    if node not in seen:
                        seen.add(node)
                        nxt.append(node + (fresh,))
        if len(seen) > cap:
            raise ResourceError("trace enumeration frontier", cap)
        layer = nxt
        if not layer:
            break
    return list(found)


def trace_shape(trace: Trace) -> tuple:
    """Key equal for traces with the same labels, happens-before and open calls.

    The trace is cut into maximal blocks of calls and of returns; reordering
    inside a block changes neither happens-before nor which calls are open.
    Each call is described by its call block, label and return block (-1
    while open).
    """
    block = []
    b = -1
    prev = None
    for e in trace:
        if e.kind != prev:
            b += 1
            prev = e.kind
        block.append(b)
    ret_block: dict[int, int] = {}
    open_call: dict[int, int] = {}
    for i, e in enumerate(trace):
        if e.kind == "call":
            open_call[e.thread] = i
        else:
            ret_block[open_call.pop(e.thread)] = block[i]
    return tuple(sorted((block[i], e.method, ret_block.get(i, -1)) for i, e in enumerate(trace) if e.kind == "call"))


def explore_shapes(lib: Library, k: int, max_steps: int, cap: int = 1 << 21) -> list[Trace]:
    """One representative trace per :func:`trace_shape` reachable within
    ``max_steps`` steps, in breadth-first discovery order.

    Search nodes forget thread names and the order inside blocks: a node is
    the shape, the shared value and the multiset of (thread status, block of
    the thread's open call).  Nodes that agree on these have the same future
    shapes.
    """
    if max_steps < 0:
        raise InputError("max_steps must be non-negative")
    moves = _move_table(lib)
    names = lib.names
    idle = ()

    def key(shape, shared, threads, opens):
        return shape, shared, tuple(sorted(zip(threads, opens)))

    # (trace, shape, shared, thread statuses, open-call blocks)
    start = ((), (), lib.initial_value, (idle,) * k, (-1,) * k)
    seen = {key(*start[1:])}
    found: dict[tuple, Trace] = {(): ()}
    layer = [start]
    for _ in range(max_steps):
        nxt = []
        for trace, shape, shared, threads, opens in layer:
            last = trace[-1].kind if trace else None
            top = max((max(c, r) for c, _, r in shape), default=-1)
            for t in range(k):
                status = threads[t]
                if status == idle:
                    cb = top if last == "call" else top + 1
                    for j, m in enumerate(lib.methods):
                        new_shape = tuple(sorted(shape + ((cb, m.name, -1),)))
                        node = (
                            trace + (call(t + 1, m.name),),
                            new_shape,
                            shared,
                            threads[:t] + ((j, m.initial),) + threads[t + 1 :],
                            opens[:t] + (cb,) + opens[t + 1 :],
                        )
                        nxt += _visit(node, key, seen, found)
                    continue
                j = status[0]
                for kind, value, dst in moves[status]:
                    if kind == "ret":
                        rb = top if last == "ret" else top + 1
                        closed = list(shape)
                        closed.remove((opens[t], names[j], -1))
                        node = (
                            trace + (ret(t + 1),),
                            tuple(sorted(closed + [(opens[t], names[j], rb)])),
                            shared,
                            threads[:t] + (idle,) + threads[t + 1 :],
                            opens[:t] + (-1,) + opens[t + 1 :],
                        )
                    elif kind == READ:
                        if value != shared:
                            continue
                        node = (trace, shape, shared, threads[:t] + ((j, dst),) + threads[t + 1 :], opens)
                    else:
                        node = (trace, shape, value, threads[:t] + ((j, dst),) + threads[t + 1 :], opens)
                    nxt += _visit(node, key, seen, found)
        if len(seen) > cap:
            raise ResourceError("shape exploration frontier", cap)
        layer = nxt
        if not layer:
            break
    return list(found.values())


def _visit(node, key, seen, found) -> list:
    k = key(*node[1:])
    if k in seen:
        return []
    seen.add(k)
    found.setdefault(node[1], node[0])
    return [node]


# -- completions and method events --------------------------------------


def completions(trace: Trace) -> Iterator[Trace]:
    """Every completion, fewest closed calls first.

    Each open call is either dropped or closed by a return appended at the
    end; closing returns are emitted in every order.
    """
    trace = tuple(trace)
    pending = open_calls(trace)
    for closed_count in range(len(pending) + 1):
        for closed in itertools.combinations(pending, closed_count):
            dropped = set(pending) - set(closed)
            body = tuple(e for i, e in enumerate(trace) if i not in dropped)
            for order in itertools.permutations(closed):
                yield body + tuple(ret(trace[i].thread) for i in order)


@dataclass(frozen=True)
class MethodEvent:
    label: str
    thread: int
    call_index: int
    ret_index: int


def method_events(trace: Trace) -> tuple[list[MethodEvent], frozenset[tuple[int, int]]]:
    """Method events in call order and the happens-before pairs over their indices."""
    pending: dict[int, int] = {}
    events: list[MethodEvent | None] = []
    slot: dict[int, int] = {}
    for i, e in enumerate(trace):
        if e.kind == "call":
            pending[e.thread] = i
            slot[e.thread] = len(events)
            events.append(None)
        else:
            c = pending.pop(e.thread)
            events[slot[e.thread]] = MethodEvent(trace[c].method, e.thread, c, i)
    if pending:
        raise InputError("trace is not complete")
    done: list[MethodEvent] = events  # type: ignore[assignment]
    hb = frozenset(
        (a, b) for a, ea in enumerate(done) for b, eb in enumerate(done) if ea.ret_index < eb.call_index
    )
    return done, hb
