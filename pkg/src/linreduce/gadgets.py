"""Compile a Turing machine, an input and an address width into a Letter
Insertion instance whose non-insertable words are exactly the encodings of
the machine's accepting run.

``N`` is the union of two families of automata:

* ``not_seq_cfg`` catches words that are not a well-formed run starting in
  the initial configuration and ending in the final state.  These automata
  ignore inserted letters (self-loops on ``A`` everywhere).
* ``not_delta`` catches a step that disagrees with the transition function.
  Cells of two successive configurations are matched by tagging the address
  bits: ``m_k`` before a 0 and ``p_k`` before a 1 in the earlier
  configuration, the other way round in the later one.  Each tag letter can
  be inserted only once, so both tagged addresses must coincide.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Iterable

from .automata import (
    DEFAULT_SUBSET_CAP,
    Alphabet,
    Counterexample,
    InputError,
    Nfa,
    NfaBuilder,
    alt,
    concat,
    intersect,
    minimize,
    opt,
    regex_to_nfa,
    seq,
    star,
    union,
    with_self_loops,
)
from .insertion import InsertionInstance, decide
from .turing import (
    CFG,
    COLON,
    LEFT,
    NEWLINE,
    ONE,
    SEMI,
    START,
    STOP,
    ZERO,
    EncodingParams,
    TmConfig,
    TuringMachine,
    decode_run,
    initial_config,
    step,
)

MAX_ADDR_BITS = 4
BITS = (ZERO, ONE)


class GadgetError(RuntimeError):
    """A decoded counterexample is not a valid accepting run."""


class ViolationKind(enum.Enum):
    WRONG_STATE_AFTER_MOVE = "wrong_state_after_move"
    WRONG_WRITTEN_BIT = "wrong_written_bit"
    WRONG_HEAD_DIRECTION = "wrong_head_direction"
    FRAME = "frame"


RULE_KINDS = (
    ViolationKind.WRONG_STATE_AFTER_MOVE,
    ViolationKind.WRONG_WRITTEN_BIT,
    ViolationKind.WRONG_HEAD_DIRECTION,
)

Rule = tuple[str, int, str, int, str]


def plus_letter(k: int) -> str:
    return f"p{k}"


def minus_letter(k: int) -> str:
    return f"m{k}"


def insertable_letters(params: EncodingParams) -> tuple[str, ...]:
    p = params.addr_bits
    letters = tuple(plus_letter(k) for k in range(1, p + 1)) + tuple(minus_letter(k) for k in range(1, p + 1))
    clash = set(letters) & set(params.alphabet)
    if clash:
        raise InputError(f"state names clash with insertable letters: {sorted(clash)}")
    return letters


def _check_params(params: EncodingParams, max_addr_bits: int) -> None:
    if params.addr_bits > max_addr_bits:
        raise InputError(f"addr_bits {params.addr_bits} exceeds the cap of {max_addr_bits}")


def _inner(params: EncodingParams) -> list[str]:
    """Letters that may occur inside one configuration."""
    return list(BITS) + [COLON, SEMI] + list(params.states)


def _any(symbols: Iterable[str]):
    return alt(*symbols)


# -- malformed single configurations ---------------------------------------


def _complete_dfa(sigma: Alphabet, table: dict, start: object, rejecting: set) -> Nfa:
    """Complement-style automaton: missing moves go to an accepting sink and
    every state except those in ``rejecting`` accepts."""
    b = NfaBuilder(sigma)
    names = {start} | {src for src, _ in table} | set(table.values())
    ids = {name: b.state(name) for name in sorted(names, key=repr)}
    dead = b.state()
    b.loop(dead, sigma)
    for name, sid in ids.items():
        for sym in sigma:
            nxt = table.get((name, sym))
            b.edge(sid, sym, dead if nxt is None else ids[nxt])
    final = [sid for name, sid in ids.items() if name not in rejecting] + [dead]
    return b.build([ids[start]], final)


def _shape_violation(params: EncodingParams) -> Nfa:
    """Words outside ``$ (addr : (Q+ε)(0+1) ;)* ↩``."""
    p = params.addr_bits
    table = {("start", CFG): ("addr", 0), (("addr", 0), NEWLINE): "done"}
    for k in range(p):
        for bit in BITS:
            table[(("addr", k), bit)] = ("addr", k + 1)
    table[(("addr", p), COLON)] = "colon"
    for q in params.states:
        table[("colon", q)] = "state"
    for bit in BITS:
        table[("colon", bit)] = "bit"
        table[("state", bit)] = "bit"
    table[("bit", SEMI)] = ("addr", 0)
    return _complete_dfa(params.alphabet, table, "start", {"done"})


def _state_count_violation(params: EncodingParams) -> Nfa:
    sigma = params.alphabet
    b = NfaBuilder(sigma)
    zero, one, many = b.state(), b.state(), b.state()
    others = [s for s in sigma if s not in params.states]
    for q in (zero, one, many):
        b.loop(q, others)
    b.edge(zero, params.states, one)
    b.edge(one, params.states, many)
    b.loop(many, params.states)
    return b.build([zero], [zero, many])


def _start_violation(params: EncodingParams) -> Nfa:
    """Words not starting with ``$ bin(0) :``."""
    prefix = (CFG,) + params.address(0) + (COLON,)
    table = {(i, sym): i + 1 for i, sym in enumerate(prefix)}
    table.update({(len(prefix), s): len(prefix) for s in params.alphabet})
    return _complete_dfa(params.alphabet, table, 0, {len(prefix)})


def _end_violation(params: EncodingParams) -> Nfa:
    """Words whose last cell before ``↩`` has an address other than all ones."""
    sigma = params.alphabet
    some_zero = alt(*[seq(*([_any(BITS)] * k), ZERO, *([_any(BITS)] * (params.addr_bits - k - 1))) for k in range(params.addr_bits)])
    r = seq(star(_any(sigma)), alt(CFG, SEMI), some_zero, COLON, opt(_any(params.states)), _any(BITS), SEMI, NEWLINE)
    return regex_to_nfa(r, sigma)


def _increment_violation(params: EncodingParams) -> Nfa:
    """Adjacent cells ``bin(i) ... ; bin(j) :`` with ``j != i + 1``.

    Guesses a bit position ``k`` where ``j`` disagrees with ``i + 1`` and the
    carry ``c`` into that position; ``c`` must be 1 exactly when every less
    significant bit of ``i`` is 1.  Bits are read most significant first.
    """
    sigma = params.alphabet
    p = params.addr_bits
    b = NfaBuilder(sigma)
    pre = b.state("pre")
    b.loop(pre, sigma)
    acc = b.state("acc")
    b.loop(acc, sigma)
    for k in range(p):
        for carry in (0, 1):
            # reading i: positions before k are free
            high = pre
            for pos in range(k):
                nxt = b.state(("i", k, carry, pos + 1))
                b.edge(high, BITS, nxt)
                high = nxt
            for ik in (0, 1):
                want = 1 - (ik ^ carry)
                # after position k; flag records a zero among lower bits of i
                after = b.state(("lo", k, carry, ik, k + 1, 0))
                b.edge(high, BITS[ik], after)
                for pos in range(k + 1, p):
                    for seen_zero in (0, 1):
                        src = b.state(("lo", k, carry, ik, pos, seen_zero))
                        b.edge(src, ONE, b.state(("lo", k, carry, ik, pos + 1, seen_zero)))
                        if carry == 0:
                            b.edge(src, ZERO, b.state(("lo", k, carry, ik, pos + 1, 1)))
                done = b.state(("lo", k, carry, ik, p, 1 if carry == 0 else 0))
                colon = b.state(("colon", k, carry, ik))
                b.edge(done, COLON, colon)
                content = b.state(("content", k, carry, ik))
                b.edge(colon, params.states, content)
                semi = b.state(("semi", k, carry, ik))
                b.edge(colon, BITS, semi)
                b.edge(content, BITS, semi)
                cur = b.state(("j", k, carry, ik, 0))
                b.edge(semi, SEMI, cur)
                for pos in range(p):
                    nxt = b.state(("j", k, carry, ik, pos + 1))
                    b.edge(cur, BITS[want] if pos == k else BITS, nxt)
                    cur = nxt
                b.edge(cur, COLON, acc)
    inc = b.build([pre], [acc])
    # the last address has no successor at all
    overflow = regex_to_nfa(
        seq(
            star(_any(sigma)),
            *([ONE] * p),
            COLON,
            opt(_any(params.states)),
            _any(BITS),
            SEMI,
            *([_any(BITS)] * p),
            COLON,
            star(_any(sigma)),
        ),
        sigma,
    )
    return union(inc, overflow)


@functools.lru_cache(maxsize=16)
def _not_wf_parts(params: EncodingParams) -> tuple[tuple[str, Nfa], ...]:
    return (
        ("shape", _shape_violation(params)),
        ("state_count", _state_count_violation(params)),
        ("start_address", _start_violation(params)),
        ("end_address", minimize(_end_violation(params))),
        ("increment", minimize(_increment_violation(params))),
    )


def not_wf_components(params: EncodingParams) -> list[tuple[str, Nfa]]:
    return list(_not_wf_parts(params))


def build_not_wf(params: EncodingParams, max_addr_bits: int = MAX_ADDR_BITS) -> Nfa:
    """NFA over Γ_M accepting exactly the words that are not well-formed configurations."""
    _check_params(params, max_addr_bits)
    return union(*(n for _, n in not_wf_components(params)))


# -- malformed runs and wrong boundary configurations ------------------------


def _framing_violation(params: EncodingParams) -> Nfa:
    """Words outside ``▷ ($ X* ↩)* □``."""
    table = {("start", START): "between", ("between", CFG): "inside", ("between", STOP): "done"}
    for s in _inner(params):
        table[("inside", s)] = "inside"
    table[("inside", NEWLINE)] = "between"
    return _complete_dfa(params.alphabet, table, "start", {"done"})


def _segment_violation(params: EncodingParams) -> Nfa:
    sigma = params.alphabet
    segment = regex_to_nfa(seq(CFG, star(_any(_inner(params))), NEWLINE), sigma)
    bad = minimize(intersect(build_not_wf(params, max_addr_bits=params.addr_bits), segment))
    anything = regex_to_nfa(star(_any(sigma)), sigma)
    return concat(anything, bad, anything)


def _first_state_violation(tm: TuringMachine, params: EncodingParams) -> Nfa:
    sigma = params.alphabet
    others = [q for q in params.states if q != tm.initial]
    wrong = seq(START, CFG, star(_any(_inner(params))), _any(others), star(_any(sigma)))
    return regex_to_nfa(alt(wrong, seq(START, STOP)), sigma)


def _first_head_violation(params: EncodingParams) -> Nfa:
    """The first configuration's head is not on cell 0."""
    sigma = params.alphabet
    r = seq(START, CFG, *params.address(0), COLON, _any(BITS), star(_any(sigma)))
    return regex_to_nfa(r, sigma)


def _first_tape_violation(params: EncodingParams, t: tuple[int, ...]) -> Nfa:
    sigma = params.alphabet
    p = params.addr_bits
    cell_start = seq(START, CFG, opt(seq(star(_any(_inner(params))), SEMI)))
    tail = star(_any(sigma))
    content = opt(_any(params.states))
    branches = [seq(*params.address(i), COLON, content, BITS[1 - bit], SEMI) for i, bit in enumerate(t)]
    n = len(t)
    if n < params.cells:
        # padding cells (address >= n) must hold 0
        target = params.address(n)
        at_least = [seq(*target)]
        for k in range(p):
            if target[k] == ZERO:
                at_least.append(seq(*target[:k], ONE, *([_any(BITS)] * (p - k - 1))))
        branches.append(seq(alt(*at_least), COLON, content, ONE, SEMI))
    return regex_to_nfa(seq(cell_start, alt(*branches), tail), sigma)


def _last_state_violation(tm: TuringMachine, params: EncodingParams) -> Nfa:
    sigma = params.alphabet
    others = [q for q in params.states if q != tm.final]
    r = seq(star(_any(sigma)), _any(others), star(_any(_inner(params))), NEWLINE, STOP)
    return regex_to_nfa(r, sigma)


def not_seq_cfg_components(tm: TuringMachine, params: EncodingParams, t: Iterable[int]) -> list[tuple[str, Nfa]]:
    t = tuple(t)
    if len(t) > params.cells:
        raise InputError(f"input of length {len(t)} does not fit in {params.cells} cells")
    fixed = _seq_parts(tm, params)
    tape = ("first_tape", with_self_loops(minimize(_first_tape_violation(params, t)), insertable_letters(params)))
    return list(fixed[:4]) + [tape] + list(fixed[4:])


@functools.lru_cache(maxsize=16)
def _seq_parts(tm: TuringMachine, params: EncodingParams) -> tuple[tuple[str, Nfa], ...]:
    # the components that do not depend on the input
    letters = insertable_letters(params)
    parts = [
        ("framing", _framing_violation(params)),
        ("segment", _segment_violation(params)),
        ("first_state", _first_state_violation(tm, params)),
        ("first_head", _first_head_violation(params)),
        ("last_state", _last_state_violation(tm, params)),
    ]
    return tuple((name, with_self_loops(minimize(n), letters)) for name, n in parts)


def build_not_seq_cfg(
    tm: TuringMachine, params: EncodingParams, t: Iterable[int], max_addr_bits: int = MAX_ADDR_BITS
) -> Nfa:
    """NFA over Γ_M ∪ A for malformed runs or wrong first/last configurations."""
    _check_params(params, max_addr_bits)
    return union(*(n for _, n in not_seq_cfg_components(tm, params, t)))


# -- transition violations --------------------------------------------------


@dataclass(frozen=True)
class _PairBuilder:
    params: EncodingParams
    b: NfaBuilder

    @property
    def everything(self) -> Alphabet:
        return self.b.alphabet

    def tagged_address(self, src: int, swapped: bool) -> int:
        """Address bits each preceded by its tag letter; returns the end state."""
        cur = src
        for k in range(1, self.params.addr_bits + 1):
            nxt = self.b.state()
            for bit in BITS:
                before_zero = plus_letter(k) if swapped else minus_letter(k)
                before_one = minus_letter(k) if swapped else plus_letter(k)
                mid = self.b.state()
                self.b.edge(cur, before_zero if bit == ZERO else before_one, mid)
                self.b.edge(mid, bit, nxt)
            cur = nxt
        return cur

    def plain_address(self, src: int) -> int:
        cur = src
        for _ in range(self.params.addr_bits):
            nxt = self.b.state()
            self.b.edge(cur, BITS, nxt)
            cur = nxt
        return cur

    def cell_rest(self, src: int, states: Iterable[str] | None, bits: Iterable[str]) -> int:
        """``: [S] b ;`` with ``S`` one of ``states``; an empty ``states``
        means no state symbol and ``None`` means an optional one."""
        colon = self.b.state()
        self.b.edge(src, COLON, colon)
        end_bit = self.b.state()
        if states is None or not states:
            self.b.edge(colon, bits, end_bit)
        if states is None or states:
            with_state = self.b.state()
            self.b.edge(colon, self.params.states if states is None else list(states), with_state)
            self.b.edge(with_state, bits, end_bit)
        end = self.b.state()
        self.b.edge(end_bit, SEMI, end)
        return end


def _pattern_pair(params: EncodingParams, letters: tuple[str, ...], kind: ViolationKind, rule: Rule) -> Nfa:
    sigma = params.alphabet
    everything = sigma.union(letters)
    b = NfaBuilder(everything)
    pb = _PairBuilder(params, b)
    no_dollar = [s for s in everything if s != CFG]

    w0 = b.state()
    b.loop(w0, everything)
    mid0, mid1 = b.state(), b.state()
    b.loop(mid0, no_dollar)
    b.edge(mid0, CFG, mid1)
    b.loop(mid1, no_dollar)
    acc = b.state()
    b.loop(acc, everything)

    tag1 = pb.tagged_address(w0, swapped=False)
    q, bit, q2, b2, direction = rule
    end1 = pb.cell_rest(tag1, [q], [BITS[bit]])
    b.edge(end1, None, mid0)

    if kind is ViolationKind.WRONG_WRITTEN_BIT:
        tag2 = pb.tagged_address(mid1, swapped=True)
        b.edge(pb.cell_rest(tag2, None, [BITS[1 - b2]]), None, acc)
    elif direction == LEFT:
        # the neighbour to the left precedes the tagged cell
        if kind is ViolationKind.WRONG_STATE_AFTER_MOVE:
            states = [s for s in params.states if s != q2]
            before = pb.cell_rest(pb.plain_address(mid1), states, BITS)
        else:
            before = pb.cell_rest(pb.plain_address(mid1), (), BITS)
            # head stepped off the left edge: the tagged cell is cell 0
            first = b.state()
            b.edge(mid0, CFG, first)
            b.edge(pb.cell_rest(pb.tagged_address(first, swapped=True), None, BITS), None, acc)
        tag2 = pb.tagged_address(before, swapped=True)
        b.edge(pb.cell_rest(tag2, None, BITS), None, acc)
    else:
        tag2 = pb.tagged_address(mid1, swapped=True)
        after = pb.cell_rest(tag2, None, BITS)
        if kind is ViolationKind.WRONG_STATE_AFTER_MOVE:
            states = [s for s in params.states if s != q2]
            b.edge(pb.cell_rest(pb.plain_address(after), states, BITS), None, acc)
        else:
            b.edge(pb.cell_rest(pb.plain_address(after), (), BITS), None, acc)
            # head stepped off the right edge: nothing follows the tagged cell
            b.edge(after, NEWLINE, acc)
    return b.build([w0], [acc])


def _frame_pair(params: EncodingParams, letters: tuple[str, ...]) -> Nfa:
    """A cell without the head whose bit differs in the next configuration."""
    sigma = params.alphabet
    everything = sigma.union(letters)
    no_dollar = [s for s in everything if s != CFG]
    parts = []
    for old in (0, 1):
        b = NfaBuilder(everything)
        pb = _PairBuilder(params, b)
        w0 = b.state()
        b.loop(w0, everything)
        mid0, mid1, acc = b.state(), b.state(), b.state()
        b.loop(mid0, no_dollar)
        b.edge(mid0, CFG, mid1)
        b.loop(mid1, no_dollar)
        b.loop(acc, everything)
        b.edge(pb.cell_rest(pb.tagged_address(w0, swapped=False), (), [BITS[old]]), None, mid0)
        b.edge(pb.cell_rest(pb.tagged_address(mid1, swapped=True), None, [BITS[1 - old]]), None, acc)
        parts.append(b.build([w0], [acc]))
    return union(*parts)


def not_delta_components(tm: TuringMachine, params: EncodingParams) -> list[tuple[str, Nfa]]:
    letters = insertable_letters(params)
    out = []
    for rule in tm.rules():
        q, bit, q2, b2, d = rule
        for kind in RULE_KINDS:
            out.append((f"{kind.value}[{q},{bit}->{q2},{b2},{d}]", minimize(_pattern_pair(params, letters, kind, rule))))
    out.append((ViolationKind.FRAME.value, minimize(_frame_pair(params, letters))))
    return out


def pattern_pair(params: EncodingParams, kind: ViolationKind, rule: Rule | None = None) -> Nfa:
    """The single automaton for one violation kind (and rule, unless FRAME)."""
    letters = insertable_letters(params)
    if kind is ViolationKind.FRAME:
        return _frame_pair(params, letters)
    if rule is None:
        raise InputError(f"{kind.value} needs a transition rule")
    return _pattern_pair(params, letters, kind, rule)


def build_not_delta(tm: TuringMachine, params: EncodingParams, max_addr_bits: int = MAX_ADDR_BITS) -> Nfa:
    _check_params(params, max_addr_bits)
    return union(*(n for _, n in not_delta_components(tm, params)))


# -- the instance and the end-to-end decision ---------------------------------


def gadget_components(tm: TuringMachine, params: EncodingParams, t: Iterable[int]) -> list[tuple[str, Nfa]]:
    seq_parts = [(f"not_seq_cfg.{name}", n) for name, n in not_seq_cfg_components(tm, params, t)]
    delta_parts = [(f"not_delta.{name}", n) for name, n in not_delta_components(tm, params)]
    return seq_parts + delta_parts


def build_instance(
    tm: TuringMachine, params: EncodingParams, t: Iterable[int], max_addr_bits: int = MAX_ADDR_BITS
) -> InsertionInstance:
    _check_params(params, max_addr_bits)
    letters = insertable_letters(params)
    n = union(build_not_seq_cfg(tm, params, t, max_addr_bits), build_not_delta(tm, params, max_addr_bits))
    return InsertionInstance(letters, params.alphabet, n)


@dataclass(frozen=True)
class ReachResult:
    accepting: bool
    run: tuple[TmConfig, ...] | None
    word: tuple[str, ...] | None
    explored: int

    @property
    def verdict(self) -> str:
        return "accepting" if self.accepting else "not_accepting"


def validate_run(tm: TuringMachine, configs: list[TmConfig], t: Iterable[int], addr_bits: int) -> None:
    """Raise :class:`GadgetError` unless ``configs`` is an accepting run on ``t``."""
    if not configs:
        raise GadgetError("counterexample encodes no configuration")
    if configs[0] != initial_config(tm, t, addr_bits):
        raise GadgetError(f"first configuration {configs[0]} is not the initial one")
    for i, (a, c) in enumerate(zip(configs, configs[1:])):
        if a.state == tm.final or step(tm, a) != c:
            raise GadgetError(f"configurations {i} and {i + 1} are not a machine step")
    if configs[-1].state != tm.final:
        raise GadgetError("last configuration is not in the final state")


def decide_reachability(
    tm: TuringMachine, params: EncodingParams, t: Iterable[int], cap: int = DEFAULT_SUBSET_CAP
) -> ReachResult:
    t = tuple(t)
    inst = build_instance(tm, params, t)
    verdict = decide(inst, cap=cap)
    if not isinstance(verdict, Counterexample):
        return ReachResult(False, None, None, verdict.explored)
    try:
        configs = decode_run(verdict.word, params)
    except InputError as exc:
        raise GadgetError(f"counterexample is not a well-formed run: {exc}") from exc
    validate_run(tm, configs, t, params.addr_bits)
    return ReachResult(True, tuple(configs), verdict.word, verdict.explored)
