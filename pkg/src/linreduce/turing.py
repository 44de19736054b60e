"""Deterministic binary-tape Turing machines on a tape of ``2**P`` cells,
and the word encoding of their configurations and runs.

A configuration is written ``$ c_0 c_1 ... c_{2^P-1} ↩`` where cell ``i`` is
``bin_P(i) : [q] b ;`` (the state symbol appears only on the head cell).  A
run is ``▷ cfg_1 ... cfg_n □``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .automata import Alphabet, InputError

ZERO, ONE = "0", "1"
START, STOP = "▷", "□"
CFG, NEWLINE = "$", "↩"
SEMI, COLON = ";", ":"
BASE_SYMBOLS = (ZERO, ONE, START, STOP, CFG, NEWLINE, SEMI, COLON)
LEFT, RIGHT = "L", "R"


class DecodeError(InputError):
    def __init__(self, index: int, message: str):
        super().__init__(f"at symbol {index}: {message}")
        self.index = index


@dataclass(frozen=True)
class TuringMachine:
    states: tuple[str, ...]
    delta: dict  # (state, bit) -> (state, bit, "L" | "R")
    initial: str
    final: str

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        known = set(self.states)
        if len(known) != len(self.states):
            raise InputError("duplicate TM state")
        if self.initial not in known or self.final not in known:
            raise InputError("initial and final must be states")
        for q in self.states:
            if q in BASE_SYMBOLS:
                raise InputError(f"state name {q!r} clashes with an encoding symbol")
        for (q, b), (q2, b2, d) in self.delta.items():
            if q == self.final:
                raise InputError("the final state has no transitions")
            if q not in known or q2 not in known or b not in (0, 1) or b2 not in (0, 1) or d not in (LEFT, RIGHT):
                raise InputError(f"bad transition {(q, b)} -> {(q2, b2, d)}")
        for q in self.states:
            if q != self.final:
                for b in (0, 1):
                    if (q, b) not in self.delta:
                        raise InputError(f"transition function undefined on {(q, b)}")

    def __hash__(self) -> int:
        return hash((self.states, tuple(sorted(self.delta.items())), self.initial, self.final))

    def rules(self) -> list[tuple[str, int, str, int, str]]:
        """Transitions as (q, b, q', b', dir), in state then bit order."""
        order = {q: i for i, q in enumerate(self.states)}
        items = sorted(self.delta.items(), key=lambda kv: (order[kv[0][0]], kv[0][1]))
        return [(q, b, q2, b2, d) for (q, b), (q2, b2, d) in items]

    def to_dict(self) -> dict:
        return {
            "states": list(self.states),
            "initial": self.initial,
            "final": self.final,
            "delta": [list(r) for r in self.rules()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> TuringMachine:
        try:
            delta = {(q, int(b)): (q2, int(b2), d) for q, b, q2, b2, d in data["delta"]}
            return cls(tuple(data["states"]), delta, data["initial"], data["final"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed TM object: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> TuringMachine:
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


@dataclass(frozen=True)
class TmConfig:
    tape: tuple[int, ...]
    head: int
    state: str

    def to_dict(self) -> dict:
        return {"tape": "".join(map(str, self.tape)), "head": self.head, "state": self.state}


@dataclass(frozen=True)
class EncodingParams:
    addr_bits: int
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if self.addr_bits < 1:
            raise InputError("addr_bits must be at least 1")
        if set(self.states) & set(BASE_SYMBOLS):
            raise InputError("state symbols must differ from the encoding symbols")

    @classmethod
    def for_machine(cls, tm: TuringMachine, addr_bits: int) -> EncodingParams:
        return cls(addr_bits, tm.states)

    @property
    def cells(self) -> int:
        return 1 << self.addr_bits

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(BASE_SYMBOLS + self.states)

    def address(self, i: int) -> tuple[str, ...]:
        return tuple(format(i, f"0{self.addr_bits}b"))


def parse_bits(text: str) -> tuple[int, ...]:
    if any(c not in "01" for c in text):
        raise InputError(f"input must be a binary string, got {text!r}")
    return tuple(int(c) for c in text)


def initial_config(tm: TuringMachine, t: Iterable[int], addr_bits: int) -> TmConfig:
    t = tuple(t)
    cells = 1 << addr_bits
    if len(t) > cells:
        raise InputError(f"input of length {len(t)} does not fit in {cells} cells")
    return TmConfig(t + (0,) * (cells - len(t)), 0, tm.initial)


def step(tm: TuringMachine, cfg: TmConfig) -> TmConfig | None:
    """The successor configuration, or ``None`` when the head leaves the tape."""
    q2, b2, d = tm.delta[(cfg.state, cfg.tape[cfg.head])]
    tape = list(cfg.tape)
    tape[cfg.head] = b2
    head = cfg.head + (1 if d == RIGHT else -1)
    if not 0 <= head < len(tape):
        return None
    return TmConfig(tuple(tape), head, q2)


ACCEPTING = "accepting"
HALTED_NON_FINAL = "halted_non_final"
OUT_OF_BOUNDS = "out_of_bounds"
TIMEOUT = "timeout"


@dataclass(frozen=True)
class RunResult:
    status: str
    configs: tuple[TmConfig, ...]

    @property
    def accepting(self) -> bool:
        return self.status == ACCEPTING


def run(tm: TuringMachine, t: Iterable[int], addr_bits: int, max_steps: int = 10_000) -> RunResult:
    """Simulate from the initial configuration.

    The transition function is total, so the machine only stops in the final
    state.  A repeated configuration proves it never will; that outcome is
    reported as ``halted_non_final``.
    """
    cfg = initial_config(tm, t, addr_bits)
    configs = [cfg]
    seen = {cfg}
    for _ in range(max_steps):
        if cfg.state == tm.final:
            break
        nxt = step(tm, cfg)
        if nxt is None:
            return RunResult(OUT_OF_BOUNDS, tuple(configs))
        if nxt in seen:
            return RunResult(HALTED_NON_FINAL, tuple(configs))
        seen.add(nxt)
        configs.append(nxt)
        cfg = nxt
    status = ACCEPTING if cfg.state == tm.final else TIMEOUT
    return RunResult(status, tuple(configs))


# -- word codec -----------------------------------------------------------


def encode_config(cfg: TmConfig, params: EncodingParams) -> tuple[str, ...]:
    if len(cfg.tape) != params.cells or not 0 <= cfg.head < params.cells:
        raise InputError("configuration does not match the encoding parameters")
    word = [CFG]
    for i, bit in enumerate(cfg.tape):
        word += params.address(i)
        word.append(COLON)
        if i == cfg.head:
            word.append(cfg.state)
        word += [str(bit), SEMI]
    word.append(NEWLINE)
    return tuple(word)


def encode_run(configs: Iterable[TmConfig], params: EncodingParams) -> tuple[str, ...]:
    word = [START]
    for cfg in configs:
        word += encode_config(cfg, params)
    word.append(STOP)
    return tuple(word)


class _Reader:
    def __init__(self, word: tuple[str, ...], params: EncodingParams):
        self.word = word
        self.pos = 0
        self.params = params
        self.states = set(params.states)

    def peek(self) -> str | None:
        return self.word[self.pos] if self.pos < len(self.word) else None

    def take(self, expected: str | set | None = None, what: str = "") -> str:
        s = self.peek()
        if s is None:
            raise DecodeError(self.pos, f"unexpected end of word, expected {what or expected}")
        if expected is not None and (s not in expected if isinstance(expected, set) else s != expected):
            raise DecodeError(self.pos, f"expected {what or expected!r}, found {s!r}")
        self.pos += 1
        return s

    def config(self) -> TmConfig:
        p = self.params
        self.take(CFG)
        tape = []
        head = state = None
        for i in range(p.cells):
            at = self.pos
            addr = "".join(self.take({ZERO, ONE}, "address bit") for _ in range(p.addr_bits))
            if int(addr, 2) != i:
                raise DecodeError(at, f"address {addr} where {format(i, f'0{p.addr_bits}b')} was expected")
            self.take(COLON)
            if self.peek() in self.states:
                if state is not None:
                    raise DecodeError(self.pos, "second state symbol in one configuration")
                state, head = self.take(), i
            tape.append(int(self.take({ZERO, ONE}, "cell content")))
            self.take(SEMI)
        if self.peek() != NEWLINE:
            raise DecodeError(self.pos, "expected end of configuration after the last address")
        self.take(NEWLINE)
        if state is None:
            raise DecodeError(self.pos - 1, "configuration without a state symbol")
        return TmConfig(tuple(tape), head, state)


def decode_config(word: Iterable[str], params: EncodingParams) -> TmConfig:
    r = _Reader(tuple(word), params)
    cfg = r.config()
    if r.pos != len(r.word):
        raise DecodeError(r.pos, "trailing symbols after the configuration")
    return cfg


def decode_run(word: Iterable[str], params: EncodingParams) -> list[TmConfig]:
    r = _Reader(tuple(word), params)
    r.take(START)
    configs = []
    while r.peek() == CFG:
        configs.append(r.config())
    r.take(STOP)
    if r.pos != len(r.word):
        raise DecodeError(r.pos, "trailing symbols after the run")
    return configs


def is_well_formed_config(word: Iterable[str], params: EncodingParams) -> bool:
    try:
        decode_config(word, params)
    except DecodeError:
        return False
    return True


def is_well_formed_seq(word: Iterable[str], params: EncodingParams) -> bool:
    try:
        decode_run(word, params)
    except DecodeError:
        return False
    return True
