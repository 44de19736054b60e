"""Brute-force oracles and the lemma suites that compare the constructions
against them.

The oracles only share :func:`linreduce.automata.accepts` and plain data
types with the code they check.  Size guards raise instead of truncating.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable

from .automata import Counterexample, InputError, Nfa, NfaBuilder, ResourceError, accepts, union
from .gadgets import (
    RULE_KINDS,
    GadgetError,
    ViolationKind,
    build_not_seq_cfg,
    build_not_wf,
    decide_reachability,
    insertable_letters,
    not_delta_components,
    pattern_pair,
)
from .insertion import InsertionInstance, decide, insertable
from .li2lin import fig4_execution, reduce
from .linearizability import library_linearizable_bounded, trace_linearizable
from .memory import Event, Trace, is_trace_of
from .turing import (
    ACCEPTING,
    CFG,
    COLON,
    LEFT,
    SEMI,
    DecodeError,
    EncodingParams,
    TmConfig,
    TuringMachine,
    decode_run,
    encode_config,
    encode_run,
    initial_config,
    is_well_formed_config,
    run,
)


def load_defaults(path: str | None = None) -> dict:
    if path is None:
        text = resources.files("linreduce").joinpath("harness_defaults.json").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return json.loads(text)


@dataclass(frozen=True)
class Record:
    suite: str
    case_id: str
    expected: object
    got: object

    @property
    def passed(self) -> bool:
        return self.expected == self.got

    def to_dict(self) -> dict:
        return {"suite": self.suite, "case-id": self.case_id, "expected": self.expected, "got": self.got, "pass": self.passed}


def report_json(records: Iterable[Record]) -> str:
    return json.dumps([r.to_dict() for r in records], ensure_ascii=False, indent=1)


# -- oracles ------------------------------------------------------------------


def brute_insert(inst: InsertionInstance, word: Iterable[str], max_letters: int = 4, max_word: int = 10) -> bool:
    """Try every order of the insertable letters at every choice of positions."""
    word = tuple(word)
    letters = inst.insertables
    if len(letters) > max_letters:
        raise ResourceError("brute_insert letter count", max_letters)
    if len(word) > max_word:
        raise ResourceError("brute_insert word length", max_word)
    known = set(inst.nfa.alphabet)
    if any(s not in known for s in word + letters):
        return False
    seen = set()
    for perm in itertools.permutations(letters):
        # cuts[k] is the number of base letters preceding perm[k]
        for cuts in itertools.combinations_with_replacement(range(len(word) + 1), len(letters)):
            arranged: list[str] = []
            prev = 0
            for letter, cut in zip(perm, cuts):
                arranged += word[prev:cut]
                arranged.append(letter)
                prev = cut
            arranged += word[prev:]
            key = tuple(arranged)
            if key in seen:
                continue
            seen.add(key)
            if accepts(inst.nfa, key):
                return True
    return False


def _brute_completions(trace: Trace):
    open_at: dict[int, int] = {}
    for i, e in enumerate(trace):
        if e.kind == "call":
            open_at[e.thread] = i
        else:
            del open_at[e.thread]
    pending = sorted(open_at.values())
    for mask in range(1 << len(pending)):
        closed = [pending[j] for j in range(len(pending)) if mask >> j & 1]
        dropped = set(pending) - set(closed)
        body = [e for i, e in enumerate(trace) if i not in dropped]
        for order in itertools.permutations(closed):
            yield body + [Event("ret", trace[i].thread) for i in order]


def brute_linearizable(trace: Iterable[Event], spec: Nfa, max_events: int = 6) -> bool:
    """Every completion, every permutation of its method events."""
    trace = tuple(trace)
    calls = sum(1 for e in trace if e.kind == "call")
    if calls > max_events:
        raise ResourceError("brute_linearizable method events", max_events)
    for comp in _brute_completions(trace):
        spans = []
        start: dict[int, int] = {}
        for i, e in enumerate(comp):
            if e.kind == "call":
                start[e.thread] = i
            else:
                c = start.pop(e.thread)
                spans.append((comp[c].method, c, i))
        if any(label not in spec.alphabet for label, _, _ in spans):
            continue
        for perm in itertools.permutations(range(len(spans))):
            # a later event in the order must not have returned before an earlier one was called
            respects = all(
                not spans[perm[b]][2] < spans[perm[a]][1] for a in range(len(perm)) for b in range(a + 1, len(perm))
            )
            if respects and accepts(spec, [spans[i][0] for i in perm]):
                return True
    return False


# -- random Letter Insertion instances -------------------------------------------


def random_instance(
    rng: random.Random, max_letters: int = 3, max_states: int = 5, max_gamma: int = 3, min_letters: int = 0
) -> InsertionInstance:
    letters = ("a", "b", "c", "d")[: rng.randint(min_letters, max_letters)]
    gamma = ("x", "y", "z", "w")[: rng.randint(1, max_gamma)]
    states = rng.randint(1, max_states)
    b = NfaBuilder(letters + gamma)
    b.reserve(states)
    for q in range(states):
        for sym in letters + gamma:
            for dst in rng.sample(range(states), rng.choice((0, 1, 1, 2)) if states > 1 else rng.choice((0, 1))):
                b.edge(q, sym, dst)
    final = [q for q in range(states) if rng.random() < 0.45]
    return InsertionInstance(letters, gamma, b.build([0], final))


def words_up_to(gamma: Iterable[str], max_len: int):
    gamma = tuple(gamma)
    for n in range(max_len + 1):
        yield from itertools.product(gamma, repeat=n)


def insertion_suite(seed: int, cfg: dict) -> list[Record]:
    """Closure decider against brute force on every short word of random instances."""
    rng = random.Random(f"{seed}:insertion")
    out = []
    for i in range(cfg["instances"]):
        inst = random_instance(rng, cfg["max_letters"], cfg["max_states"], cfg["max_gamma"])
        expected, got = [], []
        for w in words_up_to(inst.base, cfg["max_word"]):
            if not brute_insert(inst, w):
                expected.append("".join(w))
            wit = insertable(inst, w)
            if wit is None or not accepts(inst.nfa, wit.arranged()):
                got.append("".join(w))
        out.append(Record("insertion", f"instance-{i}", expected, got))
    return out


def verify_reduction_li_lin(inst: InsertionInstance, bound: int | None = None, case: str = "") -> list[Record]:
    """Counterexamples must give a non-linearizable canonical execution;
    universal instances must survive bounded exploration of the library."""
    system = reduce(inst)
    l = len(inst.insertables)
    bound = 2 * (l + 2) + 4 if bound is None else bound
    verdict = decide(inst)
    out = [Record("li2lin", f"{case}/brute-agrees-with-decide", True, _brute_agrees(inst, verdict))]
    if isinstance(verdict, Counterexample):
        _, trace = fig4_execution(inst, verdict.word)
        events = l + 1 + len(verdict.word)
        out.append(Record("li2lin", f"{case}/fig4-replayable", True, is_trace_of(system.library, system.threads, trace)))
        out.append(Record("li2lin", f"{case}/fig4-checker", False, trace_linearizable(trace, system.spec) is not None))
        out.append(
            Record("li2lin", f"{case}/fig4-brute", False, brute_linearizable(trace, system.spec, max_events=max(6, events)))
        )
    else:
        res = library_linearizable_bounded(system.library, system.threads, system.spec, bound)
        out.append(Record("li2lin", f"{case}/bounded-{bound}", "ok", res.verdict))
    return out


def _brute_agrees(inst: InsertionInstance, verdict) -> bool:
    if isinstance(verdict, Counterexample):
        return not brute_insert(inst, verdict.word, max_word=max(10, len(verdict.word)))
    # universality cannot be brute forced; check the short words instead
    return all(brute_insert(inst, w) for w in words_up_to(inst.base, 3))


def li2lin_suite(seed: int, cfg: dict) -> list[Record]:
    rng = random.Random(f"{seed}:li2lin")
    out = []
    for i in range(cfg["instances"]):
        inst = random_instance(rng, cfg["max_letters"], cfg["max_states"], cfg["max_gamma"], min_letters=1)
        bound = 2 * (len(inst.insertables) + 2) + cfg["extra_steps"]
        out += verify_reduction_li_lin(inst, bound, f"instance-{i}")
    return out


# -- Turing machines used by the suites -----------------------------------------------


def _tm(states, rules, initial="q0", final="qf") -> TuringMachine:
    delta = {(q, b): (q2, b2, d) for q, b, q2, b2, d in rules}
    return TuringMachine(tuple(states), delta, initial, final)


def hand_machines() -> dict[str, tuple[TuringMachine, tuple[str, ...]]]:
    """Name -> (machine, inputs) for the end-to-end suite."""
    both = [(b,) for b in (0, 1)]
    accept_now = _tm(("q0", "qf"), [("q0", b, "qf", b, "R") for b, in both])
    cycle = _tm(
        ("q0", "q1", "qf"),
        [("q0", b, "q1", b, "R") for b, in both] + [("q1", b, "q0", b, "L") for b, in both],
    )
    # writes the complement of cell 0, walks back and accepts iff it reads a 1
    written = _tm(
        ("q0", "q1", "q2", "q3", "q4", "qf"),
        [("q0", b, "q1", 1 - b, "R") for b, in both]
        + [("q1", b, "q2", b, "L") for b, in both]
        + [("q2", 1, "qf", 1, "R"), ("q2", 0, "q3", 0, "R")]
        + [("q3", b, "q4", b, "L") for b, in both]
        + [("q4", b, "q3", b, "R") for b, in both],
    )
    off_left = _tm(("q0", "qf"), [("q0", b, "q0", b, "L") for b, in both])
    # needs four cells: accepts at two address bits, falls off the tape at one
    three_right = _tm(
        ("q0", "q1", "q2", "qf"),
        [("q0", b, "q1", 1, "R") for b, in both]
        + [("q1", b, "q2", b, "R") for b, in both]
        + [("q2", b, "qf", 1 - b, "R") for b, in both],
    )
    return {
        "accept_immediately": (accept_now, ("0", "1")),
        "cycle_non_final": (cycle, ("0", "1")),
        "written_bit": (written, ("0", "1", "10")),
        "off_left_edge": (off_left, ("1",)),
        "three_right": (three_right, ("", "01")),
    }


def two_state_machine() -> TuringMachine:
    """Moves both ways; used for the pattern-pair suite."""
    return _tm(("q0", "qf"), [("q0", 0, "qf", 1, "R"), ("q0", 1, "q0", 0, LEFT)])


# -- encodings corpus ------------------------------------------------------------------


@dataclass
class Corpus:
    configs: list[tuple[str, tuple[str, ...]]] = field(default_factory=list)
    # (case id, word, input bits)
    sequences: list[tuple[str, tuple[str, ...], tuple[int, ...]]] = field(default_factory=list)


def _random_config(rng: random.Random, tm: TuringMachine, params: EncodingParams) -> TmConfig:
    tape = tuple(rng.randint(0, 1) for _ in range(params.cells))
    return TmConfig(tape, rng.randrange(params.cells), rng.choice(tm.states))


def _address_bit_positions(word) -> list[int]:
    out = []
    i = 0
    while i < len(word):
        if word[i] in (CFG, SEMI):
            j = i + 1
            while j < len(word) and word[j] in ("0", "1"):
                out.append(j)
                j += 1
            i = j
        else:
            i += 1
    return out


def _content_positions(word, params: EncodingParams) -> tuple[list[int], list[int]]:
    """Cell bit positions split into (head cells, other cells)."""
    head, other = [], []
    for i, s in enumerate(word):
        if s in ("0", "1") and i + 1 < len(word) and word[i + 1] == SEMI:
            (head if word[i - 1] in params.states else other).append(i)
    return head, other


def mutate(rng: random.Random, word: tuple[str, ...], params: EncodingParams) -> tuple[str, tuple[str, ...]]:
    """One random edit of ``word``; returns (operation name, new word)."""
    sigma = list(params.alphabet)
    w = list(word)
    ops = ["substitute", "delete", "insert", "truncate", "address", "state", "head_bit", "other_bit"]
    op = rng.choice(ops)
    if op == "substitute" and w:
        i = rng.randrange(len(w))
        w[i] = rng.choice([s for s in sigma if s != w[i]])
    elif op == "delete" and w:
        del w[rng.randrange(len(w))]
    elif op == "insert":
        w.insert(rng.randrange(len(w) + 1), rng.choice(sigma))
    elif op == "truncate" and w:
        w = w[: rng.randrange(len(w))]
    elif op == "address" and _address_bit_positions(w):
        i = rng.choice(_address_bit_positions(w))
        w[i] = "1" if w[i] == "0" else "0"
    elif op == "state":
        states = [i for i, s in enumerate(w) if s in params.states]
        colons = [i for i, s in enumerate(w) if s == COLON and i + 1 < len(w) and w[i + 1] not in params.states]
        choice = rng.randrange(3)
        if choice == 0 and states:
            i = rng.choice(states)
            others = [q for q in params.states if q != w[i]]
            if others:
                w[i] = rng.choice(others)
        elif choice == 1 and states:
            del w[rng.choice(states)]
        elif colons:
            w.insert(rng.choice(colons) + 1, rng.choice(params.states))
    else:
        head, other = _content_positions(w, params)
        pool = head if op == "head_bit" else other
        if pool:
            i = rng.choice(pool)
            w[i] = "1" if w[i] == "0" else "0"
    return op, tuple(w)


def corpus_generate(params: EncodingParams, tm: TuringMachine, inputs: Iterable[str], seed: int, cfg: dict) -> Corpus:
    """Seeded corpus of configuration and run encodings plus their mutations."""
    rng = random.Random(f"{seed}:corpus:{params.addr_bits}:{tm.to_json()}")
    corpus = Corpus()
    per = cfg["mutations_per_word"]
    for n in range(cfg["valid_configs"]):
        word = encode_config(_random_config(rng, tm, params), params)
        corpus.configs.append((f"cfg{n}", word))
        for m in range(per):
            op, mutated = mutate(rng, word, params)
            corpus.configs.append((f"cfg{n}/{m}-{op}", mutated))
    bases = []
    for text in inputs:
        t = tuple(int(c) for c in text)
        if len(t) > params.cells:
            continue
        res = run(tm, t, params.addr_bits, max_steps=64)
        bases.append((f"run[{text}]", encode_run(res.configs, params), t))
        if len(res.configs) > 1:
            bases.append((f"prefix[{text}]", encode_run(res.configs[:-1], params), t))
    for n in range(cfg["valid_runs"]):
        # well-formed runs that pass the boundary checks, so mutations land near the border
        t = tuple(rng.randint(0, 1) for _ in range(rng.randint(0, params.cells)))
        configs = [initial_config(tm, t, params.addr_bits)]
        configs += [_random_config(rng, tm, params) for _ in range(rng.randint(0, 2))]
        last = _random_config(rng, tm, params)
        configs.append(TmConfig(last.tape, last.head, tm.final))
        bases.append((f"random{n}", encode_run(configs, params), t))
    for name, word, t in bases:
        corpus.sequences.append((name, word, t))
        for m in range(per):
            op, mutated = mutate(rng, word, params)
            corpus.sequences.append((f"{name}/{m}-{op}", mutated, t))
    return corpus


# -- parsing predicates -------------------------------------------------------------


def not_seq_cfg_oracle(tm: TuringMachine, params: EncodingParams, t: tuple[int, ...], word) -> bool:
    try:
        configs = decode_run(word, params)
    except DecodeError:
        return True
    if not configs:
        return True
    first, last = configs[0], configs[-1]
    padded = tuple(t) + (0,) * (params.cells - len(t))
    return first.state != tm.initial or first.head != 0 or first.tape != padded or last.state != tm.final


def delta_violations(tm: TuringMachine, c1: TmConfig, c2: TmConfig) -> set:
    """Which (kind, rule) pattern pairs describe the step from ``c1`` to ``c2``."""
    found = set()
    h = c1.head
    if any(c1.tape[j] != c2.tape[j] for j in range(len(c1.tape)) if j != h):
        found.add((ViolationKind.FRAME, None))
    if c1.state == tm.final:
        return found
    q2, b2, d = tm.delta[(c1.state, c1.tape[h])]
    rule = (c1.state, c1.tape[h], q2, b2, d)
    target = h - 1 if d == LEFT else h + 1
    if c2.tape[h] != b2:
        found.add((ViolationKind.WRONG_WRITTEN_BIT, rule))
    if c2.head != target:
        found.add((ViolationKind.WRONG_HEAD_DIRECTION, rule))
    elif c2.state != q2:
        found.add((ViolationKind.WRONG_STATE_AFTER_MOVE, rule))
    return found


def all_configs(tm: TuringMachine, params: EncodingParams) -> list[TmConfig]:
    return [
        TmConfig(tape, head, q)
        for q in tm.states
        for head in range(params.cells)
        for tape in itertools.product((0, 1), repeat=params.cells)
    ]


# -- the gadget suites ----------------------------------------------------------------


def gadget_suite(
    machines: dict[str, tuple[TuringMachine, tuple[str, ...]]], addr_bits: Iterable[int], seed: int, cfg: dict
) -> list[Record]:
    """NotWF and NotSeqCfg against the parsing predicates on the mutation corpus."""
    out = []
    for p in addr_bits:
        for name, (tm, inputs) in machines.items():
            params = EncodingParams.for_machine(tm, p)
            corpus = corpus_generate(params, tm, inputs, seed, cfg)
            not_wf = build_not_wf(params)
            for case, word in corpus.configs:
                out.append(Record("not_wf", f"P{p}/{name}/{case}", not is_well_formed_config(word, params), accepts(not_wf, word)))
            cache: dict[tuple[int, ...], Nfa] = {}
            for case, word, t in corpus.sequences:
                if t not in cache:
                    cache[t] = build_not_seq_cfg(tm, params, t)
                expected = not_seq_cfg_oracle(tm, params, t, word)
                out.append(Record("not_seq_cfg", f"P{p}/{name}/{case}", expected, accepts(cache[t], word)))
    return out


def delta_suite(tm: TuringMachine | None = None, brute: bool = True) -> list[Record]:
    """Every well-formed two-configuration word at one address bit."""
    tm = tm or two_state_machine()
    params = EncodingParams.for_machine(tm, 1)
    letters = insertable_letters(params)
    singles = [((kind, rule), pattern_pair(params, kind, rule)) for rule in tm.rules() for kind in RULE_KINDS]
    singles.append(((ViolationKind.FRAME, None), pattern_pair(params, ViolationKind.FRAME)))
    whole = InsertionInstance(letters, params.alphabet, union(*(n for _, n in not_delta_components(tm, params))))
    single_insts = [(key, InsertionInstance(letters, params.alphabet, n)) for key, n in singles]
    out = []
    configs = all_configs(tm, params)
    for i, c1 in enumerate(configs):
        for j, c2 in enumerate(configs):
            word = encode_run([c1, c2], params)
            violations = delta_violations(tm, c1, c2)
            case = f"{i}->{j}"
            for (kind, rule), inst in single_insts:
                label = kind.value if rule is None else f"{kind.value}{list(rule)}"
                out.append(Record("insertion_error", f"{case}/{label}", (kind, rule) in violations, insertable(inst, word) is not None))
            out.append(Record("not_delta", case, bool(violations), insertable(whole, word) is not None))
            if brute:
                got = brute_insert(whole, word, max_word=len(word))
                out.append(Record("not_delta_brute", case, bool(violations), got))
    return out


def combination_suite(machines: dict[str, tuple[TuringMachine, tuple[str, ...]]], addr_bits: Iterable[int]) -> list[Record]:
    """decide_reachability against direct simulation."""
    out = []
    for p in addr_bits:
        for name, (tm, inputs) in machines.items():
            params = EncodingParams.for_machine(tm, p)
            for text in inputs:
                t = tuple(int(c) for c in text)
                if len(t) > params.cells:
                    continue
                expected = run(tm, t, p, max_steps=100_000).status == ACCEPTING
                try:
                    got = decide_reachability(tm, params, t).accepting
                except GadgetError as exc:
                    got = f"gadget error: {exc}"
                out.append(Record("combination", f"P{p}/{name}/{text}", expected, got))
    return out


def verify_tm_suite(
    machines: dict[str, tuple[TuringMachine, tuple[str, ...]]] | None = None,
    addr_bits: Iterable[int] = (1, 2),
    seed: int = 7,
    cfg: dict | None = None,
) -> list[Record]:
    machines = machines or hand_machines()
    addr_bits = tuple(addr_bits)
    cfg = cfg or load_defaults()["tm"]
    return gadget_suite(machines, addr_bits, seed, cfg) + delta_suite() + combination_suite(machines, addr_bits)


def verify_li2lin_suite(seed: int = 7, defaults: dict | None = None) -> list[Record]:
    defaults = defaults or load_defaults()
    return insertion_suite(seed, defaults["insertion"]) + li2lin_suite(seed, defaults["li2lin"])


def verify_all(suite: str, seed: int | None = None, defaults: dict | None = None) -> list[Record]:
    defaults = defaults or load_defaults()
    seed = defaults["seed"] if seed is None else seed
    if suite not in ("li2lin", "tm", "all"):
        raise InputError(f"unknown suite {suite!r}")
    out = []
    if suite in ("li2lin", "all"):
        out += verify_li2lin_suite(seed, defaults)
    if suite in ("tm", "all"):
        out += verify_tm_suite(seed=seed, addr_bits=defaults["tm"]["addr_bits"], cfg=defaults["tm"])
    return out
