import json
import random

import pytest

from linreduce.automata import InputError, Lit, ResourceError, regex_to_nfa, seq, star
from linreduce.gadgets import ViolationKind
from linreduce.insertion import InsertionInstance
from linreduce.memory import call, ret
from linreduce.oracles import (
    Record,
    brute_insert,
    brute_linearizable,
    corpus_generate,
    delta_violations,
    hand_machines,
    load_defaults,
    random_instance,
    report_json,
    two_state_machine,
    verify_all,
)
from linreduce.turing import OUT_OF_BOUNDS, EncodingParams, TmConfig, run


def test_defaults_file():
    d = load_defaults()
    assert d["seed"] == 7
    assert d["insertion"]["instances"] >= 200
    assert d["li2lin"]["instances"] >= 50
    assert d["tm"]["addr_bits"] == [1, 2]


def test_brute_insert_examples():
    inst = InsertionInstance(("a", "c"), ("b",), regex_to_nfa(seq("c", star("b"), "a"), ("a", "c", "b")))
    assert brute_insert(inst, "bb")
    assert brute_insert(inst, "")
    inst2 = InsertionInstance(("a",), ("b",), regex_to_nfa(Lit("a"), ("a", "b")))
    assert not brute_insert(inst2, "b")


def test_brute_guards():
    inst = InsertionInstance(("a",), ("b",), regex_to_nfa(Lit("a"), ("a", "b")))
    with pytest.raises(ResourceError):
        brute_insert(inst, "b" * 11)
    spec = regex_to_nfa(star("M"))
    trace = tuple(e for t in range(1, 8) for e in (call(t, "M"), ret(t)))
    with pytest.raises(ResourceError):
        brute_linearizable(trace, spec)
    assert brute_linearizable(trace, spec, max_events=7)


def test_record_dict():
    r = Record("s", "c", True, False)
    assert not r.passed
    assert r.to_dict() == {"suite": "s", "case-id": "c", "expected": True, "got": False, "pass": False}
    assert json.loads(report_json([r]))[0]["pass"] is False


def test_random_instances_are_seeded():
    a = random_instance(random.Random(5))
    b = random_instance(random.Random(5))
    assert a == b
    assert len(random_instance(random.Random(1), min_letters=2, max_letters=2).insertables) == 2


def test_hand_machines_cover_required_behaviours():
    outcomes = {}
    for name, (tm, inputs) in hand_machines().items():
        for p in (1, 2):
            for text in inputs:
                t = tuple(int(c) for c in text)
                if len(t) <= 1 << p:
                    outcomes[(name, p, text)] = run(tm, t, p).status
    assert outcomes[("accept_immediately", 1, "0")] == "accepting"
    assert outcomes[("cycle_non_final", 2, "1")] == "halted_non_final"
    # acceptance of written_bit depends on the bit it writes over its input
    assert outcomes[("written_bit", 1, "0")] == "accepting"
    assert outcomes[("written_bit", 1, "1")] != "accepting"
    assert outcomes[("three_right", 1, "")] == OUT_OF_BOUNDS
    assert outcomes[("three_right", 2, "")] == "accepting"


def test_corpus_is_deterministic():
    tm, inputs = hand_machines()["written_bit"]
    params = EncodingParams.for_machine(tm, 1)
    cfg = load_defaults()["tm"]
    a = corpus_generate(params, tm, inputs, 7, cfg)
    b = corpus_generate(params, tm, inputs, 7, cfg)
    assert a == b
    assert len(a.configs) == cfg["valid_configs"] * (1 + cfg["mutations_per_word"])
    assert corpus_generate(params, tm, inputs, 8, cfg) != a


def test_delta_violation_predicate():
    tm = two_state_machine()
    rule0 = ("q0", 0, "qf", 1, "R")
    c1 = TmConfig((0, 0), 0, "q0")
    assert delta_violations(tm, c1, TmConfig((1, 0), 1, "qf")) == set()
    assert delta_violations(tm, c1, TmConfig((0, 0), 1, "qf")) == {(ViolationKind.WRONG_WRITTEN_BIT, rule0)}
    assert delta_violations(tm, c1, TmConfig((1, 0), 1, "q0")) == {(ViolationKind.WRONG_STATE_AFTER_MOVE, rule0)}
    assert delta_violations(tm, c1, TmConfig((1, 0), 0, "qf")) == {(ViolationKind.WRONG_HEAD_DIRECTION, rule0)}
    assert delta_violations(tm, c1, TmConfig((1, 1), 1, "qf")) == {(ViolationKind.FRAME, None)}
    # after the final state only the frame is checked
    assert delta_violations(tm, TmConfig((0, 0), 1, "qf"), TmConfig((1, 0), 0, "q0")) == {(ViolationKind.FRAME, None)}


def test_unknown_suite():
    with pytest.raises(InputError):
        verify_all("bogus")
