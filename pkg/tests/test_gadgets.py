import random

import pytest

from linreduce.automata import InputError, accepts
from linreduce.gadgets import (
    RULE_KINDS,
    GadgetError,
    ViolationKind,
    build_instance,
    build_not_delta,
    build_not_seq_cfg,
    build_not_wf,
    decide_reachability,
    gadget_components,
    insertable_letters,
    pattern_pair,
    validate_run,
)
from linreduce.insertion import InsertionInstance, insertable
from linreduce.oracles import all_configs, delta_violations, hand_machines, mutate, not_seq_cfg_oracle, two_state_machine
from linreduce.turing import (
    ACCEPTING,
    EncodingParams,
    TmConfig,
    TuringMachine,
    encode_config,
    encode_run,
    is_well_formed_config,
    run,
)


def machine(name):
    return hand_machines()[name][0]


@pytest.fixture(scope="module")
def two():
    tm = two_state_machine()
    return tm, EncodingParams.for_machine(tm, 1)


def test_insertable_letters():
    params = EncodingParams(2, ("q0", "qf"))
    assert insertable_letters(params) == ("p1", "p2", "m1", "m2")
    with pytest.raises(InputError):
        insertable_letters(EncodingParams(1, ("p1", "qf")))


def test_address_cap():
    tm = machine("accept_immediately")
    with pytest.raises(InputError):
        build_not_wf(EncodingParams.for_machine(tm, 5))


@pytest.mark.parametrize("p", [1, 2])
def test_not_wf_examples(p):
    params = EncodingParams(p, ("q0", "qf"))
    n = build_not_wf(params)
    good = encode_config(TmConfig((0,) * params.cells, 0, "q0"), params)
    assert not accepts(n, good)
    # repeat cell 0 in place of cell 1
    cell = p + 3
    repeated = good[: 1 + cell + 1] + good[1 + 1 : 1 + cell] + good[1 + cell + 1 :]
    assert not is_well_formed_config(repeated, params)
    assert accepts(n, repeated)
    no_state = tuple(s for s in good if s != "q0")
    assert accepts(n, no_state)


@pytest.mark.parametrize("p", [1, 2])
def test_not_wf_matches_parser_on_mutations(p):
    params = EncodingParams(p, ("q0", "q1", "qf"))
    n = build_not_wf(params)
    rng = random.Random(p)
    for _ in range(300):
        cfg = TmConfig(tuple(rng.randint(0, 1) for _ in range(params.cells)), rng.randrange(params.cells), rng.choice(params.states))
        _, word = mutate(rng, encode_config(cfg, params), params)
        assert accepts(n, word) == (not is_well_formed_config(word, params))


def test_not_seq_cfg_examples():
    tm = machine("accept_immediately")
    params = EncodingParams.for_machine(tm, 1)
    n = build_not_seq_cfg(tm, params, (1,))
    good = encode_run(run(tm, (1,), 1).configs, params)
    assert not accepts(n, good)
    assert accepts(n, good[:-1])
    assert accepts(n, ("▷", "□"))
    # wrong input on the first tape
    assert accepts(n, encode_run(run(tm, (0,), 1).configs, params))
    # inserted letters are ignored
    assert not accepts(n, good[:3] + ("p1", "m1") + good[3:])


def test_not_seq_cfg_matches_oracle_on_mutations():
    tm = machine("written_bit")
    params = EncodingParams.for_machine(tm, 1)
    rng = random.Random(3)
    for text in ("0", "1", "10"):
        t = tuple(int(c) for c in text)
        n = build_not_seq_cfg(tm, params, t)
        base = encode_run(run(tm, t, 1).configs, params)
        for _ in range(60):
            _, word = mutate(rng, base, params)
            assert accepts(n, word) == not_seq_cfg_oracle(tm, params, t, word)


def test_not_delta_accepts_no_plain_word(two):
    tm, params = two
    # without inserted tags no pattern pair can match
    n = build_not_delta(tm, params)
    for c1 in all_configs(tm, params)[:8]:
        assert not accepts(n, encode_run([c1, c1], params))


def test_pattern_pairs_match_violation_predicate(two):
    tm, params = two
    letters = insertable_letters(params)
    singles = [((kind, rule), pattern_pair(params, kind, rule)) for rule in tm.rules() for kind in RULE_KINDS]
    singles.append(((ViolationKind.FRAME, None), pattern_pair(params, ViolationKind.FRAME)))
    configs = all_configs(tm, params)
    rng = random.Random(0)
    for _ in range(60):
        c1, c2 = rng.choice(configs), rng.choice(configs)
        word = encode_run([c1, c2], params)
        found = delta_violations(tm, c1, c2)
        for key, nfa in singles:
            inst = InsertionInstance(letters, params.alphabet, nfa)
            assert (insertable(inst, word) is not None) == (key in found), (c1, c2, key)


def test_correct_step_has_no_violation(two):
    tm, params = two
    c1 = TmConfig((0, 1), 0, "q0")
    c2 = TmConfig((1, 1), 1, "qf")
    assert delta_violations(tm, c1, c2) == set()
    inst = InsertionInstance(insertable_letters(params), params.alphabet, build_not_delta(tm, params))
    assert insertable(inst, encode_run([c1, c2], params)) is None
    wrong = TmConfig((0, 1), 1, "qf")
    wit = insertable(inst, encode_run([c1, wrong], params))
    assert wit is not None
    assert accepts(inst.nfa, wit.arranged())


def test_components_are_named():
    tm = machine("accept_immediately")
    params = EncodingParams.for_machine(tm, 1)
    names = [name for name, _ in gadget_components(tm, params, (0,))]
    assert names[0].startswith("not_seq_cfg.")
    assert "not_delta.frame" in names
    assert len(names) == len(set(names))
    inst = build_instance(tm, params, (0,))
    assert inst.insertables == ("p1", "m1")


@pytest.mark.parametrize("name", ["accept_immediately", "cycle_non_final", "written_bit", "off_left_edge"])
@pytest.mark.parametrize("p", [1, 2])
def test_decide_reachability_matches_simulation(name, p):
    tm, inputs = hand_machines()[name]
    params = EncodingParams.for_machine(tm, p)
    for text in inputs:
        t = tuple(int(c) for c in text)
        if len(t) > params.cells:
            continue
        expected = run(tm, t, p)
        got = decide_reachability(tm, params, t)
        assert got.accepting == (expected.status == ACCEPTING)
        if got.accepting:
            assert got.run == expected.configs
            assert got.run[0].state == tm.initial and got.run[-1].state == tm.final


def test_initial_state_final_machine():
    tm = TuringMachine(("q0",), {}, "q0", "q0")
    res = decide_reachability(tm, EncodingParams.for_machine(tm, 1), (1,))
    assert res.accepting and len(res.run) == 1


def test_validate_run_rejects_bad_runs():
    tm = machine("accept_immediately")
    good = list(run(tm, (0,), 1).configs)
    validate_run(tm, good, (0,), 1)
    with pytest.raises(GadgetError):
        validate_run(tm, [], (0,), 1)
    with pytest.raises(GadgetError):
        validate_run(tm, good[:1], (0,), 1)
    with pytest.raises(GadgetError):
        validate_run(tm, good, (1,), 1)
