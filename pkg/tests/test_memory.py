import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linreduce.automata import InputError
from linreduce.linearizability import canonical_threads
from linreduce.memory import (
    Configuration,
    Library,
    Method,
    Step,
    call,
    check_trace,
    completions,
    enumerate_traces,
    explore_shapes,
    is_complete,
    is_trace_of,
    method_events,
    open_calls,
    replay,
    ret,
    successors,
    trace_from_json,
    trace_shape,
    trace_to_json,
)


def token_library():
    return Library(
        (
            Method("M_A", ("q0", "q1", "q2"), (("q0", "read", "empty", "q1"), ("q1", "write", "full", "q2")), "q0", "q2"),
            Method("M_B", ("q0", "q1", "q2"), (("q0", "read", "full", "q1"), ("q1", "write", "empty", "q2")), "q0", "q2"),
        ),
        ("empty", "full"),
        "empty",
    )


def reader_library():
    return Library((Method("R", ("q0", "q1"), (("q0", "read", "d0", "q1"),), "q0", "q1"),), ("d0", "d1"), "d0")


@st.composite
def libraries(draw):
    domain = ("u", "v")
    methods = []
    for name in draw(st.sampled_from([("A",), ("A", "B")])):
        n = draw(st.integers(1, 3))
        states = tuple(f"s{i}" for i in range(n))
        delta = draw(
            st.lists(
                st.tuples(st.sampled_from(states), st.sampled_from(("read", "write")), st.sampled_from(domain), st.sampled_from(states)),
                max_size=4,
            )
        )
        methods.append(Method(name, states, tuple(delta), "s0", states[-1]))
    return Library(tuple(methods), domain, "u")


def reference_traces(lib, k, max_steps):
    """Breadth-first search over (trace, configuration) using successors."""
    layer = {((), Configuration.initial(lib, k))}
    seen = set(layer)
    traces = {()}
    for _ in range(max_steps):
        nxt = set()
        for trace, cfg in layer:
            for step, cfg2 in successors(lib, k, cfg):
                t2 = trace + ((step.event,) if step.event else ())
                traces.add(t2)
                if (t2, cfg2) not in seen:
                    seen.add((t2, cfg2))
                    nxt.add((t2, cfg2))
        layer = nxt
    return traces


def test_all_idle_configuration_has_one_call_per_thread_and_method():
    lib = token_library()
    steps = successors(lib, 3, Configuration.initial(lib, 3))
    assert len(steps) == 3 * 2
    assert all(s.kind == "call" for s, _ in steps)


def test_single_reader_traces():
    assert set(enumerate_traces(reader_library(), 1, 3)) == {(), (call(1, "R"),), (call(1, "R"), ret(1))}


def test_reads_need_the_guessed_value():
    lib = Library((Method("R", ("q0", "q1"), (("q0", "read", "d1", "q1"),), "q0", "q1"),), ("d0", "d1"), "d0")
    assert set(enumerate_traces(lib, 1, 5)) == {(), (call(1, "R"),)}


def test_write_updates_shared_value():
    lib = token_library()
    _, cfg = replay(lib, 1, [Step(1, "call", "M_A"), Step(1, "read", "empty"), Step(1, "write", "full")])
    assert cfg.shared == "full"
    assert cfg.threads == ((0, "q2"),)
    with pytest.raises(InputError):
        replay(lib, 1, [Step(1, "call", "M_B"), Step(1, "read", "empty")])


@settings(max_examples=40, deadline=None)
@given(libraries(), st.integers(1, 2), st.integers(0, 6))
def test_enumeration_matches_reference(lib, k, bound):
    got = enumerate_traces(lib, k, bound)
    assert len(got) == len(set(got))
    assert set(got) == reference_traces(lib, k, bound)
    canon = enumerate_traces(lib, k, bound, canonical=True)
    assert set(canon) == {canonical_threads(t) for t in got}


@settings(max_examples=40, deadline=None)
@given(libraries(), st.integers(1, 3), st.integers(0, 7))
def test_shape_exploration_covers_every_shape(lib, k, bound):
    reps = explore_shapes(lib, k, bound)
    shapes = [trace_shape(t) for t in reps]
    assert len(shapes) == len(set(shapes))
    assert set(shapes) == {trace_shape(t) for t in enumerate_traces(lib, k, bound)}
    for t in reps:
        assert is_trace_of(lib, k, t, bound)


def test_is_trace_of():
    lib = token_library()
    assert is_trace_of(lib, 2, (call(1, "M_A"), call(2, "M_B"), ret(1), ret(2)))
    # M_B cannot finish before some M_A has written
    assert not is_trace_of(lib, 1, (call(1, "M_B"), ret(1)))
    assert not is_trace_of(lib, 2, (call(1, "M_A"), ret(1)), max_steps=3)


def test_trace_validation_and_json(fig1):
    assert trace_from_json(trace_to_json(fig1)) == fig1
    with pytest.raises(InputError):
        check_trace([ret(1)])
    with pytest.raises(InputError):
        check_trace([call(1, "A"), call(1, "A")])
    with pytest.raises(InputError):
        trace_from_json('[{"bogus": 1}]')


def test_completions_of_two_open_calls():
    trace = (call(1, "A"), call(2, "B"))
    assert open_calls(trace) == [0, 1]
    got = list(completions(trace))
    # drop both, close either one, or close both in two orders
    assert len(got) == 5
    assert got[0] == ()
    assert all(is_complete(c) for c in got)


def test_happens_before_of_fig1(fig1):
    events, hb = method_events(fig1)
    assert [e.label for e in events] == ["M_A", "M_A", "M_B", "M_B"]
    assert hb == {(0, 2), (0, 3), (1, 3)}


def test_shape_ignores_order_inside_blocks(fig1):
    swapped = (call(2, "M_A"), call(1, "M_A")) + fig1[2:]
    assert trace_shape(swapped) == trace_shape(fig1)
    renamed = tuple(e._replace(thread=3 - e.thread) for e in fig1)
    assert trace_shape(renamed) == trace_shape(fig1)
    assert trace_shape(fig1[:-1]) != trace_shape(fig1)


def test_library_json_round_trip():
    lib = token_library()
    assert Library.from_json(lib.to_json()) == lib
    with pytest.raises(InputError):
        Library.from_dict({"domain": ["x"], "initial_value": "y", "methods": []})
    with pytest.raises(InputError):
        Method("M", ("q0",), (("q0", "jump", "x", "q0"),), "q0", "q0")
