"""Acceptance criteria, one test each.

Every test records a single verdict line; ``conftest.py`` prints them at the
end of the run.  ``python tests/test_acceptance.py`` runs them without
pytest.
"""

import json
import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

from linreduce.automata import accepts, regex_to_nfa, seq, star
from linreduce.gadgets import decide_reachability, validate_run
from linreduce.linearizability import trace_linearizable
from linreduce.memory import call, check_trace, ret
from linreduce.oracles import delta_suite, gadget_suite, hand_machines, insertion_suite, li2lin_suite, load_defaults
from linreduce.turing import ACCEPTING, HALTED_NON_FINAL, EncodingParams, run

SAMPLES = Path(__file__).resolve().parent.parent / "samples"
RESULTS: list[str] = []


def report(number, title, ok, detail, seconds):
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail} ({seconds:.1f}s)"
    RESULTS.append(line)
    return line


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def failures(records):
    return [r.to_dict() for r in records if not r.passed]


def test_criterion_1_figures():
    spec = regex_to_nfa(star(seq("M_A", "M_B")))
    fig1 = check_trace([call(1, "M_A"), call(2, "M_A"), ret(1), call(1, "M_B"), ret(2), call(2, "M_B"), ret(1), ret(2)])
    fig2 = check_trace(
        [
            call(1, "M_A"), call(2, "M_A"), call(3, "M_A"), ret(1), call(1, "M_B"), ret(2),
            call(2, "M_B"), ret(3), ret(1), call(3, "M_B"), ret(2), ret(3),
        ]
    )
    fig3 = check_trace([call(1, "M_A"), call(2, "M_A"), ret(1), ret(2), call(1, "M_B"), call(2, "M_B"), ret(1), ret(2)])
    with Timer() as tm:
        w1 = trace_linearizable(fig1, spec)
        w2 = trace_linearizable(fig2, spec)
        w3 = trace_linearizable(fig3, spec)
    checks = {
        "fig1 labels ABAB": w1 is not None and w1.labels == ("M_A", "M_B", "M_A", "M_B"),
        "fig2 linearizable, 6 events": w2 is not None and len(w2.events) == 6 and accepts(spec, w2.labels),
        "fig3 not linearizable": w3 is None,
        "under 1 s": tm.seconds < 1.0,
    }
    ok = all(checks.values())
    print(report(1, "figure fidelity", ok, ", ".join(f"{k}={v}" for k, v in checks.items()), tm.seconds))
    assert ok, checks


def test_criterion_2_decider_soundness():
    d = load_defaults()
    cfg = d["insertion"]
    with Timer() as tm:
        records = insertion_suite(d["seed"], cfg)
    bad = failures(records)
    ok = not bad and len(records) >= 200 and cfg["max_letters"] <= 3 and cfg["max_word"] >= 5 and tm.seconds < 60
    print(report(2, "decider soundness", ok, f"{len(records) - len(bad)}/{len(records)} instances agree", tm.seconds))
    assert ok, bad[:3]


def test_criterion_3_li2lin_reduction():
    d = load_defaults()
    cfg = d["li2lin"]
    with Timer() as tm:
        records = li2lin_suite(d["seed"], cfg)
    bad = failures(records)
    instances = {r.case_id.split("/")[0] for r in records}
    counter = sum(r.case_id.endswith("fig4-brute") for r in records)
    bounded = sum("/bounded-" in r.case_id for r in records)
    ok = not bad and len(instances) >= 50 and cfg["extra_steps"] >= 4 and tm.seconds < 300
    detail = f"{len(instances)} instances ({counter} counterexamples, {bounded} universal), {len(bad)} failed records"
    print(report(3, "reduction equivalence", ok, detail, tm.seconds))
    assert ok, bad[:3]


def test_criterion_4_gadgets():
    d = load_defaults()
    with Timer() as tm:
        records = gadget_suite(hand_machines(), (1, 2), d["seed"], d["tm"])
    bad = failures(records)
    ok = not bad and len(records) >= 500 and tm.seconds < 120
    print(report(4, "NotWF/NotSeqCfg correctness", ok, f"{len(records) - len(bad)}/{len(records)} corpus cases agree", tm.seconds))
    assert ok, bad[:3]


def test_criterion_5_not_delta():
    with Timer() as tm:
        records = delta_suite()
    bad = failures(records)
    pairs = sum(r.suite == "not_delta" for r in records)
    ok = not bad and pairs == 256 and tm.seconds < 300
    print(report(5, "insertion error vs delta violation", ok, f"{pairs} configuration pairs, {len(records)} records, {len(bad)} disagreements", tm.seconds))
    assert ok, bad[:3]


def test_criterion_6_combination():
    machines = hand_machines()
    outcomes = set()
    cases = []
    with Timer() as tm:
        for p in (1, 2):
            for name, (machine, inputs) in machines.items():
                params = EncodingParams.for_machine(machine, p)
                for text in inputs:
                    t = tuple(int(c) for c in text)
                    if len(t) > params.cells:
                        continue
                    expected = run(machine, t, p, max_steps=100_000)
                    outcomes.add((name, expected.status))
                    got = decide_reachability(machine, params, t)
                    good = got.accepting == (expected.status == ACCEPTING)
                    if got.accepting:
                        validate_run(machine, list(got.run), t, p)
                        good = good and got.run[0].state == machine.initial and got.run[-1].state == machine.final
                    cases.append((f"P{p}/{name}/{text}", good))
    bad = [c for c, good in cases if not good]
    kinds = {
        "accepting": ("accept_immediately", ACCEPTING) in outcomes,
        "halting non-final": ("cycle_non_final", HALTED_NON_FINAL) in outcomes,
        "written bit decides": {("written_bit", ACCEPTING)} <= outcomes and len({s for n, s in outcomes if n == "written_bit"}) > 1,
    }
    ok = not bad and all(kinds.values()) and len(machines) >= 3 and tm.seconds < 600
    print(report(6, "end-to-end reachability", ok, f"{len(cases) - len(bad)}/{len(cases)} cases agree, machine kinds {kinds}", tm.seconds))
    assert ok, (bad, kinds)


def cli_runs(work: Path):
    """Every subcommand once; paths inside ``work``."""
    s = lambda name: str(SAMPLES / name)  # noqa: E731
    small = {
        "seed": 11,
        "insertion": {"instances": 10, "max_letters": 2, "max_states": 3, "max_gamma": 2, "max_word": 3},
        "li2lin": {"instances": 4, "max_letters": 1, "max_states": 2, "max_gamma": 2, "extra_steps": 4},
        "tm": {"addr_bits": [1], "mutations_per_word": 3, "valid_configs": 2, "valid_runs": 2},
    }
    (work / "small.json").write_text(json.dumps(small))
    return [
        ["decide-insertion", s("insertion_no.json")],
        ["decide-insertion", s("insertion_yes.json")],
        ["check-lin", s("token_library.json"), s("spec_ab.json"), "--threads", "2", "--max-steps", "20", "--trace", s("fig1_trace.json")],
        ["check-lin", s("token_library.json"), s("spec_ab_prefix.json"), "--threads", "2", "--max-steps", "8"],
        ["reduce-li2lin", s("insertion_no.json"), "--out-dir", str(work / "li2lin")],
        ["reduce-tm2li", s("tm_written_bit.json"), "--input", "0", "--addr-bits", "1", "--out", str(work / "tm.json"), "--dot", str(work / "dot")],
        ["run-tm", s("tm_written_bit.json"), "--input", "10", "--addr-bits", "2", "--encode"],
        ["decide-reach", s("tm_written_bit.json"), "--input", "0", "--addr-bits", "1"],
        ["verify-lemmas", "--suite", "all", "--config", str(work / "small.json"), "--report", str(work / "report.json")],
    ]


def run_all_once(hash_seed: str) -> dict[str, bytes]:
    outputs = {}
    with tempfile.TemporaryDirectory() as tmp:
        work = Path(tmp)
        env = dict(os.environ, PYTHONHASHSEED=hash_seed)
        for i, argv in enumerate(cli_runs(work)):
            proc = subprocess.run([sys.executable, "-m", "linreduce.cli", *argv, "--json"], capture_output=True, env=env)
            # temporary paths never appear in the output, so bytes compare directly
            outputs[f"{i}:{argv[0]}:exit"] = str(proc.returncode).encode()
            outputs[f"{i}:{argv[0]}:stdout"] = proc.stdout
        for path in sorted(work.rglob("*")):
            if path.is_file():
                outputs[f"file:{path.relative_to(work)}"] = path.read_bytes()
    return outputs


def test_criterion_7_determinism():
    with Timer() as tm:
        first = run_all_once("1")
        second = run_all_once("2")
    differing = sorted(k for k in first.keys() | second.keys() if first.get(k) != second.get(k))
    commands = {k.split(":")[1] for k in first if k.endswith(":stdout")}
    errors = [k for k, v in first.items() if k.endswith(":exit") and v == b"2"]
    ok = not differing and not errors and len(commands) == 7
    detail = f"{len(commands)} subcommands, {len(first)} outputs compared, {len(differing)} differ"
    print(report(7, "determinism", ok, detail, tm.seconds))
    assert ok, (differing, errors)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
