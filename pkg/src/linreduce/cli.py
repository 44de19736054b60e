"""Command-line front end.

Every subcommand prints one verdict object ``{verdict, witness?,
counterexample?, stats}``; ``--json`` prints it as JSON, otherwise as
``key: value`` lines.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .automata import Counterexample, InputError, Nfa, ResourceError, to_dot
from .gadgets import GadgetError, build_instance, decide_reachability, gadget_components
from .insertion import InsertionInstance, closure_nfa, decide
from .li2lin import reduce
from .linearizability import library_linearizable_bounded, trace_linearizable
from .memory import Library, is_trace_of, trace_from_json
from .oracles import load_defaults, verify_all
from .turing import EncodingParams, TuringMachine, encode_run, parse_bits, run

EXIT_OK, EXIT_FOUND, EXIT_ERROR = 0, 1, 2


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _load(path: str, kind):
    try:
        return kind.from_json(_read(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg})") from exc


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n", encoding="utf-8")


def _word(word) -> list[str]:
    return list(word)


def _tm_inputs(args) -> tuple[TuringMachine, EncodingParams, tuple[int, ...]]:
    tm = _load(args.tm, TuringMachine)
    return tm, EncodingParams.for_machine(tm, args.addr_bits), parse_bits(args.input)


# -- subcommands -----------------------------------------------------------


def cmd_decide_insertion(args) -> tuple[dict, int]:
    inst = _load(args.instance, InsertionInstance)
    verdict = decide(inst, cap=args.cap)
    stats = {"closure_states": closure_nfa(inst).state_count, "explored": verdict.explored}
    if isinstance(verdict, Counterexample):
        return {"verdict": verdict.verdict, "counterexample": _word(verdict.word), "stats": stats}, EXIT_FOUND
    return {"verdict": verdict.verdict, "stats": stats}, EXIT_OK


def cmd_check_lin(args) -> tuple[dict, int]:
    lib = _load(args.library, Library)
    spec = _load(args.spec, Nfa)
    stats = {"threads": args.threads, "max_steps": args.max_steps}
    if args.trace:
        try:
            trace = trace_from_json(_read(args.trace))
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.trace}: invalid JSON ({exc.msg})") from exc
        stats["trace_of_library"] = is_trace_of(lib, args.threads, trace, args.max_steps)
        witness = trace_linearizable(trace, spec)
        if witness is None:
            return {"verdict": "not_linearizable", "counterexample": [e.to_dict() for e in trace], "stats": stats}, EXIT_FOUND
        return {"verdict": "linearizable", "witness": witness.to_dict(), "stats": stats}, EXIT_OK
    res = library_linearizable_bounded(lib, args.threads, spec, args.max_steps, cap=args.cap)
    stats["shapes_checked"] = res.traces_checked
    if not res.ok:
        return {"verdict": res.verdict, "counterexample": [e.to_dict() for e in res.counterexample], "stats": stats}, EXIT_FOUND
    return {"verdict": res.verdict, "stats": stats}, EXIT_OK


def cmd_reduce_li2lin(args) -> tuple[dict, int]:
    inst = _load(args.instance, InsertionInstance)
    system = reduce(inst)
    out = Path(args.out_dir)
    _write(out / "library.json", system.library.to_json())
    _write(out / "spec.json", system.spec.to_json())
    _write(out / "k.txt", str(system.threads))
    stats = {
        "threads": system.threads,
        "methods": len(system.library.methods),
        "spec_states": system.spec.state_count,
        "files": ["library.json", "spec.json", "k.txt"],
    }
    return {"verdict": "written", "stats": stats}, EXIT_OK


def _dot_name(index: int, name: str) -> str:
    return f"{index:02d}_{re.sub(r'[^A-Za-z0-9_.-]+', '_', name).strip('_')}.dot"


def cmd_reduce_tm2li(args) -> tuple[dict, int]:
    tm, params, t = _tm_inputs(args)
    inst = build_instance(tm, params, t)
    _write(Path(args.out), inst.to_json())
    stats = {
        "insertables": list(inst.insertables),
        "base_symbols": len(inst.base),
        "nfa_states": inst.nfa.state_count,
        "nfa_transitions": len(inst.nfa.transitions),
    }
    if args.dot:
        parts = gadget_components(tm, params, t)
        for i, (name, nfa) in enumerate(parts):
            _write(Path(args.dot) / _dot_name(i, name), to_dot(nfa, name).rstrip("\n"))
        stats["dot_files"] = len(parts)
    return {"verdict": "written", "stats": stats}, EXIT_OK


def cmd_run_tm(args) -> tuple[dict, int]:
    tm, params, t = _tm_inputs(args)
    res = run(tm, t, args.addr_bits, max_steps=args.max_steps)
    obj = {"verdict": res.status, "witness": {"configs": [c.to_dict() for c in res.configs]}}
    if args.encode:
        obj["witness"]["word"] = _word(encode_run(res.configs, params))
    obj["stats"] = {"configs": len(res.configs)}
    return obj, EXIT_OK


def cmd_decide_reach(args) -> tuple[dict, int]:
    tm, params, t = _tm_inputs(args)
    res = decide_reachability(tm, params, t, cap=args.cap)
    obj: dict = {"verdict": res.verdict}
    if res.accepting:
        obj["witness"] = {"run": [c.to_dict() for c in res.run], "word": _word(res.word)}
    obj["stats"] = {"explored": res.explored}
    return obj, EXIT_OK


def cmd_verify_lemmas(args) -> tuple[dict, int]:
    defaults = load_defaults(args.config)
    records = verify_all(args.suite, args.seed, defaults)
    if args.report:
        _write(Path(args.report), json.dumps([r.to_dict() for r in records], ensure_ascii=False, indent=1))
    failures = [r.to_dict() for r in records if not r.passed]
    suites: dict[str, dict[str, int]] = {}
    for r in records:
        entry = suites.setdefault(r.suite, {"cases": 0, "failed": 0})
        entry["cases"] += 1
        entry["failed"] += not r.passed
    seed = defaults["seed"] if args.seed is None else args.seed
    obj: dict = {"verdict": "fail" if failures else "pass"}
    if failures:
        obj["counterexample"] = failures
    obj["stats"] = {"seed": seed, "cases": len(records), "suites": suites}
    return obj, EXIT_FOUND if failures else EXIT_OK


# -- argument parsing ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linreduce", description="Letter Insertion, linearizability and the reductions between them.")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--json", action="store_true", help="print the verdict object as JSON")
        p.set_defaults(handler=handler)
        return p

    def tm_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("tm", help="Turing machine JSON file")
        p.add_argument("--input", required=True, help="input bits, e.g. 0110")
        p.add_argument("--addr-bits", type=int, required=True, help="address width P (tape of 2**P cells)")

    p = command("decide-insertion", cmd_decide_insertion, "decide a Letter Insertion instance")
    p.add_argument("instance")
    p.add_argument("--cap", type=int, default=1 << 22, help="bound on explored subsets")

    p = command("check-lin", cmd_check_lin, "bounded linearizability check, or check one trace")
    p.add_argument("library")
    p.add_argument("spec")
    p.add_argument("--threads", type=int, required=True)
    p.add_argument("--max-steps", type=int, required=True)
    p.add_argument("--trace", help="check this trace instead of exploring the library")
    p.add_argument("--cap", type=int, default=1 << 22, help="bound on explored search nodes")

    p = command("reduce-li2lin", cmd_reduce_li2lin, "compile an instance into a library and a spec")
    p.add_argument("instance")
    p.add_argument("--out-dir", required=True)

    p = command("reduce-tm2li", cmd_reduce_tm2li, "compile a Turing machine into an instance")
    tm_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--dot", help="directory for one Graphviz file per gadget component")

    p = command("run-tm", cmd_run_tm, "simulate a Turing machine on a bounded tape")
    tm_args(p)
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--encode", action="store_true", help="include the encoded run word")

    p = command("decide-reach", cmd_decide_reach, "decide acceptance through the gadget instance")
    tm_args(p)
    p.add_argument("--cap", type=int, default=1 << 22, help="bound on explored subsets")

    p = command("verify-lemmas", cmd_verify_lemmas, "run the oracle suites")
    p.add_argument("--suite", choices=("li2lin", "tm", "all"), default="all")
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="harness settings JSON (defaults are built in)")
    p.add_argument("--report", help="write the full per-case report to this file")
    return parser


def _print(obj: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(obj, ensure_ascii=False, indent=2))
        return
    for key, value in obj.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, ensure_ascii=False)
        print(f"{key}: {value}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        obj, code = args.handler(args)
    except (InputError, ResourceError, GadgetError) as exc:
        _print({"verdict": "error", "stats": {"error": str(exc), "kind": type(exc).__name__}}, args.json)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    _print(obj, args.json)
    return code


if __name__ == "__main__":
    sys.exit(main())
