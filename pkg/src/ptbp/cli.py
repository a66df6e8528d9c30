"""Command-line interface: ``ptbp <command> ...``.

Exit codes: 0 yes/ok, 1 no (or diagnostics), 2 inconclusive, 3 unsupported
or refused, 64 usage error, 65 parse error, 66 missing input.
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import encodings
from .decide import Kind, ProblemSpec, Status, solve
from .model import PTBPError, classify, format_rational, substitute, validate
from .regions import ScaledProtocol, backward_coverability, word_graph
from .semantics import Mode, ReplayError, reaches, replay, simulate
from .textio import (
    ParseFailure,
    parse_machine,
    parse_protocol,
    parse_pval,
    parse_trace,
    read_protocol,
    serialize_protocol,
    serialize_trace,
)

EXIT_OK, EXIT_NO, EXIT_INCONCLUSIVE, EXIT_UNSUPPORTED = 0, 1, 2, 3
EXIT_USAGE, EXIT_PARSE, EXIT_NOINPUT = 64, 65, 66

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class Output:
    """Collects the human report and the machine-readable document."""

    def __init__(self, command, as_json, timing):
        self.as_json = as_json
        self.timing = timing
        self.started = time.perf_counter()
        self.doc = {
            "schema": SCHEMA_VERSION,
            "command": command,
            "exit_code": None,
            "verdict": None,
            "witness": None,
            "stats": {"states_explored": None, "basis_size": None, "wall_time": None},
            "messages": [],
        }

    def say(self, text):
        self.doc["messages"].append(text)
        if not self.as_json:
            print(text)

    def warn(self, text):
        self.doc["messages"].append(text)
        print(text, file=sys.stderr)

    def finish(self, code):
        self.doc["exit_code"] = code
        if self.timing:
            self.doc["stats"]["wall_time"] = round(time.perf_counter() - self.started, 6)
        if self.as_json:
            print(json.dumps(self.doc, indent=2, sort_keys=True))
        return code


def _colour(text, code):
    if os.environ.get("NO_COLOR") or not sys.stdout.isatty():
        return text
    return f"\033[{code}m{text}\033[0m"


def _read(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(str(path))
    return path.read_text()


def _load_protocol(path):
    return parse_protocol(_read(path), str(path))


def _pval(text):
    return parse_pval(text) if text else {}


# commands -------------------------------------------------------------------


def cmd_validate(args, out):
    protocol, errors = read_protocol(_read(args.file), str(args.file))
    if errors:
        for e in errors:
            out.warn(str(e))
        return EXIT_PARSE
    diags = validate(protocol)
    for d in diags:
        line = d.line if d.line is not None else 1
        out.warn(f"{args.file}:{line}: {d.code}: {d.message}")
    if diags:
        return EXIT_NO
    out.say(f"ok: {protocol.name} ({len(protocol.locations)} locations, {len(protocol.edges)} edges)")
    return EXIT_OK


def cmd_classify(args, out):
    protocol = _load_protocol(args.file)
    info = classify(protocol)
    out.doc["classification"] = {
        "clocks": info.clock_count,
        "fragment": info.fragment.value,
        "boundedness": info.boundedness.value,
        "roles": {p: r.value for p, r in info.roles.items()},
    }
    out.say(f"clocks: {info.clock_count}")
    out.say(f"fragment: {info.fragment.value}")
    out.say(f"boundedness: {info.boundedness.value}")
    for p, role in info.roles.items():
        out.say(f"param {p}: {role.value}, {protocol.bound(p)}")
    return EXIT_OK


def _verdict_code(verdict):
    if verdict.status == Status.DECIDED:
        return EXIT_OK if verdict.answer else EXIT_NO
    if verdict.status == Status.SEMIDECIDED:
        return EXIT_OK
    if verdict.status == Status.INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_UNSUPPORTED


def cmd_check(args, out):
    protocol = _load_protocol(args.file)
    if args.goal not in protocol.locations:
        raise UsageError(f"goal {args.goal} is not a location of {protocol.name}")
    spec = ProblemSpec(
        protocol,
        args.goal,
        Mode.parse(args.semantics),
        Kind(args.problem),
        n_max=args.n_max,
        step_max=args.step_max,
        pval=_pval(args.pval) if args.pval else None,
    )
    verdict = solve(spec)
    code = _verdict_code(verdict)
    colour = {EXIT_OK: "32", EXIT_NO: "31", EXIT_INCONCLUSIVE: "33", EXIT_UNSUPPORTED: "35"}[code]
    out.doc["verdict"] = {
        "status": verdict.status.value,
        "answer": verdict.answer,
        "procedure": verdict.procedure,
        "citation": verdict.citation or None,
        "explored_up_to": verdict.explored_up_to,
        "headline": verdict.headline(),
    }
    stats = verdict.stats
    out.doc["stats"]["states_explored"] = stats.get("states")
    out.doc["stats"]["basis_size"] = stats.get("basis_size")
    if not args.json:
        print(_colour(verdict.headline(), colour))
    out.doc["messages"].append(verdict.headline())
    if verdict.citation:
        out.say(f"procedure: {verdict.procedure} [{verdict.citation}]")
    if "error" in stats:
        out.say(f"reason: {stats['error']}")
    if verdict.witness is not None:
        w = verdict.witness
        text = serialize_trace(w.N, w.mode, w.pval, w.trace, header=[f"witness for {args.goal} in {protocol.name}"])
        out.doc["witness"] = {
            "N": w.N,
            "pval": {k: format_rational(v) for k, v in w.pval.items()},
            "path": str(args.witness) if args.witness else None,
            "steps": len(w.trace),
        }
        if args.witness:
            Path(args.witness).write_text(text)
            out.say(f"witness: N={w.N}, {len(w.trace)} steps, written to {args.witness}")
        else:
            out.say(f"witness: N={w.N}, {len(w.trace)} steps")
            if not args.json:
                sys.stdout.write(text)
    if verdict.counterexample is not None:
        lasso = verdict.counterexample
        out.doc["counterexample"] = {
            "prefix": [list(s) for s in lasso.prefix],
            "cycle": [list(s) for s in lasso.cycle],
            "dead_end": list(lasso.dead_end) if lasso.dead_end else None,
        }
        shape = "cycle" if lasso.cycle else "dead end"
        out.say(f"counterexample ({shape}): prefix {lasso.prefix} loop {lasso.cycle or lasso.dead_end}")
    return code


def cmd_simulate(args, out):
    protocol = _load_protocol(args.file)
    if args.replay:
        tf = parse_trace(_read(args.replay), str(args.replay))
        pval = _pval(args.pval) if args.pval else tf.pval
        mode = Mode.parse(args.semantics) if args.semantics else Mode.parse(tf.mode)
        N = args.n or tf.N
        try:
            execution = replay(protocol, pval, mode, tf.labels, N)
        except ReplayError as err:
            out.warn(str(err))
            out.doc["replay_error"] = {"step": err.step_index, "cause": err.cause.code}
            return EXIT_NO
    else:
        if args.n is None:
            raise UsageError("simulate needs --n (or --replay)")
        pval = _pval(args.pval)
        mode = Mode.parse(args.semantics or "reconf")
        execution = simulate(protocol, pval, mode, args.n, args.steps, args.seed)
        N = args.n
    out.doc["final"] = str(execution.final)
    out.doc["flag"] = execution.flag.value
    out.say(f"steps: {len(execution.steps)} ({execution.flag.value})")
    out.say(f"duration: {format_rational(execution.duration)}")
    out.say(f"final: {execution.final}")
    if args.goal:
        hit = reaches(execution, args.goal)
        out.say(f"reaches {args.goal}: {'yes' if hit else 'no'}")
    if args.trace:
        Path(args.trace).write_text(serialize_trace(N, mode, pval, execution.labels))
        out.say(f"trace written to {args.trace}")
    return EXIT_OK


def cmd_encode(args, out):
    machine = parse_machine(_read(args.machine), str(args.machine))
    if args.target == "ef-reconf":
        protocol = encodings.encode_ef_reconf(machine, with_integer_gadget=args.with_integer_gadget)
    elif args.with_integer_gadget:
        raise UsageError("--with-integer-gadget only applies to --target ef-reconf")
    elif args.target == "af-clique":
        protocol = encodings.encode_af_clique(machine)
    else:
        protocol = encodings.encode_efu_clique(machine)
    diags = validate(protocol)
    if diags:
        for d in diags:
            out.warn(str(d))
        return EXIT_NO
    info = classify(protocol)
    header = [
        f"{args.target} encoding of {Path(args.machine).name}",
        f"semantics {encodings.MODE_OF_TARGET[args.target].value}, fragment {info.fragment.value}",
    ]
    text = serialize_protocol(protocol, header)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
        out.say(
            f"wrote {args.output}: {len(protocol.locations)} locations, {len(protocol.edges)} edges, "
            f"{info.clock_count} clocks, {len(protocol.params)} params"
        )
    return EXIT_OK


def cmd_regions(args, out):
    protocol = _load_protocol(args.file)
    if len(protocol.clocks) > 1:
        out.warn(f"MULTI_CLOCK: {len(protocol.clocks)} clocks; region words need one")
        return EXIT_UNSUPPORTED
    pval = _pval(args.pval)
    concrete = substitute(protocol, pval)
    sp = ScaledProtocol(concrete)
    mode = Mode.parse(args.semantics)
    if args.basis_of:
        if mode == Mode.CLIQUE:
            out.warn("CLIQUE_UNSUPPORTED: backward coverability needs the reconfigurable semantics")
            return EXIT_UNSUPPORTED
        result = backward_coverability(concrete, args.basis_of, copycat=not args.exact)
        out.doc["stats"]["basis_size"] = len(result.basis)
        out.say(f"coverable: {'yes' if result.reachable else 'no'} after {result.iterations} iterations")
        for w in result.basis:
            out.say(str(w))
        out.doc["basis"] = [str(w) for w in result.basis]
        return EXIT_OK if result.reachable else EXIT_NO
    regions = sp.regions()
    out.say(f"K = {sp.K}, scale = {sp.scale}, {len(regions)} single-process regions")
    for kind, n in regions:
        out.say(_region_text(kind, n, sp))
    states, edges = word_graph(concrete, args.n, mode, limit=args.limit)
    out.doc["stats"]["states_explored"] = len(states)
    out.doc["graph"] = {"states": len(states), "edges": len(edges)}
    out.say(f"N = {args.n}: {len(states)} region words, {len(edges)} edges")
    if args.dump:
        for w in states:
            out.say(str(w))
    return EXIT_OK


def _region_text(kind, n, sp):
    def val(k):
        return format_rational(k / sp.scale) if sp.scale != 1 else str(k)

    if kind == "zero":
        return f"  x = {val(n)}"
    if kind == "frac":
        return f"  {val(n)} < x < {val(n + 1)}"
    return f"  x > {val(sp.K)}"


# entry point -------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="ptbp", description="Parametric timed broadcast protocol toolkit.")
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    common.add_argument("--timing", action="store_true", help="include wall time in --json output")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    p = sub.add_parser("validate", help="parse and check a .ptbp file")
    p.add_argument("file")

    p = sub.add_parser("classify", help="clock count, parameter roles, fragment and bounds")
    p.add_argument("file")

    p = sub.add_parser("check", help="answer an EF/AF problem")
    p.add_argument("file")
    p.add_argument("--problem", required=True, choices=[k.value for k in Kind])
    p.add_argument("--semantics", default="reconf", choices=["reconf", "reconfigurable", "clique"])
    p.add_argument("--goal", required=True)
    p.add_argument("--pval", help="fix the parameters, e.g. pt=3,tl=19/2")
    p.add_argument("--n-max", type=int, default=6, help="largest size for semi-decisions")
    p.add_argument("--step-max", type=int, default=10000, help="search budget unit")
    p.add_argument("--witness", help="write the witness trace here")

    p = sub.add_parser("simulate", help="random run or replay of a trace")
    p.add_argument("file")
    p.add_argument("--n", type=int)
    p.add_argument("--pval")
    p.add_argument("--semantics", choices=["reconf", "reconfigurable", "clique"])
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="write the executed trace here")
    p.add_argument("--replay", help="replay this trace file instead of simulating")
    p.add_argument("--goal", help="report whether the run visits this location")

    p = sub.add_parser("encode-2cm", help="generate a protocol from a two-counter machine")
    p.add_argument("machine")
    p.add_argument("--target", required=True, choices=sorted(encodings.MODE_OF_TARGET))
    p.add_argument("--with-integer-gadget", action="store_true")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("regions", help="region-word graph summary or coverability basis")
    p.add_argument("file")
    p.add_argument("--pval")
    p.add_argument("--semantics", default="reconf", choices=["reconf", "reconfigurable", "clique"])
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--n", type=int)
    group.add_argument("--basis-of", metavar="GOAL")
    p.add_argument("--limit", type=int, default=200000, help="largest region-word graph to build")
    p.add_argument("--dump", action="store_true", help="print every region word")
    p.add_argument("--exact", action="store_true", help="keep multiset words in the basis")
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "classify": cmd_classify,
    "check": cmd_check,
    "simulate": cmd_simulate,
    "encode-2cm": cmd_encode,
    "regions": cmd_regions,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    out = Output(args.command, args.json, args.timing)
    try:
        code = COMMANDS[args.command](args, out)
    except UsageError as err:
        out.warn(f"usage error: {err}")
        code = EXIT_USAGE
    except FileNotFoundError as err:
        out.warn(f"no such input: {err}")
        code = EXIT_NOINPUT
    except ParseFailure as err:
        for e in err.errors:
            out.warn(str(e))
        code = EXIT_PARSE
    except PTBPError as err:
        out.warn(str(err))
        code = EXIT_UNSUPPORTED if err.code in ("MULTI_CLOCK", "CLIQUE_UNSUPPORTED") else EXIT_USAGE
    return out.finish(code)


if __name__ == "__main__":
    sys.exit(main())
