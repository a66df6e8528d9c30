"""Readers and writers for the `.ptbp` protocol language, the `.2cm`
two-counter-machine format and the `.trace` transition-label format."""

import re
from dataclasses import dataclass
from fractions import Fraction

from .model import (
    Action,
    Atom,
    Edge,
    ParamBound,
    Protocol,
    PTBPError,
    TAU,
    format_rational,
    validate,
)

IDENT = r"[A-Za-z0-9_][A-Za-z0-9_'.]*"
_IDENT_RE = re.compile(rf"^{IDENT}$")
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_'.]*$")
_RATIONAL_RE = re.compile(r"^(\d+)(?:/(\d+)|\.(\d+))?$")
_ATOM_RE = re.compile(rf"^({IDENT})\s*(<=|>=|==|<|>|=|≤|≥)\s*(\S+)$")
_EDGE_RE = re.compile(rf"^({IDENT})\s*->\s*({IDENT})(.*)$")
_CLAUSES_RE = re.compile(
    r"^\s*(?:when\s+(?P<when>.*?))?\s*(?:do\s+(?P<do>tau|(?:send|recv)\s+\S+))?\s*(?:reset\s+(?P<reset>.*?))?\s*$"
)
_INTERVAL_RE = re.compile(r"^([\[(])\s*([^,\s]+)\s*,\s*([^\])\s]+)\s*([\])])$")
_REL_ALIASES = {"≤": "<=", "≥": ">=", "==": "="}


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int = 1

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    code: str
    message: str

    def __str__(self):
        return f"{self.span}: {self.code}: {self.message}"


class ParseFailure(PTBPError):
    """Raised with every independent error found in one pass."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("PARSE_ERROR", "; ".join(str(e) for e in self.errors))


def parse_rational(text):
    """Parse ``7``, ``19/2`` or ``8.5`` exactly; None when malformed."""
    m = _RATIONAL_RE.match(text.strip())
    if not m:
        return None
    if m.group(2) is not None and int(m.group(2)) == 0:
        return None
    return Fraction(text.strip())


class _Lines:
    """Comment-stripped, numbered, non-empty lines with error collection."""

    def __init__(self, text, file):
        self.file = file
        self.errors = []
        self.items = []
        for number, raw in enumerate(text.splitlines(), start=1):
            body = raw.split("#", 1)[0].rstrip()
            if body.strip():
                self.items.append((number, body))

    def error(self, line, code, message, body="", token=None):
        column = 1
        if token and body:
            found = body.find(token)
            column = found + 1 if found >= 0 else 1
        elif body:
            column = len(body) - len(body.lstrip()) + 1
        self.errors.append(ParseError(SourceSpan(self.file, line, column), code, message))


def _parse_bound(lines, number, body, spec):
    spec = spec.strip()
    if spec in ("unbounded", "in unbounded"):
        return ParamBound()
    if not spec.startswith("in "):
        lines.error(number, "UNEXPECTED_TOKEN", f"expected 'in <interval>' or 'unbounded', got {spec!r}", body, spec)
        return None
    m = _INTERVAL_RE.match(spec[3:].strip())
    if not m:
        lines.error(number, "BAD_BOUND", f"malformed interval {spec[3:].strip()!r}", body, spec)
        return None
    left, lo, hi, right = m.groups()
    if not lo.isdigit():
        lines.error(number, "BAD_BOUND", f"lower endpoint {lo} is not a natural number", body, lo)
        return None
    if hi in ("inf", "+inf", "∞"):
        if right == "]":
            lines.error(number, "BAD_BOUND", "an infinite endpoint must be open", body, hi)
            return None
        return ParamBound(int(lo), None, left == "[", False)
    if not hi.isdigit():
        lines.error(number, "BAD_BOUND", f"upper endpoint {hi} is not a natural number", body, hi)
        return None
    bound = ParamBound(int(lo), int(hi), left == "[", right == "]")
    if bound.empty:
        lines.error(number, "BAD_BOUND", f"interval {bound} is empty", body, spec[3:].strip())
        return None
    return bound


def _parse_atom(lines, number, body, text):
    m = _ATOM_RE.match(text.strip())
    if not m:
        lines.error(number, "UNEXPECTED_TOKEN", f"malformed guard atom {text.strip()!r}", body, text.strip())
        return None
    clock, rel, rhs = m.groups()
    rel = _REL_ALIASES.get(rel, rel)
    if rhs[0].isdigit() or rhs[0] in "-+.":
        value = parse_rational(rhs)
        if value is None:
            lines.error(number, "BAD_RATIONAL", f"{rhs!r} is not a nonnegative rational", body, rhs)
            return None
        return Atom(clock, rel, value)
    if not _NAME_RE.match(rhs):
        lines.error(number, "UNEXPECTED_TOKEN", f"bad guard bound {rhs!r}", body, rhs)
        return None
    return Atom(clock, rel, rhs)


def _parse_edge(lines, number, body, rest):
    m = _EDGE_RE.match(rest.strip())
    if not m:
        lines.error(number, "UNEXPECTED_TOKEN", "expected 'edge SRC -> DST ...'", body)
        return None
    source, target, tail = m.groups()
    c = _CLAUSES_RE.match(tail)
    if not c:
        lines.error(number, "UNEXPECTED_TOKEN", f"cannot read edge clauses {tail.strip()!r}", body, tail.strip())
        return None
    guard = []
    ok = True
    if c.group("when") is not None:
        for part in c.group("when").split(","):
            atom = _parse_atom(lines, number, body, part)
            ok = ok and atom is not None
            if atom is not None:
                guard.append(atom)
    action = TAU
    if c.group("do"):
        words = c.group("do").split()
        if words[0] != "tau":
            action = Action(words[0], words[1])
    reset = ()
    if c.group("reset") is not None:
        reset = tuple(c.group("reset").replace(",", " ").split())
        if not reset:
            lines.error(number, "UNEXPECTED_TOKEN", "reset needs at least one clock", body, "reset")
            ok = False
    if not ok:
        return None
    return Edge(source, target, tuple(guard), action, reset, line=number)


def read_protocol(text, file="<input>"):
    """Syntactic pass only: returns ``(protocol or None, errors)`` without
    checking that names are declared."""
    lines = _Lines(text, file)
    if not lines.items:
        lines.error(1, "MISSING_HEADER", "empty input; expected 'protocol NAME'")
        return None, lines.errors
    name = None
    decls = {"clocks": [], "messages": [], "params": [], "loc": []}
    bounds = {}
    init = None
    edges = []
    where = {}
    first = True
    for number, body in lines.items:
        words = body.split()
        key, rest = words[0], body.strip()[len(words[0]):]
        if first:
            first = False
            if key != "protocol":
                lines.error(number, "MISSING_HEADER", "the first statement must be 'protocol NAME'", body)
            elif len(words) != 2 or not _IDENT_RE.match(words[1]):
                lines.error(number, "UNEXPECTED_TOKEN", "expected 'protocol NAME'", body)
            else:
                name = words[1]
                continue
            if key == "protocol":
                continue
        if key == "protocol":
            lines.error(number, "DUPLICATE_DECL", "second 'protocol' header", body)
        elif key in decls or key == "locs":
            key = "loc" if key == "locs" else key
            for ident in words[1:]:
                if not _IDENT_RE.match(ident):
                    lines.error(number, "UNEXPECTED_TOKEN", f"bad identifier {ident!r}", body, ident)
                elif ident in decls[key]:
                    lines.error(number, "DUPLICATE_DECL", f"{ident} declared twice", body, ident)
                else:
                    decls[key].append(ident)
                    where.setdefault(ident, number)
        elif key == "bound":
            if len(words) < 3:
                lines.error(number, "UNEXPECTED_TOKEN", "expected 'bound P in <interval>'", body)
                continue
            param = words[1]
            bound = _parse_bound(lines, number, body, rest.strip()[len(param):])
            if param in bounds:
                lines.error(number, "DUPLICATE_DECL", f"second bound for {param}", body, param)
            elif bound is not None:
                bounds[param] = bound
                where[f"bound {param}"] = number
        elif key == "init":
            if len(words) != 2:
                lines.error(number, "UNEXPECTED_TOKEN", "expected 'init LOC'", body)
            elif init is not None:
                lines.error(number, "DUPLICATE_DECL", "second 'init' line", body)
            else:
                init = words[1]
                where["init"] = number
        elif key == "edge":
            edge = _parse_edge(lines, number, body, rest)
            if edge is not None:
                edges.append(edge)
        else:
            lines.error(number, "UNEXPECTED_TOKEN", f"unknown statement {key!r}", body, key)
    if init is None and name is not None:
        lines.error(lines.items[-1][0], "MISSING_INIT", "no 'init' line")
    if name is None or init is None:
        return None, lines.errors
    protocol = Protocol(
        name=name,
        locations=tuple(decls["loc"]),
        init=init,
        clocks=tuple(decls["clocks"]),
        messages=tuple(decls["messages"]),
        params=tuple(decls["params"]),
        edges=tuple(edges),
        bounds=bounds,
        lines=where,
    )
    return protocol, lines.errors


_REFERENCE_CODES = {
    "UNDECLARED_INIT",
    "UNDECLARED_LOCATION",
    "UNDECLARED_CLOCK",
    "UNDECLARED_MESSAGE",
    "UNDECLARED_PARAM",
}


def parse_protocol(text, file="<input>"):
    """Parse and validate; raises :class:`ParseFailure` listing every error."""
    protocol, errors = read_protocol(text, file)
    errors = list(errors)
    if protocol is not None:
        for diag in validate(protocol):
            code = "UNDECLARED_IDENT" if diag.code in _REFERENCE_CODES else diag.code
            if code == "EMPTY_BOUND_INTERVAL":
                code = "BAD_BOUND"
            errors.append(ParseError(SourceSpan(file, diag.line or 1, 1), code, diag.message))
    if errors:
        raise ParseFailure(sorted(errors, key=lambda e: (e.span.line, e.span.column)))
    return protocol


def format_bound(bound):
    if bound.sup is None and bound.inf == 0 and bound.left_closed:
        return "unbounded"
    return f"in {bound}"


def serialize_protocol(protocol, header=()):
    """Canonical text for ``protocol``; ``header`` lines become comments."""
    out = [f"# {line}" for line in header]
    out.append(f"protocol {protocol.name}")
    if protocol.clocks:
        out.append("clocks " + " ".join(protocol.clocks))
    if protocol.messages:
        out.append("messages " + " ".join(protocol.messages))
    if protocol.params:
        out.append("params " + " ".join(protocol.params))
        for p in protocol.params:
            if p in protocol.bounds:
                out.append(f"bound {p} {format_bound(protocol.bounds[p])}")
    out.append(f"init {protocol.init}")
    if protocol.locations:
        out.append("loc " + " ".join(protocol.locations))
    for edge in protocol.edges:
        parts = [f"edge {edge.source} -> {edge.target}"]
        if edge.guard:
            parts.append("when " + ", ".join(f"{a.clock}{a.rel}{format_rational(a.bound)}" for a in edge.guard))
        parts.append(f"do {edge.action}")
        if edge.reset:
            parts.append("reset " + " ".join(edge.reset))
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


# two-counter machines ------------------------------------------------------

_INSTR_RE = re.compile(rf"^({IDENT})\s*:\s*(inc|dec|ifz)\s+(\S+)\s+goto\s+({IDENT})(?:\s+else\s+({IDENT}))?\s*$")


def parse_machine(text, file="<input>"):
    from .encodings import Instruction, TwoCounterMachine

    lines = _Lines(text, file)
    program = {}
    init = accept = None
    for number, body in lines.items:
        words = body.split()
        if words[0] in ("init", "accept"):
            if len(words) != 2 or not _IDENT_RE.match(words[1]):
                lines.error(number, "UNEXPECTED_TOKEN", f"expected '{words[0]} LABEL'", body)
            elif (init if words[0] == "init" else accept) is not None:
                lines.error(number, "DUPLICATE_DECL", f"second '{words[0]}' line", body)
            elif words[0] == "init":
                init = (words[1], number)
            else:
                accept = (words[1], number)
            continue
        m = _INSTR_RE.match(body.strip())
        if not m:
            lines.error(number, "UNEXPECTED_TOKEN", f"cannot read instruction {body.strip()!r}", body)
            continue
        label, op, counter, target, other = m.groups()
        if counter not in ("c1", "c2"):
            lines.error(number, "BAD_COUNTER", f"unknown counter {counter}; use c1 or c2", body, counter)
            continue
        if (op == "ifz") != (other is not None):
            lines.error(number, "UNEXPECTED_TOKEN", "only ifz takes an else branch", body)
            continue
        if label in program:
            lines.error(number, "DUPLICATE_DECL", f"label {label} defined twice", body, label)
            continue
        program[label] = (Instruction(op, int(counter[1]), target, other), number)
    last = lines.items[-1][0] if lines.items else 1
    if accept is None:
        lines.error(last, "MISSING_ACCEPT", "no 'accept LABEL' line")
    else:
        if accept[0] in program:
            lines.error(accept[1], "ACCEPT_HAS_INSTRUCTION", f"accepting label {accept[0]} has an instruction")
        known = set(program) | {accept[0]}
        for label, (ins, number) in program.items():
            for tgt in ins.targets():
                if tgt not in known:
                    lines.error(number, "DANGLING_LABEL", f"goto target {tgt} is not defined")
        if init is not None and init[0] not in known:
            lines.error(init[1], "DANGLING_LABEL", f"initial label {init[0]} is not defined")
    if lines.errors:
        raise ParseFailure(lines.errors)
    if init is None:
        init_label = next(iter(program), accept[0])
    else:
        init_label = init[0]
    return TwoCounterMachine({k: v for k, (v, _) in program.items()}, init_label, accept[0])


def serialize_machine(machine):
    out = []
    for label, ins in machine.program.items():
        text = f"{label}: {ins.op} c{ins.counter} goto {ins.target}"
        if ins.op == "ifz":
            text += f" else {ins.other}"
        out.append(text)
    out.append(f"init {machine.init}")
    out.append(f"accept {machine.accept}")
    return "\n".join(out) + "\n"


# traces ----------------------------------------------------------------------


@dataclass(frozen=True)
class TraceFile:
    N: int
    mode: str
    pval: dict
    labels: tuple


def parse_pval(text):
    """Read ``pt=3,tl=19/2`` (commas or spaces) into exact rationals."""
    pval = {}
    for item in re.split(r"[,\s]+", text.strip()):
        if not item:
            continue
        if "=" not in item:
            raise PTBPError("BAD_PVAL", f"expected NAME=VALUE, got {item!r}")
        name, value = item.split("=", 1)
        number = parse_rational(value)
        if number is None:
            raise PTBPError("BAD_RATIONAL", f"{value!r} is not a nonnegative rational")
        pval[name.strip()] = number
    return pval


def format_pval(pval):
    return " ".join(f"{k}={format_rational(v)}" for k, v in pval.items())


def serialize_trace(N, mode, pval, labels, header=()):
    """One ``step`` line per label: delay, actor, edge index (0-based),
    receivers (``-`` for none) and optional ``choices j:e,...``."""
    out = [f"# {line}" for line in header]
    out += [f"N {N}", f"mode {getattr(mode, 'value', mode)}"]
    if pval:
        out.append("pval " + format_pval(pval))
    for label in labels:
        recv = ",".join(str(j) for j in sorted(label.receivers)) or "-"
        text = f"step {format_rational(label.delay)} {label.actor} {label.edge} {recv}"
        if label.choices:
            text += " choices " + ",".join(f"{j}:{e}" for j, e in label.choices)
        out.append(text)
    return "\n".join(out) + "\n"


def parse_trace(text, file="<input>"):
    from .semantics import TransitionLabel

    lines = _Lines(text, file)
    N = None
    mode = "reconf"
    pval = {}
    labels = []
    for number, body in lines.items:
        words = body.split()
        try:
            if words[0] == "N" and len(words) == 2:
                N = int(words[1])
            elif words[0] == "mode" and len(words) == 2:
                mode = words[1]
            elif words[0] == "pval":
                pval = parse_pval(" ".join(words[1:]))
            elif words[0] == "step" and len(words) in (5, 7):
                delay = parse_rational(words[1])
                if delay is None:
                    lines.error(number, "BAD_RATIONAL", f"bad delay {words[1]!r}", body, words[1])
                    continue
                receivers = frozenset() if words[4] == "-" else frozenset(int(j) for j in words[4].split(","))
                choices = ()
                if len(words) == 7:
                    if words[5] != "choices":
                        raise ValueError(words[5])
                    pairs = (item.split(":") for item in words[6].split(","))
                    choices = tuple(sorted((int(j), int(e)) for j, e in pairs))
                labels.append(TransitionLabel(delay, int(words[2]), int(words[3]), receivers, choices))
            else:
                lines.error(number, "UNEXPECTED_TOKEN", f"cannot read trace line {body.strip()!r}", body)
        except (ValueError, PTBPError) as exc:
            lines.error(number, "UNEXPECTED_TOKEN", f"malformed trace line ({exc})", body)
    if N is None and not lines.errors:
        lines.error(1, "MISSING_HEADER", "trace needs an 'N <size>' line")
    if lines.errors:
        raise ParseFailure(lines.errors)
    return TraceFile(N, mode, pval, tuple(labels))
