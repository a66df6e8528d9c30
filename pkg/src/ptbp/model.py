"""Protocol representation, static validation, fragment classification and
parameter substitution."""

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Mapping, Optional, Union

RELATIONS = ("<", "<=", "=", ">=", ">")


class PTBPError(Exception):
    """Error raised by any operation of the package; ``code`` is a stable tag."""

    def __init__(self, code, message=""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code
        self.message = message


@dataclass(frozen=True)
class Atom:
    """A guard atom ``clock rel bound``; a string bound names a parameter."""

    clock: str
    rel: str
    bound: Union[Fraction, str]

    @property
    def parametric(self):
        return isinstance(self.bound, str)

    def holds(self, value, pval=None):
        bound = self.bound
        if isinstance(bound, str):
            if pval is None or bound not in pval:
                raise PTBPError("MISSING_PARAM", f"no value for parameter {bound}")
            bound = pval[bound]
        return compare(value, self.rel, bound)

    def __str__(self):
        return f"{self.clock}{self.rel}{format_rational(self.bound)}"


def compare(value, rel, bound):
    if rel == "<":
        return value < bound
    if rel == "<=":
        return value <= bound
    if rel == "=":
        return value == bound
    if rel == ">=":
        return value >= bound
    if rel == ">":
        return value > bound
    raise PTBPError("BAD_RELATION", rel)


def format_rational(value):
    if isinstance(value, str):
        return value
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Action:
    kind: str  # "tau", "send" or "recv"
    message: Optional[str] = None

    def __str__(self):
        if self.kind == "tau":
            return "tau"
        return f"{self.kind} {self.message}"


TAU = Action("tau")


def send(message):
    return Action("send", message)


def recv(message):
    return Action("recv", message)


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    guard: tuple = ()
    action: Action = TAU
    reset: tuple = ()
    line: Optional[int] = field(default=None, compare=False)

    def __str__(self):
        parts = [f"{self.source} -> {self.target}"]
        if self.guard:
            parts.append("when " + ", ".join(str(a) for a in self.guard))
        parts.append(f"do {self.action}")
        if self.reset:
            parts.append("reset " + " ".join(self.reset))
        return " ".join(parts)


@dataclass(frozen=True)
class ParamBound:
    """Interval of admissible values; ``sup=None`` stands for +infinity."""

    inf: int = 0
    sup: Optional[int] = None
    left_closed: bool = True
    right_closed: bool = False

    @property
    def finite(self):
        return self.sup is not None

    @property
    def closed(self):
        return self.finite and self.left_closed and self.right_closed

    @property
    def empty(self):
        if self.sup is None:
            return False
        if self.inf > self.sup:
            return True
        return self.inf == self.sup and not (self.left_closed and self.right_closed)

    def __contains__(self, value):
        value = Fraction(value)
        if value < self.inf or (value == self.inf and not self.left_closed):
            return False
        if self.sup is None:
            return True
        return value < self.sup or (value == self.sup and self.right_closed)

    def __str__(self):
        if self.sup is None and self.inf == 0 and self.left_closed:
            return "unbounded"
        left = "[" if self.left_closed else "("
        right = "]" if self.right_closed else ")"
        sup = "inf" if self.sup is None else str(self.sup)
        return f"{left}{self.inf},{sup}{right}"


UNBOUNDED = ParamBound()


@dataclass(frozen=True)
class Protocol:
    name: str
    locations: tuple
    init: str
    clocks: tuple = ()
    messages: tuple = ()
    params: tuple = ()
    edges: tuple = ()
    bounds: Mapping = field(default_factory=dict)
    lines: Mapping = field(default_factory=dict, compare=False, repr=False)

    def bound(self, param):
        return self.bounds.get(param, UNBOUNDED)

    @cached_property
    def outgoing(self):
        """Map location -> list of (edge index, edge), in declaration order."""
        table = {loc: [] for loc in self.locations}
        for idx, edge in enumerate(self.edges):
            table.setdefault(edge.source, []).append((idx, edge))
        return table

    @cached_property
    def receptions(self):
        """Map (location, message) -> list of (edge index, edge) receiving it."""
        table = {}
        for idx, edge in enumerate(self.edges):
            if edge.action.kind == "recv":
                table.setdefault((edge.source, edge.action.message), []).append((idx, edge))
        return table

    def atoms(self):
        for edge in self.edges:
            yield from edge.guard

    @property
    def parameter_free(self):
        return not any(a.parametric for a in self.atoms())


@dataclass(frozen=True)
class Diagnostic:
    code: str
    where: str
    message: str
    line: Optional[int] = None

    def __str__(self):
        at = f"line {self.line}: " if self.line else ""
        return f"{at}{self.code} [{self.where}] {self.message}"


def validate(protocol):
    """Return the list of invariant violations of ``protocol`` (empty if valid)."""
    diags = []
    lines = protocol.lines

    def report(code, where, message, line=None):
        diags.append(Diagnostic(code, where, message, line if line is not None else lines.get(where)))

    namespaces = {
        "location": protocol.locations,
        "clock": protocol.clocks,
        "message": protocol.messages,
        "parameter": protocol.params,
    }
    seen = {}
    for kind, names in namespaces.items():
        local = set()
        for name in names:
            if name in local:
                report("DUPLICATE_DECL", name, f"{kind} {name} declared twice")
            local.add(name)
            if name in seen and seen[name] != kind:
                report("NAMESPACE_CLASH", name, f"{name} is both a {seen[name]} and a {kind}")
            seen.setdefault(name, kind)

    locs, clocks = set(protocol.locations), set(protocol.clocks)
    msgs, params = set(protocol.messages), set(protocol.params)
    if protocol.init not in locs:
        report("UNDECLARED_INIT", "init", f"initial location {protocol.init} is not declared")

    for idx, edge in enumerate(protocol.edges):
        where = f"edge {idx}"
        line = edge.line
        for end in (edge.source, edge.target):
            if end not in locs:
                report("UNDECLARED_LOCATION", where, f"location {end} is not declared", line)
        for atom in edge.guard:
            if atom.clock not in clocks:
                report("UNDECLARED_CLOCK", where, f"clock {atom.clock} is not declared", line)
            if atom.rel not in RELATIONS:
                report("BAD_RELATION", where, f"unknown relation {atom.rel}", line)
            if atom.parametric:
                if atom.bound not in params:
                    report("UNDECLARED_PARAM", where, f"parameter {atom.bound} is not declared", line)
            elif atom.bound < 0:
                report("NEGATIVE_CONSTANT", where, f"constant {atom.bound} is negative", line)
        for clock in edge.reset:
            if clock not in clocks:
                report("UNDECLARED_CLOCK", where, f"reset of undeclared clock {clock}", line)
        kind = edge.action.kind
        if kind not in ("tau", "send", "recv"):
            report("BAD_ACTION", where, f"unknown action {kind}", line)
        elif kind != "tau" and edge.action.message not in msgs:
            report("UNDECLARED_MESSAGE", where, f"message {edge.action.message} is not declared", line)

    for param, bound in protocol.bounds.items():
        where = f"bound {param}"
        if param not in params:
            report("UNDECLARED_PARAM", where, f"bound on undeclared parameter {param}")
        if bound.inf < 0 or (bound.sup is not None and bound.sup < 0):
            report("BAD_BOUND", where, "bound endpoints must be naturals")
        if bound.sup is None and bound.right_closed:
            report("BAD_BOUND", where, "an infinite supremum cannot be right-closed")
        elif bound.empty:
            report("EMPTY_BOUND_INTERVAL", where, f"interval {bound} is empty")
    return diags


class Role(str, Enum):
    LOWER = "lower"
    UPPER = "upper"
    MIXED = "mixed"
    UNUSED = "unused"


class Fragment(str, Enum):
    PARAMETER_FREE = "parameter-free"
    L = "L"
    U = "U"
    LU = "LU"
    GENERAL = "general"


class Boundedness(str, Enum):
    UNBOUNDED = "unbounded"
    OPEN = "open-bounded"
    CLOSED = "closed-bounded"


@dataclass(frozen=True)
class FragmentInfo:
    clock_count: int
    roles: Mapping
    fragment: Fragment
    boundedness: Boundedness
    param_boundedness: Mapping

    @property
    def lu(self):
        return self.fragment in (Fragment.PARAMETER_FREE, Fragment.L, Fragment.U, Fragment.LU)


def param_roles(protocol):
    roles = {p: Role.UNUSED for p in protocol.params}
    for atom in protocol.atoms():
        if not atom.parametric:
            continue
        if atom.rel in ("<", "<="):
            use = Role.UPPER
        elif atom.rel in (">", ">="):
            use = Role.LOWER
        else:
            use = Role.MIXED
        prev = roles.get(atom.bound, Role.UNUSED)
        roles[atom.bound] = use if prev in (Role.UNUSED, use) else Role.MIXED
    return roles


def _bound_kind(bound):
    if not bound.finite:
        return Boundedness.UNBOUNDED
    return Boundedness.CLOSED if bound.closed else Boundedness.OPEN


def classify(protocol):
    roles = param_roles(protocol)
    used = [p for p, r in roles.items() if r != Role.UNUSED]
    kinds = set(roles[p] for p in used)
    if not used:
        fragment = Fragment.PARAMETER_FREE
    elif Role.MIXED in kinds:
        fragment = Fragment.GENERAL
    elif kinds == {Role.LOWER}:
        fragment = Fragment.L
    elif kinds == {Role.UPPER}:
        fragment = Fragment.U
    else:
        fragment = Fragment.LU
    per_param = {p: _bound_kind(protocol.bound(p)) for p in protocol.params}
    used_kinds = {per_param[p] for p in used}
    if Boundedness.UNBOUNDED in used_kinds:
        boundedness = Boundedness.UNBOUNDED
    elif Boundedness.OPEN in used_kinds:
        boundedness = Boundedness.OPEN
    else:
        boundedness = Boundedness.CLOSED
    return FragmentInfo(len(protocol.clocks), roles, fragment, boundedness, per_param)


def _rewrite(protocol, rewrite_atom):
    edges = tuple(
        replace(edge, guard=tuple(rewrite_atom(a) for a in edge.guard)) for edge in protocol.edges
    )
    return replace(protocol, edges=edges, params=(), bounds={})


def check_pval(protocol, pval):
    missing = [p for p in protocol.params if p not in pval]
    if missing:
        raise PTBPError("MISSING_PARAM", "no value for " + ", ".join(missing))
    values = {p: Fraction(pval[p]) for p in protocol.params}
    for p, v in values.items():
        if v < 0:
            raise PTBPError("NEGATIVE_PARAM", f"{p}={v}")
    return values


def substitute(protocol, pval):
    """Replace every parameter by its value; the result is parameter-free."""
    values = check_pval(protocol, pval)

    def subst(atom):
        if atom.parametric:
            return Atom(atom.clock, atom.rel, values[atom.bound])
        return atom

    return _rewrite(protocol, subst)


def _require_lu(info):
    mixed = [p for p, r in info.roles.items() if r == Role.MIXED]
    if mixed:
        raise PTBPError("NOT_LU", "parameters used as both lower and upper bound: " + ", ".join(mixed))


def min_valuation(protocol):
    """Least permissive valuation: upper parameters at inf, lower ones at sup."""
    info = classify(protocol)
    _require_lu(info)
    pval = {}
    for p, role in info.roles.items():
        bound = protocol.bound(p)
        if role == Role.UNUSED:
            pval[p] = Fraction(bound.inf)
            continue
        if not bound.closed:
            raise PTBPError("NOT_CLOSED_BOUNDED", f"{p} ranges over {bound}")
        pval[p] = Fraction(bound.inf if role == Role.UPPER else bound.sup)
    return pval


def build_n_min(protocol):
    return substitute(protocol, min_valuation(protocol))


def build_n_max(protocol):
    """Most permissive parameter-free protocol for a bounded L/U protocol.

    Parameters on the open side of their interval are replaced by the endpoint
    with a strict comparison.
    """
    info = classify(protocol)
    _require_lu(info)
    for p, role in info.roles.items():
        if role == Role.UPPER and not protocol.bound(p).finite:
            raise PTBPError("UNBOUNDED_PARAM", f"upper-bound parameter {p} has no finite supremum")

    def rewrite(atom):
        if not atom.parametric:
            return atom
        p = atom.bound
        bound = protocol.bound(p)
        if info.roles[p] == Role.UPPER:
            if bound.right_closed:
                return Atom(atom.clock, atom.rel, Fraction(bound.sup))
            return Atom(atom.clock, "<", Fraction(bound.sup))
        if bound.left_closed:
            return Atom(atom.clock, atom.rel, Fraction(bound.inf))
        return Atom(atom.clock, ">", Fraction(bound.inf))

    return _rewrite(protocol, rewrite)


def max_constant(protocol):
    """Return ``(K, scale)``: scaling every constant by ``scale`` makes them
    integers, the largest of which is ``K``."""
    consts = []
    for atom in protocol.atoms():
        if atom.parametric:
            raise PTBPError("NOT_PARAMETER_FREE", f"guard {atom} mentions a parameter")
        consts.append(Fraction(atom.bound))
    scale = 1
    for c in consts:
        scale = lcm(scale, c.denominator)
    K = max((int(c * scale) for c in consts), default=0)
    return K, scale
