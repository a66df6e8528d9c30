"""Decision and semi-decision procedures, and the router mapping each
(problem, fragment, semantics) combination to one of them or to a
justified refusal."""

import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import floor
from typing import Optional

from .model import (
    Boundedness,
    Fragment,
    PTBPError,
    Role,
    build_n_max,
    build_n_min,
    classify,
    min_valuation,
    substitute,
    validate,
)
from .regions import ScaledProtocol, abstract, backward_coverability
from .semantics import (
    Mode,
    TransitionLabel,
    _delay_window,
    _enabled_receptions,
    _reset,
    _sat,
    _step,
    initial_config,
    reaches,
    replay,
)

ZERO = Fraction(0)


class Kind(str, Enum):
    EF_EXISTENCE = "ef-existence"
    EF_UNIVERSALITY = "ef-universality"
    AF_EXISTENCE = "af-existence"
    AF_UNIVERSALITY = "af-universality"

    @property
    def is_ef(self):
        return self in (Kind.EF_EXISTENCE, Kind.EF_UNIVERSALITY)


class Status(str, Enum):
    DECIDED = "decided"
    SEMIDECIDED = "semidecided"
    INCONCLUSIVE = "inconclusive"
    UNSUPPORTED = "unsupported"


CITATIONS = {
    "THM1": "AF problems: decidable with one clock via networks of size one, undecidable for (L/U)-PTBP with 3 clocks",
    "THM2": "EF without parameters: decidable with one clock per process, undecidable with two clocks per process",
    "THM3": "EF-existence and EF-universality are undecidable for PTBP with one clock",
    "THM4": "AF problems are undecidable even with no clock in the clique semantics",
    "THM5": "EF-universality is undecidable for open bounded L/U-PTBP with one clock in the clique semantics",
    "LEM1": "EF-existence and EF-universality are undecidable for PTBP with two clocks",
    "LEM3": "EF problems are undecidable for PTBP with one clock in the clique semantics",
    "LEM5": "EF-universality reduces to the minimal permissive valuation for closed bounded L/U-PTBP",
    "LEM6": "EF-existence reduces to the maximal permissive protocol for bounded L/U-PTBP",
    "LEM7": "EF-universality is undecidable for U-PTBP with open left bounds and L-PTBP with infinite right bounds",
    "OUT_OF_SCOPE": "parametric AF analysis needs parametric zone machinery that is not implemented",
    "OPEN_PROBLEM": "decidability of this combination is open",
}


@dataclass(frozen=True)
class ProblemSpec:
    protocol: object
    goal: str
    mode: Mode = Mode.RECONF
    kind: Kind = Kind.EF_EXISTENCE
    n_max: int = 6
    step_max: int = 10000
    pval: Optional[dict] = None


@dataclass(frozen=True)
class Witness:
    N: int
    pval: dict
    trace: tuple
    mode: Mode = Mode.RECONF


@dataclass
class Verdict:
    status: Status
    answer: Optional[bool] = None
    witness: Optional[Witness] = None
    procedure: str = ""
    citation: str = ""
    explored_up_to: Optional[int] = None
    stats: dict = field(default_factory=dict)
    counterexample: object = None

    def headline(self):
        if self.status == Status.DECIDED:
            return "DECIDED " + ("YES" if self.answer else "NO")
        if self.status == Status.SEMIDECIDED:
            return f"SEMIDECIDED YES (N={self.witness.N})"
        if self.status == Status.INCONCLUSIVE:
            return f"INCONCLUSIVE (N<={self.explored_up_to})"
        return f"UNSUPPORTED ({self.citation})"


# fixed-size exact search -----------------------------------------------------------


@dataclass
class SearchResult:
    found: bool
    N: int
    trace: Optional[list] = None
    states: int = 0
    cost: Optional[int] = None


def _time_delay(config, K, scale):
    """Delay to the next region of the whole configuration, or None when every
    clock is already beyond ``K``."""
    values = [v * scale for _, val in config.processes for v in val]
    inside = [v for v in values if v <= K]
    if not inside:
        return None
    fracs = [v - floor(v) for v in inside if v.denominator != 1]
    if any(v.denominator == 1 for v in inside):
        d = (1 - max(fracs)) / 2 if fracs else Fraction(1, 2)
    else:
        d = 1 - max(fracs)
    return d / scale


def _actions(protocol, config, mode):
    """Zero-delay labels from ``config`` with their successors."""
    N = config.N
    everyone = frozenset(range(1, N + 1))
    for i, (loc, clocks) in enumerate(config.processes, start=1):
        for idx, edge in protocol.outgoing.get(loc, ()):
            kind = edge.action.kind
            if kind == "recv" or not _sat(protocol, clocks, edge.guard, {}):
                continue
            if kind == "tau":
                label = TransitionLabel(ZERO, i, idx, everyone if mode == Mode.CLIQUE else frozenset())
                yield label, _step(protocol, config, label, {}, mode)
                continue
            menus = []
            for j, (jloc, jclocks) in enumerate(config.processes, start=1):
                if j == i:
                    continue
                opts = _enabled_receptions(protocol, jloc, jclocks, edge.action.message, {})
                if mode == Mode.RECONF:
                    menus.append([None] + [(j, o, len(opts)) for o in opts])
                else:
                    menus.append([(j, o, len(opts)) for o in opts] or [None])
            for combo in _product(menus):
                taken = [c for c in combo if c is not None]
                receivers = everyone if mode == Mode.CLIQUE else frozenset(j for j, _, _ in taken)
                choices = tuple((j, o) for j, o, n in taken if n > 1)
                label = TransitionLabel(ZERO, i, idx, receivers, choices)
                yield label, _step(protocol, config, label, {}, mode)


def _product(menus):
    if not menus:
        yield ()
        return
    head, rest = menus[0], menus[1:]
    for tail in _product(rest):
        for item in head:
            yield (item,) + tail


def _moves(protocol, config, mode, K, scale):
    if protocol.clocks:
        d = _time_delay(config, K, scale)
        if d is not None:
            yield d, config.delayed(d)
    yield from _actions(protocol, config, mode)


def _trace_from(moves):
    labels = []
    pending = ZERO
    for move in moves:
        if isinstance(move, TransitionLabel):
            labels.append(move.with_delay(pending + move.delay))
            pending = ZERO
        else:
            pending += move
    return labels


def _check_search_input(protocol):
    if len(protocol.clocks) > 1:
        raise PTBPError("MULTI_CLOCK", f"{len(protocol.clocks)} clocks; the exact search needs at most one")
    if not protocol.parameter_free:
        raise PTBPError("NOT_PARAMETER_FREE", "substitute a valuation first")


def ef_fixed_n(protocol, goal, mode=Mode.RECONF, N=1, max_states=None):
    """Exact reachability of ``goal`` in the network of size ``N``.

    Breadth-first search over region words, keeping one exact configuration
    per word (regions are a time-abstract bisimulation), so the returned trace
    is concrete and replayable.
    """
    _check_search_input(protocol)
    mode = Mode(mode)
    sp = ScaledProtocol(protocol)
    K, scale = sp.K, sp.scale
    start = initial_config(protocol, N)
    if goal in start.locations():
        return SearchResult(True, N, [], 1)
    key = abstract(start, K, scale)
    parent = {key: None}
    queue = deque([(key, start)])
    while queue:
        k, conf = queue.popleft()
        for move, nxt in _moves(protocol, conf, mode, K, scale):
            k2 = abstract(nxt, K, scale)
            if k2 in parent:
                continue
            parent[k2] = (k, move)
            if max_states is not None and len(parent) > max_states:
                raise PTBPError("BUDGET_EXCEEDED", f"more than {max_states} region words at N={N}")
            if goal in nxt.locations():
                moves = []
                cur = k2
                while parent[cur] is not None:
                    cur, mv = parent[cur]
                    moves.append(mv)
                return SearchResult(True, N, _trace_from(reversed(moves)), len(parent))
            queue.append((k2, nxt))
    return SearchResult(False, N, None, len(parent))


def min_message_count(protocol, goal, mode, N, message, max_states=None):
    """Least number of broadcasts of ``message`` on a run of size ``N``
    reaching ``goal`` (0-1 breadth-first search over region words)."""
    _check_search_input(protocol)
    mode = Mode(mode)
    sp = ScaledProtocol(protocol)
    K, scale = sp.K, sp.scale
    start = initial_config(protocol, N)
    key = abstract(start, K, scale)
    best = {key: 0}
    parent = {key: None}
    queue = deque([(0, key, start)])
    done = set()
    while queue:
        cost, k, conf = queue.popleft()
        if k in done or cost > best[k]:
            continue
        done.add(k)
        if goal in conf.locations():
            moves = []
            cur = k
            while parent[cur] is not None:
                cur, mv = parent[cur]
                moves.append(mv)
            return SearchResult(True, N, _trace_from(reversed(moves)), len(best), cost)
        for move, nxt in _moves(protocol, conf, mode, K, scale):
            w = 0
            if isinstance(move, TransitionLabel):
                edge = protocol.edges[move.edge]
                w = int(edge.action.kind == "send" and edge.action.message == message)
            k2 = abstract(nxt, K, scale)
            if k2 in done or best.get(k2, cost + w + 1) <= cost + w:
                continue
            best[k2] = cost + w
            parent[k2] = (k, move)
            if max_states is not None and len(best) > max_states:
                raise PTBPError("BUDGET_EXCEEDED", f"more than {max_states} region words")
            if w:
                queue.append((cost + w, k2, nxt))
            else:
                queue.appendleft((cost, k2, nxt))
    return SearchResult(False, N, None, len(best))


# reconfigurable EF ---------------------------------------------------------------------


@dataclass
class ReconfDecision:
    answer: bool
    N: Optional[int] = None
    trace: Optional[list] = None
    basis_size: int = 0
    iterations: int = 0
    states: int = 0


WITNESS_SIZE_LIMIT = 32


def ef_reconf_decide(protocol, goal, max_states=None, probe=3, probe_states=20000):
    """Is ``goal`` reachable for some network size (reconfigurable)?

    A short forward probe (exact search for sizes up to ``probe``) settles
    most positive instances with a witness at once.  Otherwise backward
    coverability over set-words decides; on a positive answer the witness is
    found by exact search at increasing sizes.
    """
    _check_search_input(protocol)
    states = 0
    for N in range(1, probe + 1):
        try:
            res = ef_fixed_n(protocol, goal, Mode.RECONF, N, probe_states)
        except PTBPError as err:
            if err.code != "BUDGET_EXCEEDED":
                raise
            break
        states += res.states
        if res.found:
            return ReconfDecision(True, N, res.trace, 0, 0, states)
    cov = backward_coverability(protocol, goal, copycat=True)
    if not cov.reachable:
        return ReconfDecision(False, basis_size=len(cov.basis), iterations=cov.iterations, states=states)
    for N in range(1, WITNESS_SIZE_LIMIT + 1):
        res = ef_fixed_n(protocol, goal, Mode.RECONF, N, max_states)
        states += res.states
        if res.found:
            return ReconfDecision(True, N, res.trace, len(cov.basis), cov.iterations, states)
    raise PTBPError("BUDGET_EXCEEDED", f"goal is coverable but no witness with at most {WITNESS_SIZE_LIMIT} processes")


def ef_clique_semi(protocol, goal, n_max=6, max_states=None):
    """Search sizes 1..n_max in the clique semantics; never answers no."""
    _check_search_input(protocol)
    states = 0
    for N in range(1, n_max + 1):
        res = ef_fixed_n(protocol, goal, Mode.CLIQUE, N, max_states)
        states += res.states
        if res.found:
            return Verdict(
                Status.SEMIDECIDED,
                True,
                Witness(N, {}, tuple(res.trace), Mode.CLIQUE),
                "ef_clique_semi",
                explored_up_to=N,
                stats={"states": states},
            )
    return Verdict(Status.INCONCLUSIVE, None, None, "ef_clique_semi", explored_up_to=n_max, stats={"states": states})


# parameter lifting --------------------------------------------------------------------


def compared_values(protocol, trace, N, mode=Mode.RECONF, pval=None, concrete=None):
    """For every parameter, the clock values it is compared with along the
    trace (actor guards and the guards of receptions that fire).

    The trace is replayed on ``concrete`` (a parameter-free protocol with the
    same edges, such as N_max); atoms are read from ``protocol``.
    """
    concrete = concrete if concrete is not None else protocol
    execution = replay(concrete, pval or {}, mode, trace, N)
    seen = {p: [] for p in protocol.params}
    index = {c: k for k, c in enumerate(protocol.clocks)}
    confs = execution.configs
    for k, label in enumerate(trace):
        before = confs[k].delayed(label.delay)
        fired = [(label.actor, label.edge)]
        after = confs[k + 1]
        edge = protocol.edges[label.edge]
        if edge.action.kind == "send":
            for j in label.receivers:
                if j == label.actor:
                    continue
                jloc, jclocks = before.processes[j - 1]
                opts = [
                    idx
                    for idx, e in concrete.receptions.get((jloc, edge.action.message), ())
                    if _sat(concrete, jclocks, e.guard, {})
                ]
                if not opts:
                    continue
                pick = label.choice_map().get(j, opts[0])
                fired.append((j, pick))
        del after
        for who, idx in fired:
            clocks = before.processes[who - 1][1]
            for atom in protocol.edges[idx].guard:
                if atom.parametric:
                    seen[atom.bound].append((atom.rel, clocks[index[atom.clock]]))
    return seen


def witness_valuation(protocol, trace, N, mode=Mode.RECONF, concrete=None):
    """A valuation inside the bounds under which ``trace`` (a run of N_max)
    replays on ``protocol``.

    Closed endpoints are used as such; on an open endpoint the value sits
    halfway between the extreme compared clock value and the endpoint.
    """
    info = classify(protocol)
    if concrete is None:
        concrete = build_n_max(protocol)
    seen = compared_values(protocol, trace, N, mode, concrete=concrete)
    pval = {}
    for p, role in info.roles.items():
        b = protocol.bound(p)
        values = [v for _, v in seen.get(p, ())]
        if role == Role.UNUSED:
            pval[p] = Fraction(b.inf) if b.left_closed else _inside(b)
        elif role == Role.UPPER:
            if b.right_closed:
                pval[p] = Fraction(b.sup)
            else:
                lo = max(values + [Fraction(b.inf)]) if values else None
                if lo is None:
                    pval[p] = _inside(b)
                else:
                    if lo >= b.sup:
                        raise PTBPError("INFEASIBLE", f"{p} compared at {lo} >= open end {b.sup}")
                    pval[p] = (lo + b.sup) / 2
        elif role == Role.LOWER:
            if b.left_closed:
                pval[p] = Fraction(b.inf)
            else:
                hi = min(values) if values else None
                if b.sup is not None:
                    hi = min(hi, Fraction(b.sup)) if hi is not None else Fraction(b.sup)
                if hi is None:
                    pval[p] = Fraction(b.inf) + 1
                else:
                    if hi <= b.inf:
                        raise PTBPError("INFEASIBLE", f"{p} compared at {hi} <= open end {b.inf}")
                    pval[p] = (b.inf + hi) / 2
        else:
            raise PTBPError("NOT_LU", f"{p} is used both as lower and upper bound")
    return pval


def _inside(b):
    if b.sup is None:
        return Fraction(b.inf) + (0 if b.left_closed else 1)
    if b.left_closed:
        return Fraction(b.inf)
    return (Fraction(b.inf) + b.sup) / 2 if not b.right_closed else Fraction(b.sup)


def _require_one_clock(protocol):
    if len(protocol.clocks) > 1:
        raise PTBPError("MULTI_CLOCK", f"{len(protocol.clocks)} clocks; one is supported")


def _verify(protocol, witness, goal):
    execution = replay(protocol, witness.pval, witness.mode, witness.trace, witness.N)
    if not reaches(execution, goal):
        raise PTBPError("INTERNAL", "witness replays but misses the goal")
    return execution


def ef_existence_lu(protocol, goal, mode=Mode.RECONF, n_max=6, max_states=None):
    """EF-existence for bounded L/U protocols through the maximal permissive
    parameter-free protocol."""
    mode = Mode(mode)
    _require_one_clock(protocol)
    nmax = build_n_max(protocol)
    started = time.perf_counter()
    if mode == Mode.RECONF:
        dec = ef_reconf_decide(nmax, goal, max_states)
        stats = {"basis_size": dec.basis_size, "states": dec.states}
        if not dec.answer:
            return Verdict(Status.DECIDED, False, None, "ef_existence_lu", "LEM6", stats=stats)
        status, N, trace = Status.DECIDED, dec.N, dec.trace
    else:
        semi = ef_clique_semi(nmax, goal, n_max, max_states)
        if semi.status != Status.SEMIDECIDED:
            semi.procedure, semi.citation = "ef_existence_lu", "LEM6"
            return semi
        status, N, trace, stats = Status.SEMIDECIDED, semi.witness.N, semi.witness.trace, semi.stats
    pval = witness_valuation(protocol, trace, N, mode, concrete=nmax)
    witness = Witness(N, pval, tuple(trace), mode)
    _verify(protocol, witness, goal)
    stats["seconds"] = round(time.perf_counter() - started, 6)
    return Verdict(status, True, witness, "ef_existence_lu", "LEM6", explored_up_to=N, stats=stats)


def ef_universality_lu(protocol, goal, mode=Mode.RECONF, n_max=6, max_states=None):
    """EF-universality for closed bounded L/U protocols through the minimal
    permissive valuation."""
    mode = Mode(mode)
    _require_one_clock(protocol)
    nmin = build_n_min(protocol)
    vmin = min_valuation(protocol)
    if mode == Mode.RECONF:
        dec = ef_reconf_decide(nmin, goal, max_states)
        stats = {"basis_size": dec.basis_size, "states": dec.states}
        if not dec.answer:
            return Verdict(Status.DECIDED, False, None, "ef_universality_lu", "LEM5", stats=stats)
        witness = Witness(dec.N, vmin, tuple(dec.trace), mode)
        _verify(protocol, witness, goal)
        return Verdict(Status.DECIDED, True, witness, "ef_universality_lu", "LEM5", explored_up_to=dec.N, stats=stats)
    semi = ef_clique_semi(nmin, goal, n_max, max_states)
    semi.procedure, semi.citation = "ef_universality_lu", "LEM5"
    if semi.witness is not None:
        semi.witness = Witness(semi.witness.N, vmin, semi.witness.trace, mode)
        _verify(protocol, semi.witness, goal)
    return semi


# AF on the size-one network ----------------------------------------------------------------


@dataclass
class Lasso:
    """Goal-avoiding maximal behaviour of a single process: a path of
    ``(location, region, edge)`` steps, then either a dead end or a cycle."""

    prefix: list
    cycle: list
    dead_end: Optional[tuple] = None
    trace: list = field(default_factory=list)

    @property
    def cycle_edges(self):
        return [edge for _, _, edge in self.cycle]


def _region_index_graph(sp):
    """Single-process region graph: node ``(loc, r)`` with r in 0..2K+1
    (even r = 2n is the value n, odd r = 2n+1 is (n, n+1), 2K+1 beyond)."""
    K = sp.K
    top = 2 * K + 1

    def kind(r):
        if r == top:
            return "beyond", None
        return ("zero", r // 2) if r % 2 == 0 else ("frac", r // 2)

    def succ(node):
        loc, r = node
        out = []
        for idx, e in sp.protocol.outgoing.get(loc, ()):
            if e.action.kind == "recv":
                continue
            for r2 in range(r, top + 1):
                if sp.sat(idx, *kind(r2)):
                    out.append((idx, r2, (e.target, 0 if e.reset else r2)))
        return out

    return succ, top


def _representative(r, K, scale):
    if r == 2 * K + 1:
        return Fraction(K + 1, scale)
    if r % 2 == 0:
        return Fraction(r // 2, scale)
    return (Fraction(r // 2) + Fraction(1, 2)) / scale


def af_counterexample(protocol, pval, goal):
    """Goal-avoiding maximal behaviour of the size-one network, or None when
    every maximal execution reaches ``goal``."""
    _require_one_clock(protocol)
    concrete = substitute(protocol, pval or {})
    sp = ScaledProtocol(concrete)
    succ, top = _region_index_graph(sp)
    start = (concrete.init, 0)
    if start[0] == goal:
        return None
    # iterative DFS over goal-avoiding nodes, looking for a dead end or a back edge
    parent = {start: None}
    colour = {start: 1}
    stack = [(start, iter(succ(start)))]
    found = None
    if not succ(start):
        found = ("dead", start)
    while stack and found is None:
        node, it = stack[-1]
        step = next(it, None)
        if step is None:
            colour[node] = 2
            stack.pop()
            continue
        idx, r2, nxt = step
        if nxt[0] == goal:
            continue
        if colour.get(nxt) == 1:
            found = ("cycle", node, idx, r2, nxt)
            break
        if nxt in colour:
            continue
        parent[nxt] = (node, idx, r2)
        colour[nxt] = 1
        if not succ(nxt):
            found = ("dead", nxt)
            break
        stack.append((nxt, iter(succ(nxt))))
    if found is None:
        return None

    def path_to(node):
        steps = []
        while parent[node] is not None:
            prev, idx, r2 = parent[node]
            steps.append((prev, idx, r2))
            node = prev
        return steps[::-1]

    if found[0] == "dead":
        steps = path_to(found[1])
        lasso = Lasso([(n[0], n[1], idx) for n, idx, _ in steps], [], found[1])
    else:
        _, node, idx, r2, head = found
        steps = path_to(node) + [(node, idx, r2)]
        cut = next(k for k, (n, _, _) in enumerate(steps) if n == head)
        lasso = Lasso(
            [(n[0], n[1], e) for n, e, _ in steps[:cut]],
            [(n[0], n[1], e) for n, e, _ in steps[cut:]],
        )
    # concrete single-process trace: prefix then one turn of the cycle
    value = Fraction(0)
    trace = []
    for n, e, r2 in steps:
        target = _representative(r2, sp.K, sp.scale)
        delay = max(target - value, Fraction(0)) if r2 != n[1] else Fraction(0)
        trace.append(TransitionLabel(delay, 1, e))
        value = Fraction(0) if concrete.edges[e].reset else value + delay
    lasso.trace = trace
    return lasso


def af_concrete(protocol, pval, goal, mode=Mode.RECONF):
    """Does every maximal execution reach ``goal`` (reconfigurable semantics,
    fixed valuation)?  Decided on the size-one network."""
    if Mode(mode) == Mode.CLIQUE:
        raise PTBPError("CLIQUE_UNSUPPORTED", "the size-one reduction needs the reconfigurable semantics")
    return af_counterexample(protocol, pval, goal) is None


# routing ---------------------------------------------------------------------------------


def _point_valuation(protocol, info):
    """The valuation fixed by degenerate ``[a,a]`` bounds, if every used
    parameter has one."""
    pval = {}
    for p, role in info.roles.items():
        b = protocol.bound(p)
        if b.sup is not None and b.inf == b.sup and b.closed:
            pval[p] = Fraction(b.inf)
        elif role == Role.UNUSED:
            pval[p] = Fraction(b.inf)
        else:
            return None
    return pval


def _finite_upper(protocol, info):
    return all(protocol.bound(p).finite for p, r in info.roles.items() if r == Role.UPPER)


def _all_finite(protocol, info):
    return all(protocol.bound(p).finite for p, r in info.roles.items() if r != Role.UNUSED)


def route(spec):
    """``(procedure, citation)`` for a problem without running anything.

    The procedure is one of ``ef_reconf_decide``, ``ef_point``,
    ``ef_existence_lu``, ``ef_universality_lu``, ``ef_clique_semi``,
    ``af_concrete`` or ``unsupported``.
    """
    protocol, kind, mode = spec.protocol, Kind(spec.kind), Mode(spec.mode)
    info = classify(protocol)
    clocks = max(info.clock_count, 1)
    frag = info.fragment
    if spec.pval is not None:
        frag = Fragment.PARAMETER_FREE
    if kind.is_ef:
        # The one-clock hardness constructions need an unbounded parameter.
        general_hard = "THM3" if mode == Mode.RECONF else "LEM3"
        if clocks >= 2:
            if frag == Fragment.GENERAL:
                return "unsupported", ("LEM1" if _all_finite(protocol, info) else general_hard)
            if frag == Fragment.PARAMETER_FREE:
                return "unsupported", ("THM2" if mode == Mode.RECONF else "OUT_OF_SCOPE")
            return "unsupported", "LEM1"
        if frag == Fragment.GENERAL:
            return "unsupported", ("OPEN_PROBLEM" if _all_finite(protocol, info) else general_hard)
        if frag == Fragment.PARAMETER_FREE:
            if spec.pval is not None or not protocol.params or info.fragment == Fragment.PARAMETER_FREE:
                if mode == Mode.RECONF:
                    return "ef_point", "THM2"
                return "ef_point", ("LEM6" if kind == Kind.EF_EXISTENCE else "LEM5")
        bound = info.boundedness
        if kind == Kind.EF_EXISTENCE:
            if _finite_upper(protocol, info) and bound != Boundedness.UNBOUNDED:
                return "ef_existence_lu", "LEM6"
            return "unsupported", "OPEN_PROBLEM"
        if bound == Boundedness.CLOSED:
            return "ef_universality_lu", "LEM5"
        if mode == Mode.RECONF:
            return "unsupported", "OPEN_PROBLEM"
        if bound == Boundedness.OPEN:
            return "unsupported", ("THM5" if frag == Fragment.LU else "LEM7")
        lower_inf = any(
            r == Role.LOWER and protocol.bound(p).sup is None for p, r in info.roles.items()
        )
        return "unsupported", ("LEM7" if lower_inf else "OPEN_PROBLEM")
    # AF problems
    if mode == Mode.CLIQUE:
        return "unsupported", "THM4"
    fixed = spec.pval is not None or frag == Fragment.PARAMETER_FREE or _point_valuation(protocol, info) is not None
    if clocks >= 3:
        return "unsupported", ("OUT_OF_SCOPE" if fixed else "THM1")
    if clocks == 2:
        return "unsupported", ("OUT_OF_SCOPE" if fixed else "OPEN_PROBLEM")
    if fixed:
        return "af_concrete", "THM1"
    return "unsupported", "OUT_OF_SCOPE"


def solve(spec):
    """Answer a problem; refusals and budget exhaustion are verdicts, never
    exceptions."""
    started = time.perf_counter()
    try:
        procedure, citation = route(spec)
        verdict = _run(spec, procedure, citation)
    except PTBPError as err:
        verdict = Verdict(Status.UNSUPPORTED, None, None, "error", err.code, stats={"error": str(err)})
    verdict.stats.setdefault("seconds", round(time.perf_counter() - started, 6))
    return verdict


def _run(spec, procedure, citation):
    protocol, goal, mode = spec.protocol, spec.goal, Mode(spec.mode)
    if goal not in protocol.locations:
        raise PTBPError("UNKNOWN_GOAL", f"{goal} is not a location")
    if procedure == "unsupported":
        return Verdict(Status.UNSUPPORTED, None, None, "unsupported", citation)
    info = classify(protocol)
    if procedure == "ef_point":
        pval = dict(spec.pval) if spec.pval is not None else (_point_valuation(protocol, info) or {})
        concrete = substitute(protocol, pval)
        if mode == Mode.RECONF:
            dec = ef_reconf_decide(concrete, goal, spec.step_max * 10)
            stats = {"basis_size": dec.basis_size, "states": dec.states}
            if not dec.answer:
                return Verdict(Status.DECIDED, False, None, "ef_reconf_decide", citation, stats=stats)
            witness = Witness(dec.N, pval, tuple(dec.trace), mode)
            _verify(protocol, witness, goal)
            return Verdict(Status.DECIDED, True, witness, "ef_reconf_decide", citation, dec.N, stats)
        semi = ef_clique_semi(concrete, goal, spec.n_max, spec.step_max * 10)
        semi.citation = citation
        if semi.witness is not None:
            semi.witness = Witness(semi.witness.N, pval, semi.witness.trace, mode)
            _verify(protocol, semi.witness, goal)
        return semi
    if procedure == "ef_existence_lu":
        return ef_existence_lu(protocol, goal, mode, spec.n_max, spec.step_max * 10)
    if procedure == "ef_universality_lu":
        return ef_universality_lu(protocol, goal, mode, spec.n_max, spec.step_max * 10)
    if procedure == "af_concrete":
        pval = spec.pval if spec.pval is not None else (_point_valuation(protocol, info) or {})
        lasso = af_counterexample(protocol, pval, goal)
        return Verdict(
            Status.DECIDED,
            lasso is None,
            None,
            "af_concrete",
            citation,
            explored_up_to=1,
            counterexample=lasso,
        )
    raise PTBPError("INTERNAL", f"unknown procedure {procedure}")


def check_problem(protocol):
    """Diagnostics that make a protocol unusable as a problem input."""
    return validate(protocol)
