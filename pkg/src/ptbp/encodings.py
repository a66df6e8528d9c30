"""Two-counter machines, their interpreter, and generators turning a machine
into PTBP models whose executions simulate it.

Three constructions are provided: a one-clock reconfigurable encoding with a
single integer parameter ``p`` (:func:`encode_ef_reconf`), a clock-free
clique encoding where counter values are numbers of processes
(:func:`encode_af_clique`), and its timed extension with two parameters that
forces repeated simulations (:func:`encode_efu_clique`).
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .model import TAU, Atom, Edge, ParamBound, Protocol, PTBPError, recv, send
from .semantics import (
    Mode,
    TransitionLabel,
    _delay_window,
    _normal_pval,
    initial_config,
    step,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class Instruction:
    op: str  # "inc", "dec" or "ifz"
    counter: int
    target: str
    other: str = None  # else-branch of ifz

    def targets(self):
        return (self.target,) if self.other is None else (self.target, self.other)


@dataclass(frozen=True)
class TwoCounterMachine:
    program: dict
    init: str
    accept: str

    @property
    def labels(self):
        labels = list(self.program)
        for label in (self.init, self.accept):
            if label not in labels:
                labels.append(label)
        return labels

    def check(self):
        known = set(self.program) | {self.accept}
        if self.accept in self.program:
            raise PTBPError("ACCEPT_HAS_INSTRUCTION", self.accept)
        for label, ins in self.program.items():
            if ins.counter not in (1, 2):
                raise PTBPError("BAD_COUNTER", f"{label}: counter {ins.counter}")
            for tgt in ins.targets():
                if tgt not in known:
                    raise PTBPError("DANGLING_LABEL", f"{label}: goto {tgt}")
        if self.init not in known:
            raise PTBPError("DANGLING_LABEL", f"init {self.init}")


@dataclass(frozen=True)
class MachineConfig:
    label: str
    c1: int = 0
    c2: int = 0

    def counter(self, i):
        return self.c1 if i == 1 else self.c2


class RunStatus(str, Enum):
    HALTED = "halted"
    RUNNING = "running"


@dataclass(frozen=True)
class MachineRun:
    run: tuple
    status: RunStatus
    max_counter_sum: int

    def __iter__(self):
        return iter((self.run, self.status, self.max_counter_sum))

    @property
    def halted(self):
        return self.status == RunStatus.HALTED


def machine_step(machine, conf):
    ins = machine.program[conf.label]
    c = [conf.c1, conf.c2]
    k = ins.counter - 1
    if ins.op == "inc":
        c[k] += 1
        nxt = ins.target
    elif ins.op == "dec":
        if c[k] == 0:
            raise PTBPError("NEGATIVE_COUNTER", f"{conf.label}: decrement of c{ins.counter} at zero")
        c[k] -= 1
        nxt = ins.target
    else:
        nxt = ins.target if c[k] == 0 else ins.other
    return MachineConfig(nxt, c[0], c[1])


def interpret(machine, max_steps):
    """Run from ``(init, 0, 0)`` for at most ``max_steps`` instructions."""
    machine.check()
    conf = MachineConfig(machine.init)
    run = [conf]
    while conf.label != machine.accept and len(run) <= max_steps:
        conf = machine_step(machine, conf)
        run.append(conf)
    status = RunStatus.HALTED if conf.label == machine.accept else RunStatus.RUNNING
    return MachineRun(tuple(run), status, max(c.c1 + c.c2 for c in run))


def normalize_machine(machine):
    """Make the machine empty both counters through two final zero tests
    before accepting."""
    z1, d1, z2, d2 = (f"norm_{s}" for s in ("z1", "d1", "z2", "d2"))
    acc = machine.accept

    def redirect(label):
        return z1 if label == acc else label

    program = {
        label: Instruction(ins.op, ins.counter, redirect(ins.target), ins.other and redirect(ins.other))
        for label, ins in machine.program.items()
    }
    program[d1] = Instruction("dec", 1, z1)
    program[d2] = Instruction("dec", 2, z2)
    program[z1] = Instruction("ifz", 1, z2, d1)
    program[z2] = Instruction("ifz", 2, acc, d2)
    return TwoCounterMachine(program, redirect(machine.init), acc)


# one-clock reconfigurable encoding -----------------------------------------------


def ctl(label, j):
    return f"ctl_{label}_{j}"


def _atom(rel, bound):
    return Atom("x", rel, bound if isinstance(bound, str) else Fraction(bound))


def integer_gadget(param="p"):
    """Gadget letting the simulation start only when ``param`` is an integer.

    Processes choose between a sender (location 1) broadcasting ``now`` at
    ``x = p`` and listeners (location 2) resetting at every integer instant;
    a listener hearing ``now`` at an integer time enters ``q0``.
    """
    edges = (
        Edge("0", "1"),
        Edge("0", "2"),
        Edge("1", "1", (_atom("=", param),), send("now")),
        Edge("2", "2", (_atom("=", 1),), TAU, ("x",)),
        Edge("2", "q0", (_atom("=", 0),), recv("now")),
        Edge("2", "notinteger", (_atom(">", 0), _atom("<", 1)), recv("now")),
    )
    return Protocol(
        name="integer_gadget",
        locations=("0", "1", "2", "q0", "notinteger"),
        init="0",
        clocks=("x",),
        messages=("now",),
        params=(param,),
        edges=edges,
    )


def gadget_run(p, param="p"):
    """Two-process schedule of :func:`integer_gadget`: process 1 becomes the
    sender, process 2 a listener resetting at every integer instant until
    the sender broadcasts ``now`` at time ``p``."""
    p = Fraction(p)
    if p <= 0:
        raise PTBPError("BAD_PARAM", "the gadget needs a positive parameter value")
    labels = [TransitionLabel(_ZERO, 1, 0), TransitionLabel(_ZERO, 2, 1)]
    whole = p.numerator // p.denominator
    labels += [TransitionLabel(_ONE, 2, 3)] * whole
    labels.append(TransitionLabel(p - whole, 1, 2, frozenset({2})))
    return labels


def encode_ef_reconf(machine, with_integer_gadget=False, universality=False, strict_decrement=False):
    """One-clock, one-parameter reconfigurable encoding of ``machine``.

    The controller's copies of label ``k`` are ``ctl_k_1`` .. ``ctl_k_4``; the
    counter i is held by processes in ``c{i}`` whose clock runs ahead of the
    controller's by the counter value.  Every edge carries the extra guard
    ``x <= p``.  ``universality`` appends the two final zero tests and, with
    the gadget, sends non-integer valuations to ``error``.
    """
    machine.check()
    if universality:
        machine = normalize_machine(machine)
    p = "p"
    cap = _atom("<=", p)
    edges = []

    def add(src, dst, guard=(), action=TAU, reset=False):
        edges.append(Edge(src, dst, tuple(guard) + (cap,), action, ("x",) if reset else ()))

    at0 = [_atom("=", 0)]
    add("q0", ctl(machine.init, 1), at0)
    add("q0", "c1", at0)
    add("q0", "c2", at0)
    add("q0", "idle", at0)
    used = set()
    for label, ins in machine.program.items():
        i = ins.counter
        used.add((ins.op, i))
        if ins.op in ("inc", "dec"):
            add(ctl(label, 1), ctl(label, 2), [_atom("=", 1)], send(f"{ins.op}{i}"))
            add(ctl(label, 2), ctl(ins.target, 1), [_atom("=", p)], send("tick"), True)
        else:
            add(ctl(label, 1), ctl(label, 2), [_atom("=", 1)], send(f"zt{i}"))
            add(ctl(label, 2), ctl(label, 3), [_atom("=", p)], recv(f"cnt{i}"))
            add(ctl(label, 2), ctl(label, 4), [_atom("<", p)], recv(f"cnt{i}"))
            add(ctl(label, 3), ctl(ins.target, 1), [_atom("=", p)], send("tick"), True)
            add(ctl(label, 4), ctl(ins.other, 1), [_atom("=", p)], send("tick"), True)
    for op, i in sorted(used):
        j = 3 - i
        ci, cj = f"c{i}", f"c{j}"
        if op == "dec":
            guard = [_atom(">", 1)] + ([_atom("<", p)] if strict_decrement else [])
            add(ci, f"dec1_{i}_{i}", guard, recv(f"dec{i}"))
            add(f"dec1_{i}_{i}", f"dec2_{i}_{i}", [_atom("=", p)], TAU, True)
            add(f"dec2_{i}_{i}", f"dec3_{i}_{i}", [_atom("=", 1)], TAU, True)
            add(f"dec3_{i}_{i}", ci, (), recv("tick"))
        elif op == "inc":
            add(ci, f"inc1_{i}_{i}", [_atom("<", p)], recv(f"inc{i}"))
            add(ci, "error", [_atom("=", p)], recv(f"inc{i}"))
            add(f"inc1_{i}_{i}", f"inc2_{i}_{i}", (), send(f"nc{i}"))
            add(f"inc2_{i}_{i}", "idle", [_atom("=", p)], send(f"oc{i}"))
            add("idle", f"nc1_{i}", (), recv(f"nc{i}"), True)
            add(f"nc1_{i}", f"nc2_{i}", [_atom("=", 1)], recv(f"oc{i}"))
            add(f"nc2_{i}", ci, (), recv("tick"))
        else:
            add(ci, f"zt1_{i}_{i}", (), recv(f"zt{i}"))
            add(f"zt1_{i}_{i}", f"zt2_{i}_{i}", [_atom("=", p)], send(f"cnt{i}"), True)
            add(f"zt2_{i}_{i}", ci, (), recv("tick"))
        name = "zt" if op == "ifz" else op
        add(cj, f"{name}1_{i}_{j}", (), recv(f"{'zt' if op == 'ifz' else op}{i}"))
        add(f"{name}1_{i}_{j}", f"{name}2_{i}_{j}", [_atom("=", p)], TAU, True)
        add(f"{name}2_{i}_{j}", cj, (), recv("tick"))
    add("idle", "idle", (), TAU, True)

    locations = ["q0", "error", "idle"]
    for i in (1, 2):
        locations += [f"c{i}", f"nc1_{i}", f"nc2_{i}"]
    for i in (1, 2):
        for j in (1, 2):
            locations += [f"{n}_{i}_{j}" for n in ("zt1", "zt2", "dec1", "dec2", "inc1", "inc2", "inc3")]
        locations.append(f"dec3_{i}_{i}")
    for label in machine.labels:
        locations += [ctl(label, j) for j in (1, 2, 3, 4)]
    messages = ["tick"] + [f"{m}{i}" for i in (1, 2) for m in ("inc", "dec", "zt", "cnt", "oc", "nc")]
    init = "q0"
    if with_integer_gadget:
        gadget = integer_gadget(p)
        sink = "error" if universality else "notinteger"
        edges = [
            Edge(e.source, sink if e.target == "notinteger" else e.target, e.guard, e.action, e.reset)
            for e in gadget.edges
        ] + edges
        locations = ["0", "1", "2"] + locations + ([] if universality else ["notinteger"])
        messages.append("now")
        init = "0"
    return Protocol(
        name="ef_reconf",
        locations=tuple(locations),
        init=init,
        clocks=("x",),
        messages=tuple(messages),
        params=(p,),
        edges=tuple(edges),
        bounds={},
    )


def edge_index(protocol, source, target, message=None):
    """Index of the unique non-receiving edge ``source -> target``
    (optionally filtered by message)."""
    hits = [
        idx
        for idx, e in enumerate(protocol.edges)
        if e.source == source
        and e.target == target
        and e.action.kind != "recv"
        and (message is None or e.action.message == message)
    ]
    if len(hits) != 1:
        raise PTBPError("NO_UNIQUE_EDGE", f"{source} -> {target}: {hits}")
    return hits[0]


def guided_run(machine, p, N, max_steps=1000, strict_decrement=False):
    """Schedule of the reconfigurable encoding faithfully simulating
    ``machine`` with integer parameter value ``p``.

    Process 1 is the controller, 2 and 3 hold the counters and the rest idle.
    Instruction k is broadcast at time ``k*p + 1`` and acknowledged by a
    ``tick`` at ``(k+1)*p``.
    """
    p = Fraction(p)
    if p.denominator != 1 or p < 2:
        raise PTBPError("BAD_PARAM", "the guided run needs an integer p >= 2")
    result = interpret(machine, max_steps)
    has_inc = any(machine.program[s.label].op == "inc" for s in result.run[:-1] if s.label in machine.program)
    need = 4 if has_inc else 3
    if N < need:
        raise PTBPError("POOL_TOO_SMALL", f"network of size {N}; this run needs at least {need}")
    protocol = encode_ef_reconf(machine, strict_decrement=strict_decrement)
    E = lambda s, t, m=None: edge_index(protocol, s, t, m)  # noqa: E731
    events = []  # (time, priority, actor, edge, receivers)

    def emit(time, prio, actor, edge, receivers=()):
        events.append((Fraction(time), prio, len(events), actor, edge, frozenset(receivers)))

    C, P = 1, {1: 2, 2: 3}
    idles = list(range(4, N + 1))
    emit(0, 0, C, E("q0", ctl(machine.init, 1)))
    emit(0, 0, P[1], E("q0", "c1"))
    emit(0, 0, P[2], E("q0", "c2"))
    for q in idles:
        emit(0, 0, q, E("q0", "idle"))
    for k, (s, nxt) in enumerate(zip(result.run, result.run[1:])):
        ins = machine.program[s.label]
        i, j = ins.counter, 3 - ins.counter
        vi, vj = s.counter(i), s.counter(j)
        if max(s.c1, s.c2) > p - 1 or (ins.op == "inc" and vi > p - 2):
            raise PTBPError("COUNTER_OVERFLOW", f"counter values {s.c1},{s.c2} too large for p={p}")
        base = k * p
        tick_to = {P[i], P[j]}
        if ins.op == "inc":
            emit(base + 1, 0, C, E(ctl(s.label, 1), ctl(s.label, 2)), {P[i], P[j]})
            if not idles:
                raise PTBPError("POOL_TOO_SMALL", f"no idle process at step {k}")
            new = idles.pop(0)
            emit(base + p - 1 - vi, 1, P[i], E(f"inc1_{i}_{i}", f"inc2_{i}_{i}"), {new})
            emit(base + p - vi, 1, P[i], E(f"inc2_{i}_{i}", "idle"), {new})
            emit(base + p - vi, 1, P[i], E("idle", "idle"))
            emit(base + p - vj, 1, P[j], E(f"inc1_{i}_{j}", f"inc2_{i}_{j}"))
            idles.append(P[i])
            tick_to = {new, P[j]}
            P[i] = new
            emit(base + p, 3, C, E(ctl(s.label, 2), ctl(ins.target, 1)), tick_to)
        elif ins.op == "dec":
            emit(base + 1, 0, C, E(ctl(s.label, 1), ctl(s.label, 2)), {P[i], P[j]})
            emit(base + p - vi, 1, P[i], E(f"dec1_{i}_{i}", f"dec2_{i}_{i}"))
            emit(base + p - vi + 1, 1, P[i], E(f"dec2_{i}_{i}", f"dec3_{i}_{i}"))
            emit(base + p - vj, 1, P[j], E(f"dec1_{i}_{j}", f"dec2_{i}_{j}"))
            emit(base + p, 3, C, E(ctl(s.label, 2), ctl(ins.target, 1)), tick_to)
        else:
            branch = 3 if vi == 0 else 4
            emit(base + 1, 0, C, E(ctl(s.label, 1), ctl(s.label, 2)), {P[i], P[j]})
            emit(base + p - vi, 1, P[i], E(f"zt1_{i}_{i}", f"zt2_{i}_{i}"), {C})
            emit(base + p - vj, 1, P[j], E(f"zt1_{i}_{j}", f"zt2_{i}_{j}"))
            emit(base + p, 3, C, E(ctl(s.label, branch), ctl(nxt.label, 1)), tick_to)
        for q in idles:
            emit(base + p, 2, q, E("idle", "idle"))
    events.sort()
    labels = []
    now = _ZERO
    for time, _, _, actor, edge, receivers in events:
        labels.append(TransitionLabel(time - now, actor, edge, receivers))
        now = time
    return labels


def _pvalue(pval):
    if isinstance(pval, dict):
        return Fraction(pval["p"])
    return Fraction(pval)


def config_encodes(config, s, pval):
    """Does network configuration ``config`` encode machine configuration
    ``s`` under the parameter value ``p``?

    Processes whose clock exceeds ``p`` are ignored.  The others must sit in
    a counter, in idle or at the controller's first copy of ``s.label``;
    same-location processes must agree on their clock, and each counter's
    clock must run ahead of the controller's by the counter value.
    """
    p = _pvalue(pval)
    clocks = {}
    target = ctl(s.label, 1)
    for loc, val in config.processes:
        x = val[0]
        if x > p:
            continue
        if loc == "idle":
            continue
        if loc not in ("c1", "c2", target):
            return False
        clocks.setdefault(loc, set()).add(x)
    if any(len(v) != 1 for v in clocks.values()):
        return False
    if target not in clocks:
        return False
    (z,) = clocks[target]
    for i in (1, 2):
        if f"c{i}" in clocks:
            (y,) = clocks[f"c{i}"]
            if y - z != s.counter(i):
                return False
    return True


def snapshot_times(machine_run, p):
    """Times ``k*p + 1/2`` at which the k-th machine configuration is encoded."""
    p = Fraction(p)
    return [k * p + Fraction(1, 2) for k in range(len(machine_run.run))]


def mutate_delay(labels, position, shift=Fraction(1, 4)):
    """Move the step at ``position`` later by ``shift`` while keeping every
    other step at its original absolute time."""
    stamped, now = [], _ZERO
    for k, label in enumerate(labels):
        now += label.delay
        stamped.append((now + (shift if k == position else 0), k, label))
    stamped.sort(key=lambda item: item[0])
    out, now = [], _ZERO
    for time, _, label in stamped:
        out.append(label.with_delay(time - now))
        now = time
    return out


def lenient_replay(protocol, pval, labels, N):
    """Replay ``labels`` skipping steps that cannot fire.

    Returns the configurations reached, stamped with their absolute time,
    and the positions of the skipped steps.
    """
    conf = initial_config(protocol, N)
    now, timeline, skipped = _ZERO, [(_ZERO, conf)], []
    for k, label in enumerate(labels):
        now += label.delay
        try:
            conf = step(protocol, conf, label, pval)
        except PTBPError:
            conf = conf.delayed(label.delay)
            skipped.append(k)
        timeline.append((now, conf))
    return timeline, skipped


def configuration_at_time(timeline, T):
    """Configuration of a ``lenient_replay`` timeline just before time ``T``."""
    prev_time, prev = timeline[0]
    for time, conf in timeline[1:]:
        if time >= T:
            break
        prev_time, prev = time, conf
    return prev.delayed(T - prev_time)


def stuck_processes(protocol, config, pval):
    """Processes that can never again move: no outgoing edge, sending or
    receiving, has a guard satisfiable after any delay."""
    pval = _normal_pval(protocol, pval)
    stuck = []
    for i, (loc, clocks) in enumerate(config.processes, start=1):
        edges = protocol.outgoing.get(loc, ())
        if all(_delay_window(protocol, clocks, e.guard, pval) is None for _, e in edges):
            stuck.append(i)
    return stuck


def first_send_of(protocol, labels, prefix):
    """Position of the first step whose edge sends a message starting with ``prefix``."""
    for k, label in enumerate(labels):
        action = protocol.edges[label.edge].action
        if action.kind == "send" and action.message.startswith(prefix):
            return k
    return None


# clique encodings ----------------------------------------------------------------


def _clique_core(machine, timed):
    machine.check()
    locs = ["q0", "idle"]
    for i in (1, 2):
        locs += [f"c{i}", f"c{i}_d", f"c{i}_i", f"c{i}_z"]
    locs += ["err", "goal"] if timed else ["err"]
    for label in machine.labels:
        locs += [f"ctl_{label}", f"ctl_{label}'"]
    messages = [f"{m}{i}" for i in (1, 2) for m in ("inc", "dec", "z", "nz")] + ["ok"]
    k = lambda label: f"ctl_{label}"  # noqa: E731
    kk = lambda label: f"ctl_{label}'"  # noqa: E731
    edges = [Edge("q0", k(machine.init), (), send("ok")), Edge("q0", "idle", (), recv("ok"))]
    for label, ins in machine.program.items():
        i = ins.counter
        ci = f"c{i}"
        if ins.op == "inc":
            edges += [
                Edge(k(label), kk(label), (), send(f"inc{i}")),
                Edge(kk(label), k(ins.target), (), recv("ok")),
                Edge("idle", f"{ci}_i", (), recv(f"inc{i}")),
                Edge(f"{ci}_i", ci, (), send("ok")),
                Edge(f"{ci}_i", "idle", (), recv("ok")),
            ]
        elif ins.op == "dec":
            edges += [
                Edge(k(label), kk(label), (), send(f"dec{i}")),
                Edge(kk(label), k(ins.target), (), recv("ok")),
                Edge(ci, f"{ci}_d", (), recv(f"dec{i}")),
                Edge(f"{ci}_d", "idle", (), send("ok")),
                Edge(f"{ci}_d", ci, (), recv("ok")),
            ]
        else:
            edges += [
                Edge(k(label), k(ins.target), (), send(f"z{i}")),
                Edge(k(label), kk(label), (), send(f"nz{i}")),
                Edge(kk(label), k(ins.other), (), recv("ok")),
                Edge(ci, "err", (), recv(f"z{i}")),
                Edge(ci, f"{ci}_z", (), recv(f"nz{i}")),
                Edge(f"{ci}_z", ci, (), send("ok")),
                Edge(f"{ci}_z", ci, (), recv("ok")),
            ]
    unique = []
    for e in edges:
        if e not in unique:
            unique.append(e)
    return locs, messages, unique


def encode_af_clique(machine):
    """Clock-free clique encoding: counter i is the number of processes in
    ``c{i}``; zero tests are guessed and a wrong ``z`` guess sends the counter
    processes to ``err``.  The accepting controller state moves to ``err``."""
    locs, messages, edges = _clique_core(machine, timed=False)
    edges.append(Edge(f"ctl_{machine.accept}", "err"))
    return Protocol(
        name="af_clique",
        locations=tuple(locs),
        init="q0",
        messages=tuple(messages),
        edges=tuple(edges),
    )


def encode_efu_clique(machine, B=10, variant="LU"):
    """Clique encoding with the end-of-simulation block.

    The controller may restart the simulation (broadcast ``end``) only while
    its clock is below ``p_u``; idle processes reach ``goal`` on ``end`` once
    their clock exceeds ``p_l``.  ``variant`` "U" replaces ``p_l`` by 1 and
    "L" replaces ``p_u`` by 1.
    """
    locs, messages, edges = _clique_core(machine, timed=True)
    pu = "p_u" if variant in ("LU", "U") else _ONE
    pl = "p_l" if variant in ("LU", "L") else _ONE
    edges.append(Edge(f"ctl_{machine.accept}", f"ctl_{machine.init}", (_atom("<", pu),), send("end"), ("x",)))
    edges.append(Edge("idle", "goal", (_atom(">", pl),), recv("end")))
    for i in (1, 2):
        edges.append(Edge(f"c{i}", "idle", (), recv("end")))
    params, bounds = [], {}
    if isinstance(pu, str):
        params.append(pu)
        bounds[pu] = ParamBound(0, 1, False, True)
    if isinstance(pl, str):
        params.append(pl)
        bounds[pl] = ParamBound(0, B, True, True) if variant == "LU" else ParamBound(0, None, True, False)
    return Protocol(
        name="efu_clique",
        locations=tuple(locs),
        init="q0",
        clocks=("x",),
        messages=tuple(messages) + ("end",),
        params=tuple(params),
        edges=tuple(edges),
        bounds=bounds,
    )


def guided_clique_run(machine, N, max_steps=1000):
    """Zero-delay clique schedule of :func:`encode_af_clique` following the
    machine's run; returns ``(labels, checkpoints)`` where checkpoints pair
    the trace length after each instruction block with the machine
    configuration it must encode."""
    result = interpret(machine, max_steps)
    protocol = encode_af_clique(machine)
    everyone = frozenset(range(1, N + 1))
    locs = ["q0"] * N
    labels = []
    checkpoints = []

    def fire(actor, source, target, message=None):
        idx = edge_index(protocol, source, target, message)
        labels.append(TransitionLabel(_ZERO, actor, idx, everyone))
        edge = protocol.edges[idx]
        locs[actor - 1] = edge.target
        if edge.action.kind == "send":
            for j in range(1, N + 1):
                if j == actor:
                    continue
                opts = protocol.receptions.get((locs[j - 1], edge.action.message), ())
                if opts:
                    locs[j - 1] = opts[0][1].target

    fire(1, "q0", f"ctl_{machine.init}")
    checkpoints.append((len(labels), result.run[0]))
    for s, nxt in zip(result.run, result.run[1:]):
        ins = machine.program[s.label]
        ci = f"c{ins.counter}"
        if ins.op == "inc":
            fire(1, f"ctl_{s.label}", f"ctl_{s.label}'")
            helpers = [j for j in range(1, N + 1) if locs[j - 1] == f"{ci}_i"]
            if not helpers:
                raise PTBPError("POOL_TOO_SMALL", f"no idle process for the increment at {s.label}")
            fire(helpers[0], f"{ci}_i", ci)
        elif ins.op == "dec":
            fire(1, f"ctl_{s.label}", f"ctl_{s.label}'")
            helper = next(j for j in range(1, N + 1) if locs[j - 1] == f"{ci}_d")
            fire(helper, f"{ci}_d", "idle")
        elif s.counter(ins.counter) == 0:
            fire(1, f"ctl_{s.label}", f"ctl_{ins.target}", f"z{ins.counter}")
        else:
            fire(1, f"ctl_{s.label}", f"ctl_{s.label}'", f"nz{ins.counter}")
            helper = next(j for j in range(1, N + 1) if locs[j - 1] == f"{ci}_z")
            fire(helper, f"{ci}_z", ci, "ok")
        checkpoints.append((len(labels), nxt))
    if result.halted:
        fire(1, f"ctl_{machine.accept}", "err")
    return labels, checkpoints


def clique_encodes(config, s):
    """Controller at ``s.label`` and ``c_i`` holding ``s.c_i`` processes."""
    locs = config.locations()
    return (
        f"ctl_{s.label}" in locs
        and locs.count("c1") == s.c1
        and locs.count("c2") == s.c2
    )


MODE_OF_TARGET = {"ef-reconf": Mode.RECONF, "af-clique": Mode.CLIQUE, "efu-clique": Mode.CLIQUE}
