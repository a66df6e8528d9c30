"""Exact executable semantics of PTBP networks.

A transition is a delay followed by one action of one process (the actor).
Broadcasts are non-blocking: a designated receiver without an enabled
reception is left untouched.
"""

import random
import warnings
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product
from math import floor, lcm
from typing import Optional

from .model import PTBPError, check_pval, compare

ZERO = Fraction(0)


class Mode(str, Enum):
    RECONF = "reconf"
    CLIQUE = "clique"

    @classmethod
    def parse(cls, text):
        key = str(text).strip().lower()
        if key in ("reconf", "reconfigurable"):
            return cls.RECONF
        if key == "clique":
            return cls.CLIQUE
        raise PTBPError("BAD_MODE", f"unknown semantics {text!r}")


class Flag(str, Enum):
    TERMINAL = "terminal"
    TRUNCATED = "truncated"
    LASSO = "lasso"


class ReplayError(PTBPError):
    """A trace step failed; ``step_index`` counts from 1."""

    def __init__(self, step_index, cause):
        super().__init__("REPLAY_FAIL", f"step {step_index}: {cause}")
        self.step_index = step_index
        self.cause = cause


def format_value(value):
    """Render a rational as a terminating decimal when possible, else as a/b."""
    value = Fraction(value)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    if digits == 0:
        return str(value.numerator)
    scaled = value * 10**digits
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled.numerator), 10**digits)
    return f"{sign}{whole}.{str(frac).rjust(digits, '0').rstrip('0')}"


@dataclass(frozen=True)
class Configuration:
    """One ``(location, clocks)`` pair per process; clocks follow the
    protocol's declared clock order."""

    processes: tuple

    @property
    def N(self):
        return len(self.processes)

    def location(self, i):
        return self.processes[i - 1][0]

    def clocks(self, i):
        return self.processes[i - 1][1]

    def locations(self):
        return [loc for loc, _ in self.processes]

    def delayed(self, t):
        if not t:
            return self
        return Configuration(tuple((loc, tuple(c + t for c in val)) for loc, val in self.processes))

    def __str__(self):
        parts = []
        for loc, val in self.processes:
            if not val:
                parts.append(f"({loc})")
            else:
                parts.append(f"({loc}, {', '.join(format_value(v) for v in val)})")
        return " ".join(parts)


@dataclass(frozen=True)
class TransitionLabel:
    """``(t, i, edge, R)``; ``choices`` pins the reception edge of receivers
    that have several enabled receptions, as sorted ``(receiver, edge)`` pairs."""

    delay: Fraction
    actor: int
    edge: int
    receivers: frozenset = frozenset()
    choices: tuple = ()

    def choice_map(self):
        return dict(self.choices)

    def with_delay(self, delay):
        return TransitionLabel(Fraction(delay), self.actor, self.edge, self.receivers, self.choices)


@dataclass(frozen=True)
class Execution:
    protocol: object = field(repr=False)
    pval: dict
    mode: Mode
    initial: Configuration
    steps: tuple = ()
    flag: Flag = Flag.TRUNCATED

    @property
    def labels(self):
        return [label for label, _ in self.steps]

    @property
    def configs(self):
        return [self.initial] + [conf for _, conf in self.steps]

    @property
    def final(self):
        return self.steps[-1][1] if self.steps else self.initial

    @property
    def duration(self):
        return sum((label.delay for label, _ in self.steps), ZERO)


@dataclass(frozen=True)
class RegionBoundaries:
    """Delay menu hitting every region reachable by letting time pass."""

    horizon: Optional[Fraction] = None


def initial_config(protocol, N):
    if N < 1:
        raise PTBPError("BAD_SIZE", "a network has at least one process")
    zeros = tuple(ZERO for _ in protocol.clocks)
    return Configuration(tuple((protocol.init, zeros) for _ in range(N)))


def _clock_index(protocol):
    return {c: k for k, c in enumerate(protocol.clocks)}


def _resolve(atom, pval):
    if isinstance(atom.bound, str):
        if atom.bound not in pval:
            raise PTBPError("MISSING_PARAM", f"no value for parameter {atom.bound}")
        return pval[atom.bound]
    return atom.bound


def _sat(protocol, clocks, guard, pval):
    index = _clock_index(protocol)
    for atom in guard:
        if not compare(clocks[index[atom.clock]], atom.rel, _resolve(atom, pval)):
            return False
    return True


def guard_sat(valuation, guard, pval=None):
    """True iff every atom of ``guard`` holds under ``valuation`` (a mapping
    clock -> value) with parameters read from ``pval``."""
    pval = {k: Fraction(v) for k, v in (pval or {}).items()}
    for atom in guard:
        if not compare(Fraction(valuation[atom.clock]), atom.rel, _resolve(atom, pval)):
            return False
    return True


def _normal_pval(protocol, pval):
    return check_pval(protocol, pval or {})


def _reset(protocol, clocks, reset):
    if not reset:
        return clocks
    index = _clock_index(protocol)
    hit = {index[c] for c in reset}
    return tuple(ZERO if k in hit else v for k, v in enumerate(clocks))


def _enabled_receptions(protocol, loc, clocks, message, pval):
    return [
        idx
        for idx, edge in protocol.receptions.get((loc, message), ())
        if _sat(protocol, clocks, edge.guard, pval)
    ]


def step(protocol, config, label, pval=None, mode=Mode.RECONF):
    """Apply one transition label and return the successor configuration."""
    pval = _normal_pval(protocol, pval)
    return _step(protocol, config, label, pval, Mode(mode))


def _step(protocol, config, label, pval, mode):
    N = config.N
    if not 1 <= label.actor <= N:
        raise PTBPError("BAD_ACTOR", f"actor {label.actor} outside 1..{N}")
    if not 0 <= label.edge < len(protocol.edges):
        raise PTBPError("BAD_EDGE", f"no edge with index {label.edge}")
    if label.delay < 0:
        raise PTBPError("BAD_DELAY", f"negative delay {label.delay}")
    bad = [j for j in label.receivers if not 1 <= j <= N]
    if bad:
        raise PTBPError("BAD_RECEIVER", f"receivers {sorted(bad)} outside 1..{N}")
    edge = protocol.edges[label.edge]
    conf = config.delayed(label.delay)
    i = label.actor
    loc, clocks = conf.processes[i - 1]
    if edge.source != loc or edge.action.kind == "recv":
        raise PTBPError("BAD_ACTOR_EDGE", f"process {i} in {loc} cannot take edge {label.edge} ({edge})")
    if not _sat(protocol, clocks, edge.guard, pval):
        raise PTBPError("GUARD_VIOLATION", f"process {i} clocks {clocks} violate {edge}")
    procs = list(conf.processes)
    procs[i - 1] = (edge.target, _reset(protocol, clocks, edge.reset))
    if edge.action.kind == "send":
        if mode == Mode.CLIQUE and set(label.receivers) | {i} != set(range(1, N + 1)):
            raise PTBPError("CLIQUE_RECEIVER_SET", "clique broadcasts reach every process")
        choices = label.choice_map()
        for j in sorted(set(label.receivers) - {i}):
            jloc, jclocks = conf.processes[j - 1]
            options = _enabled_receptions(protocol, jloc, jclocks, edge.action.message, pval)
            if not options:
                if j in choices:
                    raise PTBPError("BAD_CHOICE", f"receiver {j} has no enabled reception")
                continue
            if j in choices:
                pick = choices[j]
                if pick not in options:
                    raise PTBPError("BAD_CHOICE", f"edge {pick} is not an enabled reception of {j}")
            elif len(options) == 1:
                pick = options[0]
            else:
                raise PTBPError("AMBIGUOUS_RECEPTION", f"receiver {j} must choose among edges {options}")
            redge = protocol.edges[pick]
            procs[j - 1] = (redge.target, _reset(protocol, jclocks, redge.reset))
    return Configuration(tuple(procs))


def max_scale(protocol, pval, config=None):
    """Scaled region grid ``(K, scale)`` of the protocol under ``pval``; the
    scale also clears the denominators of ``config``'s clock values."""
    consts = [Fraction(_resolve(a, pval)) for a in protocol.atoms()]
    scale = 1
    for c in consts:
        scale = lcm(scale, c.denominator)
    if config is not None:
        for _, val in config.processes:
            for v in val:
                scale = lcm(scale, v.denominator)
    K = max((c * scale for c in consts), default=ZERO)
    return int(K), scale


def region_delays(protocol, config, pval, horizon=None):
    """Delays at which some clock crosses a grid boundary, the midpoints
    between them, and one delay past the last boundary."""
    K, scale = max_scale(protocol, pval)
    unit = Fraction(1, scale)
    cap = Fraction(K, scale)
    points = {ZERO}
    for _, val in config.processes:
        for v in val:
            if v > cap:
                continue
            m = floor(v * scale) + 1
            while m * unit <= cap:
                points.add(m * unit - v)
                m += 1
    ordered = sorted(points)
    menu = set(ordered)
    for a, b in zip(ordered, ordered[1:]):
        menu.add((a + b) / 2)
    menu.add(ordered[-1] + Fraction(1, 2 * scale))
    menu = sorted(menu)
    if horizon is not None:
        menu = [d for d in menu if d <= horizon]
    return menu


def enabled_labels(protocol, config, pval=None, mode=Mode.RECONF, delays=None):
    """Enumerate the legal transition labels over a finite delay menu.

    ``delays`` is a list of rationals or a :class:`RegionBoundaries`; the
    default is ``RegionBoundaries()``.  Reconfigurable labels use exactly the
    receivers that take a reception.
    """
    pval = _normal_pval(protocol, pval)
    mode = Mode(mode)
    if delays is None:
        delays = RegionBoundaries()
    if isinstance(delays, RegionBoundaries):
        delays = region_delays(protocol, config, pval, delays.horizon)
    N = config.N
    everyone = frozenset(range(1, N + 1))
    labels = []
    for d in delays:
        d = Fraction(d)
        conf = config.delayed(d)
        for i, (loc, clocks) in enumerate(conf.processes, start=1):
            for idx, edge in protocol.outgoing.get(loc, ()):
                kind = edge.action.kind
                if kind == "recv" or not _sat(protocol, clocks, edge.guard, pval):
                    continue
                if kind == "tau":
                    labels.append(TransitionLabel(d, i, idx, everyone if mode == Mode.CLIQUE else frozenset()))
                    continue
                menus = []
                for j, (jloc, jclocks) in enumerate(conf.processes, start=1):
                    if j == i:
                        continue
                    opts = _enabled_receptions(protocol, jloc, jclocks, edge.action.message, pval)
                    if mode == Mode.RECONF:
                        menus.append([(j, None)] + [(j, o) for o in opts])
                    elif opts:
                        menus.append([(j, o) for o in opts])
                    else:
                        menus.append([(j, None)])
                for combo in product(*menus):
                    taken = [(j, o) for j, o in combo if o is not None]
                    receivers = everyone if mode == Mode.CLIQUE else frozenset(j for j, _ in taken)
                    choices = tuple(
                        (j, o)
                        for j, o in taken
                        if len(protocol.receptions.get((conf.location(j), edge.action.message), ())) > 1
                    )
                    labels.append(TransitionLabel(d, i, idx, receivers, choices))
    return labels


def _delay_window(protocol, clocks, guard, pval):
    """Set of delays t >= 0 with ``clocks + t`` satisfying ``guard``, as
    ``(lo, lo_closed, hi, hi_closed)`` (``hi=None`` is unbounded) or None."""
    index = _clock_index(protocol)
    lo, lo_closed, hi, hi_closed = ZERO, True, None, False
    for atom in guard:
        c = _resolve(atom, pval) - clocks[index[atom.clock]]
        rel = atom.rel
        if rel in ("<", "<=", "="):
            closed = rel != "<"
            if hi is None or c < hi or (c == hi and not closed):
                hi, hi_closed = c, closed
        if rel in (">", ">=", "="):
            closed = rel != ">"
            if c > lo or (c == lo and not closed):
                lo, lo_closed = c, closed
    if hi is None:
        return lo, lo_closed, hi, hi_closed
    if hi < lo or (hi == lo and not (lo_closed and hi_closed)):
        return None
    return lo, lo_closed, hi, hi_closed


def is_terminal(protocol, config, pval=None, mode=Mode.RECONF):
    """True iff no delay and action can fire anywhere in the network."""
    pval = _normal_pval(protocol, pval)
    for loc, clocks in config.processes:
        for _, edge in protocol.outgoing.get(loc, ()):
            if edge.action.kind == "recv":
                continue
            if _delay_window(protocol, clocks, edge.guard, pval) is not None:
                return False
    return True


def replay(protocol, pval, mode, trace, N=None, initial=None):
    """Re-execute ``trace`` from the initial configuration of size ``N``."""
    pval = _normal_pval(protocol, pval)
    mode = Mode(mode)
    if initial is None:
        if N is None:
            raise PTBPError("BAD_SIZE", "replay needs N or an initial configuration")
        initial = initial_config(protocol, N)
    conf = initial
    steps = []
    for k, label in enumerate(trace, start=1):
        try:
            conf = _step(protocol, conf, label, pval, mode)
        except ReplayError:
            raise
        except PTBPError as err:
            raise ReplayError(k, err) from err
        steps.append((label, conf))
    flag = Flag.TERMINAL if is_terminal(protocol, conf, pval, mode) else Flag.TRUNCATED
    return Execution(protocol, pval, mode, initial, tuple(steps), flag)


def replay_under(execution, pval):
    """Replay the labels of ``execution`` under another valuation."""
    return replay(execution.protocol, pval, execution.mode, execution.labels, initial=execution.initial)


def simulate(protocol, pval, mode, N, steps, seed=0):
    """Seeded random run: each step is drawn uniformly from the labels over
    the region-boundary delay menu."""
    pval = _normal_pval(protocol, pval)
    mode = Mode(mode)
    rng = random.Random(seed)
    conf = initial_config(protocol, N)
    initial = conf
    taken = []
    flag = Flag.TRUNCATED
    for _ in range(steps):
        labels = enabled_labels(protocol, conf, pval, mode)
        if not labels:
            flag = Flag.TERMINAL
            break
        label = rng.choice(labels)
        conf = _step(protocol, conf, label, pval, mode)
        taken.append((label, conf))
    else:
        if is_terminal(protocol, conf, pval, mode):
            flag = Flag.TERMINAL
    return Execution(protocol, pval, mode, initial, tuple(taken), flag)


def reaches(execution, goal):
    """True iff some configuration of the execution has a process at ``goal``."""
    if goal not in execution.protocol.locations:
        warnings.warn(f"goal {goal!r} is not a declared location", stacklevel=2)
        return False
    return any(goal in conf.locations() for conf in execution.configs)


def configuration_at(execution, T):
    """Configuration at absolute time ``T``: every step scheduled at or before
    ``T`` has fired and the remaining time has elapsed."""
    T = Fraction(T)
    now = ZERO
    conf = execution.initial
    for label, after in execution.steps:
        if now + label.delay > T:
            break
        now += label.delay
        conf = after
    return conf.delayed(T - now)
