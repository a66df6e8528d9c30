"""Region words: the abstraction of a network of one-clock processes, and
backward coverability over it for the reconfigurable semantics.

Clock values are measured on the scaled grid, where every guard constant is
an integer and ``K`` is the largest.  A word records

* ``zero``: processes whose clock is an integer ``n <= K`` (letters ``(loc, n)``),
* ``frac``: groups of processes with the same non-zero fractional part,
  by increasing fractional part (letters ``(loc, n)`` with ``n`` the integer part),
* ``beyond``: processes whose clock exceeds ``K`` (letters are locations).

Every group is a multiset stored as a sorted tuple of ``(letter, count)``.
"""

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from heapq import heappop, heappush
from itertools import product
from math import floor

from .model import PTBPError, compare, max_constant
from .semantics import Mode

ZERO_REGION, FRAC_REGION, BEYOND_REGION = "zero", "frac", "beyond"


def _ms(items):
    """Canonical multiset from an iterable of letters or a Counter."""
    counts = items if isinstance(items, Counter) else Counter(items)
    return tuple(sorted((k, v) for k, v in counts.items() if v > 0))


def _expand(ms):
    for letter, count in ms:
        for _ in range(count):
            yield letter


def _size(ms):
    return sum(v for _, v in ms)


def _leq(small, big):
    """Multiset inclusion on canonical tuples."""
    big = dict(big)
    return all(big.get(k, 0) >= v for k, v in small)


@dataclass(frozen=True)
class RegionWord:
    K: int
    zero: tuple = ()
    frac: tuple = ()
    beyond: tuple = ()

    @property
    def size(self):
        return _size(self.zero) + sum(_size(g) for g in self.frac) + _size(self.beyond)

    def locations(self):
        locs = {loc for (loc, _), _ in self.zero}
        for g in self.frac:
            locs |= {loc for (loc, _), _ in g}
        return locs | {loc for loc, _ in self.beyond}

    def contains(self, loc):
        return loc in self.locations()

    def __str__(self):
        def letters(ms, keyed=True):
            out = []
            for letter, count in ms:
                text = f"{letter[0]}:{letter[1]}" if keyed else str(letter)
                out.append(text if count == 1 else f"{text}*{count}")
            return ", ".join(out)

        parts = [f"[{letters(self.zero)}]"]
        parts += [f"({letters(g)})" for g in self.frac]
        parts.append("{" + letters(self.beyond, keyed=False) + "}")
        return " | ".join(parts)


def make_word(K, zero=(), frac=(), beyond=()):
    """Build a canonical word from plain letter lists."""
    groups = tuple(_ms(g) for g in frac if g)
    return RegionWord(K, _ms(zero), tuple(g for g in groups if g), _ms(beyond))


def scaled_constants(protocol):
    """``(K, scale)`` of a parameter-free protocol with at most one clock."""
    if len(protocol.clocks) > 1:
        raise PTBPError("MULTI_CLOCK", f"{len(protocol.clocks)} clocks; region words need one")
    return max_constant(protocol)


def abstract(config, K, scale):
    """Region word of a configuration of one-clock (or clock-free) processes."""
    zero, beyond = [], []
    fracs = {}
    for loc, val in config.processes:
        if len(val) > 1:
            raise PTBPError("MULTI_CLOCK", "region words need one clock per process")
        v = val[0] * scale if val else Fraction(0)
        if v > K:
            beyond.append(loc)
            continue
        n = floor(v)
        f = v - n
        if f == 0:
            zero.append((loc, n))
        else:
            fracs.setdefault(f, []).append((loc, n))
    return make_word(K, zero, [fracs[f] for f in sorted(fracs)], beyond)


def initial_word(protocol, N, K):
    return make_word(K, [(protocol.init, 0)] * N)


def time_successor(w):
    """The region reached by letting the least amount of time pass."""
    if w.zero:
        inside = [(letter, c) for letter, c in w.zero if letter[1] < w.K]
        out = Counter(dict(w.beyond))
        for (loc, n), c in w.zero:
            if n >= w.K:
                out[loc] += c
        frac = ((tuple(inside),) if inside else ()) + w.frac
        return RegionWord(w.K, (), frac, _ms(out))
    if w.frac:
        top = w.frac[-1]
        zero = Counter()
        out = Counter(dict(w.beyond))
        for (loc, n), c in top:
            if n + 1 <= w.K:
                zero[(loc, n + 1)] += c
            else:
                out[loc] += c
        return RegionWord(w.K, _ms(zero), w.frac[:-1], _ms(out))
    return w


def time_successors(w):
    """All words reachable by letting time pass (including ``w``)."""
    seen = [w]
    while True:
        nxt = time_successor(seen[-1])
        if nxt == seen[-1]:
            return seen
        seen.append(nxt)


def region_sat(guard, kind, n, K):
    """Exact evaluation of a parameter-free guard on a region.

    ``kind`` is "zero" (value n), "frac" (value in (n, n+1)) or "beyond"
    (value > K).  Constants are scaled integers.
    """
    for atom in guard:
        c = atom.bound
        rel = atom.rel
        if kind == ZERO_REGION:
            ok = compare(n, rel, c)
        elif kind == FRAC_REGION:
            if rel in ("<", "<="):
                ok = n + 1 <= c
            elif rel in (">", ">="):
                ok = n >= c
            else:
                ok = False
        else:
            ok = rel in (">", ">=")
        if not ok:
            return False
    return True


class ScaledProtocol:
    """A parameter-free, at most one-clock protocol with integer constants."""

    def __init__(self, protocol):
        K, scale = scaled_constants(protocol)
        self.protocol = protocol
        self.K = K
        self.scale = scale
        self.clocked = bool(protocol.clocks)
        self.guards = [
            tuple(a.__class__(a.clock, a.rel, a.bound * scale) for a in e.guard) for e in protocol.edges
        ]
        self.actions = []
        self.recv_by_msg = {}
        for idx, e in enumerate(protocol.edges):
            if e.action.kind == "recv":
                self.recv_by_msg.setdefault(e.action.message, []).append(idx)
            else:
                self.actions.append(idx)
        self.recv_from = {}
        for idx, e in enumerate(protocol.edges):
            if e.action.kind == "recv":
                self.recv_from.setdefault((e.source, e.action.message), []).append(idx)

    def edge(self, idx):
        return self.protocol.edges[idx]

    def sat(self, idx, kind, n):
        return region_sat(self.guards[idx], kind, n, self.K)

    def resets(self, idx):
        return bool(self.edge(idx).reset)

    def regions(self):
        """All ``(kind, n)`` single-process regions: 2K+2 of them."""
        out = []
        for n in range(self.K + 1):
            out.append((ZERO_REGION, n))
            if n < self.K:
                out.append((FRAC_REGION, n))
        out.append((BEYOND_REGION, None))
        return out


def _as_scaled(protocol):
    return protocol if isinstance(protocol, ScaledProtocol) else ScaledProtocol(protocol)


class _Mutable:
    """Editable form of a word: zero Counter, list of frac Counters, beyond Counter."""

    def __init__(self, w):
        self.K = w.K
        self.zero = Counter(dict(w.zero))
        self.frac = [Counter(dict(g)) for g in w.frac]
        self.beyond = Counter(dict(w.beyond))

    def group(self, pos):
        if pos == ZERO_REGION:
            return self.zero
        if pos == BEYOND_REGION:
            return self.beyond
        return self.frac[pos]

    def freeze(self):
        frac = tuple(_ms(g) for g in self.frac)
        return RegionWord(self.K, _ms(self.zero), tuple(g for g in frac if g), _ms(self.beyond))

    def copy(self):
        other = _Mutable.__new__(_Mutable)
        other.K = self.K
        other.zero = Counter(self.zero)
        other.frac = [Counter(g) for g in self.frac]
        other.beyond = Counter(self.beyond)
        return other


def _occurrences(w):
    """Yield ``(position, letter, count, kind, n)`` for each distinct letter."""
    for letter, c in w.zero:
        yield ZERO_REGION, letter, c, ZERO_REGION, letter[1]
    for k, g in enumerate(w.frac):
        for letter, c in g:
            yield k, letter, c, FRAC_REGION, letter[1]
    for loc, c in w.beyond:
        yield BEYOND_REGION, loc, c, BEYOND_REGION, None


def _loc(pos, letter):
    return letter if pos == BEYOND_REGION else letter[0]


def _moved(pos, letter, target):
    return target if pos == BEYOND_REGION else (target, letter[1])


def _compositions(total, parts):
    """All tuples of ``parts`` naturals summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def discrete_successors(w, protocol, mode=Mode.RECONF):
    """Words reachable from ``w`` by one action (with zero delay)."""
    sp = _as_scaled(protocol)
    mode = Mode(mode)
    out = []
    seen = set()
    for pos, letter, _, kind, n in list(_occurrences(w)):
        loc = _loc(pos, letter)
        for idx, e in sp.protocol.outgoing.get(loc, ()):
            if e.action.kind == "recv" or not sp.sat(idx, kind, n):
                continue
            base = _Mutable(w)
            base.group(pos)[letter] -= 1
            if e.action.kind == "tau":
                results = [base]
            else:
                results = _receive(base, sp, e.action.message, mode)
            for m in results:
                if sp.resets(idx):
                    m.zero[(e.target, 0)] += 1
                else:
                    m.group(pos)[_moved(pos, letter, e.target)] += 1
                frozen = m.freeze()
                if frozen not in seen:
                    seen.add(frozen)
                    out.append(frozen)
    return out


def _receive(base, sp, message, mode):
    """Apply receptions of ``message`` to every way of choosing receivers."""
    slots = []
    for pos, letter, count, kind, n in _occurrences(base.freeze()):
        loc = _loc(pos, letter)
        opts = [i for i in sp.recv_from.get((loc, message), ()) if sp.sat(i, kind, n)]
        if opts:
            slots.append((pos, letter, count, kind, opts))
    # positions refer to the frozen word; frozen groups equal base groups
    # because base has no empty frac group except possibly the actor's
    frozen = base.freeze()
    results = []
    choices = []
    for pos, letter, count, kind, opts in slots:
        menu = []
        if mode == Mode.RECONF:
            for split in _compositions(count, len(opts) + 1):
                menu.append(split[1:])
        else:
            for split in _compositions(count, len(opts)):
                menu.append(split)
        choices.append(menu)
    for combo in product(*choices):
        m = _Mutable(frozen)
        for (pos, letter, _, _, opts), split in zip(slots, combo):
            for idx, k in zip(opts, split):
                if not k:
                    continue
                e = sp.edge(idx)
                m.group(pos)[letter] -= k
                if sp.resets(idx):
                    m.zero[(e.target, 0)] += k
                else:
                    m.group(pos)[_moved(pos, letter, e.target)] += k
        results.append(m)
    if not slots:
        results = [_Mutable(frozen)]
    return [_realign(r, base, frozen) for r in results]


def _realign(m, base, frozen):
    """Re-insert the (possibly emptied) actor group so positions match ``base``."""
    if len(base.frac) == len(frozen.frac):
        return m
    # the actor emptied a frac group; put an empty placeholder back
    out = m.copy()
    new_frac = []
    it = iter(out.frac)
    for g in base.frac:
        new_frac.append(next(it) if sum(g.values()) else Counter())
    out.frac = new_frac
    return out


def successors(w, protocol, mode=Mode.RECONF):
    """One abstract step: the time successor (if different) and the discrete ones."""
    out = []
    ts = time_successor(w)
    if ts != w:
        out.append(ts)
    return out + discrete_successors(w, protocol, mode)


# covering order ---------------------------------------------------------------


def _signature(w):
    """Letters with their group kind, ignoring counts and order."""
    return frozenset(
        [(ZERO_REGION, k) for k, _ in w.zero]
        + [(FRAC_REGION, k) for g in w.frac for k, _ in g]
        + [(BEYOND_REGION, k) for k, _ in w.beyond]
    )


def covers(a, b):
    """True iff ``b`` embeds into ``a`` (``a`` has at least ``b``'s content in
    the same relative order)."""
    if a.K != b.K:
        raise PTBPError("K_MISMATCH", f"{a.K} != {b.K}")
    if not _signature(b) <= _signature(a):
        return False
    return _embeds(a, b)


def _embeds(a, b):
    if not _leq(b.zero, a.zero) or not _leq(b.beyond, a.beyond):
        return False
    k = 0
    for g in b.frac:
        while k < len(a.frac) and not _leq(g, a.frac[k]):
            k += 1
        if k == len(a.frac):
            return False
        k += 1
    return True


# backward steps -----------------------------------------------------------------


def _sub_multisets(ms):
    ranges = [range(c + 1) for _, c in ms]
    for counts in product(*ranges):
        yield tuple((letter, c) for (letter, _), c in zip(ms, counts) if c)


def _minus(ms, sub):
    c = Counter(dict(ms))
    c.subtract(dict(sub))
    return _ms(c)


def pre_time(w):
    """Minimal words some time successor of which covers ``w``."""
    K = w.K
    if w.zero:
        if any(n < 1 for (_, n), _ in w.zero):
            return []
        top = _ms(Counter({(loc, n - 1): c for (loc, n), c in w.zero}))
        return [RegionWord(K, (), w.frac + (top,), w.beyond)]
    out = []
    for S in _sub_multisets(w.beyond):
        rest = _minus(w.beyond, S)
        atK = Counter({(loc, K): c for loc, c in S})
        if w.frac:
            z = Counter(dict(w.frac[0]))
            z.update(atK)
            out.append(RegionWord(K, _ms(z), w.frac[1:], rest))
        if S:
            out.append(RegionWord(K, _ms(atK), w.frac, rest))
    return out


def _placements(m, loc, sp, idx):
    """Every way of inserting one process at ``loc`` whose region satisfies
    the guard of edge ``idx``; yields mutable words."""
    K = m.K
    for n in range(K + 1):
        if sp.sat(idx, ZERO_REGION, n):
            c = m.copy()
            c.zero[(loc, n)] += 1
            yield c
    for n in range(K):
        if not sp.sat(idx, FRAC_REGION, n):
            continue
        for k in range(len(m.frac)):
            c = m.copy()
            c.frac[k][(loc, n)] += 1
            yield c
        for k in range(len(m.frac) + 1):
            c = m.copy()
            c.frac.insert(k, Counter({(loc, n): 1}))
            yield c
    if sp.sat(idx, BEYOND_REGION, None):
        c = m.copy()
        c.beyond[loc] += 1
        yield c


def _unplace_reset(m, target):
    """Remove one ``(target, 0)`` occurrence from zero, if present."""
    if m.zero[(target, 0)] <= 0:
        return None
    c = m.copy()
    c.zero[(target, 0)] -= 1
    return c


def pre_discrete(w, protocol, mode=Mode.RECONF):
    """Minimal words having a discrete successor covering ``w``
    (reconfigurable semantics)."""
    if Mode(mode) == Mode.CLIQUE:
        raise PTBPError("CLIQUE_UNSUPPORTED", "backward steps need the reconfigurable semantics")
    sp = _as_scaled(protocol)
    out = set()
    for idx in sp.actions:
        e = sp.edge(idx)
        for after_actor, pending, pinned in _rewind_actor(_Mutable(w), sp, idx):
            if e.action.kind == "send":
                states = _rewind_receivers(after_actor, sp, e.action.message)
            else:
                states = [(after_actor, [])]
            for m, inserts in states:
                if pinned is not None:
                    pos, letter = pinned
                    m.group(pos)[letter] += 1
                for final in _insert_all(m, pending + inserts, sp):
                    out.add(final.freeze())
    return sorted(out, key=_word_key)


def _rewind_actor(m, sp, idx):
    """Triples ``(word, pending, pinned)``: the word without the actor's
    result, its source either pending insertion anywhere the guard allows or
    pinned to the position of the result (a move without reset)."""
    e = sp.edge(idx)
    src = e.source
    yield m.copy(), [(src, idx)], None
    if sp.resets(idx):
        c = _unplace_reset(m, e.target)
        if c is not None:
            yield c, [(src, idx)], None
        return
    for pos, letter, _, kind, n in _mutable_occurrences(m):
        if _loc(pos, letter) != e.target or not sp.sat(idx, kind, n):
            continue
        c = m.copy()
        c.group(pos)[letter] -= 1
        yield c, [], (pos, _moved(pos, letter, src))


def _mutable_occurrences(m):
    """Like :func:`_occurrences` but on a mutable word, keeping its positions."""
    for letter, c in sorted(m.zero.items()):
        if c > 0:
            yield ZERO_REGION, letter, c, ZERO_REGION, letter[1]
    for k, g in enumerate(m.frac):
        for letter, c in sorted(g.items()):
            if c > 0:
                yield k, letter, c, FRAC_REGION, letter[1]
    for loc, c in sorted(m.beyond.items()):
        if c > 0:
            yield BEYOND_REGION, loc, c, BEYOND_REGION, None


def _rewind_receivers(m, sp, message):
    """Rewind any sub-multiset of occurrences that could result from a
    reception of ``message``; reset receptions become pending insertions."""
    slots = []
    for pos, letter, count, kind, n in _mutable_occurrences(m):
        loc = _loc(pos, letter)
        opts = []
        for idx in sp.recv_by_msg.get(message, ()):
            e = sp.edge(idx)
            if e.target != loc:
                continue
            if sp.resets(idx):
                if pos == ZERO_REGION and n == 0:
                    opts.append(idx)
            elif sp.sat(idx, kind, n):
                opts.append(idx)
        if opts:
            slots.append((pos, letter, count, opts))
    menus = []
    for pos, letter, count, opts in slots:
        menu = []
        for total in range(count + 1):
            for split in _compositions(total, len(opts)):
                menu.append(split)
        menus.append(menu)
    results = []
    for combo in product(*menus):
        c = m.copy()
        pending = []
        for (pos, letter, _, opts), split in zip(slots, combo):
            for idx, k in zip(opts, split):
                if not k:
                    continue
                e = sp.edge(idx)
                c.group(pos)[letter] -= k
                if sp.resets(idx):
                    pending += [(e.source, idx)] * k
                else:
                    c.group(pos)[_moved(pos, letter, e.source)] += k
        results.append((c, pending))
    return results


def _insert_all(m, pending, sp):
    """Insert every pending ``(location, edge)`` pre-state at all admissible
    positions; drops emptied groups at the end."""
    if not pending:
        yield m
        return
    (loc, idx), rest = pending[0], pending[1:]
    for placed in _placements(_squeeze(m), loc, sp, idx):
        yield from _insert_all(placed, rest, sp)


def _squeeze(m):
    c = m.copy()
    c.frac = [g for g in c.frac if sum(v for v in g.values() if v > 0)]
    c.zero = +c.zero
    c.beyond = +c.beyond
    c.frac = [+g for g in c.frac]
    return c


def _word_key(w):
    return (w.size, str(w))


# saturation -------------------------------------------------------------------


@dataclass
class CoverabilityResult:
    reachable: bool
    basis: list
    witness_word: RegionWord = None
    iterations: int = 0

    @property
    def witness_size(self):
        return self.witness_word.size if self.witness_word else None


def goal_words(sp, goal):
    """Minimal words with one process at ``goal``, one per region."""
    K = sp.K
    words = []
    for kind, n in sp.regions():
        if kind == ZERO_REGION:
            words.append(make_word(K, zero=[(goal, n)]))
        elif kind == FRAC_REGION:
            words.append(make_word(K, frac=[[(goal, n)]]))
        else:
            words.append(make_word(K, beyond=[goal]))
    return words


def _distance(w, init):
    """Best-first key: words with fewer non-initial letters are explored first."""
    other = w.size - dict(w.zero).get((init, 0), 0)
    return (other, w.size)


def _is_initial(w, init):
    return not w.frac and not w.beyond and all(letter == (init, 0) for letter, _ in w.zero)


def _support(w):
    """The set-word of ``w``: every letter once."""
    return RegionWord(
        w.K,
        tuple((k, 1) for k, _ in w.zero),
        tuple(tuple((k, 1) for k, _ in g) for g in w.frac),
        tuple((k, 1) for k, _ in w.beyond),
    )


def backward_coverability(protocol, goal, mode=Mode.RECONF, max_iterations=None, copycat=False):
    """Is some configuration with a process at ``goal`` reachable from an
    initial configuration of some size?  Reconfigurable semantics only.

    With ``copycat`` the basis is kept over set-words: a process can always be
    duplicated (the copy repeats its moves and broadcasts to nobody), so a
    word is coverable iff its support is.  The search is much smaller but the
    witness word then no longer bounds the network size.
    """
    if Mode(mode) == Mode.CLIQUE:
        raise PTBPError("CLIQUE_UNSUPPORTED", "backward coverability needs the reconfigurable semantics")
    sp = _as_scaled(protocol)
    init = sp.protocol.init
    if goal not in sp.protocol.locations:
        return CoverabilityResult(False, [])
    basis = {}
    work = []
    tick = 0
    for w in goal_words(sp, goal):
        if _is_initial(w, init):
            return CoverabilityResult(True, [w], w)
        basis[w] = _signature(w)
        heappush(work, (_distance(w, init), tick, w))
        tick += 1
    iterations = 0
    alive = set(basis)
    seen = set(basis)
    while work:
        _, _, w = heappop(work)
        if w not in alive:
            continue
        iterations += 1
        if max_iterations is not None and iterations > max_iterations:
            raise PTBPError("BUDGET_EXCEEDED", f"saturation stopped after {max_iterations} iterations")
        for p in pre_time(w) + pre_discrete(w, sp):
            if copycat:
                p = _support(p)
            if p in seen:
                continue
            seen.add(p)
            sig = _signature(p)
            if any(qs <= sig and _embeds(p, q) for q, qs in basis.items()):
                continue
            if _is_initial(p, init):
                basis = [q for q, qs in basis.items() if not (sig <= qs and _embeds(q, p))] + [p]
                return CoverabilityResult(True, basis, p, iterations)
            dropped = [q for q, qs in basis.items() if sig <= qs and _embeds(q, p)]
            for q in dropped:
                alive.discard(q)
                del basis[q]
            basis[p] = sig
            alive.add(p)
            heappush(work, (_distance(p, init), tick, p))
            tick += 1
    return CoverabilityResult(False, sorted(basis, key=_word_key), None, iterations)


def word_graph(protocol, N, mode=Mode.RECONF, limit=None):
    """Forward region-word graph at fixed size ``N``: ``(states, edges)``."""
    sp = _as_scaled(protocol)
    start = initial_word(sp.protocol, N, sp.K)
    states = {start: 0}
    order = [start]
    edges = set()
    k = 0
    while k < len(order):
        w = order[k]
        k += 1
        for nxt in successors(w, sp, mode):
            if nxt not in states:
                if limit is not None and len(states) >= limit:
                    raise PTBPError("BUDGET_EXCEEDED", f"more than {limit} region words")
                states[nxt] = len(order)
                order.append(nxt)
            edges.add((states[w], states[nxt]))
    return order, sorted(edges)

