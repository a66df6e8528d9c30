"""Independent brute-force oracles used by the test-suite.

They share no code with the decision procedures: runs are explored on a
digital clock grid, so every run they find is a genuine run of the network
(the oracles may miss runs needing finer timing, never invent one).
"""

from fractions import Fraction
from itertools import combinations, product

import networkx as nx

from ptbp.model import compare


def _max_constant(protocol, pval):
    consts = [Fraction(0)]
    for e in protocol.edges:
        for a in e.guard:
            consts.append(Fraction(pval[a.bound]) if isinstance(a.bound, str) else Fraction(a.bound))
    return max(consts)


def _guard_ok(edge, value, pval):
    for a in edge.guard:
        bound = Fraction(pval[a.bound]) if isinstance(a.bound, str) else a.bound
        if not compare(value, a.rel, bound):
            return False
    return True


def digital_reach(protocol, pval, goal, N, tick=Fraction(1, 8), mode="reconf", max_states=200000):
    """Search a one-clock network of size ``N`` whose delays are multiples of
    ``tick``; clock values above the largest constant are merged."""
    pval = {k: Fraction(v) for k, v in pval.items()}
    cap = _max_constant(protocol, pval) + tick
    start = tuple(sorted([(protocol.init, Fraction(0))] * N))
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for state in frontier:
            if any(loc == goal for loc, _ in state):
                return True
            for succ in _successors(protocol, state, pval, tick, cap, mode):
                if succ not in seen:
                    seen.add(succ)
                    nxt.append(succ)
                    if len(seen) > max_states:
                        raise RuntimeError("oracle budget exceeded")
        frontier = nxt
    return False


def _successors(protocol, state, pval, tick, cap, mode):
    yield tuple(sorted((loc, min(x + tick, cap)) for loc, x in state))
    done = set()
    for i, (loc, x) in enumerate(state):
        if (loc, x) in done:
            continue
        done.add((loc, x))
        for edge in protocol.edges:
            if edge.source != loc or edge.action.kind == "recv" or not _guard_ok(edge, x, pval):
                continue
            me = (edge.target, Fraction(0) if edge.reset else x)
            others = list(state[:i] + state[i + 1:])
            if edge.action.kind != "send":
                yield tuple(sorted(others + [me]))
                continue
            options = []
            for loc2, x2 in others:
                opts = [
                    (e.target, Fraction(0) if e.reset else x2)
                    for e in protocol.edges
                    if e.source == loc2 and e.action.kind == "recv"
                    and e.action.message == edge.action.message and _guard_ok(e, x2, pval)
                ]
                options.append([(loc2, x2)] + opts if mode == "reconf" else (opts or [(loc2, x2)]))
            for pick in product(*options):
                yield tuple(sorted(list(pick) + [me]))


def af_holds_brute(protocol, goal, N=1):
    """AF for a clock-free, parameter-free protocol by graph search: every
    maximal path of the size-``N`` reconfigurable network reaches ``goal``."""
    graph = nx.DiGraph()
    start = tuple([protocol.init] * N)
    stack = [start]
    graph.add_node(start)
    while stack:
        state = stack.pop()
        if goal in state:
            continue
        for succ in _discrete_successors(protocol, state):
            if succ not in graph:
                stack.append(succ)
            graph.add_edge(state, succ)
    bad = [s for s in graph if goal not in s]
    sub = graph.subgraph(bad)
    if any(graph.out_degree(s) == 0 for s in bad):
        return False
    return nx.is_directed_acyclic_graph(sub)


def _discrete_successors(protocol, state):
    for i, loc in enumerate(state):
        for edge in protocol.edges:
            if edge.source != loc or edge.action.kind == "recv":
                continue
            if edge.action.kind != "send":
                yield state[:i] + (edge.target,) + state[i + 1:]
                continue
            others = [j for j in range(len(state)) if j != i]
            for k in range(len(others) + 1):
                for group in combinations(others, k):
                    choices = []
                    for j in group:
                        choices.append(
                            [e.target for e in protocol.edges
                             if e.source == state[j] and e.action.kind == "recv"
                             and e.action.message == edge.action.message] or [state[j]]
                        )
                    for pick in product(*choices):
                        new = list(state)
                        new[i] = edge.target
                        for j, t in zip(group, pick):
                            new[j] = t
                        yield tuple(new)
