from fractions import Fraction

import pytest

from ptbp.decide import ef_fixed_n
from ptbp.model import PTBPError, substitute
from ptbp.regions import (
    ScaledProtocol,
    abstract,
    backward_coverability,
    covers,
    discrete_successors,
    initial_word,
    make_word,
    pre_discrete,
    pre_time,
    successors,
    time_successor,
    time_successors,
    word_graph,
)
from ptbp.semantics import Configuration, Mode, replay
from ptbp.textio import parse_protocol

F = Fraction


@pytest.fixture
def concrete(factory):
    return substitute(factory, {"pt": 3, "tl": 9})


def test_abstract_example2_final(factory, example2):
    ex = replay(factory, example2.pval, example2.mode, example2.labels, example2.N)
    w = abstract(ex.final, 9, 1)
    assert w == make_word(9, zero=[("f", 0)], frac=[[("f", 1)], [("1", 8), ("q0", 8), ("g", 8)]])


def test_abstract_initial_and_beyond(factory):
    assert abstract(Configuration((("q0", (F(0),)),) * 3), 9, 1) == initial_word(factory, 3, 9)
    assert abstract(Configuration((("f", (F(19, 2),)),)), 9, 1) == make_word(9, beyond=["f"])


def test_abstract_rejects_two_clocks():
    with pytest.raises(PTBPError) as err:
        abstract(Configuration((("q", (F(0), F(1))),)), 3, 1)
    assert err.value.code == "MULTI_CLOCK"


def test_time_successor():
    assert time_successor(make_word(2, zero=[("q0", 0)])) == make_word(2, frac=[[("q0", 0)]])
    w = make_word(2, frac=[[("q0", 0)], [("f", 2)]])
    assert time_successor(w) == make_word(2, frac=[[("q0", 0)]], beyond=["f"])
    fixpoint = make_word(2, beyond=["f"])
    assert time_successor(fixpoint) == fixpoint


def test_time_successors_end_at_fixpoint():
    chain = time_successors(make_word(1, zero=[("q", 0)]))
    assert chain[-1] == make_word(1, beyond=["q"])
    assert len(chain) == 4


def test_single_process_region_count(concrete):
    assert len(ScaledProtocol(concrete).regions()) == 2 * 9 + 2


def test_discrete_successors_send_fact(concrete):
    w = make_word(9, zero=[("q0", 0), ("q0", 0)])
    succ = set(discrete_successors(w, concrete))
    assert make_word(9, zero=[("f", 0), ("q0", 0)]) in succ
    assert make_word(9, zero=[("f", 0), ("c", 0)]) in succ
    clique = set(discrete_successors(w, concrete, Mode.CLIQUE))
    assert clique == {make_word(9, zero=[("f", 0), ("c", 0)])}


def test_guard_against_fractional_region(concrete):
    w = make_word(9, frac=[[("f", 2)]])
    assert discrete_successors(w, concrete) == []


def test_covers():
    b = make_word(3, zero=[("a", 0)], frac=[[("c", 1)], [("f", 2)]])
    assert covers(b, b)
    bigger = make_word(3, zero=[("a", 0), ("q", 1)], frac=[[("c", 1)], [("f", 2)]], beyond=["g"])
    assert covers(bigger, b) and not covers(b, bigger)
    swapped = make_word(3, zero=[("a", 0)], frac=[[("f", 2)], [("c", 1)]])
    assert not covers(swapped, b)
    with pytest.raises(PTBPError):
        covers(make_word(2), make_word(3))


def test_pre_time_inverts_time_successor():
    words = [
        make_word(2, zero=[("a", 1)], frac=[[("b", 0)]]),
        make_word(2, frac=[[("a", 0)], [("b", 1)]]),
        make_word(2, frac=[[("a", 1)]], beyond=["b"]),
    ]
    for w in words:
        for p in pre_time(w):
            assert any(covers(s, w) for s in time_successors(p))


def test_pre_time_of_beyond_word():
    preds = pre_time(make_word(2, beyond=["f"]))
    assert make_word(2, zero=[("f", 2)]) in preds


def test_pre_discrete_rewinds_final_edge(concrete):
    w = make_word(9, frac=[[("g", 8)]])
    assert make_word(9, frac=[[("3", 8)]]) in pre_discrete(w, concrete)


def test_pre_discrete_adds_absent_sender(concrete):
    w = make_word(9, zero=[("c", 0)])
    preds = pre_discrete(w, concrete)
    assert make_word(9, zero=[("q0", 0), ("q0", 0)]) in preds


def test_pre_discrete_clique_unsupported(concrete):
    with pytest.raises(PTBPError) as err:
        pre_discrete(make_word(9), concrete, Mode.CLIQUE)
    assert err.value.code == "CLIQUE_UNSUPPORTED"


def test_backward_coverability_factory(factory):
    assert backward_coverability(substitute(factory, {"pt": 2, "tl": 3}), "g", copycat=True).reachable
    assert backward_coverability(substitute(factory, {"pt": 3, "tl": 9}), "g", copycat=True).reachable


def test_backward_coverability_negative():
    p = parse_protocol("protocol n\nclocks x\nmessages m\ninit q\nloc q a goal\nedge q -> a\nedge a -> goal do recv m\n")
    result = backward_coverability(p, "goal")
    assert not result.reachable
    assert not backward_coverability(p, "nowhere").reachable
    with pytest.raises(PTBPError):
        backward_coverability(p, "goal", Mode.CLIQUE)


def test_backward_witness_bounds_network_size():
    p = parse_protocol(
        "protocol w\nclocks x\nmessages m\ninit q\nloc q s a b goal\n"
        "edge q -> s do send m\nedge q -> a do recv m\nedge a -> b do recv m\nedge b -> goal\n"
    )
    result = backward_coverability(p, "goal")
    assert result.reachable
    assert ef_fixed_n(p, "goal", Mode.RECONF, result.witness_size).found


def test_word_graph_counts(concrete):
    states, edges = word_graph(concrete, 1)
    assert len(states) == 40 and len(edges) == 72
    with pytest.raises(PTBPError):
        word_graph(concrete, 3, limit=10)


def test_successors_include_time_and_actions(concrete):
    w = initial_word(concrete, 1, 9)
    succ = successors(w, concrete)
    assert make_word(9, frac=[[("q0", 0)]]) in succ
    assert make_word(9, zero=[("f", 0)]) in succ
