from fractions import Fraction

import pytest

from ptbp.model import PTBPError, substitute
from ptbp.semantics import (
    Configuration,
    Flag,
    Mode,
    RegionBoundaries,
    ReplayError,
    TransitionLabel,
    enabled_labels,
    guard_sat,
    initial_config,
    is_terminal,
    reaches,
    replay,
    replay_under,
    simulate,
    step,
)
from ptbp.textio import parse_protocol

F = Fraction
PVAL = {"pt": 3, "tl": 9}


def conf(*procs):
    return Configuration(tuple((loc, (F(x),)) for loc, x in procs))


def test_initial_config(factory):
    c = initial_config(factory, 5)
    assert c.processes == (("q0", (F(0),)),) * 5
    with pytest.raises(PTBPError):
        initial_config(factory, 0)


def test_initial_config_without_clocks():
    p = parse_protocol("protocol z\ninit q\nloc q\n")
    assert initial_config(p, 3).processes == (("q", ()),) * 3


def test_guard_sat(factory):
    (tl_atom,) = factory.edges[5].guard
    assert guard_sat({"x": F(17, 2)}, [tl_atom], {"tl": 9})
    assert guard_sat({"x": F(0)}, [], {})
    (pt_atom,) = factory.edges[6].guard
    assert guard_sat({"x": F(3)}, [pt_atom], {"pt": 3})
    assert not guard_sat({"x": F(3)}, [pt_atom], {"pt": F(3001, 1000)})


def test_example2_first_steps(factory):
    c = initial_config(factory, 5)
    c = step(factory, c, TransitionLabel(F(1, 10), 1, 1), PVAL)
    assert c == conf(("f", 0), *[("q0", F(1, 10))] * 4)
    c = step(factory, c, TransitionLabel(F(41, 10), 2, 1, frozenset({3, 5})), PVAL)
    assert c.processes[2] == ("c", (F(21, 5),)) and c.processes[4] == ("c", (F(21, 5),))
    assert c.processes[3] == ("q0", (F(21, 5),))


def test_non_blocking_receiver_unchanged(factory):
    c = conf(("f", 3), ("g", 1))
    after = step(factory, c, TransitionLabel(F(0), 1, 6, frozenset({2})), PVAL)
    assert after.processes[1] == ("g", (F(1),))


def test_step_errors(factory):
    c = initial_config(factory, 2)
    with pytest.raises(PTBPError) as err:
        step(factory, c, TransitionLabel(F(0), 1, 6), PVAL)
    assert err.value.code == "BAD_ACTOR_EDGE"
    with pytest.raises(PTBPError) as err:
        step(factory, conf(("f", 0), ("q0", 0)), TransitionLabel(F(1), 1, 6), PVAL)
    assert err.value.code == "GUARD_VIOLATION"
    with pytest.raises(PTBPError) as err:
        step(factory, c, TransitionLabel(F(0), 1, 1, frozenset()), PVAL, Mode.CLIQUE)
    assert err.value.code == "CLIQUE_RECEIVER_SET"
    with pytest.raises(PTBPError) as err:
        step(factory, c, TransitionLabel(F(0), 1, 0), PVAL)
    assert err.value.code == "BAD_ACTOR_EDGE"


def test_actor_is_not_its_own_receiver(factory):
    after = step(factory, initial_config(factory, 1), TransitionLabel(F(0), 1, 1, frozenset({1})), PVAL)
    assert after.processes == (("f", (F(0),)),)


def test_enabled_labels(factory):
    labels = enabled_labels(factory, initial_config(factory, 1), PVAL)
    assert TransitionLabel(F(0), 1, 1, frozenset()) in labels
    at_f = conf(("f", 0))
    delays = sorted(l.delay for l in enabled_labels(factory, at_f, PVAL) if l.edge == 6)
    assert delays[0] == 3
    stuck = conf(("g", 0))
    assert enabled_labels(factory, stuck, PVAL) == []


def test_enabled_labels_with_explicit_menu(factory):
    labels = enabled_labels(factory, conf(("f", 0)), PVAL, delays=[1, 3, 5])
    assert sorted(l.delay for l in labels) == [3, 5]
    horizon = enabled_labels(factory, conf(("f", 0)), PVAL, delays=RegionBoundaries(horizon=2))
    assert horizon == []


def test_is_terminal(factory):
    p = parse_protocol("protocol t\nclocks x\ninit q\nloc q a\nedge q -> a when x<1\n")
    assert is_terminal(p, conf(("a", 0)), {})
    assert not is_terminal(factory, conf(("f", 0)), PVAL)
    assert is_terminal(p, conf(("q", 2)), {})


def test_replay_example2(factory, example2):
    ex = replay(factory, example2.pval, example2.mode, example2.labels, example2.N)
    assert reaches(ex, "g")
    assert ex.final.processes[4] == ("g", (F(17, 2),))
    assert ex.duration == F(17, 2)


def test_replay_example2_under_clique_fails(factory, example2):
    with pytest.raises(ReplayError) as err:
        replay(factory, example2.pval, Mode.CLIQUE, example2.labels, example2.N)
    assert err.value.step_index == 1


def test_replay_under(factory, example2):
    ex = replay(factory, example2.pval, example2.mode, example2.labels, example2.N)
    assert reaches(replay_under(ex, {"pt": 2, "tl": 10}), "g")
    assert replay_under(ex, PVAL).configs == ex.configs
    with pytest.raises(ReplayError) as err:
        replay_under(ex, {"pt": 5, "tl": 9})
    assert err.value.step_index == 4


def test_empty_replay_is_truncated(factory):
    ex = replay(factory, PVAL, Mode.RECONF, [], 2)
    assert ex.steps == () and ex.flag == Flag.TRUNCATED
    assert reaches(ex, "q0")


def test_reaches_undeclared_goal_warns(factory, example2):
    ex = replay(factory, example2.pval, example2.mode, example2.labels, example2.N)
    with pytest.warns(UserWarning):
        assert not reaches(ex, "error")


def test_simulate_is_deterministic(factory):
    a = simulate(factory, PVAL, Mode.RECONF, 3, 30, seed=42)
    b = simulate(factory, PVAL, Mode.RECONF, 3, 30, seed=42)
    assert a == b


def test_simulate_terminal_start():
    p = parse_protocol("protocol t\nclocks x\ninit q\nloc q\n")
    ex = simulate(p, {}, Mode.RECONF, 2, 10)
    assert ex.steps == () and ex.flag == Flag.TERMINAL


def test_clique_single_process_never_reaches_g(factory):
    ex = simulate(factory, PVAL, Mode.CLIQUE, 1, 2000, seed=3)
    assert not reaches(ex, "g")


def test_time_uniformity_and_size(factory):
    ex = simulate(factory, PVAL, Mode.RECONF, 4, 40, seed=7)
    prev = ex.initial
    for label, after in ex.steps:
        assert after.N == 4
        edge = factory.edges[label.edge]
        for j, ((_, before), (_, now)) in enumerate(zip(prev.processes, after.processes), start=1):
            reset = now == (F(0),) and (j == label.actor and edge.reset or j in label.receivers)
            assert reset or now[0] == before[0] + label.delay
        prev = after


def test_clique_labels_are_reconfigurable_labels(factory):
    ex = simulate(factory, {"pt": 2, "tl": 9}, Mode.CLIQUE, 3, 30, seed=1)
    assert replay(factory, ex.pval, Mode.RECONF, ex.labels, 3).configs == ex.configs


def test_clique_reception_can_break_identical_replay():
    # under the looser valuation process 2 must also receive m, after which it
    # cannot repeat the send it made under the original valuation
    p = parse_protocol(
        "protocol c\nclocks x\nmessages m\nparams hi\ninit q0\nloc q0 a b\n"
        "edge q0 -> a do send m\nedge q0 -> b when x<=hi do recv m\n"
    )
    everyone = frozenset({1, 2})
    labels = [TransitionLabel(F(1), 1, 0, everyone), TransitionLabel(F(0), 2, 0, everyone)]
    ex = replay(p, {"hi": 0}, Mode.CLIQUE, labels, 2)
    with pytest.raises(ReplayError):
        replay_under(ex, {"hi": 2})
    quiet = [TransitionLabel(label.delay, label.actor, label.edge) for label in labels]
    assert reaches(replay_under(replay(p, {"hi": 0}, Mode.RECONF, quiet, 2), {"hi": 2}), "a")
