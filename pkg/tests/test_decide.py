import random
from dataclasses import replace
from fractions import Fraction

import pytest

from oracles import af_holds_brute
from ptbp.decide import (
    CITATIONS,
    Kind,
    ProblemSpec,
    Status,
    Verdict,
    Witness,
    af_concrete,
    af_counterexample,
    ef_clique_semi,
    ef_existence_lu,
    ef_fixed_n,
    ef_reconf_decide,
    ef_universality_lu,
    min_message_count,
    route,
    solve,
    witness_valuation,
)
from ptbp.model import ParamBound, PTBPError, build_n_max, substitute
from ptbp.semantics import Mode, reaches, replay
from ptbp.textio import parse_protocol

F = Fraction
B = ParamBound


def at(factory, pt, tl):
    return substitute(factory, {"pt": pt, "tl": tl})


def bounded(factory, pt, tl):
    return replace(factory, bounds={"pt": pt, "tl": tl})


def replays_to(protocol, goal, witness):
    return reaches(replay(protocol, witness.pval, witness.mode, witness.trace, witness.N), goal)


# fixed size ------------------------------------------------------------------------


def test_ef_fixed_n_clique_examples(factory):
    assert not ef_fixed_n(at(factory, 3, 9), "g", Mode.CLIQUE, 4).found
    found = ef_fixed_n(at(factory, 2, 9), "g", Mode.CLIQUE, 2)
    assert found.found
    assert reaches(replay(at(factory, 2, 9), {}, Mode.CLIQUE, found.trace, 2), "g")


def test_ef_fixed_n_goal_is_init(factory):
    for N in (1, 2, 3):
        assert ef_fixed_n(at(factory, 3, 9), "q0", Mode.RECONF, N).found


def test_ef_fixed_n_errors(factory):
    with pytest.raises(PTBPError) as err:
        ef_fixed_n(factory, "g", Mode.RECONF, 2)
    assert err.value.code == "NOT_PARAMETER_FREE"
    two = parse_protocol("protocol t\nclocks x y\ninit q\nloc q\n")
    with pytest.raises(PTBPError) as err:
        ef_fixed_n(two, "q", Mode.RECONF, 1)
    assert err.value.code == "MULTI_CLOCK"
    with pytest.raises(PTBPError) as err:
        ef_fixed_n(at(factory, 3, 9), "g", Mode.RECONF, 4, max_states=5)
    assert err.value.code == "BUDGET_EXCEEDED"


def test_ef_fixed_n_zero_clocks():
    p = parse_protocol("protocol z\nmessages m\ninit q\nloc q s r\nedge q -> s do send m\nedge q -> r do recv m\n")
    assert not ef_fixed_n(p, "r", Mode.RECONF, 1).found
    assert ef_fixed_n(p, "r", Mode.RECONF, 2).found


def test_min_message_count(factory):
    result = min_message_count(at(factory, 2, 9), "g", Mode.RECONF, 2, "p")
    assert result.found and result.cost == 3
    none = min_message_count(at(factory, 3, 9), "g", Mode.RECONF, 2, "p")
    assert not none.found


# reconfigurable decision -----------------------------------------------------------


def test_ef_reconf_decide_factory(factory):
    dec = ef_reconf_decide(at(factory, 3, 9), "g")
    assert dec.answer and dec.N == 3
    assert reaches(replay(at(factory, 3, 9), {}, Mode.RECONF, dec.trace, dec.N), "g")


def test_ef_reconf_decide_negatives():
    behind = parse_protocol("protocol b\nclocks x\ninit q\nloc q goal\nedge q -> goal when x<0\n")
    assert not ef_reconf_decide(behind, "goal").answer
    silent = parse_protocol("protocol s\nclocks x\nmessages m\ninit q\nloc q goal\nedge q -> goal do recv m\n")
    assert not ef_reconf_decide(silent, "goal").answer


def test_ef_reconf_decide_needs_backward_search():
    # four receptions of m by one process need five network members: past the
    # forward probe, so the answer comes from saturation
    lines = ["protocol deep", "clocks x", "messages m", "init q", "loc q s a1 a2 a3 goal"]
    lines += ["edge q -> s do send m", "edge q -> a1 do recv m", "edge a1 -> a2 do recv m"]
    lines += ["edge a2 -> a3 do recv m", "edge a3 -> goal do recv m"]
    p = parse_protocol("\n".join(lines) + "\n")
    dec = ef_reconf_decide(p, "goal", probe=2)
    assert dec.answer and dec.N == 5
    assert reaches(replay(p, {}, Mode.RECONF, dec.trace, dec.N), "goal")


def test_ef_clique_semi(factory):
    v = ef_clique_semi(at(factory, 2, 9), "g", 4)
    assert v.status == Status.SEMIDECIDED and v.witness.N == 2
    v = ef_clique_semi(at(factory, 3, 9), "g", 8)
    assert v.status == Status.INCONCLUSIVE and v.explored_up_to == 8
    assert v.headline() == "INCONCLUSIVE (N<=8)"
    v = ef_clique_semi(at(factory, 3, 9), "q0", 1)
    assert v.status == Status.SEMIDECIDED and v.witness.N == 1


# L/U reductions --------------------------------------------------------------------


def test_ef_existence_lu_clique_open_tl(factory):
    p = bounded(factory, B(2, 2, True, True), B(0, 10, False, False))
    v = ef_existence_lu(p, "g", Mode.CLIQUE)
    assert v.status == Status.SEMIDECIDED and v.citation == "LEM6"
    assert v.witness.pval["pt"] == 2
    assert 6 < v.witness.pval["tl"] < 10
    assert replays_to(p, "g", v.witness)


def test_ef_existence_lu_point(factory):
    p = bounded(factory, B(3, 3, True, True), B(9, 9, True, True))
    v = ef_existence_lu(p, "g", Mode.RECONF)
    assert v.status == Status.DECIDED and v.answer
    assert v.witness.pval == {"pt": 3, "tl": 9}


def test_ef_existence_lu_parameter_free(factory):
    v = ef_existence_lu(at(factory, 2, 3), "g", Mode.RECONF)
    assert v.answer and v.witness.pval == {}


def test_ef_existence_lu_errors(factory):
    with pytest.raises(PTBPError) as err:
        ef_existence_lu(bounded(factory, B(0, 1, True, True), B()), "g")
    assert err.value.code == "UNBOUNDED_PARAM"


def test_witness_valuation_recipe(factory):
    p = bounded(factory, B(2, 2, True, True), B(0, 20, False, True))
    nmax = build_n_max(p)
    found = ef_fixed_n(nmax, "g", Mode.CLIQUE, 2)
    assert witness_valuation(p, found.trace, 2, Mode.CLIQUE) == {"pt": 2, "tl": 20}
    p = bounded(factory, B(2, 2, True, True), B(0, 20, True, False))
    found = ef_fixed_n(build_n_max(p), "g", Mode.CLIQUE, 2)
    assert witness_valuation(p, found.trace, 2, Mode.CLIQUE) == {"pt": 2, "tl": 13}


def test_witness_valuation_without_parameters():
    p = parse_protocol("protocol e\nclocks x\ninit q\nloc q a\nedge q -> a\n")
    assert witness_valuation(p, [], 1) == {}


def test_ef_universality_lu(factory):
    yes = ef_universality_lu(bounded(factory, B(2, 2, True, True), B(9, 9, True, True)), "g")
    assert yes.status == Status.DECIDED and yes.answer and yes.witness.N == 2
    no = ef_universality_lu(factory, "g")
    assert no.status == Status.DECIDED and no.answer is False
    with pytest.raises(PTBPError) as err:
        ef_universality_lu(bounded(factory, B(2, 2, True, True), B(0, 9, False, True)), "g")
    assert err.value.code == "NOT_CLOSED_BOUNDED"


# AF --------------------------------------------------------------------------------


def test_af_factory_has_p_loop(factory):
    assert af_concrete(factory, {"pt": 3, "tl": 9}, "g") is False
    lasso = af_counterexample(factory, {"pt": 3, "tl": 9}, "g")
    assert lasso.cycle and all(factory.edges[e].source == "f" for e in lasso.cycle_edges)


def test_af_trivial_cases():
    same = parse_protocol("protocol s\nclocks x\ninit goal\nloc goal\n")
    assert af_concrete(same, {}, "goal")
    forced = parse_protocol("protocol f\nclocks x\ninit q\nloc q goal\nedge q -> goal when x=0\n")
    assert af_concrete(forced, {}, "goal")
    late = parse_protocol("protocol l\nclocks x\ninit q\nloc q goal\nedge q -> goal when x=0\nedge q -> q when x>1\n")
    assert af_concrete(late, {}, "goal") is False


def test_af_dead_end():
    p = parse_protocol("protocol d\nclocks x\ninit q\nloc q a goal\nedge q -> a\nedge q -> goal\n")
    lasso = af_counterexample(p, {}, "goal")
    assert lasso.dead_end is not None and lasso.dead_end[0] == "a"


def test_af_clique_refused(factory):
    with pytest.raises(PTBPError) as err:
        af_concrete(factory, {"pt": 3, "tl": 9}, "g", Mode.CLIQUE)
    assert err.value.code == "CLIQUE_UNSUPPORTED"


def random_untimed(rng):
    n = rng.randint(2, 5)
    locs = [f"l{k}" for k in range(n)] + ["goal"]
    lines = ["protocol r", "clocks x", "messages m", "init l0", "loc " + " ".join(locs)]
    for _ in range(rng.randint(1, 7)):
        action = rng.choice(["tau", "send m", "recv m"])
        lines.append(f"edge {rng.choice(locs[:-1])} -> {rng.choice(locs)} do {action}")
    return parse_protocol("\n".join(lines) + "\n")


def test_af_against_graph_oracle():
    rng = random.Random(7)
    for _ in range(300):
        p = random_untimed(rng)
        assert af_concrete(p, {}, "goal") == af_holds_brute(p, "goal"), p


# routing ---------------------------------------------------------------------------


def test_route_examples(factory):
    assert route(ProblemSpec(factory, "g", Mode.RECONF, Kind.EF_UNIVERSALITY)) == ("ef_universality_lu", "LEM5")
    general = parse_protocol("protocol g\nclocks x\nparams p\ninit q\nloc q r\nedge q -> r when x<p\nedge r -> q when x>p\n")
    assert route(ProblemSpec(general, "r", Mode.RECONF, Kind.EF_EXISTENCE)) == ("unsupported", "THM3")
    open_tl = bounded(factory, B(0, 10, True, True), B(0, 20, False, False))
    assert route(ProblemSpec(open_tl, "g", Mode.CLIQUE, Kind.EF_UNIVERSALITY)) == ("unsupported", "THM5")


def test_solve_never_raises(factory):
    v = solve(ProblemSpec(factory, "nowhere", Mode.RECONF, Kind.EF_EXISTENCE))
    assert v.status == Status.UNSUPPORTED and v.citation == "UNKNOWN_GOAL"


def test_solve_point_problem(factory):
    v = solve(ProblemSpec(factory, "g", Mode.RECONF, Kind.EF_EXISTENCE, pval={"pt": 2, "tl": 3}))
    assert v.status == Status.DECIDED and v.answer and v.citation == "THM2"
    assert replays_to(factory, "g", v.witness)
    v = solve(ProblemSpec(factory, "g", Mode.RECONF, Kind.AF_EXISTENCE, pval={"pt": 3, "tl": 9}))
    assert v.status == Status.DECIDED and v.answer is False and v.counterexample is not None


def test_citations_cover_routes():
    assert {"THM1", "THM2", "THM3", "THM4", "THM5", "LEM1", "LEM3", "LEM5", "LEM6", "LEM7"} <= set(CITATIONS)
    assert "OPEN_PROBLEM" in CITATIONS and "OUT_OF_SCOPE" in CITATIONS


def test_headlines():
    w = Witness(3, {}, (), Mode.RECONF)
    assert Verdict(Status.DECIDED, True, w).headline() == "DECIDED YES"
    assert Verdict(Status.DECIDED, False).headline() == "DECIDED NO"
    assert Verdict(Status.SEMIDECIDED, True, w).headline() == "SEMIDECIDED YES (N=3)"
    assert Verdict(Status.UNSUPPORTED, citation="THM4").headline() == "UNSUPPORTED (THM4)"
