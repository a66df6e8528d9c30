from fractions import Fraction

import pytest

from ptbp.model import ParamBound
from ptbp.semantics import TransitionLabel
from ptbp.textio import (
    ParseFailure,
    parse_machine,
    parse_protocol,
    parse_pval,
    parse_rational,
    parse_trace,
    serialize_machine,
    serialize_protocol,
    serialize_trace,
)

from conftest import FIXTURES


def codes(text, parser=parse_protocol):
    with pytest.raises(ParseFailure) as err:
        parser(text)
    return [e.code for e in err.value.errors]


def test_factory_shape(factory):
    assert len(factory.locations) == 7
    assert factory.clocks == ("x",)
    assert factory.messages == ("fact", "p")
    assert factory.params == ("pt", "tl")
    assert factory.bound("tl") == ParamBound(0, 20, True, True)


def test_round_trip(factory):
    text = serialize_protocol(factory)
    assert parse_protocol(text) == factory
    assert serialize_protocol(parse_protocol(text)) == text


def test_rationals_are_kept_exact():
    p = parse_protocol("protocol r\nclocks x\ninit q\nloc q a\nedge q -> a when x<=0.5, x>1/4\n")
    assert [a.bound for a in p.edges[0].guard] == [Fraction(1, 2), Fraction(1, 4)]
    assert "x<=1/2" in serialize_protocol(p)


def test_unbounded_keyword():
    p = parse_protocol("protocol u\nclocks x\nparams a\nbound a in [0,inf)\ninit q\nloc q r\nedge q -> r when x<a\n")
    assert p.bound("a") == ParamBound()
    assert "bound a unbounded" in serialize_protocol(p)


def test_empty_file():
    assert codes("") == ["MISSING_HEADER"]


def test_empty_bound_interval():
    text = "protocol b\nclocks x\nparams pt\nbound pt in (3,3]\ninit q\nloc q\n"
    assert codes(text) == ["BAD_BOUND"]


def test_errors_collected_in_one_pass():
    text = "protocol e\nclocks x\ninit q\nloc q\nedge q -> nowhere do send m\nedge q -> q when x<1/0\n"
    got = codes(text)
    assert "BAD_RATIONAL" in got and "UNDECLARED_IDENT" in got


def test_error_spans_point_inside_input():
    text = "protocol e\nclocks x\ninit q\nloc q\nedge q -> r\n"
    with pytest.raises(ParseFailure) as err:
        parse_protocol(text, "e.ptbp")
    (error,) = err.value.errors
    assert error.span.file == "e.ptbp" and 1 <= error.span.line <= 5


def test_parse_rational():
    assert parse_rational("19/2") == Fraction(19, 2)
    assert parse_rational("8.5") == Fraction(17, 2)
    assert parse_rational("1/0") is None
    assert parse_rational("abc") is None


def test_parse_pval():
    assert parse_pval("pt=3,tl=19/2") == {"pt": 3, "tl": Fraction(19, 2)}
    assert parse_pval("pt=3 tl=9") == {"pt": 3, "tl": 9}


MACHINE = """\
k0: inc c1 goto k1
k1: ifz c1 goto kz else kn
kn: dec c1 goto k1
kz: ifz c2 goto kacc else kacc
init k0
accept kacc
"""


def test_machine_round_trip():
    m = parse_machine(MACHINE)
    assert len(m.program) == 4 and m.init == "k0" and m.accept == "kacc"
    assert parse_machine(serialize_machine(m)) == m


def test_machine_errors():
    assert codes("k0: inc c3 goto k1\naccept k1\n", parse_machine) == ["BAD_COUNTER"]
    assert codes("k0: inc c1 goto k1\n", parse_machine) == ["MISSING_ACCEPT"]
    assert codes("k0: inc c1 goto k9\naccept k1\n", parse_machine) == ["DANGLING_LABEL"]


def test_trace_round_trip(example2):
    text = serialize_trace(example2.N, example2.mode, example2.pval, example2.labels)
    again = parse_trace(text)
    assert again == example2
    assert example2.labels[1] == TransitionLabel(Fraction(41, 10), 2, 1, frozenset({3, 5}))


def test_trace_with_choices():
    label = TransitionLabel(Fraction(1, 3), 1, 2, frozenset({2, 3}), ((2, 4),))
    text = serialize_trace(3, "clique", {}, [label])
    assert "choices 2:4" in text
    assert parse_trace(text).labels == (label,)


def test_bundled_fixtures_parse():
    for path in sorted(FIXTURES.rglob("*.ptbp")):
        parse_protocol(path.read_text(), path.name)
    for path in sorted(FIXTURES.rglob("*.2cm")):
        parse_machine(path.read_text(), path.name)
