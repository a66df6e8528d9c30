"""A tour of the factory protocol: one process turns into a factory that
keeps broadcasting ``p`` every ``pt`` time units, the others turn into
clients that must hear three ``p`` before their deadline ``tl``.

Run with ``python3 demos/factory_walkthrough.py``.
"""

from dataclasses import replace
from pathlib import Path

from ptbp.decide import Kind, ProblemSpec, af_counterexample, solve
from ptbp.model import ParamBound, classify, format_rational
from ptbp.semantics import Mode, reaches, replay
from ptbp.textio import parse_protocol, parse_trace

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "ptbp" / "fixtures"

factory = parse_protocol((FIXTURES / "factory.ptbp").read_text(), "factory.ptbp")
info = classify(factory)
print(f"{factory.name}: {len(factory.locations)} locations, fragment {info.fragment.value}, {info.boundedness.value}")

# The hand-written run from the fixtures: three processes, pt=3, tl=9.
tf = parse_trace((FIXTURES / "example2.trace").read_text())
ex = replay(factory, tf.pval, Mode.RECONF, tf.labels, tf.N)
print("\nreplaying example2.trace:")
for label, conf in ex.steps:
    edge = factory.edges[label.edge]
    heard = ",".join(str(r) for r in sorted(label.receivers)) or "-"
    print(f"  wait {format_rational(label.delay):>5}, process {label.actor} takes {edge.source}->{edge.target}"
          f" (receivers {heard}):  {conf}")
print("client reaches g:", reaches(ex, "g"))

# The same valuation, but asked as a question.
for mode in (Mode.RECONF, Mode.CLIQUE):
    verdict = solve(ProblemSpec(factory, "g", mode, Kind.EF_EXISTENCE, n_max=4, pval={"pt": 3, "tl": 9}))
    print(f"\nEF g with pt=3, tl=9 under {mode.value}: {verdict.headline()}")

# Over the whole bounded box, is g reachable for every valuation?  No:
# pt=10, tl=0 leaves no time at all.
verdict = solve(ProblemSpec(factory, "g", Mode.RECONF, Kind.EF_UNIVERSALITY))
print(f"\nEF g for every valuation: {verdict.headline()}  [{verdict.citation}]")

# Tighten the box so that every valuation works.
narrow = replace(factory, bounds={"pt": ParamBound(1, 2, True, True), "tl": ParamBound(9, 12, True, True)})
verdict = solve(ProblemSpec(narrow, "g", Mode.RECONF, Kind.EF_UNIVERSALITY))
print(f"with pt in [1,2], tl in [9,12]: {verdict.headline()}")

# AF fails: the factory can loop on its own forever.
lasso = af_counterexample(factory, {"pt": 3, "tl": 9}, "g")
print("\nAF g fails; the loop never leaves", sorted({s[0] for s in lasso.cycle}))
