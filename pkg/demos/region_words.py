"""Region words for the factory protocol with pt=3 and tl=9.

A region word forgets exact clock values but keeps the integer parts and the
order of the fractional parts.  Forward, the word graph for a fixed network
size is finite; backward, coverability of ``g`` is computed once for all
sizes.
"""

from pathlib import Path

from ptbp.decide import ef_reconf_decide
from ptbp.model import substitute
from ptbp.regions import ScaledProtocol, abstract, backward_coverability, initial_word, time_successors, word_graph
from ptbp.semantics import Mode, replay
from ptbp.textio import parse_protocol, parse_trace

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "ptbp" / "fixtures"

factory = parse_protocol((FIXTURES / "factory.ptbp").read_text())
concrete = substitute(factory, {"pt": 3, "tl": 9})
sp = ScaledProtocol(concrete)
print(f"K = {sp.K}, {len(sp.regions())} single-process regions")

w = initial_word(concrete, 2, sp.K)
print("\nletting time pass from", w)
for s in time_successors(w)[:6]:
    print("  ", s)
print("   ...")

tf = parse_trace((FIXTURES / "example2.trace").read_text())
ex = replay(factory, tf.pval, Mode.RECONF, tf.labels, tf.N)
print("\nthe hand-written run, abstracted:")
for conf in ex.configs:
    print("  ", abstract(conf, sp.K, sp.scale))

for N in (1, 2, 3):
    states, edges = word_graph(concrete, N, Mode.RECONF, limit=200000)
    hits = sum(1 for s in states if s.contains("g"))
    print(f"\nN = {N}: {len(states)} words, {len(edges)} edges, {hits} of them show g")

result = backward_coverability(concrete, "g", copycat=True)
print(f"\nbackward: g coverable = {result.reachable} after {result.iterations} iterations")
print(f"basis of {len(result.basis)} words, reached the initial set-word {result.witness_word}")

# Set-words drop multiplicities, so the size of a concrete witness comes from
# a forward search sized by the decision procedure.
decision = ef_reconf_decide(concrete, "g")
print(f"concrete witness: N = {decision.N}, {len(decision.trace)} steps")
