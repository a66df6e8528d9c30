"""Two-counter machines simulated by broadcast networks.

The machine m2 is interpreted, compiled into a one-clock reconfigurable
protocol with parameter ``p``, and the guided schedule is replayed to show
that the network tracks every machine configuration.  The clock-free clique
encoding is run the same way, and the integer gadget shows how ``p`` is
forced to be a whole number.
"""

from fractions import Fraction
from pathlib import Path

from ptbp.encodings import (
    clique_encodes,
    config_encodes,
    ctl,
    encode_af_clique,
    encode_ef_reconf,
    gadget_run,
    guided_clique_run,
    guided_run,
    integer_gadget,
    interpret,
    snapshot_times,
)
from ptbp.model import format_rational
from ptbp.semantics import Mode, configuration_at, reaches, replay
from ptbp.textio import parse_machine

MACHINES = Path(__file__).resolve().parents[1] / "src" / "ptbp" / "fixtures" / "machines"

machine = parse_machine((MACHINES / "m2.2cm").read_text(), "m2.2cm")
run = interpret(machine, 100)
print("m2 runs for", len(run.run) - 1, "instructions:")
print("  " + " ".join(f"{c.label}({c.c1},{c.c2})" for c in run.run))

p, N = 4, 4
protocol = encode_ef_reconf(machine)
print(f"\nreconfigurable encoding: {len(protocol.locations)} locations, {len(protocol.edges)} edges")
ex = replay(protocol, {"p": p}, Mode.RECONF, guided_run(machine, p, N), N)
print(f"guided schedule with p={p}, N={N}: {len(ex.steps)} steps, ends at time {format_rational(ex.duration)}")
for T, s in zip(snapshot_times(run, p), run.run):
    ok = config_encodes(configuration_at(ex, T), s, p)
    print(f"  t={format_rational(T):>5}  {s.label}({s.c1},{s.c2})  {'encoded' if ok else 'LOST'}")
print("controller accepts:", reaches(ex, ctl(machine.accept, 1)))

clique = encode_af_clique(machine)
labels, checkpoints = guided_clique_run(machine, N)
ex = replay(clique, {}, Mode.CLIQUE, labels, N)
configs = ex.configs
held = all(clique_encodes(configs[k], s) for k, s in checkpoints)
print(f"\nclique encoding: {len(labels)} zero-delay steps, every checkpoint encoded: {held}")
print("controller reaches err after acceptance:", reaches(ex, "err"))

print("\ninteger gadget, two processes:")
gadget = integer_gadget()
for value in (2, 3, Fraction(5, 2), Fraction(7, 3)):
    ex = replay(gadget, {"p": value}, Mode.RECONF, gadget_run(value), 2)
    print(f"  p={format_rational(value):>4}: listener ends in {ex.final.location(2)}")
