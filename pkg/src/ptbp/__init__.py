"""Parametric timed broadcast protocols: modelling, exact semantics, region
based decision procedures and counter-machine encodings."""

from .decide import (
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
from .model import (
    Action,
    Atom,
    Edge,
    ParamBound,
    Protocol,
    PTBPError,
    build_n_max,
    build_n_min,
    classify,
    substitute,
    validate,
)
from .regions import RegionWord, abstract, backward_coverability, covers
from .semantics import (
    Configuration,
    Execution,
    Mode,
    ReplayError,
    TransitionLabel,
    configuration_at,
    initial_config,
    reaches,
    replay,
    replay_under,
    simulate,
    step,
)
from .textio import (
    parse_machine,
    parse_protocol,
    parse_trace,
    serialize_machine,
    serialize_protocol,
    serialize_trace,
)

__version__ = "0.1.0"
