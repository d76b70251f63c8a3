"""Pomset semantics engine and litmus checker for a C11-style memory model."""

__version__ = "0.1.0"

from .actions import (  # noqa: F401
    ACQ,
    AR,
    DELTA,
    NA,
    REL,
    RLX,
    SC,
    Action,
    Delta,
    Fence,
    MemOrder,
    Read,
    Rmw,
    Write,
    is_acq,
    is_rel,
    memory_ordered,
    mo_leq,
    render_action,
)
from .denote import DenoteConfig, Denotation, denote_cmd, denote_prog  # noqa: F401
from .execution import (  # noqa: F401
    TOP,
    ExecConfig,
    ExecResult,
    PomsetSizeError,
    executions,
    executions_prog,
    footprint,
    proper,
    render_footstep,
    render_state,
)
from .litmus import (  # noqa: F401
    LitmusCase,
    Verdict,
    cross_check,
    interleaving_oracle,
    parse_litmus,
    run_case,
)
from .pomset import (  # noqa: F401
    Pomset,
    canonicalize,
    empty,
    iso_equal,
    par_compose,
    relaxed_compose,
    restrict,
    seq_compose,
    singleton,
    substitute,
)
from .syntax import ParseError, Prog, check_static, parse_program, pretty_print  # noqa: F401
