"""Exact fixed-strategy solvers for the MOO (Bulls and Cows) game."""

from .backend import available_backends, backend_name
from .config import SolveConfig
from .core import (
    CandidateSet,
    Code,
    DEFAULT_PARAMS,
    GameParams,
    Response,
    build_tables,
    enumerate_codes,
    moo_product,
    naive_product,
    parse_code,
    partition,
)
from .solver import (
    EvalTable,
    best_response_winrate,
    eval_table,
    fixed_point_check,
    make_engine,
    solve_initial_eval,
    solve_initial_min,
    solve_max_eval,
    solve_min_total,
    value_to_winrate,
)
from .strategy import (
    GuessDistribution,
    StrategyTree,
    distribution,
    load,
    match_winrate,
    replay,
    serialize,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "CandidateSet",
    "Code",
    "DEFAULT_PARAMS",
    "EvalTable",
    "GameParams",
    "GuessDistribution",
    "Response",
    "SolveConfig",
    "StrategyTree",
    "available_backends",
    "backend_name",
    "best_response_winrate",
    "build_tables",
    "distribution",
    "enumerate_codes",
    "eval_table",
    "fixed_point_check",
    "load",
    "make_engine",
    "match_winrate",
    "moo_product",
    "naive_product",
    "parse_code",
    "partition",
    "replay",
    "serialize",
    "solve_initial_eval",
    "solve_initial_min",
    "solve_max_eval",
    "solve_min_total",
    "value_to_winrate",
    "verify",
]
