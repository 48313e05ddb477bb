"""Drivers for the exhaustive searches.

Wires the backend kernels together with lookup tables, lower bounds,
and symmetry reduction, and exposes the two headline solves: the
strategy minimizing total guesses, and the strategy maximizing the
integer evaluation value against a fixed opponent distribution.

The evaluation transform: against an opponent that resolves its secret
in k guesses with probability d(k)/S, finishing ours on guess n wins
when k > n and draws (worth half) when k = n.  Scaling by 2S and
centering gives the integer value

    gamma[n] = 2 * sum_{k>n} d(k) + d(n) - S,

nonincreasing in n and equal to -S beyond the opponent's deepest guess.
Strategy value is the sum of gamma over all secrets; a strategy scores
exactly 0 against its own distribution, so a best response with value 0
certifies a fixed point (win rate never above one half).
"""

from __future__ import annotations

import multiprocessing
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import backend, bounds
from .config import SolveConfig
from .core import (
    CandidateSet,
    Code,
    DEFAULT_PARAMS,
    GameParams,
    Response,
    build_tables,
)
from .strategy import (
    GuessDistribution,
    StrategyTree,
    tree_from_kernel,
)
from .symmetry import make_provider

GAMMA_LEN = 24  # padded objective table; search depth stays far below


@dataclass(frozen=True)
class EvalTable:
    """Integer per-guess-count values derived from an opponent."""

    space: int
    wins: tuple[int, ...]
    loses: tuple[int, ...]
    draws: tuple[int, ...]
    gamma: tuple[int, ...]  # index 0 unused

    def gamma_array(self) -> np.ndarray:
        g = np.full(GAMMA_LEN, -self.space, dtype=np.int64)
        g[0] = 0
        for n in range(1, min(len(self.gamma), GAMMA_LEN)):
            g[n] = self.gamma[n]
        return g


def eval_table(opponent: GuessDistribution) -> EvalTable:
    """Win/lose/draw tallies and gamma values, integer arithmetic only."""
    S = opponent.space
    top = opponent.max_guesses + 1  # one row past the deepest guess
    wins, loses, draws, gamma = [0], [0], [0], [0]
    for n in range(1, top + 1):
        w = sum(opponent.count(k) for k in range(n + 1, top + 1))
        l = sum(opponent.count(k) for k in range(1, n))
        d = opponent.count(n)
        wins.append(w)
        loses.append(l)
        draws.append(d)
        gamma.append(2 * w + d - S)
    return EvalTable(
        space=S,
        wins=tuple(wins),
        loses=tuple(loses),
        draws=tuple(draws),
        gamma=tuple(gamma),
    )


def value_to_winrate(value: int, space: int) -> float:
    """Back out the win rate from a summed gamma value."""
    return (value / space + space) / (2 * space)


def self_value(dist: GuessDistribution, table: EvalTable) -> int:
    """Summed gamma of a distribution against an eval table."""
    return sum(
        dist.count(n) * table.gamma[n]
        for n in range(1, min(dist.max_guesses, len(table.gamma) - 1) + 1)
    ) + sum(
        dist.count(n) * (-table.space)
        for n in range(len(table.gamma), dist.max_guesses + 1)
    )


# ----------------------------------------------------------------------
# engine assembly
# ----------------------------------------------------------------------


def make_engine(
    params: GameParams = DEFAULT_PARAMS,
    config: Optional[SolveConfig] = None,
    backend_name: Optional[str] = None,
    _for_bounds: bool = False,
):
    """Build a search engine with tables, bounds, and symmetry wired in."""
    config = config or SolveConfig()
    tables = build_tables(params)
    module = (
        backend.module_by_name(backend_name)
        if backend_name
        else backend.active_module()
    )
    provider = make_provider(params, tables) if config.symmetry else None
    engine = module.Engine(tables, config, provider=provider)
    if not _for_bounds:
        table = bounds.table_for(params)
        engine.set_lower_bounds(
            bounds.lower_bound_array(params, table, tables.space_size)
        )
    return engine


def _attach_eval(engine, table: EvalTable, params: GameParams) -> None:
    caps = bounds.capacity_array(params, bounds.table_for(params))
    engine.set_eval(table.gamma_array(), caps)


def _indices(cset: CandidateSet, tables) -> np.ndarray:
    return np.array(
        sorted(tables.index_of(c) for c in cset.codes), dtype=np.int32
    )


def _history_to_idx(
    history: Sequence[tuple[Code, Response]], tables
) -> tuple[tuple[int, int], ...]:
    return tuple(
        (tables.index_of(g), r.class_index) for g, r in history
    )


# ----------------------------------------------------------------------
# minimum-total solve
# ----------------------------------------------------------------------


def solve_min_total(
    cset: CandidateSet,
    history: Sequence[tuple[Code, Response]] = (),
    incumbent: Optional[int] = None,
    params: GameParams = DEFAULT_PARAMS,
    config: Optional[SolveConfig] = None,
    engine=None,
) -> tuple[int, Optional[StrategyTree]]:
    """Exact minimum total guesses for a candidate set.

    With an incumbent, acts as a bounded search: returns
    ``(incumbent, None)`` when no strategy beats it.
    """
    if engine is None:
        engine = make_engine(params, config)
    tables = engine.tables
    total, ktree = engine.solve_min(
        _indices(cset, tables),
        _history_to_idx(history, tables),
        incumbent,
    )
    tree = tree_from_kernel(ktree, tables) if ktree is not None else None
    return total, tree


@dataclass
class GroupResult:
    """One first-response subtree of the initial solve."""

    class_index: int
    label: str
    size: int
    subtree_total: int
    seconds: float
    tree: Optional[StrategyTree]

    @property
    def second_guess(self) -> str:
        return self.tree.guess.text() if self.tree else ""


@dataclass
class InitialSolveResult:
    params: GameParams
    first_guess: Code
    groups: list[GroupResult]
    partial: bool  # True when only a subset of groups was requested

    @property
    def total(self) -> int:
        space = self.params.space_size
        return space + sum(g.subtree_total for g in self.groups)

    @property
    def average(self) -> float:
        return self.total / self.params.space_size

    def tree(self) -> StrategyTree:
        children = {
            g.label: g.tree for g in self.groups if g.tree is not None
        }
        return StrategyTree(self.first_guess, children)

    def report(self) -> str:
        lines = [
            "first response | second guess | elements | subtree total | time",
        ]
        for g in sorted(self.groups, key=lambda g: (g.size, g.label)):
            lines.append(
                f"{g.label:>14} | {g.second_guess:>12} | {g.size:8d} | "
                f"{g.subtree_total:13d} | {_fmt_time(g.seconds)}"
            )
        if not self.partial:
            lines.append(
                f"total guesses {self.total}  average {self.average:.3f}"
            )
        return "\n".join(lines)


def _fmt_time(seconds: float) -> str:
    if seconds >= 3600:
        return f"{int(seconds // 3600)}:{int(seconds % 3600 // 60):02d}:{seconds % 60:04.1f}"
    if seconds >= 60:
        return f"{int(seconds // 60)}:{seconds % 60:04.1f}"
    return f"{seconds:.1f}"


def _first_guess(params: GameParams, tables) -> Code:
    return Code.from_digits(tuple(range(params.position_count)))


def _group_members(params: GameParams, config, engine=None):
    """Partition the full space by the fixed first guess."""
    if engine is None:
        engine = make_engine(params, config)
    tables = engine.tables
    first = _first_guess(params, tables)
    first_idx = tables.index_of(first)
    all_idx = np.arange(tables.space_size, dtype=np.int32)
    kids = dict(engine.partition_children(all_idx, first_idx))
    return engine, first, first_idx, kids


def _solve_group_task(args):
    params, config, backend_name, class_index, objective, gamma_counts = args
    engine = make_engine(params, config, backend_name=backend_name)
    tables = engine.tables
    first = _first_guess(params, tables)
    first_idx = tables.index_of(first)
    all_idx = np.arange(tables.space_size, dtype=np.int32)
    kids = dict(engine.partition_children(all_idx, first_idx))
    mem = kids[class_index]
    history = ((first_idx, class_index),)
    start = time.perf_counter()
    if objective == "min":
        value, ktree = engine.solve_min(mem, history, None)
    else:
        _attach_eval(
            engine, eval_table(GuessDistribution(tuple(gamma_counts))), params
        )
        value, ktree = engine.solve_eval(mem, history, None)
    elapsed = time.perf_counter() - start
    return class_index, int(mem.size), value, ktree, elapsed


def _run_groups(
    params: GameParams,
    config: Optional[SolveConfig],
    groups: Optional[Sequence[int]],
    objective: str,
    opponent: Optional[GuessDistribution],
    workers: int,
    progress=None,
):
    # Whole-game solves work on history-induced sets throughout, so the
    # history-equivalence elimination is sound and on by default here.
    config = config or SolveConfig(deep_symmetry=True)
    engine, first, first_idx, kids = _group_members(params, config)
    tables = engine.tables
    classes = tables.classes
    if groups is not None:
        requested = sorted(set(groups))
    else:
        requested = [classes.all_bulls_index, *sorted(kids)]
    for g in requested:
        if g not in kids and g != classes.all_bulls_index:
            raise ValueError(f"group {g} has no members")

    if objective == "eval" and opponent is None:
        raise ValueError("eval objective needs an opponent distribution")
    gamma_counts = tuple(opponent.counts) if opponent else None
    if objective == "eval":
        _attach_eval(engine, eval_table(opponent), params)

    results: list[GroupResult] = []
    all_bulls = classes.all_bulls_index
    if all_bulls in requested:
        results.append(
            GroupResult(all_bulls, classes.labels[all_bulls], 1, 0, 0.0, None)
        )
        requested = [g for g in requested if g != all_bulls]

    def record(class_index, size, value, ktree, elapsed):
        tree = tree_from_kernel(ktree, tables) if ktree is not None else None
        res = GroupResult(
            class_index,
            classes.labels[class_index],
            size,
            value,
            elapsed,
            tree,
        )
        results.append(res)
        if progress:
            progress(res)

    if workers > 1 and len(requested) > 1:
        tasks = [
            (params, config, backend.backend_name(), g, objective, gamma_counts)
            for g in requested
        ]
        with multiprocessing.get_context("fork").Pool(workers) as pool:
            for out in pool.imap_unordered(_solve_group_task, tasks):
                record(*out)
    else:
        for g in requested:
            mem = kids[g]
            history = ((first_idx, g),)
            start = time.perf_counter()
            if objective == "min":
                value, ktree = engine.solve_min(mem, history, None)
            else:
                value, ktree = engine.solve_eval(mem, history, None)
            record(g, int(mem.size), value, ktree, time.perf_counter() - start)

    results.sort(key=lambda r: r.class_index)
    return InitialSolveResult(
        params=params,
        first_guess=first,
        groups=results,
        partial=groups is not None and len(results) < len(kids) + 1,
    )


def solve_initial_min(
    params: GameParams = DEFAULT_PARAMS,
    groups: Optional[Sequence[int]] = None,
    config: Optional[SolveConfig] = None,
    workers: int = 1,
    progress=None,
) -> InitialSolveResult:
    """Fix the canonical first guess and solve each response group."""
    return _run_groups(params, config, groups, "min", None, workers, progress)


# ----------------------------------------------------------------------
# maximum-evaluation solve
# ----------------------------------------------------------------------


def solve_max_eval(
    cset: CandidateSet,
    history: Sequence[tuple[Code, Response]],
    table: EvalTable,
    incumbent: Optional[int] = None,
    params: GameParams = DEFAULT_PARAMS,
    config: Optional[SolveConfig] = None,
    engine=None,
) -> tuple[int, Optional[StrategyTree]]:
    """Maximum summed gamma for a candidate set at the history's depth."""
    if engine is None:
        engine = make_engine(params, config)
        _attach_eval(engine, table, params)
    tables = engine.tables
    value, ktree = engine.solve_eval(
        _indices(cset, tables),
        _history_to_idx(history, tables),
        incumbent,
    )
    tree = tree_from_kernel(ktree, tables) if ktree is not None else None
    return value, tree


def solve_initial_eval(
    opponent: GuessDistribution,
    params: GameParams = DEFAULT_PARAMS,
    groups: Optional[Sequence[int]] = None,
    config: Optional[SolveConfig] = None,
    workers: int = 1,
    progress=None,
) -> InitialSolveResult:
    """Best-response search with the first guess fixed canonically."""
    return _run_groups(
        params, config, groups, "eval", opponent, workers, progress
    )


def best_response_winrate(
    opponent: GuessDistribution,
    params: GameParams = DEFAULT_PARAMS,
    config: Optional[SolveConfig] = None,
    workers: int = 1,
    progress=None,
) -> tuple[StrategyTree, float, int]:
    """Best fixed strategy against an opponent distribution.

    Returns (tree, winrate, value); the win rate comes from the exact
    integer value sum.
    """
    result = solve_initial_eval(
        opponent, params, None, config, workers, progress
    )
    table = eval_table(opponent)
    tree = result.tree()
    total_value = _initial_eval_value(result, table)
    rate = value_to_winrate(total_value, opponent.space)
    return tree, rate, total_value


def _initial_eval_value(result: InitialSolveResult, table: EvalTable) -> int:
    # Group solves report subtree values; the first guess itself
    # resolves one secret on guess one.
    value = table.gamma[1]
    for g in result.groups:
        if g.class_index != 0:
            value += g.subtree_total
    return value


def fixed_point_check(
    tree: StrategyTree,
    params: GameParams = DEFAULT_PARAMS,
    config: Optional[SolveConfig] = None,
    workers: int = 1,
    progress=None,
) -> tuple[bool, float, int]:
    """Is a strategy a best response to itself?

    Computes the optimal value against the strategy's own distribution;
    the strategy itself scores exactly zero there, so it is a fixed
    point iff the optimum is zero (best-response win rate one half).
    """
    from .strategy import distribution

    dist = distribution(tree, params)
    _, rate, value = best_response_winrate(
        dist, params, config, workers, progress
    )
    return value == 0, rate, value


def iterate_best_response(
    start: GuessDistribution,
    params: GameParams,
    config: Optional[SolveConfig] = None,
    max_rounds: int = 12,
) -> tuple[StrategyTree, GuessDistribution, int]:
    """Follow best responses until one is a best response to itself.

    Returns the fixed-point strategy, its distribution, and the number
    of improvement rounds taken.
    """
    from .strategy import distribution

    current = start
    for rounds in range(1, max_rounds + 1):
        tree, _, _ = best_response_winrate(current, params, config)
        dist = distribution(tree, params)
        _, _, value = best_response_winrate(dist, params, config)
        if value == 0:
            return tree, dist, rounds
        current = dist
    raise RuntimeError(f"no fixed point within {max_rounds} rounds")
