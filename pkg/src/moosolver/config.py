"""Search configuration shared by both backends."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SolveConfig:
    """Switches for the branch-and-bound searches.

    Every switch preserves returned totals/values; they only trade
    node counts for bookkeeping cost (verified by the test suite).

    prune:         abandon candidates that cannot beat the incumbent
    use_bounds:    piecewise-linear lower bounds (else the trivial
                   one-guess-per-member bound)
    symmetry:      equivalent-guess elimination at shallow depths
    sym_depth:     apply set-verified symmetry while choosing guess
                   number <= this
    deep_symmetry: also eliminate history-equivalent guesses beyond
                   sym_depth (valid only when candidate sets are
                   exactly the ones induced by their histories, which
                   holds for the standard whole-game solves; off by
                   default so arbitrary-subset solves stay sound)
    deep_sym_depth: apply the history-only elimination while choosing
                   guess number <= this
    small_sets:    closed forms for candidate sets of size <= 3
    product_cache: precompute the full pairwise response-class matrix
                   (space for speed; off by default)
    eval_bound:    "capacity" uses per-depth resolution capacities for
                   the win-rate search's optimistic bound, "simple"
                   assumes every member resolves on the next guess
    """

    prune: bool = True
    use_bounds: bool = True
    symmetry: bool = True
    sym_depth: int = 2
    deep_symmetry: bool = False
    deep_sym_depth: int = 4
    small_sets: bool = True
    product_cache: bool = False
    eval_bound: str = "capacity"

    def __post_init__(self) -> None:
        if self.eval_bound not in ("capacity", "simple"):
            raise ValueError(f"unknown eval_bound {self.eval_bound!r}")


MAX_SEARCH_DEPTH = 128
