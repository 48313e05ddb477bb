"""One-step-lookahead guess scoring and greedy strategy construction.

The classic scoring functions rate a guess by the partition it induces
on the candidate set (lower is better):

* ``larmouth``:  sum |t| * ln|t| over buckets, minus 2 ln 2 when the
  guess is itself a candidate;
* ``landy-max``:   the largest bucket;
* ``landy-log1p``: sum |t| * ln(1 + |t|);
* ``landy-xx``:    sum |t| * F(|t|) where F(n) solves x ** x = n.

Natural logarithms throughout; the base only rescales scores and never
reorders argmins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .core import DEFAULT_PARAMS, GameParams, build_tables
from .errors import DomainError
from .strategy import StrategyTree

LANDY_VARIANTS = ("max", "log1p", "xx")
SCORER_NAMES = ("larmouth", "landy-max", "landy-log1p", "landy-xx")


@dataclass(frozen=True)
class PartitionProfile:
    """Bucket sizes induced by a guess, plus set membership."""

    sizes: tuple[int, ...]
    guess_in_set: bool


def solve_xx(n: float) -> float:
    """The x >= 1 with x ** x = n, by bracketed root finding."""
    if n < 1:
        raise DomainError(f"x**x = n has no solution x >= 1 for n = {n}")
    if n == 1:
        return 1.0
    ln_n = math.log(n)
    hi = max(2.0, ln_n)
    while hi * math.log(hi) < ln_n:
        hi *= 2
    return float(brentq(lambda x: x * math.log(x) - ln_n, 1.0, hi, xtol=1e-12))


def score_larmouth(profile: PartitionProfile) -> float:
    s = sum(t * math.log(t) for t in profile.sizes if t > 0)
    if profile.guess_in_set:
        s -= 2 * math.log(2)
    return s


def score_landy(profile: PartitionProfile, variant: str = "xx") -> float:
    if variant == "max":
        return float(max(profile.sizes, default=0))
    if variant == "log1p":
        return sum(t * math.log1p(t) for t in profile.sizes if t > 0)
    if variant == "xx":
        return sum(t * _xx_int(t) for t in profile.sizes if t > 0)
    raise ValueError(f"unknown landy variant {variant!r}")


@lru_cache(maxsize=None)
def _xx_int(n: int) -> float:
    return solve_xx(float(n))


def _vector_scores(
    name: str, counts: np.ndarray, inset: np.ndarray
) -> np.ndarray:
    """Vectorized scoring of a counts matrix (rows = candidate guesses).

    The all-bulls bucket participates like any other bucket of size one;
    membership is handled by each formula's own term.
    """
    nmax = int(counts.max())
    sizes = np.arange(nmax + 1, dtype=np.float64)
    if name == "larmouth":
        table = np.zeros(nmax + 1)
        table[1:] = sizes[1:] * np.log(sizes[1:])
        return table[counts].sum(axis=1) - 2 * math.log(2) * inset
    if name == "landy-max":
        return counts.max(axis=1).astype(np.float64)
    if name == "landy-log1p":
        table = sizes * np.log1p(sizes)
        return table[counts].sum(axis=1)
    if name == "landy-xx":
        table = np.array([t * _xx_int(t) if t else 0.0 for t in range(nmax + 1)])
        return table[counts].sum(axis=1)
    raise ValueError(f"unknown scorer {name!r}")


Scorer = Union[str, Callable[[PartitionProfile], float]]


def greedy_strategy(
    scorer: Scorer,
    params: GameParams = DEFAULT_PARAMS,
    engine=None,
) -> StrategyTree:
    """Pick the best-scoring guess at every node, ties to the smallest.

    ``scorer`` is one of the named functions (vectorized fast path) or
    any callable on :class:`PartitionProfile`.
    """
    if engine is None:
        from .solver import make_engine

        engine = make_engine(params)
    tables = engine.tables
    classes = tables.classes

    def best_guess(mem: np.ndarray) -> int:
        counts, inset = engine.counts_matrix(mem)
        progress = counts.max(axis=1) < mem.size
        if isinstance(scorer, str):
            scores = _vector_scores(scorer, counts, inset)
        else:
            scores = np.array(
                [
                    scorer(
                        PartitionProfile(
                            tuple(int(x) for x in row), bool(ins)
                        )
                    )
                    for row, ins in zip(counts, inset)
                ]
            )
        scores = np.where(progress, scores, np.inf)
        best = scores.min()
        return int(np.flatnonzero(scores == best)[0])

    def build(mem: np.ndarray) -> StrategyTree:
        if mem.size == 1:
            return StrategyTree(tables.codes[int(mem[0])])
        t = best_guess(mem)
        children = {}
        for k, sub in engine.partition_children(mem, t):
            children[classes.labels[k]] = build(sub)
        return StrategyTree(tables.codes[t], children)

    all_idx = np.arange(tables.space_size, dtype=np.int32)
    return build(all_idx)
