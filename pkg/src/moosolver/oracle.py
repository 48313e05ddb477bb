"""Unpruned brute-force reference solvers for reduced games.

Deliberately independent of the fast path: responses come from the
naive per-digit comparison, every guess is tried at every node, and no
bounds, symmetry, or small-set shortcuts are applied.  Memoization on
exact candidate subsets keeps the enumeration tractable on the reduced
geometries these are meant for.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

from .core import (
    CandidateSet,
    Code,
    GameParams,
    ResponseClasses,
    enumerate_codes,
    naive_product,
)

_SPACE_LIMIT = 400  # oracle is for desk-scale games only


class Oracle:
    """Exhaustive reference solver over one reduced geometry."""

    def __init__(self, params: GameParams) -> None:
        if params.space_size > _SPACE_LIMIT:
            raise ValueError(
                f"oracle limited to spaces of {_SPACE_LIMIT} codes, "
                f"got {params.space_size}"
            )
        self.params = params
        self.codes = list(enumerate_codes(params).codes)
        self.S = len(self.codes)
        p = params.position_count
        # Response matrix from the naive product only.
        self.resp = [
            [naive_product(a, b) for b in self.codes] for a in self.codes
        ]
        self.all_bulls = (p, 0)
        self.classes = ResponseClasses(p)
        self._min_memo: dict = {}
        self._eval_memo: dict = {}

    def index_of(self, code: Code) -> int:
        return self.codes.index(code)

    # -- minimum total ---------------------------------------------------
    def min_total(self, members: Sequence[int]) -> tuple[int, tuple]:
        """Exact minimum total guesses and tree over member indices."""
        return self._min(frozenset(members))

    def _min(self, fs: frozenset) -> tuple[int, tuple]:
        if len(fs) == 1:
            m = next(iter(fs))
            return 1, (m, ())
        hit = self._min_memo.get(fs)
        if hit is not None:
            return hit
        n = len(fs)
        best = None
        best_tree = None
        for g in range(self.S):
            buckets: dict[tuple[int, int], list[int]] = {}
            for m in fs:
                buckets.setdefault(self.resp[g][m], []).append(m)
            if len(buckets) == 1 and self.all_bulls not in buckets:
                continue
            total = n
            kids = []
            for bc, sub in sorted(buckets.items()):
                if bc == self.all_bulls:
                    continue
                t, tree = self._min(frozenset(sub))
                total += t
                kids.append((self._class_index(bc), tree))
            if best is None or total < best:
                best = total
                best_tree = (g, tuple(sorted(kids)))
        self._min_memo[fs] = (best, best_tree)
        return best, best_tree

    def _class_index(self, bc: tuple[int, int]) -> int:
        return self.classes.index_of[bc]

    # -- maximum evaluation ----------------------------------------------
    def max_eval(
        self, members: Sequence[int], gamma: Sequence[int], depth: int = 0
    ) -> int:
        """Best achievable gamma sum; gamma is 1-indexed and padded."""
        self._eval_memo.clear()
        return self._eval(frozenset(members), tuple(gamma), depth)

    def _eval(self, fs: frozenset, gamma: tuple, depth: int) -> int:
        def g(n: int) -> int:
            return gamma[n] if n < len(gamma) else gamma[-1]

        if len(fs) == 1:
            return g(depth + 1)
        key = (fs, depth)
        hit = self._eval_memo.get(key)
        if hit is not None:
            return hit
        best = None
        for t in range(self.S):
            buckets: dict[tuple[int, int], list[int]] = {}
            for m in fs:
                buckets.setdefault(self.resp[t][m], []).append(m)
            if len(buckets) == 1 and self.all_bulls not in buckets:
                continue
            value = 0
            for bc, sub in buckets.items():
                if bc == self.all_bulls:
                    value += g(depth + 1)
                else:
                    value += self._eval(frozenset(sub), gamma, depth + 1)
            if best is None or value > best:
                best = value
        self._eval_memo[key] = best
        return best


@lru_cache(maxsize=None)
def oracle_for(params: GameParams) -> Oracle:
    return Oracle(params)


def oracle_min_total(
    cset: CandidateSet, params: GameParams
) -> tuple[int, tuple]:
    orc = oracle_for(params)
    members = [orc.index_of(c) for c in cset.codes]
    return orc.min_total(members)
