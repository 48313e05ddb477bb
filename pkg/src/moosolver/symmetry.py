"""Equivalent-guess elimination via digit and position substitutions.

Two guesses are interchangeable at a node when some digit relabeling
plus position permutation maps one to the other while mapping the
node's candidate set onto itself.  Three cheap certificate families
cover what the search needs:

* digits absent from the candidate set can be permuted freely (they fix
  the set pointwise);
* digits absent from every previous guess can be permuted when a direct
  check confirms the swap maps the set onto itself (for a set induced
  by its history this always holds);
* substitutions that map the guess sequence to itself, of which there
  are at most ``4! = 24`` because the position permutation determines
  the digit relabeling on every guessed digit.

Only the numerically smallest guess of each equivalence class is kept:
within each substitutable group, members must appear in ascending group
order scanning from the most significant digit, and the guess must be
minimal among the images under the history automorphisms.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import (
    CandidateSet,
    Code,
    DEFAULT_PARAMS,
    GameParams,
    LookupTables,
    Response,
    build_tables,
    pack_digits,
)
from .errors import InconsistentHistoryError

HistoryItem = tuple[Code, Response]


@dataclass(frozen=True)
class DigitGroups:
    """Partition of the symbols into mutually substitutable groups."""

    groups: tuple[tuple[int, ...], ...]

    def group_of(self, digit: int) -> tuple[int, ...]:
        for g in self.groups:
            if digit in g:
                return g
        raise KeyError(digit)


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _swap_preserves_set(
    d: int, e: int, rows: np.ndarray, packed_sorted: np.ndarray
) -> bool:
    """Does exchanging digits d and e map the set onto itself?"""
    touched = np.any((rows == d) | (rows == e), axis=1)
    if not touched.any():
        return True
    sub = rows[touched]
    swapped = np.where(sub == d, -1, sub)
    swapped = np.where(swapped == e, d, swapped)
    swapped = np.where(swapped == -1, e, swapped)
    packed = _pack_rows(swapped)
    pos = np.searchsorted(packed_sorted, packed)
    pos = np.clip(pos, 0, packed_sorted.size - 1)
    return bool(np.all(packed_sorted[pos] == packed))


def _pack_rows(rows: np.ndarray) -> np.ndarray:
    p = rows.shape[1]
    low = np.zeros(rows.shape[0], dtype=np.int64)
    for j in range(p):
        low = (low << 4) | rows[:, j].astype(np.int64)
    mask = np.zeros(rows.shape[0], dtype=np.int64)
    for j in range(p):
        mask |= np.int64(1) << rows[:, j].astype(np.int64)
    return (mask << 16) | low


def _groups_from_parts(
    guess_rows: Sequence[tuple[int, ...]],
    member_rows: Optional[np.ndarray],
    symbol_count: int,
) -> DigitGroups:
    guessed = set()
    for row in guess_rows:
        guessed.update(row)
    uf = _UnionFind(symbol_count)

    if member_rows is None:
        # Trust that the set is exactly the one induced by the history:
        # all unguessed digits play identical roles.
        unguessed = [d for d in range(symbol_count) if d not in guessed]
        for a, b in zip(unguessed, unguessed[1:]):
            uf.union(a, b)
    else:
        present = set(int(x) for x in np.unique(member_rows))
        absent = [d for d in range(symbol_count) if d not in present]
        for a, b in zip(absent, absent[1:]):
            uf.union(a, b)
        packed_sorted = np.sort(_pack_rows(member_rows))
        unguessed = [d for d in range(symbol_count) if d not in guessed]
        for a, b in combinations(unguessed, 2):
            if a not in present and b not in present:
                continue  # already merged through the absent pool
            if uf.find(a) == uf.find(b):
                continue
            if _swap_preserves_set(a, b, member_rows, packed_sorted):
                uf.union(a, b)

    buckets: dict[int, list[int]] = {}
    for d in range(symbol_count):
        buckets.setdefault(uf.find(d), []).append(d)
    groups = tuple(
        tuple(sorted(g)) for g in sorted(buckets.values(), key=lambda g: g[0])
    )
    return DigitGroups(groups)


def _automorphisms(
    guess_rows: Sequence[tuple[int, ...]],
    member_rows: Optional[np.ndarray],
    params: GameParams,
) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """(digit_map, position_map) pairs fixing every guess and the set.

    The digit map is pinned on guessed digits by the position map and is
    the identity elsewhere; group relabelings compose on top separately.
    """
    s = params.symbol_count
    p = params.position_count
    packed_sorted = None
    if member_rows is not None:
        packed_sorted = np.sort(_pack_rows(member_rows))

    autos = []
    for pos_map in permutations(range(p)):
        dmap = [-1] * s
        taken = [False] * s
        ok = True
        for row in guess_rows:
            for pos in range(p):
                a, b = row[pos], row[pos_map[pos]]
                if dmap[a] == -1:
                    if taken[b]:
                        ok = False
                        break
                    dmap[a] = b
                    taken[b] = True
                elif dmap[a] != b:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        full = tuple(dmap[d] if dmap[d] != -1 else d for d in range(s))
        if member_rows is not None and not _map_preserves_set(
            full, pos_map, member_rows, packed_sorted
        ):
            continue
        autos.append((full, pos_map))
    return autos


def _map_preserves_set(
    dmap: tuple[int, ...],
    pos_map: tuple[int, ...],
    rows: np.ndarray,
    packed_sorted: np.ndarray,
) -> bool:
    p = rows.shape[1]
    out = np.empty_like(rows)
    lut = np.array(dmap, dtype=rows.dtype)
    mapped = lut[rows]
    for pos in range(p):
        out[:, pos_map[pos]] = mapped[:, pos]
    packed = _pack_rows(out)
    pos = np.searchsorted(packed_sorted, packed)
    pos = np.clip(pos, 0, packed_sorted.size - 1)
    return bool(np.all(packed_sorted[pos] == packed))


def _canonize_row(
    row: tuple[int, ...], group_of: dict[int, tuple[int, ...]]
) -> tuple[int, ...]:
    # Within each group, appearing digits are relabeled to the group's
    # smallest members in order of first appearance.
    assigned: dict[int, int] = {}
    cursor: dict[tuple[int, ...], int] = {}
    out = []
    for d in row:
        if d not in assigned:
            g = group_of[d]
            k = cursor.get(g, 0)
            assigned[d] = g[k]
            cursor[g] = k + 1
        out.append(assigned[d])
    return tuple(out)


def _apply_auto(
    row: tuple[int, ...],
    dmap: tuple[int, ...],
    pos_map: tuple[int, ...],
) -> tuple[int, ...]:
    out = [0] * len(row)
    for pos, d in enumerate(row):
        out[pos_map[pos]] = dmap[d]
    return tuple(out)


class SymmetryContext:
    """Groups and automorphisms for one (history, candidate set) node."""

    def __init__(
        self,
        guess_rows: Sequence[tuple[int, ...]],
        member_rows: Optional[np.ndarray],
        params: GameParams,
    ) -> None:
        self.params = params
        self.groups = _groups_from_parts(
            guess_rows, member_rows, params.symbol_count
        )
        self.autos = _automorphisms(guess_rows, member_rows, params)
        self._group_of = {
            d: g for g in self.groups.groups for d in g
        }

    def canonize(self, row: tuple[int, ...]) -> tuple[int, ...]:
        return _canonize_row(row, self._group_of)

    def is_canonical(self, row: tuple[int, ...]) -> bool:
        if self.canonize(row) != row:
            return False
        value = _row_value(row)
        for dmap, pos_map in self.autos:
            image = self.canonize(_apply_auto(row, dmap, pos_map))
            if _row_value(image) < value:
                return False
        return True

    def canonical_rows(
        self, all_rows: np.ndarray, index_of_packed: dict[int, int]
    ) -> list[int]:
        """Indices of canonical guesses, ascending, by orbit sweep."""
        seen = np.zeros(all_rows.shape[0], dtype=bool)
        out = []
        for idx in range(all_rows.shape[0]):
            if seen[idx]:
                continue
            row = tuple(int(x) for x in all_rows[idx])
            if self.canonize(row) != row:
                continue
            out.append(idx)
            for dmap, pos_map in self.autos:
                image = self.canonize(_apply_auto(row, dmap, pos_map))
                seen[index_of_packed[pack_digits(image)]] = True
        return out


def _row_value(row: tuple[int, ...]) -> int:
    v = 0
    for d in row:
        v = (v << 4) | d
    return v


def _history_rows(history: Iterable[HistoryItem]) -> list[tuple[int, ...]]:
    return [g.digits() for g, _ in history]


def _member_rows(cset: Optional[CandidateSet]) -> Optional[np.ndarray]:
    if cset is None:
        return None
    return np.array([c.digits() for c in cset.codes], dtype=np.int16)


def induced_set(
    history: Sequence[HistoryItem], params: GameParams = DEFAULT_PARAMS
) -> CandidateSet:
    """All codes consistent with every (guess, response) pair."""
    from .core import enumerate_codes, moo_product

    tables = build_tables(params)
    codes = list(enumerate_codes(params).codes)
    for guess, resp in history:
        codes = [
            c
            for c in codes
            if moo_product(guess, c, tables).class_index == resp.class_index
        ]
    if not codes:
        raise InconsistentHistoryError("history admits no secret")
    return CandidateSet(codes)


def digit_groups(
    history: Sequence[HistoryItem],
    cset: Optional[CandidateSet],
    params: GameParams = DEFAULT_PARAMS,
) -> DigitGroups:
    """Substitutable-digit partition for a node.

    ``cset=None`` means "the set is exactly the one induced by the
    history", in which case all unguessed digits are interchangeable
    without further checking.
    """
    return _groups_from_parts(
        _history_rows(history), _member_rows(cset), params.symbol_count
    )


def is_canonical(
    guess: Code,
    history: Sequence[HistoryItem],
    cset: Optional[CandidateSet] = None,
    params: GameParams = DEFAULT_PARAMS,
) -> bool:
    ctx = SymmetryContext(_history_rows(history), _member_rows(cset), params)
    return ctx.is_canonical(guess.digits())


def canonical_guesses(
    history: Sequence[HistoryItem],
    cset: Optional[CandidateSet] = None,
    params: GameParams = DEFAULT_PARAMS,
) -> list[Code]:
    """Canonical representatives among all possible guesses, ascending."""
    tables = build_tables(params)
    ctx = SymmetryContext(_history_rows(history), _member_rows(cset), params)
    idxs = ctx.canonical_rows(tables.digit_rows, tables.index_of_packed)
    return [tables.codes[i] for i in idxs]


def make_provider(params: GameParams, tables: LookupTables):
    """Candidate-list callback for the search kernels.

    Receives member indices and an index-level history; returns the
    canonical guess indices for that node.
    """
    digit_rows = tables.digit_rows

    def provider(
        mem: np.ndarray, history: tuple[tuple[int, int], ...]
    ) -> np.ndarray:
        guess_rows = [
            tuple(int(x) for x in digit_rows[g]) for g, _ in history
        ]
        member_rows = digit_rows[mem].astype(np.int16)
        ctx = SymmetryContext(guess_rows, member_rows, params)
        idxs = ctx.canonical_rows(digit_rows, tables.index_of_packed)
        return np.array(idxs, dtype=np.int32)

    return provider
