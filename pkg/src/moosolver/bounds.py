"""Guess-count lower bounds from max-node statistics.

A node of a strategy tree can resolve at most one secret, so the number
of secrets finishable within d+1 guesses is capped by the maximum
number of nonempty nodes any strategy can create down to depth d.
Those maxima, tabulated per count of distinct digits in the set, turn
into a piecewise-linear lower bound on the total guesses for a set of n
codes: with thresholds R_1 = 1 and R_{d+1} = N[kinds][d],

    cost(1) = 1,  cost(n) = cost(R_d) + (d + 1) * (n - R_d)

on each segment R_d < n <= R_{d+1}, and the last slope plus one beyond
the deepest tabulated depth.

The standard-game table ships as verified data because recomputing the
deep rows is a long preprocessing run; reduced geometries are searched
on the fly (their code spaces are tiny).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .core import CandidateSet, Code, DEFAULT_PARAMS, GameParams, LookupTables
from .errors import UnsupportedDepthError

MAX_BOUND_DEPTH = 3


@dataclass(frozen=True)
class MaxNodesTable:
    """N[kinds][depth] for depth 1..3, kinds over the game's range."""

    values: tuple[tuple[int, ...], ...]  # rows: (kinds, n1, n2, n3)

    def row(self, kinds: int) -> tuple[int, ...]:
        for r in self.values:
            if r[0] == kinds:
                return r[1:]
        raise KeyError(f"no max-nodes row for kinds={kinds}")

    def get(self, kinds: int, depth: int) -> int:
        if not (1 <= depth <= MAX_BOUND_DEPTH):
            raise UnsupportedDepthError(
                f"depth {depth} outside tabulated range 1..{MAX_BOUND_DEPTH}"
            )
        return self.row(kinds)[depth - 1]

    def to_text(self) -> str:
        lines = ["# kinds depth1 depth2 depth3"]
        for r in self.values:
            lines.append(" ".join(str(x) for x in r))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MaxNodesTable":
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = tuple(int(x) for x in line.split())
            rows.append(parts)
        return cls(tuple(rows))


@functools.lru_cache(maxsize=1)
def shipped_table() -> MaxNodesTable:
    text = (
        resources.files("moosolver").joinpath("data/max_nodes.txt").read_text()
    )
    return MaxNodesTable.from_text(text)


def universe_indices(kinds: int, tables: LookupTables) -> np.ndarray:
    """Indices of all codes drawn from the smallest ``kinds`` digits."""
    allowed = (1 << kinds) - 1
    mask = (tables.packed >> 16) & ~np.int32(allowed)
    return np.flatnonzero(mask == 0).astype(np.int32)


def compute_max_nodes(
    kinds: int, depth: int, engine, mode: str = "within"
) -> int:
    """Exhaustive max-node search over the kinds-digit universe."""
    if depth > MAX_BOUND_DEPTH:
        raise UnsupportedDepthError(f"depth {depth} beyond search support")
    mem = universe_indices(kinds, engine.tables)
    return engine.max_nodes(mem, depth, mode)


def max_nonempty_nodes(
    kinds: int,
    depth: int,
    params: GameParams = DEFAULT_PARAMS,
    recompute: bool = False,
    engine=None,
) -> int:
    """N[kinds][depth]; shipped data for the standard game unless asked
    to recompute, always computed for reduced geometries."""
    if not (1 <= depth <= MAX_BOUND_DEPTH):
        raise UnsupportedDepthError(f"depth {depth} outside 1..3")
    standard = params == DEFAULT_PARAMS
    if standard and not recompute:
        return shipped_table().get(kinds, depth)
    if engine is None:
        from .solver import make_engine

        engine = make_engine(params)
    return compute_max_nodes(kinds, depth, engine)


@dataclass(frozen=True)
class BoundSegments:
    """Inclusive (lo, hi, slope, intercept) rows; hi=None is open-ended."""

    kinds: int
    segments: tuple[tuple[int, int | None, int, int], ...]

    def lower_bound(self, n: int) -> int:
        if n <= 0:
            return 0
        for lo, hi, slope, intercept in self.segments:
            if hi is None or n <= hi:
                return slope * n + intercept
        raise AssertionError("open-ended final segment missing")


def bound_segments(
    kinds: int, table: MaxNodesTable | None = None
) -> BoundSegments:
    if table is None:
        table = shipped_table()
    thresholds = [1]
    for d in range(1, MAX_BOUND_DEPTH + 1):
        nd = table.get(kinds, d)
        # Guard against degenerate rows in tiny geometries where the
        # node maximum stops growing.
        thresholds.append(max(nd, thresholds[-1]))
    segs = []
    cost_at = 1  # cost(R_1) with R_1 = 1
    for d in range(1, MAX_BOUND_DEPTH + 1):
        lo, hi = thresholds[d - 1], thresholds[d]
        slope = d + 1
        intercept = cost_at - slope * lo
        if hi > lo:
            segs.append((1 if d == 1 else lo + 1, hi, slope, intercept))
            cost_at = slope * hi + intercept
        elif d == 1:
            segs.append((1, hi, slope, intercept))
    slope = MAX_BOUND_DEPTH + 2
    intercept = cost_at - slope * thresholds[-1]
    segs.append((thresholds[-1] + 1, None, slope, intercept))
    return BoundSegments(kinds, tuple(segs))


def lower_bound(
    n: int, kinds: int, table: MaxNodesTable | None = None
) -> int:
    """Guess-total lower bound for a set of n codes over `kinds` digits."""
    return bound_segments(kinds, table).lower_bound(n)


def lower_bound_array(
    params: GameParams, table: MaxNodesTable, space_size: int
) -> np.ndarray:
    """lb[kinds][n] table for the kernels; rows below the minimum
    possible kinds are padded with the minimum row (never indexed)."""
    kmax = params.symbol_count
    kmin = params.position_count
    lb = np.zeros((kmax + 1, space_size + 1), dtype=np.int32)
    for kinds in range(kmin, kmax + 1):
        segs = bound_segments(kinds, table)
        for n in range(1, space_size + 1):
            lb[kinds, n] = segs.lower_bound(n)
    for kinds in range(0, kmin):
        lb[kinds] = lb[kmin]
    return lb


def capacity_array(params: GameParams, table: MaxNodesTable) -> np.ndarray:
    """caps[kinds][j]: secrets resolvable within j guesses of a subtree."""
    kmax = params.symbol_count
    kmin = params.position_count
    caps = np.zeros((kmax + 1, MAX_BOUND_DEPTH + 2), dtype=np.int64)
    for kinds in range(kmin, kmax + 1):
        caps[kinds, 1] = 1
        prev = 1
        for d in range(1, MAX_BOUND_DEPTH + 1):
            prev = max(table.get(kinds, d), prev)
            caps[kinds, d + 1] = prev
    for kinds in range(0, kmin):
        caps[kinds] = caps[kmin]
    return caps


@functools.lru_cache(maxsize=None)
def reduced_table(params: GameParams) -> MaxNodesTable:
    """Max-nodes rows for a reduced geometry, searched on the fly."""
    from .solver import make_engine

    engine = make_engine(params, _for_bounds=True)
    rows = []
    for kinds in range(params.position_count, params.symbol_count + 1):
        row = [kinds]
        for depth in range(1, MAX_BOUND_DEPTH + 1):
            row.append(compute_max_nodes(kinds, depth, engine))
        rows.append(tuple(row))
    return MaxNodesTable(tuple(rows))


def table_for(params: GameParams) -> MaxNodesTable:
    if params == DEFAULT_PARAMS:
        return shipped_table()
    return reduced_table(params)


def small_set_total(
    cset: CandidateSet, tables: LookupTables
) -> tuple[int, Code]:
    """Best guess and exact total for sets of one to three codes.

    One element: ask it.  Two: ask either (the smaller), total 3.
    Three: an element separating the other two gives 5; otherwise every
    guess costs 6 and asking an element is optimal.
    """
    codes = cset.codes
    n = len(codes)
    if n == 1:
        return 1, codes[0]
    if n == 2:
        return 3, codes[0]
    if n == 3:
        for i, e in enumerate(codes):
            others = [codes[j] for j in range(3) if j != i]
            r1 = tables.product_parts(e.packed, others[0].packed)
            r2 = tables.product_parts(e.packed, others[1].packed)
            if r1 != r2:
                return 5, e
        return 6, codes[0]
    raise ValueError(f"small_set_total needs 1..3 codes, got {n}")
