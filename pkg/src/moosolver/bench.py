"""Benchmark comparing the compiled and pure-Python backends.

Workloads are sized so the Python fallback finishes: a reduced-game
full solve plus the small first-response groups of the standard game.
Results must agree exactly between backends; times are wall clock.
"""

from __future__ import annotations

import time

import numpy as np

from . import backend
from .core import GameParams, parse_code


def _time_solve(engine, mem, history=()):
    t0 = time.perf_counter()
    total, tree = engine.solve_min(mem, history)
    return total, tree, time.perf_counter() - t0


def run_benchmark(args) -> int:
    from .solver import make_engine

    names = backend.available_backends()
    if len(names) < 2:
        print("compiled backend unavailable; nothing to compare")
    rows = []

    reduced = GameParams(args.symbols, args.positions)
    engines = {n: make_engine(reduced, backend_name=n) for n in names}
    mem = np.arange(engines[names[0]].tables.space_size, dtype=np.int32)
    results = {}
    for n in names:
        total, tree, dt = _time_solve(engines[n], mem)
        results[n] = (total, tree, dt)
    base = results[names[0]]
    for n in names[1:]:
        assert results[n][0] == base[0], "backends disagree on the total"
        assert results[n][1] == base[1], "backends disagree on the tree"
    rows.append(
        (
            f"solve-min {args.symbols}x{args.positions} "
            f"({mem.size} codes)",
            {n: results[n][2] for n in names},
        )
    )

    full = GameParams()
    engines = {n: make_engine(full, backend_name=n) for n in names}
    tables = engines[names[0]].tables
    fi = tables.index_of(parse_code("0123"))
    all_idx = np.arange(tables.space_size, dtype=np.int32)
    kids = dict(engines[names[0]].partition_children(all_idx, fi))
    for label in args.full_game_groups.split(","):
        label = label.strip()
        k = tables.classes.index_of_label[label]
        results = {}
        for n in names:
            total, tree, dt = _time_solve(
                engines[n], kids[k], ((fi, k),)
            )
            results[n] = (total, tree, dt)
        base = results[names[0]]
        for n in names[1:]:
            assert results[n][0] == base[0]
            assert results[n][1] == base[1]
        rows.append(
            (
                f"full-game group {label} ({kids[k].size} codes, "
                f"total {base[0]})",
                {n: results[n][2] for n in names},
            )
        )

    width = max(len(r[0]) for r in rows)
    header = f"{'workload':<{width}} | " + " | ".join(
        f"{n:>10}" for n in names
    )
    if len(names) > 1:
        header += " | speedup"
    print(header)
    print("-" * len(header))
    for name, times in rows:
        line = f"{name:<{width}} | " + " | ".join(
            f"{times[n]:>9.3f}s" for n in names
        )
        if len(names) > 1:
            line += f" | {times[names[1]] / max(times[names[0]], 1e-9):6.1f}x"
        print(line)
    return 0
