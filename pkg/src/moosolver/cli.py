"""Command-line entry points.

Subcommands cover the whole workflow: solving for the minimum-total
and strongest strategies (whole game or selected first-response
groups), verifying and analyzing strategy documents, bound-table
maintenance, heuristic baselines, brute-force reduced-game oracles,
fixed-point checks, an interactive engine, and a backend benchmark.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from pathlib import Path

from . import backend, bounds
from .config import SolveConfig
from .core import (
    DEFAULT_PARAMS,
    GameParams,
    build_tables,
    class_label,
    enumerate_codes,
    naive_product,
    parse_code,
)
from .errors import CodeError
from .strategy import (
    GuessDistribution,
    distribution,
    load,
    match_winrate,
    serialize,
    verify,
)


def _params_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--symbols", type=int, default=10, help="symbol count")
    sp.add_argument("--positions", type=int, default=4, help="code length")


def _params(args) -> GameParams:
    return GameParams(args.symbols, args.positions)


def _config_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument(
        "--no-symmetry", action="store_true", help="disable guess elimination"
    )
    sp.add_argument(
        "--no-prune", action="store_true", help="disable branch-and-bound"
    )
    sp.add_argument(
        "--product-cache",
        action="store_true",
        help="precompute the full pairwise response matrix",
    )


def _config(args) -> SolveConfig:
    return SolveConfig(
        prune=not args.no_prune,
        symmetry=not args.no_symmetry,
        deep_symmetry=not args.no_symmetry,
        product_cache=args.product_cache,
    )


def _parse_groups(text: str, params: GameParams) -> list[int]:
    classes = build_tables(params).classes
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if part.isdigit():
            idx = int(part)
            if not 0 <= idx < len(classes):
                raise SystemExit(f"group index {idx} out of range")
        else:
            if part not in classes.index_of_label:
                raise SystemExit(f"unknown response class {part!r}")
            idx = classes.index_of_label[part]
        out.append(idx)
    if not out:
        raise SystemExit("empty group request")
    return out


def _progress_printer(args):
    if args.quiet:
        return None

    def progress(g):
        print(
            f"group {g.label}: elements={g.size} subtree_total="
            f"{g.subtree_total} second_guess={g.second_guess} "
            f"time={g.seconds:.1f}s",
            file=sys.stderr,
            flush=True,
        )

    return progress


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def cmd_solve_min(args) -> int:
    from .solver import solve_initial_min

    params = _params(args)
    groups = _parse_groups(args.groups, params) if args.groups else None
    res = solve_initial_min(
        params,
        groups=groups,
        config=_config(args),
        workers=args.workers,
        progress=_progress_printer(args),
    )
    print(res.report())
    if args.out and not res.partial:
        Path(args.out).write_text(serialize(res.tree(), params))
        print(f"strategy written to {args.out}")
    elif args.out:
        print("partial solve; no strategy document written", file=sys.stderr)
    return 0


def cmd_solve_strongest(args) -> int:
    from .solver import eval_table, solve_initial_eval, value_to_winrate
    from .solver import _initial_eval_value

    params = _params(args)
    opponent = GuessDistribution.from_json(Path(args.vs).read_text())
    if opponent.space != params.space_size:
        raise SystemExit(
            f"opponent distribution covers {opponent.space} secrets, "
            f"game has {params.space_size}"
        )
    groups = _parse_groups(args.groups, params) if args.groups else None
    res = solve_initial_eval(
        opponent,
        params,
        groups=groups,
        config=_config(args),
        workers=args.workers,
        progress=_progress_printer(args),
    )
    print(res.report())
    if res.partial:
        if args.out:
            print("partial solve; no strategy document written", file=sys.stderr)
        return 0
    table = eval_table(opponent)
    value = _initial_eval_value(res, table)
    rate = value_to_winrate(value, opponent.space)
    tree = res.tree()
    dist = distribution(tree, params)
    print(f"value {value}  win rate vs opponent {rate:.7f}")
    print(
        f"total guesses {dist.total_guesses()}  average {dist.average():.3f}"
    )
    if args.out:
        Path(args.out).write_text(serialize(tree, params))
        print(f"strategy written to {args.out}")
    return 0


def cmd_verify(args) -> int:
    params = _params(args)
    tree = load(Path(args.tree).read_text(), params)
    report = verify(tree, params)
    print(report.summary())
    if report.dist is not None:
        print("distribution:", list(report.dist.counts[1:]))
    return 0 if report.passed else 1


def cmd_dist(args) -> int:
    params = _params(args)
    tree = load(Path(args.tree).read_text(), params)
    dist = distribution(tree, params)
    _write_or_print(dist.to_json() + "\n", args.out)
    return 0


def cmd_match(args) -> int:
    a = GuessDistribution.from_json(Path(args.dist_a).read_text())
    b = GuessDistribution.from_json(Path(args.dist_b).read_text())
    print(f"{match_winrate(a, b):.7f}")
    return 0


def cmd_bounds(args) -> int:
    params = _params(args)
    if args.recompute:
        from .solver import make_engine

        engine = make_engine(params, _for_bounds=True)
        kinds_list = (
            [args.kinds]
            if args.kinds
            else list(range(params.position_count, params.symbol_count + 1))
        )
        depths = [args.depth] if args.depth else [1, 2, 3]
        for kinds in kinds_list:
            row = []
            for depth in depths:
                t0 = time.time()
                v = bounds.compute_max_nodes(kinds, depth, engine)
                row.append(f"depth {depth}: {v} [{time.time() - t0:.1f}s]")
            print(f"kinds {kinds}: " + "; ".join(row))
        return 0
    table = bounds.table_for(params)
    print(table.to_text(), end="")
    for kinds in range(params.position_count, params.symbol_count + 1):
        segs = bounds.bound_segments(kinds, table)
        parts = []
        for lo, hi, slope, intercept in segs.segments:
            rng = f"{lo}..{hi}" if hi is not None else f"{lo}.."
            sign = "+" if intercept >= 0 else "-"
            parts.append(f"n in {rng}: {slope}n{sign}{abs(intercept)}")
        print(f"kinds {kinds}: " + "; ".join(parts))
    return 0


def cmd_heuristic(args) -> int:
    from .heuristics import SCORER_NAMES, greedy_strategy

    if args.scorer not in SCORER_NAMES:
        raise SystemExit(
            f"unknown scorer {args.scorer!r}; choose from {SCORER_NAMES}"
        )
    params = _params(args)
    tree = greedy_strategy(args.scorer, params)
    dist = distribution(tree, params)
    print(
        f"{args.scorer}: total {dist.total_guesses()} "
        f"average {dist.average():.4f} "
        f"distribution {list(dist.counts[1:])}"
    )
    if args.out:
        Path(args.out).write_text(serialize(tree, params))
        print(f"strategy written to {args.out}")
    return 0


def cmd_oracle(args) -> int:
    from .oracle import oracle_for

    params = _params(args)
    orc = oracle_for(params)
    total, _ = orc.min_total(range(orc.S))
    print(
        f"oracle minimum total for {args.symbols} symbols x "
        f"{args.positions} positions: {total} "
        f"(average {total / orc.S:.3f} over {orc.S} codes)"
    )
    return 0


def cmd_fixed_point(args) -> int:
    from .solver import fixed_point_check

    params = _params(args)
    tree = load(Path(args.tree).read_text(), params)
    is_fp, rate, value = fixed_point_check(
        tree, params, workers=args.workers
    )
    print(
        f"best-response value {value}  win rate {rate:.7f}  "
        f"fixed point: {'yes' if is_fp else 'no'}"
    )
    return 0


def cmd_play_engine(args) -> int:
    params = _params(args)
    tree = load(Path(args.tree).read_text(), params)
    classes = build_tables(params).classes

    secret = None
    if args.secret:
        secret = parse_code(args.secret, params)
    elif args.random_secret:
        rng = random.Random(args.seed)
        secret = rng.choice(list(enumerate_codes(params).codes))

    candidates = list(enumerate_codes(params).codes)
    node = tree
    turns = []
    out = sys.stdout
    while True:
        guess = node.guess
        print(f"GUESS {guess.text()}", file=out, flush=True)
        if secret is not None:
            bulls, cows = naive_product(guess, secret)
            label = class_label(bulls, cows)
            print(label, flush=True)
        else:
            line = sys.stdin.readline()
            if not line:
                print("ERROR no response", file=sys.stderr)
                return 2
            label = line.strip().upper()
            if label not in classes.index_of_label:
                print(f"ERROR unknown response {label!r}", file=sys.stderr)
                return 2
        turns.append({"guess": guess.text(), "response": label})
        if label == classes.labels[0]:
            print(f"SOLVED turns {len(turns)}", file=out, flush=True)
            break
        bc = classes.pairs[classes.index_of_label[label]]
        candidates = [
            c for c in candidates if naive_product(guess, c) == bc
        ]
        if not candidates:
            print(
                f"ERROR inconsistent at turn {len(turns)}: no secret "
                "matches every response",
                file=out,
                flush=True,
            )
            return 2
        if label not in node.children:
            print(
                f"ERROR strategy has no subtree for {label} at turn "
                f"{len(turns)}",
                file=out,
                flush=True,
            )
            return 2
        node = node.children[label]
    if args.transcript_json:
        doc = {"turns": turns}
        if secret is not None:
            doc["secret"] = secret.text()
        Path(args.transcript_json).write_text(json.dumps(doc, indent=1) + "\n")
    return 0


def cmd_bench(args) -> int:
    from .bench import run_benchmark

    return run_benchmark(args)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="moo",
        description="Exact fixed-strategy solvers for the MOO guessing game",
    )
    ap.add_argument(
        "--quiet", action="store_true", help="suppress progress output"
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve-min", help="minimum-total-guesses strategy")
    _params_args(sp)
    _config_args(sp)
    sp.add_argument("--groups", help="first-response groups, e.g. 0,2C,11")
    sp.add_argument("--out", help="write the strategy document here")
    sp.set_defaults(func=cmd_solve_min)

    sp = sub.add_parser(
        "solve-strongest", help="max-win-rate strategy vs a distribution"
    )
    _params_args(sp)
    _config_args(sp)
    sp.add_argument("--vs", required=True, help="opponent distribution JSON")
    sp.add_argument("--groups")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_solve_strongest)

    sp = sub.add_parser("verify", help="independently check a strategy")
    _params_args(sp)
    sp.add_argument("tree")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("dist", help="guess-count distribution of a strategy")
    _params_args(sp)
    sp.add_argument("tree")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_dist)

    sp = sub.add_parser("match", help="win rate of one distribution vs another")
    sp.add_argument("dist_a")
    sp.add_argument("dist_b")
    sp.set_defaults(func=cmd_match)

    sp = sub.add_parser("bounds", help="max-nodes table and bound segments")
    _params_args(sp)
    sp.add_argument("--recompute", action="store_true")
    sp.add_argument("--kinds", type=int)
    sp.add_argument("--depth", type=int)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("heuristic", help="greedy one-step-lookahead strategy")
    _params_args(sp)
    sp.add_argument("--scorer", default="larmouth")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_heuristic)

    sp = sub.add_parser("oracle", help="brute-force reduced-game solve")
    _params_args(sp)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("fixed-point", help="best-response self-map check")
    _params_args(sp)
    sp.add_argument("tree")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_fixed_point)

    sp = sub.add_parser(
        "play-engine",
        help="line protocol: engine prints GUESS, reads responses like 2B1C",
    )
    _params_args(sp)
    sp.add_argument("tree")
    sp.add_argument("--secret", help="answer internally for this secret")
    sp.add_argument(
        "--random-secret",
        action="store_true",
        help="answer internally for a seeded random secret",
    )
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--transcript-json", help="write the transcript here")
    sp.set_defaults(func=cmd_play_engine)

    sp = sub.add_parser("bench", help="compare compiled and python backends")
    _params_args(sp)
    sp.add_argument(
        "--full-game-groups",
        default="2B2C,1B3C,4C",
        help="full-game groups for the solve benchmark",
    )
    sp.set_defaults(func=cmd_bench)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
