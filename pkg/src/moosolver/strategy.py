"""Strategy trees: replay, verification, distributions, serialization.

A strategy tree fixes a guess for every response history.  Replay and
verification deliberately use the naive per-digit product rather than
the solver's lookup tables, so the checker does not share failure modes
with the search.

The document format is JSON with two fields per node, ``guess`` (digit
string) and ``children`` (object keyed by response-class labels in the
fixed class order); the ``children`` key is omitted on leaves, and a
missing all-bulls child marks the terminal hit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .core import (
    CandidateSet,
    Code,
    DEFAULT_PARAMS,
    GameParams,
    Response,
    ResponseClasses,
    build_tables,
    class_label,
    enumerate_codes,
    naive_product,
    parse_code,
)
from .errors import MismatchedSpaceError, MissingChildError, ParseError

MAX_SANE_DEPTH = 9


class StrategyTree:
    """A guess plus subtrees keyed by response-class label."""

    __slots__ = ("guess", "children")

    def __init__(
        self, guess: Code, children: Optional[dict[str, "StrategyTree"]] = None
    ) -> None:
        self.guess = guess
        self.children = children or {}

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, StrategyTree)
            and self.guess == other.guess
            and self.children == other.children
        )

    def __repr__(self) -> str:
        return f"StrategyTree({self.guess.text()!r}, {len(self.children)} children)"

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children.values())

    def walk(self) -> Iterator["StrategyTree"]:
        yield self
        for child in self.children.values():
            yield from child.walk()


@dataclass(frozen=True)
class GuessDistribution:
    """counts[n] = secrets resolved in exactly n guesses (index 0 unused)."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.counts or self.counts[0] != 0:
            raise ValueError("counts must carry a zero placeholder at index 0")

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "GuessDistribution":
        """From a 1-based list: counts[0] is the one-guess count."""
        return cls((0, *counts))

    @property
    def space(self) -> int:
        return sum(self.counts)

    @property
    def max_guesses(self) -> int:
        return len(self.counts) - 1

    def count(self, n: int) -> int:
        return self.counts[n] if 0 <= n < len(self.counts) else 0

    def total_guesses(self) -> int:
        return sum(n * c for n, c in enumerate(self.counts))

    def average(self) -> float:
        return self.total_guesses() / self.space

    def to_json(self) -> str:
        return json.dumps(list(self.counts))

    @classmethod
    def from_json(cls, text: str) -> "GuessDistribution":
        data = json.loads(text)
        if not isinstance(data, list) or not all(
            isinstance(x, int) and x >= 0 for x in data
        ):
            raise ParseError("distribution must be a JSON array of counts")
        return cls(tuple(data))


def replay(
    tree: StrategyTree,
    secret: Code,
    params: GameParams = DEFAULT_PARAMS,
) -> tuple[int, list[tuple[Code, Response]]]:
    """Walk the tree against a secret; returns guess count and transcript."""
    classes = ResponseClasses(params.position_count)
    node = tree
    transcript: list[tuple[Code, Response]] = []
    for turn in range(1, MAX_SANE_DEPTH + 2):
        bulls, cows = naive_product(node.guess, secret)
        resp = classes.response(bulls, cows)
        transcript.append((node.guess, resp))
        if bulls == params.position_count:
            return turn, transcript
        label = resp.label
        if label not in node.children:
            raise MissingChildError(
                f"no subtree for response {label} after guess "
                f"{node.guess.text()} (secret {secret.text()})"
            )
        node = node.children[label]
    raise MissingChildError(
        f"secret {secret.text()} unresolved after {MAX_SANE_DEPTH + 1} guesses"
    )


def distribution(
    tree: StrategyTree, params: GameParams = DEFAULT_PARAMS
) -> GuessDistribution:
    """Histogram of replay counts over every secret of the game."""
    counts: dict[int, int] = {}
    for secret in enumerate_codes(params):
        n, _ = replay(tree, secret, params)
        counts[n] = counts.get(n, 0) + 1
    top = max(counts)
    return GuessDistribution(tuple(counts.get(n, 0) for n in range(top + 1)))


@dataclass
class VerifyReport:
    """Outcome of a full independent check of a strategy tree."""

    passed: bool
    total_guesses: int
    average: float
    dist: Optional[GuessDistribution]
    max_depth: int
    violations: list[str] = field(default_factory=list)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"verify: {status}  total={self.total_guesses} "
            f"average={self.average:.3f} max_depth={self.max_depth}"
        ]
        lines.extend(f"  violation: {v}" for v in self.violations)
        return "\n".join(lines)


def verify(
    tree: StrategyTree, params: GameParams = DEFAULT_PARAMS
) -> VerifyReport:
    """Re-derive candidate sets from scratch along every path.

    Checks that all guesses are valid codes, candidate sets shrink
    strictly, every reachable response class has a subtree, and every
    secret terminates on an exact hit.  Violations are accumulated, not
    raised.
    """
    classes = ResponseClasses(params.position_count)
    violations: list[str] = []
    counts: dict[int, int] = {}
    max_depth = 0

    full = list(enumerate_codes(params).codes)

    def visit(node: StrategyTree, candidates: list[Code], depth: int, path: str):
        nonlocal max_depth
        max_depth = max(max_depth, depth)
        if depth > MAX_SANE_DEPTH:
            violations.append(f"{path}: depth {depth} beyond sanity cap")
            return
        guessed = node.guess
        if bin(guessed.mask).count("1") != params.position_count:
            violations.append(f"{path}: malformed guess {guessed!r}")
            return
        buckets: dict[str, list[Code]] = {}
        hit = False
        for secret in candidates:
            bulls, cows = naive_product(guessed, secret)
            if bulls == params.position_count:
                hit = True
                counts[depth] = counts.get(depth, 0) + 1
                continue
            buckets.setdefault(class_label(bulls, cows), []).append(secret)
        for label, sub in sorted(
            buckets.items(), key=lambda kv: classes.index_of_label[kv[0]]
        ):
            if label not in node.children:
                secrets = ", ".join(c.text() for c in sub[:5])
                more = "" if len(sub) <= 5 else f" (+{len(sub) - 5} more)"
                violations.append(
                    f"{path}: missing child {label} after guess "
                    f"{guessed.text()}; orphaned secrets {secrets}{more}"
                )
                continue
            child = node.children[label]
            if len(sub) >= len(candidates):
                violations.append(
                    f"{path}: candidate set did not shrink at {label}"
                )
                continue
            visit(child, sub, depth + 1, f"{path}.{label}")
        for label, child in node.children.items():
            if label not in buckets:
                if label == classes.labels[0] and hit:
                    violations.append(
                        f"{path}: explicit {label} child is never reachable"
                    )
                else:
                    violations.append(
                        f"{path}: child {label} has an empty candidate set"
                    )

    visit(tree, full, 1, "root")
    space = len(full)
    resolved = sum(counts.values())
    if resolved != space:
        violations.append(
            f"resolved {resolved} of {space} secrets"
        )
    total = sum(n * c for n, c in counts.items())
    dist = None
    if resolved == space and counts:
        top = max(counts)
        dist = GuessDistribution(
            tuple(counts.get(n, 0) for n in range(top + 1))
        )
    return VerifyReport(
        passed=not violations,
        total_guesses=total,
        average=total / space if space else 0.0,
        dist=dist,
        max_depth=max_depth,
        violations=violations,
    )


# ----------------------------------------------------------------------
# match analytics
# ----------------------------------------------------------------------


def match_winrate_exact(
    a: GuessDistribution, b: GuessDistribution
) -> Fraction:
    """P(a beats b) with draws worth half, secrets independent/uniform."""
    if a.space != b.space:
        raise MismatchedSpaceError(
            f"distribution spaces differ: {a.space} vs {b.space}"
        )
    top = max(a.max_guesses, b.max_guesses)
    wins2 = 0  # twice the win weight, to stay integral
    for n in range(1, top + 1):
        slower = sum(b.count(k) for k in range(n + 1, top + 1))
        wins2 += a.count(n) * (2 * slower + b.count(n))
    return Fraction(wins2, 2 * a.space * a.space)


def match_winrate(a: GuessDistribution, b: GuessDistribution) -> float:
    return float(match_winrate_exact(a, b))


# ----------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------


def _tree_to_obj(tree: StrategyTree, classes: ResponseClasses) -> dict:
    obj: dict = {"guess": tree.guess.text()}
    if tree.children:
        kids = {}
        for label in classes.labels:
            if label in tree.children:
                kids[label] = _tree_to_obj(tree.children[label], classes)
        obj["children"] = kids
    return obj


def serialize(
    tree: StrategyTree, params: GameParams = DEFAULT_PARAMS
) -> str:
    """Canonical JSON document: class keys in the fixed class order."""
    classes = ResponseClasses(params.position_count)
    return json.dumps(_tree_to_obj(tree, classes), indent=1) + "\n"


def _obj_to_tree(
    obj, classes: ResponseClasses, params: GameParams, location: str
) -> StrategyTree:
    if not isinstance(obj, dict):
        raise ParseError("node must be an object", location)
    if "guess" not in obj:
        raise ParseError("node missing 'guess'", location)
    try:
        guess = parse_code(obj["guess"], params)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"bad guess: {exc}", location) from exc
    unknown = set(obj) - {"guess", "children"}
    if unknown:
        raise ParseError(f"unknown fields {sorted(unknown)}", location)
    children = {}
    kids = obj.get("children", {})
    if not isinstance(kids, dict):
        raise ParseError("'children' must be an object", location)
    for label, sub in kids.items():
        if label not in classes.index_of_label:
            raise ParseError(
                f"unknown response class {label!r}",
                f"{location}.children" if location else "children",
            )
        children[label] = _obj_to_tree(
            sub,
            classes,
            params,
            f"{location}.children.{label}" if location else f"children.{label}",
        )
    return StrategyTree(guess, children)


def load(text: str, params: GameParams = DEFAULT_PARAMS) -> StrategyTree:
    classes = ResponseClasses(params.position_count)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return _obj_to_tree(obj, classes, params, "")


def tree_from_kernel(
    ktree, tables, classes: Optional[ResponseClasses] = None
) -> StrategyTree:
    """Convert the kernels' (guess_index, ((class, sub), ...)) tuples."""
    if classes is None:
        classes = tables.classes
    guess_idx, kids = ktree
    children = {}
    for k, sub in kids:
        children[classes.labels[k]] = tree_from_kernel(sub, tables, classes)
    return StrategyTree(tables.codes[guess_idx], children)
