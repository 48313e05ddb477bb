"""Code representation, response classes, and lookup-table products.

A code is packed into a 26-bit integer: the low 16 bits hold the digits,
four bits per digit with the most significant digit in the highest used
nibble, and the high 10 bits hold a presence mask with bit ``d`` set iff
digit ``d`` appears.  With this layout two table lookups compute a full
bulls/cows response:

* ``bulltable[(a ^ b) & 0xffff]`` counts zero nibbles of the XOR, i.e.
  positions where the digits agree (bulls);
* ``cowtable[(a & b) >> 16]`` counts shared digits, so cows are that
  popcount minus the bulls.

Responses are mapped onto a fixed list of classes.  For the standard
four-position game that list is 4B, 3B, 2B2C, 2B1C, 2B, 1B3C, 1B2C,
1B1C, 1B, 4C, 3C, 2C, 1C, 0C; the pair (3, 1) is impossible because a
lone misplaced digit would have nowhere to go.  Reduced games generate
the analogous list with the ``(positions - 1, 1)`` pair excluded.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

from .errors import DuplicateDigitError, LengthError, NonDigitError

MASK_SHIFT = 16


@dataclass(frozen=True)
class GameParams:
    """Game geometry: how many symbols exist and how long codes are."""

    symbol_count: int = 10
    position_count: int = 4

    def __post_init__(self) -> None:
        if not (2 <= self.position_count <= self.symbol_count <= 10):
            raise ValueError(
                "need 2 <= position_count <= symbol_count <= 10, got "
                f"positions={self.position_count} symbols={self.symbol_count}"
            )

    @property
    def space_size(self) -> int:
        n = 1
        for i in range(self.position_count):
            n *= self.symbol_count - i
        return n


DEFAULT_PARAMS = GameParams()


def pack_digits(digits: Sequence[int]) -> int:
    """Pack distinct digits into the 26-bit representation."""
    value = 0
    mask = 0
    for d in digits:
        value = (value << 4) | d
        mask |= 1 << d
    return (mask << MASK_SHIFT) | value


@functools.total_ordering
class Code:
    """A packed code. Orders and compares by digit-string value."""

    __slots__ = ("packed",)

    def __init__(self, packed: int) -> None:
        self.packed = packed

    @classmethod
    def from_digits(cls, digits: Sequence[int]) -> "Code":
        return cls(pack_digits(digits))

    @property
    def mask(self) -> int:
        return self.packed >> MASK_SHIFT

    @property
    def value(self) -> int:
        """The digit string read as a (BCD) integer; defines ordering."""
        return self.packed & 0xFFFF

    def digits(self) -> tuple[int, ...]:
        n = bin(self.mask).count("1")
        v = self.packed
        return tuple((v >> (4 * (n - 1 - i))) & 0xF for i in range(n))

    def text(self) -> str:
        return "".join(str(d) for d in self.digits())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Code) and self.packed == other.packed

    def __lt__(self, other: "Code") -> bool:
        return self.value < other.value

    def __hash__(self) -> int:
        return hash(self.packed)

    def __repr__(self) -> str:
        return f"Code({self.text()!r})"


def parse_code(text: str, params: GameParams = DEFAULT_PARAMS) -> Code:
    """Parse a digit string like ``"0123"`` (leading zero allowed)."""
    if len(text) != params.position_count:
        raise LengthError(
            f"expected {params.position_count} digits, got {len(text)!r}"
        )
    digits = []
    for ch in text:
        if not ch.isdigit():
            raise NonDigitError(f"non-digit character {ch!r} in {text!r}")
        d = int(ch)
        if d >= params.symbol_count:
            raise NonDigitError(
                f"digit {d} outside symbol range 0..{params.symbol_count - 1}"
            )
        digits.append(d)
    if len(set(digits)) != len(digits):
        raise DuplicateDigitError(f"repeated digit in {text!r}")
    return Code.from_digits(digits)


@dataclass(frozen=True)
class Response:
    """A bulls/cows pair together with its class index."""

    bulls: int
    cows: int
    class_index: int

    @property
    def label(self) -> str:
        return class_label(self.bulls, self.cows)


def class_label(bulls: int, cows: int) -> str:
    if bulls and cows:
        return f"{bulls}B{cows}C"
    if bulls:
        return f"{bulls}B"
    return f"{cows}C"


class ResponseClasses:
    """The ordered list of reachable (bulls, cows) pairs for a geometry."""

    def __init__(self, position_count: int) -> None:
        p = position_count
        pairs = []
        for b in range(p, -1, -1):
            for c in range(p - b, -1, -1):
                if (b, c) == (p - 1, 1):
                    continue
                pairs.append((b, c))
        self.position_count = p
        self.pairs: tuple[tuple[int, int], ...] = tuple(pairs)
        self.labels: tuple[str, ...] = tuple(class_label(b, c) for b, c in pairs)
        self.index_of: dict[tuple[int, int], int] = {
            bc: i for i, bc in enumerate(pairs)
        }
        self.index_of_label: dict[str, int] = {
            lab: i for i, lab in enumerate(self.labels)
        }
        self.all_bulls_index = 0  # (p, 0) always sorts first

    def __len__(self) -> int:
        return len(self.pairs)

    def response(self, bulls: int, cows: int) -> Response:
        return Response(bulls, cows, self.index_of[(bulls, cows)])


class CandidateSet:
    """An ascending-ordered set of codes plus its distinct-digit count."""

    __slots__ = ("codes", "kinds")

    def __init__(self, codes: Iterable[Code]) -> None:
        self.codes: tuple[Code, ...] = tuple(sorted(codes))
        union = 0
        for c in self.codes:
            union |= c.mask
        self.kinds: int = bin(union).count("1")

    def __len__(self) -> int:
        return len(self.codes)

    def __iter__(self):
        return iter(self.codes)

    def __contains__(self, code: Code) -> bool:
        return any(c == code for c in self.codes)

    def digit_union_mask(self) -> int:
        union = 0
        for c in self.codes:
            union |= c.mask
        return union


class LookupTables:
    """Product tables and the enumerated code space for one geometry.

    Immutable after construction; safe to share between workers.
    """

    def __init__(self, params: GameParams) -> None:
        p = params.position_count
        self.params = params
        self.classes = ResponseClasses(p)

        bull = np.zeros(1 << 16, dtype=np.uint8)
        for nib in range(p):
            chunk = (np.arange(1 << 16) >> (4 * nib)) & 0xF
            bull += (chunk == 0).astype(np.uint8)
        self.bulltable = bull

        masks = np.arange(1 << 10, dtype=np.uint32)
        self.cowtable = np.array(
            [bin(m).count("1") for m in masks], dtype=np.uint8
        )

        cls = np.full((p + 1) * (p + 1), -1, dtype=np.int8)
        for (b, c), i in self.classes.index_of.items():
            cls[b * (p + 1) + c] = i
        self.class_of = cls

        codes = [
            Code.from_digits(perm)
            for perm in permutations(range(params.symbol_count), p)
        ]
        codes.sort()
        self.codes: tuple[Code, ...] = tuple(codes)
        self.packed = np.array([c.packed for c in codes], dtype=np.int32)
        self.digit_rows = np.array(
            [c.digits() for c in codes], dtype=np.uint8
        )
        self.index_of_packed: dict[int, int] = {
            c.packed: i for i, c in enumerate(codes)
        }

    @property
    def space_size(self) -> int:
        return len(self.codes)

    def index_of(self, code: Code) -> int:
        return self.index_of_packed[code.packed]

    def product_parts(self, a: int, b: int) -> tuple[int, int]:
        """Bulls and cows for two packed codes via the tables."""
        bulls = int(self.bulltable[(a ^ b) & 0xFFFF])
        cows = int(self.cowtable[(a & b) >> MASK_SHIFT]) - bulls
        return bulls, cows


@functools.lru_cache(maxsize=None)
def build_tables(params: GameParams = DEFAULT_PARAMS) -> LookupTables:
    return LookupTables(params)


def moo_product(a: Code, b: Code, tables: LookupTables) -> Response:
    """The bulls/cows response between two codes, via the lookup tables."""
    bulls, cows = tables.product_parts(a.packed, b.packed)
    return tables.classes.response(bulls, cows)


def naive_product(a: Code, b: Code) -> tuple[int, int]:
    """Per-digit bulls/cows comparison, independent of the lookup tables.

    Kept deliberately table-free so verification does not share failure
    modes with the fast path.
    """
    da, db = a.digits(), b.digits()
    bulls = sum(1 for x, y in zip(da, db) if x == y)
    shared = len(set(da) & set(db))
    return bulls, shared - bulls


def enumerate_codes(params: GameParams = DEFAULT_PARAMS) -> CandidateSet:
    """All codes of the game, ascending."""
    return CandidateSet(build_tables(params).codes)


def partition(
    cset: CandidateSet, guess: Code, tables: LookupTables
) -> list[CandidateSet]:
    """Split a candidate set by the response each member gives to a guess.

    Returns one (possibly empty) bucket per response class, in class
    order; buckets are disjoint and their union is the input set.
    """
    buckets: list[list[Code]] = [[] for _ in range(len(tables.classes))]
    g = guess.packed
    for code in cset:
        bulls, cows = tables.product_parts(g, code.packed)
        buckets[tables.classes.index_of[(bulls, cows)]].append(code)
    return [CandidateSet(b) for b in buckets]
