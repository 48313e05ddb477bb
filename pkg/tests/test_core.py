import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

import moosolver as m
from moosolver.core import class_label
from moosolver.errors import (
    DuplicateDigitError,
    LengthError,
    NonDigitError,
)

CLASS_ORDER = (
    "4B", "3B", "2B2C", "2B1C", "2B", "1B3C", "1B2C",
    "1B1C", "1B", "4C", "3C", "2C", "1C", "0C",
)


def test_class_order_is_canonical(tables):
    assert tables.classes.labels == CLASS_ORDER
    assert tables.classes.all_bulls_index == 0


def test_parse_code_basic():
    code = m.parse_code("0123")
    assert code.digits() == (0, 1, 2, 3)
    assert code.mask == 0b0000001111
    assert code.text() == "0123"
    assert m.parse_code("3951").digits() == (3, 9, 5, 1)


def test_parse_code_errors():
    with pytest.raises(LengthError):
        m.parse_code("012")
    with pytest.raises(NonDigitError):
        m.parse_code("01a3")
    with pytest.raises(DuplicateDigitError):
        m.parse_code("0113")


def test_packing_layout():
    code = m.parse_code("3951")
    assert code.packed & 0xFFFF == 0x3951
    assert code.mask == (1 << 3) | (1 << 9) | (1 << 5) | (1 << 1)


def test_table_invariants(tables):
    assert tables.bulltable[0] == 4
    assert tables.cowtable[0] == 0
    p = 4
    # (3,1) and anything over four total are rejected
    assert tables.class_of[3 * (p + 1) + 1] == -1
    assert tables.class_of[4 * (p + 1) + 1] == -1


def test_game_example_transcript(tables):
    """The example game against secret 3951."""
    secret = m.parse_code("3951")
    guesses = ["0123", "1245", "2671", "2850", "9351", "3951"]
    labels = [
        m.moo_product(m.parse_code(g), secret, tables).label for g in guesses
    ]
    assert labels == ["2C", "2C", "1B", "1B", "2B2C", "4B"]


def test_product_identity(tables):
    for text in ("0123", "3951", "9876"):
        c = m.parse_code(text)
        r = m.moo_product(c, c, tables)
        assert (r.bulls, r.cows) == (4, 0)
        assert r.label == "4B"


def test_naive_matches_tables_on_sample(tables):
    rng = np.random.default_rng(1)
    codes = tables.codes
    for _ in range(2000):
        a = codes[rng.integers(len(codes))]
        b = codes[rng.integers(len(codes))]
        r = m.moo_product(a, b, tables)
        assert (r.bulls, r.cows) == m.naive_product(a, b)


@given(st.integers(0, 5039), st.integers(0, 5039))
def test_product_symmetric_and_bounded(tables, i, j):
    a, b = tables.codes[i], tables.codes[j]
    r1 = m.moo_product(a, b, tables)
    r2 = m.moo_product(b, a, tables)
    assert (r1.bulls, r1.cows) == (r2.bulls, r2.cows)
    assert r1.bulls + r1.cows <= 4
    assert (r1.bulls, r1.cows) != (3, 1)


def test_enumerate_sizes():
    assert len(m.enumerate_codes(m.GameParams(10, 4))) == 5040
    assert len(m.enumerate_codes(m.GameParams(4, 4))) == 24
    assert len(m.enumerate_codes(m.GameParams(5, 2))) == 20


def test_enumerate_ascending(tables):
    values = [c.value for c in tables.codes]
    assert values == sorted(values)
    assert tables.codes[0].text() == "0123"


def test_initial_partition_matches_published_counts(tables):
    """Element counts per first response for the fixed first guess."""
    cset = m.enumerate_codes()
    buckets = m.partition(cset, m.parse_code("0123"), tables)
    sizes = {
        tables.classes.labels[i]: len(b) for i, b in enumerate(buckets)
    }
    assert sizes == {
        "4B": 1, "2B2C": 6, "1B3C": 8, "4C": 9, "3B": 24, "2B1C": 72,
        "2B": 180, "1B2C": 216, "3C": 264, "0C": 360, "1B": 480,
        "1B1C": 720, "2C": 1260, "1C": 1440,
    }
    assert sum(sizes.values()) == 5040


def test_partition_disjoint_union(tables):
    cset = m.enumerate_codes(m.GameParams(5, 3))
    t = m.build_tables(m.GameParams(5, 3))
    guess = m.parse_code("012", m.GameParams(5, 3))
    buckets = m.partition(cset, guess, t)
    seen = set()
    for b in buckets:
        for c in b:
            assert c not in seen
            seen.add(c)
    assert len(seen) == len(cset)


def test_partition_brute_force_reduced():
    """Bucket sizes recomputed by brute force for the 5x2 game."""
    params = m.GameParams(5, 2)
    t = m.build_tables(params)
    cset = m.enumerate_codes(params)
    guess = m.parse_code("01", params)
    expected: dict[int, int] = {}
    for code in cset:
        b, c = m.naive_product(guess, code)
        k = t.classes.index_of[(b, c)]
        expected[k] = expected.get(k, 0) + 1
    buckets = m.partition(cset, guess, t)
    for k, b in enumerate(buckets):
        assert len(b) == expected.get(k, 0)
    assert sum(len(b) for b in buckets) == 20


def test_singleton_partition(tables):
    x = m.parse_code("0123")
    buckets = m.partition(m.CandidateSet([x]), x, tables)
    assert len(buckets[0]) == 1
    assert all(len(b) == 0 for b in buckets[1:])


def test_candidate_set_kinds():
    cset = m.CandidateSet(
        [m.parse_code("0123"), m.parse_code("0145")]
    )
    assert cset.kinds == 6


def test_class_label_rendering():
    assert class_label(4, 0) == "4B"
    assert class_label(0, 0) == "0C"
    assert class_label(2, 1) == "2B1C"
    assert class_label(0, 3) == "3C"


def test_reduced_class_tables():
    t2 = m.build_tables(m.GameParams(5, 2))
    assert t2.classes.labels == ("2B", "1B", "2C", "1C", "0C")
    # (1,1) is the impossible near-miss for two positions
    assert (1, 1) not in t2.classes.index_of
    t3 = m.build_tables(m.GameParams(6, 3))
    assert (2, 1) not in t3.classes.index_of
    assert t3.classes.labels[0] == "3B"


def test_code_ordering():
    a = m.parse_code("0123")
    b = m.parse_code("0124")
    assert a < b
    assert sorted([b, a]) == [a, b]


@given(st.permutations(range(10)))
def test_parse_render_roundtrip(perm):
    text = "".join(str(d) for d in perm[:4])
    assert m.parse_code(text).text() == text
