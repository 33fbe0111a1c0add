import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from blockbloom.layout import (
    Layout,
    LayoutError,
    default_layout,
    enumerate_layouts,
    schedule,
    validate_layout,
    word_assignment,
)


def _brute_force_layouts(s):
    powers = [1 << i for i in range(8)]
    return sorted(
        Layout(t, p) for t, p in itertools.product(powers, powers) if t * p <= s
    )


def test_validate_accepts_two_by_four():
    assert validate_layout(Layout(2, 4), 8) is None


@pytest.mark.parametrize(
    "layout,s,fragment",
    [
        (Layout(3, 1), 8, "theta must be a power of two"),
        (Layout(1, 6), 8, "phi must be a power of two"),
        (Layout(4, 4), 8, "exceeds"),
        (Layout(1, 1), 6, "words per block"),
        (Layout(0, 1), 8, "theta"),
    ],
)
def test_validate_reports_violation(layout, s, fragment):
    with pytest.raises(LayoutError, match=fragment):
        validate_layout(layout, s)


def test_enumerate_s1():
    assert enumerate_layouts(1) == [Layout(1, 1)]


def test_enumerate_s8_exact():
    expected = [(1, 1), (1, 2), (1, 4), (1, 8), (2, 1), (2, 2), (2, 4), (4, 1), (4, 2), (8, 1)]
    assert [(l.theta, l.phi) for l in enumerate_layouts(8)] == expected


@pytest.mark.parametrize("s", [1, 2, 4, 8, 16, 32, 64])
def test_enumerate_matches_brute_force(s):
    assert enumerate_layouts(s) == _brute_force_layouts(s)


def test_enumerate_s4_count():
    assert len(enumerate_layouts(4)) == 6


def test_enumerate_rejects_non_power_of_two():
    with pytest.raises(LayoutError):
        enumerate_layouts(12)


# five reference layouts for an 8-word block, words listed per (step, lane)
@pytest.mark.parametrize(
    "layout,expected",
    [
        (Layout(1, 8), [[0, 1, 2, 3, 4, 5, 6, 7]]),
        (Layout(1, 1), [[0], [1], [2], [3], [4], [5], [6], [7]]),
        (Layout(2, 2), [[0, 1], [2, 3], [4, 5], [6, 7]]),
        (Layout(2, 4), [[0, 1, 2, 3], [4, 5, 6, 7]]),
        (Layout(4, 2), [[0, 1], [2, 3], [4, 5], [6, 7]]),
    ],
)
def test_reference_layout_word_orders(layout, expected):
    assert [words for _, _, words in schedule(layout, 8)] == expected


def test_word_assignment_examples():
    assert word_assignment(Layout(2, 2), 8, lane=1, step=0) == [2, 3]
    assert word_assignment(Layout(1, 8), 8, lane=0, step=0) == list(range(8))
    assert word_assignment(Layout(4, 2), 8, lane=3, step=0) == [6, 7]
    assert word_assignment(Layout(2, 2), 8, lane=0, step=1) == [4, 5]


def test_word_assignment_range_errors():
    with pytest.raises(LayoutError):
        word_assignment(Layout(2, 2), 8, lane=2, step=0)
    with pytest.raises(LayoutError):
        word_assignment(Layout(2, 2), 8, lane=0, step=2)


@given(st.integers(0, 6).flatmap(lambda e: st.tuples(st.just(1 << e), st.integers(0, e), st.integers(0, e))))
def test_partition_and_contiguity(args):
    s, t_exp, p_exp = args
    if t_exp + p_exp > s.bit_length() - 1:
        return
    layout = Layout(1 << t_exp, 1 << p_exp)
    seen = []
    for step in range(s // layout.stride):
        for lane in range(layout.theta):
            words = word_assignment(layout, s, lane, step)
            assert words[0] % layout.phi == 0
            assert words == list(range(words[0], words[0] + layout.phi))
            seen.extend(words)
    assert sorted(seen) == list(range(s))


def test_defaults():
    assert default_layout("contains", 16) == Layout(1, 4)
    assert default_layout("contains", 2) == Layout(1, 2)
    assert default_layout("add", 16) == Layout(1, 1)
    with pytest.raises(ValueError):
        default_layout("delete", 4)
