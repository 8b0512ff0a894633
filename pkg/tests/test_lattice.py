"""Gap coordinates, truncation boxes, region predicates."""

import numpy as np
import pytest

from magnonspec.lattice import (
    DEFAULT_SIZE_CAP,
    TruncationBox,
    box_size,
    enumerate_box,
    enumerate_gap_points,
    from_gaps,
    gap_at_least,
    is_gap_point,
    is_ordered,
    to_gaps,
    wrap_torus,
)


def test_to_gaps_frozen():
    assert to_gaps((3, 5, 9)) == (3, 2, 4)
    assert to_gaps((0,)) == (0,)
    assert to_gaps((-4, -1)) == (-4, 3)


def test_from_gaps_frozen():
    assert from_gaps((3, 2, 4)) == (3, 5, 9)
    assert from_gaps((7,)) == (7,)


def test_gap_round_trip_random():
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        x = tuple(np.sort(rng.choice(2000, size=n, replace=False)) - 1000)
        assert from_gaps(to_gaps(x)) == x
        g = to_gaps(x)
        assert g[0] == x[0] and all(v >= 1 for v in g[1:])


def test_translation_moves_only_leading_gap():
    rng = np.random.default_rng(4)
    for _ in range(100):
        n = int(rng.integers(1, 6))
        x = tuple(np.sort(rng.choice(400, size=n, replace=False)))
        c = int(rng.integers(-50, 50))
        shifted = tuple(v + c for v in x)
        assert to_gaps(shifted) == (to_gaps(x)[0] + c,) + to_gaps(x)[1:]


def test_maps_reject_empty():
    with pytest.raises(ValueError):
        to_gaps(())
    with pytest.raises(ValueError):
        from_gaps(())


def test_orderedness_predicates():
    assert is_ordered((0, 1, 5))
    assert not is_ordered((0, 0))
    assert not is_ordered((3, 1))
    assert is_gap_point((-7, 1, 2))
    assert not is_gap_point((0, 0, 1))
    # single particle: any integer is both
    assert is_ordered((12,)) and is_gap_point((-12,))


def test_wrap_torus():
    assert wrap_torus(0.25) == 0.25
    assert wrap_torus(1.25) == pytest.approx(0.25)
    assert wrap_torus(-0.25) == pytest.approx(0.75)
    assert wrap_torus(3.0) == 0.0


def test_box_validation():
    with pytest.raises(ValueError):
        TruncationBox(n=0, gap_max=3)
    with pytest.raises(ValueError):
        TruncationBox(n=2, gap_max=0)
    with pytest.raises(ValueError):
        TruncationBox(n=2, gap_max=3, first_range=(4, 2))


def test_enumerate_full_box_frozen():
    box = TruncationBox(n=2, gap_max=2, first_range=(0, 1))
    assert enumerate_box(box) == [(0, 1), (0, 2), (1, 2), (1, 3)]
    assert box_size(box) == 4


def test_enumerate_fiber_box_frozen():
    box = TruncationBox(n=3, gap_max=2)
    assert box.fiber_mode and box.gap_count == 2
    assert enumerate_box(box) == [(1, 1), (1, 2), (2, 1), (2, 2)]


def test_gap_points_are_valid_and_counted():
    box = TruncationBox(n=3, gap_max=4, first_range=(-2, 2))
    pts = enumerate_gap_points(box)
    assert len(pts) == box_size(box) == 5 * 4 * 4
    assert all(is_gap_point(p) for p in pts)
    configs = enumerate_box(box)
    assert all(is_ordered(x) for x in configs)
    assert configs == sorted(configs)


def test_size_cap_enforced():
    box = TruncationBox(n=4, gap_max=10, first_range=(0, 99), size_cap=1000)
    with pytest.raises(ValueError, match="above the cap"):
        enumerate_gap_points(box)
    assert DEFAULT_SIZE_CAP >= 100_000


def test_gap_at_least_predicate():
    pred = gap_at_least(2, 3)
    assert pred((0, 3))
    assert not pred((0, 2))
    assert gap_at_least(3, 2)((0, 1, 5))
    with pytest.raises(ValueError):
        gap_at_least(1, 2)
    with pytest.raises(ValueError):
        gap_at_least(3, 1)((0, 4))
