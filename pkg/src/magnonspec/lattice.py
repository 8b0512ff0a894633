"""Strictly ordered integer configurations and their gap coordinates.

A configuration of N hard-core particles on the line is a strictly
increasing integer tuple x = (x_1 < ... < x_N).  The invertible change of
variables

    to_gaps(x)   = (x_1, x_2 - x_1, ..., x_N - x_{N-1})
    from_gaps(z) = (z_1, z_1 + z_2, ..., z_1 + ... + z_N)

maps the set of ordered configurations onto Z x (N*)^(N-1): the first slot
is the leading particle position, the rest are the inter-particle gaps,
each at least 1.  Truncation boxes live in gap coordinates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

DEFAULT_SIZE_CAP = 200_000


def to_gaps(x: tuple[int, ...]) -> tuple[int, ...]:
    """First coordinate plus successive differences.  Additive on Z^N."""
    if len(x) == 0:
        raise ValueError("empty tuple has no gap coordinates")
    return (x[0],) + tuple(x[i] - x[i - 1] for i in range(1, len(x)))


def from_gaps(z: tuple[int, ...]) -> tuple[int, ...]:
    """Partial sums; inverse of to_gaps."""
    if len(z) == 0:
        raise ValueError("empty tuple has no position coordinates")
    out = [z[0]]
    for g in z[1:]:
        out.append(out[-1] + g)
    return tuple(out)


def is_ordered(x: tuple[int, ...]) -> bool:
    return len(x) >= 1 and all(x[i] < x[i + 1] for i in range(len(x) - 1))


def is_gap_point(z: tuple[int, ...]) -> bool:
    """True when every slot past the first is a positive gap."""
    return len(z) >= 1 and all(g >= 1 for g in z[1:])


def check_ordered(x: tuple[int, ...]) -> tuple[int, ...]:
    if not is_ordered(x):
        raise ValueError(f"not a strictly increasing configuration: {x!r}")
    return x


def check_gaps(z: tuple[int, ...]) -> tuple[int, ...]:
    if not is_gap_point(z):
        raise ValueError(f"not a valid gap point (gaps must be >= 1): {z!r}")
    return z


def wrap_torus(tau: float) -> float:
    """Reduce a quasi-momentum to the fundamental window [0, 1)."""
    t = float(tau) % 1.0
    return 0.0 if t == 1.0 else t


@dataclass(frozen=True)
class TruncationBox:
    """Finite window in gap coordinates.

    n is the particle number.  With first_range = (lo, hi) the box holds
    full configurations whose leading position lies in [lo, hi] and whose
    gaps lie in [1, gap_max]; with first_range None it holds bare gap
    tuples (fiber mode), one slot per gap, n - 1 of them.
    """

    n: int
    gap_max: int
    first_range: tuple[int, int] | None = None
    size_cap: int = DEFAULT_SIZE_CAP

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need n >= 1, got {self.n}")
        if self.gap_max < 1:
            raise ValueError(f"need gap_max >= 1, got {self.gap_max}")
        if self.first_range is not None:
            lo, hi = self.first_range
            if lo > hi:
                raise ValueError(f"empty first_range {self.first_range}")

    @property
    def fiber_mode(self) -> bool:
        return self.first_range is None

    @property
    def gap_count(self) -> int:
        return self.n - 1


def box_size(box: TruncationBox) -> int:
    size = box.gap_max ** box.gap_count
    if box.first_range is not None:
        lo, hi = box.first_range
        size *= hi - lo + 1
    return size


def enumerate_gap_points(box: TruncationBox) -> list[tuple[int, ...]]:
    """Lexicographic listing of the box in gap coordinates.

    Full mode yields (z_1, z_2, ..., z_n) with z_1 in first_range; fiber
    mode yields (z_2, ..., z_n).  A zero-gap fiber box (n = 1) yields the
    single empty tuple, the scalar index set.
    """
    size = box_size(box)
    if size > box.size_cap:
        raise ValueError(
            f"box enumerates {size} points, above the cap {box.size_cap}; "
            "shrink the box or raise size_cap"
        )
    gap_axes = [range(1, box.gap_max + 1)] * box.gap_count
    if box.first_range is None:
        return list(itertools.product(*gap_axes))
    lo, hi = box.first_range
    return list(itertools.product(range(lo, hi + 1), *gap_axes))


def enumerate_box(box: TruncationBox) -> list[tuple[int, ...]]:
    """Lattice points of the box: configurations in full mode, gap tuples
    in fiber mode."""
    pts = enumerate_gap_points(box)
    if box.fiber_mode:
        return pts
    return [from_gaps(z) for z in pts]


def gap_at_least(j: int, n: int):
    """Predicate on configurations: gap j (between particles j-1 and j,
    1-based) is at least n.

    Used to carve out the region where two neighbours are far apart.
    """
    if j < 2:
        raise ValueError(f"gap index j must be >= 2, got {j}")

    def pred(x: tuple[int, ...]) -> bool:
        if j > len(x):
            raise ValueError(f"gap index {j} out of range for {len(x)} particles")
        return x[j - 1] - x[j - 2] >= n

    return pred
