"""Finite compressions of shift-sum operators on ordered-configuration lattices.

Four index-set flavours are supported: the full ordered-configuration
lattice, its gap fiber (positive gap tuples), the unconstrained integer
lattice, and a ring-times-fiber hybrid whose leading coordinate is
periodic.  On any of them

  * the hopping part has matrix element  phi(xi_i - xi_k)  between
    enumerated points (differences wrap on the ring, with all lifts of a
    residue accumulated),
  * the potential part is diagonal with entry
    sum_eta psi(eta) * [xi - eta lies in the infinite index set],
    so membership is decided in the infinite set, never in the box; the
    finite matrix is then an exact principal submatrix of the infinite
    operator.

Two independent constructions, build_heisenberg_direct (hard-core hop
scanning) and cayley_laplacian (graph traversal), exist so the symbol
route can be cross-checked entry by entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lattice import (
    TruncationBox,
    box_size,
    enumerate_box,
    enumerate_gap_points,
    gap_at_least,
    is_ordered,
)
from .symbols import ShiftSymbol, check_symmetric_indicator

DENSE_LIMIT = 4000
APPLY_MATCH_TOL = 1e-13

FULL_ORDERED = "full_ordered"
FIBER = "fiber"
WHOLE_GROUP = "whole_group"
RING_CROSS_FIBER = "ring_cross_fiber"


@dataclass(frozen=True)
class LatticeDomain:
    """Infinite index set an operator is compressed from.

    kind selects the membership rule, dim the tuple length of its points,
    ring the period of the leading coordinate (ring_cross_fiber only).
    """

    kind: str
    dim: int
    ring: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in (FULL_ORDERED, FIBER, WHOLE_GROUP, RING_CROSS_FIBER):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.dim < 0 or (self.kind != FIBER and self.dim < 1):
            raise ValueError(f"bad dimension {self.dim} for {self.kind}")
        if self.kind == RING_CROSS_FIBER:
            if self.ring is None or self.ring < 1:
                raise ValueError("ring_cross_fiber needs ring >= 1")
        elif self.ring is not None:
            raise ValueError(f"{self.kind} takes no ring period")

    @classmethod
    def full_ordered(cls, n: int) -> "LatticeDomain":
        return cls(FULL_ORDERED, n)

    @classmethod
    def fiber(cls, gaps: int) -> "LatticeDomain":
        return cls(FIBER, gaps)

    @classmethod
    def whole_group(cls, dim: int) -> "LatticeDomain":
        return cls(WHOLE_GROUP, dim)

    @classmethod
    def ring_cross_fiber(cls, ring: int, gaps: int) -> "LatticeDomain":
        return cls(RING_CROSS_FIBER, 1 + gaps, ring)

    def member(self, point: tuple[int, ...]) -> bool:
        """Membership in the infinite index set (never box-truncated)."""
        if len(point) != self.dim:
            raise ValueError(f"point {point!r} has wrong length for dim {self.dim}")
        if self.kind == FULL_ORDERED:
            return is_ordered(point)
        if self.kind == FIBER:
            return all(g >= 1 for g in point)
        if self.kind == RING_CROSS_FIBER:
            return 0 <= point[0] < self.ring and all(g >= 1 for g in point[1:])
        return True

    def shift(self, point: tuple[int, ...], eta: tuple[int, ...]) -> tuple[int, ...]:
        """point + eta, wrapping the leading coordinate on the ring."""
        moved = tuple(p + e for p, e in zip(point, eta))
        if self.kind == RING_CROSS_FIBER:
            return (moved[0] % self.ring,) + moved[1:]
        return moved

    def shift_back(self, point: tuple[int, ...], eta: tuple[int, ...]) -> tuple[int, ...]:
        moved = tuple(p - e for p, e in zip(point, eta))
        if self.kind == RING_CROSS_FIBER:
            return (moved[0] % self.ring,) + moved[1:]
        return moved


def enumerate_points(domain: LatticeDomain, box: TruncationBox) -> list[tuple[int, ...]]:
    """Box enumeration in the domain's native coordinates."""
    if domain.kind == FULL_ORDERED:
        if box.fiber_mode or box.n != domain.dim:
            raise ValueError("full_ordered needs a full-mode box with matching n")
        return enumerate_box(box)
    if domain.kind == FIBER:
        if not box.fiber_mode or box.gap_count != domain.dim:
            raise ValueError("fiber domain needs a fiber-mode box with matching gap count")
        return enumerate_box(box)
    if domain.kind == RING_CROSS_FIBER:
        if box.fiber_mode or box.n != domain.dim:
            raise ValueError("ring domain needs a full-mode box with matching n")
        if box.first_range != (0, domain.ring - 1):
            raise ValueError(
                f"ring compression must span one period, first_range (0, {domain.ring - 1})"
            )
        return enumerate_gap_points(box)
    # whole group: the gap-coordinate window is just a finite set of tuples
    if box.fiber_mode or box.n != domain.dim:
        raise ValueError("whole_group needs a full-mode box with matching n")
    return enumerate_gap_points(box)


def _check_dense(box: TruncationBox) -> None:
    n = box_size(box)
    if n > DENSE_LIMIT:
        raise ValueError(
            f"box holds {n} points, above the dense limit {DENSE_LIMIT}; "
            "use OperatorSpec.apply / eig_lanczos for matrix-free work"
        )


def _realified(m: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    if np.max(np.abs(m.imag)) <= 1e-14 * scale:
        return np.ascontiguousarray(m.real)
    return m


@dataclass
class CompressedOperator:
    """Dense principal submatrix of an infinite shift-sum operator."""

    domain: LatticeDomain
    box: TruncationBox
    points: list[tuple[int, ...]]
    index: dict[tuple[int, ...], int]
    matrix: np.ndarray
    label: str = ""
    _eigh: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def gershgorin_bound(self) -> float:
        """Row-sum enclosure radius: every eigenvalue has |lam| <= bound."""
        return float(np.max(np.sum(np.abs(self.matrix), axis=1), initial=0.0))

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """Cached full eigendecomposition (ascending)."""
        if self._eigh is None:
            w, v = np.linalg.eigh(self.matrix)
            self._eigh = (w, v)
        return self._eigh

    def __add__(self, other: "CompressedOperator") -> "CompressedOperator":
        if not isinstance(other, CompressedOperator):
            return NotImplemented
        if other.points != self.points or other.domain != self.domain:
            raise ValueError("can only add compressions over the identical enumeration")
        return CompressedOperator(
            self.domain,
            self.box,
            self.points,
            self.index,
            _realified((self.matrix + 0j) + other.matrix),
            label=f"{self.label}+{other.label}",
        )


def _empty_matrix(points: list[tuple[int, ...]]) -> np.ndarray:
    return np.zeros((len(points), len(points)), dtype=complex)


def compress_toeplitz(
    phi: ShiftSymbol, domain: LatticeDomain, box: TruncationBox, label: str = "hop"
) -> CompressedOperator:
    """Hopping compression: entry (i, k) equals phi(xi_i - xi_k).

    On the ring all lifts of a residue accumulate into the same entry,
    which is exactly the symbol pushed forward to the quotient.
    """
    if phi.dim != domain.dim:
        raise ValueError(f"symbol dim {phi.dim} != domain dim {domain.dim}")
    _check_dense(box)
    points = enumerate_points(domain, box)
    index = {p: i for i, p in enumerate(points)}
    m = _empty_matrix(points)
    for eta, val in phi.entries.items():
        for k, p in enumerate(points):
            i = index.get(domain.shift(p, eta))
            if i is not None:
                m[i, k] += val
    return CompressedOperator(domain, box, points, index, _realified(m), label=label)


def compress_potential(
    psi: ShiftSymbol, domain: LatticeDomain, box: TruncationBox, label: str = "pot"
) -> CompressedOperator:
    """Diagonal compression sum_eta psi(eta) [xi - eta in the infinite set]."""
    if psi.dim != domain.dim:
        raise ValueError(f"symbol dim {psi.dim} != domain dim {domain.dim}")
    _check_dense(box)
    points = enumerate_points(domain, box)
    index = {p: i for i, p in enumerate(points)}
    m = _empty_matrix(points)
    for eta, val in psi.entries.items():
        for k, p in enumerate(points):
            if domain.member(domain.shift_back(p, eta)):
                m[k, k] += val
    return CompressedOperator(domain, box, points, index, _realified(m), label=label)


def toeplitz_plus_potential(
    phi: ShiftSymbol,
    psi: ShiftSymbol,
    domain: LatticeDomain,
    box: TruncationBox,
    label: str = "hop+pot",
) -> CompressedOperator:
    op = compress_toeplitz(phi, domain, box) + compress_potential(psi, domain, box)
    op.label = label
    return op


def cayley_laplacian(
    adjacency: ShiftSymbol, domain: LatticeDomain, box: TruncationBox
) -> CompressedOperator:
    """Graph Laplacian of the shift graph generated by a symmetric set.

    Built by direct traversal (off-diagonal +1 per in-box neighbour,
    diagonal minus the neighbour count in the infinite set), sharing no
    code with the symbol compressions; equals hop(indicator) +
    potential(-indicator) entry for entry.
    """
    check_symmetric_indicator(adjacency)
    if adjacency.dim != domain.dim:
        raise ValueError(f"adjacency dim {adjacency.dim} != domain dim {domain.dim}")
    _check_dense(box)
    points = enumerate_points(domain, box)
    index = {p: i for i, p in enumerate(points)}
    m = _empty_matrix(points)
    for k, p in enumerate(points):
        for eta in adjacency.entries:
            q = domain.shift_back(p, eta)
            if not domain.member(q):
                continue
            m[k, k] -= 1.0
            i = index.get(q)
            if i is not None:
                m[k, i] += 1.0
    return CompressedOperator(domain, box, points, index, _realified(m), label="cayley")


def build_heisenberg_direct(
    a: float, b: float, n: int, box: TruncationBox
) -> CompressedOperator:
    """Hard-core chain Hamiltonian assembled by scanning particle moves.

    For every configuration and every occupied site with an empty
    neighbour, the move contributes -2a into the re-sorted target
    configuration and +2b on the diagonal; hops whose target leaves the
    box are dropped (pure compression) while the diagonal always counts.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    domain = LatticeDomain.full_ordered(n)
    _check_dense(box)
    points = enumerate_points(domain, box)
    index = {p: i for i, p in enumerate(points)}
    m = _empty_matrix(points)
    for k, x in enumerate(points):
        occupied = set(x)
        for i, site in enumerate(x):
            for step in (1, -1):
                dest = site + step
                if dest in occupied:
                    continue
                m[k, k] += 2.0 * b
                target = tuple(sorted(x[:i] + (dest,) + x[i + 1 :]))
                t = index.get(target)
                if t is not None:
                    m[k, t] += -2.0 * a
    return CompressedOperator(domain, box, points, index, _realified(m), label="direct")


@dataclass
class OperatorSpec:
    """Symbols plus index set; supports matrix-free application.

    The shift tables are built once; apply costs O(points * support).
    """

    phi: ShiftSymbol
    psi: ShiftSymbol
    domain: LatticeDomain
    box: TruncationBox
    points: list[tuple[int, ...]] = field(init=False, repr=False)
    index: dict[tuple[int, ...], int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.phi.dim != self.domain.dim or self.psi.dim != self.domain.dim:
            raise ValueError("symbol dims must match the domain dim")
        self.points = enumerate_points(self.domain, self.box)
        self.index = {p: i for i, p in enumerate(self.points)}
        diag = np.zeros(len(self.points), dtype=complex)
        for eta, val in self.psi.entries.items():
            for k, p in enumerate(self.points):
                if self.domain.member(self.domain.shift_back(p, eta)):
                    diag[k] += val
        self._diag = diag
        shifts = []
        for eta, val in self.phi.entries.items():
            rows, cols = [], []
            for k, p in enumerate(self.points):
                i = self.index.get(self.domain.shift(p, eta))
                if i is not None:
                    rows.append(i)
                    cols.append(k)
            if rows:
                shifts.append((val, np.asarray(rows), np.asarray(cols)))
        self._shifts = shifts

    @property
    def size(self) -> int:
        return len(self.points)

    def apply(self, f: np.ndarray) -> np.ndarray:
        """Matrix-vector product without assembling the matrix."""
        vec = np.asarray(f)
        if vec.shape != (self.size,):
            raise ValueError(f"vector shape {vec.shape} does not match {self.size} points")
        out = self._diag * vec
        for val, rows, cols in self._shifts:
            out[rows] += val * vec[cols]
        return out

    def gershgorin_bound(self) -> float:
        """Symbol-level enclosure: max |diagonal| + sum |hop amplitudes|."""
        diag_max = float(np.max(np.abs(self._diag), initial=0.0))
        return diag_max + self.phi.abs_sum

    def assemble(self, label: str = "hop+pot") -> CompressedOperator:
        return toeplitz_plus_potential(self.phi, self.psi, self.domain, self.box, label)


def apply(spec: OperatorSpec, f: np.ndarray) -> np.ndarray:
    return spec.apply(f)


def indicator_project(
    op: CompressedOperator | OperatorSpec, pred, f: np.ndarray
) -> np.ndarray:
    """Zero out amplitudes at points where pred is false."""
    vec = np.asarray(f)
    if vec.shape != (len(op.points),):
        raise ValueError("vector length does not match the enumeration")
    mask = np.fromiter((bool(pred(p)) for p in op.points), dtype=bool, count=len(op.points))
    out = vec.copy()
    out[~mask] = 0
    return out


def gap_region_mask(op: CompressedOperator | OperatorSpec, j: int, n: int) -> np.ndarray:
    """Boolean mask of the enumeration where gap j is at least n."""
    kind = op.domain.kind
    if j < 2:
        raise ValueError(f"gap index j must be >= 2, got {j}")
    if kind == FULL_ORDERED:
        pred = gap_at_least(j, n)
        return np.fromiter((pred(p) for p in op.points), dtype=bool, count=len(op.points))
    if kind == FIBER:
        if j - 2 >= op.domain.dim:
            raise ValueError(f"gap index {j} out of range for {op.domain.dim} gaps")
        return np.fromiter((p[j - 2] >= n for p in op.points), dtype=bool, count=len(op.points))
    if kind == RING_CROSS_FIBER:
        if j - 1 >= op.domain.dim:
            raise ValueError(f"gap index {j} out of range")
        return np.fromiter((p[j - 1] >= n for p in op.points), dtype=bool, count=len(op.points))
    raise ValueError(f"domain kind {kind} has no gap structure")


def dump_matrix(op: CompressedOperator, path: str | Path) -> None:
    """Write nonzero entries as `i k re im` triplet lines, row-major."""
    m = op.matrix
    lines = []
    for i in range(m.shape[0]):
        for k in range(m.shape[1]):
            v = complex(m[i, k])
            if v != 0:
                lines.append(f"{i} {k} {v.real:.17g} {v.imag:.17g}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))
