"""Finitely supported shift symbols and their partial Fourier transforms.

A shift symbol is a finitely supported map from integer d-tuples to
complex amplitudes; it encodes the hopping operator sum_eta rho(eta) *
(shift by eta).  Everything downstream (fiber reduction, band formulas,
essential spectra) is produced from two operations on symbols:

  * fiber_symbol: pull a position-picture symbol back to gap coordinates
    and Fourier-transform the leading-position slot at quasi-momentum tau,
  * subfiber_symbol: Fourier-transform away one labelled gap slot.

Slots carry integer coordinate labels so that repeated reductions keep
track of which gap they act on.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .lattice import to_gaps

DROP_TOL = 1e-15
HERMITIAN_TOL = 1e-12


def _normalize(dim: int, raw: Mapping[tuple[int, ...], complex]) -> dict[tuple[int, ...], complex]:
    out: dict[tuple[int, ...], complex] = {}
    for key, val in raw.items():
        key = tuple(int(k) for k in key)
        if len(key) != dim:
            raise ValueError(f"entry key {key!r} has length {len(key)}, symbol dim is {dim}")
        v = complex(val)
        if abs(v) >= DROP_TOL:
            out[key] = v
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class ShiftSymbol:
    """Finite map shift-vector -> amplitude, with labelled slots."""

    dim: int
    entries: dict[tuple[int, ...], complex]
    labels: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.dim < 0:
            raise ValueError("dim must be >= 0")
        object.__setattr__(self, "entries", _normalize(self.dim, self.entries))
        labels = self.labels if self.labels else tuple(range(1, self.dim + 1))
        if len(labels) != self.dim or len(set(labels)) != self.dim:
            raise ValueError(f"labels {labels!r} do not fit dim {self.dim}")
        object.__setattr__(self, "labels", tuple(int(l) for l in labels))

    def support(self) -> list[tuple[int, ...]]:
        return list(self.entries.keys())

    def scalar(self) -> complex:
        """Value of a zero-dimensional symbol (empty key)."""
        if self.dim != 0:
            raise ValueError(f"scalar() needs dim 0, have dim {self.dim}")
        return self.entries.get((), 0j)

    @property
    def max_abs(self) -> float:
        return max((abs(v) for v in self.entries.values()), default=0.0)

    @property
    def abs_sum(self) -> float:
        return sum(abs(v) for v in self.entries.values())

    @property
    def hermitian(self) -> bool:
        """True when rho(-eta) = conj(rho(eta)) for every entry."""
        tol = HERMITIAN_TOL * max(1.0, self.max_abs)
        for key, val in self.entries.items():
            mirror = tuple(-k for k in key)
            if abs(self.entries.get(mirror, 0j) - val.conjugate()) > tol:
                return False
        return True

    def __add__(self, other: "ShiftSymbol") -> "ShiftSymbol":
        if not isinstance(other, ShiftSymbol):
            return NotImplemented
        if other.dim != self.dim or other.labels != self.labels:
            raise ValueError("can only add symbols with identical dim and labels")
        merged = dict(self.entries)
        for key, val in other.entries.items():
            merged[key] = merged.get(key, 0j) + val
        return ShiftSymbol(self.dim, merged, self.labels)

    def __mul__(self, scale: complex) -> "ShiftSymbol":
        return ShiftSymbol(
            self.dim, {k: v * scale for k, v in self.entries.items()}, self.labels
        )

    __rmul__ = __mul__

    def __neg__(self) -> "ShiftSymbol":
        return self * (-1.0)


def heisenberg_symbols(a: float, b: float, n: int) -> tuple[ShiftSymbol, ShiftSymbol]:
    """Hopping and potential symbols of the n-particle chain Hamiltonian.

    Support is the 2n signed unit vectors; hopping weight -2a, potential
    weight 2b on every one of them.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    units: list[tuple[int, ...]] = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        units.append(tuple(e))
        e2 = [0] * n
        e2[i] = -1
        units.append(tuple(e2))
    phi = ShiftSymbol(n, {u: -2.0 * a for u in units})
    psi = ShiftSymbol(n, {u: 2.0 * b for u in units})
    return phi, psi


def to_gap_picture(rho: ShiftSymbol) -> ShiftSymbol:
    """Push the support through the gap-coordinate change (bijective, so
    no collisions); amplitudes are untouched."""
    if rho.dim < 1:
        raise ValueError("gap picture needs dim >= 1")
    return ShiftSymbol(
        rho.dim, {to_gaps(key): val for key, val in rho.entries.items()}, rho.labels
    )


def _fourier_out(rho: ShiftSymbol, pos: int, tau: float) -> ShiftSymbol:
    # sum_z e^{-2 pi i z tau} rho(..., z at slot pos, ...)
    out: dict[tuple[int, ...], complex] = {}
    for key, val in rho.entries.items():
        rest = key[:pos] + key[pos + 1 :]
        w = cmath.exp(-2j * cmath.pi * key[pos] * tau)
        out[rest] = out.get(rest, 0j) + w * val
    labels = rho.labels[:pos] + rho.labels[pos + 1 :]
    return ShiftSymbol(rho.dim - 1, out, labels)


def fiber_symbol(rho: ShiftSymbol, tau: float) -> ShiftSymbol:
    """Reduce a position-picture symbol to its quasi-momentum fiber.

    Pulls rho back to gap coordinates and Fourier-transforms the leading
    slot at tau; the result acts on the gap lattice alone and keeps the
    gap labels 2..n.
    """
    if rho.dim < 2:
        raise ValueError(f"fiber reduction needs dim >= 2, got {rho.dim}")
    return _fourier_out(to_gap_picture(rho), 0, tau)


def subfiber_symbol(rho: ShiftSymbol, j: int, tau: float) -> ShiftSymbol:
    """Fourier-transform away the slot labelled j at angle tau."""
    if j not in rho.labels:
        raise ValueError(f"no slot labelled {j} in symbol with labels {rho.labels}")
    return _fourier_out(rho, rho.labels.index(j), tau)


def fourier_eval(rho: ShiftSymbol, taus: Iterable[float]) -> complex:
    """Full trigonometric sum sum_eta rho(eta) e^{-2 pi i eta . tau}.

    Real-valued (up to roundoff) whenever rho is hermitian.
    """
    tvec = tuple(float(t) for t in taus)
    if len(tvec) != rho.dim:
        raise ValueError(f"need {rho.dim} angles, got {len(tvec)}")
    total = 0j
    for key, val in rho.entries.items():
        phase = sum(k * t for k, t in zip(key, tvec))
        total += val * cmath.exp(-2j * cmath.pi * phase)
    return total


def check_symmetric_indicator(rho: ShiftSymbol) -> ShiftSymbol:
    """Validate an adjacency set: 0/1 values, symmetric support, no origin."""
    zero = (0,) * rho.dim
    if zero in rho.entries:
        raise ValueError("adjacency set must not contain the origin")
    for key, val in rho.entries.items():
        if abs(val - 1.0) > 1e-12:
            raise ValueError(f"adjacency values must be 1, got {val} at {key}")
        mirror = tuple(-k for k in key)
        if mirror not in rho.entries:
            raise ValueError(f"adjacency set not symmetric: {key} present, {mirror} missing")
    return rho


def read_symbol_file(path: str | Path) -> ShiftSymbol:
    """Parse `z_1 ... z_d re im` lines; `#` starts a comment."""
    entries: dict[tuple[int, ...], complex] = {}
    dim: int | None = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise ValueError(f"{path}:{lineno}: need `z_1 ... z_d re im`")
        if dim is None:
            dim = len(tokens) - 2
        if len(tokens) != dim + 2:
            raise ValueError(f"{path}:{lineno}: expected {dim + 2} fields, got {len(tokens)}")
        try:
            key = tuple(int(t) for t in tokens[:dim])
            val = complex(float(tokens[dim]), float(tokens[dim + 1]))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
        if key in entries:
            raise ValueError(f"{path}:{lineno}: duplicate shift vector {key}")
        entries[key] = val
    if dim is None:
        raise ValueError(f"{path}: no symbol entries found")
    return ShiftSymbol(dim, entries)


def write_symbol_file(rho: ShiftSymbol, path: str | Path) -> None:
    lines = [f"# shift symbol, dim {rho.dim}"]
    for key, val in rho.entries.items():
        coords = " ".join(str(k) for k in key)
        lines.append(f"{coords} {val.real:.17g} {val.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")
