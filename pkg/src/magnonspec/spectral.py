"""Spectra of the compressed operators and their fiber decompositions.

The full Hamiltonian over ordered configurations decomposes over a
quasi-momentum tau into fibers acting on the gap lattice alone; each
fiber in turn has its essential spectrum exhausted by one-gap-collapsed
subfibers swept over a second angle.  This module computes all three
levels numerically:

    fiber_hamiltonian      gap-lattice compression at fixed tau
    subfiber_spectrum      spectrum after collapsing one gap at tau'
    fiber_essential_spectrum   union of subfiber spectra over tau'
    full_spectrum_union    union of fiber spectra over tau

plus dense/Lanczos eigensolvers, Hausdorff comparisons, an exact
ring-periodisation consistency check, and a participation-ratio filter
separating gap-localised bound states from band states.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .lattice import TruncationBox, wrap_torus
from .operators import (
    FIBER,
    FULL_ORDERED,
    RING_CROSS_FIBER,
    CompressedOperator,
    LatticeDomain,
    toeplitz_plus_potential,
)
from .symbols import ShiftSymbol, fiber_symbol, fourier_eval, subfiber_symbol, to_gap_picture

HERMITICITY_TOL = 1e-12
DEFAULT_GRID = 64
BLOCH_TOL = 1e-10


class LanczosConvergenceError(RuntimeError):
    """Raised when the iteration cap is hit before the Ritz residuals drop."""


@dataclass(frozen=True)
class SpectrumSet:
    """Sorted finite sample of a spectrum, with a short provenance note."""

    values: np.ndarray
    meta: str = ""

    def __post_init__(self) -> None:
        vals = np.sort(np.asarray(self.values, dtype=float).ravel())
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def hull(self) -> tuple[float, float]:
        if len(self.values) == 0:
            raise ValueError("empty spectrum has no hull")
        return float(self.values[0]), float(self.values[-1])


def merge_spectra(parts: list[SpectrumSet], meta: str = "") -> SpectrumSet:
    if not parts:
        raise ValueError("nothing to merge")
    return SpectrumSet(np.concatenate([p.values for p in parts]), meta=meta)


def _as_values(s) -> np.ndarray:
    vals = s.values if isinstance(s, SpectrumSet) else np.asarray(s, dtype=float)
    if len(vals) == 0:
        raise ValueError("empty value set")
    return np.sort(np.asarray(vals, dtype=float).ravel())


def hausdorff(a, b) -> float:
    """Hausdorff distance between two finite value sets."""
    av, bv = _as_values(a), _as_values(b)

    def directed(x: np.ndarray, y: np.ndarray) -> float:
        pos = np.searchsorted(y, x)
        dist = np.full(len(x), np.inf)
        left = pos > 0
        dist[left] = x[left] - y[pos[left] - 1]
        right = pos < len(y)
        dist[right] = np.minimum(dist[right], y[pos[right]] - x[right])
        return float(np.max(dist))

    return max(directed(av, bv), directed(bv, av))


def hausdorff_to_interval(values, lo: float, hi: float) -> float:
    """Exact Hausdorff distance between a finite set and [lo, hi]."""
    if hi < lo:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    vals = _as_values(values)
    out = max(0.0, float(lo - vals[0]), float(vals[-1] - hi))
    probes = [lo, hi]
    mids = (vals[:-1] + vals[1:]) / 2.0
    probes.extend(mids[(mids > lo) & (mids < hi)].tolist())
    gap = max(float(np.min(np.abs(vals - x))) for x in probes)
    return max(out, gap)


def eig_dense(op: CompressedOperator, vectors: bool = False):
    """Full spectrum of a dense compression; rejects non-Hermitian input."""
    scale = max(1.0, float(np.max(np.abs(op.matrix), initial=0.0)))
    defect = op.hermiticity_defect()
    if defect > HERMITICITY_TOL * scale:
        raise ValueError(f"matrix is not Hermitian: defect {defect:.3e} at scale {scale:.3e}")
    if vectors:
        w, v = op.eigensystem()
        return SpectrumSet(w, meta=f"dense eig of {op.label or 'operator'}"), v
    if op._eigh is not None:
        w = op._eigh[0]
    else:
        w = np.linalg.eigvalsh(op.matrix)
    return SpectrumSet(w, meta=f"dense eig of {op.label or 'operator'}")


def eig_lanczos(
    apply_fn,
    dim: int,
    k: int = 6,
    which: str = "smallest",
    tol: float = 1e-8,
    maxiter: int | None = None,
    seed: int = 7,
    vectors: bool = False,
):
    """Extremal Ritz values by Lanczos with full reorthogonalisation.

    Runs until the k requested Ritz pairs have residual bound
    |beta_m s_m| <= tol * max(1, |theta|) or the iteration cap is hit, in
    which case a LanczosConvergenceError reports the achieved residual.
    """
    if dim < 1 or k < 1 or k > dim:
        raise ValueError(f"bad sizes: dim {dim}, k {k}")
    if which not in ("smallest", "largest", "both"):
        raise ValueError(f"which must be smallest/largest/both, got {which!r}")
    if maxiter is None:
        maxiter = min(dim, max(8 * k + 80, 240))
    maxiter = min(maxiter, dim)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 0j
    v /= np.linalg.norm(v)
    basis: list[np.ndarray] = []
    alphas: list[float] = []
    betas: list[float] = []
    scale = 1.0
    best_res = math.inf

    def selected(theta: np.ndarray) -> np.ndarray:
        if which == "smallest":
            return np.arange(min(k, len(theta)))
        if which == "largest":
            return np.arange(max(0, len(theta) - k), len(theta))
        lo = np.arange(min(k, len(theta)))
        hi = np.arange(max(0, len(theta) - k), len(theta))
        return np.unique(np.concatenate([lo, hi]))

    while len(basis) < maxiter:
        basis.append(v)
        w = np.asarray(apply_fn(v), dtype=complex)
        alpha = float(np.vdot(v, w).real)
        alphas.append(alpha)
        vmat = np.column_stack(basis)
        for _ in range(2):  # full reorthogonalisation, twice for safety
            w = w - vmat @ (vmat.conj().T @ w)
        beta = float(np.linalg.norm(w))
        scale = max(scale, abs(alpha), beta)
        m = len(alphas)
        exhausted = beta <= 1e-13 * scale
        if m >= k:
            theta, s = eigh_tridiagonal(np.asarray(alphas), np.asarray(betas))
            idx = selected(theta)
            res = np.abs(beta * s[-1, idx])
            best_res = min(best_res, float(np.max(res, initial=0.0)))
            if np.all(res <= tol * np.maximum(1.0, np.abs(theta[idx]))) or (
                exhausted and m == dim
            ):
                values = SpectrumSet(theta[idx], meta=f"lanczos {which} k={k}")
                if vectors:
                    return values, vmat @ s[:, idx]
                return values
        if exhausted:
            # invariant subspace hit: continue in the orthogonal complement
            fresh = rng.standard_normal(dim) + 0j
            fresh -= vmat @ (vmat.conj().T @ fresh)
            norm = np.linalg.norm(fresh)
            if norm <= 1e-13:
                break
            v = fresh / norm
            betas.append(0.0)
        else:
            v = w / beta
            betas.append(beta)
    raise LanczosConvergenceError(
        f"no convergence after {len(alphas)} iterations "
        f"(best residual {best_res:.3e}, target {tol:.1e}); raise maxiter"
    )


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("MAGNONSPEC_THREADS", "1")))
    except ValueError:
        return 1


def _sweep(fn, items: list):
    workers = _thread_count()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def tau_grid(grid_size: int) -> np.ndarray:
    if grid_size < 1:
        raise ValueError(f"need grid_size >= 1, got {grid_size}")
    return np.arange(grid_size, dtype=float) / grid_size


def fiber_hamiltonian(
    tau: float, phi: ShiftSymbol, psi: ShiftSymbol, gap_max: int
) -> CompressedOperator:
    """Gap-lattice compression of the quasi-momentum-tau fiber.

    The hop symbol is reduced at tau, the potential symbol always at
    angle zero.
    """
    n = phi.dim
    if psi.dim != n:
        raise ValueError(f"hop dim {n} != potential dim {psi.dim}")
    if n < 2:
        raise ValueError("fiber reduction needs n >= 2; n = 1 spectra are scalar samples")
    tau = wrap_torus(tau)
    domain = LatticeDomain.fiber(n - 1)
    box = TruncationBox(n=n, gap_max=gap_max)
    return toeplitz_plus_potential(
        fiber_symbol(phi, tau),
        fiber_symbol(psi, 0.0),
        domain,
        box,
        label=f"fiber tau={tau:.6g} gap_max={gap_max}",
    )


def _subfiber_operator(
    mu_phi: ShiftSymbol,
    mu_psi0: ShiftSymbol,
    j: int,
    tau2: float,
    gap_max: int,
) -> CompressedOperator:
    nu_phi = subfiber_symbol(mu_phi, j, tau2)
    nu_psi = subfiber_symbol(mu_psi0, j, 0.0)
    gaps = nu_phi.dim
    domain = LatticeDomain.fiber(gaps)
    box = TruncationBox(n=gaps + 1, gap_max=gap_max)
    return toeplitz_plus_potential(
        nu_phi, nu_psi, domain, box, label=f"subfiber j={j} tau'={tau2:.6g}"
    )


def subfiber_spectrum(
    j: int, tau: float, tau2: float, phi: ShiftSymbol, psi: ShiftSymbol, gap_max: int
) -> SpectrumSet:
    """Spectrum of the fiber with gap j collapsed at angle tau2.

    For two particles this is a single scalar (zero-dimensional
    compression); for more it is the dense spectrum of the reduced
    gap-lattice operator.
    """
    n = phi.dim
    if not 2 <= j <= n:
        raise ValueError(f"gap index j must lie in [2, {n}], got {j}")
    mu_phi = fiber_symbol(phi, wrap_torus(tau))
    mu_psi0 = fiber_symbol(psi, 0.0)
    op = _subfiber_operator(mu_phi, mu_psi0, j, wrap_torus(tau2), gap_max)
    out = eig_dense(op)
    return SpectrumSet(out.values, meta=f"subfiber j={j} tau={tau:.6g} tau'={tau2:.6g}")


def fiber_essential_spectrum(
    tau: float,
    phi: ShiftSymbol,
    psi: ShiftSymbol,
    grid_size: int = DEFAULT_GRID,
    gap_max: int = 40,
) -> SpectrumSet:
    """Union of subfiber spectra over all gaps j and a uniform tau' grid."""
    n = phi.dim
    if n < 2:
        raise ValueError("essential-spectrum sweep needs n >= 2")
    tau = wrap_torus(tau)
    mu_phi = fiber_symbol(phi, tau)
    mu_psi0 = fiber_symbol(psi, 0.0)
    grid = tau_grid(grid_size)

    def one(args) -> np.ndarray:
        j, tau2 = args
        return eig_dense(_subfiber_operator(mu_phi, mu_psi0, j, tau2, gap_max)).values

    jobs = [(j, t2) for j in range(2, n + 1) for t2 in grid]
    chunks = _sweep(one, jobs)
    return SpectrumSet(
        np.concatenate(chunks),
        meta=f"essential spectrum sweep tau={tau:.6g} grid={grid_size} gap_max={gap_max}",
    )


def subfiber_union(
    j: int,
    phi: ShiftSymbol,
    psi: ShiftSymbol,
    grid_size: int = DEFAULT_GRID,
    gap_max: int = 40,
) -> SpectrumSet:
    """Union of subfiber-j spectra over both angles on a grid.

    This is the energy region that gap-j localisation windows must avoid.
    """
    n = phi.dim
    if not 2 <= j <= n:
        raise ValueError(f"gap index j must lie in [2, {n}], got {j}")
    mu_psi0 = fiber_symbol(psi, 0.0)
    grid = tau_grid(grid_size)
    chunks = []
    for tau in grid:
        mu_phi = fiber_symbol(phi, tau)

        def one(tau2: float) -> np.ndarray:
            return eig_dense(_subfiber_operator(mu_phi, mu_psi0, j, tau2, gap_max)).values

        chunks.extend(_sweep(one, list(grid)))
    return SpectrumSet(
        np.concatenate(chunks),
        meta=f"subfiber union j={j} grid={grid_size}x{grid_size} gap_max={gap_max}",
    )


def full_spectrum_union(
    phi: ShiftSymbol,
    psi: ShiftSymbol,
    grid_size: int = DEFAULT_GRID,
    gap_max: int = 40,
) -> SpectrumSet:
    """Union of fiber spectra over a uniform quasi-momentum grid.

    With a single particle the fibers are scalars: the trigonometric sum
    of the hop symbol at tau plus the potential sum at zero.
    """
    n = phi.dim
    if psi.dim != n:
        raise ValueError(f"hop dim {n} != potential dim {psi.dim}")
    grid = tau_grid(grid_size)
    if n == 1:
        base = fourier_eval(psi, (0.0,))
        vals = np.array([(fourier_eval(phi, (t,)) + base).real for t in grid])
        return SpectrumSet(vals, meta=f"scalar fiber samples grid={grid_size}")

    def one(tau: float) -> np.ndarray:
        return eig_dense(fiber_hamiltonian(tau, phi, psi, gap_max)).values

    chunks = _sweep(one, list(grid))
    return SpectrumSet(
        np.concatenate(chunks),
        meta=f"fiber spectrum union grid={grid_size} gap_max={gap_max}",
    )


def bloch_check(phi: ShiftSymbol, psi: ShiftSymbol, ring: int, gap_max: int) -> float:
    """Consistency of ring periodisation against discrete fiber spectra.

    Compresses the operator with the leading coordinate periodic of size
    `ring` and compares its spectrum (Hausdorff) with the union of fiber
    spectra at the commensurate angles k/ring.  These agree exactly, so
    the discrepancy is pure numerical noise.
    """
    n = phi.dim
    if ring < 1:
        raise ValueError(f"need ring >= 1, got {ring}")
    if n == 1:
        domain = LatticeDomain.ring_cross_fiber(ring, 0)
        box = TruncationBox(n=1, gap_max=1, first_range=(0, ring - 1))
        op = toeplitz_plus_potential(
            to_gap_picture(phi), to_gap_picture(psi), domain, box, label=f"ring {ring}"
        )
        ring_vals = eig_dense(op).values
        base = fourier_eval(psi, (0.0,))
        fiber_vals = np.array(
            [(fourier_eval(phi, (k / ring,)) + base).real for k in range(ring)]
        )
        return hausdorff(ring_vals, fiber_vals)
    domain = LatticeDomain.ring_cross_fiber(ring, n - 1)
    box = TruncationBox(n=n, gap_max=gap_max, first_range=(0, ring - 1))
    op = toeplitz_plus_potential(
        to_gap_picture(phi),
        to_gap_picture(psi),
        domain,
        box,
        label=f"ring {ring} gap_max={gap_max}",
    )
    ring_vals = eig_dense(op).values
    parts = [
        eig_dense(fiber_hamiltonian(k / ring, phi, psi, gap_max)).values
        for k in range(ring)
    ]
    return hausdorff(ring_vals, np.concatenate(parts))


def _boundary_distance(op: CompressedOperator) -> np.ndarray:
    kind = op.domain.kind
    if kind == FIBER:
        if op.domain.dim == 0:
            raise ValueError("scalar compression has no gap boundary")
        return np.array([min(p) - 1 for p in op.points])
    if kind == FULL_ORDERED:
        if op.domain.dim < 2:
            raise ValueError("single-particle configurations have no gap boundary")
        return np.array(
            [min(p[i + 1] - p[i] for i in range(len(p) - 1)) - 1 for p in op.points]
        )
    if kind == RING_CROSS_FIBER:
        if op.domain.dim < 2:
            raise ValueError("ring without gaps has no gap boundary")
        return np.array([min(p[1:]) - 1 for p in op.points])
    raise ValueError(f"domain kind {kind} has no gap boundary")


def bound_state_mask(
    op: CompressedOperator,
    vectors: np.ndarray,
    mass_threshold: float = 0.9,
    edge_fraction: float = 0.1,
) -> np.ndarray:
    """Participation filter: True for gap-boundary-localised eigenvectors.

    A column counts as bound when at least `mass_threshold` of its mass
    sits on the `edge_fraction` of box points closest to a minimal gap.
    """
    dist = _boundary_distance(op)
    npts = len(op.points)
    if vectors.shape[0] != npts:
        raise ValueError("eigenvector rows do not match the enumeration")
    nsel = max(1, math.ceil(edge_fraction * npts))
    edge = np.argsort(dist, kind="stable")[:nsel]
    mass = np.sum(np.abs(vectors[edge, :]) ** 2, axis=0)
    total = np.sum(np.abs(vectors) ** 2, axis=0)
    return mass >= mass_threshold * total


def detect_outliers(values, lo: float, hi: float, margin: float = 0.0) -> np.ndarray:
    """Values lying outside [lo - margin, hi + margin]."""
    vals = _as_values(values)
    return vals[(vals < lo - margin) | (vals > hi + margin)]
