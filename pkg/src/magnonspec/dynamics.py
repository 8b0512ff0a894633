"""Functional calculus, time evolution, and gap-localisation norms.

The central quantity is  || P_region kappa(H) ||  for a smooth energy
window kappa and the region where one inter-particle gap exceeds n: when
the window avoids every one-gap-collapsed subfiber band, this norm decays
in n, and it dominates the time-evolved overlap
|| P_region exp(-itH) kappa(H) g || / || kappa(H) g ||  uniformly in t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import jv

from .operators import CompressedOperator, OperatorSpec, gap_region_mask

CHEB_CUTOFF = 1e-12
NORM_TOL = 1e-9


@dataclass(frozen=True)
class EnergyWindow:
    """Piecewise-cubic bump: 0 outside [lo, hi], 1 on the middle half.

    The two ramps are smoothstep cubics, so the window is C^1 with values
    in [0, 1] and support arithmetic stays exact.
    """

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.hi > self.lo:
            raise ValueError(f"window needs hi > lo, got [{self.lo}, {self.hi}]")

    @classmethod
    def bump(cls, center: float, halfwidth: float) -> "EnergyWindow":
        if halfwidth <= 0:
            raise ValueError(f"need halfwidth > 0, got {halfwidth}")
        return cls(center - halfwidth, center + halfwidth)

    @property
    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        q = (self.hi - self.lo) / 4.0
        up = np.clip((x - self.lo) / q, 0.0, 1.0)
        down = np.clip((self.hi - x) / q, 0.0, 1.0)
        ramp_up = up * up * (3.0 - 2.0 * up)
        ramp_down = down * down * (3.0 - 2.0 * down)
        return np.minimum(ramp_up, ramp_down)


def isolating_window(
    center: float, avoid_lo: float, avoid_hi: float, halfwidth: float = 0.45
) -> EnergyWindow:
    """Bump at `center` whose support keeps clear of [avoid_lo, avoid_hi]."""
    if avoid_lo <= center <= avoid_hi:
        raise ValueError(f"center {center} lies inside the avoided band")
    room = (avoid_lo - center) if center < avoid_lo else (center - avoid_hi)
    hw = min(halfwidth, room / 2.0)
    return EnergyWindow.bump(center, hw)


def functional_calculus(op: CompressedOperator, window: EnergyWindow) -> CompressedOperator:
    """kappa(H) through the dense eigendecomposition, re-hermitised."""
    if not isinstance(op, CompressedOperator):
        raise TypeError(
            "functional calculus needs a dense compression; for oversize boxes "
            "use evolve-based estimates on an OperatorSpec"
        )
    w, v = op.eigensystem()
    kw = window(w)
    k = (v * kw) @ v.conj().T
    k = (k + k.conj().T) / 2.0
    if np.max(np.abs(k.imag), initial=0.0) <= 1e-14:
        k = np.ascontiguousarray(k.real)
    return CompressedOperator(
        op.domain,
        op.box,
        op.points,
        op.index,
        k,
        label=f"window[{window.lo:.6g},{window.hi:.6g}]({op.label})",
    )


def evolve(op, f: np.ndarray, t: float) -> np.ndarray:
    """exp(-itH) f; dense path for compressions, Chebyshev matrix-free."""
    vec = np.asarray(f, dtype=complex)
    if isinstance(op, CompressedOperator):
        if vec.shape != (op.size,):
            raise ValueError(f"vector shape {vec.shape} does not fit size {op.size}")
        w, v = op.eigensystem()
        return v @ (np.exp(-1j * t * w) * (v.conj().T @ vec))
    if isinstance(op, OperatorSpec):
        return _evolve_chebyshev(op, vec, t)
    raise TypeError(f"cannot evolve with {type(op).__name__}")


def _evolve_chebyshev(spec: OperatorSpec, f: np.ndarray, t: float) -> np.ndarray:
    """Bessel-coefficient Chebyshev expansion of exp(-itH).

    The spectrum is enclosed in [-r, r] by the symbol-level Gershgorin
    bound; coefficients (2 - delta_k0)(-i)^k J_k(t r) are truncated once
    their magnitude stays below CHEB_CUTOFF past the oscillatory range.
    """
    if f.shape != (spec.size,):
        raise ValueError(f"vector shape {f.shape} does not fit size {spec.size}")
    r = spec.gershgorin_bound()
    z = t * r
    if abs(z) < 1e-300:
        return f.copy()
    order = int(abs(z)) + 60
    coeff = jv(np.arange(order + 1), z)
    while abs(coeff[-1]) >= CHEB_CUTOFF or abs(coeff[-2]) >= CHEB_CUTOFF:
        order += 60
        coeff = jv(np.arange(order + 1), z)
    keep = np.nonzero(np.abs(coeff) >= CHEB_CUTOFF)[0]
    order = int(keep[-1]) if len(keep) else 0
    prev = f
    curr = spec.apply(f) / r
    out = coeff[0] * prev
    phase = -1j
    for k in range(1, order + 1):
        if k > 1:
            nxt = 2.0 * spec.apply(curr) / r - prev
            prev, curr = curr, nxt
        out = out + (2.0 * phase * coeff[k]) * curr
        phase *= -1j
    return out


def spectral_support(
    f: np.ndarray, op: CompressedOperator, eps_mass: float = 1e-8
):
    """Eigenvalues carrying more than eps_mass of the state's mass.

    Returns the sorted eigenvalue list; projecting f onto those modes
    reproduces it up to the discarded mass.
    """
    from .spectral import SpectrumSet

    vec = np.asarray(f, dtype=complex)
    norm2 = float(np.vdot(vec, vec).real)
    if norm2 <= 0.0:
        raise ValueError("zero vector has no spectral support")
    w, v = op.eigensystem()
    mass = np.abs(v.conj().T @ vec) ** 2
    keep = mass > eps_mass * norm2
    return SpectrumSet(w[keep], meta=f"spectral support at mass ratio {eps_mass:g}")


def projected_norm(
    mask: np.ndarray,
    kmat: np.ndarray,
    tol: float = NORM_TOL,
    maxiter: int = 200,
    seed: int = 11,
) -> float:
    """|| diag(mask) @ K || by singular-value (power) iteration.

    Falls back to an exact singular value solve if the iteration stalls.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (kmat.shape[0],):
        raise ValueError("mask length does not match the matrix")
    if not mask.any():
        return 0.0
    b = kmat[mask, :]
    scale = float(np.max(np.abs(b), initial=0.0))
    if scale == 0.0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(kmat.shape[1]) + 0j
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(maxiter):
        u = b @ v
        new_sigma = float(np.linalg.norm(u))
        v = b.conj().T @ u
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            return new_sigma
        v /= nv
        if abs(new_sigma - sigma) <= tol * max(1.0, new_sigma):
            return new_sigma
        sigma = new_sigma
    return float(np.linalg.svd(b, compute_uv=False)[0])


def nonprop_norm(op: CompressedOperator, j: int, n: int, window: EnergyWindow) -> float:
    """|| P_{gap j >= n} kappa(H) || on the compressed operator."""
    mask = gap_region_mask(op, j, n)
    kop = functional_calculus(op, window)
    return projected_norm(mask, kop.matrix)


def nonprop_sweep(
    op: CompressedOperator, j: int, n_values, window: EnergyWindow
) -> list[float]:
    """nonprop_norm over several region sizes with kappa(H) built once."""
    kop = functional_calculus(op, window)
    out = []
    for n in n_values:
        out.append(projected_norm(gap_region_mask(op, j, int(n)), kop.matrix))
    return out


def default_t_grid() -> np.ndarray:
    return np.arange(101, dtype=float) * 0.5


def dynamical_ratios(
    op: CompressedOperator, j: int, n: int, f: np.ndarray, t_grid=None
) -> np.ndarray:
    """|| P_{gap j >= n} exp(-itH) f || / || f || over a time grid."""
    vec = np.asarray(f, dtype=complex)
    norm = float(np.linalg.norm(vec))
    if norm <= 0.0:
        raise ValueError("zero initial state")
    grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    mask = gap_region_mask(op, j, n)
    w, v = op.eigensystem()
    coeff = v.conj().T @ vec
    vm = v[mask, :]
    out = np.empty(len(grid))
    for i, t in enumerate(grid):
        out[i] = np.linalg.norm(vm @ (np.exp(-1j * t * w) * coeff)) / norm
    return out


def nonprop_dynamical(
    op: CompressedOperator, j: int, n: int, f: np.ndarray, t_grid=None
) -> float:
    """Largest region overlap of exp(-itH) f over the time grid."""
    return float(np.max(dynamical_ratios(op, j, n, f, t_grid)))
