"""Spectra and propagation bounds for hard-core magnon Hamiltonians.

The package builds Toeplitz-plus-potential compressions of lattice
Hamiltonians on strictly ordered configurations, decomposes them into
quasi-momentum fibers, sweeps out band unions and essential spectra, and
measures how well energy-filtered states stay out of large-gap regions.
"""

from .dynamics import (
    EnergyWindow,
    dynamical_ratios,
    evolve,
    functional_calculus,
    isolating_window,
    nonprop_dynamical,
    nonprop_norm,
    nonprop_sweep,
    spectral_support,
)
from .lattice import (
    TruncationBox,
    check_gaps,
    check_ordered,
    enumerate_box,
    from_gaps,
    gap_at_least,
    to_gaps,
    wrap_torus,
)
from .operators import (
    CompressedOperator,
    LatticeDomain,
    OperatorSpec,
    apply,
    build_heisenberg_direct,
    cayley_laplacian,
    compress_potential,
    compress_toeplitz,
    dump_matrix,
    gap_region_mask,
    indicator_project,
    toeplitz_plus_potential,
)
from .spectral import (
    LanczosConvergenceError,
    SpectrumSet,
    bloch_check,
    bound_state_mask,
    detect_outliers,
    eig_dense,
    eig_lanczos,
    fiber_essential_spectrum,
    fiber_hamiltonian,
    full_spectrum_union,
    hausdorff,
    hausdorff_to_interval,
    merge_spectra,
    subfiber_spectrum,
    subfiber_union,
    tau_grid,
)
from .symbols import (
    ShiftSymbol,
    fiber_symbol,
    fourier_eval,
    heisenberg_symbols,
    read_symbol_file,
    subfiber_symbol,
    to_gap_picture,
    write_symbol_file,
)

__version__ = "0.1.0"

__all__ = [
    "CompressedOperator",
    "EnergyWindow",
    "LanczosConvergenceError",
    "LatticeDomain",
    "OperatorSpec",
    "ShiftSymbol",
    "SpectrumSet",
    "TruncationBox",
    "apply",
    "bloch_check",
    "bound_state_mask",
    "build_heisenberg_direct",
    "cayley_laplacian",
    "check_gaps",
    "check_ordered",
    "compress_potential",
    "compress_toeplitz",
    "detect_outliers",
    "dump_matrix",
    "dynamical_ratios",
    "eig_dense",
    "eig_lanczos",
    "enumerate_box",
    "evolve",
    "fiber_essential_spectrum",
    "fiber_hamiltonian",
    "fiber_symbol",
    "fourier_eval",
    "from_gaps",
    "full_spectrum_union",
    "functional_calculus",
    "gap_at_least",
    "gap_region_mask",
    "hausdorff",
    "hausdorff_to_interval",
    "heisenberg_symbols",
    "indicator_project",
    "isolating_window",
    "merge_spectra",
    "nonprop_dynamical",
    "nonprop_norm",
    "nonprop_sweep",
    "read_symbol_file",
    "spectral_support",
    "subfiber_spectrum",
    "subfiber_symbol",
    "subfiber_union",
    "tau_grid",
    "to_gap_picture",
    "to_gaps",
    "toeplitz_plus_potential",
    "wrap_torus",
    "write_symbol_file",
]
