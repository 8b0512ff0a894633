"""Figure rendering for the CLI report path.

Every data-producing subcommand can drop a PNG next to its delimited
output; the figures are plain matplotlib renderings of the same rows.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_META = {"Software": "magnonspec"}


def _save(fig, path: str | Path) -> Path:
    out = Path(path)
    fig.savefig(out, dpi=150, metadata=_META)
    plt.close(fig)
    return out


def plot_spectrum_sweep(rows: list[dict], path: str | Path, title: str) -> Path:
    """Eigenvalues against quasi-momentum, one dot per (tau, value)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot([r["tau"] for r in rows], [r["value"] for r in rows], ".", ms=2, color="tab:blue")
    ax.set_xlabel("tau")
    ax.set_ylabel("eigenvalue")
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_fiber_levels(rows: list[dict], path: str | Path, title: str) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot([r["eigenvalue_index"] for r in rows], [r["value"] for r in rows], ".-",
            ms=3, lw=0.7, color="tab:blue")
    ax.set_xlabel("eigenvalue index")
    ax.set_ylabel("eigenvalue")
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_band_sweep(rows: list[dict], path: str | Path, title: str) -> Path:
    """Collapsed-gap band values against the sweep angle, coloured by gap."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    gaps = sorted({r["j"] for r in rows})
    for j in gaps:
        sel = [r for r in rows if r["j"] == j]
        ax.plot([r["tau_prime"] for r in sel], [r["band_value"] for r in sel], ".",
                ms=2, label=f"gap {j}")
    ax.set_xlabel("tau'")
    ax.set_ylabel("band value")
    ax.set_title(title)
    if len(gaps) > 1:
        ax.legend(markerscale=3)
    fig.tight_layout()
    return _save(fig, path)


def plot_decay(
    rows: list[dict], control_rows: list[dict], path: str | Path, title: str
) -> Path:
    """Localisation norm against region size, log scale, with control."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogy([r["n"] for r in rows], [max(r["norm"], 1e-300) for r in rows],
                "o-", ms=4, label="window off the band")
    if control_rows:
        ax.semilogy([r["n"] for r in control_rows],
                    [max(r["norm"], 1e-300) for r in control_rows],
                    "s--", ms=4, label="control inside the band")
    ax.set_xlabel("region threshold n")
    ax.set_ylabel("|| P kappa(H) ||")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def plot_ratios(rows: list[dict], bound: float | None, path: str | Path, title: str) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot([r["t"] for r in rows], [r["ratio"] for r in rows], "-", color="tab:blue",
            label="region overlap")
    if bound is not None:
        ax.axhline(bound, color="tab:red", ls="--", lw=1, label="static bound")
    ax.set_xlabel("t")
    ax.set_ylabel("|| P exp(-itH) f || / || f ||")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)
