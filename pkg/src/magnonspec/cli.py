"""Command line front end.

Seven subcommands: verify-equivalence, spectrum, fiber, essential, bloch,
nonprop, evolve.  Data lands in CSV (or JSON with a provenance block) and
each data-producing run also renders a PNG next to the delimited output
unless --no-plot is given.  A flat key=value config file can pre-set any
flag; explicit flags win.  Exit codes: 0 ok, 1 numerical contract
violation, 2 bad configuration.

The environment variable MAGNONSPEC_THREADS caps the thread count used by
the quasi-momentum sweeps (default 1, single-threaded).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    EnergyWindow,
    dynamical_ratios,
    functional_calculus,
    isolating_window,
    nonprop_norm,
    nonprop_sweep,
)
from .lattice import TruncationBox, wrap_torus
from .operators import (
    LatticeDomain,
    build_heisenberg_direct,
    cayley_laplacian,
    dump_matrix,
    toeplitz_plus_potential,
)
from .reports import emit
from .spectral import (
    BLOCH_TOL,
    bloch_check,
    detect_outliers,
    eig_dense,
    fiber_hamiltonian,
    subfiber_spectrum,
    subfiber_union,
    tau_grid,
)
from .symbols import (
    ShiftSymbol,
    fourier_eval,
    heisenberg_symbols,
    read_symbol_file,
)

HERMITICITY_TOL = 1e-12


class ConfigError(ValueError):
    """Bad or inconsistent run configuration (exit code 2)."""


class ContractError(RuntimeError):
    """Numerical contract violation discovered while running (exit code 1)."""


@dataclass(frozen=True)
class Opt:
    name: str
    typ: type | None  # None marks a boolean flag
    default: object
    help: str
    choices: tuple | None = None


MODEL_OPTS = [
    Opt("model", str, "heisenberg", "operator family", ("heisenberg", "symbols", "cayley")),
    Opt("a", float, 1.0, "hop amplitude (heisenberg)"),
    Opt("b", float, 1.0, "potential amplitude (heisenberg)"),
    Opt("n", int, 2, "particle count (heisenberg)"),
    Opt("phi_file", str, None, "hop symbol file (model=symbols)"),
    Opt("psi_file", str, None, "potential symbol file (model=symbols)"),
    Opt("m_file", str, None, "adjacency symbol file (model=cayley)"),
]

OUTPUT_OPTS = [
    Opt("out", str, None, "output path (default <subcommand>.<format>)"),
    Opt("format", str, "csv", "output format", ("csv", "json")),
    Opt("plot", None, True, "render a PNG next to the output"),
]

STUDY_OPTS = [
    Opt("study", str, "fiber", "operator under study", ("fiber", "full")),
    Opt("tau", float, 0.0, "quasi-momentum of the fiber study"),
    Opt("z1", str, "-40..40", "leading-position window of the full study, lo..hi "
        "(write --z1=-40..40, the value starts with a dash)"),
    Opt("gap_max", int, None, "gap truncation (default 300 fiber, 40 full)"),
    Opt("j", int, 2, "gap index of the region"),
    Opt("window_center", float, None, "energy window center (default: auto-detect)"),
    Opt("window_halfwidth", float, 0.45, "energy window halfwidth"),
    Opt("band_grid", int, 64, "angle grid for the avoided-band sweep"),
    Opt("band_gap_max", int, 60, "gap truncation inside the band sweep"),
    Opt("outlier_margin", float, None, "band clearance for auto-detection (default width/100)"),
]

SUBCOMMANDS: dict[str, dict] = {
    "verify-equivalence": {
        "help": "cross-check the direct builds against the symbol compressions",
        "opts": MODEL_OPTS
        + [
            Opt("z1", str, "-8..8", "leading-position window, lo..hi "
                "(write --z1=-8..8, the value starts with a dash)"),
            Opt("gap_max", int, 8, "gap truncation"),
            Opt("tol", float, 1e-12, "entrywise tolerance"),
            Opt("dump_matrix", str, None, "write the direct matrix as i k re im triplets"),
        ],
    },
    "spectrum": {
        "help": "union of fiber spectra over a quasi-momentum grid",
        "opts": MODEL_OPTS
        + [Opt("grid", int, 64, "tau grid size"), Opt("gap_max", int, 40, "gap truncation")]
        + OUTPUT_OPTS,
    },
    "fiber": {
        "help": "spectrum of one quasi-momentum fiber",
        "opts": MODEL_OPTS
        + [
            Opt("tau", float, 0.0, "quasi-momentum"),
            Opt("gap_max", int, 40, "gap truncation"),
            Opt("dump_matrix", str, None, "write the fiber matrix as i k re im triplets"),
        ]
        + OUTPUT_OPTS,
    },
    "essential": {
        "help": "collapsed-gap band sweep (essential spectrum of a fiber)",
        "opts": MODEL_OPTS
        + [
            Opt("tau", float, 0.0, "quasi-momentum of the fiber"),
            Opt("grid", int, 64, "tau' grid size"),
            Opt("gap_max", int, 60, "gap truncation of the collapsed compressions"),
        ]
        + OUTPUT_OPTS,
    },
    "bloch": {
        "help": "exact consistency of ring periodisation against fiber spectra",
        "opts": MODEL_OPTS
        + [
            Opt("ring", int, 4, "period of the leading coordinate"),
            Opt("gap_max", int, 12, "gap truncation"),
        ],
    },
    "nonprop": {
        "help": "localisation norm over a range of gap thresholds",
        "opts": MODEL_OPTS
        + STUDY_OPTS
        + [Opt("n_range", str, "2..20", "gap thresholds, lo..hi or comma list")]
        + OUTPUT_OPTS,
    },
    "evolve": {
        "help": "time-evolved region overlap of an energy-filtered state",
        "opts": MODEL_OPTS
        + STUDY_OPTS
        + [
            Opt("n_region", int, 20, "gap threshold of the region"),
            Opt("t_max", float, 50.0, "largest time"),
            Opt("t_step", float, 0.5, "time step"),
            Opt("seed", int, 0, "seed of the random reference state"),
        ]
        + OUTPUT_OPTS,
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magnonspec",
        description="spectra and propagation bounds for hard-core magnon Hamiltonians",
        epilog="MAGNONSPEC_THREADS caps the sweep thread count (default 1).",
    )
    parser.add_argument("--version", action="version", version=f"magnonspec {__version__}")
    subs = parser.add_subparsers(dest="cmd", required=True)
    for name, info in SUBCOMMANDS.items():
        p = subs.add_parser(name, help=info["help"])
        p.add_argument("--config", default=None, help="flat key=value config file")
        for o in info["opts"]:
            flag = "--" + o.name.replace("_", "-")
            if o.typ is None:
                p.add_argument(
                    flag,
                    dest=o.name,
                    action=argparse.BooleanOptionalAction,
                    default=argparse.SUPPRESS,
                    help=o.help,
                )
            else:
                kwargs: dict = dict(
                    dest=o.name, type=o.typ, default=argparse.SUPPRESS, help=o.help
                )
                if o.choices:
                    kwargs["choices"] = list(o.choices)
                p.add_argument(flag, **kwargs)
    return parser


def load_config_file(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, val = line.partition("=")
        values[key.strip().replace("-", "_")] = val.strip().strip("\"'")
    return values


def _coerce(opt: Opt, raw: str):
    if opt.typ is None:
        low = raw.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ConfigError(f"{opt.name}: expected a boolean, got {raw!r}")
    try:
        value = opt.typ(raw)
    except ValueError as exc:
        raise ConfigError(f"{opt.name}: {exc}") from exc
    if opt.choices and value not in opt.choices:
        raise ConfigError(f"{opt.name}: must be one of {opt.choices}, got {value!r}")
    return value


def merge_config(cmd: str, ns: argparse.Namespace) -> dict:
    opts = {o.name: o for o in SUBCOMMANDS[cmd]["opts"]}
    cfg = {name: o.default for name, o in opts.items()}
    config_path = getattr(ns, "config", None)
    if config_path:
        for key, raw in load_config_file(config_path).items():
            if key not in opts:
                raise ConfigError(f"unknown config key {key!r} for {cmd}")
            cfg[key] = _coerce(opts[key], raw)
    for key, value in vars(ns).items():
        if key in opts:
            cfg[key] = value
    return cfg


def parse_span(text: str) -> tuple[int, int]:
    """`lo..hi` with either end possibly negative."""
    parts = str(text).split("..")
    if len(parts) != 2:
        raise ConfigError(f"expected lo..hi, got {text!r}")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"bad span {text!r}: {exc}") from exc
    if lo > hi:
        raise ConfigError(f"empty span {text!r}")
    return lo, hi


def parse_int_list(text: str) -> list[int]:
    s = str(text)
    try:
        if ".." in s:
            lo, hi = parse_span(s)
            return list(range(lo, hi + 1))
        if "," in s:
            return [int(p) for p in s.split(",") if p.strip()]
        return [int(s)]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}: {exc}") from exc


def resolve_model(cfg: dict) -> tuple[ShiftSymbol, ShiftSymbol, str]:
    model = cfg["model"]
    if model == "heisenberg":
        if cfg["n"] < 1:
            raise ConfigError(f"need n >= 1, got {cfg['n']}")
        phi, psi = heisenberg_symbols(cfg["a"], cfg["b"], cfg["n"])
        return phi, psi, f"heisenberg a={cfg['a']:g} b={cfg['b']:g} n={cfg['n']}"
    if model == "symbols":
        if not cfg["phi_file"] or not cfg["psi_file"]:
            raise ConfigError("model=symbols needs --phi-file and --psi-file")
        try:
            phi = read_symbol_file(cfg["phi_file"])
            psi = read_symbol_file(cfg["psi_file"])
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if phi.dim != psi.dim:
            raise ConfigError(f"symbol dims differ: {phi.dim} vs {psi.dim}")
        return phi, psi, f"symbols {cfg['phi_file']} {cfg['psi_file']}"
    if model == "cayley":
        if not cfg["m_file"]:
            raise ConfigError("model=cayley needs --m-file")
        try:
            adj = read_symbol_file(cfg["m_file"])
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return adj, -1.0 * adj, f"cayley {cfg['m_file']}"
    raise ConfigError(f"unknown model {model!r}")


def _out_paths(cfg: dict, cmd: str) -> tuple[Path, Path]:
    ext = cfg["format"]
    out = Path(cfg["out"]) if cfg["out"] else Path(f"{cmd}.{ext}")
    return out, out.with_suffix(".png")


def _check_hermitian(op) -> None:
    scale = max(1.0, float(np.max(np.abs(op.matrix), initial=0.0)))
    defect = op.hermiticity_defect()
    if defect > HERMITICITY_TOL * scale:
        raise ContractError(f"operator lost hermiticity: defect {defect:.3e}")


def run_verify(cfg: dict) -> int:
    z1 = parse_span(cfg["z1"])
    if cfg["gap_max"] < 1:
        raise ConfigError("need gap-max >= 1")
    tol = cfg["tol"]
    failures = 0
    if cfg["model"] == "symbols":
        raise ConfigError("verify-equivalence needs model=heisenberg or model=cayley")
    if cfg["model"] == "heisenberg":
        n, a, b = cfg["n"], cfg["a"], cfg["b"]
        box = TruncationBox(n=n, gap_max=cfg["gap_max"], first_range=z1)
        domain = LatticeDomain.full_ordered(n)
        direct = build_heisenberg_direct(a, b, n, box)
        phi, psi = heisenberg_symbols(a, b, n)
        symb = toeplitz_plus_potential(phi, psi, domain, box)
        diff = float(np.max(np.abs(direct.matrix - symb.matrix), initial=0.0))
        ok = diff <= tol
        failures += not ok
        print(f"move-scan vs symbol compression: max |diff| = {diff:.3e} : "
              f"{'PASS' if ok else 'FAIL'} (tol {tol:g})")
        if cfg["dump_matrix"]:
            dump_matrix(direct, cfg["dump_matrix"])
        adj = ShiftSymbol(n, {key: 1.0 for key in phi.entries})
    else:
        phi, psi, _ = resolve_model(cfg)
        adj = phi
        box = TruncationBox(n=adj.dim, gap_max=cfg["gap_max"], first_range=z1)
        domain = LatticeDomain.full_ordered(adj.dim)
    lap = cayley_laplacian(adj, domain, box)
    if cfg["model"] == "cayley" and cfg["dump_matrix"]:
        dump_matrix(lap, cfg["dump_matrix"])
    symb = toeplitz_plus_potential(adj, -1.0 * adj, domain, box)
    diff = float(np.max(np.abs(lap.matrix - symb.matrix), initial=0.0))
    ok = diff <= tol
    failures += not ok
    print(f"graph traversal vs symbol compression: max |diff| = {diff:.3e} : "
          f"{'PASS' if ok else 'FAIL'} (tol {tol:g})")
    return 1 if failures else 0


def run_spectrum(cfg: dict) -> int:
    phi, psi, desc = resolve_model(cfg)
    if cfg["grid"] < 1 or cfg["gap_max"] < 1:
        raise ConfigError("need grid >= 1 and gap-max >= 1")
    rows = []
    if phi.dim == 1:
        if not (phi.hermitian and psi.hermitian):
            raise ContractError("symbols are not hermitian; spectra would be complex")
        base = fourier_eval(psi, (0.0,))
        for tau in tau_grid(cfg["grid"]):
            value = (fourier_eval(phi, (tau,)) + base).real
            rows.append({"tau": float(tau), "eigenvalue_index": 0, "value": float(value)})
    else:
        for tau in tau_grid(cfg["grid"]):
            op = fiber_hamiltonian(tau, phi, psi, cfg["gap_max"])
            _check_hermitian(op)
            for i, value in enumerate(eig_dense(op).values):
                rows.append({"tau": float(tau), "eigenvalue_index": i, "value": float(value)})
    out, fig = _out_paths(cfg, "spectrum")
    emit(out, ["tau", "eigenvalue_index", "value"], rows, cfg, cfg["format"])
    if cfg["plot"]:
        from .plotting import plot_spectrum_sweep

        plot_spectrum_sweep(rows, fig, f"fiber spectra, {desc}")
    values = [r["value"] for r in rows]
    print(f"wrote {out} ({len(rows)} rows, hull [{min(values):.6g}, {max(values):.6g}])")
    return 0


def run_fiber(cfg: dict) -> int:
    phi, psi, desc = resolve_model(cfg)
    if phi.dim < 2:
        raise ConfigError("fiber needs at least two particles; use spectrum for one")
    if cfg["gap_max"] < 1:
        raise ConfigError("need gap-max >= 1")
    tau = wrap_torus(cfg["tau"])
    op = fiber_hamiltonian(tau, phi, psi, cfg["gap_max"])
    _check_hermitian(op)
    if cfg["dump_matrix"]:
        dump_matrix(op, cfg["dump_matrix"])
    rows = [
        {"tau": tau, "eigenvalue_index": i, "value": float(v)}
        for i, v in enumerate(eig_dense(op).values)
    ]
    out, fig = _out_paths(cfg, "fiber")
    emit(out, ["tau", "eigenvalue_index", "value"], rows, cfg, cfg["format"])
    if cfg["plot"]:
        from .plotting import plot_fiber_levels

        plot_fiber_levels(rows, fig, f"fiber tau={tau:g}, {desc}")
    print(f"wrote {out} ({len(rows)} rows)")
    return 0


def run_essential(cfg: dict) -> int:
    phi, psi, desc = resolve_model(cfg)
    if phi.dim < 2:
        raise ConfigError("essential-spectrum sweep needs at least two particles")
    if cfg["grid"] < 1 or cfg["gap_max"] < 1:
        raise ConfigError("need grid >= 1 and gap-max >= 1")
    tau = wrap_torus(cfg["tau"])
    rows = []
    for j in range(2, phi.dim + 1):
        for tau2 in tau_grid(cfg["grid"]):
            spec = subfiber_spectrum(j, tau, float(tau2), phi, psi, cfg["gap_max"])
            for value in spec.values:
                rows.append({"tau_prime": float(tau2), "band_value": float(value), "j": j})
    out, fig = _out_paths(cfg, "essential")
    emit(out, ["tau_prime", "band_value", "j"], rows, cfg, cfg["format"])
    if cfg["plot"]:
        from .plotting import plot_band_sweep

        plot_band_sweep(rows, fig, f"collapsed-gap bands, tau={tau:g}, {desc}")
    values = [r["band_value"] for r in rows]
    print(f"wrote {out} ({len(rows)} rows, hull [{min(values):.6g}, {max(values):.6g}])")
    return 0


def run_bloch(cfg: dict) -> int:
    phi, psi, desc = resolve_model(cfg)
    if cfg["ring"] < 1 or cfg["gap_max"] < 1:
        raise ConfigError("need ring >= 1 and gap-max >= 1")
    disc = bloch_check(phi, psi, cfg["ring"], cfg["gap_max"])
    ok = disc <= BLOCH_TOL
    print(f"ring {cfg['ring']} vs fiber spectra: discrepancy = {disc:.3e} : "
          f"{'PASS' if ok else 'FAIL'} (tol {BLOCH_TOL:g})")
    return 0 if ok else 1


def _resolve_study(cfg: dict):
    """Shared operator/window construction of nonprop and evolve."""
    phi, psi, desc = resolve_model(cfg)
    n = phi.dim
    j = cfg["j"]
    if n < 2:
        raise ConfigError("gap studies need at least two particles")
    if not 2 <= j <= n:
        raise ConfigError(f"gap index j must lie in [2, {n}], got {j}")
    if cfg["band_grid"] < 1 or cfg["band_gap_max"] < 1:
        raise ConfigError("need band-grid >= 1 and band-gap-max >= 1")
    if cfg["study"] == "fiber":
        gap_max = cfg["gap_max"] if cfg["gap_max"] else 300
        op = fiber_hamiltonian(wrap_torus(cfg["tau"]), phi, psi, gap_max)
        desc = f"{desc}, fiber tau={wrap_torus(cfg['tau']):g}, gap_max={gap_max}"
    else:
        gap_max = cfg["gap_max"] if cfg["gap_max"] else 40
        z1 = parse_span(cfg["z1"])
        box = TruncationBox(n=n, gap_max=gap_max, first_range=z1)
        try:
            op = toeplitz_plus_potential(phi, psi, LatticeDomain.full_ordered(n), box)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        desc = f"{desc}, full z1={z1[0]}..{z1[1]}, gap_max={gap_max}"
    _check_hermitian(op)
    band = subfiber_union(j, phi, psi, cfg["band_grid"], cfg["band_gap_max"])
    lo, hi = band.hull()
    width = max(hi - lo, 1e-9)
    if cfg["window_center"] is not None:
        window = EnergyWindow.bump(cfg["window_center"], cfg["window_halfwidth"])
        if window.lo < hi and window.hi > lo:
            print(
                f"warning: window [{window.lo:g}, {window.hi:g}] intersects the "
                f"avoided band [{lo:g}, {hi:g}]; no decay is guaranteed",
                file=sys.stderr,
            )
    else:
        margin = cfg["outlier_margin"] if cfg["outlier_margin"] is not None else width / 100.0
        outliers = detect_outliers(eig_dense(op).values, lo, hi, margin)
        if len(outliers) == 0:
            raise ContractError(
                f"no eigenvalue clears the band [{lo:.6g}, {hi:.6g}] by {margin:.3g}; "
                "scan other amplitudes (e.g. raise b) or set --window-center"
            )
        dist = np.minimum(np.abs(outliers - lo), np.abs(outliers - hi))
        center = float(outliers[int(np.argmax(dist))])
        window = isolating_window(center, lo, hi, cfg["window_halfwidth"])
    control = EnergyWindow.bump((lo + hi) / 2.0, min(cfg["window_halfwidth"], width / 4.0))
    return op, j, window, control, (lo, hi), desc


def run_nonprop(cfg: dict) -> int:
    n_values = parse_int_list(cfg["n_range"])
    if not n_values:
        raise ConfigError("empty n-range")
    op, j, window, control, band, desc = _resolve_study(cfg)
    norms = nonprop_sweep(op, j, n_values, window)
    control_norms = nonprop_sweep(op, j, n_values, control)
    rows = [{"n": n, "norm": v} for n, v in zip(n_values, norms)]
    control_rows = [{"n": n, "norm": v} for n, v in zip(n_values, control_norms)]
    out, fig = _out_paths(cfg, "nonprop")
    emit(out, ["n", "norm"], rows, cfg, cfg["format"])
    control_out = out.with_name(out.stem + "_control" + out.suffix)
    emit(control_out, ["n", "norm"], control_rows, cfg, cfg["format"])
    if cfg["plot"]:
        from .plotting import plot_decay

        plot_decay(rows, control_rows, fig, f"gap-{j} localisation, {desc}")
    print(f"window support [{window.lo:.6g}, {window.hi:.6g}], "
          f"avoided band [{band[0]:.6g}, {band[1]:.6g}]")
    print(f"wrote {out} and {control_out}; norm {norms[0]:.3e} -> {norms[-1]:.3e}")
    return 0


def run_evolve(cfg: dict) -> int:
    if cfg["t_step"] <= 0 or cfg["t_max"] < 0:
        raise ConfigError("need t-step > 0 and t-max >= 0")
    op, j, window, _control, band, desc = _resolve_study(cfg)
    n_region = cfg["n_region"]
    steps = int(round(cfg["t_max"] / cfg["t_step"]))
    grid = np.arange(steps + 1, dtype=float) * cfg["t_step"]
    rng = np.random.default_rng(cfg["seed"])
    g = rng.standard_normal(op.size)
    f = functional_calculus(op, window).matrix @ g
    fnorm = float(np.linalg.norm(f))
    gnorm = float(np.linalg.norm(g))
    if fnorm <= 1e-12 * gnorm:
        raise ContractError("the energy window captures no spectral weight")
    ratios = dynamical_ratios(op, j, n_region, f, grid)
    bound = nonprop_norm(op, j, n_region, window) * gnorm / fnorm
    rows = [{"t": float(t), "ratio": float(r)} for t, r in zip(grid, ratios)]
    out, fig = _out_paths(cfg, "evolve")
    emit(out, ["t", "ratio"], rows, cfg, cfg["format"])
    if cfg["plot"]:
        from .plotting import plot_ratios

        plot_ratios(rows, bound, fig, f"region overlap, gap {j} >= {n_region}, {desc}")
    print(f"window support [{window.lo:.6g}, {window.hi:.6g}], "
          f"avoided band [{band[0]:.6g}, {band[1]:.6g}]")
    print(f"wrote {out}; max ratio {float(np.max(ratios)):.3e}, static bound {bound:.3e}")
    return 0


RUNNERS = {
    "verify-equivalence": run_verify,
    "spectrum": run_spectrum,
    "fiber": run_fiber,
    "essential": run_essential,
    "bloch": run_bloch,
    "nonprop": run_nonprop,
    "evolve": run_evolve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = merge_config(ns.cmd, ns)
        return RUNNERS[ns.cmd](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ContractError as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
