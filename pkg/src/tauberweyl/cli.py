"""Command-line front end: ``tauberweyl spectrum | trace | verify | weyl``.

Configuration comes from built-in defaults, then an optional JSON file
(``--config``), then command-line flags; flags win.  Every JSON report embeds
the package version and a SHA-256 hash of the resolved configuration.

Exit codes: 0 success, 1 a check failed, 2 usage or domain error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from ._io import canonical_json, config_hash, write_csv, write_json
from .errors import AccuracyError, TauberWeylError

FORMATS = """\
output files (all floats printed with 17 significant digits):
  spectrum:  spectrum.csv      sigma,multiplicity
             lengths.csv       length
             spectrum.json     summary and provenance
  trace:     trace_d{k}.csv    tau,re,im   (k = 0..--derivatives)
             singularities.json  detected peaks, expected lengths, matches
  verify:    verify.csv        suite,case,metric,value,threshold,pass
             verify.json       the same rows plus provenance
  weyl:      weyl.json         full pipeline report
             weyl_envelope.csv window_start,max_abs_remainder
             weyl_extremes.csv sigma,right_limit,left_limit
             weyl_A.csv        sigma,re,im
             weyl_regulator.csv Sigma,R,saturated   (unless --no-regulator)
"""

DEFAULTS = {
    "manifold": None,
    "basis": None,
    "dim": None,
    "sigma_max": None,
    "eigenvalues": None,
    "t_max": None,
    "gaussian_h": None,
    "sobolev_order": 0.0,
    "weighted": False,
    "tau_min": -4.0,
    "tau_max": 4.0,
    "tau_step": 0.001,
    "derivatives": 0,
    "time_scale": 1.0,
    "peak_min": 0.5,
    "peak_window": 0.05,
    "tolerance": 1e-6,
    "sweep_scale": 2,
    "regulator": True,
    "T_list": [2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0],
    "ell": 1,
    "Lam": 1.0,
    "slack": 2.0,
    "seed": 0,
    "threads": 1,
    "out": ".",
}

# keys that do not influence any computed number and are left out of the hash
_UNHASHED = ("out", "threads")


class ConfigError(TauberWeylError, ValueError):
    """Invalid or incomplete experiment configuration."""


def _parse_basis(text):
    """``"1,0;0,1"`` -> [[1, 0], [0, 1]] (rows separated by ';')."""
    try:
        rows = [[float(x) for x in row.split(",")] for row in text.split(";")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"malformed basis {text!r}: {exc}") from None
    return rows


def _parse_floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"malformed list {text!r}: {exc}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--config", help="JSON file with configuration keys (flags override it)")
    g.add_argument("--out", help="output directory (default: current directory)")
    g.add_argument("--seed", type=int, help="seed for bootstrap resampling (default 0)")
    g.add_argument("--threads", type=int, help="worker threads (default 1)")
    g.add_argument("--dry-run", action="store_true", default=None,
                   help="print the resolved configuration and exit")

    man = argparse.ArgumentParser(add_help=False)
    g = man.add_argument_group("manifold")
    g.add_argument("--manifold", choices=("torus", "sphere"))
    g.add_argument("--basis", type=_parse_basis,
                   help='torus basis, rows separated by ";", e.g. "1,0;0,1" (columns generate the lattice)')
    g.add_argument("--dim", type=int, help="sphere dimension")
    g.add_argument("--sigma-max", type=float, help="frequency enumeration radius")
    g.add_argument("--eigenvalues", type=int, help="number of eigenvalues (sharp cutoff)")
    g.add_argument("--time-scale", type=float, help="tau is measured in units of 1/time-scale")

    parser = argparse.ArgumentParser(
        prog="tauberweyl", description="Weyl-law remainder laboratory for flat tori and spheres.",
        epilog=FORMATS, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.RawDescriptionHelpFormatter

    p = sub.add_parser("spectrum", parents=[common, man], epilog=FORMATS, formatter_class=fmt,
                       help="enumerate a spectrum and its length spectrum")
    p.add_argument("--t-max", type=float, help="largest loop length (default 10)")

    p = sub.add_parser("trace", parents=[common, man], epilog=FORMATS, formatter_class=fmt,
                       help="sample the regularised half-wave trace and locate its peaks")
    p.add_argument("--gaussian-h", type=float, help="Gaussian cutoff scale h (default: sharp cutoff)")
    p.add_argument("--sobolev-order", type=float, help="weight <sigma>^-s (default 0)")
    p.add_argument("--weighted", action="store_true", default=None,
                   help="inverse-tau weighted trace of N - Z (grid must avoid tau = 0)")
    p.add_argument("--tau-min", type=float)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--tau-step", type=float)
    p.add_argument("--derivatives", type=int, help="highest derivative order written (default 0)")
    p.add_argument("--peak-min", type=float, help="smallest tau searched for peaks (default 0.5)")
    p.add_argument("--peak-window", type=float, help="peak merge window (default 0.05)")

    p = sub.add_parser("verify", parents=[common], epilog=FORMATS, formatter_class=fmt,
                       help="closed-form checks of the contour identity and bounds")
    p.add_argument("--tolerance", type=float, help="residual threshold (default 1e-6)")
    p.add_argument("--sweep-scale", type=int, help="grid enlargement for the bound sweep (default 2)")

    p = sub.add_parser("weyl", parents=[common, man], epilog=FORMATS, formatter_class=fmt,
                       help="Weyl remainder envelope, regulator and mean-to-max report")
    p.add_argument("--gaussian-h", type=float, help="cutoff scale for the regulator norms")
    p.add_argument("--no-regulator", dest="regulator", action="store_false", default=None,
                   help="skip the regulator and mean-to-max stages")
    p.add_argument("--T-list", dest="T_list", type=_parse_floats,
                   help="comma-separated contour radii for the norm table")
    p.add_argument("--ell", type=int, help="Sobolev order of the regulator norm (default 1)")
    p.add_argument("--lam", dest="Lam", type=float, help="regulator scale Lambda (default 1)")
    p.add_argument("--slack", type=float, help="mean-to-max holdout slack (default 2)")
    return parser


def resolve_config(args):
    """Defaults, then the JSON file, then flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(loaded) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(loaded)
    for key, val in vars(args).items():
        if key in DEFAULTS and val is not None:
            cfg[key] = val
    cfg["command"] = args.command
    return cfg


def provenance(cfg):
    hashed = {k: v for k, v in cfg.items() if k not in _UNHASHED}
    return {"version": __version__, "config_hash": config_hash(hashed), "config": hashed}


def _require(cfg, key, why):
    if cfg.get(key) is None:
        raise ConfigError(f"missing required field '{key}' ({why})")
    return cfg[key]


def make_manifold(cfg):
    from .spectral_models import Lattice, Sphere, Torus
    kind = _require(cfg, "manifold", "torus or sphere")
    if kind == "torus":
        basis = np.array(_require(cfg, "basis", "torus lattice basis"), dtype=float)
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
            raise ConfigError(f"basis must be a square matrix, got shape {basis.shape}")
        return Torus(Lattice(basis))
    if kind == "sphere":
        return Sphere(int(_require(cfg, "dim", "sphere dimension")))
    raise ConfigError(f"unknown manifold {kind!r}")


def _enumerate(m, radius):
    from .spectral_models import Sphere, enumerate_sphere_spectrum, enumerate_torus_spectrum
    if isinstance(m, Sphere):
        return enumerate_sphere_spectrum(m.dimension, radius)
    return enumerate_torus_spectrum(m.lattice, radius)


def spectrum_with_count(m, count):
    """A spectrum holding at least ``count`` eigenvalues, radius grown from the Weyl estimate."""
    from .weyl_analysis import weyl_leading_coefficient
    d = m.dimension
    radius = 1.1 * (count / weyl_leading_coefficient(m)) ** (1.0 / d) + 1.0
    while True:
        s = _enumerate(m, radius)
        if s.total >= count:
            return s
        radius *= 1.25


def _spectrum(m, cfg, minimum_radius=None):
    if cfg["eigenvalues"] is not None:
        s = spectrum_with_count(m, int(cfg["eigenvalues"]))
        if minimum_radius is not None and s.sigma_max < minimum_radius:
            s = _enumerate(m, minimum_radius)
        return s
    radius = cfg["sigma_max"] if cfg["sigma_max"] is not None else minimum_radius
    if radius is None:
        raise ConfigError("missing required field 'sigma_max' (or 'eigenvalues')")
    return _enumerate(m, float(radius))


def _lengths(m, T_max):
    from .spectral_models import geodesic_length_spectrum
    return geodesic_length_spectrum(m, T_max)


def cmd_spectrum(cfg):
    m = make_manifold(cfg)
    s = _spectrum(m, cfg)
    if cfg["eigenvalues"] is not None:
        sig, mult = s.truncate_count(int(cfg["eigenvalues"]))
        rows = [(float(a), int(b)) for a, b in zip(sig, mult)]
    else:
        rows = s.to_csv_rows()
    T_max = float(cfg["t_max"]) if cfg["t_max"] is not None else 10.0
    ls = _lengths(m, T_max)
    out = cfg["out"]
    write_csv(os.path.join(out, "spectrum.csv"), ["sigma", "multiplicity"], rows)
    write_csv(os.path.join(out, "lengths.csv"), ["length"], [(float(x),) for x in ls.lengths])
    report = provenance(cfg) | {
        "manifold": m.describe(), "levels": len(rows),
        "eigenvalues": int(sum(r[1] for r in rows)), "sigma_max": s.sigma_max,
        "lengths": len(ls.lengths), "T_max": T_max}
    write_json(os.path.join(out, "spectrum.json"), report)
    print(f"{len(rows)} levels, {report['eigenvalues']} eigenvalues, {len(ls.lengths)} lengths")
    return 0


def _match_peaks(peaks, expected, match_tol=0.02, spurious_tol=0.05):
    locs = np.array([p.tau for p in peaks])
    matches = []
    for L in expected:
        if locs.size:
            j = int(np.argmin(np.abs(locs - L)))
            dist = float(abs(locs[j] - L))
            matches.append({"length": float(L), "peak": float(locs[j]), "distance": dist,
                            "matched": dist <= match_tol})
        else:
            matches.append({"length": float(L), "peak": None, "distance": math.inf,
                            "matched": False})
    spurious = []
    for p in peaks:
        dist = float(np.min(np.abs(np.asarray(expected) - p.tau))) if len(expected) else math.inf
        if dist > spurious_tol:
            spurious.append({"tau": p.tau, "distance": dist})
    return matches, spurious


def cmd_trace(cfg):
    from .half_wave_trace import (
        GAUSSIAN_REACH, GaussianScale, RegularizationSpec, SharpCount, TauGrid,
        detect_singularities, sample_trace)
    from .weyl_analysis import weyl_polynomial
    m = make_manifold(cfg)
    h = cfg["gaussian_h"]
    if h is not None:
        if not h > 0:
            raise ConfigError("gaussian_h must be positive")
        s = _spectrum(m, cfg, minimum_radius=GAUSSIAN_REACH / h)
        cutoff = GaussianScale(float(h))
    else:
        s = _spectrum(m, cfg)
        count = int(cfg["eigenvalues"]) if cfg["eigenvalues"] is not None else s.total
        cutoff = SharpCount(count)
    spec = RegularizationSpec(cutoff, float(cfg["sobolev_order"]), bool(cfg["weighted"]))
    if cfg["tau_max"] <= cfg["tau_min"]:
        raise ConfigError("tau_max must exceed tau_min")
    grid = TauGrid.from_range(cfg["tau_min"], cfg["tau_max"], cfg["tau_step"])
    subtract = weyl_polynomial(m, s) if spec.weight_by_inverse_tau else None
    scale = float(cfg["time_scale"])
    out = cfg["out"]
    traces = {}
    for k in range(int(cfg["derivatives"]) + 1):
        tr = sample_trace(s, grid, spec, k, time_scale=scale, subtract=subtract,
                          threads=int(cfg["threads"]))
        traces[k] = tr
        rows = zip(tr.tau.tolist(), tr.values.real.tolist(), tr.values.imag.tolist())
        write_csv(os.path.join(out, f"trace_d{k}.csv"), ["tau", "re", "im"], rows)
    lo = max(float(cfg["peak_min"]), grid.start)
    hi = float(grid.tau[-1])
    peaks, expected = [], []
    if hi > lo:
        peaks = detect_singularities(traces[0], window=float(cfg["peak_window"]),
                                     tau_range=(lo, hi))
        T_max = float(cfg["t_max"]) if cfg["t_max"] is not None else hi * scale
        lengths = _lengths(m, T_max).lengths / scale
        expected = [float(x) for x in lengths if lo < x < hi]
    matches, spurious = _match_peaks(peaks, expected)
    report = provenance(cfg) | {
        "manifold": m.describe(), "regularization": spec.describe(),
        "eigenvalues_used": int(cutoff.m) if isinstance(cutoff, SharpCount) else None,
        "search_range": [lo, hi],
        "peaks": [{"tau": p.tau, "uncertainty": p.uncertainty, "height": p.height} for p in peaks],
        "expected_lengths": expected, "matches": matches, "spurious": spurious,
        "all_matched": all(x["matched"] for x in matches), "no_spurious": not spurious}
    write_json(os.path.join(out, "singularities.json"), report)
    print(f"{len(peaks)} peaks, {sum(x['matched'] for x in matches)}/{len(matches)} lengths matched, "
          f"{len(spurious)} spurious")
    return 0


def verify_rows(tolerance, sweep_scale, threads=1):
    """Rows ``(suite, case, metric, value, threshold, passed)`` of the verification table."""
    from .suites import HIGH_FREQUENCY_SIGMA, bound_suite, boundary_suite, ibp_suite, identity_suite
    rows = []
    for r in identity_suite(threads=threads):
        case = f"{r['case']}:Sigma={r['Sigma']:g}:T={r['T']:g}:M={r['M']}"
        rows.append(("identity", case, "residual", r["residual"], tolerance,
                     r["residual"] < tolerance))
    for label, S in (("ibp", 10.0), ("ibp_high_frequency", HIGH_FREQUENCY_SIGMA)):
        for r in ibp_suite(Sigma=S):
            case = f"{r['case']}:N={r['N']}:Sigma={S:g}"
            rows.append((label, case, "relative_difference", r["relative_difference"], tolerance,
                         r["relative_difference"] < tolerance))
    for r in boundary_suite():
        rows.append(("boundary_value", f"tau={r['tau']:g}", "error", r["error"], tolerance,
                     r["error"] < tolerance))
    for r in bound_suite(sweep_scale, threads=threads):
        ok = 0.5 <= r["ratio"] <= 2.0
        rows.append(("bounds", f"{r['quantity']}:{r['case']}", "sweep_ratio", r["ratio"], 2.0, ok))
    return rows


def cmd_verify(cfg):
    tol = float(cfg["tolerance"])
    if not tol > 0:
        raise ConfigError("tolerance must be positive")
    scale = int(cfg["sweep_scale"])
    if scale < 1:
        raise ConfigError("sweep_scale must be >= 1")
    rows = verify_rows(tol, scale, int(cfg["threads"]))
    out = cfg["out"]
    header = ["suite", "case", "metric", "value", "threshold", "pass"]
    write_csv(os.path.join(out, "verify.csv"), header, rows)
    failing = [dict(zip(header, r)) for r in rows if not r[5]]
    report = provenance(cfg) | {"rows": [dict(zip(header, r)) for r in rows],
                                "failing": failing, "passed": not failing}
    write_json(os.path.join(out, "verify.json"), report)
    for r in failing:
        print(f"FAIL {r['suite']} {r['case']} {r['metric']}={r['value']:.3e} "
              f"(threshold {r['threshold']:g})", file=sys.stderr)
    print(f"{len(rows) - len(failing)}/{len(rows)} checks passed")
    return 1 if failing else 0


def cmd_weyl(cfg):
    from .weyl_analysis import run_weyl_pipeline
    m = make_manifold(cfg)
    sigma_max = float(_require(cfg, "sigma_max", "analysis range"))
    T_list = [float(t) for t in cfg["T_list"]]
    if not T_list or min(T_list) < 1:
        raise ConfigError("T_list must be nonempty with every radius >= 1")
    res = run_weyl_pipeline(
        m, sigma_max, regulator=bool(cfg["regulator"]), h=cfg["gaussian_h"],
        ell=int(cfg["ell"]), Lam=float(cfg["Lam"]), T_list=tuple(sorted(T_list)),
        slack=float(cfg["slack"]), seed=int(cfg["seed"]), threads=int(cfg["threads"]))
    out = cfg["out"]
    report = provenance(cfg) | res.to_json()
    write_json(os.path.join(out, "weyl.json"), report)
    env = res.envelope
    write_csv(os.path.join(out, "weyl_envelope.csv"), ["window_start", "max_abs_remainder"],
              zip(env.windows, env.maxima))
    sig, val = res.extremes
    n = sig.size // 2
    write_csv(os.path.join(out, "weyl_extremes.csv"), ["sigma", "right_limit", "left_limit"],
              zip(sig[:n].tolist(), val[:n].tolist(), val[n:].tolist()))
    write_csv(os.path.join(out, "weyl_A.csv"), ["sigma", "re", "im"],
              zip(res.A_sigma.tolist(), np.real(res.A_values).tolist(),
                  np.imag(res.A_values).tolist()))
    status = 0
    msg = f"envelope slope {env.slope:.4f} (band {env.band[0]:.4f}..{env.band[1]:.4f})"
    if res.regulator is not None:
        reg = res.regulator
        write_csv(os.path.join(out, "weyl_regulator.csv"), ["Sigma", "R", "saturated"],
                  zip(reg.sigma.tolist(), reg.R.tolist(), [bool(x) for x in reg.saturated]))
        holds = res.mean_to_max.holds
        msg += f"; mean-to-max {'holds' if holds else 'FAILS'}"
        if not holds:
            status = 1
    print(msg)
    return status


COMMANDS = {"spectrum": cmd_spectrum, "trace": cmd_trace, "verify": cmd_verify, "weyl": cmd_weyl}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.dry_run:
            sys.stdout.write(canonical_json(provenance(cfg)))
            return 0
        return COMMANDS[args.command](cfg)
    except AccuracyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (TauberWeylError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
