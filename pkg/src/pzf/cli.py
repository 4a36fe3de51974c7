"""Command-line interface and output writers.

Usage::

    pzf [--config FILE] [--out-dir DIR] COMMAND [options]

Commands write one JSON or CSV file into ``--out-dir`` (default: the
current directory) and print its path. Exit codes: 0 success, 1 I/O
error, 2 configuration error, 3 numerical failure, 4 precondition failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .attractor import bifurcation_scan, classify_attractor, hopf_locate, largest_lyapunov
from .config import RunConfig, load_config
from .equilibria import all_equilibria, interior_equilibrium
from .errors import ConfigError, NumericalError, ParameterError, PreconditionError
from .global_stability import (
    BoundMode,
    absorbing_bound,
    lozinskii_average,
    mu_certificate,
    window_flags,
)
from .integrator import integrate
from .local_stability import classify_equilibrium

COMMANDS = ("equilibria", "stability", "simulate", "scan", "hopf", "lyapunov", "global-check")

# interior state reported for the reference parameter set, kept for comparison only
REFERENCE_INTERIOR = (1.809, 8.964, 3.112)


def _num(x) -> str:
    return repr(float(x))


def write_timeseries_csv(traj, path) -> None:
    """Header ``t,P,Z,F``; shortest round-trip decimals; LF line endings."""
    lines = ["t,P,Z,F"]
    for t, (P, Z, F) in zip(traj.times, traj.states):
        lines.append(f"{_num(t)},{_num(P)},{_num(Z)},{_num(F)}")
    _write_text(path, "\n".join(lines) + "\n")


def read_timeseries_csv(path):
    """Inverse of :func:`write_timeseries_csv`; returns ``(times, states)`` lists."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = fh.read().split("\n")
    if rows[0] != "t,P,Z,F":
        raise ValueError(f"{path}: unexpected header {rows[0]!r}")
    times, states = [], []
    for row in rows[1:]:
        if not row:
            continue
        t, P, Z, F = (float(v) for v in row.split(","))
        times.append(t)
        states.append((P, Z, F))
    return times, states


def _write_text(path, text):
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_json(obj, path) -> None:
    _write_text(path, json.dumps(obj, indent=2, allow_nan=False) + "\n")


def scan_rows(result):
    """CSV lines for a :class:`ScanResult`, one per grid value."""
    header = [result.param_name, "label", "kind", "levels", "period_days",
              "lambda1", "lambda_converged", "z_peaks", "error"]
    lines = [",".join(header)]
    for value, summary, error in zip(result.values, result.summaries, result.errors):
        if summary is None:
            cells = [_num(value), "Error", "", "", "", "", "", "", error.replace(",", ";")]
        else:
            cells = [
                _num(value), summary.label, summary.kind.value,
                "" if summary.levels is None else str(summary.levels),
                "" if summary.period_days is None else _num(summary.period_days),
                _num(summary.lambda1), str(summary.lambda_converged).lower(),
                ";".join(_num(v) for v in summary.peak_values), "",
            ]
        lines.append(",".join(cells))
    return lines


# ---------------------------------------------------------------------------
# commands

def _header(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "version": __version__,
            "config_fingerprint": cfg.fingerprint(), "delta_mode": cfg.delta_mode.value}


def _initial_state(opts):
    return (opts.p0, opts.z0, opts.f0)


def cmd_equilibria(cfg, opts):
    p = cfg.effective()
    eqs = all_equilibria(p)
    interior = interior_equilibrium(p)
    report = _header(cfg, "equilibria")
    report["effective"] = p.as_dict()
    report["provenance"] = list(p.notes)
    report["equilibria"] = [e.to_dict() for e in eqs]
    report["interior_absence"] = None if interior else {
        "reason": interior.reason.value, "detail": interior.detail}
    ref = {"interior_state": list(REFERENCE_INTERIOR), "flags": []}
    if interior:
        rel = [(mine - theirs) / theirs for mine, theirs in zip(interior.state, REFERENCE_INTERIOR)]
        ref["relative_difference"] = rel
        for name, r in zip("PZF", rel):
            if abs(r) > 0.01:
                ref["flags"].append(
                    f"{name}* differs from the reference value by {100 * r:.1f}%; "
                    f"the model's steady state has residual {interior.residual:.3g}")
    report["paper_reference"] = ref
    return "equilibria.json", report


def cmd_stability(cfg, opts):
    p = cfg.effective()
    entries = []
    for e in all_equilibria(p):
        entry = {"equilibrium": e.to_dict()}
        try:
            entry["report"] = classify_equilibrium(p, e).to_dict()
        except PreconditionError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
        entries.append(entry)
    report = _header(cfg, "stability")
    report["stability"] = entries
    return "stability.json", report


def cmd_simulate(cfg, opts):
    traj = integrate(cfg.effective(), _initial_state(opts), cfg.integrator)
    return "timeseries.csv", traj


def cmd_scan(cfg, opts):
    result = bifurcation_scan(cfg.raw, opts.param, opts.lo, opts.hi, opts.steps,
                              cfg.integrator, cfg.delta_mode, _initial_state(opts),
                              cfg.transient, workers=opts.workers)
    report = _header(cfg, "scan")
    report.update(param=result.param_name, values=[float(v) for v in result.values],
                  rows=[{"value": float(v), "error": err,
                         "summary": None if s is None else s.to_dict()}
                        for v, s, err in zip(result.values, result.summaries, result.errors)])
    return "scan", (result, report)


def cmd_hopf(cfg, opts):
    report = _header(cfg, "hopf")
    report.update(param=opts.param, bracket=[opts.lo, opts.hi], tol=opts.tol)
    result = hopf_locate(cfg.raw, opts.param, opts.lo, opts.hi, opts.tol, cfg.delta_mode)
    report["critical_value"] = result.value
    report["result"] = result.to_dict()
    return "hopf.json", report


def cmd_lyapunov(cfg, opts):
    est = largest_lyapunov(cfg.effective(), _initial_state(opts), cfg.integrator,
                           cfg.transient, opts.renorm_interval)
    report = _header(cfg, "lyapunov")
    report.update(lambda1=est.lambda1, converged=est.converged, estimate=est.to_dict())
    if opts.classify:
        summary = classify_attractor(cfg.effective(), _initial_state(opts),
                                     cfg.integrator, cfg.transient)
        report["attractor"] = summary.to_dict()
    return "lyapunov.json", report


def cmd_global_check(cfg, opts):
    p = cfg.effective()
    literal = absorbing_bound(p, BoundMode.PAPER)
    corrected = absorbing_bound(p, BoundMode.CORRECTED)
    cert = mu_certificate(p, corrected.rho)
    traj = integrate(p, _initial_state(opts), cfg.integrator)
    report = _header(cfg, "global-check")
    report.update(
        v=corrected.v,
        rho_paper=literal.rho,
        rho_corrected=corrected.rho,
        mu=cert.mu,
        holds=cert.holds,
        mu_with_rho_paper=mu_certificate(p, literal.rho).mu,
        lozinskii_average=lozinskii_average(p, traj),
        window_fraction=float(window_flags(p, traj).mean()),
        max_weighted_total=float((p.a * traj.states[:, 0] + traj.states[:, 1]
                                  + traj.states[:, 2]).max()),
    )
    return "global_check.json", report


HANDLERS = {
    "equilibria": cmd_equilibria,
    "stability": cmd_stability,
    "simulate": cmd_simulate,
    "scan": cmd_scan,
    "hopf": cmd_hopf,
    "lyapunov": cmd_lyapunov,
    "global-check": cmd_global_check,
}


def run(command: str, cfg: RunConfig, opts=None, out_dir=".") -> int:
    """Execute ``command`` and write its output file(s). Returns the exit code."""
    opts = opts if opts is not None else build_parser().parse_args([command])
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        name, payload = HANDLERS[command](cfg, opts)
        if name == "timeseries.csv":
            write_timeseries_csv(payload, out / name)
            written = [out / name]
        elif name == "scan":
            result, report = payload
            _write_text(out / "scan.csv", "\n".join(scan_rows(result)) + "\n")
            write_json(report, out / "scan.json")
            written = [out / "scan.csv", out / "scan.json"]
        else:
            write_json(payload, out / name)
            written = [out / name]
    except (ConfigError, ParameterError) as exc:
        _fail(command, exc)
        return 2
    except NumericalError as exc:
        _fail(command, exc)
        return 3
    except PreconditionError as exc:
        _fail(command, exc)
        if command == "hopf":
            report = _header(cfg, "hopf")
            report.update(param=opts.param, bracket=[opts.lo, opts.hi],
                          error=type(exc).__name__, message=str(exc))
            write_json(report, out / "hopf.json")
        return 4
    except OSError as exc:
        _fail(command, exc)
        return 1
    for path in written:
        print(path)
    return 0


def _fail(command, exc):
    print(f"pzf {command}: {type(exc).__name__}: {exc}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pzf", description="Analyses of the salinity-coupled plankton-fish food chain.")
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--out-dir", default=".", help="directory for output files")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def with_state(sp):
        sp.add_argument("--p0", type=float, default=1.0)
        sp.add_argument("--z0", type=float, default=1.0)
        sp.add_argument("--f0", type=float, default=1.0)
        return sp

    sub.add_parser("equilibria", help="all equilibria with residuals")
    sub.add_parser("stability", help="Routh-Hurwitz report per equilibrium")
    with_state(sub.add_parser("simulate", help="time series CSV"))
    sp = with_state(sub.add_parser("scan", help="attractor scan over one parameter"))
    sp.add_argument("--param", default="sU")
    sp.add_argument("--lo", type=float, default=5.0)
    sp.add_argument("--hi", type=float, default=8.5)
    sp.add_argument("--steps", type=int, default=50)
    sp.add_argument("--workers", type=int, default=1)
    sp = sub.add_parser("hopf", help="bisection for a Hopf point of the interior equilibrium")
    sp.add_argument("--param", default="sU")
    sp.add_argument("--lo", type=float, default=5.0)
    sp.add_argument("--hi", type=float, default=8.23)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp = with_state(sub.add_parser("lyapunov", help="largest Lyapunov exponent"))
    sp.add_argument("--renorm-interval", type=float, default=1.0)
    sp.add_argument("--classify", action="store_true", help="also classify the attractor")
    with_state(sub.add_parser("global-check", help="boundedness, certificate and Lozinskii average"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    opts = parser.parse_args(argv)
    try:
        cfg = load_config(opts.config) if opts.config else RunConfig()
    except ConfigError as exc:
        _fail(opts.command, exc)
        return 2
    except OSError as exc:
        _fail(opts.command, exc)
        return 1
    return run(opts.command, cfg, opts, opts.out_dir)


if __name__ == "__main__":
    sys.exit(main())
