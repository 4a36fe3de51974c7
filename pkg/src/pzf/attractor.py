"""
Long-run behaviour: peak statistics, largest Lyapunov exponent, attractor
classification, parameter scans and Hopf-point location.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .equilibria import interior_equilibrium
from .errors import (
    InsufficientPeaks,
    NoInteriorEquilibrium,
    NoSignChange,
    PreconditionError,
    PZFError,
)
from .integrator import IntegratorConfig, TangentResult, integrate_with_tangent
from .local_stability import characteristic_coefficients, cubic_roots
from .model import (
    DilutionMode,
    EffectiveParameters,
    RawParameters,
    derive_effective,
    jacobian,
    rhs_norm,
)

EXTINCTION_TOL = 1e-3
CHAOS_TOL = 1e-3
FIXED_POINT_TOL = 1e-6
PEAK_REL_TOL = 1e-3
MIN_PEAKS = 8
COMPONENTS = ("P", "Z", "F")


class AttractorKind(str, Enum):
    FIXED_POINT = "FixedPoint"
    PERIODIC = "PeriodicN"
    CHAOTIC = "Chaotic"
    COLLAPSE = "Collapse"
    UNRESOLVED = "Unresolved"


@dataclass
class LyapunovEstimate:
    lambda1: float
    converged: bool
    last_half: float
    last_quarter: float
    horizon: float
    transient: float

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass
class AttractorSummary:
    kind: AttractorKind
    lambda1: float
    lambda_converged: bool
    peak_values: List[float] = field(default_factory=list)
    state: Optional[Tuple[float, float, float]] = None
    levels: Optional[int] = None
    period_days: Optional[float] = None
    component: Optional[str] = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def label(self):
        if self.kind is AttractorKind.PERIODIC:
            return f"PeriodicN({self.levels})"
        if self.kind is AttractorKind.COLLAPSE:
            return f"Collapse({self.component})"
        return self.kind.value

    def to_dict(self):
        out = dataclasses.asdict(self)
        out["kind"] = self.kind.value
        out["label"] = self.label
        if self.state is not None:
            out["state"] = list(self.state)
        return out


# ---------------------------------------------------------------------------
# peaks and periodicity

def detect_peaks(times, values) -> List[Tuple[float, float]]:
    """Strict interior local maxima, refined by a parabola through 3 points."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(v) < 3:
        raise ValueError("need at least 3 samples")
    idx = np.nonzero((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:]))[0] + 1
    peaks = []
    for i in idx:
        h1 = t[i] - t[i - 1]
        h2 = t[i + 1] - t[i]
        d1 = (v[i] - v[i - 1]) / h1
        d2 = (v[i + 1] - v[i]) / h2
        curv = (d2 - d1) / (h1 + h2)
        slope = (d1 * h2 + d2 * h1) / (h1 + h2)
        if curv < 0:
            tau = -slope / (2.0 * curv)
            peaks.append((float(t[i] + tau), float(v[i] - slope * slope / (4.0 * curv))))
        else:
            peaks.append((float(t[i]), float(v[i])))
    return peaks


def cluster_levels(values: Sequence[float], rel_tol: float = PEAK_REL_TOL):
    """Group values into levels. Returns ``(labels, level_means)``.

    Sorted values open a new level once they exceed the level's smallest
    member by more than ``rel_tol`` relative, so a continuum is not chained
    into one level.
    """
    vals = np.asarray(values, dtype=float)
    order = np.argsort(vals, kind="stable")
    labels = np.empty(len(vals), dtype=int)
    means = []
    members = []
    start = None
    for i in order:
        v = vals[i]
        if start is None or v - start > rel_tol * max(abs(start), 1e-300):
            start = v
            members.append([])
        members[-1].append(v)
        labels[i] = len(members) - 1
    means = [float(np.mean(m)) for m in members]
    return labels, means


def _cycle_length(labels) -> Optional[int]:
    n = len(labels)
    for L in range(1, n // 2 + 1):
        if all(labels[i] == labels[i + L] for i in range(n - L)):
            return L
    return None


def periodicity(values, rel_tol: float = PEAK_REL_TOL):
    """``(levels, cycle_length, level_means)`` or None if the sequence does not repeat."""
    if len(values) < MIN_PEAKS:
        raise InsufficientPeaks(f"{len(values)} peaks, need at least {MIN_PEAKS}")
    labels, means = cluster_levels(values, rel_tol)
    L = _cycle_length(list(labels))
    if L is None:
        return None
    return len(means), L, means


def estimate_period(peaks, rel_tol: float = PEAK_REL_TOL) -> Optional[int]:
    """Number of distinct peak levels of a repeating peak sequence.

    ``peaks`` may be values or ``(time, value)`` pairs. Returns None when
    the clustered sequence is not cyclic.
    """
    values = [pk[1] if isinstance(pk, (tuple, list)) else pk for pk in peaks]
    found = periodicity(values, rel_tol)
    return None if found is None else found[0]


# ---------------------------------------------------------------------------
# Lyapunov exponent

def lyapunov_from_tangent(res: TangentResult, transient: float) -> LyapunovEstimate:
    """Leading-direction growth rate after ``transient`` from a tangent run."""
    t = res.renorm_times
    logs = res.log_stretch[:, 0]
    horizon = float(t[-1])
    window = horizon - transient

    def rate(t0):
        mask = t > t0 + 1e-9
        return float(np.sum(logs[mask]) / (horizon - t0))

    lam = rate(transient)
    half = rate(horizon - window / 2.0)
    quarter = rate(horizon - window / 4.0)
    diff = abs(half - quarter)
    converged = bool(diff <= 0.2 * max(abs(half), abs(quarter)) or diff < 1e-4)
    return LyapunovEstimate(lam, converged, half, quarter, horizon, float(transient))


def largest_lyapunov(p: EffectiveParameters, s0, cfg: IntegratorConfig = IntegratorConfig(),
                     transient: float = 500.0, renorm_interval: float = 1.0) -> LyapunovEstimate:
    """Benettin estimate of the largest Lyapunov exponent (per day)."""
    if cfg.t_end < 2.0 * transient:
        raise PreconditionError(f"horizon {cfg.t_end!r} must be at least twice the transient {transient!r}")
    res = integrate_with_tangent(p, s0, cfg=cfg, renorm_interval=renorm_interval)
    return lyapunov_from_tangent(res, transient)


# ---------------------------------------------------------------------------
# classification

def classify_attractor(p: EffectiveParameters, s0, cfg: IntegratorConfig = IntegratorConfig(),
                       transient: float = 500.0, *,
                       extinction_tol: float = EXTINCTION_TOL,
                       chaos_tol: float = CHAOS_TOL,
                       fixed_point_tol: float = FIXED_POINT_TOL,
                       peak_rel_tol: float = PEAK_REL_TOL,
                       renorm_interval: float = 1.0) -> AttractorSummary:
    """Classify the long-run behaviour of the trajectory from ``s0``.

    Tests in order: collapse of a component, fixed point, periodic Z-peak
    sequence, chaos (``lambda1 > chaos_tol``); otherwise Unresolved.
    """
    if cfg.t_end < 2.0 * transient:
        raise PreconditionError(f"horizon {cfg.t_end!r} must be at least twice the transient {transient!r}")
    res = integrate_with_tangent(p, s0, cfg=cfg, renorm_interval=renorm_interval)
    lyap = lyapunov_from_tangent(res, transient)
    traj = res.trajectory
    times, states = traj.times, traj.states
    final = traj.final
    residual = rhs_norm(p, final)

    tail = times >= times[-1] - 0.2 * (times[-1] - times[0])
    tail_max = states[tail].max(axis=0)
    post = times > transient
    peaks = detect_peaks(times[post], states[post, 1]) if post.sum() >= 3 else []
    diag = {
        "final_state": list(final),
        "rhs_norm_final": residual,
        "tail_max": [float(v) for v in tail_max],
        "n_peaks": len(peaks),
        "lambda_last_half": lyap.last_half,
        "lambda_last_quarter": lyap.last_quarter,
    }
    common = dict(lambda1=lyap.lambda1, lambda_converged=lyap.converged, diagnostics=diag)

    collapsed = [name for i, name in enumerate(COMPONENTS)
                 if tail_max[i] < extinction_tol and s0[i] > extinction_tol]
    if collapsed:
        diag["collapsed"] = collapsed
        # report the highest trophic level that died out
        return AttractorSummary(AttractorKind.COLLAPSE, component=collapsed[-1],
                                state=final, **common)

    if residual < fixed_point_tol and lyap.lambda1 < 0:
        return AttractorSummary(AttractorKind.FIXED_POINT, state=final, **common)

    peak_values = [v for _, v in peaks]
    if len(peaks) >= MIN_PEAKS:
        found = periodicity(peak_values, peak_rel_tol)
        if found is not None:
            levels, L, means = found
            pt = np.array([t for t, _ in peaks])
            period = float(np.mean(pt[L:] - pt[:-L]))
            return AttractorSummary(AttractorKind.PERIODIC, levels=levels, period_days=period,
                                    peak_values=means, **common)
        diag["periodicity"] = "NotPeriodic"
    else:
        diag["periodicity"] = "InsufficientPeaks"

    if lyap.lambda1 > chaos_tol:
        return AttractorSummary(AttractorKind.CHAOTIC, peak_values=peak_values, **common)
    return AttractorSummary(AttractorKind.UNRESOLVED, peak_values=peak_values, **common)


# ---------------------------------------------------------------------------
# scans

@dataclass
class ScanResult:
    param_name: str
    values: np.ndarray
    summaries: List[Optional[AttractorSummary]]
    errors: List[Optional[str]]


def _scan_point(args):
    raw, name, value, mode, s0, cfg, transient = args
    try:
        p = derive_effective(dataclasses.replace(raw, **{name: float(value)}), mode)
        return classify_attractor(p, s0, cfg, transient), None
    except PZFError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def scan_grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if not hi > lo:
        raise ValueError("range must be increasing")
    values = np.linspace(lo, hi, steps)
    values[0], values[-1] = lo, hi
    return values


def bifurcation_scan(raw: RawParameters, param_name: str, lo: float, hi: float, steps: int,
                     cfg: IntegratorConfig = IntegratorConfig(),
                     mode=DilutionMode.DOWNSTREAM, s0=(1.0, 1.0, 1.0),
                     transient: float = 500.0, workers: int = 1) -> ScanResult:
    """Classify the attractor at each grid value of one raw parameter.

    ``param_name`` is any :class:`RawParameters` field (``sU``, ``sD``,
    ``gF``, or the overrides ``gS``, ``m2``, ``m3``). Grid points are
    independent; ``workers > 1`` evaluates them in worker processes and the
    rows come back in grid order either way.
    """
    if param_name not in {f.name for f in dataclasses.fields(RawParameters)}:
        raise ValueError(f"unknown scan parameter {param_name!r}")
    values = scan_grid(lo, hi, steps)
    mode = DilutionMode(mode)
    jobs = [(raw, param_name, v, mode, tuple(s0), cfg, transient) for v in values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_point, jobs))
    else:
        results = [_scan_point(job) for job in jobs]
    return ScanResult(param_name, values,
                      [r[0] for r in results], [r[1] for r in results])


# ---------------------------------------------------------------------------
# Hopf points

@dataclass
class HopfResult:
    value: float
    eigenvalues: Tuple[complex, complex, complex]
    axis_distance: float
    iterations: int
    bracket: Tuple[float, float]

    def to_dict(self):
        return {
            "value": self.value,
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "axis_distance": self.axis_distance,
            "iterations": self.iterations,
            "bracket": list(self.bracket),
        }


def _axis_distance(eig):
    complex_pair = [z for z in eig if z.imag != 0.0]
    pool = complex_pair or list(eig)
    return min(abs(z.real) for z in pool)


def hopf_from_jacobian(jac_of: Callable[[float], np.ndarray], lo: float, hi: float,
                       tol: float = 1e-6, grid: int = 17) -> HopfResult:
    """Bisection on the Routh-Hurwitz margin ``D1 D2 - D3`` of ``jac_of(theta)``.

    Requires ``D1 > 0`` and ``D3 > 0`` on a coarse grid over the bracket and
    a sign change of the margin between the end points.
    """
    if not hi > lo:
        raise ValueError("bracket must satisfy lo < hi")

    def margin(theta):
        D1, D2, D3 = characteristic_coefficients(jac_of(theta))
        if not (D1 > 0 and D3 > 0):
            raise PreconditionError(f"D1={D1!r}, D3={D3!r} not both positive at {theta!r}")
        return D1 * D2 - D3

    for theta in np.linspace(lo, hi, grid):
        margin(float(theta))
    a, b = lo, hi
    fa, fb = margin(a), margin(b)
    if fa == 0.0 or fb == 0.0:
        c = a if fa == 0.0 else b
        eig = cubic_roots(*characteristic_coefficients(jac_of(c)))
        return HopfResult(c, eig, _axis_distance(eig), 0, (lo, hi))
    if fa * fb > 0:
        raise NoSignChange(f"margin has the same sign at {lo!r} ({fa!r}) and {hi!r} ({fb!r})")
    it = 0
    while b - a >= tol:
        c = 0.5 * (a + b)
        fc = margin(c)
        it += 1
        if fc == 0.0:
            a = b = c
            break
        if (fc > 0) == (fa > 0):
            a, fa = c, fc
        else:
            b = c
    c = 0.5 * (a + b)
    eig = cubic_roots(*characteristic_coefficients(jac_of(c)))
    return HopfResult(c, eig, _axis_distance(eig), it, (lo, hi))


def hopf_locate(raw: RawParameters, param_name: str, lo: float, hi: float,
                tol: float = 1e-6, mode=DilutionMode.DOWNSTREAM) -> HopfResult:
    """Locate a Hopf point of the interior equilibrium in one raw parameter."""
    if param_name not in {f.name for f in dataclasses.fields(RawParameters)}:
        raise ValueError(f"unknown parameter {param_name!r}")

    def jac_of(theta):
        p = derive_effective(dataclasses.replace(raw, **{param_name: float(theta)}), mode)
        eq = interior_equilibrium(p)
        if not eq:
            raise NoInteriorEquilibrium(
                f"no interior equilibrium at {param_name}={theta!r}: {eq.reason.value}")
        return jacobian(p, eq.state)

    return hopf_from_jacobian(jac_of, lo, hi, tol)
