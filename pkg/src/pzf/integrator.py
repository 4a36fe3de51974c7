"""
Deterministic explicit integrators for small autonomous systems.

Two methods are provided: classic fixed-step RK4 and the Dormand-Prince
5(4) embedded pair with standard step-size control and dense output. Both
work on plain Python floats, which is faster than numpy for three- and
twelve-dimensional systems.

Positivity: after every step the first ``n_pos`` components are checked.
Values in ``[-clamp_tol, positivity_floor)`` are set to zero; anything
further below zero is treated as a step-size failure.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NonFiniteState, PreconditionError, StepFailure
from .model import EffectiveParameters, make_rhs, make_tangent_rhs


class Method(str, Enum):
    RK4 = "rk4"
    RK45 = "rk45"


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    For ``RK45`` the output grid has spacing ``dt * sample_every`` (filled
    from the dense-output interpolant) and ``dt`` is also the first trial step.
    """

    method: Method = Method.RK4
    dt: float = 0.01
    t_end: float = 1000.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    sample_every: int = 1
    positivity_floor: float = 0.0
    clamp_tol: float = 1e-12
    dt_min: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not (self.dt > 0 and self.t_end > 0):
            raise ValueError("dt and t_end must be positive")
        if self.method is Method.RK45 and not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ValueError("sample_every must be a positive integer")
        if self.positivity_floor < 0 or self.clamp_tol < 0:
            raise ValueError("positivity_floor and clamp_tol must be nonnegative")

    def replace(self, **changes) -> "IntegratorConfig":
        values = asdict(self)
        values.update(changes)
        return IntegratorConfig(**values)

    def fingerprint(self) -> str:
        text = ";".join(f"{k}={v!r}" for k, v in sorted(asdict(self).items()))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.shape != (len(self.times), 3):
            raise ValueError("states must have shape (len(times), 3)")

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return tuple(float(v) for v in self.states[-1])


@dataclass
class TangentResult:
    trajectory: Trajectory
    renorm_times: np.ndarray
    log_stretch: np.ndarray  # shape (len(renorm_times), 3)
    q_final: np.ndarray
    orthonormality_error: float


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
# fifth- minus fourth-order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# dense output: y(t + s h) = y + h * sum_i k_i * sum_j P[i][j] s^(j+1)
_P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)


def _rk4_step(f, y, h):
    k1 = f(y)
    hh = 0.5 * h
    k2 = f([a + hh * b for a, b in zip(y, k1)])
    k3 = f([a + hh * b for a, b in zip(y, k2)])
    k4 = f([a + h * b for a, b in zip(y, k3)])
    h6 = h / 6.0
    return [a + h6 * (b1 + 2.0 * (b2 + b3) + b4)
            for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]


def _combine(y, h, weights, ks):
    """``y + h * sum(w_i k_i)`` over the nonzero weights."""
    out = list(y)
    for w, k in zip(weights, ks):
        if w != 0.0:
            hw = h * w
            out = [a + hw * b for a, b in zip(out, k)]
    return out


def _dp_stages(f, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        ks.append(f(_combine(y, h, _A[i], ks)))
    return ks


def _dense(y, h, ks, s):
    poly = [s * (r[0] + s * (r[1] + s * (r[2] + s * r[3]))) for r in _P]
    return _combine(y, h, poly, ks)


def _check(y, n_pos, cfg, t):
    """Validate ``y`` in place. Returns ``(ok, clamped)``."""
    for i, v in enumerate(y):
        if not math.isfinite(v):
            raise NonFiniteState(f"component {i} became {v!r} at t={t!r}")
    clamped = False
    for i in range(n_pos):
        v = y[i]
        if v < cfg.positivity_floor:
            if v < -cfg.clamp_tol:
                return False, clamped
            y[i] = 0.0
            clamped = True
    return True, clamped


def solve(f: Callable, y0: Sequence[float], cfg: IntegratorConfig, *,
          n_pos: int = 3, n_out: int = 3,
          checkpoint: Optional[Callable] = None, checkpoint_every: Optional[float] = None):
    """Integrate ``dy/dt = f(y)`` from ``t=0`` to ``cfg.t_end``.

    ``checkpoint(t, y)`` may modify ``y`` in place; it is called at every
    positive multiple of ``checkpoint_every`` (rounded to whole steps for
    RK4) and at ``t_end``. Returns ``(times, states)`` where ``states`` holds
    the first ``n_out`` components.
    """
    y = [float(v) for v in y0]
    if not _check(y, n_pos, cfg, 0.0)[0]:
        raise PreconditionError(f"initial state {tuple(y0)} has negative components")
    stepper = _solve_rk4 if cfg.method is Method.RK4 else _solve_rk45
    try:
        return stepper(f, y, cfg, n_pos, n_out, checkpoint, checkpoint_every)
    except OverflowError as exc:
        raise NonFiniteState(f"state overflowed: {exc}") from exc


def _solve_rk4(f, y, cfg, n_pos, n_out, checkpoint, checkpoint_every):
    dt, t_end = cfg.dt, cfg.t_end
    n_full = int(math.floor(t_end / dt * (1 + 1e-12)))
    tail = t_end - n_full * dt
    if tail <= 1e-9 * dt:
        tail = 0.0
    every = None
    if checkpoint is not None:
        every = max(1, int(round(checkpoint_every / dt)))
    times = [0.0]
    states = [y[:n_out]]
    for k in range(1, n_full + 1):
        y = _rk4_step(f, y, dt)
        last = k == n_full and tail == 0.0
        t = t_end if last else k * dt
        if not _check(y, n_pos, cfg, t)[0]:
            raise StepFailure(f"negative component at t={t!r} with dt={dt!r}; reduce dt")
        if every is not None and (k % every == 0 or last):
            checkpoint(t, y)
        if k % cfg.sample_every == 0 or last:
            times.append(t)
            states.append(y[:n_out])
    if tail:
        y = _rk4_step(f, y, tail)
        if not _check(y, n_pos, cfg, t_end)[0]:
            raise StepFailure(f"negative component at t={t_end!r}; reduce dt")
        if checkpoint is not None:
            checkpoint(t_end, y)
        times.append(t_end)
        states.append(y[:n_out])
    return times, states


def _error_norm(y, y_new, ks, h, cfg):
    errs = _combine([0.0] * len(y), h, _E, ks)
    total = 0.0
    for err, a, b in zip(errs, y, y_new):
        scale = cfg.abs_tol + cfg.rel_tol * max(abs(a), abs(b))
        total += (err / scale) ** 2
    return math.sqrt(total / len(y))


def _solve_rk45(f, y, cfg, n_pos, n_out, checkpoint, checkpoint_every):
    t_end = cfg.t_end
    out_dt = cfg.dt * cfg.sample_every
    n_grid = int(math.floor(t_end / out_dt * (1 + 1e-12)))
    times = [0.0]
    states = [y[:n_out]]
    next_out = 1
    n_check = 1
    t = 0.0
    h = cfg.dt
    k1 = f(y)
    while t < t_end:
        stop = t_end
        if checkpoint is not None:
            stop = min(stop, n_check * checkpoint_every)
        clipped = h >= (stop - t) * (1 - 1e-12)
        h_try = stop - t if clipped else h
        t_new = stop if clipped else t + h
        ks = _dp_stages(f, y, h_try, k1)
        y_new = _combine(y, h_try, _B, ks)
        for v in y_new:
            if not math.isfinite(v):
                raise NonFiniteState(f"non-finite state near t={t!r}")
        err = _error_norm(y, y_new, ks, h_try, cfg)
        if err <= 1.0:
            ok, clamped = _check(y_new, n_pos, cfg, t_new)
        else:
            ok, clamped = False, False
        if not ok:
            # a positivity violation with small error still forces a cut
            factor = 0.2 if err <= 1.0 else max(0.2, 0.9 * err ** -0.2)
            h = h_try * factor
            if h < cfg.dt_min:
                raise StepFailure(f"step size {h!r} below dt_min at t={t!r}")
            continue
        # dense output on the uniform grid inside (t, t_new]
        while next_out <= n_grid and next_out * out_dt <= t_new * (1 + 1e-14):
            tau = t_end if next_out == n_grid and abs(next_out * out_dt - t_end) <= 1e-9 * out_dt \
                else next_out * out_dt
            sample = y_new if tau >= t_new else _dense(y, h_try, ks, (tau - t) / h_try)
            times.append(tau)
            states.append([max(v, 0.0) if i < n_pos else v
                           for i, v in enumerate(sample[:n_out])])
            next_out += 1
        y, t = y_new, t_new
        k1 = ks[6]
        if clipped and checkpoint is not None:
            checkpoint(t, y)
            if t >= n_check * checkpoint_every * (1 - 1e-12):
                n_check += 1
            clamped = True
        if clamped:
            k1 = f(y)
        factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h_next = h_try * factor
        # a step shortened to hit a boundary says little about the usable size
        h = max(h_next, h) if clipped else h_next
    if times[-1] < t_end:
        times.append(t_end)
        states.append(y[:n_out])
    return times, states


def _meta(p, s0, cfg, **extra):
    meta = {"params": p.as_dict() if p is not None else None,
            "initial_state": [float(v) for v in s0],
            "config_fingerprint": cfg.fingerprint()}
    meta.update(extra)
    return meta


def integrate(p: EffectiveParameters, s0, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate the food-chain model from ``s0``."""
    times, states = solve(make_rhs(p), s0, cfg)
    return Trajectory(np.array(times), np.array(states), _meta(p, s0, cfg))


def integrate_system(f: Callable, y0, cfg: IntegratorConfig = IntegratorConfig(),
                     *, nonnegative: bool = True) -> Trajectory:
    """Integrate an arbitrary three-dimensional autonomous system."""
    times, states = solve(f, y0, cfg, n_pos=3 if nonnegative else 0)
    return Trajectory(np.array(times), np.array(states), _meta(None, y0, cfg))


def gram_schmidt(y, offset=3):
    """Orthonormalize the three columns of the row-major ``Q`` stored in ``y``.

    Modifies ``y`` in place and returns the three column norms found on the
    first pass (the diagonal of ``R``). A second pass restores orthogonality
    lost to rounding.
    """
    cols = [[y[offset + 3 * i + j] for i in range(3)] for j in range(3)]
    norms = []
    for j in range(3):
        v = cols[j]
        r = 1.0
        for sweep in range(2):
            for k in range(j):
                qk = cols[k]
                d = v[0] * qk[0] + v[1] * qk[1] + v[2] * qk[2]
                v = [v[0] - d * qk[0], v[1] - d * qk[1], v[2] - d * qk[2]]
            n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
            if n == 0.0:
                raise NonFiniteState("tangent vectors became linearly dependent")
            v = [v[0] / n, v[1] / n, v[2] / n]
            if sweep == 0:
                r = n
        cols[j] = v
        norms.append(r)
    for j in range(3):
        for i in range(3):
            y[offset + 3 * i + j] = cols[j][i]
    return norms


def _orthonormality_error(q):
    q = np.asarray(q, dtype=float).reshape(3, 3)
    return float(np.max(np.abs(q.T @ q - np.eye(3))))


def integrate_with_tangent(p: EffectiveParameters, s0, q0=None,
                           cfg: IntegratorConfig = IntegratorConfig(),
                           renorm_interval: float = 1.0) -> TangentResult:
    """Propagate the state and three tangent vectors (columns of ``q0``).

    Every ``renorm_interval`` days the tangent vectors are re-orthonormalized
    and the logarithms of their stretch factors recorded.
    """
    q0 = np.eye(3) if q0 is None else np.asarray(q0, dtype=float)
    if q0.shape != (3, 3) or _orthonormality_error(q0) > 1e-10:
        raise PreconditionError("q0 must be a 3x3 orthonormal matrix")
    y0 = [float(v) for v in s0] + [float(v) for v in q0.reshape(-1)]
    renorm_times = []
    logs = []
    worst = [0.0]

    def checkpoint(t, y):
        norms = gram_schmidt(y)
        renorm_times.append(t)
        logs.append([math.log(n) for n in norms])
        worst[0] = max(worst[0], _orthonormality_error(y[3:]))

    times, states = solve(make_tangent_rhs(p), y0, cfg, n_out=12,
                          checkpoint=checkpoint, checkpoint_every=renorm_interval)
    states = np.array(states)
    traj = Trajectory(np.array(times), states[:, :3],
                      _meta(p, s0, cfg, renorm_interval=renorm_interval))
    return TangentResult(
        trajectory=traj,
        renorm_times=np.array(renorm_times),
        log_stretch=np.array(logs).reshape(-1, 3),
        q_final=states[-1, 3:].reshape(3, 3),
        orthonormality_error=worst[0],
    )
