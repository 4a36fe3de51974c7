"""
Boundedness, the sufficient global-stability certificate and the
Lozinskii-measure diagnostic along trajectories.

The diagnostic works in the coordinates ``x = 1/P, y = Z, z = F``. With
the norm ``|(u, v, w)| = max(|u|, |v| + |w|)`` on the second compound
space, the measure is bounded by ``max(l1, l2)`` where

    l1 = x gS y (2 + x kZ) / (1 + x kZ)^2 - m1 + gF y z / (y + kF)^2 + gF y / (y + kF)
    l2 = y'/y - z'/z - 2 m1 (1 - 1/(x kP)) + gS y x / (1 + x kZ) + gF y kF / (y + kF)^2
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from .errors import InsufficientSamples, ZeroPhytoplankton, ZeroPopulation
from .model import EffectiveParameters, rhs


class BoundMode(str, Enum):
    PAPER = "paper"
    CORRECTED = "corrected"


@dataclass(frozen=True)
class BoundednessBound:
    """Eventual bound ``a P + Z + F <= rho`` with decay rate ``v``."""

    v: float
    rho: float
    mode: BoundMode


@dataclass(frozen=True)
class GlobalCertificate:
    mu: float
    holds: bool
    rho_used: float
    notes: Tuple[str, ...] = ()


def absorbing_bound(p: EffectiveParameters, mode=BoundMode.CORRECTED) -> BoundednessBound:
    """Level of the absorbing set for ``X = a P + Z + F``.

    From ``X' + v X <= a P (m1 + v - m1 P / kP)`` with ``v = min(m2, m3)``
    the right side peaks at ``a kP (m1 + v)^2 / (4 m1)``, so
    ``limsup X <= a kP (m1 + v)^2 / (4 m1 v)``. ``PAPER`` mode drops the
    ``1 / (m1 v)`` factor and is kept only for comparison.
    """
    mode = BoundMode(mode)
    v = min(p.m2, p.m3)
    rho = p.a * (p.m1 + v) ** 2 * p.kP / 4.0
    if mode is BoundMode.CORRECTED:
        rho /= p.m1 * v
    return BoundednessBound(v=v, rho=rho, mode=mode)


def mu_certificate(p: EffectiveParameters, rho: float) -> GlobalCertificate:
    """Global stability of the interior equilibrium is guaranteed when ``mu > 0``."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    mu = (2.0 * p.gS / (rho + p.kF)
          - (p.gS / p.kZ + p.gF / p.kF) * rho
          - (p.m1 + p.m3))
    holds = mu > 0
    notes = () if holds else ("mu <= 0: certificate inconclusive",)
    return GlobalCertificate(mu=mu, holds=holds, rho_used=rho, notes=notes)


def transform_state(s) -> Tuple[float, float, float]:
    P, Z, F = s
    if P == 0:
        raise ZeroPhytoplankton("x = 1/P is undefined at P = 0")
    return 1.0 / P, float(Z), float(F)


def inverse_transform(x) -> Tuple[float, float, float]:
    u, y, z = x
    if u == 0:
        raise ZeroPhytoplankton("P = 1/x is undefined at x = 0")
    return 1.0 / u, float(y), float(z)


def make_transformed_rhs(p: EffectiveParameters):
    """Vector field in ``(x, y, z) = (1/P, Z, F)`` coordinates.

    ``x' = -x^2 P'`` gives ``x' = -m1 x (1 - 1/(x kP)) + gS x^2 y / (1 + x kZ)``.
    """
    m1, m2, m3, gS, gF = p.m1, p.m2, p.m3, p.gS, p.gF
    kP, kZ, kF, a = p.kP, p.kZ, p.kF, p.a

    def f(v):
        x, y, z = v
        graze = gS * y / (1.0 + x * kZ)
        prey = gF * y * z / (y + kF)
        return (-m1 * x * (1.0 - 1.0 / (x * kP)) + x * x * graze,
                a * graze - prey - m2 * y,
                prey - m3 * z)

    return f


def lozinskii_branches(p: EffectiveParameters, s) -> Tuple[float, float]:
    """``(l1, l2)`` at a strictly positive state ``s = (P, Z, F)``."""
    if min(s) <= 0:
        raise ZeroPopulation(f"state {tuple(s)} must be strictly positive")
    x, y, z = transform_state(s)
    _, dZ, dF = rhs(p, s)
    xk = 1.0 + x * p.kZ
    w = y + p.kF
    l1 = (x * p.gS * y * (2.0 + x * p.kZ) / (xk * xk) - p.m1
          + p.gF * y * z / (w * w) + p.gF * y / w)
    l2 = (dZ / y - dF / z - 2.0 * p.m1 * (1.0 - 1.0 / (x * p.kP))
          + p.gS * y * x / xk + p.gF * y * p.kF / (w * w))
    return l1, l2


def lozinskii_measure(p: EffectiveParameters, s) -> float:
    return max(lozinskii_branches(p, s))


def lozinskii_series(p: EffectiveParameters, traj) -> np.ndarray:
    return np.array([lozinskii_measure(p, s) for s in traj.states])


def lozinskii_average(p: EffectiveParameters, traj) -> float:
    """Trapezoid-rule time average of the measure along ``traj``."""
    if len(traj.times) < 2:
        raise InsufficientSamples("need at least two samples to average")
    g = lozinskii_series(p, traj)
    t = np.asarray(traj.times, dtype=float)
    integral = float(np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(t)))
    return integral / float(t[-1] - t[0])


def window_flags(p: EffectiveParameters, traj) -> np.ndarray:
    """Per-sample flag for ``1 < x kP < 2``, i.e. ``kP/2 < P < kP``."""
    P = np.asarray(traj.states, dtype=float)[:, 0]
    return (P > p.kP / 2.0) & (P < p.kP)
