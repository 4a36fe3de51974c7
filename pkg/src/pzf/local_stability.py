"""Characteristic polynomial, eigenvalues and Routh-Hurwitz classification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from .errors import NotAnEquilibrium
from .model import EffectiveParameters, jacobian

MARGINAL_TOL = 1e-9


class Classification(str, Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"


@dataclass(frozen=True)
class StabilityReport:
    D1: float
    D2: float
    D3: float
    eigenvalues: Tuple[complex, complex, complex]
    routh_hurwitz: bool
    classification: Classification
    margin: float

    def to_dict(self):
        return {
            "D1": self.D1,
            "D2": self.D2,
            "D3": self.D3,
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "routh_hurwitz": self.routh_hurwitz,
            "classification": self.classification.value,
            "margin": self.margin,
        }


def characteristic_coefficients(J) -> Tuple[float, float, float]:
    """``(D1, D2, D3)`` of ``det(lambda I - J) = lambda^3 + D1 lambda^2 + D2 lambda + D3``."""
    J = np.asarray(J, dtype=float)
    D1 = -(J[0, 0] + J[1, 1] + J[2, 2])
    D2 = (J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
          + J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0]
          + J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
    det = (J[0, 0] * (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
           - J[0, 1] * (J[1, 0] * J[2, 2] - J[1, 2] * J[2, 0])
           + J[0, 2] * (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0]))
    return float(D1), float(D2), float(-det)


def routh_hurwitz(D1: float, D2: float, D3: float) -> bool:
    return D1 > 0 and D3 > 0 and D1 * D2 > D3


def _cbrt(x):
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def _polish(z, D1, D2, D3, steps=4):
    for _ in range(steps):
        val = ((z + D1) * z + D2) * z + D3
        der = (3.0 * z + 2.0 * D1) * z + D2
        if der == 0 or val == 0:
            break
        step = val / der
        z_new = z - step
        # keep a step only if it does not increase the residual
        new_val = ((z_new + D1) * z_new + D2) * z_new + D3
        if abs(new_val) >= abs(val):
            break
        z = z_new
    return z


def cubic_roots(D1: float, D2: float, D3: float) -> Tuple[complex, complex, complex]:
    """Roots of ``x^3 + D1 x^2 + D2 x + D3``, ordered by (real desc, imag desc)."""
    shift = D1 / 3.0
    p = D2 - D1 * D1 / 3.0
    q = 2.0 * D1 ** 3 / 27.0 - D1 * D2 / 3.0 + D3
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0 or p > 0:
        # one real root (Cardano), complex pair from deflation
        sq = math.sqrt(disc)
        u = _cbrt(-q / 2.0 - sq if q > 0 else -q / 2.0 + sq)
        t = u - p / (3.0 * u) if u != 0 else 0.0
        r = _polish(t - shift, D1, D2, D3)
        # x^2 + b x + c after dividing out (x - r)
        b = D1 + r
        # pick the better-conditioned of the two expressions for the pair product
        c = D2 + r * b if r == 0 or abs(r * b) <= abs(D2) else -D3 / r
        im2 = c - b * b / 4.0
        if im2 > 0:
            z = complex(-b / 2.0, math.sqrt(im2))
            z = _polish(z, D1, D2, D3)
            roots = [complex(r, 0.0), z, z.conjugate()]
        else:
            s = math.sqrt(-im2)
            roots = [complex(r, 0.0),
                     complex(_polish(-b / 2.0 + s, D1, D2, D3), 0.0),
                     complex(_polish(-b / 2.0 - s, D1, D2, D3), 0.0)]
    elif p == 0.0 or p * math.sqrt(-p / 3.0) == 0.0:
        roots = [complex(_polish(-shift, D1, D2, D3), 0.0)] * 3
    else:
        # three real roots, trigonometric form
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        arg = max(-1.0, min(1.0, arg))
        theta = math.acos(arg) / 3.0
        roots = [complex(_polish(m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift,
                                 D1, D2, D3), 0.0) for k in range(3)]
    # adding 0.0 turns negative zeros into positive ones
    roots = [complex(z.real + 0.0, z.imag + 0.0) for z in roots]
    roots.sort(key=lambda z: (-z.real, -z.imag))
    return tuple(roots)


def eigenvalues_3x3(J) -> Tuple[complex, complex, complex]:
    return cubic_roots(*characteristic_coefficients(J))


def classify_spectrum(D1, D2, D3, eigenvalues) -> Classification:
    if routh_hurwitz(D1, D2, D3):
        return Classification.STABLE
    re = sorted(z.real for z in eigenvalues)
    near_axis = [abs(r) < MARGINAL_TOL for r in re]
    if any(near_axis) and all(r < 0 or na for r, na in zip(re, near_axis)):
        return Classification.MARGINAL
    return Classification.UNSTABLE


def stability_report(J) -> StabilityReport:
    D1, D2, D3 = characteristic_coefficients(J)
    eig = cubic_roots(D1, D2, D3)
    return StabilityReport(
        D1=D1, D2=D2, D3=D3, eigenvalues=eig,
        routh_hurwitz=routh_hurwitz(D1, D2, D3),
        classification=classify_spectrum(D1, D2, D3, eig),
        margin=D1 * D2 - D3,
    )


def classify_equilibrium(p: EffectiveParameters, e, max_residual=1e-8) -> StabilityReport:
    """Linear stability of equilibrium ``e`` from the analytic Jacobian."""
    if not e.residual < max_residual:
        raise NotAnEquilibrium(
            f"{e.kind.value} state {tuple(e.state)} has residual {e.residual!r}"
        )
    return stability_report(jacobian(p, e.state))
