"""
Salinity-coupled phytoplankton-zooplankton-fish food chain.

State is ``(P, Z, F)``. The right-hand side is

.. math::
    \\dot P = m_1 P (1 - P/k_P) - g_s P Z / (P + k_Z) \\\\
    \\dot Z = a g_s P Z / (P + k_Z) - g_f Z F / (Z + k_F) - m_2 Z \\\\
    \\dot F = g_f Z F / (Z + k_F) - m_3 F

with the zooplankton grazing rate scaled by a salinity dilution factor,
``g_s = delta * g_Z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .errors import (
    EqualSalinities,
    NonPositiveDilution,
    NonPositiveEffective,
    ParameterError,
)


class DilutionMode(str, Enum):
    """How the dilution factor is computed from the two salinities.

    ``PAPER`` is ``sU / (sU - sD)``, ``MAGNITUDE`` its absolute value and
    ``DOWNSTREAM`` is ``sD / (sD - sU)``.
    """

    PAPER = "paper"
    MAGNITUDE = "magnitude"
    DOWNSTREAM = "downstream"


class State(NamedTuple):
    P: float
    Z: float
    F: float


# effective coefficients of the ODE, in field order of EffectiveParameters
EFFECTIVE_NAMES = ("m1", "m2", "m3", "gS", "gF", "kP", "kZ", "kF", "a")


@dataclass(frozen=True)
class RawParameters:
    """Biological rates (per day) and salinities (ppt).

    Defaults are the tabulated field values for the estuary, except ``kF``
    which takes the simulation value 10.1. ``gS``, ``m2`` and ``m3`` are
    optional direct overrides of the composed coefficients.
    """

    m1: float = 0.6
    gZ: float = 0.75
    eZo: float = 0.04
    rZo: float = 0.0153
    rFp: float = 0.2
    mZ: float = 0.0145
    eF: float = 0.049
    mF: float = 0.021
    rF: float = 0.0125
    hF: float = 0.1090
    gF: float = 0.6894
    kP: float = 12.0
    kZ: float = 38.0
    kF: float = 10.1
    a: float = 0.8
    sU: float = 8.23
    sD: float = 12.30
    gS: Optional[float] = None
    m2: Optional[float] = None
    m3: Optional[float] = None

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if not math.isfinite(value):
                raise ParameterError(f"{f.name} must be finite, got {value!r}")
            if f.name in ("sU", "sD"):
                if value < 0:
                    raise ParameterError(f"{f.name} must be >= 0, got {value!r}")
            elif value <= 0:
                raise ParameterError(f"{f.name} must be > 0, got {value!r}")
        if self.a > 1:
            raise ParameterError(f"a must lie in (0, 1], got {self.a!r}")
        if self.sU == self.sD:
            raise EqualSalinities(f"sU == sD == {self.sU!r}: dilution factor has a pole")


def baseline_raw(**changes) -> RawParameters:
    """Raw parameters of the reference simulation (fish mortality 0.324)."""
    changes.setdefault("m3", 0.324)
    return RawParameters(**changes)


@dataclass(frozen=True)
class EffectiveParameters:
    """The nine coefficients appearing in the ODE.

    Construction checks finiteness, ``kP, kZ, kF > 0`` and ``0 < a <= 1``;
    rates may be zero here so degenerate test systems can be built directly.
    :func:`derive_effective` enforces strict positivity of everything.
    """

    m1: float
    m2: float
    m3: float
    gS: float
    gF: float
    kP: float
    kZ: float
    kF: float
    a: float
    notes: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for name in EFFECTIVE_NAMES:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            if value < 0:
                raise ParameterError(f"{name} must be >= 0, got {value!r}")
        for name in ("kP", "kZ", "kF"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be > 0")
        if not 0 < self.a <= 1:
            raise ParameterError(f"a must lie in (0, 1], got {self.a!r}")

    def as_dict(self):
        return {name: getattr(self, name) for name in EFFECTIVE_NAMES}

    def replace(self, **changes) -> "EffectiveParameters":
        values = self.as_dict()
        values.update(changes)
        return EffectiveParameters(**values, notes=self.notes)


def dilution_factor(sU: float, sD: float, mode=DilutionMode.DOWNSTREAM) -> float:
    """Salinity dilution factor multiplying the zooplankton grazing rate."""
    mode = DilutionMode(mode)
    if sU < 0 or sD < 0:
        raise ParameterError("salinities must be nonnegative")
    if sU == sD:
        raise EqualSalinities(f"sU == sD == {sU!r}")
    if mode is DilutionMode.PAPER:
        delta = sU / (sU - sD)
    elif mode is DilutionMode.MAGNITUDE:
        delta = abs(sU / (sU - sD))
    else:
        delta = sD / (sD - sU)
    if not delta > 0:
        raise NonPositiveDilution(
            f"dilution factor {delta!r} <= 0 for sU={sU!r}, sD={sD!r}, mode={mode.value}"
        )
    return delta


def derive_effective(raw: RawParameters, mode=DilutionMode.DOWNSTREAM) -> EffectiveParameters:
    """Compose the ODE coefficients from raw rates.

    Overrides in ``raw`` win over composition. Fish predation ``rFp`` is not
    part of ``m2``: predation on zooplankton already enters through the
    saturating fish term.
    """
    mode = DilutionMode(mode)
    notes = []
    if raw.gS is not None:
        gS = raw.gS
        notes.append("gS: override")
    else:
        delta = dilution_factor(raw.sU, raw.sD, mode)
        gS = delta * raw.gZ
        notes.append(f"gS: delta({mode.value})={delta!r} * gZ")
    if raw.m2 is not None:
        m2 = raw.m2
        notes.append("m2: override")
    else:
        m2 = raw.eZo + raw.rZo + raw.mZ
        notes.append("m2: eZo + rZo + mZ")
    if raw.m3 is not None:
        m3 = raw.m3
        notes.append("m3: override")
    else:
        m3 = raw.eF + raw.mF + raw.rF + raw.hF
        notes.append("m3: eF + mF + rF + hF")

    values = dict(m1=raw.m1, m2=m2, m3=m3, gS=gS, gF=raw.gF,
                  kP=raw.kP, kZ=raw.kZ, kF=raw.kF, a=raw.a)
    for name, value in values.items():
        if not value > 0:
            raise NonPositiveEffective(f"derived {name}={value!r} is not positive")
    return EffectiveParameters(**values, notes=tuple(notes))


def rhs(p: EffectiveParameters, s) -> Tuple[float, float, float]:
    P, Z, F = s
    graze = p.gS * P * Z / (P + p.kZ)
    prey = p.gF * Z * F / (Z + p.kF)
    return (
        p.m1 * P * (1.0 - P / p.kP) - graze,
        p.a * graze - prey - p.m2 * Z,
        prey - p.m3 * F,
    )


def rhs_norm(p: EffectiveParameters, s) -> float:
    """Max-norm of the vector field at ``s``."""
    return max(abs(v) for v in rhs(p, s))


def jacobian(p: EffectiveParameters, s) -> np.ndarray:
    """Analytic 3x3 Jacobian of :func:`rhs`."""
    P, Z, F = s
    u = P + p.kZ
    w = Z + p.kF
    j32 = p.gF * F * p.kF / (w * w)
    return np.array([
        [p.m1 * (1.0 - 2.0 * P / p.kP) - p.gS * Z * p.kZ / (u * u), -p.gS * P / u, 0.0],
        [p.a * p.gS * Z * p.kZ / (u * u), p.a * p.gS * P / u - p.m2 - j32, -p.gF * Z / w],
        [0.0, j32, p.gF * Z / w - p.m3],
    ])


def make_rhs(p: EffectiveParameters):
    """Return a fast closure ``f(y) -> (dP, dZ, dF)`` over plain floats."""
    m1, m2, m3, gS, gF, kP, kZ, kF, a = (getattr(p, n) for n in EFFECTIVE_NAMES)
    inv_kP = 1.0 / kP

    def f(y):
        P, Z, F = y
        graze = gS * P * Z / (P + kZ)
        prey = gF * Z * F / (Z + kF)
        return (m1 * P * (1.0 - P * inv_kP) - graze,
                a * graze - prey - m2 * Z,
                prey - m3 * F)

    return f


def make_tangent_rhs(p: EffectiveParameters):
    """Closure for the state plus variational equation ``dQ/dt = J Q``.

    The augmented vector is ``(P, Z, F, Q00, Q01, Q02, Q10, ..., Q22)`` with
    ``Q`` stored row-major; the columns of ``Q`` are the tangent vectors.
    """
    m1, m2, m3, gS, gF, kP, kZ, kF, a = (getattr(p, n) for n in EFFECTIVE_NAMES)

    def f(y):
        P, Z, F, q00, q01, q02, q10, q11, q12, q20, q21, q22 = y
        u = P + kZ
        w = Z + kF
        g1 = gS * P / u
        g2 = gF * Z / w
        j11 = m1 * (1.0 - 2.0 * P / kP) - gS * Z * kZ / (u * u)
        j21 = a * gS * Z * kZ / (u * u)
        j32 = gF * F * kF / (w * w)
        j22 = a * g1 - m2 - j32
        j33 = g2 - m3
        return (
            m1 * P * (1.0 - P / kP) - g1 * Z,
            a * g1 * Z - g2 * F - m2 * Z,
            g2 * F - m3 * F,
            j11 * q00 - g1 * q10,
            j11 * q01 - g1 * q11,
            j11 * q02 - g1 * q12,
            j21 * q00 + j22 * q10 - g2 * q20,
            j21 * q01 + j22 * q11 - g2 * q21,
            j21 * q02 + j22 * q12 - g2 * q22,
            j32 * q10 + j33 * q20,
            j32 * q11 + j33 * q21,
            j32 * q12 + j33 * q22,
        )

    return f
