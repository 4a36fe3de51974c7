"""Closed-form equilibria and their feasibility."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple, Union

from .errors import DegenerateEquilibrium
from .model import EffectiveParameters, State, rhs_norm


class EquilibriumKind(str, Enum):
    NULL = "Null"
    AXIAL = "Axial"
    BOUNDARY = "Boundary"
    INTERIOR = "Interior"


class InteriorAbsence(str, Enum):
    FISH_GROWTH_TOO_LOW = "FishGrowthTooLow"
    NO_POSITIVE_ROOT = "NoPositiveRoot"
    NEGATIVE_FISH_DENSITY = "NegativeFishDensity"


@dataclass(frozen=True)
class Equilibrium:
    kind: EquilibriumKind
    state: State
    feasible: bool
    residual: float
    notes: Tuple[str, ...] = ()

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "state": list(self.state),
            "feasible": self.feasible,
            "residual": self.residual,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class NoInterior:
    """Why the interior equilibrium does not exist. Falsy."""

    reason: InteriorAbsence
    detail: str = ""

    def __bool__(self):
        return False


def _make(kind, p, state, feasible, notes=()):
    state = State(*(float(v) for v in state))
    return Equilibrium(kind, state, feasible, rhs_norm(p, state), tuple(notes))


def null_equilibrium(p: EffectiveParameters) -> Equilibrium:
    return _make(EquilibriumKind.NULL, p, (0.0, 0.0, 0.0), True)


def axial_equilibrium(p: EffectiveParameters) -> Equilibrium:
    return _make(EquilibriumKind.AXIAL, p, (p.kP, 0.0, 0.0), True)


def boundary_equilibrium(p: EffectiveParameters) -> Equilibrium:
    """Fish-free equilibrium ``(P2, Z2, 0)``.

    Raises :class:`DegenerateEquilibrium` when ``a*gS == m2``. Negative
    components are reported with ``feasible=False``.
    """
    net = p.a * p.gS - p.m2
    if net == 0.0:
        raise DegenerateEquilibrium("a*gS == m2: boundary equilibrium is at infinity")
    growth = p.a * p.kP * p.gS - p.kP * p.m2 - p.m2 * p.kZ
    P2 = p.m2 * p.kZ / net
    Z2 = p.a * p.m1 * p.kZ * growth / (net * net * p.kP)
    feasible = net > 0 and growth > 0
    notes = [] if feasible else ["infeasible: requires a*gS > m2 and a*kP*gS > m2*(kP + kZ)"]
    return _make(EquilibriumKind.BOUNDARY, p, (P2, Z2, 0.0), feasible, notes)


def _phyto_root(b: float, c: float) -> Optional[float]:
    """Larger root of ``P**2 - b*P - c = 0``, or None if not real."""
    disc = b * b + 4.0 * c
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    if b >= 0:
        root = 0.5 * (b + sq)
    else:
        denom = b - sq
        root = -2.0 * c / denom if denom != 0 else 0.0
    # one Newton step removes the rounding left by the closed form
    slope = 2.0 * root - b
    if slope != 0:
        root -= (root * root - b * root - c) / slope
    return root


def phyto_quadratic(p: EffectiveParameters, zoo: float) -> Tuple[float, float]:
    """``(b, c)`` such that interior ``P`` solves ``P**2 - b*P - c = 0``."""
    b = p.kP - p.kZ
    c = p.kP * p.kZ - p.gS * zoo * p.kP / p.m1
    return b, c


def quadratic_coefficients(p: EffectiveParameters) -> Tuple[float, float, float]:
    """``(A0, A1, A2)`` of ``A0 P**2 - A1 P - A2 = 0`` with ``A0 = m1 (gF - m3)``."""
    A0 = p.m1 * (p.gF - p.m3)
    A1 = (p.gF * p.m1 - p.m3 * p.m1) * (p.kP - p.kZ)
    A2 = p.kP * p.kZ * p.m1 * (p.gF - p.m3) - p.m3 * p.kF * p.gS * p.kP
    return A0, A1, A2


def interior_equilibrium(p: EffectiveParameters) -> Union[Equilibrium, NoInterior]:
    """Coexistence equilibrium, or a falsy :class:`NoInterior` with a reason.

    ``F*`` comes from the zooplankton balance directly so the residual is
    zero to rounding.
    """
    if p.gF <= p.m3:
        return NoInterior(InteriorAbsence.FISH_GROWTH_TOO_LOW,
                          f"gF={p.gF!r} <= m3={p.m3!r}")
    Z = p.m3 * p.kF / (p.gF - p.m3)
    b, c = phyto_quadratic(p, Z)
    P = _phyto_root(b, c)
    if P is None or not P > 0:
        return NoInterior(InteriorAbsence.NO_POSITIVE_ROOT,
                          f"P**2 - ({b!r})P - ({c!r}) has no positive root")
    uptake = p.a * p.gS * P / (P + p.kZ) - p.m2
    F = (Z + p.kF) * uptake / p.gF
    if not F > 0:
        return NoInterior(InteriorAbsence.NEGATIVE_FISH_DENSITY,
                          f"a*gS*P/(P+kZ) - m2 = {uptake!r} <= 0")
    notes = []
    if c < 0 and b > 0:
        other = b - P
        if other > 0:
            notes.append(f"second positive quadratic root P={other!r} not reported")
    return _make(EquilibriumKind.INTERIOR, p, (P, Z, F), True, notes)


def all_equilibria(p: EffectiveParameters) -> List[Equilibrium]:
    """Null, axial, boundary and (when present) interior, in that order.

    The boundary entry is omitted only in the degenerate case ``a*gS == m2``.
    """
    out = [null_equilibrium(p), axial_equilibrium(p)]
    try:
        out.append(boundary_equilibrium(p))
    except DegenerateEquilibrium:
        pass
    interior = interior_equilibrium(p)
    if interior:
        out.append(interior)
    return out
