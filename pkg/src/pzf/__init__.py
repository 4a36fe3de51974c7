"""Salinity-coupled phytoplankton-zooplankton-fish food-chain dynamics."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    DilutionMode,
    EffectiveParameters,
    RawParameters,
    State,
    baseline_raw,
    derive_effective,
    dilution_factor,
    jacobian,
    rhs,
)
from .equilibria import all_equilibria, boundary_equilibrium, interior_equilibrium  # noqa: E402
from .local_stability import classify_equilibrium, routh_hurwitz  # noqa: E402
from .integrator import IntegratorConfig, Method, Trajectory, integrate  # noqa: E402

__all__ = [
    "DilutionMode", "EffectiveParameters", "RawParameters", "State", "baseline_raw",
    "derive_effective", "dilution_factor", "jacobian", "rhs",
    "all_equilibria", "boundary_equilibrium", "interior_equilibrium",
    "classify_equilibrium", "routh_hurwitz",
    "IntegratorConfig", "Method", "Trajectory", "integrate",
]
