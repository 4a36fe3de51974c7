import numpy as np
import pytest

from pzf.equilibria import (
    EquilibriumKind,
    InteriorAbsence,
    all_equilibria,
    boundary_equilibrium,
    interior_equilibrium,
    quadratic_coefficients,
    phyto_quadratic,
)
from pzf.errors import DegenerateEquilibrium
from pzf.model import baseline_raw, derive_effective, rhs

from conftest import random_effective

# high-precision reference (mpmath root of m1 (1 - P/kP)(P + kZ) = gS Z*)
INTERIOR = (1.7994770722052374576, 8.9556650246305418719, 0.33678662531978031384)


def bisect(g, lo, hi, tol=1e-14):
    glo = g(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (g(mid) > 0) == (glo > 0):
            lo, glo = mid, g(mid)
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestBoundary:
    def test_baseline(self, baseline):
        e = boundary_equilibrium(baseline)
        assert e.kind is EquilibriumKind.BOUNDARY
        p = baseline
        # independent route: dZ = 0 fixes P, then dP = 0 fixes Z
        P = p.m2 * p.kZ / (p.a * p.gS - p.m2)
        Z = p.m1 * (1 - P / p.kP) * (P + p.kZ) / p.gS
        assert e.state.P == pytest.approx(P, rel=1e-13)
        assert e.state.Z == pytest.approx(Z, rel=1e-13)
        assert e.state.P == pytest.approx(1.5213, abs=1e-4)
        assert e.state.Z == pytest.approx(9.1356, abs=1e-4)
        assert e.state.F == 0.0
        assert e.feasible
        assert e.residual < 1e-10

    def test_infeasible_when_grazing_too_weak(self, baseline):
        e = boundary_equilibrium(baseline.replace(gS=0.05))
        assert not e.feasible

    def test_zero_mortality_collapses_to_face(self, baseline):
        e = boundary_equilibrium(baseline.replace(m2=0.0))
        assert e.state.P == 0.0

    def test_degenerate(self, baseline):
        with pytest.raises(DegenerateEquilibrium):
            boundary_equilibrium(baseline.replace(m2=baseline.a * baseline.gS))


class TestInterior:
    def test_baseline(self, baseline):
        e = interior_equilibrium(baseline)
        assert e
        np.testing.assert_allclose(e.state, INTERIOR, rtol=1e-12)
        assert e.residual < 1e-10

    def test_bisection_oracle(self, baseline):
        p = baseline
        Z = p.m3 * p.kF / (p.gF - p.m3)
        P = bisect(lambda P: p.m1 * (1 - P / p.kP) * (P + p.kZ) - p.gS * Z, 0.0, p.kP)
        assert interior_equilibrium(p).state.P == pytest.approx(P, rel=1e-12)

    def test_reference_values_close_for_P_and_Z_only(self, baseline):
        P, Z, F = interior_equilibrium(baseline).state
        assert P == pytest.approx(1.809, rel=0.01)
        assert Z == pytest.approx(8.964, rel=0.01)
        assert F != pytest.approx(3.112, rel=0.5)

    def test_fish_growth_too_low(self, baseline):
        res = interior_equilibrium(baseline.replace(gF=0.3))
        assert not res
        assert res.reason is InteriorAbsence.FISH_GROWTH_TOO_LOW

    def test_negative_fish_density(self):
        p = derive_effective(baseline_raw(sU=8.51))
        res = interior_equilibrium(p)
        assert res.reason is InteriorAbsence.NEGATIVE_FISH_DENSITY
        Z = p.m3 * p.kF / (p.gF - p.m3)
        P = bisect(lambda P: p.m1 * (1 - P / p.kP) * (P + p.kZ) - p.gS * Z, 0.0, p.kP)
        assert p.a * p.gS * P / (P + p.kZ) - p.m2 == pytest.approx(-0.032167, abs=1e-6)

    def test_no_positive_root(self, baseline):
        # fish need so much zooplankton that phytoplankton cannot support it
        res = interior_equilibrium(baseline.replace(m3=0.68))
        assert res.reason is InteriorAbsence.NO_POSITIVE_ROOT

    def test_monotone_disappearance_in_m3(self, baseline):
        present = [bool(interior_equilibrium(baseline.replace(m3=m3)))
                   for m3 in np.linspace(0.3, 0.689, 60)]
        assert present[0] and not present[-1]
        # once gone it stays gone
        first_gone = present.index(False)
        assert not any(present[first_gone:])

    def test_coefficient_form_identity(self, rng):
        for _ in range(100):
            p = random_effective(rng)
            if p.gF <= p.m3:
                continue
            Z = p.m3 * p.kF / (p.gF - p.m3)
            b, c = phyto_quadratic(p, Z)
            scale = p.m1 * (p.gF - p.m3)
            A0, A1, A2 = quadratic_coefficients(p)
            assert A0 == pytest.approx(scale, rel=1e-12)
            assert A1 == pytest.approx(scale * b, rel=1e-12)
            assert A2 == pytest.approx(scale * c, rel=1e-12, abs=1e-12 * abs(scale * p.kP * p.kZ))


class TestAll:
    def test_baseline_order(self, baseline):
        eqs = all_equilibria(baseline)
        assert [e.kind for e in eqs] == [EquilibriumKind.NULL, EquilibriumKind.AXIAL,
                                         EquilibriumKind.BOUNDARY, EquilibriumKind.INTERIOR]
        assert eqs[0].state == (0.0, 0.0, 0.0)
        assert eqs[1].state == (baseline.kP, 0.0, 0.0)
        assert all(e.residual < 1e-10 for e in eqs)

    def test_without_interior(self, baseline):
        eqs = all_equilibria(baseline.replace(gF=0.3))
        assert len(eqs) == 3
        assert eqs[0].state == (0.0, 0.0, 0.0)

    def test_residuals_random(self, rng):
        for _ in range(200):
            p = random_effective(rng)
            for e in all_equilibria(p):
                assert max(abs(v) for v in rhs(p, e.state)) < 1e-10
                assert e.residual < 1e-10
