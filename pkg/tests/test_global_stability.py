import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pzf.equilibria import interior_equilibrium
from pzf.errors import InsufficientSamples, ZeroPhytoplankton, ZeroPopulation
from pzf.global_stability import (
    BoundMode,
    absorbing_bound,
    inverse_transform,
    lozinskii_average,
    lozinskii_branches,
    lozinskii_measure,
    make_transformed_rhs,
    mu_certificate,
    transform_state,
    window_flags,
)
from pzf.integrator import IntegratorConfig, Method, Trajectory, integrate, integrate_system
from pzf.model import EffectiveParameters

# branch values at the baseline interior state, evaluated in mpmath at 30 digits
L1_AT_INTERIOR = 0.26281257894955578
L2_AT_INTERIOR = -0.33829768685971202


class TestAbsorbingBound:
    def test_corrected(self, baseline):
        b = absorbing_bound(baseline)
        assert b.mode is BoundMode.CORRECTED
        assert b.v == pytest.approx(0.0698, abs=1e-12)
        assert b.rho == pytest.approx(25.71, abs=5e-3)
        hand = 0.8 * (0.6 + 0.0698) ** 2 * 12 / (4 * 0.6 * 0.0698)
        assert b.rho == pytest.approx(hand, rel=1e-14)

    def test_literal_bound_violated_by_interior(self, baseline):
        b = absorbing_bound(baseline, BoundMode.PAPER)
        assert b.rho == pytest.approx(0.8 * 0.6698 ** 2 * 12 / 4, rel=1e-14)
        # the quoted 1.0766 is the truncated value of 1.076717
        assert b.rho == pytest.approx(1.0766, abs=2e-4)
        P, Z, F = interior_equilibrium(baseline).state
        total = baseline.a * P + Z + F
        assert total == pytest.approx(10.73, abs=5e-3)
        assert total > b.rho
        assert total < absorbing_bound(baseline).rho

    def test_equal_mortalities(self, baseline):
        p = baseline.replace(m2=0.1, m3=0.1)
        assert absorbing_bound(p).v == 0.1


class TestMuCertificate:
    def test_baseline_fails(self, baseline):
        cert = mu_certificate(baseline, absorbing_bound(baseline).rho)
        assert cert.mu < 0 and not cert.holds
        assert cert.notes

    def test_positive_branch(self):
        p = EffectiveParameters(m1=0.1, m2=0.1, m3=0.1, gS=10.0, gF=0.01,
                                kP=1.0, kZ=100.0, kF=1.0, a=1.0)
        cert = mu_certificate(p, 0.1)
        hand = 2 * 10 / 1.1 - (10 / 100 + 0.01 / 1) * 0.1 - 0.2
        assert cert.mu == pytest.approx(hand, rel=1e-14)
        assert cert.mu == pytest.approx(17.97, abs=5e-3)
        assert cert.holds and cert.rho_used == 0.1

    def test_no_grazing(self, baseline):
        p = baseline.replace(gS=0.0)
        rho = 3.0
        assert mu_certificate(p, rho).mu == pytest.approx(-(p.gF / p.kF) * rho - (p.m1 + p.m3))

    def test_monotone_in_rho(self, rng):
        from conftest import random_effective
        for _ in range(100):
            p = random_effective(rng)
            rho = rng.uniform(0.01, 100)
            assert mu_certificate(p, 2 * rho).mu <= mu_certificate(p, rho).mu

    def test_rejects_nonpositive_rho(self, baseline):
        with pytest.raises(ValueError):
            mu_certificate(baseline, 0.0)


class TestTransform:
    def test_examples(self):
        assert transform_state((2, 3, 4)) == (0.5, 3, 4)
        assert transform_state((1, 0, 0)) == (1, 0, 0)

    def test_zero_phytoplankton(self):
        with pytest.raises(ZeroPhytoplankton):
            transform_state((0, 1, 1))
        with pytest.raises(ZeroPopulation):
            inverse_transform((0.0, 1, 1))

    @settings(max_examples=100)
    @given(st.tuples(*[st.floats(1e-3, 1e3)] * 3))
    def test_round_trip(self, s):
        back = inverse_transform(transform_state(s))
        np.testing.assert_allclose(back, s, rtol=1e-15)

    def test_change_of_variables(self, baseline):
        cfg = IntegratorConfig(method=Method.RK45, dt=0.5, t_end=100, rel_tol=1e-11, abs_tol=1e-13)
        s0 = (1.0, 1.0, 1.0)
        orig = integrate(baseline, s0, cfg)
        moved = integrate_system(make_transformed_rhs(baseline), transform_state(s0), cfg)
        mapped = np.array([inverse_transform(v) for v in moved.states])
        np.testing.assert_allclose(mapped, orig.states, rtol=1e-7, atol=1e-9)


class TestLozinskii:
    def test_interior_fixture(self, baseline):
        e = interior_equilibrium(baseline)
        l1, l2 = lozinskii_branches(baseline, e.state)
        assert l1 == pytest.approx(L1_AT_INTERIOR, rel=1e-9)
        assert l2 == pytest.approx(L2_AT_INTERIOR, rel=1e-9)
        assert lozinskii_measure(baseline, e.state) == l1

    def test_no_interactions(self, baseline):
        p = baseline.replace(gS=0.0, gF=0.0)
        l1, _ = lozinskii_branches(p, (1.0, 1.0, 1.0))
        assert l1 == -p.m1

    @settings(max_examples=100)
    @given(st.tuples(*[st.floats(1e-3, 50)] * 3))
    def test_is_max_of_branches(self, s):
        from pzf.model import baseline_raw, derive_effective
        p = derive_effective(baseline_raw())
        assert lozinskii_measure(p, s) == max(lozinskii_branches(p, s))

    @pytest.mark.parametrize("s", [(0, 1, 1), (1, 0, 1), (1, 1, 0)])
    def test_zero_population(self, baseline, s):
        with pytest.raises(ZeroPopulation):
            lozinskii_measure(baseline, s)

    def test_constant_trajectory_average(self, baseline):
        s = interior_equilibrium(baseline).state
        traj = Trajectory(np.linspace(0, 10, 11), np.tile(s, (11, 1)))
        assert lozinskii_average(baseline, traj) == pytest.approx(
            lozinskii_measure(baseline, s), rel=1e-14)

    def test_average_reproducible(self, baseline):
        cfg = IntegratorConfig(t_end=500, dt=0.05)
        first = lozinskii_average(baseline, integrate(baseline, (1, 1, 1), cfg))
        second = lozinskii_average(baseline, integrate(baseline, (1, 1, 1), cfg))
        assert np.isfinite(first) and first == second

    def test_insufficient_samples(self, baseline):
        traj = Trajectory([0.0], [[1.0, 1.0, 1.0]])
        with pytest.raises(InsufficientSamples):
            lozinskii_average(baseline, traj)

    def test_window_flags(self, baseline):
        traj = Trajectory([0, 1, 2], [[1.0, 1, 1], [8.0, 1, 1], [12.0, 1, 1]])
        assert window_flags(baseline, traj).tolist() == [False, True, False]


def test_boundedness_random_starts(baseline, rng):
    rho = absorbing_bound(baseline).rho
    cfg = IntegratorConfig(t_end=500, dt=0.05)
    for _ in range(20):
        traj = integrate(baseline, rng.uniform(0, 10, 3), cfg)
        late = traj.times >= 200
        X = baseline.a * traj.states[late, 0] + traj.states[late, 1] + traj.states[late, 2]
        assert X.max() <= rho + 1e-6
