import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pzf.equilibria import axial_equilibrium, interior_equilibrium, null_equilibrium
from pzf.errors import NotAnEquilibrium
from pzf.local_stability import (
    Classification,
    characteristic_coefficients,
    classify_equilibrium,
    classify_spectrum,
    cubic_roots,
    eigenvalues_3x3,
    routh_hurwitz,
)
from pzf.model import rhs

from conftest import fd_jacobian

# mpmath expansion of the finite-difference Jacobian at the baseline interior state
BASELINE_D = (0.061187421050444223, 0.041632817273763752, 0.00014001017596507188)
BASELINE_MAX_RE = -0.0033788284317236956


def poly(D, z):
    return ((z + D[0]) * z + D[1]) * z + D[2]


class TestCoefficients:
    def test_diagonal(self):
        assert characteristic_coefficients(np.diag([-1.0, -2.0, -3.0])) == (6.0, 11.0, 6.0)

    def test_zero(self):
        assert characteristic_coefficients(np.zeros((3, 3))) == (0.0, 0.0, 0.0)

    def test_baseline_interior(self, baseline):
        e = interior_equilibrium(baseline)
        fd = fd_jacobian(lambda v: rhs(baseline, v), e.state, h=1e-5)
        D_fd = characteristic_coefficients(fd)
        np.testing.assert_allclose(D_fd, BASELINE_D, rtol=1e-5)
        report = classify_equilibrium(baseline, e)
        np.testing.assert_allclose((report.D1, report.D2, report.D3), BASELINE_D, rtol=1e-10)

    def test_identities(self, rng):
        for _ in range(200):
            J = rng.uniform(-1, 1, (3, 3))
            D1, D2, D3 = characteristic_coefficients(J)
            ev = eigenvalues_3x3(J)
            assert abs(D1 + sum(ev)) < 1e-8
            assert abs(D3 + ev[0] * ev[1] * ev[2]) < 1e-8


class TestRouthHurwitz:
    @pytest.mark.parametrize("D, expected", [
        ((6, 11, 6), True),
        ((1, 1, 2), False),
        ((-1, 1, 1), False),
        ((1, 1, 0), False),
    ])
    def test_examples(self, D, expected):
        assert routh_hurwitz(*D) is expected

    def test_agrees_with_spectrum(self, rng):
        checked = 0
        while checked < 1000:
            J = rng.uniform(-1, 1, (3, 3))
            ref = np.linalg.eigvals(J)
            if np.min(np.abs(ref.real)) <= 1e-6:
                continue
            checked += 1
            assert routh_hurwitz(*characteristic_coefficients(J)) == (ref.real.max() < 0)


class TestEigenvalues:
    def test_diagonal(self):
        assert eigenvalues_3x3(np.diag([-1.0, -2.0, -3.0])) == (-1, -2, -3)

    def test_rotation_generator(self):
        ev = eigenvalues_3x3([[0, -1, 0], [1, 0, 0], [0, 0, -1]])
        np.testing.assert_allclose(ev, [1j, -1j, -1], atol=1e-15)
        assert ev[1] == ev[0].conjugate()

    def test_repeated_roots(self):
        np.testing.assert_allclose(cubic_roots(3, 3, 1), [-1, -1, -1], atol=1e-6)
        np.testing.assert_allclose(cubic_roots(0, 0, 0), [0, 0, 0])

    def test_random_residuals_and_order(self, rng):
        for _ in range(1000):
            J = rng.uniform(-1, 1, (3, 3))
            D = characteristic_coefficients(J)
            scale = max(1.0, *map(abs, D))
            ev = eigenvalues_3x3(J)
            assert max(abs(poly(D, z)) for z in ev) / scale < 1e-8
            keys = [(-z.real, -z.imag) for z in ev]
            assert keys == sorted(keys)
            np.testing.assert_allclose(sorted(ev, key=lambda z: (z.real, z.imag)),
                                       sorted(np.linalg.eigvals(J), key=lambda z: (z.real, z.imag)),
                                       atol=1e-6)

    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3))
    def test_residual_property(self, D):
        scale = max(1.0, *map(abs, D))
        for z in cubic_roots(*D):
            assert abs(poly(D, z)) / scale < 1e-8 * max(1.0, abs(z)) ** 3


class TestClassify:
    def test_baseline_interior_stable(self, baseline):
        report = classify_equilibrium(baseline, interior_equilibrium(baseline))
        assert report.classification is Classification.STABLE
        assert report.routh_hurwitz
        assert max(z.real for z in report.eigenvalues) == pytest.approx(BASELINE_MAX_RE, rel=1e-8)
        assert report.margin == pytest.approx(BASELINE_D[0] * BASELINE_D[1] - BASELINE_D[2])

    def test_axial_unstable(self, baseline):
        p = baseline
        assert p.a * p.gS * p.kP / (p.kP + p.kZ) > p.m2
        assert classify_equilibrium(p, axial_equilibrium(p)).classification is Classification.UNSTABLE

    def test_null_unstable(self, baseline):
        assert classify_equilibrium(baseline, null_equilibrium(baseline)).classification \
            is Classification.UNSTABLE

    def test_marginal(self):
        ev = cubic_roots(*characteristic_coefficients([[0, -1, 0], [1, 0, 0], [0, 0, -1]]))
        assert classify_spectrum(1.0, 1.0, 1.0, ev) is Classification.MARGINAL

    def test_not_an_equilibrium(self, baseline):
        e = interior_equilibrium(baseline)
        bad = type(e)(e.kind, e.state, e.feasible, 1e-3)
        with pytest.raises(NotAnEquilibrium):
            classify_equilibrium(baseline, bad)

    def test_perturbation_invariance(self, baseline):
        e = interior_equilibrium(baseline)
        ref = classify_equilibrium(baseline, e)
        assert min(abs(ref.margin), abs(ref.D1), abs(ref.D3)) > 1e-6
        for k in range(3):
            state = list(e.state)
            state[k] += 1e-13
            moved = type(e)(e.kind, type(e.state)(*state), True, e.residual)
            assert classify_equilibrium(baseline, moved).classification is ref.classification
