"""Equilibrium census, closed-form spectra, and circular-motion solutions."""

import itertools
import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from helpers import numerical_jacobian, random_params
from ntrailer import equilibria as eq
from ntrailer import model, reduced_dynamics as rd
from ntrailer.model import ReducedState, VehicleParams

P = VehicleParams(M=1.0, m=0.8, J0=0.7, J=0.3, a=0.5, l=1.0, n=1)


class TestCensus:
    @pytest.mark.parametrize("n", range(0, 6))
    def test_count_is_two_to_the_n_plus_one(self, n):
        p = random_params(np.random.default_rng(n), n, a=0.4)
        points = eq.enumerate_equilibria(p, 1.3)
        assert len(points) == 2 ** (n + 1)
        signatures = {(pt.signature.sigma0, pt.signature.sigma)
                      for pt in points}
        assert len(signatures) == 2 ** (n + 1)

    @pytest.mark.parametrize("n", range(0, 6))
    def test_each_point_is_stationary_with_energy_E(self, n):
        p = random_params(np.random.default_rng(10 + n), n, a=0.6)
        E = 0.9
        for pt in eq.enumerate_equilibria(p, E):
            assert np.max(np.abs(rd.reduced_vector_field(p, pt.state))) < 1e-12
            assert_allclose(model.energy(p, pt.state), E, rtol=1e-12)
            assert pt.state.omega == 0.0
            assert_allclose(abs(pt.state.u),
                            math.sqrt(2 * E / (p.M + n * p.m)), rtol=1e-14)

    def test_single_trailer_reproduces_four_point_census(self):
        points = eq.enumerate_equilibria(P, 1.0)
        assert len(points) == 4
        by_label = {}
        for pt in points:
            by_label.setdefault(pt.stability, []).append(pt)
        assert len(by_label["stable_node"]) == 1
        assert len(by_label["unstable_node"]) == 1
        assert len(by_label["saddle"]) == 2
        stable = by_label["stable_node"][0]
        assert stable.beta == 0.0 and stable.alpha[0] == 0.0
        unstable = by_label["unstable_node"][0]
        assert unstable.beta == math.pi and unstable.alpha[0] == 0.0

    @pytest.mark.parametrize("n", range(0, 6))
    def test_exactly_one_node_of_each_kind(self, n):
        p = random_params(np.random.default_rng(20 + n), n, a=0.5)
        points = eq.enumerate_equilibria(p, 2.0)
        labels = [pt.stability for pt in points]
        assert labels.count("stable_node") == 1
        assert labels.count("unstable_node") == 1
        assert labels.count("saddle") == 2 ** (n + 1) - 2

    def test_physical_flag(self):
        points = eq.enumerate_equilibria(P, 1.0)
        for pt in points:
            assert pt.physical == all(s == 1 for s in pt.signature.sigma)

    def test_ordering_is_lexicographic(self):
        points = eq.enumerate_equilibria(
            VehicleParams(M=1, m=1, J0=1, J=0.2, a=0.4, l=1, n=2), 1.0)
        seen = [(pt.signature.sigma0, *pt.signature.sigma) for pt in points]
        assert seen == list(itertools.product((1, -1), repeat=3))

    def test_rejects_centered_mass_and_bad_energy(self):
        p0 = VehicleParams(M=1, m=1, J0=1, J=0.2, a=0.0, l=1, n=1)
        with pytest.raises(ValueError, match="a > 0"):
            eq.enumerate_equilibria(p0, 1.0)
        with pytest.raises(ValueError, match="positive"):
            eq.enumerate_equilibria(P, 0.0)


class TestLinearization:
    def test_lower_triangular_with_closed_form_diagonal(self):
        E = 1.4
        for pt in eq.enumerate_equilibria(P, E):
            A = eq.linearize_on_torus(P, E, pt)
            assert np.max(np.abs(np.triu(A, k=1))) == 0.0
            assert_allclose(np.diag(A), pt.eigenvalues, rtol=1e-14)

    def test_subdiagonal_coupling_entry(self):
        # the (alpha_1, beta) entry is sqrt(2E/(J0 + M a^2)) sigma_0
        E = 1.4
        for pt in eq.enumerate_equilibria(P, E):
            A = eq.linearize_on_torus(P, E, pt)
            want = (math.sqrt(2 * E / model.rotational_inertia(P))
                    * pt.signature.sigma0)
            assert_allclose(A[1, 0], want, rtol=1e-14)
            # same value written with the shared prefactor split out
            pref = math.sqrt(2 * E / (P.M + P.n * P.m)) / P.l
            alt = pref * P.l * math.sqrt(
                (P.M + P.n * P.m) / model.rotational_inertia(P)) \
                * pt.signature.sigma0
            assert_allclose(A[1, 0], alt, rtol=1e-13)

    @pytest.mark.parametrize("n", [0, 1, 2, 3])
    def test_matches_numerical_jacobian(self, n):
        rng = np.random.default_rng(30 + n)
        p = random_params(rng, n, a=0.7)
        E = 1.1
        for pt in eq.enumerate_equilibria(p, E):
            A = eq.linearize_on_torus(p, E, pt)
            z0 = np.concatenate(([pt.beta], pt.alpha))
            J = numerical_jacobian(lambda z: rd.torus_rhs(p, E, z), z0)
            assert np.max(np.abs(A - J)) < 1e-6
            ev_num = np.sort(np.linalg.eigvals(J).real)
            assert_allclose(np.sort(pt.eigenvalues), ev_num, atol=1e-6)

    def test_rejects_non_equilibrium(self):
        pt = eq.enumerate_equilibria(P, 1.0)[0]
        fake = eq.EquilibriumPoint(
            signature=pt.signature, E=pt.E, beta=0.5, alpha=pt.alpha,
            state=pt.state, eigenvalues=pt.eigenvalues,
            stability=pt.stability, physical=pt.physical)
        with pytest.raises(ValueError, match="not an equilibrium"):
            eq.linearize_on_torus(P, 1.0, fake)


class TestStabilityLabels:
    def test_all_aligned_forward_is_stable(self):
        sig = eq.EquilibriumSignature(1, (1, 1, 1))
        ev = eq.analytic_eigenvalues(
            VehicleParams(M=1, m=1, J0=1, J=0.2, a=0.4, l=1, n=3), 1.0, sig)
        assert np.all(ev < 0)
        assert eq.classify_stability(ev) == "stable_node"

    def test_all_aligned_backward_is_unstable(self):
        sig = eq.EquilibriumSignature(-1, (1, 1, 1))
        ev = eq.analytic_eigenvalues(
            VehicleParams(M=1, m=1, J0=1, J=0.2, a=0.4, l=1, n=3), 1.0, sig)
        assert np.all(ev > 0)
        assert eq.classify_stability(ev) == "unstable_node"

    def test_any_overlap_is_a_saddle(self):
        p = VehicleParams(M=1, m=1, J0=1, J=0.2, a=0.4, l=1, n=3)
        for sigma in itertools.product((1, -1), repeat=3):
            if all(s == 1 for s in sigma):
                continue
            for s0 in (1, -1):
                ev = eq.analytic_eigenvalues(
                    p, 1.0, eq.EquilibriumSignature(s0, sigma))
                assert eq.classify_stability(ev) == "saddle"

    def test_zero_eigenvalue_reported(self):
        with pytest.raises(ValueError, match="hyperbolic"):
            eq.classify_stability([0.0, -1.0])

    def test_signature_validation(self):
        with pytest.raises(ValueError):
            eq.EquilibriumSignature(0, (1,))


class TestCircularMotion:
    def test_boundary_case_right_angle(self):
        p = VehicleParams(M=1, m=1, J0=1, J=0.2, a=0.0, l=1.3, n=1)
        w0 = 0.7
        res = eq.equilibria_a0(p, p.l * w0, w0)
        assert res.exists
        assert_allclose(res.states[0].alpha[0], math.pi / 2, rtol=1e-12)
        assert res.residuals[0] < 1e-12

    def test_condition_violated_returns_empty(self):
        p = VehicleParams(M=1, m=1, J0=1, J=0.2, a=0.0, l=1.0, n=2)
        res = eq.equilibria_a0(p, 0.5, 1.0)   # n l^2 w0^2 = 2 > 0.25
        assert not res.exists and res.states == ()
        assert res.condition > 0

    def test_solutions_are_stationary(self):
        rng = np.random.default_rng(40)
        for _ in range(100):
            n = int(rng.integers(0, 5))
            p = random_params(rng, n, a=0.0)
            w0 = float(rng.uniform(0.1, 1.0)) * (1 if rng.random() < 0.5 else -1)
            u0 = float(rng.uniform(math.sqrt(n) * p.l * abs(w0) + 1e-6, 4.0))
            res = eq.equilibria_a0(p, u0, w0)
            assert res.exists
            assert res.residuals[0] < 1e-12

    def test_circle_radius_at_least_sqrt_n_l(self):
        p = VehicleParams(M=1, m=1, J0=1, J=0.2, a=0.0, l=0.8, n=3)
        for u0 in np.linspace(0.1, 3.0, 25):
            for w0 in (-0.9, -0.3, 0.4, 1.1):
                res = eq.equilibria_a0(p, u0, w0)
                if res.exists:
                    assert abs(u0 / w0) >= math.sqrt(p.n) * p.l - 1e-12

    def test_preconditions(self):
        with pytest.raises(ValueError, match="a = 0"):
            eq.equilibria_a0(P, 1.0, 0.5)
        p0 = VehicleParams(M=1, m=1, J0=1, J=0.2, a=0.0, l=1.0, n=1)
        with pytest.raises(ValueError, match="omega0"):
            eq.equilibria_a0(p0, 1.0, 0.0)

    def test_negative_heading_rate_flips_angles(self):
        p = VehicleParams(M=1, m=1, J0=1, J=0.2, a=0.0, l=1.0, n=2)
        plus = eq.equilibria_a0(p, 2.0, 0.5)
        minus = eq.equilibria_a0(p, 2.0, -0.5)
        assert_allclose(minus.states[0].alpha, -plus.states[0].alpha,
                        rtol=1e-13)

    def test_straight_line_states_remain_equilibria_without_spin(self):
        # with the mass centered and omega = 0 the aligned/overlapped
        # straight-line states are still stationary (their stability is a
        # separate question, not settled here)
        p = VehicleParams(M=1, m=1, J0=1, J=0.2, a=0.0, l=1.0, n=2)
        for alpha in itertools.product((0.0, math.pi), repeat=2):
            s = ReducedState(u=1.3, omega=0.0, alpha=np.array(alpha))
            assert np.max(np.abs(rd.reduced_vector_field(p, s))) < 1e-15


def test_report_json_schema():
    points = eq.enumerate_equilibria(P, 1.0)
    doc = json.loads(eq.equilibria_report_json(points))
    assert len(doc) == 4
    for entry in doc:
        assert set(entry) == {"sigma0", "sigma", "energy", "beta", "alpha",
                              "state", "eigenvalues", "stability", "physical"}
