"""Coefficient functions, states, torus parametrization and identities."""

import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from helpers import random_params, ref_coeff_A, ref_coeff_Q, ref_coeff_R
from ntrailer import lagrangian_oracle as oracle
from ntrailer import model
from ntrailer.model import (FullState, ReducedState, SE2Element, TorusCoords,
                            VehicleParams)

P1 = VehicleParams(M=1.0, m=0.8, J0=0.7, J=0.3, a=0.5, l=1.0, n=1)


class TestVehicleParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            VehicleParams(M=0.0, m=1, J0=1, J=0, a=0, l=1, n=1)
        with pytest.raises(ValueError):
            VehicleParams(M=1, m=1, J0=1, J=-0.1, a=0, l=1, n=1)
        with pytest.raises(ValueError):
            VehicleParams(M=1, m=1, J0=1, J=0, a=0, l=0.0, n=1)
        with pytest.raises(ValueError):
            VehicleParams(M=1, m=1, J0=1, J=0, a=-1, l=1, n=1)
        with pytest.raises(ValueError):
            VehicleParams(M=1, m=1, J0=1, J=0, a=0, l=1, n=-2)

    def test_inertia_condition(self):
        assert VehicleParams(M=1, m=1, J0=1, J=0.5, a=0, l=1, n=1).inertia_condition
        assert not VehicleParams(M=1, m=1, J0=1, J=2.0, a=0, l=1, n=1).inertia_condition

    def test_json_round_trip(self):
        p = VehicleParams.from_json(P1.to_json())
        assert p == P1
        assert set(json.loads(P1.to_json())) == {"M", "m", "J0", "J", "a", "l", "n"}

    def test_json_rejects_unknown_and_missing(self):
        with pytest.raises(ValueError, match="unknown"):
            VehicleParams.from_dict({**P1.to_dict(), "mass": 1.0})
        with pytest.raises(ValueError, match="missing"):
            VehicleParams.from_dict({"M": 1.0})


class TestWrap:
    def test_principal_interval(self):
        vals = np.array([0.0, math.pi, -math.pi, 3 * math.pi, -0.1, 7.0])
        w = model.wrap_angle(vals)
        assert np.all((w > -math.pi) & (w <= math.pi))
        assert_allclose(np.sin(w), np.sin(vals), atol=1e-12)
        assert_allclose(np.cos(w), np.cos(vals), atol=1e-12)
        assert w[1] == math.pi and w[2] == math.pi


class TestCoefficients:
    def test_A_all_zero_angles(self):
        p = random_params(np.random.default_rng(0), 4)
        assert_allclose(model.coeff_A(p, np.zeros(4)), np.zeros(4))

    def test_A_single_trailer_right_angle(self):
        p = VehicleParams(M=1, m=1, J0=1, J=0, a=0, l=1.0, n=1)
        assert_allclose(model.coeff_A(p, [math.pi / 2]), [-1.0])

    def test_A_matches_reference_transcription(self):
        rng = np.random.default_rng(1)
        p = VehicleParams(M=1, m=1, J0=1, J=0, a=0, l=2.0, n=3)
        for _ in range(50):
            alpha = rng.uniform(-math.pi, math.pi, 3)
            assert_allclose(model.coeff_A(p, alpha), ref_coeff_A(2.0, alpha),
                            atol=1e-14)

    def test_R_aligned_equals_total_mass(self):
        for n in range(0, 5):
            p = random_params(np.random.default_rng(n), n)
            assert_allclose(model.coeff_R(p, np.zeros(n)), p.M + n * p.m,
                            rtol=1e-14)

    def test_R_perpendicular_single_trailer(self):
        assert_allclose(model.coeff_R(P1, [math.pi / 2]),
                        P1.M + P1.J / P1.l**2, rtol=1e-14)

    def test_R_no_trailers(self):
        p = VehicleParams(M=2.5, m=1, J0=1, J=1, a=0, l=1, n=0)
        assert model.coeff_R(p, []) == 2.5

    def test_R_positive_and_bounded(self):
        rng = np.random.default_rng(2)
        for _ in range(300):
            n = int(rng.integers(0, 7))
            p = random_params(rng, n)
            alpha = rng.uniform(-2 * math.pi, 2 * math.pi, n)
            R = model.coeff_R(p, alpha)
            assert R > 0
            assert R <= p.M + n * p.m + p.J / p.l**2 + 1e-12

    def test_R_single_trailer_bounds(self):
        # with J < m l^2 the effective mass sits between the two extremes
        p = VehicleParams(M=1.0, m=1.0, J0=1.0, J=0.5, a=0, l=1.0, n=1)
        assert p.inertia_condition
        for alpha in np.linspace(-math.pi, math.pi, 201):
            R = model.coeff_R(p, [alpha])
            assert p.M + p.J / p.l**2 - 1e-12 <= R <= p.M + p.m + 1e-12

    def test_Q_zero_angles(self):
        for n in range(1, 5):
            p = random_params(np.random.default_rng(n), n)
            assert model.coeff_Q(p, np.zeros(n)) == 0.0

    def test_Q_single_trailer_closed_form(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a1 = rng.uniform(-math.pi, math.pi)
            want = math.cos(a1) * math.sin(a1) * (P1.m * P1.l**2 - P1.J)
            assert_allclose(model.coeff_Q(P1, [a1]), want, atol=1e-14)

    def test_QR_match_reference_transcription(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            p = random_params(rng, n)
            alpha = rng.uniform(-math.pi, math.pi, n)
            assert_allclose(model.coeff_R(p, alpha), ref_coeff_R(p, alpha),
                            rtol=1e-13)
            assert_allclose(model.coeff_Q(p, alpha), ref_coeff_Q(p, alpha),
                            rtol=1e-12, atol=1e-13)

    def test_R_gradient_q_identity(self):
        # dR/dalpha_1 = -2 Q / l^2, via finite differences of R
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            p = random_params(rng, n)
            alpha = rng.uniform(-math.pi, math.pi, n)
            h = 1e-6
            ap, am = alpha.copy(), alpha.copy()
            ap[0] += h
            am[0] -= h
            fd = (model.coeff_R(p, ap) - model.coeff_R(p, am)) / (2 * h)
            assert_allclose(fd, -2.0 * model.coeff_Q(p, alpha) / p.l**2,
                            atol=1e-6)

    def test_R_gradient_analytic_vs_fd(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            p = random_params(rng, n)
            alpha = rng.uniform(-math.pi, math.pi, n)
            grad = model.coeff_R_grad(p, alpha)
            h = 1e-6
            for k in range(n):
                ap, am = alpha.copy(), alpha.copy()
                ap[k] += h
                am[k] -= h
                fd = (model.coeff_R(p, ap) - model.coeff_R(p, am)) / (2 * h)
                assert abs(grad[k] - fd) < 1e-6

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            model.coeff_A(P1, [0.1, 0.2])
        with pytest.raises(ValueError):
            model.coeff_R(P1, [])
        with pytest.raises(ValueError):
            model.coeff_Q(P1, [0.1, 0.2])


class TestEnergy:
    def test_rest_state(self):
        assert model.energy(P1, ReducedState(0.0, 0.0, [0.3])) == 0.0

    def test_positive_unless_at_rest(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            s = ReducedState(u=rng.normal(), omega=rng.normal(),
                             alpha=rng.uniform(-3, 3, 1))
            e = model.energy(P1, s)
            assert e > 0 or (s.u == 0 and s.omega == 0)

    def test_equilibrium_speed_recovers_level(self):
        E = 1.7
        u = math.sqrt(2 * E / (P1.M + P1.n * P1.m))
        s = ReducedState(u=u, omega=0.0, alpha=[0.0])
        assert_allclose(model.energy(P1, s), E, rtol=1e-14)

    def test_matches_full_metric_on_constrained_velocity(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            n = int(rng.integers(0, 5))
            p = random_params(rng, n)
            s = ReducedState(u=rng.normal(), omega=rng.normal(),
                             alpha=rng.uniform(-math.pi, math.pi, n))
            q = np.zeros(n + 3)
            q[2] = rng.uniform(-math.pi, math.pi)
            q[3:] = s.alpha
            Z1, Z2 = oracle.distribution_basis(p, q)
            qdot = s.u * Z1 + s.omega * Z2
            G = oracle.mass_matrix(p, q)
            assert_allclose(model.energy(p, s), 0.5 * qdot @ G @ qdot,
                            rtol=1e-12, atol=1e-13)


class TestTorus:
    def test_embed_beta_zero(self):
        tc = TorusCoords(E=1.2, beta=0.0, alpha=[0.4])
        s = model.torus_embed(P1, tc)
        assert s.omega == 0.0 and s.u > 0.0

    def test_embed_beta_pi(self):
        tc = TorusCoords(E=1.2, beta=math.pi, alpha=[0.4])
        s = model.torus_embed(P1, tc)
        assert s.u < 0.0
        assert_allclose(s.u, -math.sqrt(2 * 1.2 / model.coeff_R(P1, [0.4])),
                        rtol=1e-14)

    def test_embed_preserves_energy_level(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            n = int(rng.integers(0, 5))
            p = random_params(rng, n)
            E = float(rng.uniform(0.05, 5.0))
            tc = TorusCoords(E=E, beta=rng.uniform(-math.pi, math.pi),
                             alpha=rng.uniform(-math.pi, math.pi, n))
            assert_allclose(model.energy(p, model.torus_embed(p, tc)), E,
                            rtol=1e-12)

    def test_round_trip(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            n = int(rng.integers(0, 5))
            p = random_params(rng, n)
            s = ReducedState(u=rng.normal(), omega=rng.normal(),
                             alpha=rng.uniform(-math.pi, math.pi, n))
            if model.energy(p, s) == 0.0:
                continue
            tc = model.torus_project(p, s)
            back = model.torus_embed(p, tc)
            assert_allclose(back.u, s.u, rtol=1e-12, atol=1e-12)
            assert_allclose(back.omega, s.omega, rtol=1e-12, atol=1e-12)
            assert_allclose(back.alpha, s.alpha, atol=1e-12)

    def test_project_zero_energy_fails(self):
        with pytest.raises(ValueError):
            model.torus_project(P1, ReducedState(0.0, 0.0, [0.1]))


class TestSE2:
    def test_identity(self):
        fs = FullState(x=1.0, y=-2.0, theta=0.7, alpha=[0.2])
        out = model.apply_se2(SE2Element.identity(), fs)
        assert (out.x, out.y, out.theta) == (1.0, -2.0, 0.7)
        assert_allclose(out.alpha, fs.alpha)

    def test_group_action_composition(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            g1 = SE2Element(*rng.uniform(-3, 3, 3))
            g2 = SE2Element(*rng.uniform(-3, 3, 3))
            fs = FullState(x=rng.normal(), y=rng.normal(),
                           theta=rng.normal(), alpha=rng.uniform(-3, 3, 2))
            one = model.apply_se2(g2, model.apply_se2(g1, fs))
            two = model.apply_se2(g2.compose(g1), fs)
            assert_allclose(one.as_array(), two.as_array(), atol=1e-12)

    def test_reduced_data_invariant_under_action(self):
        # (u, omega, alphadot) computed before and after the action agree
        rng = np.random.default_rng(12)
        for _ in range(25):
            n = int(rng.integers(1, 4))
            p = random_params(rng, n)
            q = rng.uniform(-2, 2, n + 3)
            qdot = rng.uniform(-2, 2, n + 3)
            g = SE2Element(*rng.uniform(-3, 3, 3))
            fs = FullState.from_array(q)
            gq = model.apply_se2(g, fs).as_array()
            T = oracle.se2_tangent_matrix(g.phi, n)
            gqdot = T @ qdot
            u = qdot[0] * math.cos(q[2]) + qdot[1] * math.sin(q[2])
            gu = gqdot[0] * math.cos(gq[2]) + gqdot[1] * math.sin(gq[2])
            assert_allclose(gu, u, atol=1e-12)
            assert_allclose(gqdot[2], qdot[2])       # omega
            assert_allclose(gqdot[3:], qdot[3:])     # alphadot

    def test_trailer_positions_chain(self):
        p = VehicleParams(M=1, m=1, J0=1, J=0, a=0, l=2.0, n=2)
        fs = FullState(x=0.0, y=0.0, theta=0.0, alpha=[0.0, 0.0])
        pts = model.trailer_positions(p, fs)
        assert_allclose(pts, [[-2.0, 0.0], [-4.0, 0.0]])


class TestIdentities:
    def test_zero_angles(self):
        res = model.identity_check(np.ones(4), np.zeros(4))
        assert max(res.values()) < 1e-14

    def test_single_angle_reduces(self):
        res = model.identity_check([1.3], [0.7])
        assert max(res.values()) < 1e-14

    def test_random_draws(self):
        rng = np.random.default_rng(13)
        worst = 0.0
        for _ in range(1000):
            n = int(rng.integers(1, 8))
            alpha = rng.uniform(-math.pi, math.pi, n)
            T = rng.uniform(-2, 2, n)
            worst = max(worst, max(model.identity_check(T, alpha).values()))
        assert worst < 1e-12

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            model.identity_check([1.0], [0.1, 0.2])


class TestStateSerialization:
    def test_reduced_state_json_array(self):
        s = ReducedState(u=0.5, omega=-0.25, alpha=[0.1, 0.2])
        assert json.loads(s.to_json()) == [0.5, -0.25, 0.1, 0.2]
        back = ReducedState.from_array(json.loads(s.to_json()))
        assert back.u == s.u and back.omega == s.omega
        assert np.array_equal(back.alpha, s.alpha)

    def test_full_state_json_array(self):
        fs = FullState(x=1.0, y=2.0, theta=-0.5, alpha=[0.3])
        assert json.loads(fs.to_json()) == [1.0, 2.0, -0.5, 0.3]
        back = FullState.from_array(json.loads(fs.to_json()))
        assert np.array_equal(back.as_array(), fs.as_array())
