"""Aggregated residual checks pitting the closed forms against the oracle.

Each check evaluates the same quantity along two independent routes (closed
form vs first-principles assembly, analytic identity vs direct two-sided
evaluation, conserved quantity vs integration) and reports the worst
absolute mismatch over a seeded random sweep.  The battery is deterministic
for a fixed seed, so repeated runs produce byte-identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import lagrangian_oracle as oracle
from . import model, reduced_dynamics
from .model import ReducedState, TorusCoords, VehicleParams

__all__ = ["CheckResult", "run_checks", "report_text", "random_params"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance


def random_params(rng: np.random.Generator, n: int,
                  a_zero: bool = False) -> VehicleParams:
    """Draw physical constants log-uniformly over one octave around 1."""
    def lu() -> float:
        return float(np.exp(rng.uniform(-math.log(2.0), math.log(2.0))))

    return VehicleParams(M=lu(), m=lu(), J0=lu(), J=lu(),
                         a=0.0 if a_zero else 0.5 * lu(), l=lu(), n=n)


def _random_state(rng: np.random.Generator, n: int) -> ReducedState:
    return ReducedState(u=float(rng.uniform(-1.5, 1.5)),
                        omega=float(rng.uniform(-1.5, 1.5)),
                        alpha=rng.uniform(-math.pi, math.pi, n))


def check_oracle_equivalence(rng, samples: int = 1000,
                             ns=(0, 1, 2, 3, 4)) -> float:
    """Closed-form vector field vs the quasi-velocity generated one."""
    worst = 0.0
    per_n = max(1, samples // len(ns))
    for n in ns:
        for _ in range(per_n):
            p = random_params(rng, n)
            s = _random_state(rng, n)
            r1 = reduced_dynamics.reduced_vector_field(p, s)
            r2 = oracle.generated_rhs(p, s)
            worst = max(worst, float(np.max(np.abs(r1 - r2))))
    return worst


def check_projected_bracket(rng, samples: int = 100) -> float:
    """Projected frame bracket vs its closed-form coefficients."""
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(1, 5))
        p = random_params(rng, n)
        q = np.zeros(n + 3)
        q[2] = rng.uniform(-math.pi, math.pi)
        q[3:] = rng.uniform(-math.pi, math.pi, n)
        c1, c2 = oracle.structure_coefficients(p, q)
        alpha = q[3:]
        want1 = model.coeff_Q(p, alpha) / (p.l**2 * model.coeff_R(p, alpha))
        want2 = -p.M * p.a / model.rotational_inertia(p)
        worst = max(worst, abs(c1 - want1), abs(c2 - want2))
    return worst


def check_mass_matrix(rng, samples: int = 100) -> tuple[float, float]:
    """Symmetry of the assembled metric and its quadratic form vs the
    transcribed kinetic energy."""
    worst_sym = 0.0
    worst_quad = 0.0
    for _ in range(samples):
        n = int(rng.integers(0, 6))
        p = random_params(rng, n)
        q = rng.uniform(-2.0, 2.0, n + 3)
        qd = rng.uniform(-2.0, 2.0, n + 3)
        G = oracle.mass_matrix(p, q)
        worst_sym = max(worst_sym, float(np.max(np.abs(G - G.T))))
        worst_quad = max(worst_quad,
                         abs(0.5 * qd @ G @ qd
                             - oracle.lagrangian_direct(p, q, qd)))
    return worst_sym, worst_quad


def check_constraints_and_gram(rng, samples: int = 100) -> tuple[float, float]:
    """Frame fields annihilate the no-slip forms; restricted metric is
    diag(R, J0 + M a^2)."""
    worst_ann = 0.0
    worst_gram = 0.0
    for _ in range(samples):
        n = int(rng.integers(0, 6))
        p = random_params(rng, n)
        q = rng.uniform(-2.0, 2.0, n + 3)
        z1, z2 = oracle.distribution_basis(p, q)
        W = oracle.constraint_matrix(p, q)
        worst_ann = max(worst_ann, float(np.max(np.abs(W @ z1))),
                        float(np.max(np.abs(W @ z2))))
        g = oracle.gram_matrix(p, q)
        want = np.diag([model.coeff_R(p, q[3:]),
                        model.rotational_inertia(p)])
        worst_gram = max(worst_gram, float(np.max(np.abs(g - want))))
    return worst_ann, worst_gram


def check_trailer_speeds(rng, samples: int = 100) -> float:
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(1, 7))
        p = random_params(rng, n)
        worst = max(worst, float(np.max(np.abs(
            oracle.trailer_speed_check(p, _random_state(rng, n))))))
    return worst


def check_identities(rng, samples: int = 200) -> tuple[float, float, float]:
    worst = [0.0, 0.0, 0.0]
    for _ in range(samples):
        n = int(rng.integers(1, 8))
        alpha = rng.uniform(-math.pi, math.pi, n)
        T = rng.uniform(-2.0, 2.0, n)
        res = model.identity_check(T, alpha)
        worst[0] = max(worst[0], res["sine_of_sum"])
        worst[1] = max(worst[1], res["telescoped_sum"])
        worst[2] = max(worst[2], res["kinetic_expansion"])
    return tuple(worst)


def check_r_gradient(rng, samples: int = 200) -> tuple[float, float]:
    """dR/dalpha_1 = -2Q/l^2 in closed form, and the full analytic gradient
    against central differences."""
    worst_q = 0.0
    worst_fd = 0.0
    h = 1e-6
    for _ in range(samples):
        n = int(rng.integers(1, 6))
        p = random_params(rng, n)
        alpha = rng.uniform(-math.pi, math.pi, n)
        grad = model.coeff_R_grad(p, alpha)
        worst_q = max(worst_q, abs(
            grad[0] + 2.0 * model.coeff_Q(p, alpha) / p.l**2))
        for k in range(n):
            ap, am = alpha.copy(), alpha.copy()
            ap[k] += h
            am[k] -= h
            fd = (model.coeff_R(p, ap) - model.coeff_R(p, am)) / (2.0 * h)
            worst_fd = max(worst_fd, abs(grad[k] - fd))
    return worst_q, worst_fd


def check_torus_chain_rule(rng, samples: int = 100) -> float:
    """Pushing the energy-surface flow through the embedding recovers the
    reduced vector field."""
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(0, 4))
        p = random_params(rng, n)
        E = float(rng.uniform(0.2, 3.0))
        tc = TorusCoords(E=E, beta=float(rng.uniform(-math.pi, math.pi)),
                         alpha=rng.uniform(-math.pi, math.pi, n))
        s = model.torus_embed(p, tc)
        zdot = reduced_dynamics.torus_vector_field(p, E, tc)
        alphadot, betadot = zdot[1:], zdot[0]
        R = model.coeff_R(p, tc.alpha)
        dR = model.coeff_R_grad(p, tc.alpha)
        rot = model.rotational_inertia(p)
        du = (math.sqrt(2 * E) * (-0.5 * R**-1.5 * float(dR @ alphadot))
              * math.cos(tc.beta)
              - math.sqrt(2 * E / R) * math.sin(tc.beta) * betadot)
        dw = math.sqrt(2 * E / rot) * math.cos(tc.beta) * betadot
        full = reduced_dynamics.reduced_vector_field(p, s)
        worst = max(worst, abs(du - full[0]), abs(dw - full[1]))
        if n:
            worst = max(worst, float(np.max(np.abs(alphadot - full[2:]))))
    return worst


def check_conservation(params: VehicleParams | None = None) -> tuple[float, float]:
    """Energy drift over 100 time units, and heading-rate drift at a = 0."""
    p = params or VehicleParams(M=1.0, m=0.8, J0=0.7, J=0.3, a=0.5, l=1.0,
                                n=2)
    s0 = ReducedState(u=0.9, omega=0.4,
                      alpha=np.linspace(0.3, -0.5, p.n))
    traj = reduced_dynamics.integrate_reduced(
        p, s0, (0.0, 100.0), t_eval=np.linspace(0.0, 100.0, 401))
    p0 = VehicleParams(M=p.M, m=p.m, J0=p.J0, J=p.J, a=0.0, l=p.l, n=p.n)
    traj0 = reduced_dynamics.integrate_reduced(
        p0, s0, (0.0, 100.0), t_eval=np.linspace(0.0, 100.0, 401))
    return traj.energy_drift, traj0.omega_drift


def check_reversibility(params: VehicleParams | None = None) -> float:
    """(u, omega, t) -> (-u, -omega, -t) maps solutions to solutions.

    Backward integration runs against the contraction of the forward flow,
    so the mismatch is integrator error amplified by the condition number
    of the flow map over the horizon; the horizon is kept short enough for
    that amplification to stay modest.
    """
    p = params or VehicleParams(M=1.0, m=0.8, J0=0.7, J=0.3, a=0.5, l=1.0,
                                n=2)
    s0 = ReducedState(u=0.8, omega=-0.3, alpha=np.linspace(0.4, 0.1, p.n))
    horizon = 5.0
    grid = np.linspace(0.0, horizon, 51)
    fwd = reduced_dynamics.integrate_reduced(p, s0, (0.0, horizon),
                                             t_eval=grid)
    flipped = ReducedState(u=-fwd.states[-1, 0], omega=-fwd.states[-1, 1],
                           alpha=fwd.states[-1, 2:])
    back = reduced_dynamics.integrate_reduced(p, flipped, (0.0, horizon),
                                              t_eval=grid)
    mirrored = fwd.states[::-1].copy()
    mirrored[:, 0] *= -1.0
    mirrored[:, 1] *= -1.0
    return float(np.max(np.abs(back.states - mirrored)))


def run_checks(seed: int = 0, oracle_samples: int = 1000,
               params: VehicleParams | None = None) -> list[CheckResult]:
    """Run the full battery; deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    results: list[CheckResult] = []

    results.append(CheckResult("oracle_equivalence",
                               check_oracle_equivalence(rng, oracle_samples),
                               1e-9))
    results.append(CheckResult("projected_bracket_coeffs",
                               check_projected_bracket(rng), 1e-10))
    sym, quad = check_mass_matrix(rng)
    results.append(CheckResult("mass_matrix_symmetry", sym, 1e-12))
    results.append(CheckResult("mass_matrix_quadratic_form", quad, 1e-12))
    ann, gram = check_constraints_and_gram(rng)
    results.append(CheckResult("constraint_annihilation", ann, 1e-12))
    results.append(CheckResult("restricted_metric_diagonal", gram, 1e-10))
    results.append(CheckResult("trailer_speeds",
                               check_trailer_speeds(rng), 1e-10))
    ids = check_identities(rng)
    results.append(CheckResult("sine_sum_identity", ids[0], 1e-10))
    results.append(CheckResult("telescoped_sum_identity", ids[1], 1e-10))
    results.append(CheckResult("kinetic_expansion_identity", ids[2], 1e-10))
    rq, rfd = check_r_gradient(rng)
    results.append(CheckResult("r_gradient_closed_form", rq, 1e-10))
    results.append(CheckResult("r_gradient_finite_difference", rfd, 1e-6))
    results.append(CheckResult("torus_chain_rule",
                               check_torus_chain_rule(rng), 1e-10))
    e_drift, w_drift = check_conservation(params)
    results.append(CheckResult("energy_conservation", e_drift, 1e-8))
    results.append(CheckResult("omega_conservation_a0", w_drift, 1e-10))
    results.append(CheckResult("reversibility",
                               check_reversibility(params), 1e-7))
    return results


def report_text(results: list[CheckResult]) -> str:
    lines = [f"{'check':<32}{'max residual':>14}{'tolerance':>12}  status"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<32}{r.residual:>14.6e}{r.tolerance:>12.1e}"
                     f"  {status}")
    n_fail = sum(not r.passed for r in results)
    lines.append("all checks passed" if n_fail == 0
                 else f"{n_fail} check(s) FAILED")
    return "\n".join(lines) + "\n"
