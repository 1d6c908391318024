"""Relative equilibria of the reduced system and their stability.

For a forward center-of-mass offset (``a > 0``) every positive energy level
carries exactly ``2**(n+1)`` equilibria: straight-line motion of the convoy
with every trailer either aligned or folded over, moving forward or
backward.  Each equilibrium is labeled by a sign signature and is
hyperbolic; the linearization on the energy torus is lower triangular with
closed-form eigenvalues.

For ``a = 0`` the heading rate is itself conserved and a different family
of circular-motion equilibria appears, governed by the condition
``n l^2 omega0^2 <= u0^2``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from . import model, reduced_dynamics
from .model import ReducedState, VehicleParams

__all__ = [
    "EquilibriumSignature",
    "EquilibriumPoint",
    "A0EquilibriumResult",
    "enumerate_equilibria",
    "linearize_on_torus",
    "analytic_eigenvalues",
    "classify_stability",
    "equilibria_a0",
    "equilibria_report_json",
]

_RESIDUAL_TOL = 1e-8  # acceptance gate for "is this an equilibrium" inputs


@dataclass(frozen=True)
class EquilibriumSignature:
    """Signs ``sigma0 = cos(beta)`` and ``sigma_k = cos(alpha_k)``.

    ``sigma0 = +1`` is forward motion; ``sigma_k = -1`` marks trailer ``k``
    folded over its predecessor.
    """

    sigma0: int
    sigma: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.sigma0 not in (-1, 1) or any(s not in (-1, 1)
                                             for s in self.sigma):
            raise ValueError("signature entries must be +1 or -1")

    @property
    def physical(self) -> bool:
        """True when no trailer overlaps (all sigma_k = +1)."""
        return all(s == 1 for s in self.sigma)


@dataclass(frozen=True)
class EquilibriumPoint:
    signature: EquilibriumSignature
    E: float
    beta: float
    alpha: np.ndarray
    state: ReducedState
    eigenvalues: np.ndarray
    stability: str
    physical: bool

    def to_dict(self) -> dict:
        return {
            "sigma0": self.signature.sigma0,
            "sigma": list(self.signature.sigma),
            "energy": self.E,
            "beta": self.beta,
            "alpha": self.alpha.tolist(),
            "state": self.state.as_array().tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "stability": self.stability,
            "physical": self.physical,
        }


def classify_stability(eigenvalues) -> str:
    """Label a real spectrum: stable_node / unstable_node / saddle."""
    ev = np.asarray(eigenvalues, dtype=float)
    if np.any(ev == 0.0):
        raise ValueError("zero eigenvalue: equilibrium is not hyperbolic")
    if np.all(ev < 0):
        return "stable_node"
    if np.all(ev > 0):
        return "unstable_node"
    return "saddle"


def analytic_eigenvalues(params: VehicleParams, E: float,
                         signature: EquilibriumSignature) -> np.ndarray:
    """Closed-form spectrum of the torus linearization at a signature.

    ``lambda_0 = -(M a / (J0 + M a^2)) sqrt(2E/(M + n m)) sigma_0`` and
    ``lambda_k = -(1/l) sqrt(2E/(M + n m)) prod_{j<=k} sigma_j``.
    """
    speed = math.sqrt(2.0 * E / (params.M + params.n * params.m))
    rot = model.rotational_inertia(params)
    ev = np.empty(params.n + 1)
    ev[0] = -(params.M * params.a / rot) * speed * signature.sigma0
    running = signature.sigma0
    for k in range(1, params.n + 1):
        running *= signature.sigma[k - 1]
        ev[k] = -(speed / params.l) * running
    return ev


def _point_from_signature(params: VehicleParams, E: float,
                          signature: EquilibriumSignature) -> EquilibriumPoint:
    beta = 0.0 if signature.sigma0 == 1 else math.pi
    alpha = np.array([0.0 if s == 1 else math.pi for s in signature.sigma])
    # the torus parametrization evaluated exactly: sin(beta) = 0 and
    # R(alpha) = M + n m at every signature configuration
    u = signature.sigma0 * math.sqrt(2.0 * E / (params.M + params.n * params.m))
    state = ReducedState(u=u, omega=0.0, alpha=alpha)
    ev = analytic_eigenvalues(params, E, signature)
    return EquilibriumPoint(signature=signature, E=E, beta=beta, alpha=alpha,
                            state=state, eigenvalues=ev,
                            stability=classify_stability(ev),
                            physical=signature.physical)


def enumerate_equilibria(params: VehicleParams, E: float) -> list[EquilibriumPoint]:
    """All ``2**(n+1)`` equilibria on the level set ``E`` (requires a > 0).

    Ordered lexicographically by signature ``(sigma0, sigma_1, ...)`` with
    ``+1`` preceding ``-1``, so the physical forward equilibrium comes
    first.
    """
    if not params.a > 0:
        raise ValueError("enumeration requires a > 0; "
                         "use equilibria_a0 for a = 0")
    if not E > 0:
        raise ValueError("energy level E must be positive")
    points = []
    for signs in itertools.product((1, -1), repeat=params.n + 1):
        sig = EquilibriumSignature(sigma0=signs[0], sigma=tuple(signs[1:]))
        points.append(_point_from_signature(params, E, sig))
    return points


def linearize_on_torus(params: VehicleParams, E: float,
                       point: EquilibriumPoint) -> np.ndarray:
    """Jacobian of the energy-surface flow at an equilibrium.

    The matrix is lower triangular: the heading angle relaxes on its own,
    each hitch angle is driven by its predecessor.  Its diagonal is the
    closed-form spectrum of :func:`analytic_eigenvalues`.
    """
    z = np.concatenate(([point.beta], point.alpha))
    residual = np.max(np.abs(reduced_dynamics.torus_rhs(params, E, z)))
    if residual > _RESIDUAL_TOL:
        raise ValueError(
            f"input is not an equilibrium (vector-field residual {residual:.3e})")
    n = params.n
    sig = np.concatenate(([point.signature.sigma0],
                          np.asarray(point.signature.sigma, dtype=float)))
    speed = math.sqrt(2.0 * E / (params.M + n * params.m))
    rot = model.rotational_inertia(params)
    pref = speed / params.l
    J = np.zeros((n + 1, n + 1))
    J[0, 0] = -(params.M * params.a / rot) * speed * sig[0]
    running = sig[0]
    for k in range(1, n + 1):
        if k == 1:
            J[1, 0] = math.sqrt(2.0 * E / rot) * sig[0]
        else:
            J[k, k - 1] = pref * running
        running *= sig[k]
        J[k, k] = -pref * running
    return J


@dataclass(frozen=True)
class A0EquilibriumResult:
    """Outcome of the circular-motion equilibrium solve for ``a = 0``.

    ``condition`` is ``n l^2 omega0^2 - u0^2``; solutions exist iff it is
    nonpositive (boundary included, with the last hitch angle at +-pi/2).
    Only the principal branch ``cos(alpha_k) >= 0`` is returned.
    """

    exists: bool
    condition: float
    states: tuple[ReducedState, ...]
    residuals: tuple[float, ...]


def equilibria_a0(params: VehicleParams, u0: float,
                  omega0: float) -> A0EquilibriumResult:
    """Circular-motion equilibria with speed ``u0`` and heading rate ``omega0``.

    Requires ``a = 0`` and ``omega0 != 0``.  The hitch angles satisfy

        cos^2(alpha_k) = (u0^2 - k l^2 w0^2) / (u0^2 - (k-1) l^2 w0^2)
        sin^2(alpha_k) = l^2 w0^2 / (u0^2 - (k-1) l^2 w0^2)

    with all sines carrying the sign of ``omega0 / u0``.  The leading car
    then runs a circle of radius ``|u0 / omega0| >= sqrt(n) l``.
    """
    if params.a != 0.0:
        raise ValueError("circular-motion classification requires a = 0")
    if omega0 == 0.0:
        raise ValueError("omega0 must be nonzero")
    lw2 = (params.l * omega0) ** 2
    condition = params.n * lw2 - u0**2
    if condition > 0:
        return A0EquilibriumResult(exists=False, condition=condition,
                                   states=(), residuals=())
    sign = math.copysign(1.0, omega0 / u0) if u0 != 0.0 else 1.0
    alpha = np.empty(params.n)
    for k in range(1, params.n + 1):
        denom = u0**2 - (k - 1) * lw2
        sin_k = sign * math.sqrt(min(1.0, lw2 / denom))
        cos_k = math.sqrt(max(0.0, (u0**2 - k * lw2) / denom))
        alpha[k - 1] = math.atan2(sin_k, cos_k)
    state = ReducedState(u=u0, omega=omega0, alpha=alpha)
    residual = float(np.max(np.abs(
        reduced_dynamics.reduced_vector_field(params, state))))
    return A0EquilibriumResult(exists=True, condition=condition,
                               states=(state,), residuals=(residual,))


def equilibria_report_json(points: list[EquilibriumPoint]) -> str:
    """Serialize an equilibrium census as a JSON document."""
    return json.dumps([p.to_dict() for p in points], indent=2)
