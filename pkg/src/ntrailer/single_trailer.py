"""Complete treatment of the one-trailer convoy with centered mass (a = 0).

With ``a = 0`` the heading rate ``omega`` is conserved, so for ``n = 1``
the motion on each invariant circle ``{E, omega0}`` is governed by a single
angle.  The critical energy

    E_c = (J0 + J + M l^2) omega0^2 / 2

separates periodic hitch oscillation (subcritical) from asymptotic locking
of the trailer at a fixed angle (supercritical); at ``E = E_c`` the circle
carries a single degenerate rest point at ``alpha = pi/2``.  Subcritical
motion has an explicit period quadrature, and the per-period planar
holonomy (net rotation and translation of the leading car) classifies the
trajectory as periodic, quasiperiodic or unbounded.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.optimize import brentq

from . import model
from .model import VehicleParams

__all__ = [
    "SingleTrailerAnalysis",
    "CircleFlow",
    "Holonomy",
    "critical_energy",
    "spin_energy",
    "classify_regime",
    "f_alpha",
    "solve_equilibrium_angles",
    "alpha_rate",
    "period",
    "invariant_circle_flow",
    "holonomy",
    "analyze",
    "best_rational",
]


def _require_single_trailer(params: VehicleParams, need_a0: bool = True) -> None:
    if params.n != 1:
        raise ValueError("analysis requires exactly one trailer (n = 1)")
    if need_a0 and params.a != 0.0:
        raise ValueError("analysis requires a centered car mass (a = 0)")


def critical_energy(params: VehicleParams, omega0: float) -> float:
    """Energy separating periodic from asymptotic hitch dynamics."""
    return 0.5 * (params.J0 + params.J + params.M * params.l**2) * omega0**2


def spin_energy(params: VehicleParams, omega0: float) -> float:
    """Lowest energy on the invariant circle, ``J0 omega0^2 / 2`` (u = 0)."""
    return 0.5 * params.J0 * omega0**2


def classify_regime(params: VehicleParams, omega0: float, E: float) -> str:
    """One of subcritical / critical / supercritical."""
    _require_single_trailer(params)
    if omega0 <= 0:
        raise ValueError("working convention requires omega0 > 0")
    e_min = spin_energy(params, omega0)
    e_c = critical_energy(params, omega0)
    if E < e_min * (1.0 - 1e-12):
        raise ValueError(
            f"energy {E} below the minimum {e_min} on the invariant circle")
    if abs(E - e_c) <= 4.0 * np.finfo(float).eps * e_c:
        return "critical"
    return "subcritical" if E < e_c else "supercritical"


def f_alpha(params: VehicleParams, alpha: float) -> float:
    """Shape function ``sin^2(alpha) / R(alpha)`` of the circle equilibria.

    Symmetric about ``pi/2`` where it peaks at ``l^2 / (J + M l^2)``; its
    level sets locate the trailer locking angles.
    """
    if params.n != 1:
        raise ValueError("f_alpha is defined for n = 1")
    return math.sin(alpha) ** 2 / model.coeff_R(params, [alpha])


def solve_equilibrium_angles(params: VehicleParams, omega0: float,
                             E: float) -> tuple[str, tuple[float, ...]]:
    """Rest angles of the hitch on the invariant circle ``{E, omega0}``.

    Supercritical levels carry two angles ``0 < a1 < pi/2 < a2 < pi`` with
    equal sines, found by root bracketing on each monotone half of
    :func:`f_alpha`; the critical level carries only ``pi/2``; subcritical
    levels none.  Each angle pairs with the speed ``u = l omega0 /
    sin(alpha)``.
    """
    regime = classify_regime(params, omega0, E)
    if regime == "subcritical":
        return regime, ()
    if regime == "critical":
        return regime, (0.5 * math.pi,)
    target = (params.l * omega0) ** 2 / (2.0 * E - params.J0 * omega0**2)
    g = lambda alpha: f_alpha(params, alpha) - target
    a1 = brentq(g, 0.0, 0.5 * math.pi, xtol=1e-14, rtol=8.9e-16)
    a2 = brentq(g, 0.5 * math.pi, math.pi, xtol=1e-14, rtol=8.9e-16)
    return regime, (a1, a2)


def alpha_rate(params: VehicleParams, omega0: float, E: float,
               alpha: float) -> float:
    """Hitch-angle velocity along the invariant circle.

    ``dalpha/dt = omega0 - sqrt(2E - J0 omega0^2) sin(alpha) /
    (l sqrt(R(alpha)))``.
    """
    _require_single_trailer(params)
    k = 2.0 * E - params.J0 * omega0**2
    if k < 0:
        raise ValueError("energy below the invariant-circle minimum")
    R = model.coeff_R(params, [alpha])
    return omega0 - math.sqrt(k) * math.sin(alpha) / (params.l * math.sqrt(R))


def period(params: VehicleParams, omega0: float, E: float) -> float:
    """Period of the subcritical hitch oscillation by adaptive quadrature.

    ``T = integral_0^{2 pi} l sqrt(R) dalpha /
    (l omega0 sqrt(R) - sqrt(2E - J0 omega0^2) sin(alpha))``.

    The denominator is verified positive over the whole interval first; it
    degenerates exactly at the critical energy.
    """
    regime = classify_regime(params, omega0, E)
    if regime != "subcritical":
        raise ValueError(
            f"period quadrature requires subcritical energy E < E_c = "
            f"{critical_energy(params, omega0):.17g} (got E = {E:.17g}, "
            f"{regime})")
    k = math.sqrt(2.0 * E - params.J0 * omega0**2)

    def denom(alpha):
        return (params.l * omega0 * math.sqrt(model.coeff_R(params, [alpha]))
                - k * math.sin(alpha))

    grid = np.linspace(0.0, 2.0 * math.pi, 4096)
    if min(denom(al) for al in grid) <= 0.0:
        raise ValueError(
            "integrand denominator vanishes; energy is at or above the "
            f"critical energy {critical_energy(params, omega0):.17g}")

    def integrand(alpha):
        R = model.coeff_R(params, [alpha])
        return params.l * math.sqrt(R) / (
            params.l * omega0 * math.sqrt(R) - k * math.sin(alpha))

    # bisect at pi/2 where the denominator is smallest near criticality;
    # just below the critical energy the integrand peaks sharply and the
    # quadrature warns that 1e-12 is unreachable, which is expected there
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(integrand, 0.0, 2.0 * math.pi,
                        points=[0.5 * math.pi], epsabs=0.0, epsrel=1e-12,
                        limit=400)
    return val


@dataclass(frozen=True)
class CircleFlow:
    """Sampled phase portrait of the hitch angle on an invariant circle."""

    regime: str
    alphas: np.ndarray
    rates: np.ndarray
    equilibria: tuple[float, ...]
    slopes: tuple[float, ...]       # d(rate)/dalpha at each equilibrium
    stability: tuple[str, ...]
    orbit: str


def invariant_circle_flow(params: VehicleParams, omega0: float, E: float,
                          samples: int = 1024) -> CircleFlow:
    """Zero structure and orbit type of the flow on the invariant circle.

    Subcritical: no rest point, one periodic orbit.  Critical: a single
    degenerate rest point with a homoclinic loop.  Supercritical: a stable
    and an unstable rest point joined by two heteroclinic arcs.
    """
    regime, angles = solve_equilibrium_angles(params, omega0, E)
    alphas = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    rates = np.array([alpha_rate(params, omega0, E, al) for al in alphas])
    h = 1e-6
    slopes = tuple(
        (alpha_rate(params, omega0, E, al + h)
         - alpha_rate(params, omega0, E, al - h)) / (2.0 * h)
        for al in angles)
    if regime == "subcritical":
        stability, orbit = (), "periodic orbit"
    elif regime == "critical":
        stability, orbit = ("degenerate",), "homoclinic connection"
    else:
        stability = tuple("stable" if s < 0 else "unstable" for s in slopes)
        orbit = "two heteroclinic orbits"
    return CircleFlow(regime=regime, alphas=alphas, rates=rates,
                      equilibria=angles, slopes=slopes, stability=stability,
                      orbit=orbit)


def best_rational(x: float, max_den: int = 64) -> tuple[int, int, float]:
    """Closest fraction p/q with q <= max_den; returns (p, q, error)."""
    best = (round(x), 1, abs(x - round(x)))
    for q in range(2, max_den + 1):
        p = round(x * q)
        err = abs(x - p / q)
        if err < best[2]:
            best = (p, q, err)
    return best


@dataclass(frozen=True)
class Holonomy:
    """Net rigid motion of the leading car over one hitch period."""

    period: float
    dtheta: float
    dx: float
    dy: float
    classification: str

    def to_dict(self) -> dict:
        return {"dtheta": self.dtheta, "dx": self.dx, "dy": self.dy,
                "classification": self.classification}


def holonomy(params: VehicleParams, omega0: float, E: float,
             rational_tol: float = 1e-9, max_den: int = 64) -> Holonomy:
    """Per-period rotation and translation of the leading car.

    Starting from heading zero, one subcritical period rotates the car by
    ``omega0 T`` and translates it by the integral of ``u e^{i omega0 t}``.
    The rotation fraction of a full turn is screened against small
    rationals to label the long-run planar motion; the labels are advisory
    (a numerical test cannot certify irrationality).
    """
    T = period(params, omega0, E)
    k = math.sqrt(2.0 * E - params.J0 * omega0**2)

    def rhs(t, z):
        alpha = z[0]
        R = model.coeff_R(params, [alpha])
        return [alpha_rate(params, omega0, E, alpha),
                k * math.cos(omega0 * t) / math.sqrt(R),
                k * math.sin(omega0 * t) / math.sqrt(R)]

    sol = solve_ivp(rhs, (0.0, T), [0.0, 0.0, 0.0], method="RK45",
                    rtol=1e-12, atol=1e-12)
    if not sol.success:
        raise RuntimeError(f"holonomy integration failed: {sol.message}")
    dx, dy = float(sol.y[1, -1]), float(sol.y[2, -1])
    dtheta = omega0 * T

    turns = dtheta / (2.0 * math.pi)
    p, q, err = best_rational(turns, max_den)
    if q == 1 and err <= rational_tol:
        label = "unbounded" if dx**2 + dy**2 > 1e-12 else "periodic"
    elif err <= rational_tol:
        label = "periodic"
    else:
        label = "quasiperiodic"
    return Holonomy(period=T, dtheta=dtheta, dx=dx, dy=dy,
                    classification=label)


@dataclass(frozen=True)
class SingleTrailerAnalysis:
    """Summary of the invariant-circle dynamics at one ``(omega0, E)``."""

    omega0: float
    E: float
    E_c: float
    regime: str
    equilibrium_angles: tuple[float, ...]
    period: float | None


def analyze(params: VehicleParams, omega0: float,
            E: float) -> SingleTrailerAnalysis:
    """Regime, rest angles and (when periodic) the oscillation period."""
    regime, angles = solve_equilibrium_angles(params, omega0, E)
    T = period(params, omega0, E) if regime == "subcritical" else None
    return SingleTrailerAnalysis(
        omega0=omega0, E=E, E_c=critical_energy(params, omega0),
        regime=regime, equilibrium_angles=angles, period=T)
