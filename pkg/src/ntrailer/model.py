"""Physical parameters, state containers and closed-form coefficients.

A convoy consists of a leading car towing ``n`` identical trailers through
rigid links of length ``l``.  Each body rolls on a wheel axle that forbids
sideways slip, which leaves the planar pose of the leading car plus the
relative hitch angles ``alpha_1 .. alpha_n`` as configuration variables.
After quotienting by planar translations and rotations the dynamics lives in
the variables ``(u, omega, alpha)`` where ``u`` is the longitudinal speed of
the leading car and ``omega`` its heading rate.

This module holds the shared coefficient functions of those reduced
equations (the hitch coupling coefficients ``A_k``, the effective mass
``R(alpha)``, the gyroscopic coefficient ``Q(alpha)``), the conserved
energy, the angle parametrization of its level sets, and the planar
symmetry action.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "VehicleParams",
    "ReducedState",
    "FullState",
    "TorusCoords",
    "SE2Element",
    "wrap_angle",
    "coeff_A",
    "coeff_R",
    "coeff_Q",
    "coeff_R_grad",
    "energy",
    "rotational_inertia",
    "torus_embed",
    "torus_project",
    "apply_se2",
    "trailer_headings",
    "trailer_positions",
    "identity_check",
]


@dataclass(frozen=True)
class VehicleParams:
    """Physical constants of the convoy (SI units).

    Parameters
    ----------
    M : float
        Mass of the leading car (kg).
    m : float
        Mass of each trailer (kg).
    J0 : float
        Moment of inertia of the leading car about its center of mass
        (kg m^2).
    J : float
        Moment of inertia of each trailer about its axle midpoint (kg m^2).
    a : float
        Offset of the leading car's center of mass ahead of its axle
        midpoint (m, >= 0).
    l : float
        Length of each hitch link (m, > 0).
    n : int
        Number of trailers (>= 0).  ``n = 0`` degenerates to a single
        sliding body (the classical knife-edge sleigh).
    """

    M: float
    m: float
    J0: float
    J: float
    a: float
    l: float
    n: int

    def __post_init__(self) -> None:
        if not (self.M > 0 and self.m > 0 and self.J0 > 0):
            raise ValueError("masses M, m and inertia J0 must be positive")
        if self.J < 0:
            raise ValueError("trailer inertia J must be nonnegative")
        if not self.l > 0:
            raise ValueError("link length l must be positive")
        if self.a < 0:
            raise ValueError("center-of-mass offset a must be nonnegative")
        if self.n < 0 or int(self.n) != self.n:
            raise ValueError("trailer count n must be a nonnegative integer")

    @property
    def inertia_condition(self) -> bool:
        """True when J < m*l**2, the physically natural trailer regime."""
        return self.J < self.m * self.l**2

    def to_dict(self) -> dict:
        return {"M": self.M, "m": self.m, "J0": self.J0, "J": self.J,
                "a": self.a, "l": self.l, "n": self.n}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "VehicleParams":
        expected = {"M", "m", "J0", "J", "a", "l", "n"}
        unknown = set(d) - expected
        if unknown:
            raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
        missing = expected - set(d)
        if missing:
            raise ValueError(f"missing parameter keys: {sorted(missing)}")
        return cls(M=float(d["M"]), m=float(d["m"]), J0=float(d["J0"]),
                   J=float(d["J"]), a=float(d["a"]), l=float(d["l"]),
                   n=int(d["n"]))

    @classmethod
    def from_json(cls, text: str) -> "VehicleParams":
        return cls.from_dict(json.loads(text))


def rotational_inertia(params: VehicleParams) -> float:
    """Moment of inertia J0 + M*a**2 of the leading car about its axle."""
    return params.J0 + params.M * params.a**2


def _as_alpha(params: VehicleParams, alpha) -> np.ndarray:
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if alpha.shape != (params.n,):
        raise ValueError(
            f"alpha has length {alpha.size}, expected n = {params.n}")
    return alpha


@dataclass(frozen=True)
class ReducedState:
    """State ``(u, omega, alpha_1..alpha_n)`` of the symmetry-reduced system.

    Angles are stored unwrapped; mapping to the principal interval is an
    explicit operation (see :func:`wrap_angle`), never implicit.
    """

    u: float
    omega: float
    alpha: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha",
                           np.atleast_1d(np.asarray(self.alpha, dtype=float)))

    @property
    def n(self) -> int:
        return self.alpha.size

    def as_array(self) -> np.ndarray:
        return np.concatenate(([self.u, self.omega], self.alpha))

    @classmethod
    def from_array(cls, y) -> "ReducedState":
        y = np.asarray(y, dtype=float)
        return cls(u=float(y[0]), omega=float(y[1]), alpha=y[2:].copy())

    def to_json(self) -> str:
        return json.dumps(self.as_array().tolist())


@dataclass(frozen=True)
class FullState:
    """Planar pose of the leading car plus hitch angles.

    Trailer poses are always derived (see :func:`trailer_headings` and
    :func:`trailer_positions`), never stored.
    """

    x: float
    y: float
    theta: float
    alpha: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha",
                           np.atleast_1d(np.asarray(self.alpha, dtype=float)))

    @property
    def n(self) -> int:
        return self.alpha.size

    def as_array(self) -> np.ndarray:
        return np.concatenate(([self.x, self.y, self.theta], self.alpha))

    @classmethod
    def from_array(cls, q) -> "FullState":
        q = np.asarray(q, dtype=float)
        return cls(x=float(q[0]), y=float(q[1]), theta=float(q[2]),
                   alpha=q[3:].copy())

    def to_json(self) -> str:
        return json.dumps(self.as_array().tolist())


@dataclass(frozen=True)
class TorusCoords:
    """Angle coordinates ``(beta, alpha)`` on an energy level set ``E > 0``."""

    E: float
    beta: float
    alpha: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha",
                           np.atleast_1d(np.asarray(self.alpha, dtype=float)))
        if not self.E > 0:
            raise ValueError("energy level E must be positive")


@dataclass(frozen=True)
class SE2Element:
    """Planar rigid motion: rotation by ``phi`` followed by translation."""

    phi: float
    r: float
    s: float

    @classmethod
    def identity(cls) -> "SE2Element":
        return cls(0.0, 0.0, 0.0)

    def compose(self, other: "SE2Element") -> "SE2Element":
        """Group product self * other (apply ``other`` first)."""
        c, s = math.cos(self.phi), math.sin(self.phi)
        return SE2Element(
            phi=self.phi + other.phi,
            r=c * other.r - s * other.s + self.r,
            s=s * other.r + c * other.s + self.s,
        )

    def apply_point(self, x: float, y: float) -> tuple[float, float]:
        c, s = math.cos(self.phi), math.sin(self.phi)
        return c * x - s * y + self.r, s * x + c * y + self.s


def wrap_angle(x):
    """Map angles to the principal interval (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2.0 * np.pi)


def _padded_trig(alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cosines and sines of ``(alpha_0, alpha_1, .., alpha_n)``.

    Single home for the index conventions every coefficient formula leans
    on: ``alpha_0 = 0`` and products over empty index ranges equal to one
    (slices like ``c[1:k-1]`` are then empty, and ``np.prod`` of an empty
    slice is 1).
    """
    ext = np.concatenate(([0.0], alpha))
    return np.cos(ext), np.sin(ext)


def coeff_A(params: VehicleParams, alpha) -> np.ndarray:
    """Hitch coupling coefficients ``A_1 .. A_n``.

    ``A_k = (1/l) * (prod_{j=1}^{k-2} cos(alpha_j))
                  * (sin(alpha_{k-1}) - cos(alpha_{k-1}) sin(alpha_k))``

    with the conventions ``alpha_0 = 0`` and empty product equal to one, so
    ``A_1 = -sin(alpha_1)/l``.  The relative angles evolve as
    ``d(alpha_1)/dt = omega + u*A_1`` and ``d(alpha_k)/dt = u*A_k``.
    """
    alpha = _as_alpha(params, alpha)
    n = params.n
    if n == 0:
        return np.empty(0)
    c, s = _padded_trig(alpha)
    out = np.empty(n)
    for k in range(1, n + 1):
        head = float(np.prod(c[1:k - 1]))
        out[k - 1] = head * (s[k - 1] - c[k - 1] * s[k]) / params.l
    return out


def coeff_R(params: VehicleParams, alpha) -> float:
    """Effective longitudinal mass ``R(alpha)``, strictly positive.

    ``R = M + m * sum_{j=1}^{n} prod_{k=1}^{j} cos^2(alpha_k)
        + (J/l^2) * (1 - prod_{k=1}^{n} cos^2(alpha_k))``
    """
    alpha = _as_alpha(params, alpha)
    if params.n == 0:
        return params.M
    c2 = np.cos(alpha) ** 2
    partial = np.cumprod(c2)
    return float(params.M + params.m * partial.sum()
                 + (params.J / params.l**2) * (1.0 - partial[-1]))


def coeff_Q(params: VehicleParams, alpha) -> float:
    """Gyroscopic coupling coefficient ``Q(alpha)``.

    ``Q = cos(alpha_1) sin(alpha_1) * (m l^2 sum_{j=1}^{n}
    prod_{k=2}^{j} cos^2(alpha_k) - J prod_{k=2}^{n} cos^2(alpha_k))``;
    defined as zero for ``n = 0``.  Satisfies ``dR/dalpha_1 = -2 Q / l^2``.
    """
    alpha = _as_alpha(params, alpha)
    if params.n == 0:
        return 0.0
    c2 = np.cos(alpha) ** 2
    # tail[j-1] = prod_{k=2}^{j} cos^2(alpha_k); empty product for j = 1
    tail = np.cumprod(np.concatenate(([1.0], c2[1:])))
    return float(math.cos(alpha[0]) * math.sin(alpha[0])
                 * (params.m * params.l**2 * tail.sum() - params.J * tail[-1]))


def coeff_R_grad(params: VehicleParams, alpha) -> np.ndarray:
    """Analytic gradient ``dR/dalpha`` of :func:`coeff_R`.

    ``dR/dalpha_i = -2 cos(alpha_i) sin(alpha_i) *
    (m sum_{j=i}^{n} prod_{k<=j, k!=i} cos^2(alpha_k)
    - (J/l^2) prod_{k<=n, k!=i} cos^2(alpha_k))``
    """
    alpha = _as_alpha(params, alpha)
    n = params.n
    grad = np.zeros(n)
    if n == 0:
        return grad
    c2 = np.cos(alpha) ** 2
    for i in range(n):
        run = float(np.prod(c2[:i]))  # factors k < i, skipping index i
        msum = run
        for j in range(i + 1, n):
            run *= c2[j]
            msum += run
        grad[i] = (-2.0 * math.cos(alpha[i]) * math.sin(alpha[i])
                   * (params.m * msum - (params.J / params.l**2) * run))
    return grad


def energy(params: VehicleParams, state: ReducedState) -> float:
    """Conserved kinetic energy ``(R(alpha) u^2 + (J0 + M a^2) omega^2)/2``."""
    R = coeff_R(params, state.alpha)
    return 0.5 * (R * state.u**2
                  + rotational_inertia(params) * state.omega**2)


def torus_embed(params: VehicleParams, coords: TorusCoords) -> ReducedState:
    """Map torus angles ``(beta, alpha)`` at level ``E`` to ``(u, omega, alpha)``.

    ``u = sqrt(2E/R(alpha)) cos(beta)``,
    ``omega = sqrt(2E/(J0 + M a^2)) sin(beta)``.
    """
    R = coeff_R(params, coords.alpha)
    u = math.sqrt(2.0 * coords.E / R) * math.cos(coords.beta)
    omega = (math.sqrt(2.0 * coords.E / rotational_inertia(params))
             * math.sin(coords.beta))
    return ReducedState(u=u, omega=omega, alpha=coords.alpha.copy())


def torus_project(params: VehicleParams, state: ReducedState) -> TorusCoords:
    """Invert :func:`torus_embed`; fails on the zero-energy state."""
    E = energy(params, state)
    if not E > 0:
        raise ValueError("zero-energy state has no torus angle beta")
    R = coeff_R(params, state.alpha)
    cos_b = state.u / math.sqrt(2.0 * E / R)
    sin_b = state.omega / math.sqrt(2.0 * E / rotational_inertia(params))
    return TorusCoords(E=E, beta=math.atan2(sin_b, cos_b),
                       alpha=state.alpha.copy())


def apply_se2(g: SE2Element, state: FullState) -> FullState:
    """Act on the pose of the leading car; relative angles are untouched."""
    x, y = g.apply_point(state.x, state.y)
    return FullState(x=x, y=y, theta=state.theta + g.phi,
                     alpha=state.alpha.copy())


def trailer_headings(state: FullState) -> np.ndarray:
    """Headings ``theta_i = theta - sum_{j<=i} alpha_j`` for ``i = 1..n``."""
    return state.theta - np.cumsum(state.alpha)


def trailer_positions(params: VehicleParams, state: FullState) -> np.ndarray:
    """Axle midpoints of the trailers, shape ``(n, 2)``.

    ``(x_i, y_i) = (x, y) - l * sum_{j<=i} (cos(theta_j), sin(theta_j))``.
    """
    th = trailer_headings(state)
    xs = state.x - params.l * np.cumsum(np.cos(th))
    ys = state.y - params.l * np.cumsum(np.sin(th))
    return np.column_stack((xs, ys))


def identity_check(T, alpha) -> dict[str, float]:
    """Residuals of the trigonometric identities behind the reduction.

    Evaluates both sides of three identities and returns their largest
    absolute mismatch:

    - ``sine_of_sum``: expansion of ``sin(alpha_1 + .. + alpha_i)`` into
      cosine-weighted single-angle sines, for every ``i``.
    - ``telescoped_sum``: the partial sums of the hitch coupling terms
      collapse to ``-(prod_{s<j} cos(alpha_s)) sin(alpha_j)``.
    - ``kinetic_expansion``: the squared partial sums of ``T_j``-weighted
      direction vectors expand into the double-cosine quadratic form, with
      headings accumulated from ``alpha``.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    T = np.atleast_1d(np.asarray(T, dtype=float))
    n = alpha.size
    if T.size != n:
        raise ValueError("T and alpha must have the same length")
    c = np.cos(alpha)
    s = np.sin(alpha)

    res_sin = 0.0
    for i in range(1, n + 1):
        lhs = math.sin(alpha[:i].sum())
        rhs = 0.0
        for j in range(1, i + 1):
            rhs += (math.cos(alpha[j:i].sum())
                    * float(np.prod(c[: j - 1])) * s[j - 1])
        res_sin = max(res_sin, abs(lhs - rhs))

    res_tel = 0.0
    ce, se = _padded_trig(alpha)
    for j in range(1, n + 1):
        lhs = 0.0
        for k in range(1, j + 1):
            head = float(np.prod(ce[1:k - 1]))
            lhs += head * (se[k - 1] - ce[k - 1] * se[k])
        rhs = -float(np.prod(c[: j - 1])) * s[j - 1]
        res_tel = max(res_tel, abs(lhs - rhs))

    # headings theta_j = -(alpha_1 + .. + alpha_j); the identity holds for
    # arbitrary angles, the accumulated ones are the case used in practice
    th = -np.cumsum(alpha)
    lhs = 0.0
    for i in range(1, n + 1):
        cx = float(np.sum(T[:i] * np.cos(th[:i])))
        sx = float(np.sum(T[:i] * np.sin(th[:i])))
        lhs += cx * cx + sx * sx
    rhs = float(np.sum((n + 1 - np.arange(1, n + 1)) * T**2))
    for k in range(1, n + 1):
        for j in range(k + 1, n + 1):
            rhs += (2.0 * (n + 1 - j) * T[k - 1] * T[j - 1]
                    * math.cos(th[k - 1] - th[j - 1]))
    res_kin = abs(lhs - rhs)

    return {"sine_of_sum": res_sin, "telescoped_sum": res_tel,
            "kinetic_expansion": res_kin}
