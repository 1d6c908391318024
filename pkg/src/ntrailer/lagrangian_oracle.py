"""Independent generation of the reduced equations from first principles.

Everything here is rebuilt from the full configuration-space picture: the
kinetic-energy metric is assembled body by body from the hitch geometry, the
no-slip constraints are written as one-forms, and the reduced equations are
produced through quasi-velocity equations driven by the metric-orthogonal
projection of the frame bracket.  The only shared ingredient with the
closed-form dynamics is :class:`~ntrailer.model.VehicleParams`; the
coefficient formulas are deliberately re-derived rather than imported, so
that agreement between :func:`generated_rhs` and the closed-form vector
field is a genuine two-route check.

Coordinates on the configuration space are ``q = (x, y, theta,
alpha_1 .. alpha_n)`` with dimension ``n + 3``.
"""

from __future__ import annotations

import math

import numpy as np

from .model import VehicleParams

__all__ = [
    "mass_matrix",
    "lagrangian_direct",
    "distribution_basis",
    "basis_jacobians",
    "constraint_matrix",
    "constraint_residuals",
    "gram_matrix",
    "orthogonal_project",
    "structure_coefficients",
    "generated_rhs",
    "trailer_speed_check",
    "se2_tangent_matrix",
]

# step scale for the fourth-order central stencil in the quasi-velocity
# equations; eps**(1/5) balances truncation against rounding for that order
_FD_STEP = float(np.finfo(float).eps) ** (1.0 / 5.0)


def _split(params: VehicleParams, q):
    q = np.asarray(q, dtype=float)
    if q.shape != (params.n + 3,):
        raise ValueError(f"q has length {q.size}, expected {params.n + 3}")
    return q[0], q[1], q[2], q[3:]


def _headings(theta: float, alpha: np.ndarray) -> np.ndarray:
    """theta_i = theta - (alpha_1 + .. + alpha_i), i = 1..n."""
    return theta - np.cumsum(alpha) if alpha.size else np.empty(0)


def _body_velocity_map(params: VehicleParams, q) -> np.ndarray:
    """Jacobian B mapping qdot to the stacked body velocities.

    Rows are ``(xdot_C, ydot_C, thetadot_0)`` for the leading car followed
    by ``(xdot_i, ydot_i, thetadot_i)`` for each trailer; the center of mass
    of the car sits ``a`` ahead of its axle, trailer axles hang off chains
    of links of length ``l``.
    """
    x, y, theta, alpha = _split(params, q)
    n = params.n
    th = _headings(theta, alpha)
    B = np.zeros((3 * (n + 1), n + 3))

    B[0, 0] = 1.0
    B[0, 2] = -params.a * math.sin(theta)
    B[1, 1] = 1.0
    B[1, 2] = params.a * math.cos(theta)
    B[2, 2] = 1.0

    sin_th = np.sin(th)
    cos_th = np.cos(th)
    for i in range(1, n + 1):
        r = 3 * i
        # xdot_i = xdot + l * sum_{j<=i} sin(theta_j) * thetadot_j
        # with thetadot_j = thetadot - sum_{k<=j} alphadot_k
        B[r, 0] = 1.0
        B[r, 2] = params.l * sin_th[:i].sum()
        B[r + 1, 1] = 1.0
        B[r + 1, 2] = -params.l * cos_th[:i].sum()
        for k in range(1, i + 1):
            B[r, 2 + k] = -params.l * sin_th[k - 1:i].sum()
            B[r + 1, 2 + k] = params.l * cos_th[k - 1:i].sum()
        B[r + 2, 2] = 1.0
        B[r + 2, 3:3 + i] = -1.0
    return B


def mass_matrix(params: VehicleParams, q) -> np.ndarray:
    """Kinetic-energy metric, assembled as B^T diag(masses) B."""
    B = _body_velocity_map(params, q)
    masses = np.concatenate(
        ([params.M, params.M, params.J0],
         np.tile([params.m, params.m, params.J], params.n)))
    return B.T @ (masses[:, None] * B)


def lagrangian_direct(params: VehicleParams, q, qdot) -> float:
    """Kinetic energy evaluated from its expanded closed form.

    Transcribes the expanded Lagrangian of the convoy term by term (after
    eliminating the trailer headings in favor of the relative angles).
    Serves as a cross-check on :func:`mass_matrix`, which is assembled by a
    different route.
    """
    x, y, theta, alpha = _split(params, q)
    qdot = np.asarray(qdot, dtype=float)
    xd, yd, thd = qdot[0], qdot[1], qdot[2]
    ad = qdot[3:]
    n = params.n
    M, m, J0, J, a, l = (params.M, params.m, params.J0, params.J,
                         params.a, params.l)
    th = _headings(theta, alpha)
    thd_i = thd - np.cumsum(ad) if n else np.empty(0)

    val = ((J0 + M * a**2) * thd**2
           + (M + n * m) * (xd**2 + yd**2)
           + 2.0 * M * a * thd * (yd * math.cos(theta) - xd * math.sin(theta)))
    # trailer coupling carries the opposite sign of the car's center-of-mass
    # coupling: trailers hang behind the axle, the center of mass sits ahead
    for j in range(1, n + 1):
        w = n + 1 - j
        val += 2.0 * m * l * w * thd_i[j - 1] * (
            xd * math.sin(th[j - 1]) - yd * math.cos(th[j - 1]))
        val += (J + w * m * l**2) * thd_i[j - 1]**2
    for k in range(1, n + 1):
        for j in range(k + 1, n + 1):
            val += (2.0 * m * l**2 * (n + 1 - j) * thd_i[k - 1] * thd_i[j - 1]
                    * math.cos(th[k - 1] - th[j - 1]))
    return 0.5 * val


def _coupling(params: VehicleParams, alpha: np.ndarray) -> np.ndarray:
    """Relative-angle components of the longitudinal frame field."""
    n = params.n
    ext = np.concatenate(([0.0], alpha))
    c, s = np.cos(ext), np.sin(ext)
    out = np.empty(n)
    for k in range(1, n + 1):
        head = float(np.prod(c[1:k - 1])) if k > 2 else 1.0
        out[k - 1] = head * (s[k - 1] - c[k - 1] * s[k]) / params.l
    return out


def distribution_basis(params: VehicleParams, q) -> tuple[np.ndarray, np.ndarray]:
    """Frame ``(Z1, Z2)`` of the admissible-velocity distribution.

    ``Z1`` generates longitudinal rolling of the leading car (dragging the
    trailers through the hitch kinematics), ``Z2`` pure heading rotation.
    """
    x, y, theta, alpha = _split(params, q)
    n = params.n
    Z1 = np.zeros(n + 3)
    Z1[0] = math.cos(theta)
    Z1[1] = math.sin(theta)
    Z1[3:] = _coupling(params, alpha)
    Z2 = np.zeros(n + 3)
    Z2[2] = 1.0
    if n:
        Z2[3] = 1.0
    return Z1, Z2


def basis_jacobians(params: VehicleParams, q) -> tuple[np.ndarray, np.ndarray]:
    """Analytic Jacobians d(Z1)/dq and d(Z2)/dq (the latter vanishes)."""
    x, y, theta, alpha = _split(params, q)
    n = params.n
    J1 = np.zeros((n + 3, n + 3))
    J1[0, 2] = -math.sin(theta)
    J1[1, 2] = math.cos(theta)
    ext = np.concatenate(([0.0], alpha))
    c, s = np.cos(ext), np.sin(ext)
    for k in range(1, n + 1):
        head = float(np.prod(c[1:k - 1])) if k > 2 else 1.0
        tail = s[k - 1] - c[k - 1] * s[k]
        for mm in range(1, k - 1):
            skip = 1.0
            for j in range(1, k - 1):
                if j != mm:
                    skip *= c[j]
            J1[2 + k, 2 + mm] = -s[mm] * skip * tail / params.l
        if k >= 2:
            J1[2 + k, 2 + k - 1] = head * (c[k - 1] + s[k - 1] * s[k]) / params.l
        J1[2 + k, 2 + k] = -head * c[k - 1] * c[k] / params.l
    J2 = np.zeros((n + 3, n + 3))
    return J1, J2


def constraint_matrix(params: VehicleParams, q) -> np.ndarray:
    """The ``n + 1`` no-slip one-forms as rows acting on qdot.

    Row ``i`` states that body ``i`` has no velocity component across its
    wheel axle.
    """
    x, y, theta, alpha = _split(params, q)
    n = params.n
    W = np.zeros((n + 1, n + 3))
    W[0, 0] = math.sin(theta)
    W[0, 1] = -math.cos(theta)
    for i in range(1, n + 1):
        th_i = theta - alpha[:i].sum()
        W[i, 0] = math.sin(th_i)
        W[i, 1] = -math.cos(th_i)
        # cos of the angle between body j and body i, j <= i
        gap = [math.cos(alpha[j:i].sum()) for j in range(1, i + 1)]
        W[i, 2] = params.l * sum(gap)
        for k in range(1, i + 1):
            W[i, 2 + k] = -params.l * sum(gap[k - 1:])
    return W


def constraint_residuals(params: VehicleParams, q, qdot) -> np.ndarray:
    """Evaluate each no-slip one-form on qdot."""
    return constraint_matrix(params, q) @ np.asarray(qdot, dtype=float)


def gram_matrix(params: VehicleParams, q) -> np.ndarray:
    """2x2 restriction of the kinetic metric to the frame ``(Z1, Z2)``."""
    G = mass_matrix(params, q)
    Z = np.column_stack(distribution_basis(params, q))
    return Z.T @ G @ Z


def orthogonal_project(params: VehicleParams, q, v) -> np.ndarray:
    """Metric-orthogonal projection of a tangent vector onto the frame span."""
    return np.column_stack(distribution_basis(params, q)) @ \
        project_coefficients(params, q, v)


def project_coefficients(params: VehicleParams, q, v) -> np.ndarray:
    """Coefficients of the projection of ``v`` in the frame ``(Z1, Z2)``."""
    G = mass_matrix(params, q)
    Z = np.column_stack(distribution_basis(params, q))
    return np.linalg.solve(Z.T @ G @ Z, Z.T @ G @ np.asarray(v, dtype=float))


def structure_coefficients(params: VehicleParams, q) -> tuple[float, float]:
    """Frame coefficients of the projected bracket ``P([Z1, Z2])``.

    The bracket is evaluated from the analytic Jacobians of the frame
    fields and then expanded in ``(Z1, Z2)`` through the metric-orthogonal
    projection.
    """
    Z1, Z2 = distribution_basis(params, q)
    J1, J2 = basis_jacobians(params, q)
    bracket = J2 @ Z1 - J1 @ Z2
    c = project_coefficients(params, q, bracket)
    return float(c[0]), float(c[1])


def _gram_derivative(params: VehicleParams, q, index: int) -> np.ndarray:
    """d(gram)/d(q_index) by a fourth-order central stencil."""
    h = _FD_STEP * (1.0 + abs(q[index]))
    shifted = []
    for k in (-2.0, -1.0, 1.0, 2.0):
        qs = q.copy()
        qs[index] += k * h
        shifted.append(gram_matrix(params, qs))
    return (shifted[0] - 8.0 * shifted[1] + 8.0 * shifted[2]
            - shifted[3]) / (12.0 * h)


def generated_rhs(params: VehicleParams, state) -> np.ndarray:
    """Time derivative of ``(u, omega, alpha)`` from the quasi-velocity route.

    Uses the momentum balance along each frame field: the rate of the
    conjugate momentum equals the force generated by the projected frame
    bracket plus the configuration gradient of the restricted kinetic
    energy, the latter taken by central differences.  No closed-form
    coefficient from :mod:`ntrailer.model` enters.
    """
    n = params.n
    q = np.zeros(n + 3)
    q[3:] = np.asarray(state.alpha, dtype=float)
    v = np.array([state.u, state.omega])

    Z1, Z2 = distribution_basis(params, q)
    Z = np.column_stack((Z1, Z2))
    qdot = Z @ v
    alpha_dot = qdot[3:]

    g = gram_matrix(params, q)
    dg = np.array([_gram_derivative(params, q, 3 + k) for k in range(n)]) \
        if n else np.empty((0, 2, 2))
    C1, C2 = structure_coefficients(params, q)

    p = g @ v
    force = C1 * p[0] + C2 * p[1]
    # configuration gradient of the restricted kinetic energy; x, y never
    # appear in the metric, theta is retained and differenced like alpha
    dL_alpha = np.array([0.5 * v @ dg[k] @ v for k in range(n)])
    dL_theta = 0.5 * v @ _gram_derivative(params, q, 2) @ v

    rhs = np.empty(2)
    rhs[0] = -state.omega * force + Z1[2] * dL_theta + float(Z1[3:] @ dL_alpha)
    rhs[1] = state.u * force + Z2[2] * dL_theta + float(Z2[3:] @ dL_alpha)

    dg_dt = np.tensordot(alpha_dot, dg, axes=(0, 0)) if n else np.zeros((2, 2))
    vdot = np.linalg.solve(g, rhs - dg_dt @ v)
    return np.concatenate((vdot, alpha_dot))


def trailer_speed_check(params: VehicleParams, state) -> np.ndarray:
    """Residuals of the telescoping trailer-speed law.

    Differentiates the hitch chain with the constrained velocities and
    compares each trailer's squared axle speed against
    ``u^2 prod_{k<=j} cos^2(alpha_k)``.
    """
    n = params.n
    alpha = np.asarray(state.alpha, dtype=float)
    u = state.u
    theta = 0.0
    th = _headings(theta, alpha)
    # constrained velocities of the headings
    c_partial = np.concatenate(([1.0], np.cumprod(np.cos(alpha))))
    th_dot = u * np.sin(alpha) * c_partial[:-1] / params.l
    xd, yd = u * math.cos(theta), u * math.sin(theta)
    res = np.empty(n)
    for j in range(1, n + 1):
        xj_dot = xd + params.l * float(np.sum(np.sin(th[:j]) * th_dot[:j]))
        yj_dot = yd - params.l * float(np.sum(np.cos(th[:j]) * th_dot[:j]))
        res[j - 1] = xj_dot**2 + yj_dot**2 - u**2 * c_partial[j]**2
    return res


def se2_tangent_matrix(phi: float, n: int) -> np.ndarray:
    """Tangent map of the planar symmetry action on qdot."""
    T = np.eye(n + 3)
    c, s = math.cos(phi), math.sin(phi)
    T[0, 0] = c
    T[0, 1] = -s
    T[1, 0] = s
    T[1, 1] = c
    return T
