"""Shared test utilities: independent reference formulas and numerics.

The ``ref_*`` functions are deliberately naive term-by-term transcriptions
of the coefficient definitions (explicit loops, no shared code with the
package) so they can serve as oracles for the vectorized implementations.
"""

import math

import numpy as np

from ntrailer.model import VehicleParams


def ref_coeff_A(l, alpha):
    alpha = list(alpha)
    n = len(alpha)
    ext = [0.0] + alpha  # alpha_0 = 0
    out = []
    for k in range(1, n + 1):
        prod = 1.0
        for j in range(1, k - 1):
            prod *= math.cos(ext[j])
        out.append(prod * (math.sin(ext[k - 1])
                           - math.cos(ext[k - 1]) * math.sin(ext[k])) / l)
    return np.array(out)


def ref_coeff_R(params, alpha):
    total = params.M
    for j in range(1, params.n + 1):
        prod = 1.0
        for k in range(1, j + 1):
            prod *= math.cos(alpha[k - 1]) ** 2
        total += params.m * prod
    prod = 1.0
    for k in range(1, params.n + 1):
        prod *= math.cos(alpha[k - 1]) ** 2
    total += (params.J / params.l**2) * (1.0 - prod)
    return total


def ref_coeff_Q(params, alpha):
    if params.n == 0:
        return 0.0
    total = 0.0
    for j in range(1, params.n + 1):
        prod = 1.0
        for k in range(2, j + 1):
            prod *= math.cos(alpha[k - 1]) ** 2
        total += prod
    tail = 1.0
    for k in range(2, params.n + 1):
        tail *= math.cos(alpha[k - 1]) ** 2
    return (math.cos(alpha[0]) * math.sin(alpha[0])
            * (params.m * params.l**2 * total - params.J * tail))


def numerical_jacobian(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x))
    J = np.zeros((f0.size, x.size))
    for j in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        J[:, j] = (np.asarray(f(xp)) - np.asarray(f(xm))) / (2.0 * h)
    return J


def log_uniform(rng, lo, hi):
    return float(np.exp(rng.uniform(math.log(lo), math.log(hi))))


def random_params(rng, n, a=None, lo=0.5, hi=2.0):
    return VehicleParams(
        M=log_uniform(rng, lo, hi), m=log_uniform(rng, lo, hi),
        J0=log_uniform(rng, lo, hi), J=log_uniform(rng, lo, hi),
        a=log_uniform(rng, lo, hi) * 0.5 if a is None else a,
        l=log_uniform(rng, lo, hi), n=n)
