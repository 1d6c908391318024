"""Iterated Lie brackets of the rolling distribution and its nonholonomy degree.

The admissible-velocity distribution is framed by a longitudinal field and
a heading-rotation field.  Every iterated bracket of the two stays inside a
small family of vector fields

    p(alpha) e_r(theta) + s(alpha) e_s(theta) + c(alpha) d/dtheta
        + sum_k v_k(alpha) d/dalpha_k

where ``e_r = cos(theta) d/dx + sin(theta) d/dy`` and ``e_s = sin(theta)
d/dx - cos(theta) d/dy``, and the component functions are trigonometric
polynomials in the hitch angles.  Representing those components by their
finite Fourier coefficients makes bracketing exact: products convolve
coefficient tables and derivatives multiply by ``i k``.  Degrees of
nonholonomy therefore rest on machine-precision bracket values, with the
only tolerance in the final rank decision.

Bracket expressions are nested pairs over the generators ``1`` and ``2``,
e.g. ``(1, (1, 2))``; the *length* of an expression is its number of
generator leaves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import VehicleParams

__all__ = [
    "TrigPoly",
    "BracketExpression",
    "bracket_length",
    "eval_bracket",
    "degree_of_nonholonomy",
    "generic_degree",
    "find_singular",
    "NonholonomyReport",
    "singular_scan_csv",
]

BracketExpression = "int | tuple"  # 1, 2, or (expr, expr)


class TrigPoly:
    """Trigonometric polynomial in ``n`` angles, stored as Fourier data.

    The table maps integer frequency vectors ``k`` to complex coefficients
    of ``exp(i k . alpha)``.  Real-valued inputs keep the table Hermitian,
    so evaluation discards only a rounding-level imaginary part.
    """

    __slots__ = ("n", "table")

    def __init__(self, n: int, table: dict | None = None):
        self.n = n
        self.table = {}
        if table:
            for k, c in table.items():
                if c != 0:
                    self.table[k] = c

    @classmethod
    def const(cls, n: int, value: float) -> "TrigPoly":
        return cls(n, {(0,) * n: complex(value)})

    @classmethod
    def zero(cls, n: int) -> "TrigPoly":
        return cls(n)

    @classmethod
    def cosine(cls, n: int, j: int) -> "TrigPoly":
        """cos(alpha_j), 1-based index j."""
        k = [0] * n
        k[j - 1] = 1
        kp, km = tuple(k), tuple(-x for x in k)
        return cls(n, {kp: 0.5, km: 0.5})

    @classmethod
    def sine(cls, n: int, j: int) -> "TrigPoly":
        """sin(alpha_j), 1-based index j."""
        k = [0] * n
        k[j - 1] = 1
        kp, km = tuple(k), tuple(-x for x in k)
        return cls(n, {kp: -0.5j, km: 0.5j})

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        table = dict(self.table)
        for k, c in other.table.items():
            table[k] = table.get(k, 0j) + c
        return TrigPoly(self.n, table)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        table = dict(self.table)
        for k, c in other.table.items():
            table[k] = table.get(k, 0j) - c
        return TrigPoly(self.n, table)

    def __mul__(self, other: "TrigPoly") -> "TrigPoly":
        table: dict = {}
        for k1, c1 in self.table.items():
            for k2, c2 in other.table.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                table[k] = table.get(k, 0j) + c1 * c2
        return TrigPoly(self.n, table)

    def scaled(self, factor: float) -> "TrigPoly":
        return TrigPoly(self.n, {k: factor * c for k, c in self.table.items()})

    def deriv(self, j: int) -> "TrigPoly":
        """Partial derivative with respect to ``alpha_j`` (1-based)."""
        return TrigPoly(self.n, {k: 1j * k[j - 1] * c
                                 for k, c in self.table.items()})

    def __call__(self, alpha) -> float:
        alpha = np.asarray(alpha, dtype=float)
        val = 0j
        for k, c in self.table.items():
            val += c * np.exp(1j * float(np.dot(k, alpha)))
        return float(val.real)

    def is_zero(self) -> bool:
        return not self.table


@dataclass(frozen=True)
class _Field:
    """Vector field in the bracket-closed family (see module docstring)."""

    p: TrigPoly
    s: TrigPoly
    c: TrigPoly
    v: tuple[TrigPoly, ...]

    def is_zero(self) -> bool:
        return (self.p.is_zero() and self.s.is_zero() and self.c.is_zero()
                and all(x.is_zero() for x in self.v))

    def evaluate(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        theta, alpha = q[2], q[3:]
        p, s, c = self.p(alpha), self.s(alpha), self.c(alpha)
        out = np.empty(q.size)
        out[0] = p * math.cos(theta) + s * math.sin(theta)
        out[1] = p * math.sin(theta) - s * math.cos(theta)
        out[2] = c
        out[3:] = [vk(alpha) for vk in self.v]
        return out


def _lie_derivative(v: tuple[TrigPoly, ...], f: TrigPoly) -> TrigPoly:
    n = f.n
    out = TrigPoly.zero(n)
    for j, vj in enumerate(v, start=1):
        out = out + vj * f.deriv(j)
    return out


def _bracket(V: _Field, W: _Field) -> _Field:
    """Lie bracket inside the closed family; exact coefficient arithmetic."""
    p = (_lie_derivative(V.v, W.p) - _lie_derivative(W.v, V.p)
         + V.c * W.s - W.c * V.s)
    s = (_lie_derivative(V.v, W.s) - _lie_derivative(W.v, V.s)
         - V.c * W.p + W.c * V.p)
    c = _lie_derivative(V.v, W.c) - _lie_derivative(W.v, V.c)
    v = tuple(_lie_derivative(V.v, W.v[k]) - _lie_derivative(W.v, V.v[k])
              for k in range(len(V.v)))
    return _Field(p=p, s=s, c=c, v=v)


@lru_cache(maxsize=None)
def _generators(n: int, l: float) -> tuple[_Field, _Field]:
    one = TrigPoly.const(n, 1.0)
    zero = TrigPoly.zero(n)
    coupling = []
    for k in range(1, n + 1):
        head = TrigPoly.const(n, 1.0 / l)
        for j in range(1, k - 1):
            head = head * TrigPoly.cosine(n, j)
        if k == 1:
            tail = TrigPoly.sine(n, 1).scaled(-1.0)  # alpha_0 = 0 convention
        else:
            tail = (TrigPoly.sine(n, k - 1)
                    - TrigPoly.cosine(n, k - 1) * TrigPoly.sine(n, k))
        coupling.append(head * tail)
    z1 = _Field(p=one, s=zero, c=zero, v=tuple(coupling))
    e1 = tuple(TrigPoly.const(n, 1.0) if k == 0 else TrigPoly.zero(n)
               for k in range(n))
    z2 = _Field(p=zero, s=zero, c=one, v=e1)
    return z1, z2


def bracket_length(expr) -> int:
    """Number of generator leaves in a bracket expression."""
    if isinstance(expr, int):
        if expr not in (1, 2):
            raise ValueError("generator index must be 1 or 2")
        return 1
    if isinstance(expr, tuple) and len(expr) == 2:
        return bracket_length(expr[0]) + bracket_length(expr[1])
    raise ValueError(f"malformed bracket expression: {expr!r}")


def _field_of(params: VehicleParams, expr) -> _Field:
    z1, z2 = _generators(params.n, params.l)
    if isinstance(expr, int):
        return z1 if expr == 1 else z2
    return _bracket(_field_of(params, expr[0]), _field_of(params, expr[1]))


def eval_bracket(params: VehicleParams, expr, q) -> np.ndarray:
    """Evaluate a nested bracket of the frame fields at a configuration."""
    if params.n < 1:
        raise ValueError("bracket analysis requires at least one trailer")
    bracket_length(expr)  # validates shape
    q = np.asarray(q, dtype=float)
    if q.shape != (params.n + 3,):
        raise ValueError(f"q has length {q.size}, expected {params.n + 3}")
    return _field_of(params, expr).evaluate(q)


@dataclass(frozen=True)
class NonholonomyReport:
    """Rank growth of iterated brackets at one configuration."""

    q: np.ndarray
    spanned: bool
    degree: int | None
    singular: bool | None
    indeterminate: bool


@lru_cache(maxsize=None)
def _bracket_ladder(n: int, l: float, max_length: int):
    """Left-normed bracket fields grouped by length.

    Left-normed brackets span every homogeneous layer of the free Lie
    algebra, so rank decisions by length lose nothing by restricting to
    them.  Structurally zero fields are dropped.
    """
    z1, z2 = _generators(n, l)
    layers: list[list[_Field]] = [[z1, z2]]
    for _ in range(2, max_length + 1):
        new = []
        for gen in (z1, z2):
            for fld in layers[-1]:
                b = _bracket(gen, fld)
                if not b.is_zero():
                    new.append(b)
        layers.append(new)
    return layers


def degree_of_nonholonomy(params: VehicleParams, q, rank_tol: float = 1e-9,
                          margin: float = 10.0,
                          max_length: int | None = None,
                          generic: int | None = None) -> NonholonomyReport:
    """Smallest bracket length whose span fills the tangent space at ``q``.

    Brackets are enumerated breadth-first by length; at each length the
    accumulated vectors are ranked by singular values with relative
    threshold ``rank_tol``.  A singular value lying within a factor
    ``margin`` of the threshold marks the answer as indeterminate.  If the
    rank is still deficient at ``max_length`` (default ``n + 3``) the
    report comes back unspanned rather than silently truncated.
    """
    if params.n < 1:
        raise ValueError("degree analysis requires at least one trailer")
    q = np.asarray(q, dtype=float)
    dim = params.n + 3
    if q.shape != (dim,):
        raise ValueError(f"q has length {q.size}, expected {dim}")
    cap = max_length if max_length is not None else dim
    layers = _bracket_ladder(params.n, params.l, cap)
    vectors: list[np.ndarray] = []
    for length, layer in enumerate(layers, start=1):
        vectors.extend(f.evaluate(q) for f in layer)
        sv = np.linalg.svd(np.column_stack(vectors), compute_uv=False)
        thresh = rank_tol * sv[0]
        rank = int(np.sum(sv > thresh))
        indeterminate = bool(np.any((sv > thresh / margin)
                                    & (sv < thresh * margin)))
        if rank == dim:
            singular = None if generic is None else length > generic
            return NonholonomyReport(q=q, spanned=True, degree=length,
                                     singular=singular,
                                     indeterminate=indeterminate)
    return NonholonomyReport(q=q, spanned=False, degree=None, singular=None,
                             indeterminate=True)


def generic_degree(params: VehicleParams, samples: int = 32,
                   seed: int = 0) -> int:
    """Baseline degree measured at random configurations (not assumed)."""
    rng = np.random.default_rng(seed)
    degrees = []
    for _ in range(samples):
        q = np.zeros(params.n + 3)
        q[2] = rng.uniform(-math.pi, math.pi)
        q[3:] = rng.uniform(-math.pi, math.pi, params.n)
        rep = degree_of_nonholonomy(params, q)
        if rep.spanned and not rep.indeterminate:
            degrees.append(rep.degree)
    if not degrees:
        raise RuntimeError("no determinate degree found at random samples")
    return int(min(degrees))


def find_singular(params: VehicleParams, grid_resolution: int,
                  rank_tol: float = 1e-9) -> list[NonholonomyReport]:
    """Scan a hitch-angle grid and flag configurations of raised degree.

    The grid covers ``[-pi, pi)`` per angle.  Degree is independent of the
    pose of the leading car, so only the angles are scanned.
    """
    if params.n < 1:
        raise ValueError("singularity scan requires at least one trailer")
    base = generic_degree(params)
    axis = -math.pi + 2.0 * math.pi * np.arange(grid_resolution) / grid_resolution
    grids = np.meshgrid(*([axis] * params.n), indexing="ij")
    reports = []
    for idx in np.ndindex(*grids[0].shape):
        q = np.zeros(params.n + 3)
        q[3:] = [g[idx] for g in grids]
        reports.append(degree_of_nonholonomy(params, q, rank_tol=rank_tol,
                                             generic=base))
    return reports


def singular_scan_csv(params: VehicleParams,
                      reports: list[NonholonomyReport]) -> str:
    """Serialize a singularity scan: alpha columns, degree, indeterminate."""
    cols = [f"alpha{i}" for i in range(1, params.n + 1)]
    lines = [",".join(cols + ["degree", "indeterminate"])]
    for rep in reports:
        vals = ["%.17g" % v for v in rep.q[3:]]
        deg = "" if rep.degree is None else str(rep.degree)
        lines.append(",".join(vals + [deg, str(int(rep.indeterminate))]))
    return "\n".join(lines) + "\n"
