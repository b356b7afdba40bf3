"""Reconstruction spaces: Gegenbauer, piecewise Gegenbauer, tensor product.

A space owns its normalised basis functions and its exact Gram matrix
in the unweighted L2 inner product on [-1, 1].  For lambda = 1/2 the
basis is the orthonormal scaled-Legendre family and the Gram matrix is
the identity; general lambda gives a non-orthogonal family whose Gram
matrix is computed exactly with a Gauss rule (the integrands are
polynomials).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from gsrecon.quadrature import gauss_legendre_rule
from gsrecon.specfun import (
    GegenbauerParam,
    chebyshev_t_weighted_norm,
    gegenbauer_weighted_norm,
)

__all__ = [
    "ReconstructionSpace",
    "gegenbauer_space",
    "piecewise_space",
    "tensor_space",
    "basis_eval",
    "gram_matrix",
    "normalized_basis_table",
]

GEGENBAUER = "gegenbauer"
PIECEWISE = "piecewise"
TENSOR = "tensor"


@dataclass(frozen=True)
class ReconstructionSpace:
    """Immutable description of a reconstruction space.

    Piecewise spaces list interior breakpoints x_1 < ... < x_l in (-1, 1)
    and one polynomial dimension per subinterval; the flat index runs
    interval-major, degree-minor.  Tensor spaces hold 1-D factors and
    index row-major with the last factor fastest.
    """

    kind: str
    lam: GegenbauerParam | None = None
    breakpoints: tuple = ()
    degrees: tuple = ()
    factors: tuple = field(default=())

    @property
    def dim(self) -> int:
        if self.kind == TENSOR:
            return int(np.prod([f.dim for f in self.factors]))
        return int(sum(self.degrees))

    def intervals(self):
        """Subintervals [x_r, x_{r+1}] covering [-1, 1]."""
        edges = (-1.0, *self.breakpoints, 1.0)
        return list(zip(edges[:-1], edges[1:]))

    def half_widths(self):
        return [0.5 * (b - a) for a, b in self.intervals()]

    def midpoints(self):
        return [0.5 * (b + a) for a, b in self.intervals()]

    def flat_to_local(self, flat_index: int):
        """Map a flat index to (interval, degree) for 1-D spaces."""
        if not 0 <= flat_index < self.dim:
            raise IndexError(f"basis index {flat_index} out of range")
        k = flat_index
        for r, n_r in enumerate(self.degrees):
            if k < n_r:
                return r, k
            k -= n_r
        raise IndexError(flat_index)


def gegenbauer_space(lam, n: int) -> ReconstructionSpace:
    """Polynomials of degree < n with the normalised Gegenbauer basis."""
    if n < 1:
        raise ValueError("dimension must be positive")
    param = lam if isinstance(lam, GegenbauerParam) else GegenbauerParam(float(lam))
    return ReconstructionSpace(GEGENBAUER, param, (), (int(n),))


def piecewise_space(breakpoints, degrees, lam=0.5) -> ReconstructionSpace:
    """Piecewise polynomials on the partition of [-1, 1] at the breakpoints."""
    bps = tuple(float(t) for t in breakpoints)
    if list(bps) != sorted(bps) or any(not -1.0 < t < 1.0 for t in bps):
        raise ValueError("breakpoints must be sorted and interior to (-1, 1)")
    if len(set(bps)) != len(bps):
        raise ValueError("breakpoints must be distinct")
    degs = tuple(int(d) for d in degrees)
    if len(degs) != len(bps) + 1:
        raise ValueError("need one degree per subinterval")
    if any(d < 1 for d in degs):
        raise ValueError("each subinterval needs a positive dimension")
    param = lam if isinstance(lam, GegenbauerParam) else GegenbauerParam(float(lam))
    return ReconstructionSpace(PIECEWISE, param, bps, degs)


def tensor_space(*factors) -> ReconstructionSpace:
    """Tensor product of 1-D reconstruction spaces (row-major, last fastest)."""
    if len(factors) < 2:
        raise ValueError("a tensor space needs at least two factors")
    if any(f.kind == TENSOR for f in factors):
        raise ValueError("tensor factors must be one-dimensional spaces")
    return ReconstructionSpace(TENSOR, None, (), (), tuple(factors))


def normalized_basis_table(param: GegenbauerParam, kmax: int, y) -> np.ndarray:
    """phi_0..phi_kmax on reference coordinates y, shape (kmax+1, len(y)).

    phi_k is the Gegenbauer polynomial divided by its weighted norm; for
    lambda = 1/2 this is sqrt(k+1/2) P_k, for lambda = 0 the normalised
    first-kind Chebyshev family.
    """
    ya = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty((kmax + 1, ya.size))
    lam = param.lam
    if param.is_chebyshev_t:
        out[0] = 1.0
        if kmax >= 1:
            out[1] = ya
        for k in range(2, kmax + 1):
            out[k] = 2.0 * ya * out[k - 1] - out[k - 2]
        norms = np.array([chebyshev_t_weighted_norm(k) for k in range(kmax + 1)])
    else:
        out[0] = 1.0
        if kmax >= 1:
            out[1] = 2.0 * lam * ya
        for k in range(2, kmax + 1):
            out[k] = (
                2.0 * (k + lam - 1) * ya * out[k - 1] - (k + 2 * lam - 2) * out[k - 2]
            ) / k
        norms = np.array(
            [gegenbauer_weighted_norm(param, k) for k in range(kmax + 1)]
        )
    return out / norms[:, None]


def _interval_membership(space: ReconstructionSpace, x: np.ndarray):
    """Index of the subinterval containing each point (last interval closed)."""
    edges = np.array(space.breakpoints)
    idx = np.searchsorted(edges, x, side="right")
    return idx


def basis_eval(space: ReconstructionSpace, flat_index: int, x):
    """Evaluate one normalised basis function at x (tuple of coords for tensors).

    Piecewise functions vanish outside their subinterval; the value on
    interval r is phi_k((x - d_r)/c_r) / sqrt(c_r).
    """
    if space.kind == TENSOR:
        if len(x) != len(space.factors):
            raise ValueError("point dimension does not match tensor order")
        dims = [f.dim for f in space.factors]
        idx = np.unravel_index(flat_index, dims)
        val = 1.0
        for f, k, xi in zip(space.factors, idx, x):
            val = val * basis_eval(f, int(k), xi)
        return val

    r, k = space.flat_to_local(flat_index)
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    a, b = space.intervals()[r]
    c_r = 0.5 * (b - a)
    d_r = 0.5 * (b + a)
    inside = (_interval_membership(space, xa) == r) & (np.abs(xa) <= 1.0)
    out = np.zeros_like(xa)
    if np.any(inside):
        y = (xa[inside] - d_r) / c_r
        out[inside] = normalized_basis_table(space.lam, k, y)[k] / math.sqrt(c_r)
    return float(out[0]) if scalar else out


def gram_matrix(space: ReconstructionSpace) -> np.ndarray:
    """Exact Gram matrix of the basis in the unweighted L2 inner product.

    Identity for lambda = 1/2 families (orthonormal), block diagonal with
    one shared Gegenbauer block otherwise, Kronecker product for tensors.
    The general-lambda block is integrated with a Gauss rule of order
    n + 2, which is exact for the polynomial integrands.
    """
    if space.kind == TENSOR:
        g = gram_matrix(space.factors[0])
        for f in space.factors[1:]:
            g = np.kron(g, gram_matrix(f))
        return g
    if space.lam.lam == 0.5:
        return np.eye(space.dim)
    nmax = max(space.degrees)
    rule = gauss_legendre_rule(min(512, nmax + 2))
    table = normalized_basis_table(space.lam, nmax - 1, rule.nodes)
    block = (table * rule.weights) @ table.T
    block = 0.5 * (block + block.T)
    out = np.zeros((space.dim, space.dim))
    offset = 0
    for n_r in space.degrees:
        out[offset : offset + n_r, offset : offset + n_r] = block[:n_r, :n_r]
        offset += n_r
    return out


def is_orthonormal(space: ReconstructionSpace) -> bool:
    """True when the space's basis is L2-orthonormal (lambda = 1/2 throughout)."""
    if space.kind == TENSOR:
        return all(is_orthonormal(f) for f in space.factors)
    return space.lam.lam == 0.5
