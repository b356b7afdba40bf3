"""Special-function kernel.

Stable evaluation of Legendre, Gegenbauer and first-kind Chebyshev
polynomials, spherical Bessel functions, and the Gamma-ratio
normalisation constants of the ultraspherical family.  All Gamma
arithmetic is done in log space so degrees up to 10^4 never overflow.

Everything here is pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegenerateParameterError",
    "GegenbauerParam",
    "legendre_eval",
    "legendre_table",
    "gegenbauer_eval",
    "chebyshev_t_eval",
    "gamma_ratio",
    "gegenbauer_weighted_norm",
    "chebyshev_t_weighted_norm",
    "spherical_bessel_j",
    "spherical_bessel_table",
]


class DegenerateParameterError(ValueError):
    """Raised when a Gegenbauer routine is asked for the lambda = 0 limit.

    The endpoint normalisation divides by Gamma(2*lambda), which is
    singular there; callers must use the dedicated Chebyshev-T branch.
    """


@dataclass(frozen=True)
class GegenbauerParam:
    """Index of the ultraspherical (Gegenbauer) family.

    lam = 1/2 gives Legendre polynomials, lam = 1 Chebyshev polynomials
    of the second kind.  lam = 0 marks the degenerate first-kind
    Chebyshev limit; the flag below routes callers to the T-branch.
    """

    lam: float

    def __post_init__(self):
        if not self.lam > -0.5:
            raise ValueError(f"Gegenbauer index must exceed -1/2, got {self.lam}")

    @property
    def is_chebyshev_t(self) -> bool:
        return self.lam == 0.0


_DOMAIN_SLACK = 1e-12


def legendre_eval(degree, x):
    """Evaluate the Legendre polynomial P_degree at x in [-1, 1].

    Uses the three-term recurrence j*P_j = (2j-1)*x*P_{j-1} - (j-1)*P_{j-2}.
    Accepts a scalar or an ndarray; raises on |x| > 1 + 1e-12.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0 + _DOMAIN_SLACK):
        raise ValueError("Legendre argument outside [-1, 1]")
    p_prev = np.ones_like(xa)
    if degree == 0:
        return p_prev if xa.ndim else float(p_prev)
    p_cur = xa.copy()
    for j in range(2, degree + 1):
        p_prev, p_cur = p_cur, ((2 * j - 1) * xa * p_cur - (j - 1) * p_prev) / j
    return p_cur if xa.ndim else float(p_cur)


def legendre_table(x, kmax):
    """All P_0..P_kmax at the points x, as an array of shape (kmax+1, len(x))."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((kmax + 1, xa.size))
    out[0] = 1.0
    if kmax >= 1:
        out[1] = xa
    for j in range(2, kmax + 1):
        out[j] = ((2 * j - 1) * xa * out[j - 1] - (j - 1) * out[j - 2]) / j
    return out


def chebyshev_t_eval(degree, x):
    """First-kind Chebyshev polynomial T_degree(x) via the recurrence."""
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    xa = np.asarray(x, dtype=float)
    t_prev = np.ones_like(xa)
    if degree == 0:
        return t_prev if xa.ndim else float(t_prev)
    t_cur = xa.copy()
    for _ in range(2, degree + 1):
        t_prev, t_cur = t_cur, 2.0 * xa * t_cur - t_prev
    return t_cur if xa.ndim else float(t_cur)


def gegenbauer_eval(param: GegenbauerParam, degree, x):
    """Gegenbauer polynomial C_degree^lam(x), endpoint-normalised.

    The normalisation is C_j(1) = Gamma(j+2*lam) / (j! Gamma(2*lam)),
    realised by the standard recurrence
        j*C_j = 2*(j+lam-1)*x*C_{j-1} - (j+2*lam-2)*C_{j-2}.
    lam = 0 is degenerate; use chebyshev_t_eval.
    """
    if param.is_chebyshev_t:
        raise DegenerateParameterError("lambda = 0: use the Chebyshev-T branch")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    lam = param.lam
    xa = np.asarray(x, dtype=float)
    c_prev = np.ones_like(xa)
    if degree == 0:
        return c_prev if xa.ndim else float(c_prev)
    c_cur = 2.0 * lam * xa
    for j in range(2, degree + 1):
        c_prev, c_cur = c_cur, (
            2.0 * (j + lam - 1) * xa * c_cur - (j + 2 * lam - 2) * c_prev
        ) / j
    return c_cur if xa.ndim else float(c_cur)


def _signed_lgamma(x: float):
    """log|Gamma(x)| together with the sign of Gamma(x); x non-integer if < 0."""
    if x > 0:
        return math.lgamma(x), 1.0
    sign = -1.0 if math.floor(-x) % 2 == 0 else 1.0
    return math.lgamma(x), sign


def gamma_ratio(degree: int, lam: float) -> float:
    """Endpoint value Gamma(j+2*lam) / (j! Gamma(2*lam)) via log-Gamma differences.

    Requires lam > -1/2, lam != 0 and j + 2*lam > 0.
    """
    if lam == 0.0:
        raise DegenerateParameterError("lambda = 0: endpoint ratio is singular")
    if not lam > -0.5:
        raise ValueError("lambda must exceed -1/2")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if degree + 2 * lam <= 0:
        raise ValueError("degree + 2*lambda must be positive")
    if degree == 0:
        return 1.0
    lg_num, s_num = _signed_lgamma(degree + 2 * lam)
    lg_den, s_den = _signed_lgamma(2 * lam)
    return s_num * s_den * math.exp(lg_num - math.lgamma(degree + 1) - lg_den)


def gegenbauer_weighted_norm(param: GegenbauerParam, degree: int) -> float:
    """Norm of C_degree^lam in the (1-x^2)^(lam-1/2)-weighted inner product.

    The squared norm is
        sqrt(pi) * Gamma(j+2l) * Gamma(l+1/2) / (j! Gamma(2l) Gamma(l) (j+l)),
    evaluated in log space.  lam = 0 is degenerate (Chebyshev-T branch).
    """
    if param.is_chebyshev_t:
        raise DegenerateParameterError("lambda = 0: use chebyshev_t_weighted_norm")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    lam = param.lam
    if degree == 0:
        # Gamma(2l)/Gamma(2l) cancels; Gamma(l)*l = Gamma(l+1) keeps lam<0 safe.
        log_sq = (
            0.5 * math.log(math.pi)
            + math.lgamma(lam + 0.5)
            - math.lgamma(lam + 1.0)
        )
        return math.exp(0.5 * log_sq)
    lg_j2l, s_j2l = _signed_lgamma(degree + 2 * lam)
    lg_2l, s_2l = _signed_lgamma(2 * lam)
    lg_l, s_l = _signed_lgamma(lam)
    sign = s_j2l * s_2l * s_l
    if sign <= 0:
        raise ValueError("weighted norm came out non-positive; invalid lambda")
    log_sq = (
        0.5 * math.log(math.pi)
        + lg_j2l
        + math.lgamma(lam + 0.5)
        - math.lgamma(degree + 1)
        - lg_2l
        - lg_l
        - math.log(degree + lam)
    )
    return math.exp(0.5 * log_sq)


def chebyshev_t_weighted_norm(degree: int) -> float:
    """Chebyshev-T norm under (1-x^2)^(-1/2): sqrt(pi) for T_0, sqrt(pi/2) else."""
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    return math.sqrt(math.pi) if degree == 0 else math.sqrt(math.pi / 2.0)


# ---------------------------------------------------------------------------
# Spherical Bessel functions
# ---------------------------------------------------------------------------

_RESCALE_THRESHOLD = 1e140
_RESCALE_FACTOR = 1e-140


def _upward_rows(z, kmax):
    """j_0..j_kmax by upward recurrence; valid where kmax < z (stable regime)."""
    z = np.atleast_1d(z)
    out = np.empty((z.size, kmax + 1))
    sz, cz = np.sin(z), np.cos(z)
    out[:, 0] = sz / z
    if kmax >= 1:
        out[:, 1] = sz / z**2 - cz / z
    for k in range(1, kmax):
        out[:, k + 1] = (2 * k + 1) / z * out[:, k] - out[:, k - 1]
    return out


def _downward_rows(z, kmax):
    """j_0..j_kmax by Miller's downward recurrence for rows with z <= kmax.

    The descent starts at kmax + ceil(1.5*max(kmax, z)) + 20 and the result
    is normalised with the closure sum_k (2k+1) j_k(z)^2 = 1, which is
    well-conditioned even where j_0(z) vanishes (z near a multiple of pi).
    """
    z = np.atleast_1d(z)
    kstart = kmax + int(math.ceil(1.5 * max(kmax, float(np.max(z))))) + 20
    rows = z.size
    out = np.zeros((rows, kmax + 1))
    f_hi = np.zeros(rows)
    f = np.full(rows, 1e-30)
    acc = (2 * kstart + 1) * f * f
    for k in range(kstart - 1, -1, -1):
        f_hi, f = f, (2 * k + 3) / z * f - f_hi
        acc += (2 * k + 1) * f * f
        if k <= kmax:
            out[:, k] = f
        big = np.abs(f) > _RESCALE_THRESHOLD
        if np.any(big):
            out[big] *= _RESCALE_FACTOR
            f[big] *= _RESCALE_FACTOR
            f_hi[big] *= _RESCALE_FACTOR
            acc[big] *= _RESCALE_FACTOR * _RESCALE_FACTOR
    scale = np.sqrt(acc)
    # Fix the overall sign using the stably computed j_{kmax+?}: compare with
    # the upward value of j_0 where it is not near a zero, else j_1.
    sz, cz = np.sin(z), np.cos(z)
    j0 = sz / z
    j1 = sz / z**2 - cz / z
    use_j0 = np.abs(j0) >= np.abs(j1)
    ref = np.where(use_j0, j0, j1)
    got = np.where(use_j0, out[:, 0], out[:, min(1, kmax)])
    sign = np.where(ref * got < 0, -1.0, 1.0)
    return out * (sign / scale)[:, None]


def spherical_bessel_table(z, kmax):
    """Table of j_k(z) for k = 0..kmax, vectorised over the points z >= 0.

    Rows with z > kmax use the upward recurrence, the rest Miller's
    downward recurrence; z = 0 rows are the exact delta_{k0}.
    """
    za = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(za < 0):
        raise ValueError("z must be nonnegative")
    out = np.empty((za.size, kmax + 1))
    zero = za == 0.0
    if np.any(zero):
        out[zero] = 0.0
        out[zero, 0] = 1.0
    up = (~zero) & (za > kmax)
    if np.any(up):
        out[up] = _upward_rows(za[up], kmax)
    down = (~zero) & (~up)
    if np.any(down):
        out[down] = _downward_rows(za[down], kmax)
    return out


def spherical_bessel_j(order: int, z: float) -> float:
    """Spherical Bessel function of the first kind j_order(z), z >= 0.

    Upward recurrence for order < z, Miller-style downward recurrence
    with the (2k+1) j_k^2 closure normalisation otherwise; j_m(0) is the
    exact Kronecker delta.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if z < 0:
        raise ValueError("z must be nonnegative")
    if z == 0.0:
        return 1.0 if order == 0 else 0.0
    return float(spherical_bessel_table(np.array([z]), order)[0, order])
