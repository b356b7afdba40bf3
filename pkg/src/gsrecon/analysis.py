"""Reconstruction diagnostics: alignment constants, sampling rates, bounds.

The central quantity is the subspace-alignment constant

    C(n, m) = inf { sum_j |<phi, psi_j>|^2 : phi in T_n, ||phi|| = 1 }
            = lambda_min(Gram^{-1} A),

the squared cosine of the angle between the reconstruction space and
the sampling space.  The stable sampling rate Theta(n; theta) is the
least sample budget with C >= theta; it is found by doubling and
bisection on the scheme's effective resolution index, which is valid
because C is monotone in that index.  The analytic lower bounds proved
for the Fourier case are provided for cross-checking; values below
zero are reported as-is with a vacuous flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gsrecon import assembly, solver, spaces
from gsrecon.bases import LEGENDRE_COEFF, SamplingScheme

__all__ = [
    "DiagnosticsReport",
    "RateBudgetError",
    "alignment_constant",
    "quasi_optimality_factor",
    "diagnostics_for",
    "stable_sampling_rate",
    "bound_alignment_fourier",
    "bound_alignment_oversampled",
    "bound_alignment_piecewise",
    "bound_rate_global",
    "bound_rate_asymptotic",
    "bound_rate_piecewise",
    "bound_rate_modified_fourier",
    "tensor_alignment",
    "BoundValue",
]

RATE_BUDGET = 10**6


class RateBudgetError(RuntimeError):
    """The sampling-rate search exceeded the m budget."""


@dataclass
class DiagnosticsReport:
    """Stability and accuracy diagnostics of a scheme/space pair.

    ``alignment`` is C(n, m) in [0, 1] for orthonormal sampling;
    ``defect_bound`` is sqrt(1 - C), valid for orthonormal sampling;
    ``quasi_opt_factor`` is K = sqrt(1 + (1 - C)/C^2), the quasi-
    optimality envelope constant.
    """

    alignment: float
    defect_bound: float
    quasi_opt_factor: float
    kappa_normal: float
    kappa_gram: float
    rate_theta: float | None = None
    rate_m: int | None = None


@dataclass(frozen=True)
class BoundValue:
    """An analytic bound value; vacuous when it carries no information."""

    value: float
    vacuous: bool


def quasi_optimality_factor(alignment: float) -> float:
    if alignment <= 0.0:
        return float("inf")
    return math.sqrt(1.0 + max(0.0, 1.0 - alignment) / alignment**2)


def _alignment_from_matrices(gram: np.ndarray, normal: np.ndarray) -> float:
    if np.allclose(gram, np.eye(gram.shape[0]), atol=1e-14):
        c = solver.hermitian_eig_extremes(normal)[0]
    else:
        c = solver.generalized_lambda_min(gram, normal)
    return max(0.0, float(c))


def alignment_constant(scheme, space) -> float:
    """C(n, m): least eigenvalue of Gram^{-1} (U^H U); basis-independent."""
    u = assembly.assemble(scheme, space)
    normal = solver.normal_matrix(u)
    gram = spaces.gram_matrix(space)
    return _alignment_from_matrices(gram, normal)


def diagnostics_for(u: assembly.DesignMatrix) -> DiagnosticsReport:
    """Full diagnostics from an assembled design matrix."""
    normal = solver.normal_matrix(u)
    gram = spaces.gram_matrix(u.space)
    c = _alignment_from_matrices(gram, normal)
    kappa_a = solver.condition_number(normal)
    kappa_g = solver.condition_number(gram)
    return DiagnosticsReport(
        alignment=c,
        defect_bound=math.sqrt(max(0.0, 1.0 - c)),
        quasi_opt_factor=quasi_optimality_factor(c),
        kappa_normal=kappa_a,
        kappa_gram=kappa_g,
    )


def _budget_for_index(scheme: SamplingScheme, index: int) -> int:
    """Smallest budget m whose effective resolution index reaches ``index``."""
    if scheme.kind == LEGENDRE_COEFF:
        return index
    return 2 * index


def stable_sampling_rate(n: int, theta: float, scheme_family, space_family,
                         m_budget: int = RATE_BUDGET) -> int:
    """Theta(n; theta): least m with C(n, m) >= theta.

    ``scheme_family`` maps a budget m to a scheme, ``space_family`` maps
    n to a space.  Exponential doubling followed by bisection on the
    scheme's effective index; returns the least admissible budget under
    the scheme's index convention.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    space = space_family(n)
    probe = scheme_family(max(2, n))
    cache = {}

    def c_at_index(idx: int) -> float:
        if idx not in cache:
            scheme = scheme_family(_budget_for_index(probe, idx))
            cache[idx] = alignment_constant(scheme, space)
        return cache[idx]

    hi = max(1, probe.effective_index)
    doubled = False
    while c_at_index(hi) < theta:
        doubled = True
        hi *= 2
        if _budget_for_index(probe, hi) > m_budget:
            raise RateBudgetError(
                f"no budget m <= {m_budget} reaches C >= {theta} at n = {n}"
            )
    if doubled:
        lo = hi // 2  # known failure from the doubling pass
    else:
        lo = hi // 2
        while lo >= 1 and c_at_index(lo) >= theta:
            hi = lo
            lo //= 2
    while hi - lo > 1 and lo >= 1:
        mid = (hi + lo) // 2
        if c_at_index(mid) >= theta:
            hi = mid
        else:
            lo = mid
    return _budget_for_index(probe, hi)


# ---------------------------------------------------------------------------
# Analytic bounds (Fourier sampling of polynomial spaces)
# ---------------------------------------------------------------------------

_C_POLY = 4.0 * (math.pi - 2.0) / math.pi**2


def bound_alignment_fourier(n: int, m: int) -> BoundValue:
    """Lower bound 1 - 4(pi-2) n^2 / (pi^2 (2 floor(m/2) - 1)) for plain Fourier."""
    if m < 2:
        raise ValueError("need m >= 2")
    value = 1.0 - _C_POLY * n * n / (2 * (m // 2) - 1)
    return BoundValue(value, vacuous=value <= 0.0)


def bound_alignment_oversampled(n: int, m: int, c: float) -> BoundValue:
    """Lower bound for Fourier sampling on the extended interval [-c, c].

    With the oversampling factor c >= 1 the frequency grid is c times
    finer, so m samples span 1/c of the plain bandwidth and the bound
    carries the factor c in the numerator:

        C(n, m) >= 1 - 4 (pi - 2) n^2 c / (pi^2 (m - 1)).
    """
    if c < 1.0:
        raise ValueError("oversampling factor must be >= 1")
    value = 1.0 - _C_POLY * n * n * c / (m - 1)
    return BoundValue(value, vacuous=value <= 0.0)


def bound_alignment_piecewise(degrees, half_widths, m: int) -> BoundValue:
    """Piecewise lower bound 1 - 4(pi-2)/(pi^2 (2 floor(m/2)-1)) sum n_r^2/c_r."""
    s = sum(nr * nr / cr for nr, cr in zip(degrees, half_widths))
    value = 1.0 - _C_POLY * s / (2 * (m // 2) - 1)
    return BoundValue(value, vacuous=value <= 0.0)


def bound_rate_global(n: int, theta: float) -> int:
    """Global rate bound 2 ceil(1/2 + 2(pi-2) n^2 / (pi^2 (1-theta)))."""
    if n < 2:
        raise ValueError("the global bound needs n >= 2")
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    return 2 * math.ceil(0.5 + 0.5 * _C_POLY * n * n / (1.0 - theta))


def bound_rate_asymptotic(n: int, theta: float) -> float:
    """Leading term 4 n^2 / (pi^2 (1-theta)) of the asymptotic rate bound."""
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    return 4.0 * n * n / (math.pi**2 * (1.0 - theta))


def bound_rate_piecewise(degrees, half_widths, theta: float) -> int:
    """Piecewise rate bound 2 ceil(1/2 + 2(pi-2)/(pi^2(1-theta)) sum n_r^2/c_r)."""
    if len(degrees) != len(half_widths):
        raise ValueError("degrees and half-widths must align")
    if abs(sum(half_widths) - 1.0) > 1e-12:
        raise ValueError("half-widths must partition [-1, 1] (sum to 1)")
    s = sum(nr * nr / cr for nr, cr in zip(degrees, half_widths))
    return 2 * math.ceil(0.5 + 0.5 * _C_POLY * s / (1.0 - theta))


def bound_rate_modified_fourier(n: int, theta: float) -> tuple:
    """Modified-Fourier rate bounds (global, asymptotic).

    The global value uses the uniform Markov constant 1/sqrt(2); the
    asymptotic one evaluates Schmidt's sharp formula for k_n n^2 with
    the worst-case remainder 13 (valid for n >= 5).
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    pref = 2.0 / (math.pi * math.sqrt(1.0 - theta))
    global_bound = math.ceil(pref * n * n / math.sqrt(2.0))
    half = (n + 0.5) ** 2
    markov = (half / math.pi) / (1.0 - (math.pi**2 - 3.0) / (12.0 * half) + 13.0 / half**2)
    return int(global_bound), pref * markov


def tensor_alignment(factor_alignments) -> float:
    """C of a tensor pair is the product of the factor constants."""
    out = 1.0
    for c in factor_alignments:
        if not 0.0 <= c <= 1.0 + 1e-10:
            raise ValueError("factor alignment constants must lie in [0, 1]")
        out *= c
    return out
