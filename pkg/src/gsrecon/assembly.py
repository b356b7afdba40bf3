"""Design-matrix assembly.

Builds the m x n matrix U with entries <phi_k, psi_j> for every
supported sampling/space pair.  Fourier rows against scaled Legendre
polynomials come from the spherical-Bessel closed form; general
Gegenbauer columns use the oscillatory-integral recurrence for
I_k(z) = int C_k(x) e^{izx} dx with a quadrature fallback where the
upward recurrence turns unstable; Legendre-coefficient sampling against
piecewise Legendre spaces uses the two-index u_{j,k} recurrence.
Target cost is O(m n) per matrix (the Legendre-Legendre table is the
documented O(m^2) exception).

Rows are independent, so completed matrices are immutable and assembly
may be row-parallelised by callers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from gsrecon.bases import (
    FOURIER,
    LEGENDRE_COEFF,
    MODIFIED,
    OVERSAMPLED,
    SamplingScheme,
)
from gsrecon.quadrature import integrate_adaptive
from gsrecon.spaces import (
    GEGENBAUER,
    PIECEWISE,
    TENSOR,
    ReconstructionSpace,
)
from gsrecon.specfun import (
    GegenbauerParam,
    chebyshev_t_eval,
    chebyshev_t_weighted_norm,
    gamma_ratio,
    gegenbauer_eval,
    gegenbauer_weighted_norm,
    legendre_table,
    spherical_bessel_table,
)

__all__ = [
    "DesignMatrix",
    "IncompatiblePairError",
    "gegenbauer_fourier_integrals",
    "assemble_fourier_legendre",
    "assemble_fourier_gegenbauer",
    "assemble_piecewise_fourier",
    "assemble_modified_fourier",
    "assemble_legendre_legendre",
    "assemble_tensor",
    "assemble",
    "dump_matrix",
]

MAX_TENSOR_ENTRIES = 10**8


class IncompatiblePairError(ValueError):
    """No assembly route exists for the requested scheme/space pair."""


@dataclass
class DesignMatrix:
    """Dense design matrix with its provenance."""

    entries: np.ndarray
    scheme: object
    space: ReconstructionSpace
    assembly_method: str

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


# ---------------------------------------------------------------------------
# Oscillatory Gegenbauer integrals I_k(z) = int_{-1}^{1} C_k(x) e^{izx} dx
# ---------------------------------------------------------------------------


def _endpoint_values(param: GegenbauerParam, kmax: int) -> np.ndarray:
    if param.is_chebyshev_t:
        return np.ones(kmax + 1)
    return np.array([gamma_ratio(k, param.lam) for k in range(kmax + 1)])


def _integrals_at_zero(param: GegenbauerParam, kmax: int) -> np.ndarray:
    out = np.zeros(kmax + 1, dtype=complex)
    if param.is_chebyshev_t:
        out[0] = 2.0
        for k in range(2, kmax + 1, 2):
            out[k] = -2.0 / (k * k - 1.0)
        return out
    end = _endpoint_values(param, kmax + 1)
    out[0] = 2.0 * end[0]
    for k in range(2, kmax + 1, 2):
        out[k] = (end[k + 1] - end[k - 1]) / (k + param.lam)
    return out


def _upward_cutoff(z: float) -> int:
    # Upward recurrence amplifies seed error once k passes |z|; a +10
    # overshoot is harmless for large |z| but fatal for small ones.
    az = abs(z)
    return int(az) + 10 if az >= 15.0 else int(math.ceil(az)) + 2


def _integral_by_quadrature(param: GegenbauerParam, z: float, k: int) -> complex:
    if param.is_chebyshev_t:
        poly = lambda x: chebyshev_t_eval(k, x)
    else:
        poly = lambda x: gegenbauer_eval(param, k, x)
    return integrate_adaptive(
        lambda x: poly(x) * np.exp(1j * z * np.asarray(x)),
        -1.0,
        1.0,
        1e-13,
        oscillation=abs(z) + k,
    )


def _moment1(z: float) -> complex:
    """int x e^{izx} dx = 2i (sin z - z cos z)/z^2, series-protected near 0."""
    if abs(z) < 0.1:
        z2 = z * z
        return 2.0j * z * (
            1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0
            - z2**3 / 45360.0 + z2**4 / 3991680.0
        )
    return 2.0j * (math.sin(z) - z * math.cos(z)) / (z * z)


def _moment2(z: float) -> complex:
    """int x^2 e^{izx} dx, series-protected near 0."""
    if abs(z) < 0.1:
        z2 = z * z
        return 2.0 * (
            1.0 / 3.0 - z2 / 10.0 + z2 * z2 / 168.0
            - z2**3 / 6480.0 + z2**4 / 443520.0
        )
    return 2.0 * ((z * z - 2.0) * math.sin(z) + 2.0 * z * math.cos(z)) / z**3


def gegenbauer_fourier_integrals(param: GegenbauerParam, z: float, kmax: int):
    """The integrals I_0(z) .. I_kmax(z) of C_k^lambda against e^{izx}.

    For z = 0 the closed parity formula applies.  Otherwise the seeds
    I_0, I_1 feed the three-term recurrence in k, run upward while it
    is stable (k up to about |z|); the superexponentially small tail is
    filled in by adaptive quadrature.  lambda = 0 uses the first-kind
    Chebyshev limit of the recurrence.
    """
    if kmax < 0:
        raise ValueError("kmax must be nonnegative")
    if z == 0.0:
        return _integrals_at_zero(param, kmax)
    out = np.zeros(kmax + 1, dtype=complex)
    cutoff = _upward_cutoff(z)
    eiz = complex(math.cos(z), math.sin(z))

    if param.is_chebyshev_t:
        out[0] = 2.0 * math.sin(z) / z
        if kmax >= 1:
            out[1] = _moment1(z)
        if kmax >= 2:
            out[2] = 2.0 * _moment2(z) - out[0]  # T_2 = 2 x^2 - 1
        for k in range(2, min(kmax, cutoff)):
            s_k = eiz + (-1) ** k * np.conj(eiz)
            out[k + 1] = (
                (2j * (k + 1) / z) * out[k]
                + ((k + 1.0) / (k - 1.0)) * out[k - 1]
                + 2j * (k + 1) * s_k / (z * (k * k - 1.0))
            )
        tail_start = min(kmax, cutoff) + 1 if kmax > cutoff else kmax + 1
        for k in range(max(3, tail_start), kmax + 1):
            out[k] = _integral_by_quadrature(param, z, k)
        return out

    lam = param.lam
    end = _endpoint_values(param, kmax + 1)
    out[0] = 2.0 * end[0] * math.sin(z) / z
    if kmax >= 1:
        out[1] = end[1] * _moment1(z)  # C_1(x) = C_1(1) x
    for k in range(1, min(kmax, cutoff)):
        s_k = eiz + (-1) ** k * np.conj(eiz)
        out[k + 1] = (
            (2j * (k + lam) / z) * out[k]
            + out[k - 1]
            - 1j * s_k / z * (end[k + 1] - end[k - 1])
        )
    tail_start = min(kmax, cutoff) + 1 if kmax > cutoff else kmax + 1
    for k in range(max(2, tail_start), kmax + 1):
        out[k] = _integral_by_quadrature(param, z, k)
    return out


# ---------------------------------------------------------------------------
# Fourier-type sampling against (piecewise) polynomial spaces
# ---------------------------------------------------------------------------


def _space_norms(param: GegenbauerParam, kmax: int) -> np.ndarray:
    if param.is_chebyshev_t:
        return np.array([chebyshev_t_weighted_norm(k) for k in range(kmax + 1)])
    return np.array([gegenbauer_weighted_norm(param, k) for k in range(kmax + 1)])


def _phi_transform_legendre(zs: np.ndarray, kmax: int) -> np.ndarray:
    """H_k(z) = int sqrt(k+1/2) P_k(y) e^{-izy} dy for z >= 0, vectorised.

    Equals 2 sqrt(k+1/2) (-i)^k j_k(z).
    """
    table = spherical_bessel_table(zs, kmax)
    k = np.arange(kmax + 1)
    scale = 2.0 * np.sqrt(k + 0.5)
    phase = (-1j) ** k
    return table * (scale * phase)[None, :]


def _phi_transform_gegenbauer(param, zs, kmax):
    """H_k(z) = int phi_k(y) e^{-izy} dy via the I_k recurrence, row by row."""
    norms = _space_norms(param, kmax)
    out = np.empty((zs.size, kmax + 1), dtype=complex)
    for i, z in enumerate(zs):
        # I_k(-z) = conj(I_k(z)) for the real polynomials C_k.
        out[i] = np.conj(gegenbauer_fourier_integrals(param, float(z), kmax)) / norms
    return out


def _phi_transform(space_param, zs, kmax):
    if space_param.lam == 0.5:
        return _phi_transform_legendre(zs, kmax)
    return _phi_transform_gegenbauer(space_param, zs, kmax)


def _phi_means(param: GegenbauerParam, kmax: int) -> np.ndarray:
    """int phi_k(y) dy on [-1, 1] (real; nonzero only for even k)."""
    return _integrals_at_zero(param, kmax).real / _space_norms(param, kmax)


def _assemble_fourier_family(scheme: SamplingScheme, space: ReconstructionSpace,
                             method: str) -> DesignMatrix:
    """Shared core for Fourier / oversampled-Fourier rows, any lambda, piecewise."""
    eps = scheme.frequency_scale
    half = scheme.half_count
    n = space.dim
    rows = 2 * half - 1
    entries = np.zeros((rows, n), dtype=complex)
    row0 = half - 1  # position of the j = 0 sample
    param = space.lam
    col = 0
    means = _phi_means(param, max(space.degrees) - 1)
    for (a, b), n_r in zip(space.intervals(), space.degrees):
        c_r = 0.5 * (b - a)
        d_r = 0.5 * (b + a)
        amp = math.sqrt(eps * c_r / 2.0)
        js = np.arange(1, half)
        zs = eps * js * math.pi * c_r
        h = _phi_transform(param, zs, n_r - 1)
        phases = np.exp(-1j * eps * js * math.pi * d_r)
        block_pos = amp * phases[:, None] * h
        entries[row0 + 1 :, col : col + n_r] = block_pos
        entries[row0 - 1 :: -1, col : col + n_r] = np.conj(block_pos)
        entries[row0, col : col + n_r] = amp * means[: n_r]
        col += n_r
    return DesignMatrix(entries, scheme, space, method)


def assemble_fourier_legendre(m: int, n: int) -> DesignMatrix:
    """Fourier samples against scaled Legendre polynomials on [-1, 1].

    Entries come from the spherical-Bessel closed form; the j = 0 row is
    the analytic mean row (only the constant basis function survives).
    """
    from gsrecon.bases import fourier_scheme
    from gsrecon.spaces import gegenbauer_space

    scheme = fourier_scheme(m)
    space = gegenbauer_space(0.5, n)
    return _assemble_fourier_family(scheme, space, "fourier-legendre-bessel")


def assemble_fourier_gegenbauer(m: int, space: ReconstructionSpace) -> DesignMatrix:
    """Fourier samples against a normalised Gegenbauer basis (any lambda)."""
    from gsrecon.bases import fourier_scheme

    if space.kind != GEGENBAUER:
        raise IncompatiblePairError("assemble_fourier_gegenbauer wants a polynomial space")
    scheme = fourier_scheme(m)
    return _assemble_fourier_family(scheme, space, "fourier-gegenbauer-recurrence")


def assemble_piecewise_fourier(m: int, space: ReconstructionSpace) -> DesignMatrix:
    """Fourier samples against a piecewise (Gegenbauer) basis.

    Each block uses the phase-shifted transform at z = j pi c_r with the
    sqrt(c_r/2) scaling; lambda = 1/2 rides the Bessel closed form.
    """
    from gsrecon.bases import fourier_scheme

    if space.kind != PIECEWISE:
        raise IncompatiblePairError("assemble_piecewise_fourier wants a piecewise space")
    scheme = fourier_scheme(m)
    return _assemble_fourier_family(scheme, space, "piecewise-fourier")


def assemble_modified_fourier(m: int, space: ReconstructionSpace) -> DesignMatrix:
    """Modified-Fourier samples against a (piecewise) Gegenbauer basis.

    Cosine rows take the real part and sine rows the imaginary part of
    the phase-shifted column transforms, which enforces the even/odd
    parity pattern automatically on a single interval.
    """
    from gsrecon.bases import modified_fourier_scheme

    if space.kind not in (GEGENBAUER, PIECEWISE):
        raise IncompatiblePairError("modified Fourier assembly wants a 1-D space")
    scheme = modified_fourier_scheme(m)
    half = scheme.half_count
    n = space.dim
    entries = np.zeros((2 * half + 1, n), dtype=complex)
    param = space.lam
    means = _phi_means(param, max(space.degrees) - 1)
    col = 0
    for (a, b), n_r in zip(space.intervals(), space.degrees):
        c_r = 0.5 * (b - a)
        d_r = 0.5 * (b + a)
        root = math.sqrt(c_r)
        # Constant row: <phi, 1/sqrt(2)>.
        entries[0, col : col + n_r] = root / math.sqrt(2.0) * means[:n_r]
        js = np.arange(1, half + 1)
        zc = js * math.pi * c_r
        zs = (js - 0.5) * math.pi * c_r
        # G_k(z) = int phi_k e^{+izy} dy = conj(H_k(z)).
        g_cos = np.conj(_phi_transform(param, zc, n_r - 1))
        g_sin = np.conj(_phi_transform(param, zs, n_r - 1))
        ph_cos = np.exp(1j * js * math.pi * d_r)
        ph_sin = np.exp(1j * (js - 0.5) * math.pi * d_r)
        entries[1::2, col : col + n_r] = root * (ph_cos[:, None] * g_cos).real
        entries[2::2, col : col + n_r] = root * (ph_sin[:, None] * g_sin).imag
        col += n_r
    return DesignMatrix(entries, scheme, space, "modified-fourier")


# ---------------------------------------------------------------------------
# Legendre-coefficient sampling against piecewise Legendre spaces
# ---------------------------------------------------------------------------


def _legendre_product_table(a: float, b: float, m: int, kwidth: int) -> np.ndarray:
    """u_{j,k} = int_a^b P_j(x) P_k(c x + d) dx for j < m, k <= kwidth(j).

    Here c, d map [a, b] onto [-1, 1].  Row j is filled for
    k <= kwidth + (m - 1 - j), the triangle actually consumed by the
    recurrence, which needs u_{j-1, k+1}.
    """
    c = 2.0 / (b - a)
    d = -(a + b) / (b - a)
    p_at = legendre_table(np.array([a, b]), m + 1)
    pa, pb = p_at[:, 0], p_at[:, 1]

    def width(j):
        return kwidth + (m - 1 - j)

    rows = []
    w0 = width(0)
    row = np.zeros(w0 + 1)
    row[0] = 2.0 / c
    rows.append(row)
    if m > 1:
        w1 = width(1)
        row = np.zeros(w1 + 1)
        row[0] = -2.0 * d / (c * c)
        if w1 >= 1:
            row[1] = 2.0 / (3.0 * c * c)
        rows.append(row)
    for j in range(2, m):
        wj = width(j)
        prev, prev2 = rows[j - 1], rows[j - 2]
        row = np.zeros(wj + 1)
        row[0] = (pb[j + 1] - b * pb[j] - pa[j + 1] + a * pa[j]) / j
        k = np.arange(1, wj + 1)
        row[1:] = (
            (2 * j - 1) * (k + 1) / (c * j * (2 * k + 1)) * prev[2 : wj + 2]
            + (2 * j - 1) * k / (c * j * (2 * k + 1)) * prev[: wj]
            - d * (2 * j - 1) / (c * j) * prev[1 : wj + 1]
            - (j - 1) / j * prev2[1 : wj + 1]
        )
        rows.append(row)
    out = np.zeros((m, kwidth + 1))
    for j in range(m):
        out[j] = rows[j][: kwidth + 1]
    return out


def assemble_legendre_legendre(m: int, space: ReconstructionSpace) -> DesignMatrix:
    """Legendre-coefficient samples against a piecewise Legendre basis.

    Only lambda = 1/2 spaces are supported by the recurrence; other
    parameters must go through the quadrature route.
    """
    from gsrecon.bases import legendre_coeff_scheme

    if space.kind == GEGENBAUER:
        space = ReconstructionSpace(PIECEWISE, space.lam, (), space.degrees)
    if space.kind != PIECEWISE or space.lam.lam != 0.5:
        raise IncompatiblePairError(
            "the Legendre-Legendre recurrence needs a piecewise lambda = 1/2 space"
        )
    scheme = legendre_coeff_scheme(m)
    n = space.dim
    entries = np.zeros((m, n), dtype=complex)
    js = np.arange(m)
    row_scale = np.sqrt(js + 0.5)
    col = 0
    for (a, b), n_r in zip(space.intervals(), space.degrees):
        c_r = 0.5 * (b - a)
        table = _legendre_product_table(a, b, m, n_r - 1)
        ks = np.arange(n_r)
        col_scale = np.sqrt(ks + 0.5) / math.sqrt(c_r)
        entries[:, col : col + n_r] = row_scale[:, None] * table * col_scale[None, :]
        col += n_r
    return DesignMatrix(entries, scheme, space, "legendre-legendre-recurrence")


# ---------------------------------------------------------------------------
# Quadrature fallback and tensor products
# ---------------------------------------------------------------------------


def assemble_by_quadrature(scheme: SamplingScheme, space: ReconstructionSpace,
                           tol: float = 1e-12) -> DesignMatrix:
    """Entrywise adaptive quadrature; the slow route for pairs with no
    closed form (for example Legendre-coefficient sampling of a
    Chebyshev space)."""
    from gsrecon.bases import index_map, scheme_basis_function
    from gsrecon.spaces import basis_eval

    labels = index_map(scheme)
    n = space.dim
    entries = np.empty((len(labels), n), dtype=complex)
    for i, lab in enumerate(labels):
        psi = scheme_basis_function(scheme, lab)
        osc = _label_oscillation(scheme, lab)
        for k in range(n):
            entries[i, k] = integrate_adaptive(
                lambda x: basis_eval(space, k, x) * np.conj(psi(x)),
                -1.0,
                1.0,
                tol,
                breakpoints=space.breakpoints,
                oscillation=osc + max(space.degrees),
            )
    return DesignMatrix(entries, scheme, space, "entrywise-quadrature")


def _label_oscillation(scheme: SamplingScheme, label) -> float:
    if scheme.kind in (FOURIER, OVERSAMPLED):
        return abs(int(label)) * math.pi * scheme.frequency_scale
    if scheme.kind == MODIFIED:
        return int(label[1:]) * math.pi
    return 2.0 * int(label)


def assemble_tensor(factor_matrices) -> DesignMatrix:
    """Kronecker product of factor design matrices (last factor fastest)."""
    mats = list(factor_matrices)
    if len(mats) < 2:
        raise ValueError("a tensor assembly needs at least two factors")
    rows = math.prod(u.rows for u in mats)
    cols = math.prod(u.cols for u in mats)
    if rows * cols > MAX_TENSOR_ENTRIES:
        raise ValueError(f"tensor design matrix would hold {rows * cols} entries")
    entries = mats[0].entries
    for u in mats[1:]:
        entries = np.kron(entries, u.entries)
    from gsrecon.spaces import tensor_space

    space = tensor_space(*(u.space for u in mats))
    return DesignMatrix(entries, tuple(u.scheme for u in mats), space, "tensor-kron")


def assemble(scheme, space: ReconstructionSpace) -> DesignMatrix:
    """Route a scheme/space pair to its assembly method."""
    if space.kind == TENSOR:
        if not isinstance(scheme, (tuple, list)) or len(scheme) != len(space.factors):
            raise IncompatiblePairError("tensor spaces need one scheme per factor")
        return assemble_tensor([assemble(s, f) for s, f in zip(scheme, space.factors)])
    if scheme.kind in (FOURIER, OVERSAMPLED):
        method = "piecewise-fourier" if space.kind == PIECEWISE else (
            "fourier-legendre-bessel" if space.lam.lam == 0.5
            else "fourier-gegenbauer-recurrence"
        )
        if scheme.kind == OVERSAMPLED:
            method = "oversampled-" + method
        return _assemble_fourier_family(scheme, space, method)
    if scheme.kind == MODIFIED:
        return assemble_modified_fourier(scheme.m, space)
    if scheme.kind == LEGENDRE_COEFF:
        if space.lam.lam == 0.5:
            return assemble_legendre_legendre(scheme.m, space)
        return assemble_by_quadrature(scheme, space)
    raise IncompatiblePairError(f"no assembly route for {scheme.kind}/{space.kind}")


def dump_matrix(path, design: DesignMatrix) -> None:
    """Debug dump as CSV rows j,k,re,im (not a stability surface)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j", "k", "re", "im"])
        for j in range(design.rows):
            for k in range(design.cols):
                v = design.entries[j, k]
                writer.writerow([j, k, f"{v.real:.17g}", f"{v.imag:.17g}"])
