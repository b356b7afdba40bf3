"""gsrecon: stable function reconstruction from spectral samples.

A library and CLI that turns finitely many coefficients taken in one
basis (Fourier, oversampled Fourier, modified Fourier, or Legendre)
into a stable, quasi-optimal expansion in another (Gegenbauer,
piecewise polynomial, or tensor product), together with the
diagnostics that certify the reconstruction: the subspace-alignment
constant, the stable sampling rate, and the condition numbers of the
underlying least-squares problem.
"""

from gsrecon.specfun import GegenbauerParam
from gsrecon.spaces import (
    ReconstructionSpace,
    gegenbauer_space,
    piecewise_space,
    tensor_space,
)
from gsrecon.bases import (
    SamplingScheme,
    SampleVector,
    fourier_scheme,
    oversampled_fourier_scheme,
    modified_fourier_scheme,
    legendre_coeff_scheme,
    sample_function,
)
from gsrecon.reconstruct import reconstruct, evaluate, best_approximation, error_metrics

__version__ = "0.1.0"
