"""Random discretizations of the finite Fourier transform and their spectra."""

from sincspec.eigensolve import Spectrum, eig_hermitian, eig_symmetric, singular_values
from sincspec.kernels import KernelSpec, SincKernel, make_gaussian_kernel
from sincspec.randmat import build_A, build_H, gram
from sincspec.sampling import SeedSpec, derive_generator, sample_uniform
from sincspec.sinc_operator import gauss_legendre, sinc_operator_spectrum

__version__ = "0.1.0"

__all__ = [
    "KernelSpec",
    "SeedSpec",
    "SincKernel",
    "Spectrum",
    "build_A",
    "build_H",
    "derive_generator",
    "eig_hermitian",
    "eig_symmetric",
    "gauss_legendre",
    "gram",
    "make_gaussian_kernel",
    "sample_uniform",
    "sinc_operator_spectrum",
    "singular_values",
]
