"""Bounded positive semi-definite kernels on I = [-1/2, 1/2].

A kernel carries two constants that drive the Gram-matrix concentration
bound: the diagonal bound ``R = sup_y k(y, y)`` and the oscillation bound ``L``
with ``L**2 = sup_{x,y} k(x,x)**2 + k(y,y)**2 - 2 k(x,y)**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np



@dataclass(frozen=True)
class KernelSpec:
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    R: float
    L: float
    description: str = ""

    def __call__(self, x, y):
        return self.evaluate(x, y)


def _sinpi(u):
    """sin(pi*u) with exact reduction modulo 2, so integers give exact zeros."""
    u = np.asarray(u, dtype=float)
    r = u - 2.0 * np.round(0.5 * u)
    r = np.where(r > 0.5, 1.0 - r, r)
    r = np.where(r < -0.5, -1.0 - r, r)
    return np.sin(np.pi * r)


@dataclass(frozen=True)
class SincKernel:
    """The Sinc kernel ``k_m(x, y) = sin(m pi (x-y)) / (pi (x-y))``."""

    m: float
    series_threshold: float = 1e-4

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"bandwidth m must be positive, got {self.m}")

    def evaluate(self, x, y):
        d = np.subtract(x, y, dtype=float)
        u = self.m * d
        t = np.pi * u
        small = np.abs(t) < self.series_threshold
        with np.errstate(invalid="ignore", divide="ignore"):
            direct = _sinpi(u) / (np.pi * d)
        series = self.m * (1.0 - t * t / 6.0)
        out = np.where(small, series, direct)
        return out[()] if out.ndim == 0 else out

    __call__ = evaluate

    def constants(self) -> tuple[float, float]:
        return sinc_constants(self)

    def spec(self) -> KernelSpec:
        R, L = self.constants()
        return KernelSpec(self.evaluate, R, L, f"sinc(m={self.m:g})")


def sinc_eval(kernel: SincKernel, x, y):
    return kernel.evaluate(x, y)


def sinc_constants(kernel: SincKernel) -> tuple[float, float]:
    """Return ``(R, L)`` for the Sinc kernel on I x I.

    ``R = m`` since the diagonal is constant. The infimum of ``k_m(x, y)**2``
    over ``|x - y| <= 1`` is zero as soon as the first zero ``|x - y| = 1/m``
    lies inside the interval, i.e. ``m >= 1``; then ``L = sqrt(2) m``. Below
    that the minimum sits at ``|x - y| = 1``.
    """
    m = float(kernel.m)
    if m >= 1.0:
        return m, math.sqrt(2.0) * m
    kmin = math.sin(m * math.pi) / math.pi
    return m, math.sqrt(2.0 * m * m - 2.0 * kmin * kmin)


def grid_oscillation_bound(evaluate, grid: int = 500) -> float:
    """Maximize ``k(x,x)**2 + k(y,y)**2 - 2 k(x,y)**2`` on a uniform grid of I x I.

    The grid includes both endpoints. Returns the square root of the maximum.
    """
    g = np.linspace(-0.5, 0.5, grid)
    diag = np.asarray(evaluate(g, g), dtype=float)
    K = np.asarray(evaluate(g[:, None], g[None, :]), dtype=float)
    val = diag[:, None] ** 2 + diag[None, :] ** 2 - 2.0 * K**2
    return math.sqrt(max(0.0, float(val.max())))


def make_gaussian_kernel(bandwidth: float, grid: int = 500) -> KernelSpec:
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    two_s2 = 2.0 * bandwidth * bandwidth

    def evaluate(x, y):
        d = np.subtract(x, y, dtype=float)
        return np.exp(-d * d / two_s2)

    L = grid_oscillation_bound(evaluate, grid)
    return KernelSpec(evaluate, 1.0, L, f"gaussian(bandwidth={bandwidth:g})")
