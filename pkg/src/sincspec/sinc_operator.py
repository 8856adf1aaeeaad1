"""Reference spectrum of the Sinc kernel operator Q_m on I = [-1/2, 1/2].

Q_m is discretized by a symmetrized Nystrom rule on Gauss-Legendre nodes:
the matrix ``sqrt(w_i w_j) k_m(x_i, x_j)`` is symmetric and its eigenvalues
converge super-algebraically to those of Q_m because the kernel is entire.
The closed-form spectral laws used to audit it (Landau-Widom count, trace,
Hilbert-Schmidt sandwich, exponential decay) live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from sincspec.eigensolve import NumericalError, Spectrum, eig_symmetric
from sincspec.kernels import SincKernel


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return self.nodes.size

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


@dataclass(frozen=True)
class DecayFit:
    """Fitted bound ``lambda_k <= C exp(-eta (k - m) / log m)`` on ``fit_range``.

    ``eta`` is the least-squares slope; ``C`` is the smallest constant for which
    the bound dominates every eigenvalue in range. ``residual`` is the RMS
    deviation of the least-squares line in log scale.
    """

    C: float
    eta: float
    fit_range: tuple[int, int]
    residual: float

    def bound(self, k, m: float):
        return self.C * np.exp(-self.eta * (np.asarray(k, dtype=float) - m) / math.log(m))


def _legendre(K: int, x: np.ndarray):
    """Return ``(P_K(x), P_K'(x))`` by the three-term recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, K + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    if K == 0:
        return p0, np.zeros_like(x)
    dp = K * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def gauss_legendre(K: int, tol: float = 1e-15, max_iter: int = 100) -> QuadratureRule:
    """K-point Gauss-Legendre rule mapped to [-1/2, 1/2] (weights sum to 1).

    Nodes on [-1, 1] are found by Newton's method from the initial guess
    ``cos(pi (i - 1/4) / (K + 1/2))``; the rule is then symmetrized about 0.
    """
    if K < 1:
        raise ValueError(f"quadrature order must be >= 1, got {K}")
    i = np.arange(1, K + 1)
    x = np.cos(np.pi * (i - 0.25) / (K + 0.5))
    for _ in range(max_iter):
        p, dp = _legendre(K, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= tol:
            break
    else:
        raise NumericalError(f"Gauss-Legendre Newton iteration did not converge for K={K}")
    _, dp = _legendre(K, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    x, w = x[::-1], w[::-1]
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    if K % 2:
        x[K // 2] = 0.0
    nodes, weights = 0.5 * x, 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights)


def minimum_quad_order(m: float) -> int:
    return max(64, math.ceil(4 * m))


def default_quad_order(m: float) -> int:
    c = math.ceil(m)
    return max(64, 4 * c, 2 * c + 60)


def nystrom_matrix(m: float, K: int) -> np.ndarray:
    rule = gauss_legendre(K)
    x, sw = rule.nodes, np.sqrt(rule.weights)
    M = SincKernel(m)(x[:, None], x[None, :]) * sw[:, None] * sw[None, :]
    iu = np.triu_indices(K, 1)
    M[(iu[1], iu[0])] = M[iu]
    return M


@lru_cache(maxsize=256)
def _cached_spectrum(m: float, K: int, method: str) -> Spectrum:
    return eig_symmetric(nystrom_matrix(m, K), "Q_m", m=m, method=method)


def sinc_operator_spectrum(m: float, K: int | None = None, override: bool = False,
                           method: str = "lapack") -> Spectrum:
    """Nystrom spectrum of Q_m with a K-point Gauss-Legendre rule.

    ``K`` defaults to ``max(64, 4 ceil(m), 2 ceil(m) + 60)``. Orders below
    ``max(64, ceil(4 m))`` are rejected unless ``override`` is set.
    """
    if not m > 0:
        raise ValueError(f"m must be positive, got {m}")
    if K is None:
        K = default_quad_order(m)
    if K < minimum_quad_order(m) and not override:
        raise ValueError(f"quadrature order {K} below the minimum {minimum_quad_order(m)} for m={m}")
    return _cached_spectrum(float(m), int(K), method)


def hs_norm_squared(spectrum) -> float:
    return math.fsum(float(v) ** 2 for v in np.asarray(spectrum))


def hs_lower_bound(m: float) -> float:
    """Lower bound ``m - (2/pi^2) log m - 1/3`` on ``||Q_m||_HS^2``."""
    return m - 2.0 / math.pi**2 * math.log(m) - 1.0 / 3.0


def landau_widom_count(m: float, alpha: float) -> float:
    """Two-term Landau-Widom count of eigenvalues of Q_m above ``alpha``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    return m + math.log((1.0 - alpha) / alpha) * math.log(m) / math.pi**2


def fit_decay(spectrum, m: float, floor: float = 1e-12) -> DecayFit:
    """Fit ``log lambda_k`` linearly in ``(k - m) / log m`` for ``k >= ceil(m)``.

    The range stops at the last index with ``lambda_k > floor``.
    """
    if m < 3:
        raise ValueError(f"decay fit needs m >= 3, got {m}")
    lam = np.asarray(spectrum, dtype=float)
    k0 = math.ceil(m)
    above = np.nonzero(lam > floor)[0]
    above = above[above >= k0]
    if above.size == 0:
        raise NumericalError(f"no eigenvalue above {floor:g} beyond index {k0}")
    k1 = int(above.max())
    ks = np.arange(k0, k1 + 1)
    if ks.size < 4 or np.any(lam[ks] <= 0):
        raise NumericalError(f"decay fit needs at least 4 positive points, range [{k0}, {k1}]")
    x = (ks - m) / math.log(m)
    y = np.log(lam[ks])
    slope, intercept = np.polyfit(x, y, 1)
    eta = -float(slope)
    if not eta > 0:
        raise NumericalError(f"fitted decay rate is not positive (eta={eta:g})")
    resid = y - (intercept + slope * x)
    logC = float(np.max(y + eta * x))
    return DecayFit(math.exp(logC), eta, (k0, k1), float(np.sqrt(np.mean(resid**2))))
