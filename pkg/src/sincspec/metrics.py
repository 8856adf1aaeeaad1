"""Scalar functionals of spectra: distances, counts, degrees of freedom,
concentration bounds, reconstruction error and capacity.

All logarithms are natural logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from sincspec.eigensolve import NumericalError


def _values(spectrum) -> np.ndarray:
    return np.asarray(spectrum, dtype=float)


def _padded(spectrum, length: int) -> np.ndarray:
    v = _values(spectrum)
    out = np.zeros(length)
    k = min(length, v.size)
    out[:k] = v[:k]
    return out


# -- distances and counts ---------------------------------------------------

def l2_spectral_distance(s1, s2, n: int) -> float:
    """l2 distance of the first ``n`` entries; missing entries count as 0."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    d = _padded(s1, n) - _padded(s2, n)
    return math.sqrt(math.fsum(d * d))


def count_above(spectrum, alpha: float) -> int:
    return int(np.count_nonzero(_values(spectrum) > alpha))


# -- concentration bounds -----------------------------------------------------

def gamma_xi(xi: float) -> float:
    return math.sqrt(2.0) * xi + 1.0


@dataclass(frozen=True)
class ConcentrationQuery:
    xi: float
    m: float
    n: int
    L: float | None = None

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError(f"xi must be positive, got {self.xi}")
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")

    @property
    def oscillation(self) -> float:
        """Kernel oscillation bound; the Sinc value ``sqrt(2) m`` when unset."""
        return math.sqrt(2.0) * self.m if self.L is None else self.L


@dataclass(frozen=True)
class ConcentrationBounds:
    """Deviation bounds and the probability with which each may fail.

    ``theorem1``: ||lambda(H) - lambda(T)|| for a general kernel.
    ``prop2``: ||lambda(A*A) - lambda(H)||.
    ``theorem2``: ||lambda(A*A) - lambda(Q_m)||.
    ``individual``: |lambda_j(A*A) - lambda_j(Q_m)| for one fixed j.
    """

    theorem1: float
    prop2: float
    theorem2: float
    individual: float
    fail_theorem1: float
    fail_prop2: float
    fail_theorem2: float
    fail_individual: float

    def bound(self, name: str) -> float:
        return getattr(self, name)

    def level(self, name: str) -> float:
        """Guaranteed probability that the named bound holds."""
        return 1.0 - getattr(self, "fail_" + name)


BOUND_NAMES = ("theorem1", "prop2", "theorem2", "individual")


def concentration_bounds(q: ConcentrationQuery) -> ConcentrationBounds:
    rn = math.sqrt(q.n)
    g = gamma_xi(q.xi)
    p1 = math.exp(-2.0 * q.xi**2)
    return ConcentrationBounds(
        theorem1=(q.xi + 1.0 / math.sqrt(2.0)) * q.oscillation / rn,
        prop2=q.m * g / rn,
        theorem2=2.0 * q.m * g / rn,
        individual=q.m * (q.xi + 2.0) / rn,
        fail_theorem1=p1,
        fail_prop2=p1,
        fail_theorem2=2.0 * p1,
        fail_individual=2.0 * p1,
    )


def xi_for_level(level: float, copies: int = 2) -> float:
    """Smallest xi with ``1 - copies * exp(-2 xi^2) >= level``."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    return math.sqrt(math.log(copies / (1.0 - level)) / 2.0)


def min_ratio_for_sqrt_m(xi: float) -> int:
    """Smallest integer n/m making ``2 m gamma_xi / sqrt(n) <= sqrt(m)``.

    The condition reads ``n/m >= 4 gamma_xi^2`` independently of m.
    """
    if not xi > 0:
        raise ValueError(f"xi must be positive, got {xi}")
    return math.ceil(4.0 * gamma_xi(xi) ** 2 - 1e-12)


# -- degrees of freedom --------------------------------------------------------

def deg_inf(spectrum, epsilon: float) -> int:
    """Smallest index s with ``lambda_s <= epsilon``; the length if none."""
    v = _values(spectrum)
    hits = np.nonzero(v <= epsilon)[0]
    return int(hits[0]) if hits.size else int(v.size)


def deg_2(spectrum, epsilon: float) -> int:
    """Smallest s with ``sum_{j >= s} lambda_j^2 <= epsilon^2``."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    v = _values(spectrum)
    tails = np.cumsum((v * v)[::-1])[::-1]
    hits = np.nonzero(tails <= epsilon * epsilon)[0]
    return int(hits[0]) if hits.size else int(v.size)


MIN_RANDOMIZED_TRIALS = 30


def deg_randomized(trials: Sequence, epsilon: float, alpha: float) -> int:
    """Smallest s such that ``lambda_s <= epsilon`` in at least a fraction
    ``alpha`` of the trial spectra."""
    if len(trials) < MIN_RANDOMIZED_TRIALS:
        raise ValueError(f"need at least {MIN_RANDOMIZED_TRIALS} trials, got {len(trials)}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    length = max(len(_values(t)) for t in trials)
    stack = np.vstack([_padded(t, length) for t in trials])
    frac = np.mean(stack <= epsilon, axis=0)
    hits = np.nonzero(frac >= alpha)[0]
    return int(hits[0]) if hits.size else length


def randomized_from_degrees(degrees: Sequence[int], alpha: float) -> int:
    """``deg_randomized`` from per-trial ``deg_inf`` values.

    Spectra are descending, so ``lambda_s <= epsilon`` holds in a trial exactly
    when ``s >= deg_inf`` of that trial; the answer is an empirical quantile.
    """
    d = np.sort(np.asarray(degrees, dtype=int))
    need = math.ceil(alpha * d.size - 1e-12)
    return int(d[max(need, 1) - 1])


def deg_compare_bound(spec1, spec2, eps1: float, eps2: float) -> int:
    """Evaluate ``deg_inf(T1, eps1) + sum (lambda_j(T1) - lambda_j(T2))^2 / (eps1 - eps2)^2``.

    Requires ``0 < eps1 < eps2``. Returns the integer part and checks that
    ``deg_inf(T2, eps2)`` does not exceed it.
    """
    if eps1 == eps2:
        raise ValueError("eps1 and eps2 must differ")
    if not 0.0 < eps1 < eps2:
        raise ValueError(f"need 0 < eps1 < eps2, got eps1={eps1}, eps2={eps2}")
    length = max(len(_values(spec1)), len(_values(spec2)))
    d = _padded(spec1, length) - _padded(spec2, length)
    rhs = deg_inf(spec1, eps1) + math.fsum(d * d) / (eps1 - eps2) ** 2
    bound = math.floor(rhs + 1e-12)
    if deg_inf(spec2, eps2) > bound:
        raise NumericalError(f"degree comparison violated: {deg_inf(spec2, eps2)} > {bound}")
    return bound


# -- reconstruction error and capacity ---------------------------------------------

def reconstruction_error(spectrum, d: int) -> float:
    """Best rank-d squared HS error, given the eigenvalues of M*M."""
    v = _values(spectrum)
    if not 0 <= d <= v.size:
        raise ValueError(f"d must lie in [0, {v.size}], got {d}")
    return math.fsum(v[d:])


def capacity(spectrum, s: float) -> float:
    """``sum_k log(1 + s lambda_k)``."""
    if not s > 0:
        raise ValueError(f"scale s must be positive, got {s}")
    v = _values(spectrum)
    if np.any(v < 0):
        raise ValueError("capacity needs a non-negative spectrum")
    return math.fsum(np.log1p(s * v))


def capacity_matrix(A: np.ndarray, p: float, m: float | None = None, method: str = "lapack") -> float:
    """``log det(I + (n p / m) A*A)`` evaluated through the spectrum of A*A.

    ``m`` defaults to ``||A||_HS^2``, which equals m for the random Fourier matrix.
    """
    from sincspec.eigensolve import eig_hermitian
    from sincspec.randmat import gram, hs_norm_squared

    if not p > 0:
        raise ValueError(f"power p must be positive, got {p}")
    A = np.asarray(A)
    if m is None:
        m = hs_norm_squared(A)
    n = A.shape[0]
    lam = eig_hermitian(gram(A), "A*A", m=m, method=method)
    return capacity(lam, n * p / m)


@dataclass(frozen=True)
class CapacityApprox:
    approx: float
    tilde: float

    def errors(self, measured: float) -> tuple[float, float]:
        """Absolute and relative deviation of ``measured`` from ``tilde``."""
        E = abs(measured - self.tilde)
        return E, E / measured


def capacity_approx(m: float, n: int, p: float) -> CapacityApprox:
    """``m log(1 + n p / m)`` and the cruder ``m log(n^2 / m)``."""
    if not (m > 0 and n > 0 and p > 0):
        raise ValueError("m, n and p must be positive")
    return CapacityApprox(m * math.log1p(n * p / m), m * math.log(n * n / m))


def mcdiarmid_capacity_band(n: int, p: float, xi: float) -> float:
    """Half-width ``xi log(1 + n p) / sqrt(n)`` of the capacity deviation band."""
    if not (n > 0 and p > 0 and xi >= 0):
        raise ValueError("n, p must be positive and xi non-negative")
    return xi * math.log1p(n * p) / math.sqrt(n)
