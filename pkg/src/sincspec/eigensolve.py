"""Descending spectra of symmetric/Hermitian matrices and singular values.

Two backends are available. ``"jacobi"`` is the self-contained solver: cyclic
Jacobi rotations in round-robin (parallel) ordering, with complex Hermitian
problems mapped to the real embedding ``[[X, -Y], [Y, X]]``. ``"lapack"``
calls numpy's LAPACK drivers and is the default for the Monte Carlo loops,
where the Jacobi solver is far too slow at n = 300.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PSD_ORIGINS = frozenset({"A*A", "H", "Q_m"})
METHODS = ("lapack", "jacobi")


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or produced an invalid result."""


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Finite descending spectrum, indexed from 0."""

    values: np.ndarray
    origin: str = "other"
    m: float | None = None
    n: int | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("spectrum values must be one-dimensional")
        if v.size > 1 and np.any(np.diff(v) > 0):
            raise ValueError("spectrum values must be in descending order")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __getitem__(self, item):
        return self.values[item]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def padded(self, length: int) -> np.ndarray:
        """Values truncated or zero-padded to ``length``."""
        out = np.zeros(length)
        k = min(length, self.values.size)
        out[:k] = self.values[:k]
        return out


def psd_tolerance(m: float | None) -> float:
    return 1e-10 * max(1.0, m or 1.0)


def make_spectrum(values, origin: str = "other", m=None, n=None) -> Spectrum:
    """Sort descending and apply the clamp-to-zero policy for PSD origins."""
    v = np.sort(np.asarray(values, dtype=float))[::-1].copy()
    if origin in PSD_ORIGINS and v.size:
        tol = psd_tolerance(m)
        if v[-1] < -tol:
            raise NumericalError(f"{origin} spectrum has eigenvalue {v[-1]:.3e} below -{tol:.1e}")
        np.maximum(v, 0.0, out=v)
    return Spectrum(v, origin, m, n)


def _round_robin(n: int):
    """Yield n-1 rounds of disjoint (p, q) index pairs covering all pairs once."""
    size = n + (n % 2)
    others = list(range(1, size))
    for _ in range(size - 1):
        arr = [0] + others
        p = np.array([arr[i] for i in range(size // 2)])
        q = np.array([arr[size - 1 - i] for i in range(size // 2)])
        keep = (p < n) & (q < n)
        lo, hi = np.minimum(p, q)[keep], np.maximum(p, q)[keep]
        yield lo, hi
        others = others[-1:] + others[:-1]


def jacobi_eigh(M, tol: float = 1e-13, max_sweeps: int = 100, vectors: bool = False):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Each round applies ``n/2`` rotations on disjoint index pairs at once.
    Iterates until ``off(M) <= tol * ||M||_HS``.

    Returns
    -------
    w : ndarray
        Eigenvalues, unsorted (diagonal of the converged matrix).
    V : ndarray or None
        Orthogonal eigenvectors as columns if ``vectors`` is true.
    """
    A = np.array(M, dtype=float)
    n = A.shape[0]
    V = np.eye(n) if vectors else None
    norm = np.sqrt(np.sum(A * A))
    if n < 2 or norm == 0.0:
        return np.diag(A).copy(), V
    schedule = list(_round_robin(n))
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(A[offdiag] ** 2))
        if off <= tol * norm:
            return np.diag(A).copy(), V
        for p, q in schedule:
            apq = A[p, q]
            active = apq != 0.0
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (A[q, q] - A[p, p]) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            Ap, Aq = A[p, :], A[q, :]
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            Ap, Aq = A[:, p], A[:, q]
            A[:, p] = Ap * c - Aq * s
            A[:, q] = Ap * s + Aq * c
            A[p, q] = 0.0
            A[q, p] = 0.0
            if vectors:
                Vp, Vq = V[:, p], V[:, q]
                V[:, p] = Vp * c - Vq * s
                V[:, q] = Vp * s + Vq * c
    raise NumericalError(f"Jacobi did not converge in {max_sweeps} sweeps (n={n})")


def _check_finite(M):
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")


def eig_symmetric(M, origin: str = "other", m=None, method: str = "lapack") -> Spectrum:
    M = np.asarray(M, dtype=float)
    _check_finite(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if method == "lapack":
        w = np.linalg.eigvalsh(M)
    elif method == "jacobi":
        w, _ = jacobi_eigh(M)
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return make_spectrum(w, origin, m, M.shape[0])


def real_embedding(M) -> np.ndarray:
    X, Y = M.real, M.imag
    return np.block([[X, -Y], [Y, X]])


def eig_hermitian(M, origin: str = "other", m=None, method: str = "lapack") -> Spectrum:
    M = np.asarray(M)
    _check_finite(M)
    if np.max(np.abs(M - M.conj().T), initial=0.0) > 1e-12 * np.linalg.norm(M):
        raise ValueError("matrix is not Hermitian")
    if not np.iscomplexobj(M):
        return eig_symmetric(M, origin, m, method)
    if method == "lapack":
        w = np.linalg.eigvalsh(M)
    elif method == "jacobi":
        w2, _ = jacobi_eigh(real_embedding(M))
        # every eigenvalue appears twice in the embedding; average sorted neighbours
        w2 = np.sort(w2)
        w = 0.5 * (w2[0::2] + w2[1::2])
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return make_spectrum(w, origin, m, M.shape[0])


def singular_values(A, method: str = "lapack") -> Spectrum:
    A = np.asarray(A)
    _check_finite(A)
    if method == "lapack":
        s = np.linalg.svd(A, compute_uv=False)
    else:
        from sincspec.randmat import gram

        lam = eig_hermitian(gram(A), "A*A", method=method)
        s = np.sqrt(lam.values)
    return make_spectrum(s, "other", n=A.shape[1])
