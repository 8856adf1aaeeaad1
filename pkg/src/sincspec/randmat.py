"""Random Fourier matrix A, kernel Gram matrix H and the Gram product A*A."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from sincspec.kernels import KernelSpec


def build_A(m: float, Z, Y) -> np.ndarray:
    """Return the n x n matrix with entries ``sqrt(m)/n * exp(2i pi m Z_j Y_k)``.

    Every entry has modulus ``sqrt(m)/n`` so that ``||A||_HS**2 = m``.
    """
    Z = np.asarray(Z, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Z.ndim != 1 or Y.ndim != 1 or Z.size != Y.size:
        raise ValueError(f"Z and Y must be 1-d of equal length, got {Z.shape} and {Y.shape}")
    n = Z.size
    if n == 0:
        raise ValueError("n must be positive")
    if not m >= 1:
        raise ValueError(f"m must be >= 1, got {m}")
    phase = 2.0 * np.pi * m * np.outer(Z, Y)
    return (math.sqrt(m) / n) * np.exp(1j * phase)


def build_H(kernel: KernelSpec, Y) -> np.ndarray:
    """Return the Gram matrix ``k(Y_j, Y_k) / n``.

    Only the upper triangle is evaluated; the lower one is copied from it so the
    result is exactly symmetric even for a kernel whose floating-point
    evaluation is not.
    """
    Y = np.asarray(Y, dtype=float)
    n = Y.size
    if n == 0:
        raise ValueError("n must be positive")
    K = np.asarray(kernel(Y[:, None], Y[None, :]), dtype=float)
    iu = np.triu_indices(n, 1)
    K[(iu[1], iu[0])] = K[iu]
    return K / n


def gram(A: np.ndarray) -> np.ndarray:
    """Hermitian product ``A^* A`` with the lower triangle mirrored from the upper.

    The diagonal is forced real; its sum is ``||A||_HS**2``.
    """
    A = np.asarray(A)
    G = A.conj().T @ A
    iu = np.triu_indices(G.shape[0], 1)
    G[(iu[1], iu[0])] = G[iu].conj()
    G[np.diag_indices_from(G)] = np.einsum("ij,ij->j", A.conj(), A).real
    return G


def hs_norm_squared(M: np.ndarray) -> float:
    return float(np.sum(np.abs(np.asarray(M)) ** 2))


def write_matrix_csv(path, M: np.ndarray, m: float, kind: str) -> None:
    """Write a matrix as CSV under a ``# n=<n> m=<m> kind=<kind>`` header.

    Complex matrices get two adjacent columns per entry (real, imaginary);
    real matrices one column per entry. Values use 17 significant digits.
    """
    M = np.asarray(M)
    n = M.shape[0]
    with open(Path(path), "w", newline="") as fh:
        fh.write(f"# n={n} m={m:.17g} kind={kind}\n")
        w = csv.writer(fh, lineterminator="\n")
        for row in M:
            if np.iscomplexobj(M):
                w.writerow([f"{v:.17g}" for z in row for v in (z.real, z.imag)])
            else:
                w.writerow([f"{v:.17g}" for v in row])


def read_matrix_csv(path) -> tuple[np.ndarray, dict]:
    with open(Path(path)) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing '# n=... m=... kind=...' header")
        meta = dict(tok.split("=", 1) for tok in header[1:].split())
        rows = [[float(v) for v in row] for row in csv.reader(fh)]
    n = int(meta["n"])
    data = np.array(rows, dtype=float).reshape(n, -1)
    if data.shape[1] == 2 * n:
        data = data[:, 0::2] + 1j * data[:, 1::2]
    return data, {"n": n, "m": float(meta["m"]), "kind": meta["kind"]}
