"""Eigendecomposition and the shifted positive decomposition of a Gram matrix.

An indefinite Gram matrix K with eigenpairs (mu_i, u_i), mu sorted
descending, splits as K = K+ - K- where both parts are positive definite:

* K+ carries ``mu_i + tau`` on the eigendirections with mu_i >= 0 and
  ``tau`` elsewhere;
* K- carries ``tau`` on the nonnegative directions and ``tau - mu_i`` on
  the negative ones.

The factor B satisfies B^T B = K+, so the smooth quadratic part of the
objective can be written as a plain squared norm ||B alpha||^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError

# Asymmetry beyond this (relative to the largest entry) is rejected.
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class GramDecomposition:
    """Eigensystem of a Gram matrix together with its shifted positive parts.

    Attributes
    ----------
    gram : ndarray of shape (n, n)
        The original symmetric matrix K.
    eigenvalues : ndarray of shape (n,)
        Eigenvalues mu, sorted descending.
    eigenvectors : ndarray of shape (n, n)
        Orthonormal columns matching ``eigenvalues``.
    num_nonneg : int
        Count of eigenvalues >= 0.
    tau : float
        The positive spectral shift.
    kplus, kminus : ndarray of shape (n, n)
        The positive-definite parts with K = kplus - kminus.
    bfactor : ndarray of shape (n, n)
        Matrix B with B^T B = kplus.
    """

    gram: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    num_nonneg: int
    tau: float
    kplus: np.ndarray
    kminus: np.ndarray
    bfactor: np.ndarray

    @property
    def n(self) -> int:
        return self.gram.shape[0]

    def stats(self) -> dict:
        """Spectrum summary used by reports: size, extreme eigenvalues, split."""
        return {
            "n": self.n,
            "eig_min": float(self.eigenvalues[-1]),
            "eig_max": float(self.eigenvalues[0]),
            "num_nonneg": self.num_nonneg,
            "tau": self.tau,
        }


def sym_eigendecompose(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending.

    Returns ``(eigenvalues, eigenvectors)`` with
    ``matrix ~= eigenvectors @ diag(eigenvalues) @ eigenvectors.T``.

    Raises InputError for non-square, non-finite, or visibly asymmetric
    input, and NumericalError if the eigensolver fails to converge.
    """
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InputError(f"matrix must be square, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise InputError("matrix contains non-finite values")
    scale = max(1.0, float(np.max(np.abs(mat))) if mat.size else 1.0)
    asym = float(np.max(np.abs(mat - mat.T)))
    if asym > SYMMETRY_TOL * scale:
        raise InputError(
            f"matrix is not symmetric: max |K - K^T| = {asym:.3e} "
            f"(allowed {SYMMETRY_TOL * scale:.3e})"
        )
    try:
        vals, vecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    # eigh returns ascending order; flip to descending.
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def positive_decompose(
    gram: np.ndarray,
    eigenvalues: np.ndarray,
    eigenvectors: np.ndarray,
    tau: float,
) -> GramDecomposition:
    """Build the shifted positive decomposition from a precomputed eigensystem.

    ``eigenvalues``/``eigenvectors`` must be a descending eigendecomposition
    of ``gram`` (as produced by :func:`sym_eigendecompose`); ``tau`` must be
    strictly positive.
    """
    if not (np.isfinite(tau) and tau > 0):
        raise InputError(f"tau must be strictly positive, got {tau}")
    vals = np.asarray(eigenvalues, dtype=np.float64)
    vecs = np.asarray(eigenvectors, dtype=np.float64)
    mat = np.asarray(gram, dtype=np.float64)
    n = mat.shape[0]
    if vals.shape != (n,) or vecs.shape != (n, n):
        raise InputError("eigensystem shape does not match the matrix")
    if np.any(np.diff(vals) > 0):
        raise InputError("eigenvalues must be sorted descending")

    num_nonneg = int(np.count_nonzero(vals >= 0.0))
    shift_plus = np.where(vals >= 0.0, vals + tau, tau)
    shift_minus = np.where(vals >= 0.0, tau, tau - vals)

    kplus = (vecs * shift_plus) @ vecs.T
    kminus = (vecs * shift_minus) @ vecs.T
    # Re-symmetrize to kill rounding skew before downstream eigen checks.
    kplus = 0.5 * (kplus + kplus.T)
    kminus = 0.5 * (kminus + kminus.T)
    bfactor = np.sqrt(shift_plus)[:, None] * vecs.T

    return GramDecomposition(
        gram=mat,
        eigenvalues=vals,
        eigenvectors=vecs,
        num_nonneg=num_nonneg,
        tau=float(tau),
        kplus=kplus,
        kminus=kminus,
        bfactor=bfactor,
    )


def decompose_gram(gram: np.ndarray, tau: float) -> GramDecomposition:
    """Convenience wrapper: eigendecompose then positively decompose."""
    vals, vecs = sym_eigendecompose(gram)
    return positive_decompose(gram, vals, vecs, tau)
