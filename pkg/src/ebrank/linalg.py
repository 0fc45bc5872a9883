"""Dense complex linear algebra with tolerance-aware rank and spectral routines.

Matrices and vectors are plain :class:`numpy.ndarray` objects of dtype
``complex128``.  The ``as_matrix`` / ``as_vector`` constructors are the only
entry points that accept foreign data; they enforce exact shapes and reject
NaN or Inf so that optimizer iterates can never silently poison later checks.

The inner product is conjugate-linear in the *first* argument, so that
``outer(x, y) @ z == x * inner(y, z)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class NotHermitianError(ValueError):
    pass


class NotUnitaryError(ValueError):
    pass


class DegenerateSpectrumError(ValueError):
    """Two eigenvalues are closer than the separation tolerance.

    Raised by :func:`unitary_eigen`; the eigenbasis of a degenerate
    eigenspace is not unique, so no deterministic basis can be returned.
    """

    def __init__(self, message: str, eigenvalues: np.ndarray, min_gap: float):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.min_gap = min_gap


@dataclass(frozen=True)
class Tolerance:
    """Absolute and rank-relative tolerances.

    ``abs_eps`` bounds Hermiticity defects, negative eigenvalues and
    orthonormality defects.  ``rank_rel_eps`` is relative to the largest
    singular value.
    """

    abs_eps: float = 1e-10
    rank_rel_eps: float = 1e-8

    def __post_init__(self):
        if not (self.abs_eps > 0 and self.rank_rel_eps > 0):
            raise ValueError("tolerances must be strictly positive")


DEFAULT_TOL = Tolerance()


def as_matrix(data, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Validate and convert ``data`` into a finite complex 2-D array."""
    m = np.array(data, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if rows is not None and m.shape[0] != rows:
        raise DimensionError(f"expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise DimensionError(f"expected {cols} columns, got {m.shape[1]}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def as_vector(data, dim: int | None = None) -> np.ndarray:
    """Validate and convert ``data`` into a finite complex 1-D array."""
    v = np.array(data, dtype=complex)
    if v.ndim != 1 or v.shape[0] < 1:
        raise DimensionError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def _square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")


def basis_vector(d: int, k: int) -> np.ndarray:
    e = np.zeros(d, dtype=complex)
    e[k] = 1.0
    return e


def matrix_unit(d: int, p: int, q: int) -> np.ndarray:
    """The canonical matrix unit E_{p,q} (zero-based indices)."""
    e = np.zeros((d, d), dtype=complex)
    e[p, q] = 1.0
    return e


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T


def trace(a) -> complex:
    a = as_matrix(a)
    _square(a)
    return complex(np.trace(a))


def tensor(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is ``a[i, j] * b``."""
    return np.kron(as_matrix(a), as_matrix(b))


def frobenius_distance(a, b) -> float:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def inner(x, y) -> complex:
    """<x, y> = sum conj(x_k) y_k."""
    x, y = as_vector(x), as_vector(y)
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch {x.shape[0]} vs {y.shape[0]}")
    return complex(np.vdot(x, y))


def outer(x, y) -> np.ndarray:
    """The rank-one matrix x y^*."""
    x, y = as_vector(x), as_vector(y)
    return np.outer(x, y.conj())


def hermitian_defect(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - a.conj().T))


def hermitian_eigen(a, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Spectral decomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as the *columns* of a unitary matrix.
    """
    a = as_matrix(a)
    _square(a)
    defect = hermitian_defect(a)
    if defect > tol.abs_eps * max(1.0, float(np.linalg.norm(a))):
        raise NotHermitianError(f"matrix is not Hermitian (defect {defect:.3e})")
    vals, vecs = np.linalg.eigh((a + a.conj().T) / 2)
    return vals, vecs


def unitary_eigen(a, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Spectral decomposition of a unitary matrix with simple spectrum.

    Uses the complex Schur form, which is diagonal for normal matrices.
    Eigenpairs are ordered by eigenvalue argument in ``[0, 2*pi)``.  A
    spectrum with two eigenvalues closer than ``tol.rank_rel_eps`` raises
    :class:`DegenerateSpectrumError`.
    """
    a = as_matrix(a)
    _square(a)
    n = a.shape[0]
    unitarity = float(np.linalg.norm(a.conj().T @ a - np.eye(n)))
    if unitarity > 1e-9:
        raise NotUnitaryError(f"matrix is not unitary (defect {unitarity:.3e})")
    t, z = scipy.linalg.schur(a, output="complex")
    vals = np.diag(t).copy()
    order = np.argsort(np.mod(np.angle(vals), 2 * np.pi), kind="stable")
    vals, z = vals[order], z[:, order]
    if n > 1:
        gaps = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(gaps, np.inf)
        min_gap = float(gaps.min())
        if min_gap < tol.rank_rel_eps:
            raise DegenerateSpectrumError(
                f"degenerate spectrum (min eigenvalue gap {min_gap:.3e})", vals, min_gap
            )
    return vals, z


def singular_values(a) -> np.ndarray:
    return np.linalg.svd(as_matrix(a), compute_uv=False)


def rank_with_tol(a, tol: Tolerance = DEFAULT_TOL) -> int:
    """Number of singular values above ``tol.rank_rel_eps`` times the largest."""
    s = singular_values(a)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.rank_rel_eps * s[0]))


def is_psd(a, tol: Tolerance = DEFAULT_TOL) -> bool:
    vals, _ = hermitian_eigen(a, tol)
    return bool(vals[0] >= -tol.abs_eps)


def min_eigenvalue(a, tol: Tolerance = DEFAULT_TOL) -> float:
    return float(hermitian_eigen(a, tol)[0][0])
