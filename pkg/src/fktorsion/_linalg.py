"""Dense linear-algebra kernels shared across the package.

The Hermitian eigensolver is a cyclic Jacobi iteration with a deterministic
sweep order, so repeated runs produce bit-identical spectra. numpy is used for
storage and BLAS-level products; the eigensolver itself does not call
numpy.linalg.eigh (that routine is reserved for independent cross-checks in
the test suite).
"""

from __future__ import annotations

import numpy as np

from .errors import EigensolverNotConverged

# Stop when the off-diagonal Frobenius norm drops below this multiple of ||A||.
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 60


def offdiag_norm(a: np.ndarray) -> float:
    b = a - np.diag(np.diagonal(a))
    return float(np.linalg.norm(b))


def jacobi_eigh(a: np.ndarray, tol: float = JACOBI_TOL):
    """Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, unitary eigenvector matrix). The sweep
    order is fixed (row-major over the strict upper triangle), each pivot is
    phase-rotated to be real before the classical 2x2 annihilation, and the
    iteration stops once the off-diagonal mass is below tol * ||A||.
    """
    a = np.array(a, dtype=complex)
    k = a.shape[0]
    if a.shape != (k, k):
        raise ValueError("jacobi_eigh expects a square matrix")
    v = np.eye(k, dtype=complex)
    if k <= 1:
        return np.diagonal(a).real.copy(), v
    norm_a = float(np.linalg.norm(a))
    if norm_a == 0.0:
        return np.zeros(k), v
    converged = False
    for _ in range(JACOBI_MAX_SWEEPS):
        if offdiag_norm(a) < tol * norm_a:
            converged = True
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = abs(a[p, q])
                if apq <= 1e-300:
                    continue
                phi = np.conj(a[p, q]) / apq  # makes the pivot real positive
                tau = (a[q, q].real - a[p, p].real) / (2.0 * apq)
                if abs(tau) > 1e12:
                    t = 1.0 / (2.0 * tau)
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = c * colp - s * phi * colq
                a[:, q] = s * colp + c * phi * colq
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = c * rowp - s * np.conj(phi) * rowq
                a[q, :] = s * rowp + c * np.conj(phi) * rowq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * phi * vq
                v[:, q] = s * vp + c * phi * vq
    else:
        converged = offdiag_norm(a) < tol * norm_a
    if not converged:
        raise EigensolverNotConverged(
            "jacobi sweep limit reached, off-diagonal norm %.3e" % offdiag_norm(a)
        )
    lam = np.diagonal(a).real.copy()
    order = np.argsort(lam, kind="stable")
    return lam[order], v[:, order]


def hermitian_function(a: np.ndarray, fn) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum."""
    lam, v = jacobi_eigh(a)
    return (v * fn(lam)) @ v.conj().T


def gram_schmidt(cols: np.ndarray, weight: np.ndarray | None = None) -> np.ndarray:
    """Orthonormalize the columns of `cols` by modified Gram-Schmidt.

    The inner product is <x, y> = y^H W x with W = weight (identity if None).
    Columns are assumed linearly independent; a vanishing norm raises.
    """
    k, m = cols.shape
    if m == 0:
        return np.zeros((k, 0), dtype=complex)
    out = np.zeros((k, m), dtype=complex)
    for j in range(m):
        x = cols[:, j].astype(complex)
        wx = x if weight is None else weight @ x
        scale = np.sqrt(abs(np.vdot(wx, x).real))
        for i in range(j):
            y = out[:, i]
            wy = y if weight is None else weight @ y
            x = x - y * (np.vdot(wy, x))
        wx = x if weight is None else weight @ x
        nrm = np.sqrt(abs(np.vdot(wx, x).real))
        if nrm <= 1e-10 * max(scale, 1e-300):
            raise ValueError("gram_schmidt received dependent columns")
        out[:, j] = x / nrm
    return out


def column_space(a: np.ndarray, rtol: float = 1e-11) -> np.ndarray:
    """Orthonormal basis of the column space, rank revealed by singular values."""
    if min(a.shape) == 0 or not np.any(a):
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a)
    rank = int(np.sum(s > rtol * s[0]))
    return u[:, :rank]


def null_space_of_columns(a: np.ndarray, rtol: float = 1e-11) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the column space."""
    k = a.shape[0]
    if min(a.shape) == 0 or not np.any(a):
        return np.eye(k, dtype=complex)
    u, s, _ = np.linalg.svd(a)
    rank = int(np.sum(s > rtol * s[0]))
    return u[:, rank:]


def smallest_singular_value(a: np.ndarray) -> float:
    if min(a.shape) == 0:
        return np.inf
    return float(np.linalg.svd(a, compute_uv=False)[-1])
