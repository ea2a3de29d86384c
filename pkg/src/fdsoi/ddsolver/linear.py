"""Sparse linear systems M X = b: Gauss-Seidel / SOR and a direct fallback."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class NumericalError(RuntimeError):
    """A linear or nonlinear solve failed to reach its tolerance."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


@dataclass
class LinearSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    x0: np.ndarray | None = None

    def __post_init__(self):
        self.matrix = sp.csr_matrix(self.matrix)
        self.rhs = np.asarray(self.rhs, dtype=float)
        n, m = self.matrix.shape
        if n != m or n != self.rhs.size:
            raise ValueError(f"shape mismatch: matrix {self.matrix.shape}, rhs {self.rhs.shape}")

    def residual(self, x: np.ndarray) -> float:
        """Relative residual ||M x - b|| / ||b||."""
        bnorm = np.linalg.norm(self.rhs)
        r = np.linalg.norm(self.matrix @ x - self.rhs)
        return r / bnorm if bnorm > 0 else r

    def is_diagonally_dominant(self, axis: str = "rows") -> bool:
        """Weak diagonal dominance by rows or by columns.

        Poisson matrices are symmetric; Scharfetter-Gummel continuity
        matrices are dominant by columns.
        """
        a = abs(self.matrix)
        diag = a.diagonal()
        if axis not in ("rows", "columns"):
            raise ValueError("axis must be 'rows' or 'columns'")
        off = np.asarray(a.sum(axis=1 if axis == "rows" else 0)).ravel() - diag
        return bool(np.all(diag >= off * (1 - 1e-12)))


@numba.njit(cache=True)
def _sor_sweeps(indptr, indices, data, b, x, omega, tol, max_iter, bnorm, history):
    n = b.size
    diag = np.zeros(n)
    for i in range(n):
        for k in range(indptr[i], indptr[i + 1]):
            if indices[k] == i:
                diag[i] += data[k]
    for i in range(n):
        if diag[i] == 0.0:
            return -1
    for it in range(max_iter):
        for i in range(n):
            s = b[i]
            for k in range(indptr[i], indptr[i + 1]):
                j = indices[k]
                if j != i:
                    s -= data[k] * x[j]
            x[i] = (1.0 - omega) * x[i] + omega * s / diag[i]
        r2 = 0.0
        for i in range(n):
            s = -b[i]
            for k in range(indptr[i], indptr[i + 1]):
                s += data[k] * x[indices[k]]
            r2 += s * s
        rel = np.sqrt(r2) / bnorm
        history[it] = rel
        if rel <= tol:
            return it + 1
    return max_iter + 1


def linear_solve(system: LinearSystem, tol: float = 1e-8, max_iter: int = 20000,
                 omega: float = 1.0) -> tuple[np.ndarray, int]:
    """Solve by successive over-relaxation; ``omega = 1`` is Gauss-Seidel.

    Returns ``(x, sweeps)``.  Raises :class:`NumericalError` if the relative
    residual has not dropped below ``tol`` after ``max_iter`` sweeps.
    """
    if not 0.0 < omega < 2.0:
        raise ValueError(f"omega={omega} outside (0, 2)")
    if not np.all(np.isfinite(system.rhs)):
        raise ValueError("non-finite right-hand side")
    m = system.matrix
    m.sort_indices()
    x = np.zeros_like(system.rhs) if system.x0 is None else np.array(system.x0, dtype=float)
    bnorm = float(np.linalg.norm(system.rhs))
    if bnorm == 0.0:
        bnorm = 1.0
    history = np.zeros(max_iter)
    sweeps = _sor_sweeps(
        m.indptr.astype(np.int64), m.indices.astype(np.int64), m.data.astype(float),
        system.rhs, x, float(omega), float(tol), int(max_iter), bnorm, history,
    )
    if sweeps < 0:
        raise NumericalError("zero diagonal entry; Gauss-Seidel undefined")
    if sweeps > max_iter:
        raise NumericalError(
            f"SOR did not reach tol={tol:g} in {max_iter} sweeps", residual=float(history[-1])
        )
    return x, sweeps


def sweep_history(system: LinearSystem, sweeps: int, omega: float = 1.0) -> np.ndarray:
    """Relative residual after each of ``sweeps`` SOR sweeps (no early exit)."""
    m = system.matrix
    m.sort_indices()
    x = np.zeros_like(system.rhs) if system.x0 is None else np.array(system.x0, dtype=float)
    bnorm = float(np.linalg.norm(system.rhs)) or 1.0
    history = np.zeros(sweeps)
    _sor_sweeps(m.indptr.astype(np.int64), m.indices.astype(np.int64), m.data.astype(float),
                system.rhs, x, float(omega), 0.0, sweeps, bnorm, history)
    return history


def direct_solve(system: LinearSystem) -> np.ndarray:
    """Sparse LU with diagonal pivoting.

    The systems assembled by the solver are M-matrices, for which elimination
    without row exchanges is stable and keeps every solution component
    positive when the right-hand side is non-negative.
    """
    try:
        lu = spla.splu(system.matrix.tocsc(), permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0)
    except RuntimeError as exc:
        raise NumericalError(f"singular system: {exc}") from exc
    x = lu.solve(system.rhs)
    if not np.all(np.isfinite(x)):
        raise NumericalError("direct solve produced non-finite values")
    return x


@numba.njit(cache=True)
def _gth_band(ab, excess, b, w):
    n = b.size
    a = ab.copy()
    s = excess.copy()
    y = b.copy()
    for k in range(n):
        hi = min(n, k + w + 1)
        d = s[k]
        for i in range(k + 1, hi):
            d -= a[i, w + k - i]
        if d <= 0.0:
            return np.full(n, np.nan)
        a[k, w] = d
        for j in range(k + 1, hi):
            akj = a[k, w + j - k]
            if akj == 0.0:
                continue
            f = akj / d
            s[j] -= f * s[k]
            for i in range(k + 1, hi):
                if i != j:
                    aik = a[i, w + k - i]
                    if aik != 0.0:
                        a[i, w + j - i] -= aik * f
        for i in range(k + 1, hi):
            y[i] -= a[i, w + k - i] / d * y[k]
    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        acc = y[k]
        for j in range(k + 1, min(n, k + w + 1)):
            acc -= a[k, w + j - k] * x[j]
        x[k] = acc / a[k, w]
    return x


def mmatrix_band_solve(matrix: sp.spmatrix, excess: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a column-diagonally-dominant M-matrix system without subtractive cancellation.

    ``excess[j]`` is the column sum of ``matrix`` (non-negative), supplied
    from the assembly terms rather than recomputed, so every pivot is formed
    as a sum of non-negative numbers.  The result keeps full componentwise
    relative accuracy however ill-conditioned the matrix, which matters for
    minority carriers behind large barriers.  Unknowns must be ordered so
    the matrix is banded; cost is O(n * bandwidth^2).
    """
    coo = sp.coo_matrix(matrix)
    if np.any(coo.data[coo.row != coo.col] > 0):
        raise NumericalError("positive off-diagonal entry: not an M-matrix")
    if np.any(excess < 0):
        raise NumericalError("negative column excess")
    n = matrix.shape[0]
    w = int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0
    ab = np.zeros((n, 2 * w + 1))
    np.add.at(ab, (coo.row, w + coo.col - coo.row), coo.data)
    x = _gth_band(ab, np.asarray(excess, dtype=float), np.asarray(rhs, dtype=float), w)
    if not np.all(np.isfinite(x)):
        raise NumericalError("singular M-matrix system")
    return x
