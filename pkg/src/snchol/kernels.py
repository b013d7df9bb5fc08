"""Dense kernels behind the supernodal factorizations: in-place Cholesky of a
triangle, right triangular solve against a panel, symmetric rank-k downdate and
rectangular multiply-accumulate.

All four operate on column-major views into supernode panels and only ever
subtract products (every update in the factorizations has that sign).  The
reference backend is plain numpy; the vendor backend routes the same contracts
through BLAS/LAPACK via scipy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class NotPositiveDefiniteError(ArithmeticError):
    """Raised when a pivot is not strictly positive; ``index`` is the pivot position."""

    def __init__(self, index: int, detail: str = ""):
        self.index = int(index)
        super().__init__(detail or f"non-positive pivot at index {index}")


@dataclass(frozen=True)
class PanelView:
    """Rectangular window into a column-major panel.

    ``panel`` is the full 2-D array (its leading dimension is the row count of
    the allocation); the window is ``rows`` x ``cols`` starting at
    (``row_off``, ``col_off``).
    """

    panel: np.ndarray
    row_off: int = 0
    col_off: int = 0
    rows: int = None
    cols: int = None

    def __post_init__(self):
        if self.panel.ndim != 2:
            raise ValueError("panel must be 2-D")
        r = self.panel.shape[0] - self.row_off if self.rows is None else self.rows
        c = self.panel.shape[1] - self.col_off if self.cols is None else self.cols
        object.__setattr__(self, "rows", int(r))
        object.__setattr__(self, "cols", int(c))
        if self.row_off < 0 or self.col_off < 0 or self.rows < 0 or self.cols < 0:
            raise ValueError("negative offset or extent")
        if self.row_off + self.rows > self.panel.shape[0] or self.col_off + self.cols > self.panel.shape[1]:
            raise ValueError("view exceeds the underlying panel")

    @property
    def a(self) -> np.ndarray:
        return self.panel[self.row_off:self.row_off + self.rows,
                          self.col_off:self.col_off + self.cols]


def _arr(x) -> np.ndarray:
    return x.a if isinstance(x, PanelView) else x


def chol_in_place(T) -> None:
    """Overwrite the lower triangle of square T with its Cholesky factor.

    The strict upper triangle is neither read nor written.  Raises
    NotPositiveDefiniteError carrying the failing pivot index.
    """
    T = _arr(T)
    m = T.shape[0]
    if T.shape[1] != m:
        raise ValueError("chol_in_place needs a square view")
    for j in range(m):
        d = T[j, j] - T[j, :j] @ T[j, :j]
        if not d > 0.0:
            raise NotPositiveDefiniteError(j)
        d = np.sqrt(d)
        T[j, j] = d
        if j + 1 < m:
            T[j + 1:, j] = (T[j + 1:, j] - T[j + 1:, :j] @ T[j, :j]) / d


def trsm_right_lt(T, B) -> None:
    """B <- B * T^{-T} for a lower-triangular factor T (completes panel columns)."""
    T = _arr(T)
    B = _arr(B)
    m = T.shape[0]
    if T.shape[1] != m or B.shape[1] != m:
        raise ValueError("shape mismatch in trsm_right_lt")
    for j in range(m):
        d = T[j, j]
        if d == 0.0:
            raise ValueError(f"zero diagonal at index {j} in triangular solve")
        B[:, j] = (B[:, j] - B[:, :j] @ T[j, :j]) / d


def syrk_lower(C, X) -> None:
    """Lower triangle of C <- C - X X^T; the strict upper triangle is untouched."""
    C = _arr(C)
    X = _arr(X)
    m = C.shape[0]
    if C.shape[1] != m or X.shape[0] != m:
        raise ValueError("shape mismatch in syrk_lower")
    if X.shape[1] == 0:
        return
    for j in range(m):
        C[j:, j] -= X[j:, :] @ X[j, :]


def gemm_nt(C, X, Y) -> None:
    """C <- C - X Y^T over the full rectangle."""
    C = _arr(C)
    X = _arr(X)
    Y = _arr(Y)
    if X.shape[1] != Y.shape[1] or C.shape[0] != X.shape[0] or C.shape[1] != Y.shape[0]:
        raise ValueError("shape mismatch in gemm_nt")
    if X.shape[1] == 0:
        return
    C -= X @ Y.T


@dataclass(frozen=True)
class KernelBackend:
    """Function table for the four kernels plus a name tag for reporting."""

    name: str
    chol: Callable
    trsm: Callable
    syrk: Callable
    gemm: Callable


REFERENCE_BACKEND = KernelBackend("reference", chol_in_place, trsm_right_lt, syrk_lower, gemm_nt)


def vendor_backend() -> KernelBackend:
    """LAPACK/BLAS-backed kernels (scipy).  Views are strided, so data is staged
    through contiguous copies; the flops run inside the vendor library."""
    from scipy.linalg import blas, lapack

    def chol(T):
        T = _arr(T)
        m = T.shape[0]
        if m == 0:
            return
        a, info = lapack.dpotrf(np.asfortranarray(T), lower=1, overwrite_a=1)
        if info > 0:
            raise NotPositiveDefiniteError(info - 1)
        if info < 0:
            raise ValueError(f"dpotrf: illegal argument {-info}")
        il = np.tril_indices(m)
        T[il] = a[il]

    def trsm(T, B):
        T = _arr(T)
        B = _arr(B)
        if T.shape[0] == 0 or B.shape[0] == 0:
            return
        if np.any(np.diagonal(T) == 0.0):
            raise ValueError("zero diagonal in triangular solve")
        out = blas.dtrsm(1.0, np.asfortranarray(T), np.asfortranarray(B),
                         side=1, lower=1, trans_a=1, overwrite_b=1)
        B[:, :] = out

    def syrk(C, X):
        C = _arr(C)
        X = _arr(X)
        m = C.shape[0]
        if m == 0 or X.shape[1] == 0:
            return
        out = blas.dsyrk(-1.0, np.asfortranarray(X), beta=1.0,
                         c=np.asfortranarray(C), lower=1, overwrite_c=1)
        il = np.tril_indices(m)
        C[il] = out[il]

    def gemm(C, X, Y):
        C = _arr(C)
        X = _arr(X)
        Y = _arr(Y)
        if min(C.shape) == 0 or X.shape[1] == 0:
            return
        out = blas.dgemm(-1.0, np.asfortranarray(X), np.asfortranarray(Y),
                         beta=1.0, c=np.asfortranarray(C), trans_b=1, overwrite_c=1)
        C[:, :] = out

    return KernelBackend("vendor", chol, trsm, syrk, gemm)


def get_backend(name: str) -> KernelBackend:
    if name == "reference":
        return REFERENCE_BACKEND
    if name == "vendor":
        return vendor_backend()
    raise ValueError(f"unknown kernel backend '{name}' (choose reference or vendor)")


# Flop model shared by runtime counters and symbolic work predictions:
# multiply-add = 2, division = 1, square root = 1.

def potrf_flops(m: int) -> int:
    return m + m * (m - 1) // 2 + (m - 1) * m * (m + 1) // 3


def trsm_flops(rows: int, m: int) -> int:
    return rows * m * m


def syrk_flops(m: int, k: int) -> int:
    return k * m * (m + 1)


def gemm_flops(rows: int, cols: int, k: int) -> int:
    return 2 * rows * cols * k
