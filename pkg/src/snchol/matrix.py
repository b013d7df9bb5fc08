"""Symmetric sparse matrices in lower-triangle CSC form, Matrix Market I/O,
symmetric permutations, SPD test-matrix generation and a minimum degree ordering.

Indices are 0-based everywhere in memory; Matrix Market files and permutation
files use the conventional 1-based indexing.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np


class MatrixMarketError(ValueError):
    """Base class for Matrix Market parsing failures."""


class MatrixMarketHeaderError(MatrixMarketError):
    pass


class MatrixMarketSymmetryError(MatrixMarketError):
    pass


class MatrixMarketIndexError(MatrixMarketError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SymmetricSparsePattern:
    """Lower-triangle pattern of a symmetric matrix in compressed column form.

    Every column stores its diagonal first, followed by strictly ascending
    below-diagonal row indices.
    """

    n: int
    colptr: np.ndarray
    rowind: np.ndarray

    def __post_init__(self):
        colptr = _frozen(np.asarray(self.colptr, dtype=np.int64))
        rowind = _frozen(np.asarray(self.rowind, dtype=np.int64))
        object.__setattr__(self, "colptr", colptr)
        object.__setattr__(self, "rowind", rowind)
        if self.n < 0 or colptr.shape != (self.n + 1,):
            raise ValueError("colptr must have length n+1")
        if colptr[0] != 0 or np.any(np.diff(colptr) < 1):
            raise ValueError("colptr must start at 0 and be strictly increasing (diagonal required)")
        if colptr[-1] != rowind.size:
            raise ValueError("colptr[-1] must equal len(rowind)")
        for j in range(self.n):
            col = rowind[colptr[j]:colptr[j + 1]]
            if col[0] != j:
                raise ValueError(f"column {j} must store its diagonal first")
            if col.size > 1 and (np.any(np.diff(col) <= 0) or col[-1] >= self.n):
                raise ValueError(f"column {j} rows must be strictly ascending and < n")

    @property
    def nnz(self) -> int:
        return int(self.colptr[-1])

    def col(self, j: int) -> np.ndarray:
        return self.rowind[self.colptr[j]:self.colptr[j + 1]]

    @classmethod
    def from_columns(cls, n: int, cols: list) -> "SymmetricSparsePattern":
        """Build from per-column row lists; the diagonal is added if absent."""
        colptr = np.zeros(n + 1, dtype=np.int64)
        rows = []
        for j in range(n):
            c = np.unique(np.asarray(list(cols[j]) + [j], dtype=np.int64))
            if c[0] != j:
                raise ValueError(f"column {j} contains rows above the diagonal")
            rows.append(c)
            colptr[j + 1] = colptr[j] + c.size
        return cls(n, colptr, np.concatenate(rows) if rows else np.zeros(0, np.int64))

    def to_dense_bool(self) -> np.ndarray:
        """Dense symmetric boolean adjacency (tests and oracles only)."""
        B = np.zeros((self.n, self.n), dtype=bool)
        for j in range(self.n):
            c = self.col(j)
            B[c, j] = True
            B[j, c] = True
        return B


@dataclass(frozen=True)
class SymmetricSparseMatrix:
    """Pattern plus values; values align with ``pattern.rowind``.

    ``missing_diag`` flags columns whose diagonal was absent in the source file
    and was inserted as an explicit zero.  Positivity of the diagonal is only
    enforced when a factorization is started.
    """

    pattern: SymmetricSparsePattern
    values: np.ndarray
    missing_diag: np.ndarray = field(default=None)

    def __post_init__(self):
        vals = _frozen(np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "values", vals)
        if vals.size != self.pattern.nnz:
            raise ValueError("values length must match pattern nonzero count")
        md = self.missing_diag
        if md is None:
            md = np.zeros(self.pattern.n, dtype=bool)
        object.__setattr__(self, "missing_diag", _frozen(np.asarray(md, dtype=bool)))

    @property
    def n(self) -> int:
        return self.pattern.n

    def col_values(self, j: int) -> np.ndarray:
        p = self.pattern
        return self.values[p.colptr[j]:p.colptr[j + 1]]

    def diagonal(self) -> np.ndarray:
        return self.values[self.pattern.colptr[:-1]]

    def to_dense(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for j in range(self.n):
            rows = self.pattern.col(j)
            vals = self.col_values(j)
            A[rows, j] = vals
            A[j, rows] = vals
        return A


@dataclass(frozen=True)
class Permutation:
    """Bijection on {0..n-1}; ``perm[old] = new`` with the inverse kept alongside."""

    perm: np.ndarray
    inv: np.ndarray = field(default=None)

    def __post_init__(self):
        perm = _frozen(np.asarray(self.perm, dtype=np.int64))
        object.__setattr__(self, "perm", perm)
        n = perm.size
        if np.any(np.sort(perm) != np.arange(n)):
            raise ValueError("perm is not a bijection on {0..n-1}")
        inv = np.empty(n, dtype=np.int64)
        inv[perm] = np.arange(n)
        object.__setattr__(self, "inv", _frozen(inv))

    @property
    def n(self) -> int:
        return self.perm.size

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n, dtype=np.int64))

    def compose(self, then: "Permutation") -> "Permutation":
        """Permutation equal to applying ``self`` first, ``then`` second."""
        if then.n != self.n:
            raise ValueError("dimension mismatch in permutation composition")
        return Permutation(then.perm[self.perm])

    def inverse(self) -> "Permutation":
        return Permutation(self.inv)

    @classmethod
    def from_file(cls, path) -> "Permutation":
        new_pos = np.loadtxt(path, dtype=np.int64, ndmin=1)
        return cls(new_pos - 1)

    def to_file(self, path) -> None:
        np.savetxt(path, self.perm + 1, fmt="%d")


def read_matrix_market(path) -> SymmetricSparseMatrix:
    """Read a symmetric coordinate Matrix Market file into lower-triangle CSC.

    Upper-triangle entries are mirrored into the lower triangle, duplicates are
    summed, and absent diagonal entries are inserted as explicit zeros and
    flagged.  Pattern-only files get synthetic diagonally dominant values
    (off-diagonal -1, diagonal = degree + 1).
    """
    with open(path, "r") as fh:
        lines = fh.readlines()
    if not lines:
        raise MatrixMarketHeaderError("line 1: empty file")
    head = lines[0].split()
    if len(head) != 5 or head[0] != "%%MatrixMarket" or head[1].lower() != "matrix":
        raise MatrixMarketHeaderError("line 1: malformed MatrixMarket header")
    fmt, fieldkind, sym = (t.lower() for t in head[2:5])
    if fmt != "coordinate":
        raise MatrixMarketHeaderError("line 1: only coordinate format is supported")
    if fieldkind not in ("real", "integer", "pattern"):
        raise MatrixMarketHeaderError(f"line 1: unsupported field type '{fieldkind}'")
    if sym != "symmetric":
        raise MatrixMarketSymmetryError(f"line 1: matrix declared '{sym}', expected symmetric")
    pattern_only = fieldkind == "pattern"

    lineno = 1
    k = 1
    while k < len(lines) and (lines[k].startswith("%") or not lines[k].strip()):
        k += 1
    if k >= len(lines):
        raise MatrixMarketHeaderError(f"line {k}: missing size line")
    lineno = k + 1
    toks = lines[k].split()
    if len(toks) != 3:
        raise MatrixMarketHeaderError(f"line {lineno}: size line must have 3 integers")
    try:
        nrows, ncols, nent = (int(t) for t in toks)
    except ValueError:
        raise MatrixMarketHeaderError(f"line {lineno}: size line must have 3 integers")
    if nrows != ncols:
        raise MatrixMarketSymmetryError(f"line {lineno}: matrix is {nrows}x{ncols}, not square")
    n = nrows

    ii = np.empty(nent, dtype=np.int64)
    jj = np.empty(nent, dtype=np.int64)
    vv = np.empty(nent, dtype=np.float64)
    want = 3 if not pattern_only else 2
    m = 0
    for off, line in enumerate(lines[k + 1:]):
        lineno = k + 2 + off
        if line.startswith("%") or not line.strip():
            continue
        toks = line.split()
        if len(toks) < want:
            raise MatrixMarketError(f"line {lineno}: expected {want} fields, got {len(toks)}")
        if m >= nent:
            raise MatrixMarketError(f"line {lineno}: more entries than declared ({nent})")
        try:
            i = int(toks[0])
            j = int(toks[1])
            v = 1.0 if pattern_only else float(toks[2])
        except ValueError:
            raise MatrixMarketError(f"line {lineno}: malformed entry")
        if not (1 <= i <= n and 1 <= j <= n):
            raise MatrixMarketIndexError(f"line {lineno}: index ({i},{j}) out of range for n={n}")
        # mirror explicit upper entries into the lower triangle
        ii[m], jj[m] = (i - 1, j - 1) if i >= j else (j - 1, i - 1)
        vv[m] = v
        m += 1
    if m != nent:
        raise MatrixMarketError(f"line {lineno}: {m} entries read, {nent} declared")

    return _assemble_lower(n, ii[:m], jj[:m], vv[:m], pattern_only)


def _assemble_lower(n, ii, jj, vv, pattern_only) -> SymmetricSparseMatrix:
    order = np.lexsort((ii, jj))
    ii, jj, vv = ii[order], jj[order], vv[order]
    # sum duplicates
    if ii.size:
        keep = np.concatenate([[True], (np.diff(ii) != 0) | (np.diff(jj) != 0)])
        idx = np.flatnonzero(keep)
        sums = np.add.reduceat(vv, idx) if vv.size else vv
        ii, jj, vv = ii[idx], jj[idx], sums

    missing = np.ones(n, dtype=bool)
    diag_mask = ii == jj
    missing[jj[diag_mask]] = False
    if np.any(missing):
        add = np.flatnonzero(missing)
        ii = np.concatenate([ii, add])
        jj = np.concatenate([jj, add])
        vv = np.concatenate([vv, np.zeros(add.size)])
        order = np.lexsort((ii, jj))
        ii, jj, vv = ii[order], jj[order], vv[order]

    if pattern_only:
        deg = np.zeros(n, dtype=np.int64)
        off = ii != jj
        np.add.at(deg, ii[off], 1)
        np.add.at(deg, jj[off], 1)
        vv = np.where(ii == jj, deg[ii] + 1.0, -1.0)
        missing = np.zeros(n, dtype=bool)  # synthesized values leave no zero diagonals

    colptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(colptr, jj + 1, 1)
    np.cumsum(colptr, out=colptr)
    pat = SymmetricSparsePattern(n, colptr, ii)
    return SymmetricSparseMatrix(pat, vv, missing)


def write_matrix_market(path, A: SymmetricSparseMatrix) -> None:
    """Write the lower triangle as coordinate real symmetric, full precision."""
    p = A.pattern
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
        fh.write(f"{p.n} {p.n} {p.nnz}\n")
        for j in range(p.n):
            rows = p.col(j)
            vals = A.col_values(j)
            for i, v in zip(rows, vals):
                fh.write(f"{i + 1} {j + 1} {v:.17g}\n")


def apply_symmetric_permutation(A: SymmetricSparseMatrix, P: Permutation) -> SymmetricSparseMatrix:
    """Return PAP^T in lower-triangle CSC form; nonzero count is unchanged."""
    pat = A.pattern
    if P.n != pat.n:
        raise ValueError(f"permutation is on {P.n} indices, matrix is {pat.n}x{pat.n}")
    counts = np.diff(pat.colptr)
    old_j = np.repeat(np.arange(pat.n, dtype=np.int64), counts)
    ni = P.perm[pat.rowind]
    nj = P.perm[old_j]
    lo = np.minimum(ni, nj)
    hi = np.maximum(ni, nj)
    order = np.lexsort((hi, lo))
    colptr = np.zeros(pat.n + 1, dtype=np.int64)
    np.add.at(colptr, lo + 1, 1)
    np.cumsum(colptr, out=colptr)
    newpat = SymmetricSparsePattern(pat.n, colptr, hi[order])
    return SymmetricSparseMatrix(newpat, A.values[order], A.missing_diag[P.inv])


def generate_spd(n: int, density: float, seed: int) -> SymmetricSparseMatrix:
    """Random symmetric diagonally dominant (hence SPD) matrix, deterministic in seed.

    ``density`` is the filled fraction of the strictly-lower triangle; the
    diagonal is 1 plus the absolute off-diagonal row sum.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 < density <= 1.0):
        raise ValueError("density must be in (0, 1]")
    rng = np.random.default_rng(seed)
    ti, tj = np.tril_indices(n, -1)
    k = int(round(density * ti.size))
    if k > 0:
        pick = np.sort(rng.choice(ti.size, size=k, replace=False))
        oi, oj = ti[pick], tj[pick]
        ov = rng.uniform(-1.0, 1.0, size=k)
    else:
        oi = oj = np.zeros(0, dtype=np.int64)
        ov = np.zeros(0)
    rowsum = np.zeros(n)
    np.add.at(rowsum, oi, np.abs(ov))
    np.add.at(rowsum, oj, np.abs(ov))
    dd = np.arange(n, dtype=np.int64)
    ii = np.concatenate([oi, dd])
    jj = np.concatenate([oj, dd])
    vv = np.concatenate([ov, 1.0 + rowsum])
    return _assemble_lower(n, ii, jj, vv, pattern_only=False)


def minimum_degree_order(pattern: SymmetricSparsePattern) -> Permutation:
    """Greedy minimum external degree ordering, ties broken by smallest index.

    Uses explicit clique formation on elimination; fine at the problem sizes
    this package targets.
    """
    n = pattern.n
    adj = [set() for _ in range(n)]
    for j in range(n):
        for i in pattern.col(j)[1:]:
            adj[int(i)].add(j)
            adj[j].add(int(i))
    alive = np.ones(n, dtype=bool)
    perm = np.empty(n, dtype=np.int64)
    heap = [(len(adj[v]), v) for v in range(n)]
    heapq.heapify(heap)
    for step in range(n):
        while True:
            d, v = heapq.heappop(heap)
            if alive[v] and d == len(adj[v]):
                break
        alive[v] = False
        perm[v] = step
        nbrs = adj[v]
        for u in nbrs:
            adj[u].discard(v)
        for u in nbrs:
            grow = nbrs - adj[u]
            grow.discard(u)
            if grow:
                adj[u] |= grow
            heapq.heappush(heap, (len(adj[u]), u))
        adj[v] = set()
    return Permutation(perm)
