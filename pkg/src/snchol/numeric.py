"""Numeric phase: factor storage, update workspaces, the five factorization
methods and the supernodal triangular solves.

Methods
-------
ref   column-by-column left-looking algorithm with a length-n scatter vector;
      the oracle the supernodal methods are checked against
mf    multifrontal: postorder, children's update matrices popped off a stack,
      the first one extended in place into the square update matrix
ll    left-looking supernodal with an index map and one scratch update matrix
rl    right-looking: one square update matrix per supernode, assembled up the
      ancestor chain with composed relative indices
rlb   right-looking blocked: dense blocks updated straight into ancestor
      panels; no floating-point workspace, no assembly at all
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .kernels import (KernelBackend, NotPositiveDefiniteError, gemm_flops,
                      get_backend, potrf_flops, syrk_flops, trsm_flops)
from .matrix import (Permutation, SymmetricSparseMatrix, apply_symmetric_permutation,
                     minimum_degree_order)
from .symbolic import (BuildOptions, RelativeIndexMap, SymbolicFactor,
                       build_symbolic_factor, elimination_tree, symbolic_factorization)


class StructureError(ValueError):
    """A numeric entry does not fit the symbolic structure."""


class FactorStateError(RuntimeError):
    """Operation requires the factor storage in a different state."""


@dataclass
class RunStats:
    """Counters for one factorization run."""

    method: str
    backend: str
    n: int
    wall_seconds: float = 0.0
    calls: dict = field(default_factory=lambda: {"potrf": 0, "trsm": 0, "syrk": 0, "gemm": 0})
    flops: int = 0
    factor_nnz: int = 0
    panel_storage: int = 0
    workspace_peak: int = 0
    assembly_ops: int = 0
    update_calls_per_snode: np.ndarray = None

    def add(self, kind: str, flops: int) -> None:
        self.calls[kind] += 1
        self.flops += flops


class FactorStorage:
    """One dense column-major panel per supernode, concatenated in a single
    array.  Holds the scattered entries of A before factorization and the
    nonzeros of L afterwards."""

    def __init__(self, S: SymbolicFactor):
        self.S = S
        off = np.zeros(S.nsuper + 1, dtype=np.int64)
        for j in range(S.nsuper):
            off[j + 1] = off[j] + S.glbind(j).size * S.width(j)
        self.offsets = off
        self.data = np.zeros(int(off[-1]))
        self.state = "A"

    def panel(self, j: int) -> np.ndarray:
        S = self.S
        g = S.glbind(j).size
        a = S.width(j)
        return self.data[self.offsets[j]:self.offsets[j + 1]].reshape((g, a), order="F")

    def to_dense_lower(self) -> np.ndarray:
        """Dense lower-triangular image of the panels (tests and checks)."""
        S = self.S
        L = np.zeros((S.n, S.n))
        for j in range(S.nsuper):
            f = int(S.first_col[j])
            rows = S.glbind(j)
            P = self.panel(j)
            for c in range(S.width(j)):
                L[rows[c:], f + c] = P[c:, c]
        return L


def scatter_into_factor(A: SymmetricSparseMatrix, S: SymbolicFactor) -> FactorStorage:
    """Scatter A's lower triangle into fresh panels; all other slots are zero.

    A must already carry the full ordering the symbolic factor was built for.
    """
    if A.n != S.n:
        raise ValueError("matrix and symbolic factor dimensions differ")
    F = FactorStorage(S)
    for j in range(S.n):
        sj = int(S.col_to_snode[j])
        c = j - int(S.first_col[sj])
        g = S.glbind(sj)
        rows = A.pattern.col(j)
        pos = np.searchsorted(g, rows)
        ok = (pos < g.size) & (g[np.minimum(pos, g.size - 1)] == rows)
        if not ok.all():
            bad = int(rows[~ok][0])
            raise StructureError(f"entry ({bad},{j}) of A is outside the factor structure")
        F.panel(sj)[pos, c] = A.col_values(j)
    F.state = "A"
    return F


class UpdateWorkspace:
    """Floating-point arena sized by the symbolic plan plus an integer scratch
    vector.  The blocked right-looking method never has one."""

    def __init__(self, S: SymbolicFactor, method: str):
        words = {"mf": S.plans.mf_peak, "ll": S.plans.ll_peak, "rl": S.plans.rl_peak}[method]
        self.arena = np.zeros(int(words))
        self.int_scratch = np.zeros(S.n, dtype=np.int64)
        self.peak = 0

    def slab(self, rows: int, cols: int) -> np.ndarray:
        v = self.arena[:rows * cols].reshape((rows, cols), order="F")
        v[:] = 0.0
        self.peak = max(self.peak, rows * cols)
        return v


def _cdiv(F: FactorStorage, j: int, backend: KernelBackend, stats: RunStats) -> None:
    S = F.S
    a = S.width(j)
    m = S.mrows(j)
    panel = F.panel(j)
    T = panel[:a, :a]
    try:
        backend.chol(T)
    except NotPositiveDefiniteError as e:
        col = int(S.first_col[j]) + e.index
        raise NotPositiveDefiniteError(
            col, f"non-positive pivot at column {col} (supernode {j}, local {e.index})")
    stats.add("potrf", potrf_flops(a))
    if m:
        backend.trsm(T, panel[a:, :])
        stats.add("trsm", trsm_flops(m, a))


# ---------------------------------------------------------------------------
# Reference column algorithm.

def factor_reference(A: SymmetricSparseMatrix, glb: list, stats: RunStats = None):
    """Left-looking column factorization through a length-n scatter vector.

    ``glb`` holds the per-column factor row lists (diagonal first).  Returns
    the factor as (colptr, rowind, values) in CSC layout.
    """
    n = A.n
    if stats is None:
        stats = RunStats("ref", "none", n)
    updaters = [[] for _ in range(n)]
    for k in range(n):
        for j in glb[k][1:]:
            updaters[int(j)].append(k)
    colptr = np.zeros(n + 1, dtype=np.int64)
    for j in range(n):
        colptr[j + 1] = colptr[j] + glb[j].size
    rowind = np.concatenate(glb) if n else np.zeros(0, np.int64)
    values = np.zeros(int(colptr[-1]))
    t = np.zeros(n)
    for j in range(n):
        rows = glb[j]
        t[rows] = 0.0
        t[A.pattern.col(j)] = A.col_values(j)
        for k in updaters[j]:
            gk = glb[k]
            s = int(np.searchsorted(gk, j))
            seg = gk[s:]
            lv = values[colptr[k] + s:colptr[k + 1]]
            t[seg] -= lv * lv[0]
            stats.flops += 2 * seg.size
        col = t[rows]
        d = col[0]
        if not d > 0.0:
            raise NotPositiveDefiniteError(j, f"non-positive pivot at column {j}")
        d = np.sqrt(d)
        col[0] = d
        col[1:] /= d
        stats.flops += rows.size  # one sqrt + (len-1) divisions
        values[colptr[j]:colptr[j + 1]] = col
    stats.factor_nnz = int(colptr[-1])
    return colptr, rowind, values


def reference_to_dense(n: int, colptr, rowind, values) -> np.ndarray:
    L = np.zeros((n, n))
    for j in range(n):
        seg = slice(colptr[j], colptr[j + 1])
        L[rowind[seg], j] = values[seg]
    return L


# ---------------------------------------------------------------------------
# Multifrontal.

def _packed_col_offset(nrows: int, k: int) -> int:
    return k * nrows - k * (k - 1) // 2


def _extend_in_place(arena, src_off, nrows, dst_off, m, qpos) -> None:
    """Scatter a packed lower triangle over ``nrows`` rows into an m-by-m
    square at ``dst_off`` whose storage overlaps the packed source from its
    high end (dst_off + m*m == src_off + packed size).  All writes proceed in
    ascending address order; each packed column is staged through a copy, which
    together with the square/packed offset monotonicity makes the overlap safe.
    """
    prev = 0
    for k in range(qpos.size):
        q = int(qpos[k])
        if q > prev:
            arena[dst_off + prev * m:dst_off + q * m] = 0.0
        soff = src_off + _packed_col_offset(nrows, k)
        tmp = arena[soff:soff + nrows - k].copy()
        arena[dst_off + q * m:dst_off + (q + 1) * m] = 0.0
        arena[dst_off + q * m + qpos[k:]] = tmp
        prev = q + 1
    arena[dst_off + prev * m:dst_off + m * m] = 0.0


def _pack_descending(arena, sq_off, m, k, dst_off) -> None:
    """Pack the trailing (m-k) square lower triangle into a packed triangle at
    ``dst_off``; traversed in descending column order so an overlapping
    destination (push target inside the square) is safe."""
    c = m - k
    for t in range(c - 1, -1, -1):
        col = k + t
        tmp = arena[sq_off + col * m + col:sq_off + col * m + m].copy()
        toff = dst_off + _packed_col_offset(c, t)
        arena[toff:toff + c - t] = tmp


def factor_mf(F: FactorStorage, S: SymbolicFactor, R: RelativeIndexMap,
              W: UpdateWorkspace, backend: KernelBackend, stats: RunStats) -> None:
    if F.state != "A":
        raise FactorStateError("factor storage does not hold A")
    R.to_relative()
    try:
        _factor_mf_body(F, S, R, W, backend, stats)
    finally:
        R.to_global()
    F.state = "L"
    stats.workspace_peak = W.peak


def _factor_mf_body(F, S, R, W, backend, stats):
    cap = W.arena.size
    top = cap
    tags = []
    order = S.plans.mf_postorder
    position = np.empty(S.nsuper, dtype=np.int64)
    position[order] = np.arange(S.nsuper)
    push = S.plans.push_size
    peak = 0
    for j in (int(x) for x in order):
        a = S.width(j)
        m = S.mrows(j)
        pushers = sorted((c for c in S.snode_children[j] if push[c] > 0),
                         key=lambda c: position[c])
        sq = None
        sq_off = None
        if pushers:
            first = pushers[-1]
            snode, u_f = tags.pop()
            assert snode == first, "stack pop does not match postorder child"
            rel_c = R.rel(first)
            kc = int(np.count_nonzero(rel_c >= m))
            qpos = m - 1 - rel_c[kc:]
            sq_off = top + u_f - m * m
            # extension is a scatter-copy, not a scatter-add: no assembly count
            _extend_in_place(W.arena, top, qpos.size, sq_off, m, qpos)
            top += u_f
            peak = max(peak, cap - top + m * m)
            sq = W.arena[sq_off:sq_off + m * m].reshape((m, m), order="F")
            for c in reversed(pushers[:-1]):
                snode, u_c = tags.pop()
                assert snode == c, "stack pop does not match postorder child"
                rel = R.rel(c)
                kc = int(np.count_nonzero(rel >= m))
                qp = m - 1 - rel[kc:]
                nr = qp.size
                for t in range(nr):
                    soff = top + _packed_col_offset(nr, t)
                    sq[qp[t:], qp[t]] += W.arena[soff:soff + nr - t]
                stats.assembly_ops += u_c
                top += u_c
        elif m > 0:
            sq_off = top - m * m
            sq = W.arena[sq_off:sq_off + m * m].reshape((m, m), order="F")
            sq[:] = 0.0
            peak = max(peak, cap - top + m * m)
        _cdiv(F, j, backend, stats)
        if m == 0:
            # only roots have no rows below, and the stack must drain per root
            assert S.snode_parent[j] < 0 and not tags
            continue
        panel = F.panel(j)
        backend.syrk(sq, panel[a:, :])
        stats.add("syrk", syrk_flops(m, a))
        p = int(S.snode_parent[j])
        rel_j = R.rel(j)
        g_p = S.glbind(p).size
        m_p = S.mrows(p)
        k = int(np.count_nonzero(rel_j >= m_p))
        if k:
            pp = F.panel(p)
            pos = g_p - 1 - rel_j
            for t in range(k):
                pp[pos[t:], pos[t]] += sq[t:, t]
                stats.assembly_ops += m - t
        rest = m - k
        u_j = rest * (rest + 1) // 2
        assert u_j == push[j], "runtime push size disagrees with the plan"
        if u_j:
            newtop = top - u_j
            _pack_descending(W.arena, sq_off, m, k, newtop)
            top = newtop
            tags.append((j, u_j))
    assert not tags and top == cap, "update-matrix stack not empty at exit"
    W.peak = max(W.peak, peak)


# ---------------------------------------------------------------------------
# Left-looking supernodal.

def build_indmap(S: SymbolicFactor, j: int, indmap: np.ndarray) -> None:
    """Scatter supernode j's relative indices (distance from the bottom of its
    row list) into the length-n index map."""
    g = S.glbind(j)
    indmap[g] = g.size - 1 - np.arange(g.size, dtype=np.int64)


def factor_ll(F: FactorStorage, S: SymbolicFactor, W: UpdateWorkspace,
              backend: KernelBackend, stats: RunStats) -> None:
    if F.state != "A":
        raise FactorStateError("factor storage does not hold A")
    indmap = W.int_scratch
    for j in range(S.nsuper):
        f, l = S.cols(j)
        gj = S.glbind(j)
        lenj = gj.size
        build_indmap(S, j, indmap)
        pj = F.panel(j)
        for k in (int(x) for x in S.updaters[j]):
            gk = S.glbind(k)
            s0 = int(np.searchsorted(gk, f))
            rows = gk[s0:]
            r = rows.size
            c = int(np.searchsorted(rows, l, side="right"))
            d = indmap[rows]
            pos = lenj - 1 - d
            pk = F.panel(k)
            X = pk[s0:, :]
            if S.width(k) == 1:
                v = X[:, 0]
                for t in range(c):
                    pj[pos[t:], pos[t]] -= v[t:] * v[t]
                    stats.flops += 2 * (r - t)
                    stats.assembly_ops += r - t
                continue
            Y = X[:c, :]
            dense = (pos[:c].size <= 1 or pos[c - 1] - pos[0] == c - 1) and \
                    (pos[c:].size <= 1 or pos[-1] - pos[c] == r - c - 1)
            if dense:
                p0 = int(pos[0])
                backend.syrk(pj[p0:p0 + c, p0:p0 + c], Y)
                stats.add("syrk", syrk_flops(c, S.width(k)))
                if r > c:
                    p1 = int(pos[c])
                    backend.gemm(pj[p1:p1 + r - c, p0:p0 + c], X[c:, :], Y)
                    stats.add("gemm", gemm_flops(r - c, c, S.width(k)))
            else:
                U = W.slab(r, c)
                backend.syrk(U[:c, :c], Y)
                stats.add("syrk", syrk_flops(c, S.width(k)))
                if r > c:
                    backend.gemm(U[c:, :], X[c:, :], Y)
                    stats.add("gemm", gemm_flops(r - c, c, S.width(k)))
                for t in range(c):
                    pj[pos[t:], pos[t]] += U[t:, t]
                    stats.assembly_ops += r - t
        _cdiv(F, j, backend, stats)
    F.state = "L"
    stats.workspace_peak = W.peak


# ---------------------------------------------------------------------------
# Right-looking supernodal.

def factor_rl(F: FactorStorage, S: SymbolicFactor, R: RelativeIndexMap,
              W: UpdateWorkspace, backend: KernelBackend, stats: RunStats) -> None:
    if F.state != "A":
        raise FactorStateError("factor storage does not hold A")
    R.to_relative()
    try:
        for j in range(S.nsuper):
            a = S.width(j)
            m = S.mrows(j)
            _cdiv(F, j, backend, stats)
            if m == 0:
                continue
            U = W.slab(m, m)
            backend.syrk(U, F.panel(j)[a:, :])
            stats.add("syrk", syrk_flops(m, a))
            rel = W.int_scratch[:m]
            rel[:] = R.rel(j)
            k0 = 0
            C = j
            P = int(S.snode_parent[j])
            while k0 < m:
                assert P >= 0, "update rows left after the root"
                if C != j:
                    rc = R.rel(C)
                    rel[k0:] = rc[rc.size - 1 - rel[k0:]]
                g_p = S.glbind(P).size
                m_p = S.mrows(P)
                k = int(np.count_nonzero(rel[k0:] >= m_p))
                if k:
                    pp = F.panel(P)
                    pos = g_p - 1 - rel[k0:]
                    for t in range(k):
                        pp[pos[t:], pos[t]] += U[k0 + t:, k0 + t]
                        stats.assembly_ops += m - (k0 + t)
                    k0 += k
                C = P
                P = int(S.snode_parent[P])
    finally:
        R.to_global()
    F.state = "L"
    stats.workspace_peak = W.peak


# ---------------------------------------------------------------------------
# Right-looking blocked.

def factor_rlb(F: FactorStorage, S: SymbolicFactor, R: RelativeIndexMap,
               backend: KernelBackend, stats: RunStats) -> None:
    """Blocked right-looking factorization: every update is a dense kernel call
    straight into an ancestor panel.  No floating-point workspace exists and the
    assembly counter stays at zero by construction."""
    if F.state != "A":
        raise FactorStateError("factor storage does not hold A")
    stats.update_calls_per_snode = np.zeros(S.nsuper, dtype=np.int64)
    maxb = max((S.nblocks(j) for j in range(S.nsuper)), default=0)
    relB = np.zeros(maxb, dtype=np.int64)
    R.to_relative()
    try:
        for j in range(S.nsuper):
            a = S.width(j)
            _cdiv(F, j, backend, stats)
            nb = S.nblocks(j)
            if nb == 0:
                continue
            sizes = S.block_sizes[j]
            starts = S.block_starts[j]
            rel = R.rel(j)
            rb = relB[:nb]
            rb[:] = rel[starts]
            pj = F.panel(j)
            b0 = 0
            C = j
            P = int(S.snode_parent[j])
            while b0 < nb:
                assert P >= 0, "blocks left after the root"
                if C != j:
                    rc = R.rel(C)
                    rb[b0:] = rc[rc.size - 1 - rb[b0:]]
                g_p = S.glbind(P).size
                m_p = S.mrows(P)
                t = int(np.count_nonzero(rb[b0:] >= m_p))
                if t:
                    pp = F.panel(P)
                    for bi in range(b0, b0 + t):
                        dB = int(rb[bi])
                        sB = int(sizes[bi])
                        p0 = g_p - 1 - dB
                        XB = pj[a + starts[bi]:a + starts[bi] + sB, :]
                        backend.syrk(pp[p0:p0 + sB, p0:p0 + sB], XB)
                        stats.add("syrk", syrk_flops(sB, a))
                        stats.update_calls_per_snode[j] += 1
                        q = bi + 1
                        while q < nb:
                            run = int(sizes[q])
                            q2 = q + 1
                            while q2 < nb and rb[q2] == rb[q2 - 1] - sizes[q2 - 1]:
                                run += int(sizes[q2])
                                q2 += 1
                            p1 = g_p - 1 - int(rb[q])
                            XB2 = pj[a + starts[q]:a + starts[q] + run, :]
                            backend.gemm(pp[p1:p1 + run, p0:p0 + sB], XB2, XB)
                            stats.add("gemm", gemm_flops(run, sB, a))
                            stats.update_calls_per_snode[j] += 1
                            q = q2
                    b0 += t
                C = P
                P = int(S.snode_parent[P])
    finally:
        R.to_global()
    F.state = "L"
    stats.workspace_peak = 0


# ---------------------------------------------------------------------------
# Triangular solves.

def _solve_lower(T: np.ndarray, y: np.ndarray) -> None:
    for j in range(T.shape[0]):
        y[j] = (y[j] - T[j, :j] @ y[:j]) / T[j, j]


def _solve_lower_t(T: np.ndarray, y: np.ndarray) -> None:
    for j in range(T.shape[0] - 1, -1, -1):
        y[j] = (y[j] - T[j + 1:, j] @ y[j + 1:]) / T[j, j]


def solve(F: FactorStorage, S: SymbolicFactor, b: np.ndarray) -> np.ndarray:
    """Solve L L^T x = b with supernodal forward and backward substitution."""
    if F.state != "L":
        raise FactorStateError("factor storage does not hold L; factor first")
    if b.shape != (S.n,):
        raise ValueError("right-hand side has the wrong length")
    x = np.asarray(b, dtype=np.float64).copy()
    for j in range(S.nsuper):
        a = S.width(j)
        g = S.glbind(j)
        panel = F.panel(j)
        y = x[g[:a]]
        _solve_lower(panel[:a, :a], y)
        x[g[:a]] = y
        if g.size > a:
            x[g[a:]] -= panel[a:, :] @ y
    for j in range(S.nsuper - 1, -1, -1):
        a = S.width(j)
        g = S.glbind(j)
        panel = F.panel(j)
        y = x[g[:a]]
        if g.size > a:
            y -= panel[a:, :].T @ x[g[a:]]
        _solve_lower_t(panel[:a, :a], y)
        x[g[:a]] = y
    return x


# ---------------------------------------------------------------------------
# Driver.

METHODS = ("ref", "mf", "ll", "rl", "rlb")


@dataclass
class RunOptions:
    method: str = "rlb"
    backend: str = "reference"
    ordering: str = "mindeg"  # natural | mindeg | file:<path>
    pr: bool = True
    merge_cap: float | None = 12.5
    sibling_order: bool = True


@dataclass
class FactorizationResult:
    stats: RunStats
    A_factored: SymmetricSparseMatrix  # the permuted matrix the method saw
    perm_total: Permutation
    S: SymbolicFactor = None
    F: FactorStorage = None
    ref_factor: tuple = None  # (colptr, rowind, values) for method "ref"

    def dense_factor(self) -> np.ndarray:
        if self.F is not None:
            return self.F.to_dense_lower()
        return reference_to_dense(self.stats.n, *self.ref_factor)

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self.F is None:
            raise FactorStateError("solve is available for the supernodal methods")
        return solve(self.F, self.S, b)


def ordering_permutation(A: SymmetricSparseMatrix, spec: str) -> Permutation:
    if spec == "natural":
        return Permutation.identity(A.n)
    if spec == "mindeg":
        return minimum_degree_order(A.pattern)
    if spec.startswith("file:"):
        P = Permutation.from_file(spec[5:])
        if P.n != A.n:
            raise ValueError(f"permutation file is for n={P.n}, matrix has n={A.n}")
        return P
    raise ValueError(f"unknown ordering '{spec}'")


def run_factorization(A: SymmetricSparseMatrix, opts: RunOptions) -> FactorizationResult:
    """Order, analyze, scatter and factor A with the selected method.

    Only the numeric factorization is timed.  Raises
    NotPositiveDefiniteError on a bad pivot or a non-positive diagonal.
    """
    if opts.method not in METHODS:
        raise ValueError(f"unknown method '{opts.method}'")
    diag = A.diagonal()
    bad = np.flatnonzero(~(diag > 0.0))
    if bad.size:
        raise NotPositiveDefiniteError(int(bad[0]),
                                       f"diagonal entry {int(bad[0])} is not positive")
    backend = get_backend(opts.backend)
    p_order = ordering_permutation(A, opts.ordering)
    A1 = apply_symmetric_permutation(A, p_order)

    if opts.method == "ref":
        stats = RunStats("ref", "none", A.n)
        tree = elimination_tree(A1.pattern)
        glb = symbolic_factorization(A1.pattern, tree)
        t0 = time.perf_counter()
        ref = factor_reference(A1, glb, stats)
        stats.wall_seconds = time.perf_counter() - t0
        return FactorizationResult(stats, A1, p_order, ref_factor=ref)

    S = build_symbolic_factor(A1.pattern,
                              BuildOptions(opts.merge_cap, opts.pr, opts.sibling_order))
    A2 = apply_symmetric_permutation(A1, S.relabel)
    F = scatter_into_factor(A2, S)
    stats = RunStats(opts.method, backend.name, A.n,
                     factor_nnz=S.factor_nnz, panel_storage=S.panel_storage)
    R = RelativeIndexMap(S) if opts.method in ("mf", "rl", "rlb") else None
    W = UpdateWorkspace(S, opts.method) if opts.method in ("mf", "ll", "rl") else None
    t0 = time.perf_counter()
    if opts.method == "mf":
        factor_mf(F, S, R, W, backend, stats)
    elif opts.method == "ll":
        factor_ll(F, S, W, backend, stats)
    elif opts.method == "rl":
        factor_rl(F, S, R, W, backend, stats)
    else:
        factor_rlb(F, S, R, backend, stats)
    stats.wall_seconds = time.perf_counter() - t0
    return FactorizationResult(stats, A2, p_order.compose(S.relabel), S=S, F=F)


def deviation_from_reference(result: FactorizationResult) -> float:
    """Max-norm relative deviation of a supernodal factor from the column
    algorithm run on the same permuted matrix."""
    A2 = result.A_factored
    tree = elimination_tree(A2.pattern)
    glb = symbolic_factorization(A2.pattern, tree)
    ref = factor_reference(A2, glb)
    Lref = reference_to_dense(A2.n, *ref)
    Lgot = result.dense_factor()
    scale = max(1.0, float(np.abs(Lref).max(initial=0.0)))
    return float(np.abs(Lgot - Lref).max(initial=0.0)) / scale
