"""Symbolic analysis for supernodal sparse Cholesky.

Everything that can be computed from the pattern alone: the elimination tree,
per-column factor structure, fundamental supernodes, supernode merging under a
storage-growth cap, a stack-minimizing sibling order for the multifrontal
schedule, per-supernode row lists and dense-block lists, relative indices, and
workspace size plans for each factorization method.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .kernels import potrf_flops, syrk_flops, trsm_flops
from .matrix import Permutation, SymmetricSparseMatrix, SymmetricSparsePattern, apply_symmetric_permutation


@dataclass(frozen=True)
class EliminationTree:
    """Column elimination forest: parent[j] = -1 marks a root."""

    parent: np.ndarray
    children: tuple
    postorder: np.ndarray

    @property
    def n(self) -> int:
        return self.parent.size


def elimination_tree(pattern: SymmetricSparsePattern) -> EliminationTree:
    """Column elimination tree via path-compressed ancestor links, without
    forming the factor."""
    n = pattern.n
    counts = np.diff(pattern.colptr)
    cols = np.repeat(np.arange(n, dtype=np.int64), counts)
    offd = pattern.rowind != cols
    r = pattern.rowind[offd]
    c = cols[offd]
    order = np.argsort(r, kind="stable")
    r, c = r[order], c[order]
    rptr = np.searchsorted(r, np.arange(n + 1))

    parent = np.full(n, -1, dtype=np.int64)
    anc = np.full(n, -1, dtype=np.int64)
    for j in range(n):
        for k in range(rptr[j], rptr[j + 1]):
            i = int(c[k])
            while anc[i] != -1 and anc[i] != j:
                t = anc[i]
                anc[i] = j
                i = t
            if anc[i] == -1:
                anc[i] = j
                parent[i] = j
    children = _children_lists(parent)
    return EliminationTree(parent, children, _postorder_forest(parent, children))


def _children_lists(parent: np.ndarray) -> tuple:
    kids = [[] for _ in range(parent.size)]
    for j, p in enumerate(parent):
        if p >= 0:
            kids[p].append(j)
    return tuple(tuple(k) for k in kids)


def _postorder_forest(parent, children, child_order=None) -> np.ndarray:
    n = len(parent)
    out = np.empty(n, dtype=np.int64)
    pos = 0
    roots = [j for j in range(n) if parent[j] == -1]
    for root in roots:
        stack = [(root, 0)]
        while stack:
            v, ci = stack[-1]
            kids = children[v] if child_order is None else child_order[v]
            if ci < len(kids):
                stack[-1] = (v, ci + 1)
                stack.append((kids[ci], 0))
            else:
                stack.pop()
                out[pos] = v
                pos += 1
    return out


def symbolic_factorization(pattern: SymmetricSparsePattern, tree: EliminationTree) -> list:
    """Per-column factor row lists: glb[j] lists the rows of column j of L,
    ascending, diagonal first.  Quadratic-in-structure merge over children."""
    n = pattern.n
    glb = [None] * n
    for j in range(n):
        pieces = [pattern.col(j)]
        pieces.extend(glb[c][1:] for c in tree.children[j])
        glb[j] = np.unique(np.concatenate(pieces)) if len(pieces) > 1 else pattern.col(j).copy()
    return glb


@dataclass(frozen=True)
class SupernodePartition:
    """Partition of the columns into consecutive intervals."""

    first_col: np.ndarray  # length nsuper+1, sentinel n at the end
    col_to_snode: np.ndarray

    @property
    def nsuper(self) -> int:
        return self.first_col.size - 1

    @classmethod
    def from_firsts(cls, n: int, firsts: list) -> "SupernodePartition":
        fc = np.asarray(list(firsts) + [n], dtype=np.int64)
        c2s = np.zeros(n, dtype=np.int64)
        for s in range(fc.size - 1):
            c2s[fc[s]:fc[s + 1]] = s
        return cls(fc, c2s)


def fundamental_supernodes(tree: EliminationTree, glb: list) -> SupernodePartition:
    """Maximal runs where each column's below-structure equals the next column's
    structure and the next column has exactly one child."""
    n = tree.n
    nchild = np.zeros(n, dtype=np.int64)
    for j in range(n):
        if tree.parent[j] >= 0:
            nchild[tree.parent[j]] += 1
    firsts = [0] if n else []
    for j in range(1, n):
        joined = (tree.parent[j - 1] == j and nchild[j] == 1
                  and glb[j - 1].size == glb[j].size + 1)
        if not joined:
            firsts.append(j)
    return SupernodePartition.from_firsts(n, firsts)


def _trap_nnz(a: int, g: int) -> int:
    return a * g - a * (a - 1) // 2


def _work_flops(a: int, m: int) -> int:
    return potrf_flops(a) + trsm_flops(m, a) + syrk_flops(m, a)


@dataclass(frozen=True)
class MergeStats:
    nsuper_before: int
    nsuper_after: int
    nnz_before: int
    nnz_after: int
    work_before: int
    work_after: int
    merges: int


@dataclass(frozen=True)
class MergeResult:
    """Coarsened partition on relabeled columns.

    Merging a non-adjacent child into its parent is only representable after a
    relabeling, so the result carries the old-to-new column permutation along
    with the relabeled supernode structure.
    """

    partition: SupernodePartition
    relabel: Permutation
    snode_parent: np.ndarray
    glbind: list
    stats: MergeStats


def merge_supernodes(partition: SupernodePartition, tree: EliminationTree,
                     glb: list, cap: float | None) -> MergeResult:
    """Greedily merge child-parent supernode pairs, cheapest new fill first.

    The candidate cost is the true growth in factor nonzeros: the child's
    columns adopt the parent's row structure, so merging child C into parent P
    adds |C| * (|glbind(P)| - |below(C)|) entries.  Merging stops before the
    merge that would push cumulative growth above ``cap`` percent of the
    unmerged factor nonzero count; ``cap=None`` disables merging entirely.
    """
    n = tree.n
    ns = partition.nsuper
    fc = partition.first_col
    ncols = [int(fc[s + 1] - fc[s]) for s in range(ns)]
    cols = [np.arange(fc[s], fc[s + 1], dtype=np.int64) for s in range(ns)]
    below = [glb[fc[s]][ncols[s]:].copy() for s in range(ns)]
    parent = np.full(ns, -1, dtype=np.int64)
    for s in range(ns):
        if below[s].size:
            parent[s] = partition.col_to_snode[below[s][0]]
    children = [[] for _ in range(ns)]
    for s in range(ns):
        if parent[s] >= 0:
            children[parent[s]].append(s)
    alive = np.ones(ns, dtype=bool)

    nnz_before = sum(_trap_nnz(ncols[s], ncols[s] + below[s].size) for s in range(ns))
    work_before = sum(_work_flops(ncols[s], below[s].size) for s in range(ns))
    merges = 0
    grown = 0

    def delta_of(c: int) -> int:
        p = parent[c]
        g_p = ncols[p] + below[p].size
        return ncols[c] * (g_p - below[c].size)

    if cap is not None:
        allowed = nnz_before * cap / 100.0
        heap = [(delta_of(s), int(cols[s][0]), s) for s in range(ns) if parent[s] >= 0]
        heapq.heapify(heap)
        while heap:
            d, f, c = heapq.heappop(heap)
            if not alive[c] or parent[c] < 0:
                continue
            cur = (delta_of(c), int(cols[c][0]))
            if cur != (d, f):
                heapq.heappush(heap, (cur[0], cur[1], c))
                continue
            if grown + d > allowed:
                break
            p = parent[c]
            cols[p] = np.sort(np.concatenate([cols[c], cols[p]]))
            ncols[p] += ncols[c]
            children[p].remove(c)
            for g in children[c]:
                parent[g] = p
            children[p].extend(children[c])
            children[c] = []
            alive[c] = False
            grown += d
            merges += 1

    # Relabel columns by a postorder of the merged tree; within a merged
    # supernode the original (topological) column order is kept.
    live = np.flatnonzero(alive)
    order_key = {int(s): int(cols[s][0]) for s in live}
    kids_sorted = {int(s): sorted(children[s], key=lambda t: order_key[t]) for s in live}
    roots = sorted((int(s) for s in live if parent[s] < 0), key=lambda t: order_key[t])
    post = []
    for root in roots:
        stack = [(root, 0)]
        while stack:
            v, ci = stack[-1]
            kids = kids_sorted[v]
            if ci < len(kids):
                stack[-1] = (v, ci + 1)
                stack.append((kids[ci], 0))
            else:
                stack.pop()
                post.append(v)
    perm = np.empty(n, dtype=np.int64)
    firsts = []
    snode_at = {}
    nxt = 0
    for s in post:
        snode_at[s] = len(firsts)
        firsts.append(nxt)
        perm[cols[s]] = np.arange(nxt, nxt + ncols[s])
        nxt += ncols[s]
    relabel = Permutation(perm)
    new_parent = np.array(
        [snode_at[int(parent[s])] if parent[s] >= 0 else -1 for s in post], dtype=np.int64)
    new_glb = []
    for s in post:
        own = np.arange(firsts[snode_at[s]], firsts[snode_at[s]] + ncols[s], dtype=np.int64)
        new_glb.append(np.concatenate([own, np.sort(perm[below[s]])]))
    nnz_after = sum(_trap_nnz(ncols[s], ncols[s] + below[s].size) for s in post)
    work_after = sum(_work_flops(ncols[s], below[s].size) for s in post)
    stats = MergeStats(ns, len(post), nnz_before, nnz_after, work_before, work_after, merges)
    return MergeResult(SupernodePartition.from_firsts(n, firsts), relabel,
                       new_parent, new_glb, stats)


# ---------------------------------------------------------------------------
# Multifrontal stack simulation and sibling ordering.

def _eval_stack(order, speak, push, square) -> int:
    """Peak stack usage (in floats) while processing one node's children in
    ``order`` and then overlaying the node's square update matrix in place over
    the last-pushed child."""
    run = 0
    peak = 0
    last_push = 0
    for c in order:
        peak = max(peak, run + speak[c])
        run += push[c]
        if push[c] > 0:
            last_push = push[c]
    return max(peak, run - last_push + square)


def stack_minimizing_postorder(snode_parent: np.ndarray, square_size: np.ndarray,
                               push_size: np.ndarray, enabled: bool = True):
    """Postorder of the supernodal tree whose sibling order minimizes the
    update-matrix stack peak.

    Children are ordered by decreasing (subtree peak - retained size), Liu's
    rule for the classical stack recurrence; because the square update matrix
    is built in place over the first-popped (= last-pushed) child, the choice
    of last-pushed child also matters, so every candidate last child is
    evaluated exactly.  Returns (postorder, predicted peak).
    """
    ns = snode_parent.size
    children = [[] for _ in range(ns)]
    for s in range(ns):
        if snode_parent[s] >= 0:
            children[snode_parent[s]].append(s)
    speak = np.zeros(ns, dtype=np.int64)
    chosen = [None] * ns
    for j in range(ns):  # ids ascend toward the roots, so children come first
        kids = children[j]
        sq = int(square_size[j])
        if not kids:
            speak[j] = sq
            chosen[j] = ()
            continue
        if not enabled:
            order = sorted(kids)
            speak[j] = _eval_stack(order, speak, push_size, sq)
            chosen[j] = tuple(order)
            continue
        base = sorted(kids, key=lambda c: (-(int(speak[c]) - int(push_size[c])), c))
        best = tuple(base)
        best_peak = _eval_stack(base, speak, push_size, sq)
        for lp in (c for c in base if push_size[c] > 0):
            cand = [c for c in base if c != lp] + [lp]
            p = _eval_stack(cand, speak, push_size, sq)
            if p < best_peak:
                best, best_peak = tuple(cand), p
        speak[j] = best_peak
        chosen[j] = best
    peak = 0
    for s in range(ns):
        if snode_parent[s] < 0:
            peak = max(peak, int(speak[s]))
    post = _postorder_forest(snode_parent, None, child_order=chosen)
    return post, peak


# ---------------------------------------------------------------------------
# Relative indices.

class IndexModeError(RuntimeError):
    """Raised when a relative/global transformation is applied in the wrong mode."""


def compose_relative(rel_jc: np.ndarray, rel_cp: np.ndarray) -> np.ndarray:
    """Relative indices against a grandparent: gather each distance through the
    intermediate list.  Entry d becomes rel_cp[len(rel_cp) - 1 - d]."""
    rel_jc = np.asarray(rel_jc)
    if rel_jc.size and (rel_jc.min() < 0 or rel_jc.max() >= rel_cp.size):
        raise ValueError("relative index out of range for the intermediate list")
    return rel_cp[rel_cp.size - 1 - rel_jc]


def extract_block_relind(rel: np.ndarray, block_sizes) -> np.ndarray:
    """One relative index per block: the entry of each block's first row."""
    sizes = np.asarray(block_sizes, dtype=np.int64)
    if sizes.sum() != rel.size:
        raise ValueError("block sizes do not partition the relative index list")
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    return np.asarray(rel)[starts]


class RelativeIndexMap:
    """Per-supernode shared-row lists against the parent, transformable in
    place between global row numbers and distance-from-bottom relative indices.

    One factorization owns the map for its duration; the mode flag guards
    against double transformation.
    """

    def __init__(self, S: "SymbolicFactor"):
        self._S = S
        self.lists = [S.below(j).copy() for j in range(S.nsuper)]
        self.mode = "global"

    def rel(self, j: int) -> np.ndarray:
        return self.lists[j]

    def to_relative(self) -> None:
        if self.mode != "global":
            raise IndexModeError("map is already in relative mode")
        S = self._S
        for j in range(S.nsuper):
            p = S.snode_parent[j]
            if p < 0:
                continue
            pg = S.glbind(p)
            pos = np.searchsorted(pg, self.lists[j])
            if pos.size and not np.array_equal(pg[pos], self.lists[j]):
                raise ValueError(f"row of supernode {j} missing from parent structure")
            self.lists[j] = pg.size - 1 - pos
        self.mode = "relative"

    def to_global(self) -> None:
        if self.mode != "relative":
            raise IndexModeError("map is already in global mode")
        S = self._S
        for j in range(S.nsuper):
            p = S.snode_parent[j]
            if p < 0:
                continue
            pg = S.glbind(p)
            self.lists[j] = pg[pg.size - 1 - self.lists[j]]
        self.mode = "global"


# ---------------------------------------------------------------------------
# The assembled symbolic factor.

@dataclass(frozen=True)
class BuildOptions:
    merge_cap: float | None = 12.5
    pr: bool = True
    sibling_order: bool = True


@dataclass(frozen=True)
class Plans:
    """Workspace sizes (in floats) each numeric method will need."""

    mf_postorder: np.ndarray
    mf_peak: int
    push_size: np.ndarray
    square_size: np.ndarray
    ll_peak: int
    rl_peak: int


class SymbolicFactor:
    """Supernode partition, per-supernode row lists, block lists and workspace
    plans for the numeric factorizations.  Immutable once built."""

    def __init__(self, n, first_col, col_to_snode, snode_parent, glbind,
                 relabel, options, merge_stats):
        self.n = int(n)
        self.first_col = np.asarray(first_col, dtype=np.int64)
        self.col_to_snode = np.asarray(col_to_snode, dtype=np.int64)
        self.snode_parent = np.asarray(snode_parent, dtype=np.int64)
        self._glbind = [np.asarray(g, dtype=np.int64) for g in glbind]
        self.relabel = relabel
        self.options = options
        self.merge_stats = merge_stats
        self.nsuper = self.first_col.size - 1
        self.snode_children = _children_lists(self.snode_parent)

        self.factor_nnz = sum(_trap_nnz(self.width(j), self.glbind(j).size)
                              for j in range(self.nsuper))
        self.panel_storage = sum(self.width(j) * self.glbind(j).size
                                 for j in range(self.nsuper))
        self.work_flops = sum(_work_flops(self.width(j), self.mrows(j))
                              for j in range(self.nsuper))
        self._compute_blocks()
        self._compute_updaters()
        self._compute_plans()

    # -- geometry -----------------------------------------------------------
    def cols(self, j: int):
        return int(self.first_col[j]), int(self.first_col[j + 1] - 1)

    def width(self, j: int) -> int:
        return int(self.first_col[j + 1] - self.first_col[j])

    def glbind(self, j: int) -> np.ndarray:
        return self._glbind[j]

    def below(self, j: int) -> np.ndarray:
        return self._glbind[j][self.width(j):]

    def mrows(self, j: int) -> int:
        return self._glbind[j].size - self.width(j)

    def nblocks(self, j: int) -> int:
        return self.block_sizes[j].size

    # -- derived structure ---------------------------------------------------
    def _compute_blocks(self):
        sizes = []
        starts = []
        for j in range(self.nsuper):
            b = self.below(j)
            if b.size == 0:
                sizes.append(np.zeros(0, dtype=np.int64))
                starts.append(np.zeros(0, dtype=np.int64))
                continue
            owner = self.col_to_snode[b]
            brk = np.flatnonzero((np.diff(b) != 1) | (np.diff(owner) != 0)) + 1
            st = np.concatenate([[0], brk]).astype(np.int64)
            en = np.concatenate([brk, [b.size]]).astype(np.int64)
            sizes.append(en - st)
            starts.append(st)
        self.block_sizes = sizes
        self.block_starts = starts

    def _compute_updaters(self):
        ups = [[] for _ in range(self.nsuper)]
        for k in range(self.nsuper):
            owners = np.unique(self.col_to_snode[self.below(k)])
            for p in owners:
                ups[int(p)].append(k)
        self.updaters = [np.asarray(u, dtype=np.int64) for u in ups]

    def ll_update_shape(self, k: int, j: int):
        """Geometry of supernode k's update into supernode j: suffix start in
        k's row list, row and column counts, target positions in j's list, and
        whether both the triangle part and the part below are contiguous there
        (in which case the update can be applied directly to factor storage)."""
        f, l = self.cols(j)
        gk = self.glbind(k)
        s0 = int(np.searchsorted(gk, f))
        rows = gk[s0:]
        c = int(np.searchsorted(rows, l, side="right"))
        gj = self.glbind(j)
        pos = np.searchsorted(gj, rows)
        if pos.size and not np.array_equal(gj[pos], rows):
            raise AssertionError("update rows missing from target structure")
        dense = _contiguous(pos[:c]) and _contiguous(pos[c:])
        return s0, rows.size, c, pos, dense

    def _compute_plans(self):
        push = np.zeros(self.nsuper, dtype=np.int64)
        square = np.zeros(self.nsuper, dtype=np.int64)
        for j in range(self.nsuper):
            m = self.mrows(j)
            square[j] = m * m
            p = self.snode_parent[j]
            if p >= 0:
                consumed = int(np.searchsorted(self.below(j), self.first_col[p + 1] - 1,
                                               side="right"))
                rest = m - consumed
                push[j] = rest * (rest + 1) // 2
        post, mf_peak = stack_minimizing_postorder(
            self.snode_parent, square, push, enabled=self.options.sibling_order)
        ll_peak = 0
        for j in range(self.nsuper):
            for k in self.updaters[j]:
                if self.width(int(k)) == 1:
                    continue
                _, r, c, _, dense = self.ll_update_shape(int(k), j)
                if not dense:
                    ll_peak = max(ll_peak, r * c)
        rl_peak = int(square.max()) if self.nsuper else 0
        self.plans = Plans(post, int(mf_peak), push, square, ll_peak, rl_peak)


def _contiguous(pos: np.ndarray) -> bool:
    return pos.size <= 1 or bool(np.all(np.diff(pos) == 1))


def _permute_pattern(pattern: SymmetricSparsePattern, P: Permutation) -> SymmetricSparsePattern:
    dummy = SymmetricSparseMatrix(pattern, np.zeros(pattern.nnz))
    return apply_symmetric_permutation(dummy, P).pattern


def build_symbolic_factor(pattern: SymmetricSparsePattern,
                          options: BuildOptions = BuildOptions()) -> SymbolicFactor:
    """Full symbolic pipeline on an already fill-ordered pattern.

    Steps: elimination tree, postorder relabel, per-column structure,
    fundamental supernodes, merging under the storage cap (with its relabel),
    optional within-supernode reordering, block lists and workspace plans.
    ``.relabel`` holds the composed permutation this analysis applied on top of
    the input pattern; apply it to the matrix before scattering values.
    """
    t0 = elimination_tree(pattern)
    p_post = Permutation(np.argsort(t0.postorder, kind="stable"))
    pat1 = _permute_pattern(pattern, p_post)
    t1 = elimination_tree(pat1)
    glb1 = symbolic_factorization(pat1, t1)
    part1 = fundamental_supernodes(t1, glb1)
    mr = merge_supernodes(part1, t1, glb1, options.merge_cap)
    S = SymbolicFactor(pattern.n, mr.partition.first_col, mr.partition.col_to_snode,
                       mr.snode_parent, mr.glbind, p_post.compose(mr.relabel),
                       options, mr.stats)
    if options.pr:
        from .reorder import reorder_within_supernodes
        _, S = reorder_within_supernodes(S)
    return S
