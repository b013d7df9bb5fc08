"""Independent oracles the tests check the library against.

These deliberately avoid the library's own code paths: dense boolean
elimination for structure, numpy's Cholesky for values, brute-force
enumeration for orderings and stack schedules.
"""

import itertools

import numpy as np

from snchol.matrix import SymmetricSparsePattern, SymmetricSparseMatrix


def boolean_fill(pattern: SymmetricSparsePattern) -> list:
    """Per-column factor row lists by dense boolean elimination."""
    n = pattern.n
    B = pattern.to_dense_bool()
    np.fill_diagonal(B, True)
    for k in range(n):
        rows = np.flatnonzero(B[k + 1:, k]) + k + 1
        for a in rows:
            B[rows, a] = True
            B[a, rows] = True
    return [np.flatnonzero(B[j:, j]) + j for j in range(n)]


def etree_from_structure(glb: list) -> np.ndarray:
    parent = np.full(len(glb), -1, dtype=np.int64)
    for j, g in enumerate(glb):
        if g.size > 1:
            parent[j] = g[1]
    return parent


def fill_count(pattern: SymmetricSparsePattern, perm: np.ndarray) -> int:
    """Number of factor entries after symmetrically permuting by perm."""
    n = pattern.n
    cols = [[] for _ in range(n)]
    for j in range(n):
        for i in pattern.col(j)[1:]:
            a, b = sorted((int(perm[i]), int(perm[j])))
            cols[a].append(b)
    p2 = SymmetricSparsePattern.from_columns(n, [sorted(set(c)) for c in cols])
    return sum(g.size for g in boolean_fill(p2))


def dense_permute(A: np.ndarray, perm: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    out = np.zeros_like(A)
    idx = np.asarray(perm)
    out[np.ix_(idx, idx)] = A
    return out


def relind_direct(child_rows, parent_rows) -> np.ndarray:
    """Distance of each shared row from the bottom of the parent list."""
    parent_rows = list(parent_rows)
    return np.array([len(parent_rows) - 1 - parent_rows.index(r) for r in child_rows],
                    dtype=np.int64)


def simulate_stack_peak(parent, square, push, child_order) -> int:
    """Step-by-step stack simulation: pushes in postorder, the square update
    matrix laid in place over the first pop.  Independent of the library's
    recurrence."""
    ns = len(parent)
    children = [[] for _ in range(ns)]
    for s in range(ns):
        if parent[s] >= 0:
            children[parent[s]].append(s)
    peak = 0

    def process(j, base):
        nonlocal peak
        run = base
        last = 0
        for c in child_order[j]:
            process(c, run)
            run += push[c]
            if push[c] > 0:
                last = push[c]
        peak = max(peak, run - last + square[j])

    for s in range(ns):
        if parent[s] < 0:
            process(s, 0)
    return peak


def exhaustive_stack_minimum(parent, square, push) -> int:
    """Minimum stack peak over all sibling orders, by full enumeration."""
    ns = len(parent)
    children = [[] for _ in range(ns)]
    for s in range(ns):
        if parent[s] >= 0:
            children[parent[s]].append(s)
    best = [0] * ns
    for j in range(ns):
        kids = children[j]
        if not kids:
            best[j] = int(square[j])
            continue
        opt = None
        for order in itertools.permutations(kids):
            run = 0
            peak = 0
            last = 0
            for c in order:
                peak = max(peak, run + best[c])
                run += push[c]
                if push[c] > 0:
                    last = push[c]
            peak = max(peak, run - last + int(square[j]))
            opt = peak if opt is None else min(opt, peak)
        best[j] = opt
    return max((best[s] for s in range(ns) if parent[s] < 0), default=0)


def incoming_block_count(S, p: int, col_positions=None) -> int:
    """Blocks delivered into supernode p's columns, optionally under a
    relabeling of p's columns given by col_positions[col - first]."""
    f, l = S.cols(p)
    total = 0
    for k in S.updaters[p]:
        b = S.below(int(k))
        rows = b[(b >= f) & (b <= l)]
        if rows.size == 0:
            continue
        pos = rows - f if col_positions is None else np.sort(col_positions[rows - f])
        total += 1 + int(np.count_nonzero(np.diff(pos) != 1))
    return total


def min_incoming_blocks_exhaustive(S, p: int) -> int:
    """Exhaustive minimum of incoming_block_count over all column orders of
    supernode p (small widths only)."""
    f, l = S.cols(p)
    w = l + 1 - f
    best = None
    for order in itertools.permutations(range(w)):
        pos = np.empty(w, dtype=np.int64)
        for t, o in enumerate(order):
            pos[o] = t
        c = incoming_block_count(S, p, pos)
        best = c if best is None else min(best, c)
    return best
