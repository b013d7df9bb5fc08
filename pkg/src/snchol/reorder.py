"""Reordering of columns within supernodes by ordered partition refinement.

Each supernode's columns start as a single cell; every descendant supernode
that updates it splits the cells by its row set.  The refined cell order makes
the rows each descendant touches contiguous wherever the splits allow, which
turns its updates into fewer, larger dense blocks.  The permutation never moves
a column out of its supernode, so the factor nonzero count is unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix import Permutation
from .symbolic import SymbolicFactor


@dataclass
class OrderedPartition:
    """Ordered list of disjoint cells covering a ground set; cell order and the
    order inside each cell are both significant."""

    ground: frozenset
    cells: list

    @classmethod
    def single(cls, items) -> "OrderedPartition":
        items = list(items)
        return cls(frozenset(items), [items])

    def order(self) -> list:
        return [x for cell in self.cells for x in cell]


def refine(partition: OrderedPartition, pivot) -> OrderedPartition:
    """Split every cell into its pivot and non-pivot parts (stable inside each
    part).

    Split parts are placed toward the pivot's span: the leftmost split cell
    keeps its non-pivot part first, the rightmost keeps its pivot part first,
    so that across cells the pivot lands in one contiguous run whenever the
    existing cells allow it.  A pivot wholly inside one cell goes in front.
    """
    pivot = set(pivot)
    if not pivot <= partition.ground:
        raise ValueError("pivot contains elements outside the ground set")
    if not pivot:
        return OrderedPartition(partition.ground, [list(c) for c in partition.cells])
    hits = [i for i, cell in enumerate(partition.cells) if any(x in pivot for x in cell)]
    out = []
    for i, cell in enumerate(partition.cells):
        inside = [x for x in cell if x in pivot]
        outside = [x for x in cell if x not in pivot]
        if not inside or not outside:
            out.append(list(cell))
            continue
        if len(hits) > 1 and i == hits[0]:
            out.extend([outside, inside])
        else:
            out.extend([inside, outside])
    return OrderedPartition(partition.ground, out)


def _run_count(positions: np.ndarray) -> int:
    """Number of maximal consecutive runs in a sorted position array."""
    if positions.size == 0:
        return 0
    return 1 + int(np.count_nonzero(np.diff(positions) != 1))


def reorder_within_supernodes(S: SymbolicFactor):
    """Refine every supernode's column order by its updaters' row sets.

    Updaters are applied largest row set first (ties by ascending supernode).
    If refinement would increase a supernode's incoming block count, that
    supernode keeps its original order.  Returns the global permutation
    (identity across supernode boundaries) and the rebuilt symbolic factor.
    """
    n = S.n
    perm = np.arange(n, dtype=np.int64)
    for p in range(S.nsuper):
        f, l = S.cols(p)
        pivots = []
        for k in (int(x) for x in S.updaters[p]):
            b = S.below(k)
            s0 = int(np.searchsorted(b, f))
            s1 = int(np.searchsorted(b, l, side="right"))
            rows = b[s0:s1]
            if rows.size:
                pivots.append((rows.size, k, rows))
        if not pivots:
            continue
        pivots.sort(key=lambda t: (-t[0], t[1]))
        part = OrderedPartition.single(range(f, l + 1))
        for _, _, rows in pivots:
            part = refine(part, rows.tolist())
        new_order = np.asarray(part.order(), dtype=np.int64)
        cand = np.empty(l + 1 - f, dtype=np.int64)
        cand[new_order - f] = np.arange(f, l + 1)
        before = after = 0
        for _, _, rows in pivots:
            before += _run_count(rows - f)
            after += _run_count(np.sort(cand[rows - f]) - f)
        if after <= before:
            perm[new_order] = np.arange(f, l + 1)
    P = Permutation(perm)
    glb_new = [np.sort(P.perm[S.glbind(j)]) for j in range(S.nsuper)]
    S2 = SymbolicFactor(S.n, S.first_col, S.col_to_snode, S.snode_parent, glb_new,
                        S.relabel.compose(P), S.options, S.merge_stats)
    return P, S2
