"""Range tables of 2-layer and 3-layer cuboids of order 5.

The ten 2-element subsets of Q_5 are labeled 1..10 in lexicographic
order of their sorted pairs ({0,1} -> 1, ..., {3,4} -> 10); a 3-element
subset carries the label of its 2-element complement.  Fixing a labeled
subset of rows and of columns of a k-layer cuboid (k = 2, 3) selects a
k x k x k subcube; the entry T(i, j) of the range table counts the
distinct symbol sets ("ranges") over the subcube's transversal
diagonals (4 diagonals for a 2-cube, 36 for a 3-cube).

Three sound pruning predicates certify that a 5-layer layer-latin cube
X must contain a transversal:

* two complementary entries summing to >= 11 across the 2-layer and
  3-layer tables of a 2+3 split of X (pigeonhole over the ten
  complementary range pairs);
* two 3-layer entries >= 19 in one row (or column) at adjacent labels;
* a 3-layer row or column containing 10, 10 and a third entry >= 8.

The batch kernel evaluates 3-layer tables for many candidate third
layers at once; the scalar path recomputes everything from explicit
diagonals and serves as its oracle in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np

from .core import LatinArray, StructureError

PAIRS: tuple[tuple[int, int], ...] = tuple(combinations(range(5), 2))
TRIPLES: tuple[tuple[int, ...], ...] = tuple(
    tuple(sorted(set(range(5)) - set(p))) for p in PAIRS)
_PAIR_INDEX = {frozenset(p): i for i, p in enumerate(PAIRS)}

# label-1 of a 3-element subset, indexed by its 5-bit characteristic mask
_LBL3 = np.full(32, 255, dtype=np.uint8)
for _i, _t in enumerate(TRIPLES):
    _LBL3[sum(1 << b for b in _t)] = _i

# unordered adjacent label pairs (0-based): subsets sharing an element
ADJACENT_PAIRS: tuple[tuple[int, int], ...] = tuple(
    (i, j) for i, j in combinations(range(10), 2)
    if set(PAIRS[i]) & set(PAIRS[j]))


def pair_label(subset) -> int:
    """Label 1..10 of a 2- or 3-element subset of Q_5."""
    s = frozenset(int(x) for x in subset)
    if len(s) == 2:
        return _PAIR_INDEX[s] + 1
    if len(s) == 3:
        return _PAIR_INDEX[frozenset(range(5)) - s] + 1
    raise StructureError(f"subset must have 2 or 3 elements, got {sorted(s)}")


def label_pair(label: int) -> tuple[int, int]:
    if not 1 <= label <= 10:
        raise StructureError(f"label {label} outside 1..10")
    return PAIRS[label - 1]


def label_triple(label: int) -> tuple[int, ...]:
    if not 1 <= label <= 10:
        raise StructureError(f"label {label} outside 1..10")
    return TRIPLES[label - 1]


def labels_adjacent(i: int, j: int) -> bool:
    """Labels are adjacent iff their 2-element subsets intersect."""
    if i == j:
        raise StructureError("adjacency is defined for distinct labels")
    return bool(set(label_pair(i)) & set(label_pair(j)))


@dataclass(frozen=True)
class SubcubeView:
    """An s x s x s subcube of an s-layer cuboid (s = 2 or 3)."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    cells: np.ndarray

    @staticmethod
    def of(a: LatinArray, rows, cols) -> "SubcubeView":
        rows = tuple(int(r) for r in rows)
        cols = tuple(int(c) for c in cols)
        k = a.shape[0]
        if len(rows) != k or len(cols) != k or k not in (2, 3):
            raise StructureError("need a 2- or 3-layer cuboid with matching subsets")
        sub = a.cells[np.ix_(range(k), rows, cols)]
        return SubcubeView(rows, cols, sub)


def transversal_ranges(v: SubcubeView) -> set[frozenset[int]]:
    """Distinct value sets over the subcube's transversal diagonals."""
    s = v.cells.shape[0]
    out: set[frozenset[int]] = set()
    for sigma in permutations(range(s)):
        for pi in permutations(range(s)):
            vals = [int(v.cells[ell, sigma[ell], pi[ell]]) for ell in range(s)]
            if len(set(vals)) == s:
                out.add(frozenset(vals))
    return out


@dataclass(frozen=True)
class RangeTable:
    """10x10 grid of range counts; arity records the layer count used."""

    grid: np.ndarray
    arity: int

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return int(self.grid[i - 1, j - 1])


def range_table(a: LatinArray) -> RangeTable:
    """T(a) for a 2- or 3-layer cuboid of order 5.

    Row/column subsets are 2-element for 2 layers and 3-element (via
    complement labels) for 3 layers.
    """
    if a.q != 5 or a.ndim != 3 or a.shape[0] not in (2, 3):
        raise StructureError(f"need a 2- or 3-layer 5x5 cuboid, got {a.shape}")
    k = a.shape[0]
    subsets = PAIRS if k == 2 else TRIPLES
    grid = np.zeros((10, 10), dtype=np.uint8)
    for i, rows in enumerate(subsets):
        for j, cols in enumerate(subsets):
            grid[i, j] = len(transversal_ranges(SubcubeView.of(a, rows, cols)))
    return RangeTable(grid, k)


def prune_prop5(t2: RangeTable, t3: RangeTable) -> bool:
    """Complementary entries summing to >= 11 force a transversal."""
    if (t2.arity, t3.arity) != (2, 3):
        raise StructureError("expected a 2-layer and a 3-layer table")
    return bool((t2.grid.astype(np.int32) + t3.grid >= 11).any())


def prune_cor21(t3: RangeTable) -> bool:
    """Row or column entries >= 19 at adjacent labels force a transversal."""
    if t3.arity != 3:
        raise StructureError("expected a 3-layer table")
    g = t3.grid.astype(np.int32)
    for j, k in ADJACENT_PAIRS:
        if (g[:, j] + g[:, k] >= 19).any() or (g[j, :] + g[k, :] >= 19).any():
            return True
    return False


def prune_cor22(t3: RangeTable) -> bool:
    """A row or column containing 10, 10 and y >= 8 forces a transversal."""
    if t3.arity != 3:
        raise StructureError("expected a 3-layer table")
    for g in (t3.grid, t3.grid.T):
        top = -np.partition(-g.astype(np.int32), 2, axis=1)
        if ((top[:, 0] == 10) & (top[:, 1] == 10) & (top[:, 2] >= 8)).any():
            return True
    return False


# -- batch kernel -----------------------------------------------------------

_DIAGS3 = tuple((s, p) for s in permutations(range(3)) for p in permutations(range(3)))


def _batch_tables_setup(a0: np.ndarray, a1: np.ndarray):
    """Per-(i,j) diagonal data for 3-layer tables over fixed first two layers.

    For each of the 100 (row-triple, col-triple) cells, the 36 diagonals
    contribute a fixed pair of values from the first two layers plus one
    cell of the candidate third layer.  Returns per cell (i, j):
    (aval, bval, bpos, pairmask, live) arrays of length 36, where live
    marks diagonals whose fixed pair is already distinct.
    """
    out = []
    for i, rows in enumerate(TRIPLES):
        for j, cols in enumerate(TRIPLES):
            aval = np.empty(36, dtype=np.uint8)
            bval = np.empty(36, dtype=np.uint8)
            bpos = np.empty(36, dtype=np.intp)
            for d, (sigma, pi) in enumerate(_DIAGS3):
                aval[d] = a0[rows[sigma[0]], cols[pi[0]]]
                bval[d] = a1[rows[sigma[1]], cols[pi[1]]]
                bpos[d] = rows[sigma[2]] * 5 + cols[pi[2]]
            live = aval != bval
            pairmask = ((1 << aval.astype(np.uint16))
                        | (1 << bval.astype(np.uint16)))
            out.append((i, j, aval, bval, bpos, pairmask, live))
    return out


def t3_entry_batch(cell_data, b_flat: np.ndarray) -> np.ndarray:
    """One 3-layer table entry for a batch of candidate third layers.

    ``cell_data`` is one element of :func:`_batch_tables_setup`;
    ``b_flat`` is (N, 25) uint8.  Returns (N,) uint8 range counts.
    """
    _, _, aval, bval, bpos, pairmask, live = cell_data
    v = b_flat[:, bpos]
    ok = live[None, :] & (v != aval[None, :]) & (v != bval[None, :])
    masks = pairmask[None, :] | (np.uint16(1) << v.astype(np.uint16))
    labels = np.where(ok, _LBL3[masks & 31], 0).astype(np.uint16)
    bits = np.where(ok, np.uint16(1) << labels, np.uint16(0))
    return np.bitwise_count(np.bitwise_or.reduce(bits, axis=1)).astype(np.uint8)


def t3_tables_batch(a0: np.ndarray, a1: np.ndarray, b_flat: np.ndarray) -> np.ndarray:
    """Full (N, 10, 10) 3-layer tables of (a0, a1, B) for candidate B's."""
    n = b_flat.shape[0]
    grids = np.zeros((n, 10, 10), dtype=np.uint8)
    for cell in _batch_tables_setup(a0, a1):
        grids[:, cell[0], cell[1]] = t3_entry_batch(cell, b_flat)
    return grids
