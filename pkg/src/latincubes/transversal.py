"""Transversal existence, counting, per-cell statistics, permanents.

For an array of shape k_1 x ... x k_d with k = min(k_i), a transversal
is a set of k cells meeting every hyperplane of every axis direction at
most once and carrying pairwise distinct symbols.  When the first axis
has size k the transversal picks exactly one cell per layer; when it is
longer (e.g. the (2q-2)-layer constructions) some layers are skipped.

Existence and exact counting run as a level-by-level dynamic program
over the first axis.  A partial selection is summarized by the bitmask
of used indices per remaining axis plus the bitmask of used symbols;
states are deduplicated with multiplicity after every layer, which keeps
the frontier polynomial even where the plain search tree is not (ten
6x6x6 layers have ~1e9 search paths but never more than a few hundred
thousand distinct states).  Per-cell statistics enumerate the full tree
instead; at order 5 that is at most 14,400 leaves.

Permanents of multidimensional matrices use the same dynamic program
without the symbol mask, multiplying entry weights along diagonals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import Budget, BudgetExceededError, LatinArray, StructureError

_WEIGHT_CAP = 2**62


def _axis_descriptors(shape: tuple[int, ...], values: np.ndarray,
                      q: int, with_symbols: bool) -> tuple[np.ndarray, int]:
    """Pack per-cell constraint bits for the hyperplanes of axis 0.

    Returns (desc, done_mask): ``desc[l, j]`` is the uint64 of bits
    consumed by cell j of layer l (one bit per coordinate of axes
    1.. and one per symbol); ``done_mask`` covers the symbol field.
    """
    d = len(shape)
    tail = shape[1:]
    m = int(np.prod(tail)) if tail else 1
    grids = np.unravel_index(np.arange(m), tail) if tail else ()
    desc = np.zeros((shape[0], m), dtype=np.uint64)
    offset = 0
    for axis in range(d - 1):
        desc |= (np.uint64(1) << (grids[axis] + offset).astype(np.uint64))[None, :]
        offset += tail[axis]
    sym_field = 0
    if with_symbols:
        flat = values.reshape(shape[0], m).astype(np.uint64)
        desc |= np.uint64(1) << (flat + offset)
        sym_field = ((1 << q) - 1) << offset
    return desc, sym_field


def _merge_weights(keys: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum integer weights of equal keys (exact int64 accumulation)."""
    uniq, inv = np.unique(keys, return_inverse=True)
    acc = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(acc, inv, weights)
    return uniq, acc


def _level_sweep(desc: np.ndarray, k: int, budget: Budget | None,
                 stop_early: bool) -> tuple[bool, int]:
    """Run the layer DP; return (found, exact count of complete states)."""
    k0 = desc.shape[0]
    states = np.zeros(1, dtype=np.uint64)
    weights = np.ones(1, dtype=np.int64)
    placed = np.zeros(1, dtype=np.int64)
    found = False
    total = 0
    for ell in range(k0):
        layer_desc = desc[ell]
        compat = (states[:, None] & layer_desc[None, :]) == 0
        if budget is not None:
            budget.spend(int(compat.sum()) + len(states))
        si, ci = np.nonzero(compat)
        new_states = states[si] | layer_desc[ci]
        new_weights = weights[si]
        new_placed = placed[si] + 1
        remaining = k0 - ell - 1
        # a skip is only useful while enough layers remain to reach k cells
        keep = placed + remaining >= k
        states = np.concatenate([states[keep], new_states])
        weights = np.concatenate([weights[keep], new_weights])
        placed = np.concatenate([placed[keep], new_placed])
        if len(states) == 0:
            return False, 0
        done = placed == k
        if done.any():
            found = True
            if stop_early:
                return True, 1
            total += int(weights[done].sum())
            states, weights, placed = states[~done], weights[~done], placed[~done]
            if len(states) == 0:
                return found, total
        key = (states << np.uint64(4)) | placed.astype(np.uint64)
        uniq, weights = _merge_weights(key, weights)
        if weights.max(initial=0) > _WEIGHT_CAP:
            raise BudgetExceededError("transversal count exceeds int64 range")
        states = uniq >> np.uint64(4)
        placed = (uniq & np.uint64(15)).astype(np.int64)
    return found, total


def _prepare(arr: LatinArray) -> tuple[np.ndarray, int]:
    if arr.ndim < 2:
        raise StructureError("transversal search needs at least 2 axes")
    desc, _ = _axis_descriptors(arr.shape, arr.cells, arr.q, True)
    return desc, min(arr.shape)


def has_transversal(arr: LatinArray, budget: Budget | None = None) -> bool:
    """True iff the array admits a transversal."""
    desc, k = _prepare(arr)
    found, _ = _level_sweep(desc, k, budget, True)
    return found


def count_transversals(arr: LatinArray, budget: Budget | None = None) -> int:
    """Exact number of transversals; raises rather than truncating."""
    desc, k = _prepare(arr)
    budget = budget or Budget()
    _, total = _level_sweep(desc, k, budget, False)
    return total


def transversals_per_cell(arr: LatinArray, budget: Budget | None = None) -> np.ndarray:
    """Count of transversals through each cell (full-tree enumeration).

    Every layer's slice of the result sums to the total count.
    """
    budget = budget or Budget()
    shape = arr.shape
    d = arr.ndim
    k = min(shape)
    k0 = shape[0]
    tail = shape[1:]
    m = int(np.prod(tail))
    flat_vals = arr.cells.reshape(k0, m)
    cell_bits, _ = _axis_descriptors(shape, arr.cells, arr.q, True)
    counts = np.zeros((k0, m), dtype=np.int64)
    chosen: list[tuple[int, int]] = []

    def walk(ell: int, used: int, placed: int) -> None:
        budget.spend()
        if placed == k:
            for lc in chosen:
                counts[lc] += 1
            return
        if ell == k0 or placed + (k0 - ell) < k:
            return
        walk(ell + 1, used, placed)
        row = cell_bits[ell]
        for j in np.flatnonzero((np.uint64(used) & row) == 0):
            chosen.append((ell, int(j)))
            walk(ell + 1, used | int(row[j]), placed + 1)
            chosen.pop()

    walk(0, 0, 0)
    return counts.reshape(shape)


@dataclass(frozen=True, eq=False)
class MultiMatrix:
    """Dense nonnegative integer matrix of shape (q,)*dim."""

    q: int
    entries: np.ndarray

    def __post_init__(self):
        e = np.ascontiguousarray(self.entries, dtype=np.int64)
        if e.ndim < 1 or any(s != self.q for s in e.shape):
            raise StructureError(f"entries must be ({self.q},)*dim, got {e.shape}")
        if e.min() < 0:
            raise StructureError("entries must be nonnegative")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    @property
    def dim(self) -> int:
        return self.entries.ndim

    def __eq__(self, other) -> bool:
        return (isinstance(other, MultiMatrix) and self.q == other.q
                and np.array_equal(self.entries, other.entries))

    def to_json(self) -> str:
        flat = "".join(str(int(v)) for v in self.entries.ravel())
        return json.dumps({"order": self.q, "dim": self.dim, "entries": flat})

    @staticmethod
    def from_json(text: str) -> "MultiMatrix":
        rec = json.loads(text)
        q, dim = int(rec["order"]), int(rec["dim"])
        digits = [int(c) for c in rec["entries"]]
        if len(digits) != q**dim:
            raise StructureError("entry count does not match order**dim")
        return MultiMatrix(q, np.array(digits, dtype=np.int64).reshape((q,) * dim))


def relation_matrix(arr: LatinArray) -> MultiMatrix:
    """0/1 relation of a value array, value coordinate first.

    M[x0, x1, ..., xn] = 1 iff arr[x1,...,xn] = x0.  For a latin n-cube
    this matrix is polystochastic.
    """
    if any(s != arr.q for s in arr.shape):
        raise StructureError("relation view needs all axes of size q")
    q = arr.q
    m = np.zeros((q,) + arr.shape, dtype=np.int64)
    grids = np.indices(arr.shape)
    m[(arr.cells.astype(np.intp),) + tuple(grids)] = 1
    return MultiMatrix(q, m)


def permanent(m: MultiMatrix, budget: Budget | None = None) -> int:
    """Sum over all diagonals of entry products (zero-pruned DP).

    For a 0/1 matrix this is the number of unity diagonals.
    """
    budget = budget or Budget()
    q, d = m.q, m.dim
    if d == 1:
        return int(m.entries.sum())
    desc, _ = _axis_descriptors(m.entries.shape, m.entries, q, False)
    flat = m.entries.reshape(q, -1)
    states = np.zeros(1, dtype=np.uint64)
    weights = np.ones(1, dtype=np.int64)
    for ell in range(q):
        nz = np.flatnonzero(flat[ell])
        if len(nz) == 0:
            return 0
        layer_desc = desc[ell][nz]
        layer_vals = flat[ell][nz]
        compat = (states[:, None] & layer_desc[None, :]) == 0
        budget.spend(int(compat.sum()) + len(states))
        si, ci = np.nonzero(compat)
        if len(si) == 0:
            return 0
        new_states = states[si] | layer_desc[ci]
        new_weights = weights[si] * layer_vals[ci]
        states, weights = _merge_weights(new_states, new_weights)
        if weights.max(initial=0) > _WEIGHT_CAP:
            raise BudgetExceededError("permanent exceeds int64 range")
    return int(weights.sum())


def is_t_stochastic(m: MultiMatrix, t: int) -> bool:
    """True iff every t-dimensional plane (any orientation) has one common sum.

    t = 1 is the polystochastic condition.
    """
    if not (0 < t < m.dim):
        raise StructureError(f"need 0 < t < dim, got t={t}, dim={m.dim}")
    from itertools import combinations

    target = None
    for free in combinations(range(m.dim), t):
        sums = m.entries.sum(axis=free)
        if target is None:
            target = int(sums.ravel()[0])
        if not (sums == target).all():
            return False
    return True
