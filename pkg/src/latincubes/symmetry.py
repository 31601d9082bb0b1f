"""Paratopies, canonical forms, linearity tests, and class censuses.

A paratopy of a latin object is a parastrophy (permutation of the value
coordinate with the q-ary cell coordinates) followed by an isotopy (one
symbol permutation per role, plus a permutation of the layers for
layered objects).  On the relation view {(x_0, x_1, ..., x_n)} the
group element g = (tau, sigmas, layer_perm) acts by

    u_i = sigma_i( t_{tau(i)} )        (value role is i = 0),

layers being re-addressed by ``layer_perm`` afterwards.  Incomplete
paratopies keep the value coordinate fixed (tau(0) = 0); isotopies fix
tau entirely.

The canonical form of an object is the lexicographically least
row-major digit string over its orbit.  It is located by branch and
bound rather than a full orbit scan: every orbit element's string
starts with some transformed layer whose first row can be normalized to
01234, so the candidates are exactly the tuples (parastrophy, first
layer, first row, value permutation).  Each candidate forces the column
permutation, the row order (rows of a latin square are distinct, so
sorting is unambiguous) and the order of the remaining layers; the
minimum over at most 6 * k * 5 * 120 candidates is the canonical
string, and the winning candidate assembles into an explicit witnessing
paratopy which is verified by application before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations as _permutations
from typing import Iterable, Sequence

import numpy as np

from . import perms
from .core import (GENERIC, HYPERCUBE, LATIN_CUBOID, LAYER_LATIN, SQUARE,
                   LatinArray, StructureError)

PARATOPY = "paratopy"
INCOMPLETE = "incomplete-paratopy"
ISOTOPY = "isotopy"
GROUPS = (PARATOPY, INCOMPLETE, ISOTOPY)

_PERMS5 = perms.all_perms(5)
_POW5_25 = (np.uint64(5) ** np.arange(24, -1, -1, dtype=np.uint64))
_POW5_5 = (5 ** np.arange(4, -1, -1)).astype(np.int64)


def _layered(kind: str) -> bool:
    return kind in (LATIN_CUBOID, LAYER_LATIN)


@dataclass(frozen=True)
class Paratopy:
    """tau over the roles (value, q-ary axes...), one sigma per role,
    and a layer permutation for layered objects."""

    tau: tuple[int, ...]
    sigmas: tuple[tuple[int, ...], ...]
    layer_perm: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.sigmas) != len(self.tau):
            raise StructureError("need one sigma per role")

    @staticmethod
    def identity(q: int, n_roles: int, k: int | None = None) -> "Paratopy":
        ident = tuple(range(q))
        return Paratopy(tuple(range(n_roles)), (ident,) * n_roles,
                        tuple(range(k)) if k is not None else None)

    def compose(self, other: "Paratopy") -> "Paratopy":
        """g.compose(h) acts as first h, then g."""
        tau_g, tau_h = self.tau, other.tau
        tau = tuple(tau_h[tau_g[i]] for i in range(len(tau_g)))
        sigmas = tuple(
            tuple(np.asarray(self.sigmas[i])[np.asarray(other.sigmas[tau_g[i]])])
            for i in range(len(tau_g)))
        lp = None
        if self.layer_perm is not None:
            lg, lh = np.asarray(self.layer_perm), np.asarray(other.layer_perm)
            lp = tuple(int(v) for v in lg[lh])
        return Paratopy(tau, sigmas, lp)

    def inverse(self) -> "Paratopy":
        tau_inv = tuple(int(v) for v in perms.inverse(np.asarray(self.tau, dtype=np.uint8)))
        sigmas = tuple(
            tuple(int(v) for v in perms.inverse(np.asarray(self.sigmas[tau_inv[i]],
                                                           dtype=np.uint8)))
            for i in range(len(self.tau)))
        lp = None
        if self.layer_perm is not None:
            lp = tuple(int(v) for v in perms.inverse(np.asarray(self.layer_perm,
                                                                dtype=np.uint8)))
        return Paratopy(tau_inv, sigmas, lp)


@dataclass(frozen=True)
class Isotopy:
    """Value permutation, per-axis permutations, optional layer permutation."""

    value_perm: tuple[int, ...]
    axis_perms: tuple[tuple[int, ...], ...]
    layer_perm: tuple[int, ...] | None = None

    def as_paratopy(self) -> Paratopy:
        roles = 1 + len(self.axis_perms)
        return Paratopy(tuple(range(roles)), (self.value_perm,) + self.axis_perms,
                        self.layer_perm)


@dataclass(frozen=True)
class Parastrophy:
    """Permutation of the value coordinate with the q-ary cell coordinates."""

    coord_perm: tuple[int, ...]

    def as_paratopy(self, q: int, k: int | None = None) -> Paratopy:
        ident = tuple(range(q))
        return Paratopy(tuple(self.coord_perm), (ident,) * len(self.coord_perm),
                        tuple(range(k)) if k is not None else None)


def apply(g: Paratopy, arr: LatinArray) -> LatinArray:
    """Transformed array; latin validity and transversal counts are preserved."""
    cells = arr.cells
    q = arr.q
    if _layered(arr.kind):
        if len(g.tau) != cells.ndim or g.layer_perm is None:
            raise StructureError("paratopy shape does not match layered array")
        grids = np.indices(cells.shape[1:])
        comp = (cells,) + tuple(np.broadcast_to(gd, cells.shape) for gd in grids)
        sig = [np.asarray(s, dtype=np.uint8) for s in g.sigmas]
        u = [sig[i][comp[g.tau[i]]] for i in range(len(g.tau))]
        lp = np.asarray(g.layer_perm, dtype=np.intp)
        out = np.zeros_like(cells)
        lgrid = np.broadcast_to(np.arange(cells.shape[0])[(slice(None),) + (None,) * (cells.ndim - 1)],
                                cells.shape)
        out[(lp[lgrid],) + tuple(a.astype(np.intp) for a in u[1:])] = u[0]
        return LatinArray(q, out, arr.kind)
    if len(g.tau) != cells.ndim + 1 or g.layer_perm is not None:
        raise StructureError("paratopy shape does not match array")
    grids = np.indices(cells.shape)
    comp = (cells,) + tuple(grids)
    sig = [np.asarray(s, dtype=np.uint8) for s in g.sigmas]
    u = [sig[i][comp[g.tau[i]]] for i in range(len(g.tau))]
    out = np.zeros_like(cells)
    out[tuple(a.astype(np.intp) for a in u[1:])] = u[0]
    return LatinArray(q, out, arr.kind)


def random_paratopy(rng: np.random.Generator, arr: LatinArray,
                    group: str = PARATOPY) -> Paratopy:
    q = arr.q
    if _layered(arr.kind):
        roles, k = arr.ndim, arr.shape[0]
    else:
        roles, k = arr.ndim + 1, None
    if group == ISOTOPY:
        tau = tuple(range(roles))
    elif group == INCOMPLETE:
        tau = (0,) + tuple(1 + rng.permutation(roles - 1))
    else:
        tau = tuple(int(v) for v in rng.permutation(roles))
    sigmas = tuple(tuple(int(v) for v in rng.permutation(q)) for _ in range(roles))
    lp = tuple(int(v) for v in rng.permutation(k)) if k is not None else None
    return Paratopy(tau, sigmas, lp)


# -- parastrophy pre-transforms for the canonicalizer -----------------------

def _conjugate_square(cells: np.ndarray, tau: tuple[int, int, int]) -> np.ndarray:
    """P_tau of one square on roles (value, row, col)."""
    q = cells.shape[0]
    r, c = np.indices(cells.shape)
    t = (cells.astype(np.intp), r, c)
    u0, u1, u2 = t[tau[0]], t[tau[1]], t[tau[2]]
    out = np.zeros_like(cells)
    out[u1, u2] = u0
    return out


def _conjugate_cells(cells: np.ndarray, tau: tuple[int, ...]) -> np.ndarray:
    """P_tau of a value array over roles (value, axes...)."""
    grids = np.indices(cells.shape)
    t = (cells.astype(np.intp),) + tuple(grids)
    u = [t[tau[i]] for i in range(len(tau))]
    out = np.zeros_like(cells)
    out[tuple(u[1:])] = np.asarray(u[0], dtype=cells.dtype)
    return out


_TAUS3 = tuple(_permutations(range(3)))
_TAUS3_INCOMPLETE = ((0, 1, 2), (0, 2, 1))


@dataclass(frozen=True)
class CanonicalForm:
    digits: str
    witness: Paratopy
    group: str


def _digit_keys(blocks: np.ndarray) -> np.ndarray:
    """(..., 25) digit arrays -> base-5 uint64 keys."""
    return (blocks.astype(np.uint64) * _POW5_25).sum(axis=-1)


# 5^(4-x): weight of a symbol landing in column position x
_COLW = (5 ** np.arange(4, -1, -1)).astype(np.int16)
# 5^(5*(4-pos)): weight of a 5-digit row key at row position pos
_ROWW = (np.uint64(5) ** (np.uint64(5) * np.arange(4, -1, -1, dtype=np.uint64)))


def _conjugate_layered_batch(stacks: np.ndarray, tau: tuple[int, int, int]) -> np.ndarray:
    """P_tau applied layer-wise to a batch of layer stacks (B, k, 5, 5)."""
    if tau == (0, 1, 2):
        return stacks
    b, k, q, _ = stacks.shape
    rg = np.broadcast_to(np.arange(q)[None, None, :, None], stacks.shape)
    cg = np.broadcast_to(np.arange(q)[None, None, None, :], stacks.shape)
    t = (stacks.astype(np.intp), rg, cg)
    out = np.zeros_like(stacks)
    bg = np.broadcast_to(np.arange(b)[:, None, None, None], stacks.shape)
    lg = np.broadcast_to(np.arange(k)[None, :, None, None], stacks.shape)
    out[bg, lg, t[tau[1]], t[tau[2]]] = np.asarray(t[tau[0]], dtype=np.uint8)
    return out


def _conjugate_cube_batch(cubes: np.ndarray, tau: tuple[int, int, int, int]) -> np.ndarray:
    """P_tau over the four roles of a batch of latin cubes (B, 5, 5, 5)."""
    if tau == (0, 1, 2, 3):
        return cubes
    b = cubes.shape[0]
    g = np.indices(cubes.shape[1:])
    t = (cubes.astype(np.intp),) + tuple(np.broadcast_to(gi, cubes.shape) for gi in g)
    out = np.zeros_like(cubes)
    bg = np.broadcast_to(np.arange(b)[:, None, None, None], cubes.shape)
    out[bg, t[tau[1]], t[tau[2]], t[tau[3]]] = np.asarray(t[tau[0]], dtype=np.uint8)
    return out


def _candidate_keys(slabs: np.ndarray) -> np.ndarray:
    """Prefix keys of all (first-layer, sigma0, r0) candidates per slab.

    ``slabs`` is (N, k, 5, 5); the result is (N, k, 120, 5) uint64: the
    base-5 value of the 25-digit first block obtained by putting layer
    ell0 first, mapping values by sigma0, forcing row r0 to 01234 (which
    fixes the column permutation) and sorting the rows.

    The block never needs materializing: with column map sc forced by
    (r0, sigma0), the transformed row r reads sigma0(S[r, j]) at column
    sc[j], so its 5-digit row key is a dot product of sigma0(S[r, :])
    with the weights 5^(4 - sc), and the 25-digit key weights the row
    keys by their sorted position.
    """
    v = np.moveaxis(_PERMS5[:, slabs], 0, 2)          # (N, k, 120, 5, 5)
    w = _COLW[v]                                      # 5^(4 - v), int16
    rowkeys = np.matmul(w, np.swapaxes(v, -1, -2).astype(np.int16))
    rowkeys.sort(axis=-1)
    return (rowkeys.astype(np.uint64) * _ROWW).sum(axis=-1)


def _apply_sigma_batch(sig: np.ndarray, stacks: np.ndarray) -> np.ndarray:
    """sig[s] mapped over stacks[s]: (S, 5) symbol maps on (S, k, 5, 5)."""
    s = len(sig)
    return sig[np.arange(s)[:, None, None, None], stacks.astype(np.intp)]


def _block_keys(stacks: np.ndarray, ell0s, r0s, s0s) -> np.ndarray:
    """(S, k) sorted per-layer block keys of chosen candidates.

    Every candidate's first block achieves the global prefix minimum and
    every other block key is at least that value, so ascending sort of
    the per-layer block keys is exactly the block order of the full
    canonical string.
    """
    s = len(ell0s)
    idx = np.arange(s)
    v = _apply_sigma_batch(_PERMS5[s0s], stacks)          # (S, k, 5, 5)
    w = _COLW[v[idx, ell0s, r0s, :]].astype(np.int64)     # (S, 5)
    rowkeys = (v.astype(np.int64) * w[:, None, None, :]).sum(axis=-1)
    first = rowkeys[idx, ell0s]                           # (S, 5)
    ranks = (first[:, :, None] > first[:, None, :]).sum(axis=-1)
    w2 = _ROWW[ranks]                                     # (S, 5)
    blockkeys = (rowkeys.astype(np.uint64) * w2[:, None, :]).sum(axis=-1)
    blockkeys.sort(axis=-1)
    return blockkeys


def _expand_batch(stacks: np.ndarray, ell0s, r0s, s0s) -> np.ndarray:
    """Digit blocks (S, k, 25) of chosen candidates, layers in final order."""
    s = len(ell0s)
    idx = np.arange(s)
    v = _apply_sigma_batch(_PERMS5[s0s], stacks)
    sc = v[idx, ell0s, r0s, :]
    inv_sc = np.argsort(sc, axis=-1)
    t = np.take_along_axis(v, inv_sc[:, None, None, :], axis=3)
    firstkeys = (t[idx, ell0s].astype(np.int64) * np.asarray(_POW5_5)).sum(axis=-1)
    order = np.argsort(firstkeys, axis=-1, kind="stable")
    t = np.take_along_axis(t, order[:, None, :, None], axis=2)
    blocks = t.reshape(s, stacks.shape[1], 25)
    bkeys = _digit_keys(blocks)
    bkeys[idx, ell0s] = 0          # pin the chosen first layer ahead of ties
    lorder = np.argsort(bkeys, axis=-1, kind="stable")
    return np.take_along_axis(blocks, lorder[:, :, None], axis=1)


def _minimize_batch(conjs: np.ndarray):
    """Winning candidate per object over stacked conjugates.

    ``conjs`` is (T, B, k, 5, 5): T parastrophy variants of B objects.
    Returns winner index arrays (ti, ell0, r0, s0) of length B.
    """
    t_count, b_count, k = conjs.shape[:3]
    keys = _candidate_keys(conjs.reshape(t_count * b_count, k, 5, 5))
    keys = keys.reshape(t_count, b_count, k, 120, 5)
    per_obj = keys.min(axis=(0, 2, 3, 4))
    hit = keys == per_obj[None, :, None, None, None]
    ti, bi, li, si, ri = np.nonzero(hit)
    order = np.argsort(bi, kind="stable")
    ti, bi, li, si, ri = ti[order], bi[order], li[order], si[order], ri[order]
    counts = np.bincount(bi, minlength=b_count)
    starts = np.concatenate([[0], np.cumsum(counts)])
    w_ti = np.empty(b_count, dtype=np.intp)
    w_li = np.empty(b_count, dtype=np.intp)
    w_ri = np.empty(b_count, dtype=np.intp)
    w_si = np.empty(b_count, dtype=np.intp)
    multi = np.flatnonzero(counts > 1)
    single = np.flatnonzero(counts == 1)
    js = starts[single]
    w_ti[single], w_li[single] = ti[js], li[js]
    w_ri[single], w_si[single] = ri[js], si[js]
    if len(multi):
        sel = np.concatenate([np.arange(starts[b], starts[b + 1]) for b in multi])
        stacks = conjs[ti[sel], bi[sel]]
        full = _block_keys(stacks, li[sel], ri[sel], si[sel])
        rank = np.lexsort(tuple(full.T[::-1]) + (bi[sel],))
        bailiff = bi[sel][rank]
        first = np.ones(len(rank), dtype=bool)
        first[1:] = bailiff[1:] != bailiff[:-1]
        for j in rank[first]:
            b = bi[sel][j]
            w_ti[b], w_li[b], w_ri[b], w_si[b] = ti[sel][j], li[sel][j], ri[sel][j], si[sel][j]
    return w_ti, w_li, w_ri, w_si


def _square_taus(group: str):
    if group == PARATOPY:
        return _TAUS3
    if group == INCOMPLETE:
        return _TAUS3_INCOMPLETE
    return (_TAUS3[0],)


def _cube_taus(group: str):
    if group == PARATOPY:
        return tuple(_permutations(range(4)))
    if group == INCOMPLETE:
        return tuple((0,) + t for t in _permutations((1, 2, 3)))
    return (tuple(range(4)),)


def canonical_digits_batch(stacks: np.ndarray, group: str = PARATOPY,
                           cube_roles: bool = False) -> list[bytes]:
    """Canonical digit strings for a batch of objects (no witnesses).

    ``stacks`` is (B, k, 5, 5) for layered objects / squares (k = 1), or
    (B, 5, 5, 5) with ``cube_roles`` for latin cubes (all four roles
    interchangeable).  Agrees exactly with :func:`canonical_form`.
    """
    if cube_roles:
        taus = _cube_taus(group)
        conjs = np.stack([_conjugate_cube_batch(stacks, tau) for tau in taus])
    else:
        taus = _square_taus(group)
        conjs = np.stack([_conjugate_layered_batch(stacks, tau) for tau in taus])
    w_ti, w_li, w_ri, w_si = _minimize_batch(conjs)
    b_count = stacks.shape[0]
    blocks = _expand_batch(conjs[w_ti, np.arange(b_count)], w_li, w_ri, w_si)
    flat = (blocks.reshape(b_count, -1) + 48).astype(np.uint8)
    return [row.tobytes() for row in flat]


def _witness_parts(stack: np.ndarray, ell0: int, r0: int, s0: int):
    """Digits plus direct maps (sigma0, row, col, layer) of one candidate."""
    sigma0 = _PERMS5[s0]
    v = sigma0[stack]
    sc = v[ell0, r0, :]
    t = v[:, :, perms.inverse(sc)]
    rowkeys = (t[ell0].astype(np.int64) * _POW5_5).sum(axis=-1)
    order = np.argsort(rowkeys, kind="stable")
    t = t[:, order, :]
    blocks = t.reshape(stack.shape[0], 25)
    bkeys = _digit_keys(blocks)
    rest = sorted((int(bkeys[ell]), ell) for ell in range(len(blocks)) if ell != ell0)
    layer_order = [ell0] + [ell for _, ell in rest]
    row_direct = perms.inverse(np.asarray(order, dtype=np.uint8))
    lam = np.empty(len(blocks), dtype=np.uint8)
    for pos, ell in enumerate(layer_order):
        lam[ell] = pos
    digits = "".join(chr(48 + int(d)) for d in blocks[layer_order].ravel())
    return digits, sigma0, row_direct, sc, lam


def canonical_form(arr: LatinArray, group: str = PARATOPY) -> CanonicalForm:
    """Least orbit element plus a verified witnessing paratopy."""
    if group not in GROUPS:
        raise StructureError(f"unknown group {group!r}")
    if arr.q != 5:
        raise StructureError("canonical forms are implemented for order 5")
    layered = _layered(arr.kind) and arr.ndim == 3
    square = arr.kind == SQUARE or (arr.kind == HYPERCUBE and arr.ndim == 2)
    cube = arr.kind == HYPERCUBE and arr.ndim == 3
    if not (layered or square or cube):
        raise StructureError(f"canonical form unsupported for {arr.kind} of dim {arr.ndim}")
    if cube:
        taus = _cube_taus(group)
        conjs = np.stack([_conjugate_cube_batch(arr.cells[None], tau) for tau in taus])
    else:
        taus = _square_taus(group)
        stack = arr.cells[None] if square else arr.cells
        conjs = np.stack([_conjugate_layered_batch(stack[None], tau) for tau in taus])
    w_ti, w_li, w_ri, w_si = _minimize_batch(conjs)
    ti, ell0, r0, s0 = int(w_ti[0]), int(w_li[0]), int(w_ri[0]), int(w_si[0])
    digits, sigma0, row_direct, sc, lam = _witness_parts(conjs[ti, 0], ell0, r0, s0)
    tau = taus[ti]
    sig_v = tuple(int(x) for x in sigma0)
    sig_r = tuple(int(x) for x in row_direct)
    sig_c = tuple(int(x) for x in sc)
    if cube:
        witness = Paratopy(tau, (sig_v, tuple(int(x) for x in lam), sig_r, sig_c))
    elif square:
        witness = Paratopy(tau, (sig_v, sig_r, sig_c))
    else:
        witness = Paratopy(tau, (sig_v, sig_r, sig_c), tuple(int(x) for x in lam))
    check = apply(witness, arr)
    if check.digits != digits:
        raise AssertionError("canonical witness failed verification")
    return CanonicalForm(digits, witness, group)
