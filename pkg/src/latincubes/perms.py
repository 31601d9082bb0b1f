"""Permutations of Q_q = {0, ..., q-1} in image form.

A permutation is a numpy uint8 vector ``p`` with ``p[i]`` the image of
``i``.  Composition is ``(p * r)(i) = p[r[i]]``.  The module keeps a
cached lexicographic table of all permutations per order, which the
canonicalizer and the census code index into.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import permutations as _permutations

import numpy as np


def identity(q: int) -> np.ndarray:
    return np.arange(q, dtype=np.uint8)


def shift(i: int, q: int) -> np.ndarray:
    """The cyclic shift x -> x + i (mod q)."""
    return ((np.arange(q) + i) % q).astype(np.uint8)


def inverse(p: np.ndarray) -> np.ndarray:
    inv = np.empty(len(p), dtype=np.uint8)
    inv[p] = np.arange(len(p), dtype=np.uint8)
    return inv


def compose(p: np.ndarray, r: np.ndarray) -> np.ndarray:
    """p after r: (p . r)(i) = p[r[i]]."""
    return p[r]


def is_permutation(p) -> bool:
    p = np.asarray(p)
    return p.ndim == 1 and np.array_equal(np.sort(p), np.arange(len(p)))


@lru_cache(maxsize=None)
def all_perms(q: int) -> np.ndarray:
    """All q! permutations in lexicographic order, shape (q!, q)."""
    return np.array(list(_permutations(range(q))), dtype=np.uint8)


@lru_cache(maxsize=None)
def _perm_rank_table(q: int) -> dict:
    return {bytes(p): i for i, p in enumerate(all_perms(q))}


def perm_rank(p: np.ndarray) -> int:
    """Index of p in the lexicographic table of its order."""
    return _perm_rank_table(len(p))[bytes(np.asarray(p, dtype=np.uint8))]


@lru_cache(maxsize=None)
def all_inverses(q: int) -> np.ndarray:
    """Inverse of every permutation in ``all_perms(q)`` order."""
    perms = all_perms(q)
    inv = np.empty_like(perms)
    rows = np.arange(len(perms))[:, None]
    inv[rows, perms] = np.arange(q, dtype=np.uint8)[None, :]
    return inv
