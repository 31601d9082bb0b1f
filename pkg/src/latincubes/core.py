"""Dense latin arrays: validation, layers, retracts, composition, I/O.

The central value type is :class:`LatinArray`, an immutable dense array
of symbols from Q_q together with a *kind* tag declaring which latin
condition it is supposed to satisfy:

``square``              2-dimensional, every row and column a permutation.
``hypercube``           every axis has size q and every axis-parallel line
                        carries q distinct symbols (latin n-cube).
``latin-cuboid``        shape k x q x ... x q with *all* lines distinct,
                        including the length-k lines through the layers.
``layer-latin-cuboid``  a stack of k latin hypercubes with no constraint
                        across layers (k may exceed q).
``generic``             structural checks only.

Kinds are declared, never inferred: a 5x5x5 array may be a latin cube or
merely layer-latin, and the search algorithms rely on the weaker
condition.  ``validate`` decides whether the tag's condition holds.

Cells are stored row-major; the canonical serialization of an array is
its row-major digit string (orders up to 9, one character per symbol),
so lexicographic comparison of arrays is string comparison.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

SQUARE = "square"
HYPERCUBE = "hypercube"
LATIN_CUBOID = "latin-cuboid"
LAYER_LATIN = "layer-latin-cuboid"
GENERIC = "generic"
KINDS = (SQUARE, HYPERCUBE, LATIN_CUBOID, LAYER_LATIN, GENERIC)

MAX_ORDER = 9
MAX_CELLS = 10**8


class StructureError(ValueError):
    """Malformed array: bad shape, bad symbols, bad kind.

    Distinct from a latin-condition violation, which ``validate``
    reports without raising.
    """


class BudgetExceededError(RuntimeError):
    """A search exceeded its node budget; no partial result is returned."""


class Budget:
    """Counter of search nodes; ``spend`` raises once the limit is hit."""

    DEFAULT = 10**9

    def __init__(self, limit: int | None = None):
        self.limit = Budget.DEFAULT if limit is None else int(limit)
        self.used = 0

    def spend(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise BudgetExceededError(
                f"search budget exceeded: {self.used} > {self.limit} nodes")


@dataclass(frozen=True, eq=False)
class LatinArray:
    q: int
    cells: np.ndarray
    kind: str = GENERIC

    def __post_init__(self):
        cells = np.ascontiguousarray(self.cells, dtype=np.uint8)
        if self.kind not in KINDS:
            raise StructureError(f"unknown kind {self.kind!r}")
        if not (2 <= self.q <= MAX_ORDER):
            raise StructureError(f"order {self.q} outside 2..{MAX_ORDER}")
        if cells.ndim == 0 or cells.size == 0:
            raise StructureError("empty shape")
        if cells.size > MAX_CELLS:
            raise StructureError(f"{cells.size} cells exceeds {MAX_CELLS}")
        for axis, size in enumerate(cells.shape):
            if not (1 <= size <= self.q) and not (self.kind == LAYER_LATIN and axis == 0):
                raise StructureError(f"axis {axis} size {size} outside 1..q")
        if cells.max(initial=0) >= self.q:
            raise StructureError(f"symbol {int(cells.max())} >= order {self.q}")
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells.shape

    @property
    def ndim(self) -> int:
        return self.cells.ndim

    @property
    def digits(self) -> str:
        """Row-major digit string; the canonical serialization."""
        return "".join(chr(48 + v) for v in self.cells.ravel())

    def with_kind(self, kind: str) -> "LatinArray":
        return LatinArray(self.q, self.cells, kind)

    def __eq__(self, other) -> bool:
        return (isinstance(other, LatinArray) and self.q == other.q
                and self.kind == other.kind and self.shape == other.shape
                and np.array_equal(self.cells, other.cells))

    def __hash__(self) -> int:
        return hash((self.q, self.kind, self.shape, self.cells.tobytes()))

    def __repr__(self) -> str:
        shape = "x".join(map(str, self.shape))
        return f"LatinArray(q={self.q}, {shape}, {self.kind}, {self.digits!r})"


def latin_array(q: int, cells, kind: str = GENERIC) -> LatinArray:
    return LatinArray(q, np.asarray(cells, dtype=np.uint8), kind)


def square_from_rows(rows: Sequence[Sequence[int]], q: int | None = None) -> LatinArray:
    a = np.asarray(rows, dtype=np.uint8)
    return LatinArray(q if q is not None else a.shape[0], a, SQUARE)


def from_layers(layers: Iterable[LatinArray], kind: str = LAYER_LATIN) -> LatinArray:
    layers = list(layers)
    q = layers[0].q
    return LatinArray(q, np.stack([l.cells for l in layers]), kind)


# A violated line is (axis, base): the line along `axis` through the
# point `base` (whose `axis` coordinate is set to 0).
Line = tuple[int, tuple[int, ...]]


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: list[Line] = field(default_factory=list)


def _scan_lines(cells: np.ndarray, axes: Iterable[int], need_all: bool,
                q: int) -> list[Line]:
    """Lines (along each given axis) with repeated symbols.

    With ``need_all`` the line must carry all q symbols (latin n-cube
    condition); otherwise distinctness suffices (short cuboid lines).
    """
    bad: list[Line] = []
    for axis in axes:
        moved = np.moveaxis(cells, axis, -1)
        L = moved.shape[-1]
        flat = moved.reshape(-1, L)
        counts = np.zeros((flat.shape[0], q), dtype=np.int32)
        rows = np.arange(flat.shape[0])[:, None]
        np.add.at(counts, (rows, flat.astype(np.intp)), 1)
        ok = (counts <= 1).all(axis=1)
        if need_all and L == q:
            ok &= (counts == 1).all(axis=1)
        for fi in np.flatnonzero(~ok):
            rest = np.unravel_index(fi, moved.shape[:-1])
            coords = list(rest[:axis]) + [0] + list(rest[axis:])
            bad.append((axis, tuple(int(c) for c in coords)))
    return bad


def validate(arr: LatinArray) -> ValidationReport:
    """Check the declared kind's latin condition, listing violated lines."""
    cells, q, d = arr.cells, arr.q, arr.ndim
    kind = arr.kind
    if kind == GENERIC:
        return ValidationReport(True, [])
    if kind == SQUARE:
        if d != 2 or cells.shape != (q, q):
            raise StructureError(f"square must be {q}x{q}, got {cells.shape}")
        return _report(_scan_lines(cells, range(2), True, q))
    if kind == HYPERCUBE:
        if any(s != q for s in cells.shape):
            raise StructureError(f"hypercube axes must all be {q}, got {cells.shape}")
        return _report(_scan_lines(cells, range(d), True, q))
    if kind == LATIN_CUBOID:
        if d < 2 or any(s != q for s in cells.shape[1:]) or cells.shape[0] > q:
            raise StructureError(f"latin cuboid must be k x {q}**{d - 1} with k <= {q}")
        return _report(_scan_lines(cells, range(d), True, q))
    if kind == LAYER_LATIN:
        if d < 2 or any(s != q for s in cells.shape[1:]):
            raise StructureError(f"layer axes must all be {q}, got {cells.shape[1:]}")
        bad: list[Line] = []
        for ell in range(cells.shape[0]):
            for axis, coords in _scan_lines(cells[ell], range(d - 1), True, q):
                bad.append((axis + 1, (ell,) + coords))
        return _report(bad)
    raise StructureError(f"unknown kind {kind!r}")


def _report(bad: list[Line]) -> ValidationReport:
    return ValidationReport(not bad, bad)


def layer(arr: LatinArray, axis: int, value: int) -> LatinArray:
    """Slice fixing one coordinate; parallel layers share the axis."""
    if not (0 <= axis < arr.ndim):
        raise StructureError(f"axis {axis} out of range for {arr.shape}")
    if not (0 <= value < arr.shape[axis]):
        raise StructureError(f"value {value} out of range for axis {axis}")
    sub = np.take(arr.cells, value, axis=axis)
    return LatinArray(arr.q, sub, _sliced_kind(arr, (axis,)))


def _sliced_kind(arr: LatinArray, fixed_axes: tuple[int, ...]) -> str:
    if arr.kind in (SQUARE, HYPERCUBE):
        return HYPERCUBE
    if arr.kind == LATIN_CUBOID:
        return HYPERCUBE if 0 in fixed_axes else LATIN_CUBOID
    if arr.kind == LAYER_LATIN:
        return HYPERCUBE if 0 in fixed_axes else LAYER_LATIN
    return GENERIC


@dataclass(frozen=True)
class RetractSpec:
    """Coordinates to fix: axis index -> fixed value."""
    fixed: Mapping[int, int]

    def check(self, arr: LatinArray) -> None:
        if not self.fixed:
            raise StructureError("retract must fix at least one axis")
        if len(set(self.fixed)) != len(self.fixed):
            raise StructureError("fixed axes must be distinct")
        for axis, value in self.fixed.items():
            if not (0 <= axis < arr.ndim):
                raise StructureError(f"axis {axis} out of range")
            if not (0 <= value < arr.shape[axis]):
                raise StructureError(f"value {value} out of range for axis {axis}")
        if len(self.fixed) >= arr.ndim:
            raise StructureError("retract must leave at least one free axis")


def retract(arr: LatinArray, spec: RetractSpec) -> LatinArray:
    """Sub-array with the given coordinates fixed.

    A retract of a latin hypercube is a latin hypercube of lower
    dimension; fixing all but two axes yields a square retract.
    """
    spec.check(arr)
    index = tuple(spec.fixed.get(axis, slice(None)) for axis in range(arr.ndim))
    sub = arr.cells[index]
    return LatinArray(arr.q, sub, _sliced_kind(arr, tuple(spec.fixed)))


def diagonal_retract(source: LatinArray, diag: Sequence[Sequence[int]]) -> LatinArray:
    """Stack the retracts of `source` along a diagonal of its first k axes.

    ``diag`` holds q k-tuples whose j-th components are pairwise
    distinct.  Layer i of the result fixes the first k coordinates at
    ``diag[i]``; any transversal of the result lifts to a transversal
    of the source.
    """
    diag = np.asarray(diag, dtype=np.intp)
    if diag.ndim != 2 or diag.shape[0] != source.q:
        raise StructureError(f"diagonal must be q x k, got {diag.shape}")
    k = diag.shape[1]
    if k >= source.ndim:
        raise StructureError("diagonal must leave at least one free axis")
    for j in range(k):
        col = diag[:, j]
        if len(set(col.tolist())) != source.q or col.max() >= source.shape[j]:
            raise StructureError(f"diagonal column {j} is not a permutation of the axis")
    slabs = [source.cells[tuple(diag[i])] for i in range(source.q)]
    return LatinArray(source.q, np.stack(slabs), LAYER_LATIN)


def compose(g: LatinArray, h: LatinArray) -> LatinArray:
    """Quasigroup composition g(h(x_1..x_k), x_{k+1}..x_n).

    Both operands are hypercubes in operation form (cell content =
    value of the operation at the index tuple); the substitution is in
    g's first argument.  The result is a latin hypercube of arity
    arity(h) + arity(g) - 1.
    """
    if g.q != h.q:
        raise StructureError(f"order mismatch: {g.q} != {h.q}")
    out = g.cells[h.cells.astype(np.intp)]
    return LatinArray(g.q, out, HYPERCUBE if out.ndim > 2 else SQUARE)


# -- text / JSON formats ---------------------------------------------------

def to_text(arr: LatinArray) -> str:
    """Header plus digit-row blocks; deepest two axes form rows/columns."""
    shape = "x".join(map(str, arr.shape))
    head = f"order={arr.q} shape={shape} kind={arr.kind}"
    cells = arr.cells
    if cells.ndim == 1:
        body = ["".join(chr(48 + v) for v in cells)]
    else:
        rows, cols = cells.shape[-2], cells.shape[-1]
        blocks = cells.reshape(-1, rows, cols)
        body = []
        for b, block in enumerate(blocks):
            if b:
                body.append("")
            body.extend("".join(chr(48 + v) for v in row) for row in block)
    return "\n".join([head] + body) + "\n"


def from_text(text: str) -> LatinArray:
    lines = [ln.rstrip() for ln in text.strip().splitlines()]
    if not lines or not lines[0].startswith("order="):
        raise StructureError("missing 'order=... shape=...' header")
    fields = dict(tok.split("=", 1) for tok in lines[0].split())
    try:
        q = int(fields["order"])
        shape = tuple(int(s) for s in fields["shape"].split("x"))
    except (KeyError, ValueError) as exc:
        raise StructureError(f"bad header {lines[0]!r}") from exc
    kind = fields.get("kind", GENERIC)
    digits = []
    for ln_no, ln in enumerate(lines[1:], start=2):
        if not ln:
            continue
        if not ln.isdigit():
            raise StructureError(f"line {ln_no}: expected digit row, got {ln!r}")
        digits.extend(int(c) for c in ln)
    if len(digits) != int(np.prod(shape)):
        raise StructureError(
            f"expected {int(np.prod(shape))} cells for shape {shape}, got {len(digits)}")
    return LatinArray(q, np.array(digits, dtype=np.uint8).reshape(shape), kind)


def to_json(arr: LatinArray) -> str:
    return json.dumps({"order": arr.q, "shape": list(arr.shape),
                       "cells": arr.digits, "kind": arr.kind})


def from_json(text: str) -> LatinArray:
    try:
        rec = json.loads(text)
        q = int(rec["order"])
        shape = tuple(int(s) for s in rec["shape"])
        digits = [int(c) for c in rec["cells"]]
        kind = rec.get("kind", GENERIC)
    except (KeyError, ValueError, TypeError) as exc:
        raise StructureError(f"bad record: {exc}") from exc
    if len(digits) != int(np.prod(shape)):
        raise StructureError("cell count does not match shape")
    return LatinArray(q, np.array(digits, dtype=np.uint8).reshape(shape), kind)
