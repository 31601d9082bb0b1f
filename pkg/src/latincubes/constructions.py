"""Linear hypercubes, shift-layer stacks, and no-transversal constructions.

``linear_cube(pi, n, q)`` materializes the hypercube pi(x1)+x2+...+xn
(mod q).  Stacks of such layers obey exact parity laws: for odd q a
stack of shift layers eps_{i_0},...,eps_{i_{q-1}} has a transversal iff
the shifts sum to 0 mod q, and replacing one shift layer by an
arbitrary cube L0 kills all transversals iff L0 avoids the matching
shift layer in every cell.  Those laws drive both the fixture corpus
and the general (2q-2)-layer no-transversal cuboids, which in turn
yield 2-stochastic 0/1 matrices with zero permanent.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations as _permutations

import numpy as np

from . import perms
from .core import HYPERCUBE, LAYER_LATIN, SQUARE, LatinArray, StructureError, from_layers
from .transversal import MultiMatrix


@dataclass(frozen=True)
class ShiftTuple:
    """Shift amounts (i_0, ..., i_{q-1}) for a stack of shift layers."""

    shifts: tuple[int, ...]
    q: int
    n: int = 2

    def __post_init__(self):
        if any(not 0 <= i < self.q for i in self.shifts):
            raise StructureError("shift amounts must lie in Q_q")


@dataclass(frozen=True)
class RowLatinSquare:
    """q rows, each a permutation of Q_q; columns unconstrained."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        q = len(self.rows)
        for r in self.rows:
            if not perms.is_permutation(np.asarray(r)):
                raise StructureError(f"row {r} is not a permutation of Q_{q}")

    @property
    def q(self) -> int:
        return len(self.rows)


def linear_cube(pi: np.ndarray, n: int, q: int) -> LatinArray:
    """The hypercube L[pi, n]: cell (x1,...,xn) = pi(x1)+x2+...+xn mod q."""
    if n < 1:
        raise StructureError("arity must be >= 1")
    pi = np.asarray(pi, dtype=np.int64)
    if not perms.is_permutation(pi) or len(pi) != q:
        raise StructureError("pi must be a permutation of Q_q")
    total = pi.reshape((q,) + (1,) * (n - 1))
    for axis in range(1, n):
        shape = [1] * n
        shape[axis] = q
        total = total + np.arange(q).reshape(shape)
    cells = (total % q).astype(np.uint8)
    return LatinArray(q, cells, SQUARE if n == 2 else HYPERCUBE)


def shift_square(i: int, q: int) -> LatinArray:
    """L[eps_i, 2], the cyclic square shifted by i."""
    return linear_cube(perms.shift(i, q), 2, q)


def diagonal_sums(r: RowLatinSquare) -> set[int]:
    """All values of sum_i r_i(c_i) mod q over column permutations c."""
    q = r.q
    if q > 8:
        raise StructureError("diagonal sum enumeration supports q <= 8")
    rows = [np.asarray(row, dtype=np.int64) for row in r.rows]
    sums = set()
    for cols in _permutations(range(q)):
        sums.add(int(sum(rows[i][c] for i, c in enumerate(cols))) % q)
    return sums


def required_diagonal_sum(q: int, n: int) -> int:
    """The diagonal sum a transversal of L[pi_1,n..pi_q,n] layers forces.

    Odd q: 0.  Even q: 0 for even n, q/2 for odd n.
    """
    if q % 2 == 1 or n % 2 == 0:
        return 0
    return q // 2


def lemma1_no_transversal(pis, n: int, q: int) -> bool:
    """True iff the layer stack L[pi_1,n],...,L[pi_q,n] provably has none.

    The criterion: the row-latin square with rows pi_1..pi_q has no
    diagonal summing to the forced value.  True guarantees absence of
    transversals; False is inconclusive in general (but exact for pure
    shift rows).
    """
    rls = RowLatinSquare(tuple(tuple(int(v) for v in p) for p in pis))
    if rls.q != q:
        raise StructureError(f"need q={q} rows")
    return required_diagonal_sum(q, n) not in diagonal_sums(rls)


def shift_layer_cube(t: ShiftTuple) -> LatinArray:
    """Stack of layers L[eps_{i_j}, n] as a layer-latin (n+1)-cube."""
    return from_layers([linear_cube(perms.shift(i, t.q), t.n, t.q) for i in t.shifts],
                       LAYER_LATIN)


def shift_rule_target(q: int, n: int) -> int:
    """The forced value of the shift sum for a shift stack to have transversals.

    Differs from the diagonal-sum target by (n-1) copies of sum(Q_q):
    odd q -> 0; even q -> 0 for odd n, q/2 for even n.
    """
    if q % 2 == 1 or n % 2 == 1:
        return 0
    return q // 2


def shift_rule_has_transversal(t: ShiftTuple) -> bool:
    """Parity law for shift stacks (exact, both directions)."""
    return sum(t.shifts) % t.q == shift_rule_target(t.q, t.n)


def lemma2_no_transversal(l0: LatinArray, shifts, q: int | None = None) -> bool:
    """Stack (L0, L[eps_{i_1},n], ..., L[eps_{i_{q-1}},n]) has no transversal?

    Takes the q-1 shifts i_1..i_{q-1}; the balancing shift is
    i_0 = -(i_1+...+i_{q-1}) mod q.  For odd q the stack has no
    transversal iff L0 differs from L[eps_{i_0}, n] in every cell.
    """
    q = q if q is not None else l0.q
    if q % 2 == 0:
        raise StructureError("the criterion is stated for odd order only")
    shifts = [int(i) % q for i in shifts]
    if len(shifts) != q - 1:
        raise StructureError(f"need q-1 = {q - 1} shifts")
    i0 = (-sum(shifts)) % q
    ref = linear_cube(perms.shift(i0, q), l0.ndim, q)
    return bool((l0.cells != ref.cells).all())


def lemma2_cube(l0: LatinArray, shifts) -> LatinArray:
    """The layer-latin stack (L0, L[eps_{i_1},n], ...)."""
    q = l0.q
    layers = [l0] + [linear_cube(perms.shift(int(i) % q, q), l0.ndim, q) for i in shifts]
    return from_layers(layers, LAYER_LATIN)


def drisko_cuboid(q: int, n: int) -> LatinArray:
    """A (2q-2)-layer latin (n+1)-cuboid of order q with no transversals.

    q odd, or q even with n odd: q-1 copies of L[eps_0,n] then q-1
    copies of L[eps_1,n].  q and n both even: 2q-2 identical copies of
    L[eps_0,n] (that single layer already has no transversal).
    """
    if q < 2 or n < 1:
        raise StructureError("need q >= 2 and n >= 1")
    if q % 2 == 1 or n % 2 == 1:
        layers = [linear_cube(perms.shift(0, q), n, q)] * (q - 1) \
            + [linear_cube(perms.shift(1, q), n, q)] * (q - 1)
    else:
        layers = [linear_cube(perms.shift(0, q), n, q)] * (2 * q - 2)
    return from_layers(layers, LAYER_LATIN)


def zero_permanent_matrix(q: int, n: int) -> MultiMatrix:
    """A 2-stochastic (n+2)-dimensional 0/1 matrix of order q, permanent 0.

    Built from the q-layer no-transversal stack of q-1 copies of
    L[eps_0,n] plus one L[eps_1,n] (odd q): entry M[i, y0, y1..yn] = 1
    iff y0 = f_i(y1,...,yn).
    """
    if q % 2 == 0 or q < 3:
        raise StructureError("need odd q >= 3")
    if n <= 1:
        raise StructureError("need n > 1")
    layers = [linear_cube(perms.shift(0, q), n, q)] * (q - 1) \
        + [linear_cube(perms.shift(1, q), n, q)]
    m = np.zeros((q, q) + (q,) * n, dtype=np.int64)
    grids = np.indices((q,) * n)
    for i, f in enumerate(layers):
        m[(i, f.cells.astype(np.intp)) + tuple(grids)] = 1
    return MultiMatrix(q, m)
