"""Exact linear algebra over Q or over a rational-function field.

Matrices are plain lists of rows.  Entries are either ``Fraction`` or
:class:`~multdirac.exprcore.RationalFunction`; the only operations used are
``+ - * /`` and zero testing, so both fields share one code path.

Generic (function-field) eliminations remember every pivot they divided by.
The product of those pivots is the "valid away from" polynomial: the
result is correct wherever none of them vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from .errors import SingularSystem
from .exprcore import RationalFunction

Matrix = list[list[Any]]


def _is_zero(x) -> bool:
    if isinstance(x, RationalFunction):
        return x.is_zero()
    return x == 0


def _weight(x) -> tuple[int, int]:
    if isinstance(x, RationalFunction):
        return x.complexity()
    return (0, 0)


@dataclass
class Elimination:
    """Reduced row echelon form plus bookkeeping."""

    rref: Matrix
    pivots: list[int]
    row_order: list[int]
    pivot_factors: list[Any] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.pivots)


def copy_matrix(A: Sequence[Sequence[Any]]) -> Matrix:
    return [list(r) for r in A]


def shape(A: Sequence[Sequence[Any]]) -> tuple[int, int]:
    return (len(A), len(A[0]) if A else 0)


def transpose(A: Sequence[Sequence[Any]], ncols: int | None = None) -> Matrix:
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


def matmul(A: Sequence[Sequence[Any]], B: Sequence[Sequence[Any]], zero: Any = 0) -> Matrix:
    if not A:
        return []
    inner = len(B)
    cols = len(B[0]) if B else 0
    out = []
    for row in A:
        r = []
        for j in range(cols):
            acc = zero
            for k in range(inner):
                a = row[k]
                if _is_zero(a):
                    continue
                b = B[k][j]
                if _is_zero(b):
                    continue
                acc = acc + a * b
            r.append(acc)
        out.append(r)
    return out


def matvec(A: Sequence[Sequence[Any]], v: Sequence[Any], zero: Any = 0) -> list[Any]:
    out = []
    for row in A:
        acc = zero
        for a, b in zip(row, v):
            if _is_zero(a) or _is_zero(b):
                continue
            acc = acc + a * b
        out.append(acc)
    return out


def dot(u: Sequence[Any], v: Sequence[Any], zero: Any = 0) -> Any:
    acc = zero
    for a, b in zip(u, v):
        if _is_zero(a) or _is_zero(b):
            continue
        acc = acc + a * b
    return acc


def identity(n: int, one: Any = 1, zero: Any = 0) -> Matrix:
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def eliminate(A: Sequence[Sequence[Any]], ncols: int | None = None) -> Elimination:
    """Gauss-Jordan elimination choosing the simplest nonzero pivot per column."""
    M = copy_matrix(A)
    rows = len(M)
    cols = ncols if ncols is not None else (len(M[0]) if M else 0)
    order = list(range(rows))
    pivots: list[int] = []
    factors: list[Any] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        best = None
        for i in range(r, rows):
            x = M[i][c]
            if not _is_zero(x):
                w = _weight(x)
                if best is None or w < best[0]:
                    best = (w, i)
        if best is None:
            continue
        i = best[1]
        M[r], M[i] = M[i], M[r]
        order[r], order[i] = order[i], order[r]
        p = M[r][c]
        factors.append(p)
        if not (p == 1):
            M[r] = [x / p if not _is_zero(x) else x for x in M[r]]
        for k in range(rows):
            if k == r:
                continue
            f = M[k][c]
            if _is_zero(f):
                continue
            rowr = M[r]
            M[k] = [a - f * b if not _is_zero(b) else a for a, b in zip(M[k], rowr)]
        pivots.append(c)
        r += 1
    return Elimination(M, pivots, order, factors)


def rank(A: Sequence[Sequence[Any]]) -> int:
    return eliminate(A).rank


def nullspace(A: Sequence[Sequence[Any]], ncols: int | None = None, one: Any = 1, zero: Any = 0) -> list[list[Any]]:
    """Basis of {x : A x = 0}, one vector per free column."""
    cols = ncols if ncols is not None else (len(A[0]) if A else 0)
    E = eliminate(A, cols)
    pivset = set(E.pivots)
    basis = []
    for free in range(cols):
        if free in pivset:
            continue
        v = [zero] * cols
        v[free] = one
        for r, pc in enumerate(E.pivots):
            x = E.rref[r][free]
            if not _is_zero(x):
                v[pc] = -x
        basis.append(v)
    return basis


def solve(
    A: Sequence[Sequence[Any]], b: Sequence[Any], one: Any = 1, zero: Any = 0
) -> tuple[list[Any], list[list[Any]]] | None:
    """One solution of A x = b (free variables 0) and the homogeneous basis, or None."""
    cols = len(A[0]) if A else 0
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    E = eliminate(aug, cols + 1)
    if cols in E.pivots:
        return None
    x = [zero] * cols
    for r, pc in enumerate(E.pivots):
        x[pc] = E.rref[r][cols]
    return x, nullspace(A, cols, one, zero)


def solve_generic(
    A: Sequence[Sequence[Any]], b: Sequence[Any], one: Any = 1, zero: Any = 0
) -> tuple[list[Any], list[list[Any]], list[Any]] | None:
    """Like :func:`solve` but also returns the pivots divided by."""
    cols = len(A[0]) if A else 0
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    E = eliminate(aug, cols + 1)
    if cols in E.pivots:
        return None
    x = [zero] * cols
    for r, pc in enumerate(E.pivots):
        x[pc] = E.rref[r][cols]
    return x, nullspace(A, cols, one, zero), E.pivot_factors


def nullspace_generic(
    A: Sequence[Sequence[Any]], ncols: int, one: Any = 1, zero: Any = 0
) -> tuple[list[list[Any]], list[Any]]:
    """Nullspace basis plus the pivots divided by."""
    E = eliminate(A, ncols)
    return nullspace(A, ncols, one, zero), E.pivot_factors


def solve_unique(A: Sequence[Sequence[Any]], b: Sequence[Any], one: Any = 1, zero: Any = 0) -> list[Any]:
    res = solve(A, b, one, zero)
    if res is None:
        raise SingularSystem("linear system is inconsistent")
    x, kern = res
    if kern:
        raise SingularSystem("linear system has a nontrivial kernel")
    return x


def inverse(A: Sequence[Sequence[Any]], one: Any = 1, zero: Any = 0) -> Matrix:
    n = len(A)
    aug = [list(row) + [one if i == j else zero for j in range(n)] for i, row in enumerate(A)]
    E = eliminate(aug, n)
    if E.rank < n:
        raise SingularSystem("matrix is singular")
    return [row[n:] for row in E.rref]


def independent_columns(A: Sequence[Sequence[Any]]) -> list[int]:
    """Indices of a maximal independent set of columns, first-come order."""
    E = eliminate(A)
    return E.pivots


def map_entries(A: Sequence[Sequence[Any]], f: Callable[[Any], Any]) -> Matrix:
    return [[f(x) for x in row] for row in A]


def in_span(vectors: Sequence[Sequence[Any]], candidate: Sequence[Any]) -> bool:
    """Whether ``candidate`` is a linear combination of ``vectors``."""
    if not vectors:
        return all(_is_zero(x) for x in candidate)
    cols = transpose(vectors)
    return rank([list(r) + [c] for r, c in zip(cols, candidate)]) == rank(cols)


def frac(x) -> Fraction:
    return Fraction(x)
