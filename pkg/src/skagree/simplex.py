"""Exact primal simplex over the rationals.

Solves ``maximize c.x  subject to  A x = b, x >= 0`` starting from a
caller-supplied feasible basis.  All arithmetic is in
:class:`~fractions.Fraction`, and both the entering and the leaving
variable are chosen by Bland's rule (lowest index), so the run is
deterministic and guaranteed to terminate.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


class SimplexError(ValueError):
    """Bad input to the solver (singular or infeasible starting basis)."""


class UnboundedError(RuntimeError):
    """The objective is unbounded above on the feasible region."""


def maximize(
    objective: Sequence,
    constraints: Sequence[Sequence],
    rhs: Sequence,
    basis: Sequence[int],
) -> tuple[Fraction, list[Fraction]]:
    """Return ``(optimal value, optimal solution)``.

    ``basis`` lists one variable index per constraint row; the columns it
    names must form an invertible matrix and the associated basic solution
    must be feasible (nonnegative after canonicalization).
    """
    c = [Fraction(v) for v in objective]
    m = len(constraints)
    n = len(c)
    if len(rhs) != m or len(basis) != m:
        raise SimplexError("constraint, rhs, and basis sizes disagree")
    T = [[Fraction(v) for v in row] for row in constraints]
    if any(len(row) != n for row in T):
        raise SimplexError("constraint row width disagrees with objective")
    b = [Fraction(v) for v in rhs]
    basis = list(basis)

    # Canonicalize: make column basis[i] equal the i-th unit vector.
    for i in range(m):
        col = basis[i]
        pivot_row = next((t for t in range(i, m) if T[t][col] != 0), None)
        if pivot_row is None:
            raise SimplexError(f"basis column {col} is singular")
        if pivot_row != i:
            T[i], T[pivot_row] = T[pivot_row], T[i]
            b[i], b[pivot_row] = b[pivot_row], b[i]
        _pivot(T, b, i, col)
    if any(v < 0 for v in b):
        raise SimplexError("starting basis is infeasible")

    while True:
        y = [c[basis[i]] for i in range(m)]
        entering = None
        for j in range(n):
            reduced = c[j] - sum(y[i] * T[i][j] for i in range(m))
            if reduced > 0:
                entering = j
                break
        if entering is None:
            break
        leaving = None
        best: Fraction | None = None
        for i in range(m):
            coeff = T[i][entering]
            if coeff > 0:
                ratio = b[i] / coeff
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[leaving]
                ):
                    best = ratio
                    leaving = i
        if leaving is None:
            raise UnboundedError("objective is unbounded")
        _pivot(T, b, leaving, entering)
        basis[leaving] = entering

    solution = [Fraction(0)] * n
    for i in range(m):
        solution[basis[i]] = b[i]
    value = sum((c[j] * solution[j] for j in range(n)), Fraction(0))
    return value, solution


def _pivot(T: list[list[Fraction]], b: list[Fraction], row: int, col: int) -> None:
    inv = 1 / T[row][col]
    T[row] = [v * inv for v in T[row]]
    b[row] *= inv
    for i in range(len(T)):
        if i != row and T[i][col]:
            factor = T[i][col]
            T[i] = [v - factor * w for v, w in zip(T[i], T[row])]
            b[i] -= factor * b[row]
