"""Secret-key capacity as a linear program over fractional partitions.

For ``m`` terminals, a fractional partition assigns a nonnegative weight
to every nonempty proper subset ``B`` of the terminal set so that the
weights of the subsets containing any fixed terminal sum to exactly one.
The secret-key capacity of a source is its total entropy minus the
maximum, over fractional partitions, of the weighted sum of conditional
entropies ``H(X_B | X_{B^c})``.  The maximization is solved exactly with
the rational simplex in :mod:`skagree.simplex`.

Subsets are bitmasks as in :mod:`skagree.sources`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping

from . import simplex
from .sources import terminals_from_mask

DEFAULT_DENOMINATOR_BOUND = 1 << 40


class PartitionError(ValueError):
    """A weight vector violates the fractional-partition constraints."""


def proper_subsets(m: int) -> range:
    """Masks of all nonempty proper subsets of ``{1..m}``, ascending."""
    return range(1, (1 << m) - 1)


@dataclass(frozen=True, eq=False)
class FractionalPartition:
    """Weights on nonempty proper terminal subsets; zero weights dropped."""

    m: int
    weights: Mapping[int, Fraction]

    def __init__(self, m: int, weights: Mapping[int, Fraction]):
        cleaned = {
            int(mask): Fraction(w) for mask, w in sorted(weights.items()) if w != 0
        }
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "weights", MappingProxyType(cleaned))

    def validate(self) -> None:
        """Raise :class:`PartitionError` naming the first violated constraint."""
        if self.m < 2:
            raise PartitionError("need at least 2 terminals")
        full = (1 << self.m) - 1
        for mask, w in self.weights.items():
            if mask <= 0 or mask >= full:
                raise PartitionError(
                    f"weight on subset {terminals_from_mask(mask)} which is not a "
                    "nonempty proper subset"
                )
            if w < 0:
                raise PartitionError(
                    f"negative weight {w} on subset {terminals_from_mask(mask)}"
                )
        for i in range(1, self.m + 1):
            covered = sum(
                (w for mask, w in self.weights.items() if mask >> (i - 1) & 1),
                Fraction(0),
            )
            if covered != 1:
                raise PartitionError(
                    f"weights covering terminal {i} sum to {covered}, expected 1"
                )

    def is_valid(self) -> bool:
        try:
            self.validate()
        except PartitionError:
            return False
        return True

    def objective(self, terms: Mapping[int, Fraction]) -> Fraction:
        """Weighted sum of per-subset objective terms."""
        return sum((w * Fraction(terms[mask]) for mask, w in self.weights.items()),
                   Fraction(0))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FractionalPartition)
            and self.m == other.m
            and dict(self.weights) == dict(other.weights)
        )

    def __repr__(self) -> str:
        inner = ", ".join(
            f"{set(terminals_from_mask(mask))}: {w}" for mask, w in self.weights.items()
        )
        return f"FractionalPartition(m={self.m}, {{{inner}}})"


def leave_one_out_partition(m: int) -> FractionalPartition:
    """Weight ``1/(m-1)`` on every subset that omits exactly one terminal.

    This is always a valid fractional partition, and for ``m = 2`` it is
    the unique one.
    """
    if m < 2:
        raise PartitionError("need at least 2 terminals")
    full = (1 << m) - 1
    w = Fraction(1, m - 1)
    return FractionalPartition(m, {full ^ (1 << i): w for i in range(m)})


@dataclass(frozen=True)
class CapacityResult:
    """Output of :func:`solve_capacity`.

    ``capacity = total_entropy - sum_B lambda_B * objective_terms[B]``
    with the sum taken at ``lambda_star``.
    """

    capacity: Fraction
    total_entropy: Fraction
    lambda_star: FractionalPartition
    objective_terms: Mapping[int, Fraction]
    exact: bool = True

    @property
    def optimum(self) -> Fraction:
        return self.total_entropy - self.capacity


@dataclass(frozen=True)
class OptimalityCertificate:
    optimal: bool
    objective: Fraction
    optimum: Fraction
    gap: Fraction = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "gap", self.optimum - self.objective)

    def __bool__(self) -> bool:
        return self.optimal


def _rationalize(entropies: Mapping, m: int, denominator_bound: int):
    """All-subset entropy map -> exact Fraction map plus an exactness flag."""
    if m < 2:
        raise ValueError("need at least 2 terminals")
    out: dict[int, Fraction] = {}
    exact = True
    for mask in range(1 << m):
        if mask not in entropies:
            raise ValueError(
                f"entropy map is missing subset {set(terminals_from_mask(mask)) or set()}"
            )
        v = entropies[mask]
        if isinstance(v, float):
            out[mask] = Fraction(v).limit_denominator(denominator_bound)
            exact = False
        else:
            out[mask] = Fraction(v)
    return out, exact


def solve_capacity(
    entropies: Mapping,
    m: int,
    *,
    denominator_bound: int = DEFAULT_DENOMINATOR_BOUND,
) -> CapacityResult:
    """Exact secret-key capacity from a complete subset-entropy map.

    ``entropies`` must map every subset mask of ``{1..m}`` (including 0
    and the full set) to ``H(X_A)``.  Float inputs are rounded to
    rationals no finer than ``denominator_bound`` and the result is
    flagged inexact.  The returned ``lambda_star`` is the deterministic
    optimal vertex found by Bland's rule.
    """
    h, exact = _rationalize(entropies, m, denominator_bound)
    full = (1 << m) - 1
    subsets = list(proper_subsets(m))
    terms = {mask: h[full] - h[full ^ mask] for mask in subsets}
    objective = [terms[mask] for mask in subsets]
    constraints = [
        [1 if mask >> i & 1 else 0 for mask in subsets] for i in range(m)
    ]
    rhs = [1] * m
    # Singleton subsets give an identity starting basis.
    basis = [(1 << i) - 1 for i in range(m)]
    opt, solution = simplex.maximize(objective, constraints, rhs, basis)
    lam = FractionalPartition(
        m, {mask: solution[j] for j, mask in enumerate(subsets) if solution[j]}
    )
    return CapacityResult(
        capacity=h[full] - opt,
        total_entropy=h[full],
        lambda_star=lam,
        objective_terms=MappingProxyType(terms),
        exact=exact,
    )


def verify_partition_optimal(
    entropies: Mapping,
    partition: FractionalPartition,
    *,
    denominator_bound: int = DEFAULT_DENOMINATOR_BOUND,
) -> OptimalityCertificate:
    """Check whether a valid fractional partition attains the LP optimum.

    Raises :class:`PartitionError` if ``partition`` violates the
    constraints; otherwise compares objectives exactly.
    """
    partition.validate()
    result = solve_capacity(entropies, partition.m, denominator_bound=denominator_bound)
    achieved = partition.objective(result.objective_terms)
    return OptimalityCertificate(
        optimal=achieved == result.optimum,
        objective=achieved,
        optimum=result.optimum,
    )


def canonical_lambda_star(
    result: CapacityResult, m: int
) -> tuple[FractionalPartition, bool]:
    """Standardize the optimal partition used downstream.

    Prefers the leave-one-out partition whenever it attains the optimum
    (so repeated runs agree on which optimum feeds conditional
    multipartite-information values); otherwise returns the solver's
    vertex, flagged non-canonical.
    """
    preferred = leave_one_out_partition(m)
    if preferred.objective(result.objective_terms) == result.optimum:
        return preferred, True
    return result.lambda_star, False
