"""Conditional multipartite information of a source given a revealed value.

For a fixed fractional partition ``lambda`` the quantity evaluated here is

    H(X | L) - sum_B lambda_B * H(X_B | X_{B^c}, L)

where ``L`` is any function of the joint observation ``X``.  With the
optimal partition and a constant ``L`` this is the (n-fold) secret-key
capacity; revealing more can only shrink it, and it is always
nonnegative.

Two backends produce the same number: the enumeration oracle over an
explicit :class:`~skagree.sources.JointPMF`, and exact GF(2) rank
arithmetic for linear functions of network sources (see
:mod:`skagree.pin`).  The dispatching helpers below accept either kind
of model.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .partition import FractionalPartition, PartitionError
from .sources import (
    JointPMF,
    _as_callable,
    _entropy_of_dist,
    _projector,
    _pushforward,
    entropy_of_function,
    subset_entropy,
    terminals_from_mask,
)


@dataclass(frozen=True, eq=False)
class CmiReport:
    """Value plus the per-subset decomposition it was assembled from.

    ``value == conditional_entropy - sum(weighted_terms.values())`` holds
    exactly by construction; ``weighted_terms[B]`` is
    ``lambda_B * H(X_B | X_{B^c}, L)`` for each subset with nonzero weight.
    """

    value: Fraction | float
    backend: str
    lambda_used: FractionalPartition
    conditional_entropy: Fraction | float
    weighted_terms: Mapping[int, Fraction | float]

    def __repr__(self) -> str:
        return f"CmiReport({self.value!r}, backend={self.backend})"


def _check_partition(partition: FractionalPartition, m: int) -> None:
    if partition.m != m:
        raise PartitionError(
            f"partition is over {partition.m} terminals, model has {m}"
        )
    partition.validate()


def cmi_oracle(
    P: JointPMF, revealed, partition: FractionalPartition, *, exact: bool = False
) -> CmiReport:
    """Conditional multipartite information by direct enumeration.

    ``revealed`` is a callable or mapping on the support of ``P``.
    """
    _check_partition(partition, P.m)
    func = _as_callable(revealed)
    full = (1 << P.m) - 1
    h_all = subset_entropy(P, full, exact=exact)
    h_revealed = entropy_of_function(P, func, exact=exact)
    conditional = h_all - h_revealed
    terms: dict = {}
    for mask, w in partition.weights.items():
        proj = _projector(P.m, full ^ mask)
        joint = _pushforward(P, lambda o: (proj(o), func(o)))
        h_rest_and_revealed = _entropy_of_dist(joint.values(), exact)
        terms[mask] = w * (h_all - h_rest_and_revealed) if exact else float(w) * (
            h_all - h_rest_and_revealed
        )
    value = conditional - sum(terms.values())
    return CmiReport(
        value=value,
        backend="oracle",
        lambda_used=partition,
        conditional_entropy=conditional,
        weighted_terms=terms,
    )


def _constant_map(_outcome) -> int:
    return 0


def _revealed_entropy_and_disclosure(P, revealed, partition, exact):
    """H(L) and sum_B lambda_B H(L | X_{B^c}) for the oracle backend."""
    func = _as_callable(revealed)
    full = (1 << P.m) - 1
    h_revealed = entropy_of_function(P, func, exact=exact)
    disclosure = Fraction(0) if exact else 0.0
    for mask, w in partition.weights.items():
        h_cond = entropy_of_function(P, func, given=full ^ mask, exact=exact)
        disclosure += w * h_cond if exact else float(w) * h_cond
    return h_revealed, disclosure


def conditioning_identity_residual(
    model, revealed, partition: FractionalPartition | None = None, *, exact: bool = False
):
    """Residual of the exact decomposition of multipartite information.

    For any function ``L`` of the joint observation,

        cmi(constant) = cmi(L) + H(L) - sum_B lambda_B H(L | X_{B^c})

    holds with equality; this returns the left side minus the right side,
    each term evaluated independently.  Zero (exactly, on the rank
    backend) certifies that the entropy calculus is consistent.

    ``model`` is a :class:`~skagree.sources.JointPMF` (``partition``
    required) or a pin instance (``revealed`` a bit matrix; ``partition``
    defaults to the leave-one-out partition on complete graphs).
    """
    if isinstance(model, JointPMF):
        if partition is None:
            raise PartitionError("a fractional partition is required for pmf models")
        unconditioned = cmi_oracle(model, _constant_map, partition, exact=exact).value
        conditioned = cmi_oracle(model, revealed, partition, exact=exact).value
        h_revealed, disclosure = _revealed_entropy_and_disclosure(
            model, revealed, partition, exact
        )
        return unconditioned - (conditioned + h_revealed - disclosure)

    from . import pin as _pin

    return _pin.conditioning_identity_residual_rank(model, revealed, partition)


def disclosure_bound_margin(
    model, revealed, partition: FractionalPartition | None = None, *, exact: bool = False
):
    """Margin of ``H(L) >= cmi(constant) - cmi(L)``, always nonnegative.

    Publishing ``L`` cannot reduce the extractable secrecy by more than
    the entropy of ``L`` itself.  Returns
    ``H(L) + cmi(L) - cmi(constant)``.
    """
    if isinstance(model, JointPMF):
        if partition is None:
            raise PartitionError("a fractional partition is required for pmf models")
        unconditioned = cmi_oracle(model, _constant_map, partition, exact=exact).value
        conditioned = cmi_oracle(model, revealed, partition, exact=exact).value
        h_revealed = entropy_of_function(model, revealed, exact=exact)
        return h_revealed + conditioned - unconditioned

    from . import pin as _pin

    return _pin.disclosure_bound_margin_rank(model, revealed, partition)


def describe_terms(report: CmiReport) -> dict[str, str]:
    """Human-oriented rendering of a report's decomposition."""
    out = {"H(X|L)": str(report.conditional_entropy)}
    for mask, term in report.weighted_terms.items():
        subset = ",".join(map(str, terminals_from_mask(mask)))
        out[f"term[{subset}]"] = str(term)
    return out
