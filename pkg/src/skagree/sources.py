"""Explicit finite joint sources and the brute-force entropy oracle.

A :class:`JointPMF` stores a joint distribution over ``m`` terminals with
exact rational probabilities.  Everything rank-based or LP-based in this
package can be cross-checked, at desk scale, against plain enumeration
over the support of such a pmf.

Entropies are computed in double precision from the exact probability
ratios.  When every aggregated probability is a dyadic unit fraction
``1/2**j`` (always the case for network sources built from fair bits),
``exact=True`` returns the entropy as an exact :class:`~fractions.Fraction`.

Subsets of terminals are bitmasks: bit ``i-1`` stands for terminal ``i``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import log2
from types import MappingProxyType
from typing import TYPE_CHECKING, Callable, Iterable, Mapping

if TYPE_CHECKING:  # pragma: no cover
    from .pin import PinInstance

Outcome = tuple[int, ...]


class PmfError(ValueError):
    """Invalid joint distribution."""


class OracleScaleError(ValueError):
    """The requested enumeration exceeds the configured oracle cap."""


class ExactnessError(ValueError):
    """Exact entropy requested for a distribution that is not dyadic."""


def mask_from_terminals(m: int, terminals: Iterable[int]) -> int:
    mask = 0
    for i in terminals:
        if not 1 <= i <= m:
            raise ValueError(f"terminal {i} outside 1..{m}")
        mask |= 1 << (i - 1)
    return mask


def terminals_from_mask(mask: int) -> tuple[int, ...]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def as_mask(m: int, subset) -> int:
    """Normalize a subset given as a bitmask or an iterable of terminal ids."""
    if isinstance(subset, int):
        if subset < 0 or subset >> m:
            raise ValueError(f"mask {subset:#x} outside 0..2^{m}-1")
        return subset
    return mask_from_terminals(m, subset)


@dataclass(frozen=True, eq=False)
class JointPMF:
    """Joint distribution of ``m`` finite-alphabet terminal observations.

    Alphabets are ``0..alphabet_sizes[i]-1``; probabilities are exact
    rationals summing to one.  Zero-probability outcomes are dropped.
    """

    m: int
    alphabet_sizes: tuple[int, ...]
    probabilities: Mapping[Outcome, Fraction]

    def __init__(self, m: int, alphabet_sizes: Iterable[int], probabilities: Mapping):
        alphabet_sizes = tuple(alphabet_sizes)
        if m < 1 or len(alphabet_sizes) != m:
            raise PmfError(f"need {m} alphabet sizes, got {len(alphabet_sizes)}")
        if any(s < 1 for s in alphabet_sizes):
            raise PmfError("alphabet sizes must be positive")
        cleaned: dict[Outcome, Fraction] = {}
        total = Fraction(0)
        for outcome, p in probabilities.items():
            outcome = tuple(outcome)
            if len(outcome) != m:
                raise PmfError(f"outcome {outcome} has wrong arity")
            for sym, size in zip(outcome, alphabet_sizes):
                if not 0 <= sym < size:
                    raise PmfError(f"symbol {sym} outside alphabet of size {size}")
            p = Fraction(p)
            if p < 0:
                raise PmfError(f"negative probability for {outcome}")
            total += p
            if p:
                cleaned[outcome] = cleaned.get(outcome, Fraction(0)) + p
        if total != 1:
            raise PmfError(f"probabilities sum to {total}, expected 1")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "alphabet_sizes", alphabet_sizes)
        object.__setattr__(self, "probabilities", MappingProxyType(cleaned))

    @property
    def support(self) -> tuple[Outcome, ...]:
        return tuple(self.probabilities)

    def __repr__(self) -> str:
        return f"JointPMF(m={self.m}, support={len(self.probabilities)})"


def uniform_bits_pmf(p: int) -> JointPMF:
    """Uniform distribution over ``p`` binary terminals."""
    prob = Fraction(1, 1 << p)
    outcomes = {bits: prob for bits in itertools.product((0, 1), repeat=p)}
    return JointPMF(p, (2,) * p, outcomes)


def pin_to_pmf(pin: "PinInstance", cap: int = 20) -> JointPMF:
    """Expand a pairwise-independent-network instance into an explicit pmf.

    Each terminal's symbol packs its incident edge-instance bits (bit ``k``
    is the terminal's ``k``-th incident column, in column order).  All
    ``2**p`` edge-bit assignments are equiprobable.
    """
    p = pin.space.dimension
    if p > cap:
        raise OracleScaleError(f"{p} edge instances exceed the oracle cap {cap}")
    m = pin.graph.vertex_count
    positions = {
        i: [pin.space.position(lab) for lab in pin.incidence[i]] for i in range(1, m + 1)
    }
    prob = Fraction(1, 1 << p)
    outcomes = {}
    for assign in range(1 << p):
        outcome = tuple(
            sum(((assign >> pos) & 1) << k for k, pos in enumerate(positions[i]))
            for i in range(1, m + 1)
        )
        outcomes[outcome] = prob
    sizes = tuple(1 << len(positions[i]) for i in range(1, m + 1))
    return JointPMF(m, sizes, outcomes)


def iid_power(P: JointPMF, n: int, cap: int = 1 << 20) -> JointPMF:
    """``n``-fold i.i.d. extension of ``P`` as an explicit product pmf.

    Terminal ``i``'s extended symbol encodes its ``n`` component symbols
    in base ``alphabet_sizes[i]``, copy 0 least significant.
    """
    if n < 1:
        raise ValueError("power must be >= 1")
    if len(P.probabilities) ** n > cap:
        raise OracleScaleError(
            f"support {len(P.probabilities)}^{n} exceeds the oracle cap {cap}"
        )
    outcomes: dict[Outcome, Fraction] = {}
    for combo in itertools.product(P.probabilities.items(), repeat=n):
        prob = Fraction(1)
        packed = [0] * P.m
        for k, (outcome, p) in enumerate(combo):
            prob *= p
            for i, sym in enumerate(outcome):
                packed[i] += sym * P.alphabet_sizes[i] ** k
        key = tuple(packed)
        outcomes[key] = outcomes.get(key, Fraction(0)) + prob
    sizes = tuple(s**n for s in P.alphabet_sizes)
    return JointPMF(P.m, sizes, outcomes)


def _entropy_of_dist(dist: Iterable[Fraction], exact: bool):
    if exact:
        total = Fraction(0)
        for p in dist:
            den = p.denominator
            if p.numerator != 1 or den & (den - 1):
                raise ExactnessError(f"probability {p} is not of the form 1/2^j")
            total += Fraction(den.bit_length() - 1, den)
        return total
    h = 0.0
    for p in dist:
        if p == 1:
            continue
        h -= float(p) * (log2(p.numerator) - log2(p.denominator))
    return h


def _pushforward(P: JointPMF, key: Callable[[Outcome], object]) -> dict:
    buckets: dict = {}
    for outcome, p in P.probabilities.items():
        k = key(outcome)
        buckets[k] = buckets.get(k, Fraction(0)) + p
    return buckets


def _as_callable(f) -> Callable[[Outcome], object]:
    if callable(f):
        return f

    def lookup(outcome: Outcome):
        try:
            return f[outcome]
        except KeyError:
            raise ValueError(
                f"function is not defined on support outcome {outcome}"
            ) from None

    return lookup


def _projector(m: int, mask: int) -> Callable[[Outcome], Outcome]:
    idx = [i - 1 for i in terminals_from_mask(mask)]
    return lambda outcome: tuple(outcome[i] for i in idx)


def subset_entropy(P: JointPMF, subset, *, exact: bool = False):
    """Shannon entropy in bits of the marginal on a terminal subset."""
    mask = as_mask(P.m, subset)
    if mask == 0:
        return Fraction(0) if exact else 0.0
    dist = _pushforward(P, _projector(P.m, mask))
    return _entropy_of_dist(dist.values(), exact)


def conditional_subset_entropy(P: JointPMF, subset, given, *, exact: bool = False):
    """H(X_A | X_C) = H(X_{A+C}) - H(X_C); A and C must be disjoint."""
    a = as_mask(P.m, subset)
    c = as_mask(P.m, given)
    if a & c:
        raise ValueError("subset and conditioning set overlap")
    return subset_entropy(P, a | c, exact=exact) - subset_entropy(P, c, exact=exact)


def entropy_of_function(P: JointPMF, f, given=None, *, exact: bool = False):
    """Entropy in bits of ``f(X)``; with ``given``, H(f(X) | X_C).

    ``f`` may be a callable or a mapping defined on the support.
    """
    func = _as_callable(f)
    if given is None:
        dist = _pushforward(P, func)
        return _entropy_of_dist(dist.values(), exact)
    c = as_mask(P.m, given)
    proj = _projector(P.m, c)
    joint = _pushforward(P, lambda o: (proj(o), func(o)))
    h_joint = _entropy_of_dist(joint.values(), exact)
    return h_joint - subset_entropy(P, c, exact=exact)


def pmf_to_json_obj(P: JointPMF) -> dict:
    """JSON-ready form: rationals rendered as strings."""
    return {
        "terminals": P.m,
        "alphabet_sizes": list(P.alphabet_sizes),
        "pmf": [
            [list(outcome), str(p)]
            for outcome, p in sorted(P.probabilities.items())
        ],
    }


def pmf_from_json_obj(obj: dict) -> JointPMF:
    try:
        m = obj["terminals"]
        sizes = obj["alphabet_sizes"]
        entries = obj["pmf"]
    except (KeyError, TypeError) as e:
        raise PmfError(f"malformed pmf object: missing {e}") from None
    probs = {}
    for entry in entries:
        try:
            outcome, p = entry
            key = tuple(int(s) for s in outcome)
            probs[key] = probs.get(key, Fraction(0)) + Fraction(str(p))
        except (TypeError, ValueError) as e:
            raise PmfError(f"malformed pmf entry {entry!r}: {e}") from None
    return JointPMF(m, sizes, probs)
