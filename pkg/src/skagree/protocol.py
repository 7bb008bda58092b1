"""Interactive-communication checkers with exact (zero-slack) semantics.

A transcript is valid when every transmission lies in the GF(2) span of
the sender's own edge bits together with all earlier transmissions.  On
top of validity this module decides, by rank arithmetic alone, whether a
matrix is a common randomness (recoverable at every terminal from its
own bits plus the transcript), a secret key (a common randomness that is
independent of the transcript and meets a target rate), and an exact
common information (the source decouples completely given key and
transcript).  Everything is decided exactly; there are no tolerances.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .cmi import CmiReport
from .gf2 import BitMatrix, DimensionError, RowSpan, rank, restrict_columns, stack
from .partition import FractionalPartition, solve_capacity
from .pin import (
    GraphError,
    LinearTranscript,
    PinInstance,
    _resolve_partition,
    build_pin,
    cmi_rank,
    internal_columns,
    pin_subset_entropies,
    terminal_span,
)


class TranscriptError(ValueError):
    """A transcript violates a checker precondition."""


@dataclass(frozen=True)
class TranscriptVerdict:
    ok: bool
    first_violation: int | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class RecoveryVerdict:
    """Which (terminal, row index) pairs fail to be recoverable."""

    ok: bool
    failures: tuple[tuple[int, int], ...] = ()

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class SecretKeyVerdict:
    ok: bool
    recovery: RecoveryVerdict
    leakage: int
    key_rate: Fraction
    capacity: Fraction
    communication_bit_rate: Fraction
    communication_rank_rate: Fraction

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class CiVerdict:
    ok: bool
    cmi: CmiReport
    recovery: RecoveryVerdict

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class CommonRandomnessClaim:
    """A matrix claimed recoverable at every terminal from a transcript."""

    cr: BitMatrix
    transcript: LinearTranscript

    def verify(self) -> RecoveryVerdict:
        return is_common_randomness(self.cr, self.transcript)


def validate_transcript(transcript: LinearTranscript) -> TranscriptVerdict:
    """Check interactivity: row ``j`` must be computable by its sender.

    A transmission passes when it lies in the span of the sender's own
    edge-instance bits together with rows ``1..j-1``; the verdict reports
    the first index (1-based) that fails.
    """
    pin = transcript.pin
    history: list[int] = []
    for j, (sender, row) in enumerate(transcript.transmissions, start=1):
        if row >> pin.space.dimension:
            raise DimensionError(f"transmission {j} does not fit the column space")
        span = terminal_span(pin, sender, history)
        if row not in span:
            return TranscriptVerdict(ok=False, first_violation=j)
        history.append(row)
    return TranscriptVerdict(ok=True)


def is_common_randomness(cr: BitMatrix, transcript: LinearTranscript) -> RecoveryVerdict:
    """Exact recoverability of every row of ``cr`` at every terminal."""
    pin = transcript.pin
    if cr.space != pin.space:
        raise DimensionError("matrix is not over the transcript's column space")
    rows = [row for _, row in transcript.transmissions]
    failures = []
    for terminal in range(1, pin.graph.vertex_count + 1):
        span = terminal_span(pin, terminal, rows)
        for idx, row in enumerate(cr.rows):
            if row not in span:
                failures.append((terminal, idx))
    return RecoveryVerdict(ok=not failures, failures=tuple(failures))


def is_secret_key(
    key: BitMatrix, transcript: LinearTranscript, capacity
) -> SecretKeyVerdict:
    """Exact secret-key verdict at a target per-symbol rate.

    Passes iff the key is a common randomness, shares zero mutual
    information with the transcript, and ``rank(key)/n >= capacity``.
    """
    pin = transcript.pin
    recovery = is_common_randomness(key, transcript)
    comm = transcript.matrix
    leakage = rank(key) + rank(comm) - rank(stack(key, comm))
    key_rate = Fraction(rank(key), pin.n)
    capacity = Fraction(capacity)
    ok = recovery.ok and leakage == 0 and key_rate >= capacity
    return SecretKeyVerdict(
        ok=ok,
        recovery=recovery,
        leakage=leakage,
        key_rate=key_rate,
        capacity=capacity,
        communication_bit_rate=Fraction(transcript.r, pin.n),
        communication_rank_rate=Fraction(rank(comm), pin.n),
    )


def is_interactive_ci(
    cr: BitMatrix,
    transcript: LinearTranscript,
    partition: FractionalPartition | None = None,
) -> CiVerdict:
    """Does (cr, transcript) exactly decouple the source?

    Passes iff the conditional multipartite information of the source
    given the stacked matrix is exactly zero and ``cr`` is recoverable.
    """
    pin = transcript.pin
    stacked = stack(cr, transcript.matrix)
    report = cmi_rank(pin, stacked, partition)
    recovery = is_common_randomness(cr, transcript)
    return CiVerdict(ok=recovery.ok and report.value == 0, cmi=report, recovery=recovery)


def communication_entropy_margin(
    transcript: LinearTranscript,
    partition: FractionalPartition | None = None,
    *,
    require_valid: bool = True,
) -> Fraction:
    """Margin of the interactive-communication entropy inequality.

    For a valid transcript,
    ``H(F) >= sum_B lambda_B H(F | X_{B^c})`` holds and the returned
    margin is nonnegative.  ``require_valid=False`` skips the validity
    precondition so the inequality's failure on non-interactive rows can
    be demonstrated.
    """
    pin = transcript.pin
    if require_valid:
        verdict = validate_transcript(transcript)
        if not verdict:
            raise TranscriptError(
                f"transcript invalid at transmission {verdict.first_violation}"
            )
    lam = _resolve_partition(pin, partition)
    comm = transcript.matrix
    disclosure = sum(
        (
            w * rank(restrict_columns(comm, internal_columns(pin, mask)))
            for mask, w in lam.weights.items()
        ),
        Fraction(0),
    )
    return rank(comm) - disclosure


@dataclass(frozen=True)
class BoundReport:
    """Exact per-symbol accounting for a compiled key protocol.

    ``identity_residual`` re-derives the conditional multipartite
    information of the source given (key, transcript) from the
    decomposition
    ``capacity - H(K,F)/n + sum_B w_B H(F|X_{B^c})/n + sum_B w_B H(K|X_{B^c},F)/n``
    and subtracts it from the directly computed value; it is always zero.
    ``rate_lower_bound`` is the least communication rate any linear
    scheme of maximal key rate can use (full-recovery entropy minus
    capacity); ``bound_tight`` marks protocols that meet it exactly.
    """

    capacity: Fraction
    cmi_given_protocol: Fraction
    identity_residual: Fraction
    communication_bit_rate: Fraction
    communication_rank_rate: Fraction
    rate_lower_bound: Fraction
    bound_ok: bool
    bound_tight: bool
    sk: SecretKeyVerdict


def communication_bound_report(
    key: BitMatrix, transcript: LinearTranscript
) -> BoundReport:
    """Evaluate a complete-graph protocol against the linear rate floor."""
    pin = transcript.pin
    if not pin.graph.is_complete():
        raise GraphError("the rate floor is specific to complete base graphs")
    m = pin.graph.vertex_count
    n = pin.n
    base = build_pin(pin.graph, 1)
    cap_result = solve_capacity(pin_subset_entropies(base), m)
    capacity = Fraction(cap_result.capacity)
    sk = is_secret_key(key, transcript, capacity)
    lam = _resolve_partition(pin, None)
    comm = transcript.matrix
    joint = stack(key, comm)
    cmi_value = cmi_rank(pin, joint).value
    disclosure_comm = sum(
        (
            w * rank(restrict_columns(comm, internal_columns(pin, mask)))
            for mask, w in lam.weights.items()
        ),
        Fraction(0),
    )
    disclosure_key = sum(
        (
            w
            * (
                rank(restrict_columns(joint, internal_columns(pin, mask)))
                - rank(restrict_columns(comm, internal_columns(pin, mask)))
            )
            for mask, w in lam.weights.items()
        ),
        Fraction(0),
    )
    decomposition = (
        capacity
        - Fraction(rank(joint), n)
        + disclosure_comm / n
        + disclosure_key / n
    )
    bound = Fraction(base.space.dimension) - capacity
    comm_rate = Fraction(transcript.r, n)
    return BoundReport(
        capacity=capacity,
        cmi_given_protocol=cmi_value,
        identity_residual=cmi_value / n - decomposition,
        communication_bit_rate=comm_rate,
        communication_rank_rate=Fraction(rank(comm), n),
        rate_lower_bound=bound,
        bound_ok=comm_rate >= bound,
        bound_tight=comm_rate == bound,
        sk=sk,
    )


def random_transcript(
    pin: PinInstance, rng: random.Random, length: int
) -> LinearTranscript:
    """A random valid transcript: each step picks a sender uniformly and
    a uniform nonzero row from the span it is allowed to transmit."""
    transmissions: list[tuple[int, int]] = []
    history: list[int] = []
    m = pin.graph.vertex_count
    for _ in range(length):
        row = 0
        for _ in range(8 * m):
            sender = rng.randrange(1, m + 1)
            basis = terminal_span(pin, sender, history).basis
            if not basis:
                continue
            combo = rng.randrange(1, 1 << len(basis))
            row = 0
            for k, b in enumerate(basis):
                if combo >> k & 1:
                    row ^= b
            break
        if row == 0:
            break
        transmissions.append((sender, row))
        history.append(row)
    return LinearTranscript(pin, transmissions)
