"""Seeded randomized campaigns checking the package's exact identities.

Each suite draws its instances from a :class:`random.Random` seeded by
the caller, evaluates one identity or inequality per trial, and records
a per-trial value (residual, margin, or comparison).  A trial fails only
when the exact contract is violated, so a clean run is reproducible
evidence, not a statistical statement.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import pin as pinmod
from . import protocol as protomod
from .cmi import cmi_oracle, conditioning_identity_residual
from .gf2 import (
    BitMatrix,
    ColumnSpace,
    conditional_entropy_of_linear,
    entropy_of_linear,
    rank,
)
from .partition import leave_one_out_partition
from .sources import entropy_of_function, mask_from_terminals, pin_to_pmf, uniform_bits_pmf


@dataclass(frozen=True)
class SuiteResult:
    name: str
    trials: int
    failures: tuple[int, ...]
    values: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok


def _random_matrix(rng: random.Random, space: ColumnSpace, max_rows: int | None = None) -> BitMatrix:
    p = space.dimension
    if max_rows is None:
        max_rows = p + 2
    count = rng.randint(0, max_rows)
    return BitMatrix(space, (rng.randrange(1 << p) for _ in range(count)))


_PMF_CACHE: dict[int, object] = {}


def _cached_uniform(p: int):
    if p not in _PMF_CACHE:
        _PMF_CACHE[p] = uniform_bits_pmf(p)
    return _PMF_CACHE[p]


def suite_rank_entropy(trials: int, seed: int) -> SuiteResult:
    """Enumeration entropy of a random linear map equals its rank, and
    conditioning on input coordinates equals deleting those columns."""
    rng = random.Random(seed)
    failures, values = [], []
    for t in range(trials):
        p = rng.randint(1, 12)
        space = ColumnSpace.of_dimension(p)
        matrix = _random_matrix(rng, space)
        pmf = _cached_uniform(p)

        def apply(outcome, rows=matrix.rows):
            packed = sum(bit << j for j, bit in enumerate(outcome))
            return tuple((row & packed).bit_count() & 1 for row in rows)

        h = entropy_of_function(pmf, apply, exact=True)
        cond_labels = [j for j in range(p) if rng.random() < 0.5]
        given_mask = mask_from_terminals(p, (j + 1 for j in cond_labels))
        h_cond = entropy_of_function(pmf, apply, given=given_mask, exact=True)
        r = entropy_of_linear(matrix)
        r_cond = conditional_entropy_of_linear(matrix, cond_labels)
        values.append(f"H={h} rank={r} H|S={h_cond} rank|S^c={r_cond}")
        if h != r or h_cond != r_cond:
            failures.append(t)
    return SuiteResult("rank-entropy", trials, tuple(failures), tuple(values))


def _alternating_pins(ms, n=1):
    return [pinmod.build_pin(pinmod.Graph.complete(m), n) for m in ms]


def suite_cond_identity(trials: int, seed: int) -> SuiteResult:
    """Zero residual of the multipartite-information decomposition, on
    both backends, for random revealed matrices."""
    rng = random.Random(seed)
    pins = _alternating_pins((3, 4))
    pmfs = [pin_to_pmf(p) for p in pins]
    lams = [leave_one_out_partition(p.graph.vertex_count) for p in pins]
    failures, values = [], []
    for t in range(trials):
        k = t % len(pins)
        pin, pmf, lam = pins[k], pmfs[k], lams[k]
        matrix = _random_matrix(rng, pin.space)
        rank_residual = conditioning_identity_residual(pin, matrix)
        oracle_residual = conditioning_identity_residual(
            pmf, pinmod.matrix_outcome_map(pin, matrix), lam
        )
        values.append(f"rank={rank_residual} oracle={oracle_residual:.3e}")
        if rank_residual != 0 or abs(oracle_residual) > 1e-9:
            failures.append(t)
    return SuiteResult("cond-identity", trials, tuple(failures), tuple(values))


def suite_cmi_formula(trials: int, seed: int) -> SuiteResult:
    """Rank-assembled conditional multipartite information matches the
    enumeration oracle, in floats and as exact rationals."""
    rng = random.Random(seed)
    pins = _alternating_pins((3, 4))
    pmfs = [pin_to_pmf(p) for p in pins]
    lams = [leave_one_out_partition(p.graph.vertex_count) for p in pins]
    failures, values = [], []
    for t in range(trials):
        k = t % len(pins)
        pin, pmf, lam = pins[k], pmfs[k], lams[k]
        matrix = _random_matrix(rng, pin.space)
        by_rank = pinmod.cmi_rank(pin, matrix).value
        func = pinmod.matrix_outcome_map(pin, matrix)
        by_oracle = cmi_oracle(pmf, func, lam).value
        by_oracle_exact = cmi_oracle(pmf, func, lam, exact=True).value
        values.append(f"rank={by_rank} oracle={by_oracle!r}")
        if abs(float(by_rank) - by_oracle) > 1e-9 or by_oracle_exact != by_rank:
            failures.append(t)
    return SuiteResult("cmi-formula", trials, tuple(failures), tuple(values))


def suite_comm_inequality(trials: int, seed: int) -> SuiteResult:
    """Nonnegative entropy margin for random valid interactive transcripts."""
    rng = random.Random(seed)
    pins = _alternating_pins((3, 4))
    failures, values = [], []
    for t in range(trials):
        pin = pins[t % len(pins)]
        transcript = protomod.random_transcript(pin, rng, rng.randint(0, 6))
        margin = protomod.communication_entropy_margin(transcript)
        values.append(str(margin))
        if margin < 0:
            failures.append(t)
    return SuiteResult("comm-ineq", trials, tuple(failures), tuple(values))


def suite_ci_bound(trials: int, seed: int) -> SuiteResult:
    """Any linear function below full column rank leaves secrecy behind.

    Random matrices of rank below the column count must have strictly
    positive conditional multipartite information, and stacking random
    rows until the value hits zero must land at full column rank.
    """
    rng = random.Random(seed)
    pins = _alternating_pins((3, 4)) + _alternating_pins((3, 4), n=2)
    failures, values = [], []
    for t in range(trials):
        pin = pins[t % len(pins)]
        p = pin.space.dimension
        if t % 5 == 4:
            rows: list[int] = []
            while pinmod.cmi_rank(pin, BitMatrix(pin.space, rows)).value != 0:
                rows.append(rng.randrange(1, 1 << p))
            achieved = rank(BitMatrix(pin.space, rows))
            values.append(f"stacked-to-zero rank={achieved}")
            if achieved < p:
                failures.append(t)
        else:
            matrix = _random_matrix(rng, pin.space, max_rows=p - 1)
            value = pinmod.cmi_rank(pin, matrix).value
            values.append(f"rank={rank(matrix)} cmi={value}")
            if value <= 0:
                failures.append(t)
    return SuiteResult("ci-bound", trials, tuple(failures), tuple(values))


def suite_incidence(trials: int, seed: int) -> SuiteResult:
    """Counting inequality between restricted ranks and full rank, plus
    the induced floor under the conditional multipartite information."""
    rng = random.Random(seed)
    pins = [
        pinmod.build_pin(pinmod.Graph.complete(m), n)
        for m in (3, 4, 5)
        for n in (1, 2)
    ]
    failures, values = [], []
    for t in range(trials):
        pin = pins[t % len(pins)]
        matrix = _random_matrix(rng, pin.space)
        margin = pinmod.incidence_rank_margin(pin, matrix)
        floor_gap = pinmod.cmi_rank(pin, matrix).value - pinmod.cmi_rank_lower_bound(
            pin, matrix
        )
        values.append(f"margin={margin} floor_gap={floor_gap}")
        if margin < 0 or floor_gap < 0:
            failures.append(t)
    return SuiteResult("incidence", trials, tuple(failures), tuple(values))


SUITES = {
    "rank-entropy": suite_rank_entropy,
    "cond-identity": suite_cond_identity,
    "cmi-formula": suite_cmi_formula,
    "comm-ineq": suite_comm_inequality,
    "ci-bound": suite_ci_bound,
    "incidence": suite_incidence,
}


def run_suite(name: str, trials: int, seed: int) -> SuiteResult:
    if name not in SUITES:
        raise ValueError(
            f"unknown suite {name!r}; available: {', '.join(sorted(SUITES))}"
        )
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return SUITES[name](trials, seed)
