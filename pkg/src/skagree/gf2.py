"""Bit-packed GF(2) linear algebra over labeled column spaces.

Rows are Python ints used as bit vectors: bit ``j`` of a row is the
coefficient of column ``j``, so row addition is XOR and elimination runs
word-parallel for free.  Columns carry opaque labels (for network sources,
edge-instance identifiers) so that sub-matrix selection is always done by
label, never by raw index arithmetic.

The entropy-flavored helpers interpret a matrix ``M`` as the linear map
``y -> M y`` applied to a vector ``y`` of independent fair bits.  For such
maps, Shannon entropy in bits equals the GF(2) rank of ``M``, and
conditioning on a subset ``S`` of the input coordinates equals deleting
the columns in ``S``.  ``skagree.sources`` provides the brute-force
enumeration oracle these identities are tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


class LabelError(KeyError):
    """A column label is unknown to, or duplicated in, a ColumnSpace."""


class DimensionError(ValueError):
    """Row width or column-space mismatch."""


class ColumnSpace:
    """An ordered set of distinct column labels.

    The order fixes the bit layout of every row over this space: the
    label at position ``j`` owns bit ``j`` (the ``j``-th least
    significant bit).
    """

    __slots__ = ("labels", "_index")

    def __init__(self, labels: Iterable):
        labels = tuple(labels)
        index: dict = {}
        for pos, lab in enumerate(labels):
            if lab in index:
                raise LabelError(f"duplicate column label {lab!r}")
            index[lab] = pos
        self.labels = labels
        self._index = index

    @classmethod
    def of_dimension(cls, p: int) -> "ColumnSpace":
        """Anonymous space with integer labels 0..p-1."""
        return cls(range(p))

    @property
    def dimension(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label) -> bool:
        return label in self._index

    def __iter__(self) -> Iterator:
        return iter(self.labels)

    def position(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise LabelError(f"unknown column label {label!r}") from None

    def mask_of(self, labels: Iterable) -> int:
        """Bitmask with a 1 at the position of each given label."""
        mask = 0
        for lab in labels:
            mask |= 1 << self.position(lab)
        return mask

    def __eq__(self, other) -> bool:
        return isinstance(other, ColumnSpace) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __repr__(self) -> str:
        return f"ColumnSpace({list(self.labels)!r})"


@dataclass(frozen=True)
class BitMatrix:
    """Immutable GF(2) matrix: a tuple of int rows over a ColumnSpace."""

    space: ColumnSpace
    rows: tuple[int, ...]

    def __init__(self, space: ColumnSpace, rows: Iterable[int] = ()):
        rows = tuple(rows)
        limit = 1 << space.dimension
        for r in rows:
            if not isinstance(r, int) or r < 0 or r >= limit:
                raise DimensionError(
                    f"row {r!r} does not fit in {space.dimension} columns"
                )
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_bits(cls, space: ColumnSpace, bit_rows: Iterable[Iterable[int]]) -> "BitMatrix":
        rows = []
        for bits in bit_rows:
            bits = list(bits)
            if len(bits) != space.dimension:
                raise DimensionError(
                    f"expected {space.dimension} bits per row, got {len(bits)}"
                )
            rows.append(sum((b & 1) << j for j, b in enumerate(bits)))
        return cls(space, rows)

    @classmethod
    def from_strings(cls, space: ColumnSpace, rows: Iterable[str]) -> "BitMatrix":
        """Rows as 0/1 strings; character ``j`` is column ``j``."""
        return cls.from_bits(space, ([int(c) for c in s] for s in rows))

    @classmethod
    def identity(cls, space: ColumnSpace) -> "BitMatrix":
        return cls(space, (1 << j for j in range(space.dimension)))

    @classmethod
    def empty(cls, space: ColumnSpace) -> "BitMatrix":
        return cls(space, ())

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def row_bits(self, i: int) -> tuple[int, ...]:
        return tuple((self.rows[i] >> j) & 1 for j in range(self.space.dimension))

    def to_hex(self) -> list[str]:
        width = max(1, (self.space.dimension + 3) // 4)
        return [format(r, f"0{width}x") for r in self.rows]

    @classmethod
    def from_hex(cls, space: ColumnSpace, rows: Iterable[str]) -> "BitMatrix":
        return cls(space, (int(s, 16) for s in rows))

    def __repr__(self) -> str:
        return f"BitMatrix({self.row_count}x{self.space.dimension})"


class RowSpan:
    """Row space of a set of int rows, kept as an eliminated basis.

    Pivoting is deterministic: each basis row is reduced so that its
    lowest set bit (lowest column index) is its pivot, and no other
    basis row shares that pivot.
    """

    __slots__ = ("_basis",)

    def __init__(self, rows: Iterable[int] = ()):
        self._basis: dict[int, int] = {}
        for r in rows:
            self.add(r)

    def reduce(self, row: int) -> int:
        """Remainder of ``row`` after elimination by the basis."""
        r = row
        while r:
            pivot = r & -r
            b = self._basis.get(pivot)
            if b is None:
                return r
            r ^= b
        return 0

    def add(self, row: int) -> bool:
        """Insert ``row``; return True iff the span grew."""
        r = self.reduce(row)
        if r == 0:
            return False
        self._basis[r & -r] = r
        return True

    def __contains__(self, row: int) -> bool:
        return self.reduce(row) == 0

    def __len__(self) -> int:
        return len(self._basis)

    @property
    def basis(self) -> tuple[int, ...]:
        """Basis rows ordered by pivot column."""
        return tuple(self._basis[p] for p in sorted(self._basis))


def rank(matrix: BitMatrix) -> int:
    """GF(2) row rank; 0 for an empty row list."""
    return len(RowSpan(matrix.rows))


def stack(upper: BitMatrix, lower: BitMatrix) -> BitMatrix:
    """Vertical concatenation; both operands must share the column space."""
    if upper.space != lower.space:
        raise DimensionError("cannot stack matrices over different column spaces")
    return BitMatrix(upper.space, upper.rows + lower.rows)


def restrict_columns(matrix: BitMatrix, keep: Iterable) -> BitMatrix:
    """Sub-matrix keeping exactly the columns labeled by ``keep``.

    Row count and the relative order of the kept columns are preserved.
    """
    keep = set(keep)
    for lab in keep:
        matrix.space.position(lab)
    kept = [lab for lab in matrix.space.labels if lab in keep]
    positions = [matrix.space.position(lab) for lab in kept]
    sub_space = ColumnSpace(kept)
    rows = []
    for r in matrix.rows:
        acc = 0
        for j, p in enumerate(positions):
            acc |= ((r >> p) & 1) << j
        rows.append(acc)
    return BitMatrix(sub_space, rows)


def drop_columns(matrix: BitMatrix, drop: Iterable) -> BitMatrix:
    """Sub-matrix with the labeled columns removed."""
    drop = set(drop)
    for lab in drop:
        matrix.space.position(lab)
    return restrict_columns(matrix, (lab for lab in matrix.space.labels if lab not in drop))


def entropy_of_linear(matrix: BitMatrix) -> int:
    """Entropy in bits of ``M y`` for ``y`` independent fair bits: rank(M)."""
    return rank(matrix)


def conditional_entropy_of_linear(matrix: BitMatrix, given: Iterable) -> int:
    """Entropy in bits of ``M y`` given the input coordinates in ``given``.

    Equals the rank of the sub-matrix on the complementary columns.
    """
    return rank(drop_columns(matrix, given))


def mutual_information_linear(first: BitMatrix, second: BitMatrix) -> int:
    """Mutual information in bits between two linear functions of the
    same vector of independent fair bits."""
    if first.space != second.space:
        raise DimensionError("operands live over different column spaces")
    return rank(first) + rank(second) - rank(stack(first, second))


def in_row_span(row: int, matrix: BitMatrix) -> bool:
    """True iff ``row`` lies in the row space of ``matrix``."""
    if not isinstance(row, int) or row < 0 or row >> matrix.space.dimension:
        raise DimensionError(f"row does not fit in {matrix.space.dimension} columns")
    return row in RowSpan(matrix.rows)


def unit_row(space: ColumnSpace, label) -> int:
    """Row selecting a single column."""
    return 1 << space.position(label)


def reduced_row_echelon(matrix: BitMatrix) -> BitMatrix:
    """Canonical reduced row-echelon form (rows sorted by pivot column)."""
    span = RowSpan(matrix.rows)
    basis = list(span.basis)
    # Back-substitute: clear every pivot from the other rows.
    for i, b in enumerate(basis):
        pivot = b & -b
        for j in range(len(basis)):
            if j != i and basis[j] & pivot:
                basis[j] ^= b
    basis.sort(key=lambda r: r & -r)
    return BitMatrix(matrix.space, basis)
