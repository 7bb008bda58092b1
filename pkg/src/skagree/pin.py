"""Pairwise independent network (PIN) sources on multigraphs.

Each edge of a base graph carries an independent fair bit observed by
both endpoints; an instance replicates every edge ``n`` times.  Linear
functions of the edge bits are :class:`~skagree.gf2.BitMatrix` values
over the instance's column space, one column per edge instance, so all
entropic quantities reduce to exact GF(2) rank arithmetic.

The module also packs edge-disjoint spanning trees (graphic matroid
union) and compiles each packing into a linear omniscience/key protocol:
per tree, one key bit and ``m - 2`` broadcast bits, every broadcast the
XOR of two edges meeting at its sender.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Iterable, Mapping

from .cmi import CmiReport
from .gf2 import (
    BitMatrix,
    ColumnSpace,
    DimensionError,
    RowSpan,
    rank,
    restrict_columns,
    unit_row,
)
from .partition import (
    FractionalPartition,
    PartitionError,
    leave_one_out_partition,
    solve_capacity,
)
from .sources import as_mask

# A column label is ((u, v, k), t): base edge between u < v, k-th parallel
# occurrence of that pair, t-th replication copy.
Label = tuple[tuple[int, int, int], int]


class GraphError(ValueError):
    """Invalid graph description (self-loop, bad vertex id, ...)."""


class PackingError(ValueError):
    """A claimed tree packing violates its invariants."""


@dataclass(frozen=True)
class Graph:
    """Multigraph on vertices ``1..vertex_count``; no self-loops."""

    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __init__(self, vertex_count: int, edges: Iterable[tuple[int, int]]):
        if vertex_count < 1:
            raise GraphError("need at least one vertex")
        normalized = []
        for u, v in edges:
            if not (1 <= u <= vertex_count and 1 <= v <= vertex_count):
                raise GraphError(f"edge ({u},{v}) outside vertices 1..{vertex_count}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            normalized.append((min(u, v), max(u, v)))
        object.__setattr__(self, "vertex_count", vertex_count)
        object.__setattr__(self, "edges", tuple(normalized))

    @classmethod
    def complete(cls, m: int) -> "Graph":
        return cls(m, [(u, v) for u in range(1, m + 1) for v in range(u + 1, m + 1)])

    def is_connected(self) -> bool:
        if self.vertex_count == 1:
            return True
        adjacency: dict[int, set[int]] = {v: set() for v in range(1, self.vertex_count + 1)}
        for u, v in self.edges:
            adjacency[u].add(v)
            adjacency[v].add(u)
        seen = {1}
        frontier = deque([1])
        while frontier:
            v = frontier.popleft()
            for w in adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return len(seen) == self.vertex_count

    def is_complete(self) -> bool:
        """True iff every vertex pair appears exactly once."""
        m = self.vertex_count
        return m >= 2 and sorted(self.edges) == sorted(
            (u, v) for u in range(1, m + 1) for v in range(u + 1, m + 1)
        ) and len(self.edges) == m * (m - 1) // 2


@dataclass(frozen=True, eq=False)
class PinInstance:
    """A graph, a replication count, and the induced labeled column space."""

    graph: Graph
    n: int
    space: ColumnSpace
    incidence: Mapping[int, tuple[Label, ...]]

    def __repr__(self) -> str:
        return (
            f"PinInstance(m={self.graph.vertex_count}, n={self.n}, "
            f"columns={self.space.dimension})"
        )


def build_pin(graph: Graph, n: int) -> PinInstance:
    """Replicate every edge ``n`` times with a canonical column order.

    Base edges are sorted by (min endpoint, max endpoint, insertion
    index); the ``n`` copies of each edge are then laid out consecutively
    by copy index.  The fixed order makes every downstream matrix
    bit-exact reproducible.
    """
    if graph.vertex_count < 2:
        raise GraphError("a network source needs at least 2 terminals")
    if n < 1:
        raise GraphError("replication count must be >= 1")
    occurrence: dict[tuple[int, int], int] = {}
    edge_ids = []
    for u, v in graph.edges:
        k = occurrence.get((u, v), 0)
        occurrence[(u, v)] = k + 1
        edge_ids.append((u, v, k))
    edge_ids.sort()
    labels: list[Label] = [(eid, t) for eid in edge_ids for t in range(n)]
    space = ColumnSpace(labels)
    incidence = {i: [] for i in range(1, graph.vertex_count + 1)}
    for lab in labels:
        (u, v, _), _ = lab
        incidence[u].append(lab)
        incidence[v].append(lab)
    return PinInstance(
        graph=graph,
        n=n,
        space=space,
        incidence=MappingProxyType({i: tuple(v) for i, v in incidence.items()}),
    )


def incident_columns(pin: PinInstance, subset) -> tuple[Label, ...]:
    """Labels of edge instances with at least one endpoint in ``subset``."""
    mask = as_mask(pin.graph.vertex_count, subset)
    return tuple(
        lab
        for lab in pin.space.labels
        if (mask >> (lab[0][0] - 1) & 1) or (mask >> (lab[0][1] - 1) & 1)
    )


def internal_columns(pin: PinInstance, subset) -> tuple[Label, ...]:
    """Labels of edge instances with both endpoints in ``subset``."""
    mask = as_mask(pin.graph.vertex_count, subset)
    return tuple(
        lab
        for lab in pin.space.labels
        if (mask >> (lab[0][0] - 1) & 1) and (mask >> (lab[0][1] - 1) & 1)
    )


def pin_subset_entropies(pin: PinInstance) -> dict[int, int]:
    """``H(X_A)`` for every terminal subset: incident edge instances.

    Feeds :func:`skagree.partition.solve_capacity` with exact integers.
    """
    m = pin.graph.vertex_count
    return {mask: len(incident_columns(pin, mask)) for mask in range(1 << m)}


def _check_space(pin: PinInstance, matrix: BitMatrix) -> None:
    if matrix.space != pin.space:
        raise DimensionError("matrix is not over this instance's column space")


def _resolve_partition(
    pin: PinInstance, partition: FractionalPartition | None
) -> FractionalPartition:
    if partition is None:
        if not pin.graph.is_complete():
            raise PartitionError(
                "non-complete base graph: supply the optimal fractional partition"
            )
        return leave_one_out_partition(pin.graph.vertex_count)
    if partition.m != pin.graph.vertex_count:
        raise PartitionError(
            f"partition is over {partition.m} terminals, instance has "
            f"{pin.graph.vertex_count}"
        )
    partition.validate()
    return partition


def cmi_rank(
    pin: PinInstance, revealed: BitMatrix, partition: FractionalPartition | None = None
) -> CmiReport:
    """Conditional multipartite information of the source given ``revealed``.

    All terms are exact rationals assembled from GF(2) ranks:
    ``H(X|L) = p - rank(L)`` and, for each weighted subset ``B``,
    ``H(X_B | X_{B^c}, L)`` equals ``p`` minus the incident-column count
    of ``B^c`` minus the rank of ``L`` restricted to the columns internal
    to ``B``.

    For complete base graphs the default partition is the leave-one-out
    one, and the assembled value agrees with the closed form
    ``n*m/2 - rank(L) + (sum_i rank(L on columns avoiding i)) / (m-1)``.
    """
    _check_space(pin, revealed)
    closed_form = partition is None and pin.graph.is_complete()
    lam = _resolve_partition(pin, partition)
    m = pin.graph.vertex_count
    p = pin.space.dimension
    full = (1 << m) - 1
    r = rank(revealed)
    conditional = Fraction(p - r)
    terms: dict[int, Fraction] = {}
    for mask, w in lam.weights.items():
        incident = len(incident_columns(pin, full ^ mask))
        inner_rank = rank(restrict_columns(revealed, internal_columns(pin, mask)))
        terms[mask] = w * (p - incident - inner_rank)
    value = conditional - sum(terms.values(), Fraction(0))
    if closed_form:
        avoiding = sum(
            rank(restrict_columns(revealed, _columns_avoiding(pin, i)))
            for i in range(1, m + 1)
        )
        assert value == Fraction(pin.n * m, 2) - r + Fraction(avoiding, m - 1)
    return CmiReport(
        value=value,
        backend="rank",
        lambda_used=lam,
        conditional_entropy=conditional,
        weighted_terms=terms,
    )


def _columns_avoiding(pin: PinInstance, terminal: int) -> tuple[Label, ...]:
    return tuple(
        lab for lab in pin.space.labels if terminal not in (lab[0][0], lab[0][1])
    )


def cmi_rank_lower_bound(pin: PinInstance, revealed: BitMatrix) -> Fraction:
    """``n*m/2 - rank(L)/(m-1)``: a floor under :func:`cmi_rank`.

    Valid for complete base graphs, where every key bit a revealed row
    could cancel is shared by exactly two of the ``m`` terminals.
    """
    _check_space(pin, revealed)
    if not pin.graph.is_complete():
        raise GraphError("the closed-form floor is specific to complete base graphs")
    m = pin.graph.vertex_count
    return Fraction(pin.n * m, 2) - Fraction(rank(revealed), m - 1)


def incidence_rank_margin(pin: PinInstance, revealed: BitMatrix) -> int:
    """Margin of ``sum_i rank(L on columns avoiding i) >= (m-2) rank(L)``.

    Nonnegative because each edge instance meets exactly two terminals,
    so each basis column of ``L`` survives in ``m - 2`` of the restricted
    matrices.
    """
    _check_space(pin, revealed)
    m = pin.graph.vertex_count
    total = sum(
        rank(restrict_columns(revealed, _columns_avoiding(pin, i)))
        for i in range(1, m + 1)
    )
    return total - (m - 2) * rank(revealed)


def conditioning_identity_residual_rank(
    pin: PinInstance, revealed: BitMatrix, partition: FractionalPartition | None = None
) -> Fraction:
    """Rank-backend residual for :func:`skagree.cmi.conditioning_identity_residual`."""
    lam = _resolve_partition(pin, partition)
    unconditioned = cmi_rank(pin, BitMatrix.empty(pin.space), lam).value
    conditioned = cmi_rank(pin, revealed, lam).value
    h_revealed = rank(revealed)
    disclosure = sum(
        (
            w * rank(restrict_columns(revealed, internal_columns(pin, mask)))
            for mask, w in lam.weights.items()
        ),
        Fraction(0),
    )
    return unconditioned - (conditioned + h_revealed - disclosure)


def disclosure_bound_margin_rank(
    pin: PinInstance, revealed: BitMatrix, partition: FractionalPartition | None = None
) -> Fraction:
    """Rank-backend margin for :func:`skagree.cmi.disclosure_bound_margin`."""
    lam = _resolve_partition(pin, partition)
    unconditioned = cmi_rank(pin, BitMatrix.empty(pin.space), lam).value
    conditioned = cmi_rank(pin, revealed, lam).value
    return rank(revealed) + conditioned - unconditioned


def matrix_outcome_map(pin: PinInstance, matrix: BitMatrix) -> Callable:
    """Lift a bit matrix to a map on oracle outcomes of this instance.

    The returned callable expects outcomes as produced by
    :func:`skagree.sources.pin_to_pmf` and returns the matrix-vector
    product as a packed int, recovering each edge bit from the symbol of
    its lower-numbered endpoint.
    """
    _check_space(pin, matrix)
    slot = {}
    for i, labs in pin.incidence.items():
        for k, lab in enumerate(labs):
            if i == min(lab[0][0], lab[0][1]):
                slot[lab] = (i - 1, k)
    extractors = [slot[lab] for lab in pin.space.labels]

    def apply(outcome: tuple[int, ...]) -> int:
        bits = 0
        for col, (term_idx, k) in enumerate(extractors):
            bits |= ((outcome[term_idx] >> k) & 1) << col
        return sum(
            ((row & bits).bit_count() & 1) << j for j, row in enumerate(matrix.rows)
        )

    return apply


# ---------------------------------------------------------------------------
# Spanning tree packing (graphic matroid union)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TreePacking:
    """Pairwise edge-disjoint spanning trees, each a tuple of labels."""

    trees: tuple[tuple[Label, ...], ...]

    def __len__(self) -> int:
        return len(self.trees)

    def validate(self, pin: PinInstance) -> None:
        m = pin.graph.vertex_count
        seen: set[Label] = set()
        for tree in self.trees:
            if len(tree) != m - 1:
                raise PackingError(f"tree has {len(tree)} edges, expected {m - 1}")
            for lab in tree:
                if lab not in pin.space:
                    raise PackingError(f"unknown edge instance {lab!r}")
                if lab in seen:
                    raise PackingError(f"edge instance {lab!r} reused across trees")
                seen.add(lab)
            if not _is_spanning_tree(tree, m):
                raise PackingError(f"edge set {tree!r} is not a spanning tree")


def _endpoints(lab: Label) -> tuple[int, int]:
    return lab[0][0], lab[0][1]


def _is_spanning_tree(edges: Iterable[Label], m: int) -> bool:
    parent = list(range(m + 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    count = 0
    for lab in edges:
        u, v = _endpoints(lab)
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
        count += 1
    return count == m - 1


def _forest_path(
    forest: set[Label], a: int, b: int, poskey: Callable[[Label], int]
) -> list[Label] | None:
    """Edge labels on the path from a to b, or None if disconnected."""
    if a == b:
        return []
    adjacency: dict[int, list[tuple[int, int, Label]]] = {}
    for lab in forest:
        u, v = _endpoints(lab)
        adjacency.setdefault(u, []).append((poskey(lab), v, lab))
        adjacency.setdefault(v, []).append((poskey(lab), u, lab))
    via: dict[int, tuple[int, Label]] = {}
    frontier = deque([a])
    seen = {a}
    while frontier:
        v = frontier.popleft()
        for _, w, lab in sorted(adjacency.get(v, ())):
            if w not in seen:
                seen.add(w)
                via[w] = (v, lab)
                if w == b:
                    frontier.clear()
                    break
                frontier.append(w)
    if b not in via:
        return None
    path = []
    v = b
    while v != a:
        v, lab = via[v]
        path.append(lab)
    path.reverse()
    return path


def _try_place(
    element: Label,
    forests: list[set[Label]],
    assignment: dict[Label, int],
    poskey: Callable[[Label], int],
) -> bool:
    """Insert one unassigned edge instance, cascading swaps if needed.

    Breadth-first search over elements: an element can enter a forest
    directly if its endpoints are disconnected there, or after evicting
    one edge of the cycle it would close.  The search visits each element
    once, so shortest eviction chains are found first.
    """
    parent: dict[Label, Label | None] = {element: None}
    queue = deque([element])
    while queue:
        y = queue.popleft()
        uy, vy = _endpoints(y)
        home = assignment.get(y)
        paths: list[tuple[int, list[Label]]] = []
        for i, forest in enumerate(forests):
            if i == home:
                continue
            path = _forest_path(forest, uy, vy, poskey)
            if path is None:
                _apply_chain(y, i, parent, forests, assignment)
                return True
            paths.append((i, path))
        for _, path in paths:
            for lab in path:
                if lab not in parent:
                    parent[lab] = y
                    queue.append(lab)
    return False


def _apply_chain(
    terminal: Label,
    destination: int,
    parent: dict[Label, Label | None],
    forests: list[set[Label]],
    assignment: dict[Label, int],
) -> None:
    cur: Label | None = terminal
    dest = destination
    while cur is not None:
        old = assignment.get(cur)
        forests[dest].add(cur)
        assignment[cur] = dest
        if old is not None:
            forests[old].discard(cur)
        cur = parent[cur]
        if old is None:
            break
        dest = old


def pack_spanning_trees(pin: PinInstance) -> TreePacking:
    """A maximum set of pairwise edge-disjoint spanning trees.

    Grows the number of forests one at a time, re-attempting every
    unplaced edge instance via matroid-union augmentation, and keeps the
    last stage in which every forest filled to ``m - 1`` edges.  Returns
    an empty packing for disconnected base graphs.
    """
    m = pin.graph.vertex_count
    if not pin.graph.is_connected():
        return TreePacking(())
    labels = pin.space.labels
    poskey = pin.space.position
    target = m - 1
    forests: list[set[Label]] = []
    assignment: dict[Label, int] = {}
    best: tuple[tuple[Label, ...], ...] = ()
    for _ in range(len(labels) // target):
        forests.append(set())
        for lab in labels:
            if lab not in assignment:
                if _try_place(lab, forests, assignment, poskey):
                    _check_forests(forests, m)
        if all(len(f) == target for f in forests):
            best = tuple(tuple(sorted(f, key=poskey)) for f in forests)
        else:
            break
    packing = TreePacking(best)
    packing.validate(pin)
    return packing


def _check_forests(forests: list[set[Label]], m: int) -> None:
    for forest in forests:
        parent = list(range(m + 1))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for lab in forest:
            u, v = _endpoints(lab)
            ru, rv = find(u), find(v)
            if ru == rv:
                raise PackingError("internal error: augmentation created a cycle")
            parent[ru] = rv


def packing_rate(graph: Graph, n: int) -> Fraction:
    """Edge-disjoint spanning trees of the n-fold instance, per copy."""
    pin = build_pin(graph, n)
    return Fraction(len(pack_spanning_trees(pin)), n)


def omniscience_rate(pin: PinInstance) -> Fraction:
    """Minimum per-symbol communication rate for every terminal to
    recover all edge bits: total entropy minus secret-key capacity."""
    base = build_pin(pin.graph, 1)
    result = solve_capacity(pin_subset_entropies(base), base.graph.vertex_count)
    return Fraction(result.total_entropy) - Fraction(result.capacity)


# ---------------------------------------------------------------------------
# Linear transcripts and the tree protocol compiler
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearTranscript:
    """Ordered public transmissions: (sender terminal, row over the space).

    Validity (each row computable from the sender's own bits plus prior
    transmissions) is checked by :func:`skagree.protocol.validate_transcript`.
    """

    pin: PinInstance
    transmissions: tuple[tuple[int, int], ...]

    def __init__(self, pin: PinInstance, transmissions: Iterable[tuple[int, int]]):
        transmissions = tuple((int(s), int(r)) for s, r in transmissions)
        limit = 1 << pin.space.dimension
        for sender, row in transmissions:
            if not 1 <= sender <= pin.graph.vertex_count:
                raise GraphError(f"sender {sender} is not a terminal")
            if not 0 <= row < limit:
                raise DimensionError("transmission row does not fit the column space")
        object.__setattr__(self, "pin", pin)
        object.__setattr__(self, "transmissions", transmissions)

    @property
    def r(self) -> int:
        return len(self.transmissions)

    @property
    def matrix(self) -> BitMatrix:
        return BitMatrix(self.pin.space, (row for _, row in self.transmissions))


@dataclass(frozen=True)
class PinProtocol:
    """Compiled linear protocol: transcript, key matrix, and the claimed
    common randomness (the identity, i.e. full omniscience)."""

    transcript: LinearTranscript
    key: BitMatrix
    cr: BitMatrix

    @property
    def key_rate(self) -> Fraction:
        return Fraction(rank(self.key), self.transcript.pin.n)

    @property
    def communication_bit_rate(self) -> Fraction:
        return Fraction(self.transcript.r, self.transcript.pin.n)

    @property
    def communication_rank_rate(self) -> Fraction:
        return Fraction(rank(self.transcript.matrix), self.transcript.pin.n)


def compile_tree_protocol(pin: PinInstance, packing: TreePacking) -> PinProtocol:
    """Compile a spanning-tree packing into key and broadcast matrices.

    Per tree: root at terminal 1, key bit = the root's lowest-column tree
    edge, and one broadcast per remaining tree edge pairing it with its
    parent edge (the key edge, for the root's other edges), sent by the
    shared endpoint in breadth-first order.  Every broadcast XORs two
    edges at its sender, each terminal can chain from any incident tree
    edge to the key bit, and key rows stay independent of all broadcasts.
    """
    packing.validate(pin)
    space = pin.space
    transmissions: list[tuple[int, int]] = []
    key_rows: list[int] = []
    for tree in packing.trees:
        adjacency: dict[int, list[tuple[int, int, Label]]] = {}
        for lab in tree:
            u, v = _endpoints(lab)
            adjacency.setdefault(u, []).append((space.position(lab), v, lab))
            adjacency.setdefault(v, []).append((space.position(lab), u, lab))
        for lists in adjacency.values():
            lists.sort()
        root = 1
        parent_edge: dict[int, Label | None] = {root: None}
        order = [root]
        frontier = deque([root])
        while frontier:
            v = frontier.popleft()
            for _, w, lab in adjacency[v]:
                if w not in parent_edge:
                    parent_edge[w] = lab
                    order.append(w)
                    frontier.append(w)
        root_edges = [lab for _, _, lab in adjacency[root]]
        key_lab = root_edges[0]
        key_rows.append(unit_row(space, key_lab))
        for v in order:
            if v == root:
                for lab in root_edges[1:]:
                    transmissions.append(
                        (root, unit_row(space, key_lab) ^ unit_row(space, lab))
                    )
            else:
                pe = parent_edge[v]
                for _, w, lab in adjacency[v]:
                    if lab != pe and parent_edge.get(w) == lab:
                        transmissions.append(
                            (v, unit_row(space, pe) ^ unit_row(space, lab))
                        )
    return PinProtocol(
        transcript=LinearTranscript(pin, transmissions),
        key=BitMatrix(space, key_rows),
        cr=BitMatrix.identity(space),
    )


def terminal_view(pin: PinInstance, terminal: int) -> BitMatrix:
    """Unit rows of the edge instances incident to one terminal."""
    if terminal not in pin.incidence:
        raise GraphError(f"terminal {terminal} is not a vertex")
    return BitMatrix(
        pin.space, (unit_row(pin.space, lab) for lab in pin.incidence[terminal])
    )


def terminal_span(pin: PinInstance, terminal: int, extra_rows: Iterable[int] = ()) -> RowSpan:
    """Row span of a terminal's own bits plus any extra public rows."""
    span = RowSpan(unit_row(pin.space, lab) for lab in pin.incidence[terminal])
    for row in extra_rows:
        span.add(row)
    return span
