"""Hypergraph and node-attribute containers.

A hypergraph is stored as a list of node sets with positive integer
weights, backed by flat CSR-style arrays (``edge_offsets``/``edge_members``)
so numerical kernels can iterate edges without Python-level loops.
External node labels are remapped to dense indices at build time; the
mapping is kept so results stay joinable back to the source data.

Instances are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ValidationError

Label = Hashable


@dataclass(frozen=True)
class Hypergraph:
    """Node universe plus weighted hyperedges over dense node indices."""

    num_nodes: int
    edges: tuple[tuple[int, ...], ...]          # sorted node tuples, |e| >= 2
    weights: np.ndarray                         # (E,) positive int64
    node_labels: tuple[Label, ...]              # dense index -> external label
    max_size: int = field(init=False)
    edge_offsets: np.ndarray = field(init=False)   # (E+1,) int64
    edge_members: np.ndarray = field(init=False)   # (sum |e|,) int64

    def __post_init__(self):
        sizes = np.fromiter((len(e) for e in self.edges), dtype=np.int64,
                            count=len(self.edges))
        offsets = np.zeros(len(self.edges) + 1, dtype=np.int64)
        np.cumsum(sizes, out=offsets[1:])
        members = np.fromiter((i for e in self.edges for i in e),
                              dtype=np.int64, count=int(offsets[-1]))
        weights = np.asarray(self.weights, dtype=np.int64)
        for arr in (offsets, members, weights):
            arr.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "edge_offsets", offsets)
        object.__setattr__(self, "edge_members", members)
        object.__setattr__(self, "max_size", int(sizes.max()) if len(sizes) else 0)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def total_incidence(self) -> int:
        """Sum of hyperedge sizes."""
        return int(self.edge_offsets[-1])

    def edge_set(self) -> frozenset[tuple[int, ...]]:
        """Observed node tuples, for membership tests against sampled sets."""
        return frozenset(self.edges)

    def label_to_index(self) -> dict[Label, int]:
        return {lab: i for i, lab in enumerate(self.node_labels)}

    def subset(self, edge_ids: Sequence[int]) -> "Hypergraph":
        """New hypergraph restricted to the given edge ids.

        Keeps the full node universe and label mapping, so likelihood
        constants computed on the parent stay applicable.
        """
        ids = list(edge_ids)
        return Hypergraph(
            num_nodes=self.num_nodes,
            edges=tuple(self.edges[i] for i in ids),
            weights=self.weights[ids].copy(),
            node_labels=self.node_labels,
        )


def build_hypergraph(
    raw_edges: Iterable[tuple[Sequence[Label], int]],
    nodes: Sequence[Label] | None = None,
) -> Hypergraph:
    """Build a validated hypergraph from (node-id list, weight) pairs.

    Node ids are arbitrary hashables (typically strings) and get remapped
    to dense indices in first-seen order, or in the order of ``nodes``
    when the full universe is supplied (e.g. to keep isolated nodes).
    Duplicate node sets are merged by summing weights.  Hyperedges with
    repeated nodes, fewer than two nodes, or non-positive weights are
    rejected.
    """
    index: dict[Label, int] = {}
    labels: list[Label] = []
    if nodes is not None:
        for lab in nodes:
            if lab in index:
                raise ValidationError(f"duplicate node label {lab!r} in node list")
            index[lab] = len(labels)
            labels.append(lab)

    merged: dict[tuple[int, ...], int] = {}
    n_raw = 0
    for raw_nodes, weight in raw_edges:
        n_raw += 1
        if not isinstance(weight, (int, np.integer)) or isinstance(weight, bool):
            raise ValidationError(
                f"hyperedge {list(raw_nodes)!r}: weight must be a positive integer, "
                f"got {weight!r}")
        if weight <= 0:
            raise ValidationError(
                f"hyperedge {list(raw_nodes)!r}: non-positive weight {weight}")
        if len(set(raw_nodes)) != len(raw_nodes):
            raise ValidationError(
                f"hyperedge {list(raw_nodes)!r}: repeated node (multi-sets are "
                "not supported)")
        if len(raw_nodes) < 2:
            raise ValidationError(
                f"hyperedge {list(raw_nodes)!r}: needs at least 2 distinct nodes")
        idxs = []
        for lab in raw_nodes:
            if lab not in index:
                if nodes is not None:
                    raise ValidationError(
                        f"hyperedge node {lab!r} not in the declared node list")
                index[lab] = len(labels)
                labels.append(lab)
            idxs.append(index[lab])
        key = tuple(sorted(idxs))
        merged[key] = merged.get(key, 0) + int(weight)

    if n_raw == 0:
        raise ValidationError("empty hyperedge list")

    edges = tuple(merged.keys())
    weights = np.fromiter(merged.values(), dtype=np.int64, count=len(merged))
    return Hypergraph(num_nodes=len(labels), edges=edges, weights=weights,
                      node_labels=tuple(labels))


@dataclass(frozen=True)
class IncidenceIndex:
    """Per-node lists of incident hyperedge ids, in CSR layout."""

    node_offsets: np.ndarray   # (N+1,) int64
    edge_ids: np.ndarray       # (sum |e|,) int64, ascending per node

    def edges_of(self, node: int) -> np.ndarray:
        return self.edge_ids[self.node_offsets[node]:self.node_offsets[node + 1]]

    @property
    def total_length(self) -> int:
        return int(self.node_offsets[-1])


def incidence_index(h: Hypergraph) -> IncidenceIndex:
    """Invert the edge->nodes map into a node->edges map.

    Edge ids come out ascending within each node's list because edges are
    visited in id order.
    """
    counts = np.bincount(h.edge_members, minlength=h.num_nodes)
    offsets = np.zeros(h.num_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    sizes = np.diff(h.edge_offsets)
    eid_per_slot = np.repeat(np.arange(h.num_edges, dtype=np.int64), sizes)
    order = np.lexsort((eid_per_slot, h.edge_members))
    edge_ids = eid_per_slot[order]
    offsets.setflags(write=False)
    edge_ids.setflags(write=False)
    return IncidenceIndex(node_offsets=offsets, edge_ids=edge_ids)


@dataclass(frozen=True)
class AttributeGroup:
    """One categorical covariate and its one-hot column block."""

    name: str
    levels: tuple[str, ...]
    start: int                 # first column of the block

    @property
    def stop(self) -> int:
        return self.start + len(self.levels)


@dataclass(frozen=True)
class AttributeMatrix:
    """Binary N x Z one-hot covariate matrix with column-block metadata."""

    matrix: np.ndarray                      # (N, Z) float64, entries in {0, 1}
    groups: tuple[AttributeGroup, ...]

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if not np.isin(m, (0.0, 1.0)).all():
            raise ValidationError("attribute matrix entries must be 0 or 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def num_nodes(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_columns(self) -> int:
        return self.matrix.shape[1]

    def column_labels(self) -> list[str]:
        return [f"{g.name}={lev}" for g in self.groups for lev in g.levels]


def one_hot_encode(
    table: Mapping[Label, Mapping[str, str]],
    node_order: Sequence[Label],
) -> AttributeMatrix:
    """One-hot encode per-node categorical covariates.

    ``table`` maps node label -> {covariate name: value}.  Every node in
    ``node_order`` must have a value for every covariate; levels are the
    observed values, sorted, so each covariate of z_p levels expands to
    z_p columns and the total width is the sum over covariates.
    """
    if not table:
        raise ValidationError("empty attribute table")
    known = set(node_order)
    for lab in table:
        if lab not in known:
            raise ValidationError(f"attribute row for unknown node {lab!r}")
    cov_names = None
    for lab, row in table.items():
        names = sorted(row)
        if cov_names is None:
            cov_names = names
        elif names != cov_names:
            raise ValidationError(
                f"node {lab!r} covariates {names} do not match {cov_names}")
    assert cov_names is not None

    groups = []
    start = 0
    for name in cov_names:
        levels = sorted({str(row[name]) for row in table.values()})
        groups.append(AttributeGroup(name=name, levels=tuple(levels), start=start))
        start += len(levels)

    matrix = np.zeros((len(node_order), start))
    for i, lab in enumerate(node_order):
        if lab not in table:
            raise ValidationError(f"missing attribute row for node {lab!r}")
        row = table[lab]
        for g in groups:
            value = str(row[g.name])
            matrix[i, g.start + g.levels.index(value)] = 1.0
    return AttributeMatrix(matrix=matrix, groups=tuple(groups))


def connected_components(h: Hypergraph, edge_mask: np.ndarray | None = None) -> int:
    """Number of connected components over all N nodes.

    Connectivity follows the union-of-cliques view: each (kept) hyperedge
    links all its nodes.  Nodes in no kept edge count as singleton
    components.
    """
    parent = np.arange(h.num_nodes, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for eid, e in enumerate(h.edges):
        if edge_mask is not None and not edge_mask[eid]:
            continue
        r0 = find(e[0])
        for i in e[1:]:
            ri = find(i)
            if ri != r0:
                parent[ri] = r0
    return sum(1 for x in range(h.num_nodes) if find(x) == x)


def delete_random_edges(
    h: Hypergraph,
    keep_fraction: float,
    keep_connected: bool,
    rng: np.random.Generator,
) -> tuple[Hypergraph, int]:
    """Remove hyperedges uniformly at random down to ``keep_fraction``.

    With ``keep_connected``, a removal is skipped whenever it would
    increase the number of connected components (union-of-cliques
    adjacency over the full node set).  Returns the reduced hypergraph
    and the number of removals skipped; when the target is unreachable
    under the constraint, the best achievable subset is returned.
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ValidationError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    target_keep = max(1, int(round(keep_fraction * h.num_edges)))
    mask = np.ones(h.num_edges, dtype=bool)
    kept = h.num_edges
    baseline = connected_components(h, mask) if keep_connected else 0
    skipped = 0
    for eid in rng.permutation(h.num_edges):
        if kept <= target_keep:
            break
        mask[eid] = False
        if keep_connected and connected_components(h, mask) > baseline:
            mask[eid] = True
            skipped += 1
            continue
        kept -= 1
    return h.subset(np.flatnonzero(mask)), skipped
