"""Metric graphs of elastic strings: topology, orientation, structural checks.

A network is a set of directed edges, each an interval [0, length] carrying a
1D wave equation; edges are coupled at shared vertices.  The tail of an edge
carries local coordinate x = 0 and the head x = length.  In tree mode there is
a designated degree-1 root and every edge points away from it; in graph mode
cycles are allowed and orientations are taken as given.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping

import numpy as np

from .errors import (
    BadRootDegree,
    CycleInTreeMode,
    DisconnectedGraph,
    InvalidNetwork,
    NonpositiveLength,
    SelfLoop,
    UnknownVertex,
)

if TYPE_CHECKING:  # pragma: no cover
    from .damping import DampingProfile

VertexId = int
EdgeId = int


@dataclass(frozen=True)
class Edge:
    """Directed edge parametrized by arc length (tail at x=0, head at x=length)."""

    id: int
    tail: int
    head: int
    length: float
    label: str | None = None


@dataclass(frozen=True)
class MetricGraph:
    """Immutable metric graph; safe to share across analysis tasks.

    Attributes
    ----------
    mode : {"tree", "graph"}
        Tree mode enforces acyclicity, a degree-1 root, and edges oriented
        away from the root.  Graph mode allows cycles and keeps the input
        orientation of every edge.
    dirichlet : frozenset of int
        Vertices with a pinned (u = 0) boundary condition.  These are exactly
        the degree-1 vertices (root plus exterior vertices in tree mode).
    reoriented : tuple of int
        Edge ids whose orientation was flipped during tree canonicalization.
        Flipping an edge mirrors its coordinate; per-edge data attached to it
        (damping profiles, initial data) must be mirrored by the caller.
    """

    mode: str
    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]
    dirichlet: frozenset[int]
    root: int | None = None
    vertex_labels: Mapping[int, str] = field(default_factory=dict)
    edge_labels: Mapping[int, str] = field(default_factory=dict)
    reoriented: tuple[int, ...] = ()

    def edge(self, edge_id: int) -> Edge:
        return self.edges[edge_id]

    def degree(self, vertex: int) -> int:
        self._check_vertex(vertex)
        return sum(1 for e in self.edges if vertex in (e.tail, e.head))

    def endpoint_coordinate(self, edge: Edge, vertex: int) -> float:
        """Local coordinate of `vertex` on `edge` (0.0 at tail, length at head)."""
        if vertex == edge.tail:
            return 0.0
        if vertex == edge.head:
            return edge.length
        raise UnknownVertex(f"vertex {vertex} is not an endpoint of edge {edge.id}")

    def _check_vertex(self, vertex: int) -> None:
        if vertex not in self._vertex_set:
            raise UnknownVertex(f"unknown vertex id {vertex}")

    @property
    def _vertex_set(self) -> frozenset[int]:
        return frozenset(self.vertices)

    @property
    def total_length(self) -> float:
        return float(sum(e.length for e in self.edges))


@dataclass(frozen=True)
class IncidenceMatrix:
    """Signed vertex-by-edge incidence: +1 where an edge's head meets the vertex,
    -1 where its tail does, 0 otherwise."""

    d: np.ndarray  # shape (n_vertices, n_edges), entries in {-1, 0, +1}
    vertex_index: Mapping[int, int]
    edge_index: Mapping[int, int]

    def entry(self, vertex: int, edge: int) -> int:
        return int(self.d[self.vertex_index[vertex], self.edge_index[edge]])


@dataclass(frozen=True)
class ElasticComponent:
    """One maximal connected subgraph of purely elastic (undamped) edges."""

    edge_ids: tuple[int, ...]
    vertex_ids: tuple[int, ...]
    is_tree: bool
    leaf_attachment_ok: bool
    continuation_ok: bool


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the structural damping-placement checks."""

    elastic_components: tuple[ElasticComponent, ...]
    has_kv_edge: bool
    overall: str  # "pass" | "fail"
    messages: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return self.overall == "pass"


def build_graph(spec: Mapping) -> MetricGraph:
    """Build a validated MetricGraph from a parsed network description.

    `spec` is the parsed JSON document: {"mode", "vertices", "edges", ...}.
    Vertex/edge ids may be strings (e.g. multi-index labels); they are
    flattened to dense integer ids in order of appearance and the original
    ids retained as labels.  In tree mode, edges are reoriented away from
    the root where needed; flipped edge ids are recorded in `reoriented`
    so per-edge data can be mirrored by the caller.

    Raises
    ------
    DisconnectedGraph, CycleInTreeMode, BadRootDegree, SelfLoop,
    NonpositiveLength, InvalidNetwork
    """
    mode = spec.get("mode", "tree")
    if mode not in ("tree", "graph"):
        raise InvalidNetwork(f"mode must be 'tree' or 'graph', got {mode!r}")

    raw_vertices = list(spec["vertices"])
    raw_edges = list(spec["edges"])
    if not raw_edges:
        raise InvalidNetwork("network must contain at least one edge")

    vmap: dict = {}
    vertex_labels: dict[int, str] = {}
    dirichlet_flags: dict[int, bool | None] = {}
    root_ids: list[int] = []
    for entry in raw_vertices:
        raw_id = entry["id"]
        if raw_id in vmap:
            raise InvalidNetwork(f"duplicate vertex id {raw_id!r}")
        vid = len(vmap)
        vmap[raw_id] = vid
        vertex_labels[vid] = str(raw_id)
        dirichlet_flags[vid] = entry.get("dirichlet")
        if entry.get("root", False):
            root_ids.append(vid)

    edges: list[Edge] = []
    edge_labels: dict[int, str] = {}
    seen_edge_ids: set = set()
    for entry in raw_edges:
        raw_id = entry["id"]
        if raw_id in seen_edge_ids:
            raise InvalidNetwork(f"duplicate edge id {raw_id!r}")
        seen_edge_ids.add(raw_id)
        try:
            tail = vmap[entry["from"]]
            head = vmap[entry["to"]]
        except KeyError as exc:
            raise UnknownVertex(f"edge {raw_id!r} references unknown vertex {exc.args[0]!r}") from None
        length = float(entry["length"])
        if not length > 0.0:
            raise NonpositiveLength(f"edge {raw_id!r} has length {length}")
        if tail == head:
            raise SelfLoop(f"edge {raw_id!r} is a self-loop at vertex {entry['from']!r}")
        eid = len(edges)
        edges.append(Edge(eid, tail, head, length, label=str(raw_id)))
        edge_labels[eid] = str(raw_id)

    n_v = len(vmap)
    adjacency: dict[int, list[int]] = {v: [] for v in range(n_v)}
    for e in edges:
        adjacency[e.tail].append(e.id)
        adjacency[e.head].append(e.id)

    # connectivity (undirected)
    start = 0
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for eid in adjacency[v]:
            e = edges[eid]
            w = e.head if e.tail == v else e.tail
            if w not in seen:
                seen.add(w)
                queue.append(w)
    if len(seen) != n_v:
        missing = sorted(set(range(n_v)) - seen)
        raise DisconnectedGraph(f"vertices {missing} unreachable from vertex 0")

    degree = {v: len(adjacency[v]) for v in range(n_v)}
    reoriented: list[int] = []

    if mode == "tree":
        if len(root_ids) != 1:
            raise BadRootDegree(f"tree mode requires exactly one root, got {len(root_ids)}")
        root = root_ids[0]
        if degree[root] != 1:
            raise BadRootDegree(f"root vertex has degree {degree[root]}, expected 1")
        if len(edges) != n_v - 1:
            raise CycleInTreeMode(
                f"{len(edges)} edges on {n_v} vertices cannot form a tree"
            )
        # orient away from the root: BFS assigns each edge tail = parent side
        parent_seen = {root}
        queue = deque([root])
        oriented: list[Edge] = list(edges)
        while queue:
            v = queue.popleft()
            for eid in adjacency[v]:
                e = oriented[eid]
                w = e.head if e.tail == v else e.tail
                if w in parent_seen:
                    continue
                if e.tail != v:
                    oriented[eid] = Edge(e.id, v, e.tail, e.length, e.label)
                    reoriented.append(eid)
                parent_seen.add(w)
                queue.append(w)
        edges = oriented
        dirichlet = frozenset(v for v in range(n_v) if degree[v] == 1)
        for v in range(n_v):
            flag = dirichlet_flags[v]
            if flag is None:
                continue
            if flag != (v in dirichlet):
                raise InvalidNetwork(
                    f"vertex {vertex_labels[v]}: dirichlet={flag} conflicts with tree-mode "
                    "boundary (every degree-1 vertex is Dirichlet, no interior vertex is)"
                )
    else:
        root = None
        dirichlet = frozenset(v for v in range(n_v) if dirichlet_flags[v])
        if not dirichlet:
            raise InvalidNetwork("graph mode requires a nonempty Dirichlet set")
        for v in range(n_v):
            if degree[v] == 1 and v not in dirichlet:
                raise InvalidNetwork(
                    f"vertex {vertex_labels[v]} has degree 1 and must be Dirichlet"
                )
            if v in dirichlet and degree[v] != 1:
                raise InvalidNetwork(
                    f"Dirichlet vertex {vertex_labels[v]} has degree {degree[v]}; "
                    "Dirichlet vertices must be exterior (degree 1)"
                )

    return MetricGraph(
        mode=mode,
        vertices=tuple(range(n_v)),
        edges=tuple(edges),
        dirichlet=dirichlet,
        root=root,
        vertex_labels=vertex_labels,
        edge_labels=edge_labels,
        reoriented=tuple(reoriented),
    )


def incidence_matrix(g: MetricGraph) -> IncidenceMatrix:
    """Signed incidence matrix: d[k, j] = +1 if edge j's head is vertex k,
    -1 if its tail is, 0 otherwise.  Every column has exactly one +1 and one -1."""
    d = np.zeros((len(g.vertices), len(g.edges)), dtype=np.int8)
    for e in g.edges:
        d[e.head, e.id] = 1
        d[e.tail, e.id] = -1
    vertex_index = {v: v for v in g.vertices}
    edge_index = {e.id: e.id for e in g.edges}
    return IncidenceMatrix(d=d, vertex_index=vertex_index, edge_index=edge_index)


def interior_vertices(g: MetricGraph) -> frozenset[int]:
    """Vertices carrying transmission conditions (all non-Dirichlet vertices)."""
    return frozenset(v for v in g.vertices if v not in g.dirichlet)


def adjacent_edges(g: MetricGraph, vertex: int) -> tuple[tuple[int, int], ...]:
    """Edges incident to `vertex` as (edge_id, sign) with sign = +1 if the
    edge's head is at the vertex, -1 if its tail is."""
    g._check_vertex(vertex)
    out = []
    for e in g.edges:
        if e.head == vertex:
            out.append((e.id, 1))
        elif e.tail == vertex:
            out.append((e.id, -1))
    return tuple(out)


def validate_structure(
    g: MetricGraph,
    damping: Mapping[int, "DampingProfile"],
    strict_leaves: bool = False,
) -> ValidationReport:
    """Check the damping-placement hypotheses of the model.

    Requirements: the network contains at least one damped (K-V) edge, every
    maximal subgraph of purely elastic edges is a tree, and each leaf of such
    a subgraph touches a K-V edge.  With ``strict_leaves=False`` (default) a
    leaf that is a Dirichlet boundary vertex of the network is also accepted.

    On top of the leaf test, each elastic component must pass a
    unique-continuation sweep: an elastic edge is resolvable from an endpoint
    that carries a transmission condition once every other edge there is
    damped or already resolved (the flux balance then determines its Cauchy
    data), and resolving must propagate to the whole component.  A component
    that cannot be swept traps undamped modes even when every leaf looks
    fine, e.g. two elastic edges joined at one damped vertex with both far
    ends pinned: the antisymmetric mode vanishes at the joint and never feels
    the damping.  Failures are reported, never raised.
    """
    missing = [e.id for e in g.edges if e.id not in damping]
    if missing:
        raise InvalidNetwork(f"no damping profile assigned to edges {missing}")

    elastic_ids = [e.id for e in g.edges if damping[e.id].is_elastic]
    has_kv = len(elastic_ids) < len(g.edges)
    messages: list[str] = []
    if not has_kv:
        messages.append("network has no K-V edge (purely elastic)")

    # connected components of the elastic subgraph
    parent: dict[int, int] = {}

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for eid in elastic_ids:
        e = g.edge(eid)
        for v in (e.tail, e.head):
            parent.setdefault(v, v)
        ra, rb = find(e.tail), find(e.head)
        if ra != rb:
            parent[ra] = rb

    groups: dict[int, list[int]] = {}
    for eid in elastic_ids:
        groups.setdefault(find(g.edge(eid).tail), []).append(eid)

    components: list[ElasticComponent] = []
    for eids in sorted(groups.values()):
        vset = sorted({v for eid in eids for v in (g.edge(eid).tail, g.edge(eid).head)})
        is_tree = len(eids) == len(vset) - 1
        if not is_tree:
            messages.append(
                f"elastic component {{{', '.join(g.edge_labels[i] for i in eids)}}} contains a cycle"
            )
        comp_degree = {v: 0 for v in vset}
        for eid in eids:
            comp_degree[g.edge(eid).tail] += 1
            comp_degree[g.edge(eid).head] += 1
        leaf_ok = True
        for v in vset:
            if comp_degree[v] != 1:
                continue
            touches_kv = any(
                not damping[eid].is_elastic for eid, _ in adjacent_edges(g, v)
            )
            if touches_kv:
                continue
            if not strict_leaves and v in g.dirichlet:
                continue
            leaf_ok = False
            messages.append(
                f"elastic leaf at vertex {g.vertex_labels.get(v, v)} is not attached to a K-V edge"
            )
        sweep_ok = _continuation_sweep(g, damping, eids)
        if not sweep_ok:
            messages.append(
                f"elastic component {{{', '.join(g.edge_labels[i] for i in eids)}}} "
                "cannot be resolved from its K-V attachments (admits trapped undamped modes)"
            )
        components.append(
            ElasticComponent(tuple(eids), tuple(vset), is_tree, leaf_ok, sweep_ok)
        )

    ok = has_kv and all(
        c.is_tree and c.leaf_attachment_ok and c.continuation_ok for c in components
    )
    return ValidationReport(
        elastic_components=tuple(components),
        has_kv_edge=has_kv,
        overall="pass" if ok else "fail",
        messages=tuple(messages),
    )


def _continuation_sweep(g: MetricGraph, damping, component_edges) -> bool:
    """Can vanishing on the K-V edges be propagated across this elastic component?

    An unresolved elastic edge is resolvable at an endpoint carrying a
    transmission condition (an interior vertex) where every other incident
    edge is damped or already resolved: continuity gives the point values and
    the flux balance the remaining derivative.  Dirichlet exterior vertices
    pin the value but leave the derivative free, so they never initiate.
    """
    unresolved = set(component_edges)
    progress = True
    while unresolved and progress:
        progress = False
        for eid in sorted(unresolved):
            e = g.edge(eid)
            for v in (e.tail, e.head):
                if v in g.dirichlet:
                    continue
                blocked = any(
                    other != eid and damping[other].is_elastic and other in unresolved
                    for other, _ in adjacent_edges(g, v)
                )
                if not blocked:
                    unresolved.discard(eid)
                    progress = True
                    break
    return not unresolved
