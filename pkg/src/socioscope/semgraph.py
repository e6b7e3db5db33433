"""Thresholded similarity graphs: construction, ego networks, community
detection, and a weight-aware force-directed layout.

Node and edge iteration orders are deterministic so exports are
byte-stable.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace

import numpy as np

from .embeddings import EmbeddingModel
from .errors import GraphError


@dataclass(frozen=True)
class SimilarityGraph:
    """Undirected weighted graph over tokens.

    ``edges`` maps each unordered pair (u, v) with u < v to its weight.
    ``communities`` and ``positions`` are filled by ``detect_communities``
    and ``layout``.
    """

    nodes: tuple[str, ...]
    edges: dict[tuple[str, str], float]
    threshold: float
    communities: dict[str, int] | None = None
    positions: dict[str, tuple[float, float]] | None = None

    def __post_init__(self):
        for (u, v) in self.edges:
            if u == v:
                raise GraphError(f"self-loop on {u!r}")
            if not (u < v):
                raise GraphError(f"edge key not ordered: ({u!r}, {v!r})")

    def adjacency(self) -> dict[str, dict[str, float]]:
        adj: dict[str, dict[str, float]] = {u: {} for u in self.nodes}
        for (u, v), w in self.edges.items():
            adj[u][v] = w
            adj[v][u] = w
        return adj

    def degree(self, node: str) -> int:
        return sum(1 for (u, v) in self.edges if node in (u, v))


def build_similarity_graph(model: EmbeddingModel, threshold: float) -> SimilarityGraph:
    """Edge (u, v) iff cosine(u, v) >= threshold; weight is the cosine."""
    if not 0.0 < threshold < 1.0:
        raise GraphError(f"threshold must be in (0, 1), got {threshold}")
    normed = model.normalized_inputs()
    nv = len(model)
    edges: dict[tuple[str, str], float] = {}
    block = max(1, min(nv, 8_000_000 // max(nv, 1)))
    for lo in range(0, nv, block):
        hi = min(nv, lo + block)
        sims = normed[lo:hi] @ normed.T
        for bi in range(hi - lo):
            i = lo + bi
            row = sims[bi, i + 1:]
            for off in np.flatnonzero(row >= threshold):
                j = i + 1 + int(off)
                u, v = model.tokens[i], model.tokens[j]
                if u > v:
                    u, v = v, u
                edges[(u, v)] = float(row[off])
    return SimilarityGraph(nodes=model.tokens, edges=edges, threshold=threshold)


def ego_network(graph: SimilarityGraph, seed_word: str, hops: int = 2) -> SimilarityGraph:
    """Induced subgraph on every node within ``hops`` edges of the seed."""
    if seed_word not in set(graph.nodes):
        raise GraphError(f"seed word not in graph: {seed_word!r}")
    adj = graph.adjacency()
    keep = {seed_word}
    frontier = {seed_word}
    for _ in range(hops):
        nxt = {v for u in frontier for v in adj[u] if v not in keep}
        keep |= nxt
        frontier = nxt
    nodes = tuple(n for n in graph.nodes if n in keep)
    edges = {
        (u, v): w for (u, v), w in graph.edges.items() if u in keep and v in keep
    }
    return SimilarityGraph(nodes=nodes, edges=edges, threshold=graph.threshold)


def modularity(graph: SimilarityGraph, partition: dict[str, int]) -> float:
    """Weighted modularity of a partition; 0 for an edgeless graph."""
    m = sum(graph.edges.values())
    if m == 0:
        return 0.0
    deg = {u: 0.0 for u in graph.nodes}
    intra = 0.0
    for (u, v), w in graph.edges.items():
        deg[u] += w
        deg[v] += w
        if partition[u] == partition[v]:
            intra += w
    q = intra / m
    comm_deg: dict[int, float] = {}
    for u in graph.nodes:
        comm_deg[partition[u]] = comm_deg.get(partition[u], 0.0) + deg[u]
    for d in comm_deg.values():
        q -= (d / (2.0 * m)) ** 2
    return q


def _louvain_level(neighbors, self_w, rng):
    """One local-move phase; returns (node -> community, moved_any)."""
    n = len(neighbors)
    deg = np.array(
        [sum(neighbors[i].values()) + 2.0 * self_w[i] for i in range(n)]
    )
    m2 = deg.sum()  # twice total weight
    if m2 == 0:
        return list(range(n)), False
    node2com = list(range(n))
    com_tot = deg.copy()

    moved_any = False
    improved = True
    while improved:
        improved = False
        order = rng.permutation(n)
        for i in order:
            ci = node2com[i]
            com_tot[ci] -= deg[i]
            links: dict[int, float] = {}
            for j, w in neighbors[i].items():
                cj = node2com[j]
                links[cj] = links.get(cj, 0.0) + w
            best_c, best_gain = ci, links.get(ci, 0.0) - deg[i] * com_tot[ci] / m2
            for c in sorted(links):
                gain = links[c] - deg[i] * com_tot[c] / m2
                if gain > best_gain + 1e-12:
                    best_c, best_gain = c, gain
            node2com[i] = best_c
            com_tot[best_c] += deg[i]
            if best_c != ci:
                improved = True
                moved_any = True
    return node2com, moved_any


def detect_communities(graph: SimilarityGraph, seed: int = 0) -> dict[str, int]:
    """Greedy weighted-modularity partition (local moves + aggregation).

    Deterministic under ``seed``: the node visiting order is the only
    randomized element.  Every node lands in exactly one community;
    community ids are dense and ordered by first appearance in
    ``graph.nodes``.
    """
    n = len(graph.nodes)
    if n == 0:
        raise GraphError("graph has no nodes")
    idx = {u: i for i, u in enumerate(graph.nodes)}
    neighbors: list[dict[int, float]] = [dict() for _ in range(n)]
    for (u, v), w in graph.edges.items():
        neighbors[idx[u]][idx[v]] = w
        neighbors[idx[v]][idx[u]] = w
    self_w = [0.0] * n

    rng = np.random.default_rng(seed)
    assignment = list(range(n))  # original node -> current supernode

    while True:
        node2com, moved = _louvain_level(neighbors, self_w, rng)
        if not moved:
            break
        # relabel communities densely
        relabel: dict[int, int] = {}
        for c in node2com:
            relabel.setdefault(c, len(relabel))
        node2com = [relabel[c] for c in node2com]
        assignment = [node2com[a] for a in assignment]

        # aggregate into the community graph
        nc = len(relabel)
        new_neighbors: list[dict[int, float]] = [dict() for _ in range(nc)]
        new_self = [0.0] * nc
        for i in range(len(neighbors)):
            ci = node2com[i]
            new_self[ci] += self_w[i]
            for j, w in neighbors[i].items():
                if j < i:
                    continue
                cj = node2com[j]
                if ci == cj:
                    new_self[ci] += w
                else:
                    d = new_neighbors[ci]
                    d[cj] = d.get(cj, 0.0) + w
                    new_neighbors[cj][ci] = d[cj]
        neighbors, self_w = new_neighbors, new_self
        if len(neighbors) == 1:
            break

    final: dict[int, int] = {}
    out: dict[str, int] = {}
    for u in graph.nodes:
        c = assignment[idx[u]]
        out[u] = final.setdefault(c, len(final))
    return out


def with_communities(graph: SimilarityGraph, seed: int = 0) -> SimilarityGraph:
    return replace(graph, communities=detect_communities(graph, seed))


def layout(
    graph: SimilarityGraph, iterations: int = 200, seed: int = 0
) -> dict[str, tuple[float, float]]:
    """Weight-aware force-directed positions.

    Attraction along an edge is proportional to its weight and the
    distance; repulsion is scaled by (degree+1) products, as in
    degree-weighted force schemes.  Deterministic under ``seed``.
    """
    n = len(graph.nodes)
    if n == 0:
        raise GraphError("graph has no nodes")
    if n == 1:
        return {graph.nodes[0]: (0.0, 0.0)}
    idx = {u: i for i, u in enumerate(graph.nodes)}
    rng = np.random.default_rng(seed)
    pos = rng.uniform(-1.0, 1.0, size=(n, 2)) * np.sqrt(n)

    deg = np.ones(n)
    edge_i = np.empty(len(graph.edges), dtype=np.int64)
    edge_j = np.empty(len(graph.edges), dtype=np.int64)
    edge_w = np.empty(len(graph.edges))
    for k, ((u, v), w) in enumerate(sorted(graph.edges.items())):
        i, j = idx[u], idx[v]
        edge_i[k], edge_j[k], edge_w[k] = i, j, w
        deg[i] += 1
        deg[j] += 1

    k_rep = 1.0
    for it in range(iterations):
        delta = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt((delta ** 2).sum(axis=2))
        np.fill_diagonal(dist, 1.0)
        dist = np.maximum(dist, 1e-9)
        rep = k_rep * (deg[:, None] * deg[None, :]) / (dist ** 2)
        np.fill_diagonal(rep, 0.0)
        disp = (rep[:, :, None] * delta / dist[:, :, None]).sum(axis=1)

        if len(edge_w):
            evec = pos[edge_i] - pos[edge_j]
            pull = edge_w[:, None] * evec
            np.add.at(disp, edge_i, -pull)
            np.add.at(disp, edge_j, pull)

        temp = 0.1 * np.sqrt(n) * (1.0 - it / iterations) + 0.01
        norms = np.maximum(np.sqrt((disp ** 2).sum(axis=1, keepdims=True)), 1e-12)
        pos += disp / norms * np.minimum(norms, temp)

    if not np.isfinite(pos).all():
        raise GraphError("layout diverged to non-finite coordinates")
    return {u: (float(pos[idx[u], 0]), float(pos[idx[u], 1])) for u in graph.nodes}


def with_layout(graph: SimilarityGraph, iterations: int = 200, seed: int = 0) -> SimilarityGraph:
    return replace(graph, positions=layout(graph, iterations, seed))


def write_json_graph(graph: SimilarityGraph, path) -> None:
    """Node-link JSON with community and position per node."""
    payload = {
        "threshold": graph.threshold,
        "nodes": [
            {
                "id": u,
                "community": None if graph.communities is None else graph.communities.get(u),
                "x": None if graph.positions is None else graph.positions[u][0],
                "y": None if graph.positions is None else graph.positions[u][1],
            }
            for u in graph.nodes
        ],
        "links": [
            {"source": u, "target": v, "weight": w}
            for (u, v), w in sorted(graph.edges.items())
        ],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def read_json_graph(path) -> SimilarityGraph:
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    nodes = tuple(n["id"] for n in payload["nodes"])
    communities = None
    positions = None
    if any(n.get("community") is not None for n in payload["nodes"]):
        communities = {n["id"]: n["community"] for n in payload["nodes"]}
    if any(n.get("x") is not None for n in payload["nodes"]):
        positions = {n["id"]: (n["x"], n["y"]) for n in payload["nodes"]}
    edges = {
        (l["source"], l["target"]): l["weight"] for l in payload["links"]
    }
    return SimilarityGraph(
        nodes=nodes, edges=edges, threshold=payload["threshold"],
        communities=communities, positions=positions,
    )


_GEXF_NS = "http://www.gexf.net/1.2draft"
_VIZ_NS = "http://www.gexf.net/1.2draft/viz"


def write_gexf(graph: SimilarityGraph, path) -> None:
    ET.register_namespace("", _GEXF_NS)
    ET.register_namespace("viz", _VIZ_NS)
    root = ET.Element(f"{{{_GEXF_NS}}}gexf", version="1.2")
    g = ET.SubElement(
        root, f"{{{_GEXF_NS}}}graph", mode="static", defaultedgetype="undirected"
    )
    attrs = ET.SubElement(g, f"{{{_GEXF_NS}}}attributes", attrib={"class": "node"})
    ET.SubElement(
        attrs, f"{{{_GEXF_NS}}}attribute",
        id="0", title="community", type="integer",
    )
    nodes_el = ET.SubElement(g, f"{{{_GEXF_NS}}}nodes")
    for u in graph.nodes:
        ne = ET.SubElement(nodes_el, f"{{{_GEXF_NS}}}node", id=u, label=u)
        if graph.communities is not None and u in graph.communities:
            av = ET.SubElement(ne, f"{{{_GEXF_NS}}}attvalues")
            ET.SubElement(
                av, f"{{{_GEXF_NS}}}attvalue",
                attrib={"for": "0", "value": str(graph.communities[u])},
            )
        if graph.positions is not None and u in graph.positions:
            x, y = graph.positions[u]
            ET.SubElement(
                ne, f"{{{_VIZ_NS}}}position",
                x=repr(float(x)), y=repr(float(y)), z="0.0",
            )
    edges_el = ET.SubElement(g, f"{{{_GEXF_NS}}}edges")
    for k, ((u, v), w) in enumerate(sorted(graph.edges.items())):
        ET.SubElement(
            edges_el, f"{{{_GEXF_NS}}}edge",
            id=str(k), source=u, target=v, weight=repr(float(w)),
        )
    tree = ET.ElementTree(root)
    ET.indent(tree)
    tree.write(path, encoding="unicode", xml_declaration=True)
    with open(path, "a", encoding="utf-8") as f:
        f.write("\n")


def read_gexf(path) -> SimilarityGraph:
    tree = ET.parse(path)
    g = tree.getroot().find(f"{{{_GEXF_NS}}}graph")
    nodes = []
    communities = {}
    positions = {}
    for ne in g.find(f"{{{_GEXF_NS}}}nodes"):
        u = ne.get("id")
        nodes.append(u)
        av = ne.find(f"{{{_GEXF_NS}}}attvalues")
        if av is not None:
            for a in av:
                if a.get("for") == "0":
                    communities[u] = int(a.get("value"))
        p = ne.find(f"{{{_VIZ_NS}}}position")
        if p is not None:
            positions[u] = (float(p.get("x")), float(p.get("y")))
    edges = {}
    for ee in g.find(f"{{{_GEXF_NS}}}edges"):
        u, v = ee.get("source"), ee.get("target")
        if u > v:
            u, v = v, u
        edges[(u, v)] = float(ee.get("weight"))
    return SimilarityGraph(
        nodes=tuple(nodes), edges=edges, threshold=0.0,
        communities=communities or None, positions=positions or None,
    )
