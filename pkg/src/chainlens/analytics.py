"""Centrality metrics and supplier criticality scoring.

Conventions (recorded in every report's metadata so results stay
interpretable):

* degree counts triples per direction;
* betweenness runs on the directed simple graph (distinct successor sets),
  endpoints excluded, no normalization, via Brandes' accumulation of
  pair dependencies;
* closeness uses outgoing BFS distances with the Wasserman-Faust
  correction for disconnected directed graphs:
  c(u) = (r/s) * (r/(n-1)) with r reachable nodes and s their distance sum,
  0 when nothing is reachable;
* triangles are counted on the undirected simple projection (directions
  dropped, reciprocal edges merged, self-loops removed);
* each metric is min-max scaled onto [0, 10] (all-equal maps to 0), the five
  scaled values are summed into an aggregated score in [0, 50], and nodes
  strictly above the threshold are flagged critical;
* the correlation matrix is Pearson on the raw metric vectors; a
  zero-variance metric correlates 0 with everything else.
"""

from __future__ import annotations

from collections import defaultdict, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import EntityType, Graph, RelationType

METRIC_NAMES = ("in_degree", "out_degree", "betweenness", "closeness", "triangle_count")


class DegenerateGraph(Exception):
    """Raised for graphs too small for the requested statistic."""


def degree_centrality(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Per-node (in_degree, out_degree) as exact triple counts per direction."""
    n = graph.num_entities
    in_deg = np.zeros(n, dtype=np.int64)
    out_deg = np.zeros(n, dtype=np.int64)
    for t in graph.triples:
        out_deg[t.subject] += 1
        in_deg[t.object] += 1
    return in_deg, out_deg


def _simple_out_adjacency(graph: Graph) -> list[np.ndarray]:
    """Distinct successors per node (parallel relation edges collapsed)."""
    succ: list[set[int]] = [set() for _ in range(graph.num_entities)]
    for t in graph.triples:
        if t.subject != t.object:
            succ[t.subject].add(t.object)
    return [np.fromiter(sorted(s), dtype=np.int64) for s in succ]


def _brandes_source(adj: list[np.ndarray], source: int, acc: np.ndarray) -> None:
    n = len(adj)
    sigma = np.zeros(n)
    dist = np.full(n, -1, dtype=np.int64)
    sigma[source] = 1.0
    dist[source] = 0
    order: list[int] = []
    queue = deque([source])
    preds: list[list[int]] = [[] for _ in range(n)]
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    delta = np.zeros(n)
    for w in reversed(order):
        for v in preds[w]:
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
        if w != source:
            acc[w] += delta[w]


def betweenness(graph: Graph, threads: int = 1) -> np.ndarray:
    """Exact directed betweenness, endpoints excluded, unnormalized."""
    n = graph.num_entities
    adj = _simple_out_adjacency(graph)
    if threads > 1 and n > 1:
        # contiguous source chunks reduced in node-id order: deterministic
        # for a fixed thread count (grouping may shift the last float bit
        # relative to a single-threaded run)
        bounds = np.linspace(0, n, threads + 1).astype(int)
        chunks = [range(bounds[i], bounds[i + 1]) for i in range(threads)]

        def run(sources) -> np.ndarray:
            acc = np.zeros(n)
            for s in sources:
                _brandes_source(adj, s, acc)
            return acc

        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(run, chunks))
        total = np.zeros(n)
        for part in partials:
            total += part
        return total
    acc = np.zeros(n)
    for s in range(n):
        _brandes_source(adj, s, acc)
    return acc


def closeness(graph: Graph, threads: int = 1) -> np.ndarray:
    """Wasserman-Faust closeness over outgoing shortest-path distances."""
    n = graph.num_entities
    adj = _simple_out_adjacency(graph)

    def one(source: int) -> float:
        dist = np.full(n, -1, dtype=np.int64)
        dist[source] = 0
        queue = deque([source])
        reached = 0
        total = 0
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    reached += 1
                    total += dist[w]
                    queue.append(w)
        if reached == 0 or n <= 1:
            return 0.0
        return (reached / total) * (reached / (n - 1))

    if threads > 1 and n > 1:
        chunks = [list(range(i, n, threads)) for i in range(threads)]

        def run(sources: list[int]) -> list[tuple[int, float]]:
            return [(s, one(s)) for s in sources]

        out = np.zeros(n)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(run, chunks):
                for s, val in part:
                    out[s] = val
        return out
    return np.array([one(s) for s in range(n)])


def triangle_count(graph: Graph) -> np.ndarray:
    """Per-node triangle counts on the undirected simple projection."""
    n = graph.num_entities
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for t in graph.triples:
        if t.subject != t.object:
            nbrs[t.subject].add(t.object)
            nbrs[t.object].add(t.subject)
    counts = np.zeros(n, dtype=np.int64)
    for v in range(n):
        nv = nbrs[v]
        # each triangle at v counted twice over ordered neighbor pairs
        c = sum(len(nv & nbrs[u]) for u in nv)
        counts[v] = c // 2
    return counts


def normalize(values: np.ndarray, lo: float = 0.0, hi: float = 10.0) -> np.ndarray:
    """Min-max scale onto [lo, hi]; a constant vector maps to lo."""
    values = np.asarray(values, dtype=float)
    vmin, vmax = values.min(), values.max()
    if vmax == vmin:
        return np.full_like(values, lo)
    return lo + (values - vmin) / (vmax - vmin) * (hi - lo)


def _pearson_matrix(raw: dict[str, np.ndarray]) -> np.ndarray:
    x = np.vstack([np.asarray(raw[m], dtype=float) for m in METRIC_NAMES])
    xc = x - x.mean(axis=1, keepdims=True)
    norms = np.sqrt((xc**2).sum(axis=1))
    k = len(METRIC_NAMES)
    corr = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            if norms[i] > 0 and norms[j] > 0:
                c = float(xc[i] @ xc[j] / (norms[i] * norms[j]))
                c = min(1.0, max(-1.0, c))
            else:
                c = 0.0
            corr[i, j] = corr[j, i] = c
    return corr


@dataclass
class CriticalityReport:
    labels: list[str]
    raw: dict[str, np.ndarray]
    normalized: dict[str, np.ndarray]
    aggregated: np.ndarray
    is_critical: np.ndarray
    threshold: float
    correlation: np.ndarray | None
    metadata: dict[str, str]

    @property
    def num_nodes(self) -> int:
        return len(self.labels)

    def to_csv(self, path: str | Path) -> None:
        cols = ["node"] + list(METRIC_NAMES) + [f"norm_{m}" for m in METRIC_NAMES]
        cols += ["aggregated_score", "is_critical"]
        lines = [",".join(cols)]
        for i, label in enumerate(self.labels):
            cells = [label]
            cells += [f"{self.raw[m][i]:.6g}" for m in METRIC_NAMES]
            cells += [f"{self.normalized[m][i]:.6f}" for m in METRIC_NAMES]
            cells.append(f"{self.aggregated[i]:.6f}")
            cells.append("1" if self.is_critical[i] else "0")
            lines.append(",".join(cells))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def summary_text(self, top_k: int = 5) -> str:
        lines = [
            f"nodes: {self.num_nodes}",
            f"threshold: {self.threshold:g}",
            f"critical: {int(self.is_critical.sum())}",
        ]
        for m in METRIC_NAMES + ("aggregated_score",):
            vals = self.aggregated if m == "aggregated_score" else self.raw[m]
            order = np.argsort(-np.asarray(vals, dtype=float), kind="stable")[:top_k]
            tops = ", ".join(f"{self.labels[i]}={float(vals[i]):g}" for i in order)
            lines.append(f"top {m}: {tops}")
        if self.correlation is not None:
            lines.append("correlation (" + ", ".join(METRIC_NAMES) + "):")
            for row in self.correlation:
                lines.append("  " + " ".join(f"{v:+.4f}" for v in row))
        for key in sorted(self.metadata):
            lines.append(f"note {key}: {self.metadata[key]}")
        return "\n".join(lines) + "\n"


_CONVENTIONS = {
    "betweenness": "directed simple graph, endpoints excluded, unnormalized",
    "closeness": "outgoing distances, Wasserman-Faust corrected, 0 for sinks",
    "triangle_count": "undirected simple projection",
    "normalization": "per-metric min-max onto [0,10]; constant metrics map to 0",
    "correlation": "Pearson on raw metrics; zero-variance metrics correlate 0",
    "flagging": "aggregated score strictly greater than threshold",
}


def criticality(graph: Graph, threshold: float = 10.0, threads: int = 1) -> CriticalityReport:
    """Score every node: five normalized centralities summed, flagged above threshold.

    The caller is expected to pass the supplier/supplies_to projection, but
    any graph works.  Graphs with fewer than two nodes get no correlation
    matrix (it is undefined there).
    """
    in_deg, out_deg = degree_centrality(graph)
    raw = {
        "in_degree": in_deg.astype(float),
        "out_degree": out_deg.astype(float),
        "betweenness": betweenness(graph, threads=threads),
        "closeness": closeness(graph, threads=threads),
        "triangle_count": triangle_count(graph).astype(float),
    }
    normalized = {m: normalize(raw[m]) for m in METRIC_NAMES}
    aggregated = np.sum([normalized[m] for m in METRIC_NAMES], axis=0) if graph.num_entities else np.zeros(0)
    correlation = _pearson_matrix(raw) if graph.num_entities >= 2 else None
    return CriticalityReport(
        labels=[e.label for e in graph.entities],
        raw=raw,
        normalized=normalized,
        aggregated=np.asarray(aggregated, dtype=float),
        is_critical=np.asarray(aggregated, dtype=float) > threshold,
        threshold=threshold,
        correlation=correlation,
        metadata=dict(_CONVENTIONS),
    )


def sole_supplier_scopes(graph: Graph) -> list[tuple[int, int]]:
    """Business scopes related to exactly one supplier, with that supplier.

    Incidence is checked in both directions of related_to; sorted by scope id.
    """
    related: dict[int, set[int]] = defaultdict(set)
    for t in graph.triples_with_predicate(RelationType.RELATED_TO):
        for a, b in ((t.subject, t.object), (t.object, t.subject)):
            if (
                graph.entities[a].entity_type is EntityType.BUSINESS_SCOPE
                and graph.entities[b].entity_type is EntityType.SUPPLIER
            ):
                related[a].add(b)
    return sorted((scope, next(iter(sups))) for scope, sups in related.items() if len(sups) == 1)


def critical_paths(
    graph: Graph, report: CriticalityReport, max_depth: int = 3
) -> list[list[int]]:
    """Simple supplies_to chains into the hub that contain a critical supplier.

    The hub is the maximum-aggregated-score node (smallest id on ties).
    Paths are listed source-to-hub, with 1..max_depth edges, in deterministic
    (length, node-sequence) order.
    """
    if report.num_nodes != graph.num_entities:
        raise ValueError("report does not match graph (node counts differ)")
    if graph.num_entities == 0:
        return []
    hub = int(np.argmax(report.aggregated))
    preds: dict[int, list[int]] = defaultdict(list)
    for t in graph.triples_with_predicate(RelationType.SUPPLIES_TO):
        if t.subject != t.object:
            preds[t.object].append(t.subject)
    for lst in preds.values():
        lst.sort()

    flagged = report.is_critical
    found: list[list[int]] = []

    def extend(path: list[int]) -> None:
        # path is hub-first; emit reversed copies that contain a flag
        if len(path) > 1 and any(flagged[v] for v in path):
            found.append(list(reversed(path)))
        if len(path) > max_depth:
            return
        head = path[-1]
        for p in preds.get(head, ()):  # ascending ids keep the order stable
            if p not in path:
                path.append(p)
                extend(path)
                path.pop()

    extend([hub])
    found.sort(key=lambda p: (len(p), p))
    return found
