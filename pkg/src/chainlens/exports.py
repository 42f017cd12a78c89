"""Annotated graph exports (DOT, GraphML, JSON) for external visualization.

Nodes carry a color class (critical supplier "red", other supplier
"yellow", business scope "purple", everything else "gray") and a size
attribute; a business scope's size is its distinct related-supplier count.
Edges carry their relation name and a color class (supplies_to "orange",
related_to "blue", others "gray").  Output is byte-stable for fixed inputs.
"""

from __future__ import annotations

import json
from collections import defaultdict
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

from .graph import EntityType, Graph, RelationType

FORMATS = ("dot", "graphml", "json")

_EDGE_COLOR = {RelationType.SUPPLIES_TO: "orange", RelationType.RELATED_TO: "blue"}


class ExportMismatch(Exception):
    """The criticality report does not line up with the graph's suppliers."""


def _node_attrs(graph: Graph, critical_by_label: dict[str, bool]) -> list[dict]:
    scope_sizes: dict[int, set[int]] = defaultdict(set)
    for t in graph.triples_with_predicate(RelationType.RELATED_TO):
        for a, b in ((t.subject, t.object), (t.object, t.subject)):
            if (
                graph.entities[a].entity_type is EntityType.BUSINESS_SCOPE
                and graph.entities[b].entity_type is EntityType.SUPPLIER
            ):
                scope_sizes[a].add(b)

    supplier_labels = [e.label for e in graph.entities if e.entity_type is EntityType.SUPPLIER]
    if len(set(supplier_labels)) != len(supplier_labels):
        raise ExportMismatch("duplicate supplier labels make the report join ambiguous")
    missing = sorted(set(supplier_labels) - set(critical_by_label))
    extra = sorted(set(critical_by_label) - set(supplier_labels))
    if missing or extra:
        raise ExportMismatch(
            f"report/graph mismatch: {len(missing)} suppliers missing from the report, "
            f"{len(extra)} report rows not in the graph"
        )

    nodes = []
    for e in graph.entities:
        if e.entity_type is EntityType.SUPPLIER:
            color = "red" if critical_by_label[e.label] else "yellow"
            size = 1
        elif e.entity_type is EntityType.BUSINESS_SCOPE:
            color = "purple"
            size = len(scope_sizes.get(e.id, ()))
        else:
            color = "gray"
            size = 1
        nodes.append(
            {
                "id": f"n{e.id}",
                "label": e.label,
                "entity_type": e.entity_type.value,
                "color": color,
                "size": size,
            }
        )
    return nodes


def _edge_attrs(graph: Graph) -> list[dict]:
    edges = []
    for t in sorted(graph.triples):
        edges.append(
            {
                "source": f"n{t.subject}",
                "target": f"n{t.object}",
                "relation": t.predicate.value,
                "color": _EDGE_COLOR.get(t.predicate, "gray"),
            }
        )
    return edges


def _render_dot(nodes: list[dict], edges: list[dict]) -> str:
    lines = ["digraph chainlens {"]
    for n in nodes:
        label = n["label"].replace("\\", "\\\\").replace('"', '\\"')
        lines.append(
            f'  {n["id"]} [label="{label}", entity_type="{n["entity_type"]}", '
            f'color="{n["color"]}", size="{n["size"]}"];'
        )
    for e in edges:
        lines.append(
            f'  {e["source"]} -> {e["target"]} [relation="{e["relation"]}", color="{e["color"]}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _render_graphml(nodes: list[dict], edges: list[dict]) -> str:
    keys = [
        ("d_label", "node", "label", "string"),
        ("d_type", "node", "entity_type", "string"),
        ("d_color", "node", "color", "string"),
        ("d_size", "node", "size", "double"),
        ("d_rel", "edge", "relation", "string"),
        ("d_ecol", "edge", "color", "string"),
    ]
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
    ]
    for kid, for_, name, typ in keys:
        lines.append(f'  <key id="{kid}" for="{for_}" attr.name="{name}" attr.type="{typ}"/>')
    lines.append('  <graph id="G" edgedefault="directed">')
    for n in nodes:
        lines.append(f'    <node id={quoteattr(n["id"])}>')
        lines.append(f'      <data key="d_label">{escape(n["label"])}</data>')
        lines.append(f'      <data key="d_type">{escape(n["entity_type"])}</data>')
        lines.append(f'      <data key="d_color">{n["color"]}</data>')
        lines.append(f'      <data key="d_size">{n["size"]}</data>')
        lines.append("    </node>")
    for e in edges:
        lines.append(f'    <edge source={quoteattr(e["source"])} target={quoteattr(e["target"])}>')
        lines.append(f'      <data key="d_rel">{escape(e["relation"])}</data>')
        lines.append(f'      <data key="d_ecol">{e["color"]}</data>')
        lines.append("    </edge>")
    lines.append("  </graph>")
    lines.append("</graphml>")
    return "\n".join(lines) + "\n"


def export_graph(
    graph: Graph,
    critical_by_label: dict[str, bool],
    fmt: str,
    path: str | Path,
) -> None:
    """Write the annotated graph; ``critical_by_label`` keys every supplier label."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    nodes = _node_attrs(graph, critical_by_label)
    edges = _edge_attrs(graph)
    if fmt == "dot":
        text = _render_dot(nodes, edges)
    elif fmt == "graphml":
        text = _render_graphml(nodes, edges)
    else:
        text = json.dumps({"nodes": nodes, "edges": edges}, indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")
