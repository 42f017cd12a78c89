"""Export an annotated graph for external visualization tools.

Nodes carry color classes (critical suppliers red, others yellow, business
scopes purple) and sizes (a scope's size is its related-supplier count);
edges carry relation names and colors (supplies_to orange, related_to
blue).  DOT renders with Graphviz, GraphML opens in Gephi/yEd.

    python3 demos/05_export_for_visualization.py
"""

import tempfile
from pathlib import Path

from chainlens import EntityType, GeneratorConfig, RelationType, generate_synthetic
from chainlens.analytics import criticality
from chainlens.exports import export_graph

# A small network keeps the rendered picture readable.
base = GeneratorConfig()
config = GeneratorConfig(
    seed=7,
    entity_counts={
        **base.entity_counts,
        EntityType.SUPPLIER: 30,
        EntityType.BUSINESS_SCOPE: 4,
        EntityType.COUNTRY: 4,
        EntityType.SMELTER: 2,
    },
    relation_counts={
        **base.relation_counts,
        RelationType.SUPPLIES_TO: 60,
        RelationType.RELATED_TO: 32,
        RelationType.BELONGS_TO: 10,
        RelationType.LOCATED_IN: 32,
        RelationType.INCLUDES: 12,
        RelationType.SAME_AS: 6,
        RelationType.PRODUCES: 8,
        RelationType.PRODUCED_IN: 8,
        RelationType.MANUFACTURED_BY: 4,
        RelationType.CONTAINS: 3,
        RelationType.REFINES: 2,
    },
    tier_sizes=(5, 10, 12),
    hub_fanout=3,
)
graph = generate_synthetic(config)

# Criticality flags come from the supplier projection; the export joins by label.
suppliers = graph.project_subgraph({EntityType.SUPPLIER}, {RelationType.SUPPLIES_TO})
report = criticality(suppliers)
flags = {label: bool(flag) for label, flag in zip(report.labels, report.is_critical)}

keep = graph.project_subgraph(
    {EntityType.SUPPLIER, EntityType.BUSINESS_SCOPE},
    {RelationType.SUPPLIES_TO, RelationType.RELATED_TO},
)
with tempfile.TemporaryDirectory() as tmp:
    for fmt in ("dot", "graphml", "json"):
        out = Path(tmp) / f"network.{fmt}"
        export_graph(keep, flags, fmt, out)
        print(f"wrote {out.name}: {out.stat().st_size} bytes")
    dot = (Path(tmp) / "network.dot").read_text().splitlines()
    print("\nDOT snippet (render with `dot -Tsvg network.dot`):")
    for line in dot[:6] + ["  ..."] + dot[-4:]:
        print(line)
