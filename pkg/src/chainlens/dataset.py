"""Triple-file ingestion, synthetic supply-network generation, and splits.

The shared triple file format is UTF-8, one triple per line, tab-separated:
``subject_label TAB subject_type TAB predicate TAB object_label TAB
object_type``.  Lines starting with ``#`` are comments.  Entities are
deduplicated by (label, type).

The synthetic generator emits a schema-valid network shaped like a real
multi-tier supply base: a single hub supplier supplied by every tier-1
supplier, tier-2 supplying tier-1 and tier-3 supplying tier-2 under linear
preferential attachment (heavy-tailed in-degree), a sprinkling of cross-tier
shortcut edges, and part/substance/smelter side structure.  Everything is
deterministic for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .graph import (
    DEFAULT_SCHEMA,
    DuplicateTriple,
    EntityType,
    Graph,
    RELATION_INDEX,
    RelationType,
    Schema,
    SchemaViolation,
    Triple,
)

TRAIN_FILE = "train.tsv"
VALID_FILE = "valid.tsv"
TEST_FILE = "test.tsv"

_HEADER = "# subject\tsubject_type\tpredicate\tobject\tobject_type"


class ParseError(Exception):
    """A malformed triple or config file line."""


class ConfigError(Exception):
    """An invalid or unsatisfiable generator/training configuration."""


class SplitInfeasible(Exception):
    """The requested split cannot produce non-empty held-out sets."""


# ---------------------------------------------------------------------------
# Triple file I/O
# ---------------------------------------------------------------------------

def load_triples(path: str | Path, schema: Schema = DEFAULT_SCHEMA) -> Graph:
    """Read a triple file into a schema-validated Graph.

    Entities are deduplicated by (label, type); duplicate triple lines are
    collapsed.  Raises :class:`ParseError` with the offending line number,
    or :class:`SchemaViolation` naming the line for type-illegal triples.
    """
    graph = Graph()
    ids: dict[tuple[str, str], int] = {}

    def intern(label: str, type_name: str, lineno: int) -> int:
        try:
            etype = EntityType.from_name(type_name)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
        key = (label, type_name)
        if key not in ids:
            ids[key] = graph.add_entity(label, etype)
        return ids[key]

    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise ParseError(f"{path}:{lineno}: expected 5 tab-separated fields, got {len(parts)}")
        s_label, s_type, pred_name, o_label, o_type = parts
        if not s_label or not o_label:
            raise ParseError(f"{path}:{lineno}: empty entity label")
        try:
            predicate = RelationType.from_name(pred_name)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
        s = intern(s_label, s_type, lineno)
        o = intern(o_label, o_type, lineno)
        try:
            graph.add_triple(s, predicate, o, schema)
        except DuplicateTriple:
            continue
        except SchemaViolation as exc:
            raise SchemaViolation(f"{path}:{lineno}: {exc}") from None
    return graph


def export_triples(graph: Graph, path: str | Path) -> None:
    """Write a graph in the shared triple format with sorted line order."""
    lines = [_HEADER]
    lines.extend("\t".join(row) for row in graph.label_triples())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Synthetic generator
# ---------------------------------------------------------------------------

DEFAULT_ENTITY_COUNTS: dict[EntityType, int] = {
    EntityType.SUPPLIER: 612,
    EntityType.MANUFACTURER_PART: 17,
    EntityType.SIEMENS_PART: 13,
    EntityType.SMELTER: 6,
    EntityType.SUBSTANCE: 12,
    EntityType.COMPONENT: 10,
    EntityType.COUNTRY: 16,
    EntityType.BUSINESS_SCOPE: 8,
}

DEFAULT_RELATION_COUNTS: dict[RelationType, int] = {
    RelationType.SUPPLIES_TO: 1382,
    RelationType.RELATED_TO: 612,
    RelationType.BELONGS_TO: 567,
    RelationType.LOCATED_IN: 618,
    RelationType.INCLUDES: 101,
    RelationType.PRODUCES: 78,
    RelationType.PRODUCED_IN: 44,
    RelationType.SAME_AS: 18,
    RelationType.MANUFACTURED_BY: 16,
    RelationType.CONTAINS: 8,
    RelationType.REFINES: 6,
}

_LABEL_PREFIX: dict[EntityType, str] = {
    EntityType.SUPPLIER: "SUP",
    EntityType.MANUFACTURER_PART: "MPN",
    EntityType.SIEMENS_PART: "SPN",
    EntityType.SMELTER: "SML",
    EntityType.SUBSTANCE: "SUB",
    EntityType.COMPONENT: "CMP",
    EntityType.COUNTRY: "CTY",
    EntityType.BUSINESS_SCOPE: "BSC",
}


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs for the synthetic network; defaults give ~690 nodes / ~3,450 edges.

    ``hub_fanout`` supplies_to edges run from the hub back into tier-1
    (internal divisions and distribution), which keeps the focal company on
    top of every centrality metric, not just in-degree.
    """

    seed: int = 0
    entity_counts: dict[EntityType, int] = field(default_factory=lambda: dict(DEFAULT_ENTITY_COUNTS))
    relation_counts: dict[RelationType, int] = field(default_factory=lambda: dict(DEFAULT_RELATION_COUNTS))
    tier_sizes: tuple[int, int, int] = (150, 230, 231)
    shortcut_fraction: float = 0.05
    hub_label: str = "FocalCo"
    hub_fanout: int = 25

    @classmethod
    def from_file(cls, path: str | Path) -> "GeneratorConfig":
        """Load overrides from a key=value file; unlisted keys keep defaults."""
        kv = parse_kv_file(path)
        cfg = cls()
        entity_counts = dict(cfg.entity_counts)
        relation_counts = dict(cfg.relation_counts)
        tiers = list(cfg.tier_sizes)
        updates: dict = {}
        entity_keys = {
            "suppliers": EntityType.SUPPLIER,
            "manufacturer_parts": EntityType.MANUFACTURER_PART,
            "siemens_parts": EntityType.SIEMENS_PART,
            "smelters": EntityType.SMELTER,
            "substances": EntityType.SUBSTANCE,
            "components": EntityType.COMPONENT,
            "countries": EntityType.COUNTRY,
            "business_scopes": EntityType.BUSINESS_SCOPE,
        }
        relation_keys = {r.value: r for r in RelationType}
        for key, value in kv.items():
            try:
                if key in entity_keys:
                    entity_counts[entity_keys[key]] = int(value)
                elif key in relation_keys:
                    relation_counts[relation_keys[key]] = int(value)
                elif key in ("tier1", "tier2", "tier3"):
                    tiers[int(key[-1]) - 1] = int(value)
                elif key == "seed":
                    updates["seed"] = int(value)
                elif key == "hub_fanout":
                    updates["hub_fanout"] = int(value)
                elif key == "shortcut_fraction":
                    updates["shortcut_fraction"] = float(value)
                elif key == "hub_label":
                    updates["hub_label"] = value
                else:
                    raise ConfigError(f"{path}: unknown generator config key {key!r}")
            except ValueError:
                raise ConfigError(f"{path}: bad value for {key!r}: {value!r}") from None
        return replace(
            cfg,
            entity_counts=entity_counts,
            relation_counts=relation_counts,
            tier_sizes=(tiers[0], tiers[1], tiers[2]),
            **updates,
        )


def parse_kv_file(path: str | Path) -> dict[str, str]:
    """Parse a plain ``key=value`` config file, ignoring blanks and # comments."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _validate_config(cfg: GeneratorConfig, schema: Schema) -> None:
    ec, rc = cfg.entity_counts, cfg.relation_counts
    for et in EntityType:
        if ec.get(et, 0) < 0:
            raise ConfigError(f"negative count for entity type {et.value}")
    for rt in RelationType:
        if rc.get(rt, 0) < 0:
            raise ConfigError(f"negative count for relation {rt.value}")
    n_sup = ec.get(EntityType.SUPPLIER, 0)
    t1, t2, t3 = cfg.tier_sizes
    if min(t1, t2, t3) < 0:
        raise ConfigError("negative tier size")
    if 1 + t1 + t2 + t3 > n_sup:
        raise ConfigError(
            f"tier sizes {cfg.tier_sizes} plus the hub exceed the supplier count {n_sup}"
        )
    if not 0.0 <= cfg.shortcut_fraction < 1.0:
        raise ConfigError("shortcut_fraction must be in [0, 1)")
    if not cfg.hub_label:
        raise ConfigError("hub_label must be non-empty")

    def pool(types: frozenset) -> int:
        return sum(ec.get(t, 0) for t in types)

    # Capacity: distinct (source, target) pairs must accommodate the count.
    for rt in RelationType:
        count = rc.get(rt, 0)
        src, tgt = schema.source_types(rt), schema.target_types(rt)
        capacity = pool(src) * pool(tgt) - pool(src & tgt)  # self-edges excluded
        if count > capacity:
            raise ConfigError(
                f"relation {rt.value}: requested {count} edges but only "
                f"{capacity} distinct pairs are possible for the configured entity counts"
            )

    # Structural minimums for the supply network.
    if cfg.hub_fanout < 0:
        raise ConfigError("hub_fanout must be non-negative")
    hub_fanout = min(cfg.hub_fanout, t1)
    n_short = round(cfg.shortcut_fraction * rc.get(RelationType.SUPPLIES_TO, 0))
    base = t1 + t2 + t3 + ec.get(EntityType.SMELTER, 0) + n_short + hub_fanout
    if rc.get(RelationType.SUPPLIES_TO, 0) < base:
        raise ConfigError(
            f"relation supplies_to: count {rc.get(RelationType.SUPPLIES_TO, 0)} is below the "
            f"structural minimum {base} (tier coverage + smelters + shortcuts + hub fanout)"
        )
    if rc.get(RelationType.RELATED_TO, 0) < n_sup:
        raise ConfigError(
            f"relation related_to: count {rc.get(RelationType.RELATED_TO, 0)} cannot cover "
            f"every supplier ({n_sup})"
        )
    min_loc = n_sup + ec.get(EntityType.SMELTER, 0)
    if rc.get(RelationType.LOCATED_IN, 0) < min_loc:
        raise ConfigError(
            f"relation located_in: count {rc.get(RelationType.LOCATED_IN, 0)} cannot cover "
            f"every supplier and smelter ({min_loc})"
        )
    if n_sup > 0 and ec.get(EntityType.BUSINESS_SCOPE, 0) == 0:
        raise ConfigError("relation related_to: no business scopes to relate suppliers to")
    if n_sup > 0 and ec.get(EntityType.COUNTRY, 0) == 0:
        raise ConfigError("relation located_in: no countries to locate suppliers in")


def _skewed_weights(n: int) -> np.ndarray:
    # sqrt-decaying target popularity: varied sizes without letting any
    # single node rival the hub's in-degree
    w = np.sqrt(np.arange(n, 0, -1, dtype=float))
    return w / w.sum()


def _pa_targets(
    rng: np.random.Generator,
    targets: list[int],
    n_draws: int,
    indeg: np.ndarray,
    max_per_target: int | None = None,
) -> list[int]:
    """Draw ``n_draws`` targets with linear preferential attachment.

    Targets become eligible gradually over the draw stream (earliest first),
    so early targets compound their advantage and the in-degree distribution
    comes out heavy-tailed.  Attachment weight is in_degree + 1.
    ``max_per_target`` caps how often one target may be drawn (the size of
    the source pool, so that distinct source/target pairs always exist).
    """
    chosen: list[int] = []
    if n_draws <= 0 or not targets:
        return chosen
    active = 0
    pool = np.asarray(targets, dtype=np.int64)
    block_counts = np.zeros(len(pool), dtype=np.int64)
    for i in range(n_draws):
        want = min(len(pool), max(1, math.ceil(len(pool) * (i + 1) / n_draws)))
        if active < want:
            j = active
            active += 1
        else:
            w = indeg[pool[:active]] + 1.0
            if max_per_target is not None:
                w[block_counts[:active] >= max_per_target] = 0.0
            total = w.sum()
            if total > 0:
                j = int(rng.choice(active, p=w / total))
            elif active < len(pool):
                j = active
                active += 1
            else:
                raise ConfigError("relation supplies_to: attachment pool exhausted; reduce the count")
        block_counts[j] += 1
        t = int(pool[j])
        indeg[t] += 1
        chosen.append(t)
    return chosen


def _sample_distinct_pairs(
    rng: np.random.Generator,
    sources: list[int],
    targets: list[int],
    k: int,
    exclude_self: bool = False,
) -> list[tuple[int, int]]:
    """k distinct (source, target) pairs, exact for small pools, rejection otherwise."""
    if k == 0:
        return []
    capacity = len(sources) * len(targets)
    if exclude_self:
        capacity -= len(set(sources) & set(targets))
    if k > capacity:
        raise ConfigError(f"cannot sample {k} distinct pairs from capacity {capacity}")
    if capacity <= 10_000:
        pairs = [(s, t) for s in sources for t in targets if not (exclude_self and s == t)]
        order = rng.permutation(len(pairs))
        return [pairs[i] for i in order[:k]]
    out: set[tuple[int, int]] = set()
    while len(out) < k:
        s = sources[int(rng.integers(len(sources)))]
        t = targets[int(rng.integers(len(targets)))]
        if exclude_self and s == t:
            continue
        out.add((s, t))
    return sorted(out)


def generate_synthetic(config: GeneratorConfig | None = None, schema: Schema = DEFAULT_SCHEMA) -> Graph:
    """Build a seeded synthetic supply network.

    Guarantees: schema-valid output; the hub supplier receives a supplies_to
    edge from every tier-1 supplier and ends with the maximum in-degree in
    the graph; every supplier has at least one related_to business scope and
    one located_in country; part/substance/smelter relations hit the
    configured counts exactly.
    """
    cfg = config or GeneratorConfig()
    _validate_config(cfg, schema)
    rng = np.random.default_rng(cfg.seed)
    graph = Graph()
    ec, rc = cfg.entity_counts, cfg.relation_counts

    by_type: dict[EntityType, list[int]] = {}
    hub = graph.add_entity(cfg.hub_label, EntityType.SUPPLIER)
    suppliers = [hub]
    for i in range(1, ec.get(EntityType.SUPPLIER, 0)):
        suppliers.append(graph.add_entity(f"SUP-{i:04d}", EntityType.SUPPLIER))
    by_type[EntityType.SUPPLIER] = suppliers
    for et in EntityType:
        if et is EntityType.SUPPLIER:
            continue
        by_type[et] = [
            graph.add_entity(f"{_LABEL_PREFIX[et]}-{i:04d}", et) for i in range(ec.get(et, 0))
        ]

    t1n, t2n, t3n = cfg.tier_sizes
    tier1 = suppliers[1 : 1 + t1n]
    tier2 = suppliers[1 + t1n : 1 + t1n + t2n]
    tier3 = suppliers[1 + t1n + t2n : 1 + t1n + t2n + t3n]

    indeg = np.zeros(graph.num_entities, dtype=np.int64)
    used: set[tuple[int, int]] = set()

    def add_supply(s: int, o: int) -> bool:
        if s == o or (s, o) in used:
            return False
        graph.add_triple(s, RelationType.SUPPLIES_TO, o, schema)
        used.add((s, o))
        return True

    # Tier-1 suppliers all feed the hub.
    for s in tier1:
        add_supply(s, hub)
        indeg[hub] += 1

    # The hub feeds part of tier 1 back (divisions, distribution).
    fanout = min(cfg.hub_fanout, len(tier1))
    if fanout:
        for j in rng.choice(len(tier1), size=fanout, replace=False):
            t = tier1[int(j)]
            add_supply(hub, t)
            indeg[t] += 1

    # Smelters feed a random supplier each.
    for sm in by_type[EntityType.SMELTER]:
        while True:
            o = suppliers[int(rng.integers(len(suppliers)))]
            if add_supply(sm, o):
                indeg[o] += 1
                break

    n_supply = rc.get(RelationType.SUPPLIES_TO, 0)
    n_short = round(cfg.shortcut_fraction * n_supply)
    fill_budget = n_supply - graph.stats().relation_counts.get(RelationType.SUPPLIES_TO, 0) - n_short

    # Per-block draw totals: every tier-2/3 supplier gets one outgoing edge,
    # the rest of the budget is split proportionally to source tier size.
    blocks: list[tuple[list[int], list[int]]] = []
    if tier2 and tier1:
        blocks.append((tier2, tier1))
    if tier3 and tier2:
        blocks.append((tier3, tier2))
    coverage_total = sum(len(src) for src, _ in blocks)
    extra_total = max(0, fill_budget - coverage_total)
    draws_per_block: list[int] = []
    src_total = sum(len(src) for src, _ in blocks) or 1
    for j, (src, _) in enumerate(blocks):
        if j == len(blocks) - 1:
            extra = extra_total - sum(d - len(b[0]) for d, b in zip(draws_per_block, blocks))
        else:
            extra = int(round(extra_total * len(src) / src_total))
        draws_per_block.append(len(src) + extra)

    for (src, tgt), n_draws in zip(blocks, draws_per_block):
        if n_draws > len(src) * len(tgt):
            raise ConfigError(
                "relation supplies_to: tier flow needs more distinct pairs than the "
                "tier sizes allow; reduce the count or grow the tiers"
            )
        order = list(tgt)
        rng.shuffle(order)
        picked = _pa_targets(rng, order, n_draws, indeg, max_per_target=len(src))
        shuffled_src = list(src)
        rng.shuffle(shuffled_src)
        for i, t in enumerate(picked):
            if i < len(shuffled_src):
                s = shuffled_src[i]
                if add_supply(s, t):
                    continue
            placed = False
            for _ in range(50):
                s = src[int(rng.integers(len(src)))]
                if add_supply(s, t):
                    placed = True
                    break
            if not placed:
                for s in src:
                    if add_supply(s, t):
                        placed = True
                        break
            if not placed:
                raise ConfigError("relation supplies_to: tier block saturated; reduce the count")

    # Cross-tier shortcuts: deeper suppliers skipping at least one level.
    short_sources = tier2 + tier3
    for _ in range(n_short):
        if not short_sources:
            break
        placed = False
        for _ in range(200):
            s = short_sources[int(rng.integers(len(short_sources)))]
            if s in tier2 or not tier1:
                t = hub
            else:
                cands = np.asarray([hub] + tier1, dtype=np.int64)
                w = indeg[cands] + 1.0
                t = int(cands[rng.choice(len(cands), p=w / w.sum())])
            if add_supply(s, t):
                indeg[t] += 1
                placed = True
                break
        if not placed:
            raise ConfigError("relation supplies_to: shortcut placement saturated")

    # Supplier coverage relations: one scope and one country each, with a
    # skewed but bounded popularity profile, then extra edges up to the
    # configured counts.
    scopes = list(by_type[EntityType.BUSINESS_SCOPE])
    countries = list(by_type[EntityType.COUNTRY])
    rng.shuffle(scopes)
    rng.shuffle(countries)

    def covered_assign(rel: RelationType, sources: list[int], tgt_pool: list[int]) -> None:
        weights = _skewed_weights(len(tgt_pool))
        picks = rng.choice(len(tgt_pool), size=len(sources), p=weights)
        seen: set[tuple[int, int]] = set()
        for s, j in zip(sources, picks):
            t = tgt_pool[int(j)]
            graph.add_triple(s, rel, t, schema)
            seen.add((s, t))
        extra = rc.get(rel, 0) - len(sources)
        while extra > 0:
            s = sources[int(rng.integers(len(sources)))]
            t = tgt_pool[int(rng.choice(len(tgt_pool), p=weights))]
            if (s, t) in seen:
                continue
            graph.add_triple(s, rel, t, schema)
            seen.add((s, t))
            extra -= 1

    covered_assign(RelationType.RELATED_TO, suppliers, scopes)
    covered_assign(
        RelationType.LOCATED_IN, suppliers + by_type[EntityType.SMELTER], countries
    )

    # belongs_to: a subset of suppliers gets a registration country.
    n_belong = rc.get(RelationType.BELONGS_TO, 0)
    if n_belong and countries:
        if n_belong <= len(suppliers):
            chosen = rng.choice(len(suppliers), size=n_belong, replace=False)
            weights = _skewed_weights(len(countries))
            picks = rng.choice(len(countries), size=n_belong, p=weights)
            for i, j in zip(chosen, picks):
                graph.add_triple(suppliers[int(i)], RelationType.BELONGS_TO, countries[int(j)], schema)
        else:
            for s, t in _sample_distinct_pairs(rng, suppliers, countries, n_belong):
                graph.add_triple(s, RelationType.BELONGS_TO, t, schema)

    # Part/substance/smelter relations: exact configured counts.
    def fill_relation(rel: RelationType) -> None:
        count = rc.get(rel, 0)
        if count == 0:
            return
        src_pool = sorted(set().union(*[by_type[t] for t in schema.source_types(rel)]))
        tgt_pool = sorted(set().union(*[by_type[t] for t in schema.target_types(rel)]))
        pairs = _sample_distinct_pairs(rng, src_pool, tgt_pool, count, exclude_self=True)
        for s, t in pairs:
            graph.add_triple(s, rel, t, schema)

    for rel in (
        RelationType.INCLUDES,
        RelationType.PRODUCES,
        RelationType.PRODUCED_IN,
        RelationType.SAME_AS,
        RelationType.MANUFACTURED_BY,
        RelationType.CONTAINS,
        RelationType.REFINES,
    ):
        fill_relation(rel)

    return graph


# ---------------------------------------------------------------------------
# Transductive splitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitConfig:
    validation_fraction: float = 0.1
    test_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.validation_fraction < 1.0 or not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("split fractions must lie in (0, 1)")
        if self.validation_fraction + self.test_fraction >= 1.0:
            raise ConfigError("validation_fraction + test_fraction must be < 1")

    @classmethod
    def from_file(cls, path: str | Path) -> "SplitConfig":
        kv = parse_kv_file(path)
        kwargs: dict = {}
        for key, value in kv.items():
            try:
                if key in ("validation_fraction", "test_fraction"):
                    kwargs[key] = float(value)
                elif key == "seed":
                    kwargs[key] = int(value)
                else:
                    raise ConfigError(f"{path}: unknown split config key {key!r}")
            except ValueError:
                raise ConfigError(f"{path}: bad value for {key!r}: {value!r}") from None
        return cls(**kwargs)


@dataclass
class SplitResult:
    train: list[Triple]
    validation: list[Triple]
    test: list[Triple]


def split_sizes(n_triples: int, validation_fraction: float, test_fraction: float) -> tuple[int, int, int]:
    """Target (train, validation, test) sizes; rounding remainder goes to train."""
    n_val = round(validation_fraction * n_triples)
    n_test = round(test_fraction * n_triples)
    return n_triples - n_val - n_test, n_val, n_test


def transductive_split(graph: Graph, config: SplitConfig) -> SplitResult:
    """Partition the graph's triples so validation/test stay transductive.

    Every entity and relation type occurring in validation or test must also
    occur in train.  Mechanism: greedily pin one incident triple per entity
    (and per relation type) into train, then sample the remaining free
    triples uniformly without replacement into validation and test.  When
    pinning leaves fewer free triples than the fraction targets, the held-out
    sets shrink (train absorbs the shortfall); if either held-out set would
    end up empty, :class:`SplitInfeasible` is raised.
    """
    if graph.num_triples == 0:
        raise SplitInfeasible("graph has no triples to split")
    triples = sorted(graph.triples)

    first_incident: dict[int, Triple] = {}
    first_rel: dict[RelationType, Triple] = {}
    for t in triples:
        first_incident.setdefault(t.subject, t)
        first_incident.setdefault(t.object, t)
        first_rel.setdefault(t.predicate, t)

    pinned: set[Triple] = set()
    covered: set[int] = set()
    covered_rels: set[RelationType] = set()

    def pin(t: Triple) -> None:
        pinned.add(t)
        covered.add(t.subject)
        covered.add(t.object)
        covered_rels.add(t.predicate)

    for e in range(graph.num_entities):
        if e not in covered and e in first_incident:
            pin(first_incident[e])
    for rel in RelationType:
        if rel in first_rel and rel not in covered_rels:
            pin(first_rel[rel])

    free = [t for t in triples if t not in pinned]
    if not free:
        raise SplitInfeasible(
            "every triple is needed to keep some entity or relation type in train "
            "(nothing can be held out)"
        )
    _, n_val, n_test = split_sizes(len(triples), config.validation_fraction, config.test_fraction)
    if len(free) < n_val + n_test:
        total = n_val + n_test
        n_val_eff = int(len(free) * n_val / total) if total else 0
        n_test_eff = int(len(free) * n_test / total) if total else 0
    else:
        n_val_eff, n_test_eff = n_val, n_test
    if (n_val > 0 and n_val_eff == 0) or (n_test > 0 and n_test_eff == 0):
        raise SplitInfeasible(
            "the transductive cover leaves too few free triples for non-empty "
            "validation/test sets (every triple is some entity's only edge?)"
        )

    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(free))
    validation = sorted(free[i] for i in order[:n_val_eff])
    test = sorted(free[i] for i in order[n_val_eff : n_val_eff + n_test_eff])
    held = set(validation) | set(test)
    train = [t for t in triples if t not in held]
    return SplitResult(train=train, validation=validation, test=test)


# ---------------------------------------------------------------------------
# Split file round trips
# ---------------------------------------------------------------------------

def _write_triple_subset(graph: Graph, triples: list[Triple], path: Path) -> None:
    rows = []
    for t in triples:
        s, o = graph.entities[t.subject], graph.entities[t.object]
        rows.append((s.label, s.entity_type.value, t.predicate.value, o.label, o.entity_type.value))
    rows.sort()
    lines = [_HEADER]
    lines.extend("\t".join(r) for r in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_split(graph: Graph, result: SplitResult, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_triple_subset(graph, result.train, out / TRAIN_FILE)
    _write_triple_subset(graph, result.validation, out / VALID_FILE)
    _write_triple_subset(graph, result.test, out / TEST_FILE)


def load_split_dir(
    split_dir: str | Path, schema: Schema = DEFAULT_SCHEMA
) -> tuple[Graph, np.ndarray, np.ndarray, np.ndarray]:
    """Load train/valid/test files into one union graph plus id-triple arrays.

    The union graph assigns ids in train-file-first order, so under a
    transductive split the entity vocabulary equals the training set's.
    """
    split_dir = Path(split_dir)
    graph = Graph()
    ids: dict[tuple[str, str], int] = {}
    arrays: list[np.ndarray] = []
    for name in (TRAIN_FILE, VALID_FILE, TEST_FILE):
        path = split_dir / name
        rows: list[tuple[int, int, int]] = []
        for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ParseError(f"{path}:{lineno}: expected 5 tab-separated fields, got {len(parts)}")
            s_label, s_type, pred_name, o_label, o_type = parts
            try:
                s_et = EntityType.from_name(s_type)
                o_et = EntityType.from_name(o_type)
                pred = RelationType.from_name(pred_name)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            for label, et in ((s_label, s_et), (o_label, o_et)):
                if (label, et.value) not in ids:
                    ids[(label, et.value)] = graph.add_entity(label, et)
            s = ids[(s_label, s_et.value)]
            o = ids[(o_label, o_et.value)]
            if not graph.has_triple(s, pred, o):
                graph.add_triple(s, pred, o, schema)
            rows.append((s, RELATION_INDEX[pred], o))
        arrays.append(np.array(rows, dtype=np.int64) if rows else np.empty((0, 3), dtype=np.int64))
    return graph, arrays[0], arrays[1], arrays[2]
