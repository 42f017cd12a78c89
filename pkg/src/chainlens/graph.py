"""Typed in-memory knowledge graph store.

Entities carry one of eight built-in entity types and triples one of eleven
built-in relation types.  A :class:`Schema` restricts which entity types may
appear as the source and target of each relation; the built-in default
describes a multi-tier supply network (suppliers, parts, smelters,
substances, components, countries, business scopes).

Construction is single-writer.  Once built, a Graph is treated as frozen
and may be read concurrently from any number of threads.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np


class GraphError(Exception):
    """Base class for graph store errors."""


class UnknownEntity(GraphError):
    """An entity id that is not present in the graph."""


class SchemaViolation(GraphError):
    """A triple whose endpoint types are not allowed for its relation."""


class DuplicateTriple(GraphError):
    """Insertion of a triple that is already present (triples form a set)."""


class SchemaError(GraphError):
    """A malformed or incomplete schema definition."""


class EntityType(Enum):
    SUPPLIER = "Supplier"
    MANUFACTURER_PART = "ManufacturerPart"
    SIEMENS_PART = "SiemensPart"
    SMELTER = "Smelter"
    SUBSTANCE = "Substance"
    COMPONENT = "Component"
    COUNTRY = "Country"
    BUSINESS_SCOPE = "BusinessScope"

    @classmethod
    def from_name(cls, name: str) -> "EntityType":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(t.value for t in cls)
            raise ValueError(f"unknown entity type {name!r} (valid: {valid})") from None


class RelationType(Enum):
    SUPPLIES_TO = "supplies_to"
    RELATED_TO = "related_to"
    BELONGS_TO = "belongs_to"
    LOCATED_IN = "located_in"
    INCLUDES = "includes"
    PRODUCES = "produces"
    PRODUCED_IN = "produced_in"
    SAME_AS = "same_as"
    MANUFACTURED_BY = "manufactured_by"
    CONTAINS = "contains"
    REFINES = "refines"

    @classmethod
    def from_name(cls, name: str) -> "RelationType":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(r.value for r in cls)
            raise ValueError(f"unknown relation type {name!r} (valid: {valid})") from None


#: Stable 0-based index per relation type, used as the relation id by the
#: embedding and evaluation layers.
RELATION_INDEX: dict[RelationType, int] = {r: i for i, r in enumerate(RelationType)}
RELATION_BY_INDEX: tuple[RelationType, ...] = tuple(RelationType)

_ET = EntityType
_RT = RelationType

_DEFAULT_RULES: dict[RelationType, tuple[frozenset, frozenset]] = {
    _RT.SUPPLIES_TO: (frozenset({_ET.SUPPLIER, _ET.SMELTER}), frozenset({_ET.SUPPLIER})),
    _RT.RELATED_TO: (frozenset({_ET.SUPPLIER}), frozenset({_ET.BUSINESS_SCOPE})),
    _RT.BELONGS_TO: (frozenset({_ET.SUPPLIER}), frozenset({_ET.COUNTRY})),
    _RT.LOCATED_IN: (frozenset({_ET.SUPPLIER, _ET.SMELTER}), frozenset({_ET.COUNTRY})),
    _RT.INCLUDES: (frozenset({_ET.COMPONENT}), frozenset({_ET.SUBSTANCE})),
    _RT.PRODUCES: (frozenset({_ET.SUPPLIER}), frozenset({_ET.COMPONENT})),
    _RT.PRODUCED_IN: (frozenset({_ET.SUBSTANCE}), frozenset({_ET.COUNTRY})),
    _RT.SAME_AS: (frozenset({_ET.MANUFACTURER_PART}), frozenset({_ET.SIEMENS_PART})),
    _RT.MANUFACTURED_BY: (frozenset({_ET.COMPONENT}), frozenset({_ET.SUPPLIER})),
    _RT.CONTAINS: (frozenset({_ET.COMPONENT}), frozenset({_ET.COMPONENT})),
    _RT.REFINES: (frozenset({_ET.SMELTER}), frozenset({_ET.SUBSTANCE})),
}


@dataclass(frozen=True)
class Schema:
    """Per-relation source/target entity-type constraints.

    Every relation type must be present with non-empty source and target
    sets.  Schemas are data: the default supply-network schema is built in,
    and variants can be loaded from a tab-separated description file.
    """

    rules: dict[RelationType, tuple[frozenset, frozenset]]

    def __post_init__(self) -> None:
        for rel in RelationType:
            if rel not in self.rules:
                raise SchemaError(f"schema is missing relation type {rel.value!r}")
            src, tgt = self.rules[rel]
            if not src or not tgt:
                raise SchemaError(f"relation {rel.value!r} has empty source or target types")

    def source_types(self, relation: RelationType) -> frozenset:
        return self.rules[relation][0]

    def target_types(self, relation: RelationType) -> frozenset:
        return self.rules[relation][1]

    def allows(self, source_type: EntityType, relation: RelationType, target_type: EntityType) -> bool:
        src, tgt = self.rules[relation]
        return source_type in src and target_type in tgt

    @classmethod
    def default(cls) -> "Schema":
        return cls(dict(_DEFAULT_RULES))

    @classmethod
    def from_file(cls, path: str | Path) -> "Schema":
        """Load a schema: one line per relation, ``relation TAB sources TAB targets``.

        Source/target cells are comma-separated entity type names.  Lines
        starting with ``#`` and blank lines are ignored.
        """
        rules: dict[RelationType, tuple[frozenset, frozenset]] = {}
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise SchemaError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(parts)}")
            try:
                rel = RelationType.from_name(parts[0])
                src = frozenset(EntityType.from_name(n.strip()) for n in parts[1].split(",") if n.strip())
                tgt = frozenset(EntityType.from_name(n.strip()) for n in parts[2].split(",") if n.strip())
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None
            if rel in rules:
                raise SchemaError(f"{path}:{lineno}: duplicate relation {rel.value!r}")
            rules[rel] = (src, tgt)
        return cls(rules)

    def to_file(self, path: str | Path) -> None:
        lines = ["# relation\tsource_types\ttarget_types"]
        for rel in RelationType:
            src, tgt = self.rules[rel]
            lines.append(
                "%s\t%s\t%s"
                % (rel.value, ",".join(sorted(t.value for t in src)), ",".join(sorted(t.value for t in tgt)))
            )
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


DEFAULT_SCHEMA = Schema.default()


@dataclass(frozen=True)
class Entity:
    id: int
    label: str
    entity_type: EntityType


@dataclass(frozen=True)
class Triple:
    """One directed fact; the predicate points at the object."""

    subject: int
    predicate: RelationType
    object: int

    def key(self) -> tuple[int, int, int]:
        return (self.subject, RELATION_INDEX[self.predicate], self.object)

    def __lt__(self, other: "Triple") -> bool:
        return self.key() < other.key()


@dataclass
class ValidationReport:
    """Result of checking a graph against a schema."""

    schema_violations: list[Triple]
    dangling: list[Triple]

    @property
    def ok(self) -> bool:
        return not self.schema_violations and not self.dangling

    def summary(self) -> str:
        if self.ok:
            return "OK: graph is schema-consistent"
        return "%d schema violation(s), %d dangling reference(s)" % (
            len(self.schema_violations),
            len(self.dangling),
        )


@dataclass
class GraphStats:
    entity_counts: dict[EntityType, int]
    relation_counts: dict[RelationType, int]
    total_entities: int
    total_triples: int

    def as_text(self) -> str:
        lines = ["entity_type\tnodes"]
        for et in EntityType:
            lines.append(f"{et.value}\t{self.entity_counts.get(et, 0)}")
        lines.append(f"Total\t{self.total_entities}")
        lines.append("relation_type\tedges")
        for rt in RelationType:
            lines.append(f"{rt.value}\t{self.relation_counts.get(rt, 0)}")
        lines.append(f"Total\t{self.total_triples}")
        return "\n".join(lines)


class Graph:
    """In-memory triple store with dense integer entity ids.

    Ids are consecutive integers assigned at insertion, so downstream code
    can use them directly as array indices.  Triples are a set: inserting
    the same (subject, predicate, object) twice raises
    :class:`DuplicateTriple` and leaves the graph unchanged.
    """

    def __init__(self) -> None:
        self.entities: list[Entity] = []
        self.triples: list[Triple] = []
        self._triple_set: set[tuple[int, int, int]] = set()
        self._out: dict[int, list[Triple]] = defaultdict(list)
        self._in: dict[int, list[Triple]] = defaultdict(list)
        self._by_predicate: dict[RelationType, list[Triple]] = defaultdict(list)

    # -- construction ------------------------------------------------------

    def add_entity(self, label: str, entity_type: EntityType) -> int:
        """Insert an entity and return its fresh id.

        Duplicate labels are allowed; ids disambiguate.  Labels must be
        non-empty (caller-side contract).
        """
        eid = len(self.entities)
        self.entities.append(Entity(eid, label, entity_type))
        return eid

    def add_triple(self, subject: int, predicate: RelationType, object: int, schema: Schema) -> None:
        """Insert a schema-checked triple and update the adjacency indices."""
        s_ent = self.entity(subject)
        o_ent = self.entity(object)
        if s_ent.entity_type not in schema.source_types(predicate):
            raise SchemaViolation(
                f"{s_ent.entity_type.value} is not a valid source for {predicate.value} "
                f"(triple {s_ent.label} -{predicate.value}-> {o_ent.label})"
            )
        if o_ent.entity_type not in schema.target_types(predicate):
            raise SchemaViolation(
                f"{o_ent.entity_type.value} is not a valid target for {predicate.value} "
                f"(triple {s_ent.label} -{predicate.value}-> {o_ent.label})"
            )
        key = (subject, RELATION_INDEX[predicate], object)
        if key in self._triple_set:
            raise DuplicateTriple(f"triple ({subject}, {predicate.value}, {object}) already present")
        triple = Triple(subject, predicate, object)
        self._triple_set.add(key)
        self.triples.append(triple)
        self._out[subject].append(triple)
        self._in[object].append(triple)
        self._by_predicate[predicate].append(triple)

    # -- lookups -----------------------------------------------------------

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_triples(self) -> int:
        return len(self.triples)

    def entity(self, entity_id: int) -> Entity:
        if not 0 <= entity_id < len(self.entities):
            raise UnknownEntity(f"no entity with id {entity_id}")
        return self.entities[entity_id]

    def entity_type(self, entity_id: int) -> EntityType:
        return self.entity(entity_id).entity_type

    def has_triple(self, subject: int, predicate: RelationType, object: int) -> bool:
        return (subject, RELATION_INDEX[predicate], object) in self._triple_set

    def entities_of_type(self, entity_type: EntityType) -> list[int]:
        return [e.id for e in self.entities if e.entity_type is entity_type]

    def triples_with_predicate(self, predicate: RelationType) -> list[Triple]:
        return list(self._by_predicate.get(predicate, ()))

    def neighbors(
        self,
        entity: int,
        direction: str = "both",
        predicate: RelationType | None = None,
    ) -> list[tuple[int, RelationType]]:
        """Adjacent (neighbor, relation) pairs, sorted by id then relation.

        ``direction`` is one of ``out`` (triples where the entity is the
        subject), ``in`` (object), or ``both``; ``both`` concatenates the two
        multisets, so a reciprocal edge appears twice.
        """
        self.entity(entity)
        if direction not in ("in", "out", "both"):
            raise ValueError(f"direction must be in/out/both, got {direction!r}")
        pairs: list[tuple[int, RelationType]] = []
        if direction in ("out", "both"):
            pairs.extend((t.object, t.predicate) for t in self._out.get(entity, ()))
        if direction in ("in", "both"):
            pairs.extend((t.subject, t.predicate) for t in self._in.get(entity, ()))
        if predicate is not None:
            pairs = [p for p in pairs if p[1] is predicate]
        pairs.sort(key=lambda p: (p[0], RELATION_INDEX[p[1]]))
        return pairs

    # -- whole-graph operations --------------------------------------------

    def validate(self, schema: Schema) -> ValidationReport:
        """List every schema-violating triple and every dangling reference."""
        violations: list[Triple] = []
        dangling: list[Triple] = []
        n = len(self.entities)
        for t in self.triples:
            if not (0 <= t.subject < n and 0 <= t.object < n):
                dangling.append(t)
                continue
            s_type = self.entities[t.subject].entity_type
            o_type = self.entities[t.object].entity_type
            if not schema.allows(s_type, t.predicate, o_type):
                violations.append(t)
        return ValidationReport(schema_violations=violations, dangling=dangling)

    def project_subgraph(
        self,
        entity_types: set[EntityType] | frozenset,
        relation_types: set[RelationType] | frozenset,
    ) -> "Graph":
        """Project onto the given entity and relation types.

        The result keeps exactly the entities whose type is in
        ``entity_types`` plus the triples whose predicate is in
        ``relation_types`` with both endpoints retained.  Entity ids are
        re-assigned densely in ascending original-id order.
        """
        sub = Graph()
        mapping: dict[int, int] = {}
        for ent in self.entities:
            if ent.entity_type in entity_types:
                mapping[ent.id] = sub.add_entity(ent.label, ent.entity_type)
        for t in self.triples:
            if t.predicate in relation_types and t.subject in mapping and t.object in mapping:
                triple = Triple(mapping[t.subject], t.predicate, mapping[t.object])
                sub._triple_set.add(triple.key())
                sub.triples.append(triple)
                sub._out[triple.subject].append(triple)
                sub._in[triple.object].append(triple)
                sub._by_predicate[triple.predicate].append(triple)
        return sub

    def stats(self) -> GraphStats:
        entity_counts = Counter(e.entity_type for e in self.entities)
        relation_counts = Counter(t.predicate for t in self.triples)
        return GraphStats(
            entity_counts=dict(entity_counts),
            relation_counts=dict(relation_counts),
            total_entities=len(self.entities),
            total_triples=len(self.triples),
        )

    # -- conversions -------------------------------------------------------

    def triples_array(self) -> np.ndarray:
        """All triples as an (M, 3) int64 array of (subject, relation index, object)."""
        if not self.triples:
            return np.empty((0, 3), dtype=np.int64)
        return np.array([t.key() for t in self.triples], dtype=np.int64)

    def label_triples(self) -> list[tuple[str, str, str, str, str]]:
        """Sorted label-level view, the canonical form for file round trips."""
        rows = []
        for t in self.triples:
            s = self.entities[t.subject]
            o = self.entities[t.object]
            rows.append((s.label, s.entity_type.value, t.predicate.value, o.label, o.entity_type.value))
        rows.sort()
        return rows
