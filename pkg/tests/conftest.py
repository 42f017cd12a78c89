import numpy as np
import pytest

from chainlens.dataset import GeneratorConfig, SplitConfig, generate_synthetic, transductive_split
from chainlens.graph import DEFAULT_SCHEMA, EntityType, Graph, RelationType


def triples_to_array(triples) -> np.ndarray:
    if not triples:
        return np.empty((0, 3), dtype=np.int64)
    return np.array([t.key() for t in triples], dtype=np.int64)


@pytest.fixture(scope="session")
def default_graph():
    return generate_synthetic(GeneratorConfig())


@pytest.fixture(scope="session")
def default_split(default_graph):
    return transductive_split(default_graph, SplitConfig(0.1, 0.1, seed=1))


@pytest.fixture(scope="session")
def default_split_arrays(default_split):
    return (
        triples_to_array(default_split.train),
        triples_to_array(default_split.validation),
        triples_to_array(default_split.test),
    )


def supplier_chain(n: int) -> Graph:
    """A directed supplies_to path s0 -> s1 -> ... -> s(n-1)."""
    g = Graph()
    ids = [g.add_entity(f"s{i}", EntityType.SUPPLIER) for i in range(n)]
    for a, b in zip(ids, ids[1:]):
        g.add_triple(a, RelationType.SUPPLIES_TO, b, DEFAULT_SCHEMA)
    return g


def random_supplier_graph(rng: np.random.Generator, n_nodes: int, n_edges: int) -> Graph:
    """Random simple digraph over Supplier nodes with supplies_to edges."""
    g = Graph()
    ids = [g.add_entity(f"s{i}", EntityType.SUPPLIER) for i in range(n_nodes)]
    seen = set()
    tries = 0
    while len(seen) < n_edges and tries < 50 * n_edges:
        tries += 1
        a, b = int(rng.integers(n_nodes)), int(rng.integers(n_nodes))
        if a == b or (a, b) in seen:
            continue
        seen.add((a, b))
        g.add_triple(ids[a], RelationType.SUPPLIES_TO, ids[b], DEFAULT_SCHEMA)
    return g


def random_typed_graph(rng: np.random.Generator, n_entities: int, n_triples: int) -> Graph:
    """Random schema-legal graph touching several entity and relation types."""
    g = Graph()
    type_cycle = list(EntityType)
    for i in range(n_entities):
        et = type_cycle[int(rng.integers(len(type_cycle)))]
        g.add_entity(f"e{i}", et)
    by_type = {et: g.entities_of_type(et) for et in EntityType}
    added = 0
    tries = 0
    rels = list(RelationType)
    while added < n_triples and tries < 100 * n_triples:
        tries += 1
        rel = rels[int(rng.integers(len(rels)))]
        srcs = [e for t in DEFAULT_SCHEMA.source_types(rel) for e in by_type[t]]
        tgts = [e for t in DEFAULT_SCHEMA.target_types(rel) for e in by_type[t]]
        if not srcs or not tgts:
            continue
        s = srcs[int(rng.integers(len(srcs)))]
        o = tgts[int(rng.integers(len(tgts)))]
        if s == o or g.has_triple(s, rel, o):
            continue
        g.add_triple(s, rel, o, DEFAULT_SCHEMA)
        added += 1
    return g
