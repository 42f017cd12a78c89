import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainlens.dataset import (
    ConfigError,
    GeneratorConfig,
    ParseError,
    SplitConfig,
    SplitInfeasible,
    export_triples,
    generate_synthetic,
    load_split_dir,
    load_triples,
    parse_kv_file,
    split_sizes,
    transductive_split,
    write_split,
)
from chainlens.graph import (
    DEFAULT_SCHEMA,
    EntityType,
    Graph,
    RelationType,
    SchemaViolation,
)

from conftest import random_typed_graph


# -- file I/O ----------------------------------------------------------------

def test_load_triples_small_file(tmp_path):
    path = tmp_path / "g.tsv"
    path.write_text(
        "# comment\n"
        "a\tSupplier\tsupplies_to\tb\tSupplier\n"
        "a\tSupplier\tsupplies_to\tb\tSupplier\n"  # duplicate collapses
        "a\tSupplier\tlocated_in\tx\tCountry\n"
    )
    g = load_triples(path)
    assert g.num_entities == 3
    assert g.num_triples == 2


def test_load_triples_parse_error_names_line(tmp_path):
    path = tmp_path / "g.tsv"
    path.write_text("a\tSupplier\tsupplies_to\tb\n")
    with pytest.raises(ParseError, match=r":1:"):
        load_triples(path)


def test_load_triples_schema_violation_names_line(tmp_path):
    path = tmp_path / "g.tsv"
    path.write_text(
        "a\tSupplier\tsupplies_to\tb\tSupplier\n"
        "x\tCountry\tsupplies_to\tb\tSupplier\n"
    )
    with pytest.raises(SchemaViolation, match=r":2:"):
        load_triples(path)


def test_export_empty_graph_has_header_only(tmp_path):
    path = tmp_path / "empty.tsv"
    export_triples(Graph(), path)
    lines = path.read_text().splitlines()
    assert len(lines) == 1 and lines[0].startswith("#")


def test_round_trip_default_graph(tmp_path, default_graph):
    path = tmp_path / "g.tsv"
    export_triples(default_graph, path)
    reloaded = load_triples(path)
    assert reloaded.label_triples() == default_graph.label_triples()
    # line count = edges + header
    assert len(path.read_text().splitlines()) == default_graph.num_triples + 1


@given(seed=st.integers(0, 2**31 - 1))
@settings(max_examples=20, deadline=None)
def test_round_trip_random_graphs(tmp_path_factory, seed):
    g = random_typed_graph(np.random.default_rng(seed), 15, 30)
    path = tmp_path_factory.mktemp("rt") / "g.tsv"
    export_triples(g, path)
    assert load_triples(path).label_triples() == g.label_triples()


# -- generator ---------------------------------------------------------------

def test_generator_deterministic(tmp_path):
    cfg = GeneratorConfig(seed=7)
    p1, p2 = tmp_path / "a.tsv", tmp_path / "b.tsv"
    export_triples(generate_synthetic(cfg), p1)
    export_triples(generate_synthetic(cfg), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_generator_output_is_schema_valid(default_graph):
    assert default_graph.validate(DEFAULT_SCHEMA).ok


def test_generator_counts_match_config(default_graph):
    cfg = GeneratorConfig()
    stats = default_graph.stats()
    for et, count in cfg.entity_counts.items():
        assert stats.entity_counts.get(et, 0) == count
    for rt, count in cfg.relation_counts.items():
        assert stats.relation_counts.get(rt, 0) == count


def test_generator_hub_has_max_in_degree(default_graph):
    indeg = np.zeros(default_graph.num_entities, dtype=int)
    for t in default_graph.triples:
        indeg[t.object] += 1
    hub = int(np.argmax(indeg))
    assert default_graph.entities[hub].label == "FocalCo"
    assert indeg[hub] == indeg.max()
    others = np.delete(indeg, hub)
    assert indeg[hub] > others.max()


def test_generator_every_supplier_covered(default_graph):
    suppliers = default_graph.entities_of_type(EntityType.SUPPLIER)
    related = {t.subject for t in default_graph.triples_with_predicate(RelationType.RELATED_TO)}
    located = {t.subject for t in default_graph.triples_with_predicate(RelationType.LOCATED_IN)}
    assert set(suppliers) <= related
    assert set(suppliers) <= located


def test_generator_heavy_tail_contract(default_graph):
    # top 1% of suppliers by in-degree hold >= 20% of supplies_to edges
    suppliers = set(default_graph.entities_of_type(EntityType.SUPPLIER))
    supply = default_graph.triples_with_predicate(RelationType.SUPPLIES_TO)
    indeg = {}
    for t in supply:
        indeg[t.object] = indeg.get(t.object, 0) + 1
    top_n = max(1, round(0.01 * len(suppliers)))
    top = sorted(indeg.values(), reverse=True)[:top_n]
    assert sum(top) / len(supply) >= 0.20


def test_generator_unsatisfiable_counts_error():
    cfg = GeneratorConfig(relation_counts={**GeneratorConfig().relation_counts, RelationType.SAME_AS: 10_000})
    with pytest.raises(ConfigError, match="same_as"):
        generate_synthetic(cfg)


def test_generator_supplies_to_below_structural_minimum():
    cfg = GeneratorConfig(relation_counts={**GeneratorConfig().relation_counts, RelationType.SUPPLIES_TO: 100})
    with pytest.raises(ConfigError, match="supplies_to"):
        generate_synthetic(cfg)


def test_generator_tier_sizes_must_fit():
    with pytest.raises(ConfigError, match="tier"):
        generate_synthetic(GeneratorConfig(tier_sizes=(400, 300, 300)))


def test_generator_config_from_file(tmp_path):
    path = tmp_path / "gen.cfg"
    path.write_text("# small\nseed=3\nsuppliers=40\nsmelters=4\ntier1=5\ntier2=10\ntier3=12\n"
                    "supplies_to=80\nrelated_to=40\nbelongs_to=10\nlocated_in=44\n"
                    "includes=20\nproduces=10\nproduced_in=10\nsame_as=5\n"
                    "manufactured_by=5\ncontains=4\nrefines=2\nhub_label=TinyHub\n")
    cfg = GeneratorConfig.from_file(path)
    assert cfg.seed == 3
    assert cfg.hub_label == "TinyHub"
    assert cfg.entity_counts[EntityType.SUPPLIER] == 40
    g = generate_synthetic(cfg)
    assert g.entities[0].label == "TinyHub"
    assert g.validate(DEFAULT_SCHEMA).ok


def test_generator_config_unknown_key(tmp_path):
    path = tmp_path / "gen.cfg"
    path.write_text("bogus=1\n")
    with pytest.raises(ConfigError, match="bogus"):
        GeneratorConfig.from_file(path)


def test_parse_kv_file_rejects_malformed(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("this is not a pair\n")
    with pytest.raises(ParseError):
        parse_kv_file(path)


# -- splits ------------------------------------------------------------------

def test_split_sizes_full_scale_shape():
    train, val, test = split_sizes(311_676, 0.1, 0.1)
    assert (train, val, test) == (249_340, 31_168, 31_168)


def test_split_partitions_and_is_transductive(default_graph, default_split):
    result = default_split
    all_triples = set(default_graph.triples)
    assert set(result.train) | set(result.validation) | set(result.test) == all_triples
    assert not set(result.train) & set(result.validation)
    assert not set(result.train) & set(result.test)
    assert not set(result.validation) & set(result.test)
    train_ents = {t.subject for t in result.train} | {t.object for t in result.train}
    train_rels = {t.predicate for t in result.train}
    for part in (result.validation, result.test):
        for t in part:
            assert t.subject in train_ents and t.object in train_ents
            assert t.predicate in train_rels


def test_split_fraction_targets_hit_on_default(default_graph, default_split):
    _, n_val, n_test = split_sizes(default_graph.num_triples, 0.1, 0.1)
    assert len(default_split.validation) == n_val
    assert len(default_split.test) == n_test


@given(st.integers(0, 2**31 - 1), st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_split_properties_on_random_graphs(graph_seed, split_seed):
    g = random_typed_graph(np.random.default_rng(graph_seed), 20, 60)
    try:
        result = transductive_split(g, SplitConfig(0.15, 0.15, seed=split_seed))
    except SplitInfeasible:
        return
    assert len(result.train) + len(result.validation) + len(result.test) == g.num_triples
    train_ents = {t.subject for t in result.train} | {t.object for t in result.train}
    train_rels = {t.predicate for t in result.train}
    for part in (result.validation, result.test):
        for t in part:
            assert t.subject in train_ents and t.object in train_ents
            assert t.predicate in train_rels


def test_split_pins_only_triple_of_an_entity():
    # s0 -> s1 is s0's only triple; over 50 seeds it must stay in train
    g = Graph()
    s = [g.add_entity(f"s{i}", EntityType.SUPPLIER) for i in range(8)]
    g.add_triple(s[0], RelationType.SUPPLIES_TO, s[1], DEFAULT_SCHEMA)
    for i in range(1, 7):
        for j in range(i + 1, 8):
            g.add_triple(s[i], RelationType.SUPPLIES_TO, s[j], DEFAULT_SCHEMA)
    lonely = g.triples[0]
    for seed in range(50):
        result = transductive_split(g, SplitConfig(0.2, 0.2, seed=seed))
        assert lonely in result.train


def test_split_star_graph_infeasible():
    g = Graph()
    center = g.add_entity("c", EntityType.SUPPLIER)
    for i in range(6):
        leaf = g.add_entity(f"l{i}", EntityType.SUPPLIER)
        g.add_triple(leaf, RelationType.SUPPLIES_TO, center, DEFAULT_SCHEMA)
    with pytest.raises(SplitInfeasible):
        transductive_split(g, SplitConfig(0.2, 0.2, seed=0))


def test_split_config_validation():
    with pytest.raises(ConfigError):
        SplitConfig(0.0, 0.1)
    with pytest.raises(ConfigError):
        SplitConfig(0.6, 0.5)


def test_split_round_trip_through_files(tmp_path, default_graph, default_split):
    write_split(default_graph, default_split, tmp_path)
    graph, train_arr, valid_arr, test_arr = load_split_dir(tmp_path)
    # triple files carry entities only through triples, so isolated nodes drop
    active = {t.subject for t in default_graph.triples} | {t.object for t in default_graph.triples}
    assert graph.num_entities == len(active)
    assert len(train_arr) == len(default_split.train)
    assert len(valid_arr) == len(default_split.validation)
    assert len(test_arr) == len(default_split.test)
    # id vocabulary comes from the train file, so every id is in range
    assert train_arr[:, [0, 2]].max() < graph.num_entities
    valid_ents = set(valid_arr[:, 0]) | set(valid_arr[:, 2])
    train_ents = set(train_arr[:, 0]) | set(train_arr[:, 2])
    assert valid_ents <= train_ents
