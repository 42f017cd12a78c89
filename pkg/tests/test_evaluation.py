import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainlens.evaluation import (
    EmptyQuerySet,
    EvalReport,
    PerRelationMetrics,
    Query,
    VocabularyMismatch,
    build_filter_index,
    evaluate,
    per_relation_table,
    rank_object,
)
from chainlens.models import ModelKind, ModelParams, init_params
from chainlens.training import TrainConfig, train


def table_params(score_table: dict[int, np.ndarray], n_entities: int) -> ModelParams:
    """RESCAL params whose scores are exactly M_r[s, o], i.e. arbitrary tables."""
    n_rel = max(score_table) + 1
    relation = np.zeros((n_rel, n_entities, n_entities))
    for rel, table in score_table.items():
        relation[rel] = np.asarray(table, dtype=float)
    return ModelParams(
        kind=ModelKind.RESCAL,
        dim=n_entities,
        num_entities=n_entities,
        num_relations=n_rel,
        seed=0,
        blocks={"entity": np.eye(n_entities), "relation": relation},
    )


# -- rank_object -------------------------------------------------------------

def test_strictly_best_object_ranks_first_under_every_policy():
    p = table_params({0: np.array([[1.0, 9.0, 3.0, 2.0, 0.0]] * 5)}, 5)
    q = Query(0, 0, 1)
    for policy in ("optimistic", "realistic", "pessimistic"):
        assert rank_object(p, q, setting="raw", tie_policy=policy).rank == 1.0


def test_all_tie_rank_arithmetic():
    p = table_params({0: np.zeros((5, 5))}, 5)
    q = Query(0, 0, 2)
    assert rank_object(p, q, setting="raw", tie_policy="optimistic").rank == 1.0
    assert rank_object(p, q, setting="raw", tie_policy="pessimistic").rank == 5.0
    assert rank_object(p, q, setting="raw", tie_policy="realistic").rank == 3.0


@pytest.mark.parametrize("n", [2, 5, 101])
def test_all_tie_realistic_rank_is_midpoint(n):
    p = table_params({0: np.zeros((n, n))}, n)
    rank = rank_object(p, Query(0, 0, n - 1), setting="raw", tie_policy="realistic").rank
    assert rank == (n + 1) / 2


def test_filtered_excludes_known_true_competitor():
    # candidate 3 outranks the true object 1 but is known-true for (0, r)
    scores = np.array([[0.0, 5.0, 1.0, 9.0, 2.0]] * 5)
    p = table_params({0: scores}, 5)
    q = Query(0, 0, 1)
    raw = rank_object(p, q, setting="raw").rank
    filter_index = build_filter_index([np.array([[0, 0, 3]])])
    filtered = rank_object(p, q, filter_index, setting="filtered").rank
    assert raw == 2.0
    assert filtered == raw - 1.0


def test_filtered_never_excludes_true_object():
    scores = np.array([[0.0, 5.0, 1.0, 9.0, 2.0]] * 5)
    p = table_params({0: scores}, 5)
    filter_index = build_filter_index([np.array([[0, 0, 1], [0, 0, 3]])])
    result = rank_object(p, Query(0, 0, 1), filter_index, setting="filtered")
    assert result.rank == 1.0
    assert result.num_candidates == 4


def test_random_model_realistic_rank_mean_matches_uniform_oracle():
    n = 50
    p = init_params(ModelKind.TRANSE, n, 2, TrainConfig(dim=16, seed=13))
    rng = np.random.default_rng(13)
    queries = np.column_stack(
        [rng.integers(n, size=10_000), rng.integers(2, size=10_000), rng.integers(n, size=10_000)]
    )
    report = evaluate(p, queries, None, setting="raw", tie_policy="realistic")
    ranks = []
    for s, r, o in queries:
        ranks.append(rank_object(p, Query(int(s), int(r), int(o)), setting="raw").rank)
    mean_rank = float(np.mean(ranks))
    assert abs(mean_rank - (n + 1) / 2) / ((n + 1) / 2) < 0.05
    assert report.num_queries == 10_000


def test_rank_object_unknown_ids():
    p = table_params({0: np.zeros((3, 3))}, 3)
    with pytest.raises(KeyError):
        rank_object(p, Query(9, 0, 0))
    with pytest.raises(KeyError):
        rank_object(p, Query(0, 5, 0))


# -- evaluate ----------------------------------------------------------------

def ranks_fixture_params():
    # three queries engineered to rank 1, 2, and 4
    table = np.array(
        [
            [9.0, 1.0, 2.0, 3.0, 4.0],
            [9.0, 5.0, 1.0, 2.0, 3.0],
            [9.0, 8.0, 1.0, 7.0, 0.5],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
        ]
    )
    p = table_params({0: table}, 5)
    queries = [Query(0, 0, 0), Query(1, 0, 1), Query(2, 0, 2)]
    return p, queries


def test_evaluate_rank_arithmetic():
    p, queries = ranks_fixture_params()
    report = evaluate(p, queries, None, setting="raw")
    assert report.mrr == pytest.approx((1 + 1 / 2 + 1 / 4) / 3, abs=1e-9)
    assert report.hits[1] == pytest.approx(1 / 3)
    assert report.hits[3] == pytest.approx(2 / 3)
    assert report.hits[10] == pytest.approx(1.0)


def test_evaluate_all_rank_one():
    p = table_params({0: np.diag([9.0] * 4) + 1.0}, 4)
    queries = [Query(i, 0, i) for i in range(4)]
    report = evaluate(p, queries, None, setting="raw")
    assert report.mrr == 1.0
    assert all(v == 1.0 for v in report.hits.values())


def test_evaluate_empty_queries():
    p = table_params({0: np.zeros((3, 3))}, 3)
    with pytest.raises(EmptyQuerySet):
        evaluate(p, [], None)


def test_evaluate_invariant_under_query_permutation():
    p, queries = ranks_fixture_params()
    a = evaluate(p, queries, None, setting="raw")
    b = evaluate(p, list(reversed(queries)), None, setting="raw")
    assert a.mrr == b.mrr and a.hits == b.hits


def test_evaluate_threads_match_sequential():
    p, queries = ranks_fixture_params()
    seq = evaluate(p, queries * 10, None, setting="raw")
    par = evaluate(p, queries * 10, None, setting="raw", threads=4)
    assert seq.mrr == par.mrr and seq.hits == par.hits


def test_per_relation_counts_sum_to_total():
    table0 = np.random.default_rng(0).normal(size=(6, 6))
    table1 = np.random.default_rng(1).normal(size=(6, 6))
    p = table_params({0: table0, 1: table1}, 6)
    rng = np.random.default_rng(2)
    queries = [Query(int(rng.integers(6)), int(rng.integers(2)), int(rng.integers(6))) for _ in range(40)]
    report = evaluate(p, queries, None, setting="raw")
    assert sum(m.count for m in report.per_relation.values()) == 40
    assert report.hits[1] <= report.hits[3] <= report.hits[10]
    assert report.mrr >= report.hits[1]


@given(seed=st.integers(0, 2**31 - 1))
@settings(max_examples=50, deadline=None)
def test_hits_monotonicity_on_random_rank_vectors(seed):
    rng = np.random.default_rng(seed)
    ranks = rng.integers(1, 30, size=rng.integers(1, 60))
    hits = {k: float(np.mean(ranks <= k)) for k in (1, 3, 10)}
    mrr = float(np.mean(1.0 / ranks))
    assert hits[1] <= hits[3] <= hits[10]
    assert 0.0 < mrr <= 1.0
    assert mrr >= hits[1]


def test_filtered_mrr_at_least_raw_on_trained_model():
    rng = np.random.default_rng(3)
    seen = set()
    while len(seen) < 50:
        s, r, o = int(rng.integers(12)), int(rng.integers(2)), int(rng.integers(12))
        if s != o:
            seen.add((s, r, o))
    triples = np.array(sorted(seen), dtype=np.int64)
    cfg = TrainConfig(dim=8, max_epochs=40, eval_every=20, batch_size=16, seed=4)
    params, _ = train(ModelKind.COMPLEX, triples, triples[:10], 12, 2, cfg)
    filter_index = build_filter_index([triples])
    filtered = evaluate(params, triples, filter_index, setting="filtered")
    raw = evaluate(params, triples, filter_index, setting="raw")
    assert filtered.mrr >= raw.mrr


# -- per-relation table ------------------------------------------------------

def _report(per_rel: dict[int, float]) -> EvalReport:
    per = {
        rel: PerRelationMetrics(mrr=v, hits={1: v, 3: v, 10: v}, count=1)
        for rel, v in per_rel.items()
    }
    return EvalReport(
        mrr=float(np.mean(list(per_rel.values()))),
        hits={1: 0.0, 3: 0.0, 10: 0.0},
        per_relation=per,
        setting="filtered",
        tie_policy="realistic",
        num_queries=len(per_rel),
    )


def test_per_relation_table_single_cell():
    table = per_relation_table({"m": _report({0: 0.42})})
    assert table.mrr.shape == (1, 1)
    assert table.mrr[0, 0] == pytest.approx(0.42)
    assert table.ordinal[0, 0] == 1


def test_per_relation_table_identical_reports_identical_columns():
    r = _report({0: 0.3, 1: 0.6, 2: 0.1})
    table = per_relation_table({"a": r, "b": r})
    np.testing.assert_array_equal(table.mrr[:, 0], table.mrr[:, 1])
    np.testing.assert_array_equal(table.ordinal[:, 0], table.ordinal[:, 1])
    assert list(table.ordinal[:, 0]) == [2, 1, 3]  # rels sorted 0,1,2 -> mrr .3,.6,.1


def test_per_relation_table_vocabulary_mismatch():
    with pytest.raises(VocabularyMismatch):
        per_relation_table({"a": _report({0: 0.3}), "b": _report({0: 0.3, 1: 0.4})})


def test_isolated_bipartite_relation_scores_worst():
    """Objects reachable only through one relation are hardest to predict.

    Relations 0 and 1 funnel every subject onto a single popular object, so
    a trained model nails their held-out triples; relation 2 pairs otherwise
    disconnected left/right entities at random, so its held-out triples stay
    near chance and its per-relation MRR lands strictly lowest.
    """
    rng = np.random.default_rng(6)
    hub, scope = 0, 1
    companies = list(range(2, 22))
    lefts = list(range(22, 34))
    rights = list(range(34, 40))
    train_triples = []
    test_triples = []
    for i, c in enumerate(companies):
        (test_triples if i < 3 else train_triples).append((c, 0, hub))
        (test_triples if i < 3 else train_triples).append((c, 1, scope))
    for i, l in enumerate(lefts):
        first, second = rng.choice(len(rights), size=2, replace=False)
        train_triples.append((l, 2, rights[first]))
        (test_triples if i < 3 else train_triples).append((l, 2, rights[second]))
    train_arr = np.array(sorted(set(train_triples)), dtype=np.int64)
    test_arr = np.array(sorted(set(test_triples)), dtype=np.int64)
    cfg = TrainConfig(dim=16, learning_rate=0.01, max_epochs=200, eval_every=200, batch_size=64, seed=6)
    params, _ = train(ModelKind.ROTATE, train_arr, test_arr, 40, 3, cfg)
    filter_index = build_filter_index([train_arr, test_arr])
    report = evaluate(params, test_arr, filter_index, setting="filtered")
    by_rel = {rel: m.mrr for rel, m in report.per_relation.items()}
    assert set(by_rel) == {0, 1, 2}
    assert by_rel[2] < by_rel[0] and by_rel[2] < by_rel[1]


def test_type_constrained_candidates_restrict_ranking():
    from chainlens.evaluation import type_constrained_candidates
    from chainlens.graph import DEFAULT_SCHEMA, EntityType, Graph, RELATION_INDEX, RelationType

    g = Graph()
    s = g.add_entity("s", EntityType.SUPPLIER)
    scopes = [g.add_entity(f"b{i}", EntityType.BUSINESS_SCOPE) for i in range(3)]
    g.add_entity("c", EntityType.COUNTRY)
    g.add_triple(s, RelationType.RELATED_TO, scopes[0], DEFAULT_SCHEMA)
    cand = type_constrained_candidates(g, DEFAULT_SCHEMA)
    rel = RELATION_INDEX[RelationType.RELATED_TO]
    assert sorted(cand[rel].tolist()) == sorted(scopes)

    # with all-tie scores, restricting candidates shrinks the realistic rank
    p = table_params({rel: np.zeros((5, 5))}, 5)
    unconstrained = rank_object(p, Query(s, rel, scopes[0]), setting="raw")
    constrained = rank_object(p, Query(s, rel, scopes[0]), setting="raw", candidate_index=cand)
    assert unconstrained.num_candidates == 5
    assert constrained.num_candidates == 3
    assert constrained.rank == 2.0  # (3 + 1) / 2
    assert unconstrained.rank == 3.0


# -- serialization -----------------------------------------------------------

def test_report_text_and_csv(tmp_path):
    p, queries = ranks_fixture_params()
    report = evaluate(p, queries, None, setting="raw")
    text = report.to_text({0: "supplies_to"})
    assert "mrr: 0.583333" in text
    assert "supplies_to" in text
    csv_path = tmp_path / "report.csv"
    report.to_csv(csv_path, {0: "supplies_to"})
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "relation,queries,mrr,hits@1,hits@3,hits@10"
    assert lines[1].startswith("ALL,3,0.583333")
