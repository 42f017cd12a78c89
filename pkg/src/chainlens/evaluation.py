"""Object-prediction ranking: MRR and hits@k, raw or filtered, per relation.

A query reads a held-out triple (s, p, o) as (s, p, ?).  Every entity is
scored as candidate object; in the filtered setting, candidates other than
the true object that are known-true for (s, p) are excluded before ranking.

Tie handling follows three policies: optimistic (1 + number of strictly
better candidates), pessimistic (number of greater-or-equal candidates with
the true object itself counted once at the end), and realistic (arithmetic
mean of the two).  On an all-tie vector of length N the realistic rank is
exactly (N + 1) / 2.
"""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .models import ModelParams, score_objects

HITS_KS = (1, 3, 10)
SETTINGS = ("raw", "filtered")
TIE_POLICIES = ("optimistic", "realistic", "pessimistic")


class EmptyQuerySet(Exception):
    """evaluate() was called without any queries."""


class VocabularyMismatch(Exception):
    """Reports being combined do not share a relation vocabulary."""


@dataclass(frozen=True)
class Query:
    subject: int
    predicate: int
    true_object: int


@dataclass(frozen=True)
class RankResult:
    query: Query
    rank: float
    num_candidates: int
    setting: str
    tie_policy: str


@dataclass
class PerRelationMetrics:
    mrr: float
    hits: dict[int, float]
    count: int


@dataclass
class EvalReport:
    mrr: float
    hits: dict[int, float]
    per_relation: dict[int, PerRelationMetrics]
    setting: str
    tie_policy: str
    num_queries: int

    def to_text(self, relation_names: dict[int, str] | None = None) -> str:
        names = relation_names or {}
        lines = [
            f"setting: {self.setting}",
            f"tie_policy: {self.tie_policy}",
            f"queries: {self.num_queries}",
            f"mrr: {self.mrr:.6f}",
        ]
        for k in HITS_KS:
            lines.append(f"hits@{k}: {self.hits[k]:.6f}")
        lines.append("")
        lines.append("relation\tqueries\tmrr\thits@1\thits@3\thits@10")
        for rel in sorted(self.per_relation):
            m = self.per_relation[rel]
            lines.append(
                "%s\t%d\t%.6f\t%.6f\t%.6f\t%.6f"
                % (names.get(rel, str(rel)), m.count, m.mrr, m.hits[1], m.hits[3], m.hits[10])
            )
        return "\n".join(lines) + "\n"

    def to_csv(self, path: str | Path, relation_names: dict[int, str] | None = None) -> None:
        names = relation_names or {}
        lines = ["relation,queries,mrr,hits@1,hits@3,hits@10"]
        lines.append(
            "ALL,%d,%.6f,%.6f,%.6f,%.6f"
            % (self.num_queries, self.mrr, self.hits[1], self.hits[3], self.hits[10])
        )
        for rel in sorted(self.per_relation):
            m = self.per_relation[rel]
            lines.append(
                "%s,%d,%.6f,%.6f,%.6f,%.6f"
                % (names.get(rel, str(rel)), m.count, m.mrr, m.hits[1], m.hits[3], m.hits[10])
            )
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


FilterIndex = dict[tuple[int, int], np.ndarray]
CandidateIndex = dict[int, np.ndarray]


def build_filter_index(triple_sets: list[np.ndarray]) -> FilterIndex:
    """Map (subject, relation) to the array of known-true object ids."""
    objects: dict[tuple[int, int], set[int]] = defaultdict(set)
    for arr in triple_sets:
        for s, r, o in np.atleast_2d(np.asarray(arr, dtype=np.int64)):
            objects[(int(s), int(r))].add(int(o))
    return {key: np.fromiter(sorted(vals), dtype=np.int64) for key, vals in objects.items()}


def type_constrained_candidates(graph, schema) -> CandidateIndex:
    """Allowed object ids per relation index, from the schema's target types.

    Optional ranking mode: by default every entity is a candidate object;
    passing this index to evaluate/rank_object restricts candidates to the
    schema-legal target types of each relation.
    """
    from .graph import RELATION_INDEX  # local import keeps the id-level API lean

    by_type: dict = defaultdict(list)
    for entity in graph.entities:
        by_type[entity.entity_type].append(entity.id)
    out: CandidateIndex = {}
    for rel, idx in RELATION_INDEX.items():
        ids = sorted(i for t in schema.target_types(rel) for i in by_type.get(t, ()))
        out[idx] = np.asarray(ids, dtype=np.int64)
    return out


def _rank_from_scores(
    scores: np.ndarray,
    true_object: int,
    excluded: np.ndarray | None,
    tie_policy: str,
    candidates: np.ndarray | None = None,
) -> tuple[float, int]:
    true_score = scores[true_object]
    if candidates is not None or (excluded is not None and len(excluded)):
        if candidates is not None:
            mask = np.zeros(len(scores), dtype=bool)
            mask[candidates] = True
        else:
            mask = np.ones(len(scores), dtype=bool)
        if excluded is not None and len(excluded):
            mask[excluded] = False
        mask[true_object] = True
        cand = scores[mask]
        n_candidates = int(mask.sum())
    else:
        cand = scores
        n_candidates = len(scores)
    greater = int((cand > true_score).sum())
    ties = int((cand == true_score).sum())  # includes the true object itself
    optimistic = 1 + greater
    pessimistic = greater + ties
    if tie_policy == "optimistic":
        return float(optimistic), n_candidates
    if tie_policy == "pessimistic":
        return float(pessimistic), n_candidates
    if tie_policy == "realistic":
        return (optimistic + pessimistic) / 2.0, n_candidates
    raise ValueError(f"tie_policy must be one of {TIE_POLICIES}, got {tie_policy!r}")


def rank_object(
    params: ModelParams,
    query: Query,
    filter_index: FilterIndex | None = None,
    setting: str = "filtered",
    tie_policy: str = "realistic",
    candidate_index: CandidateIndex | None = None,
) -> RankResult:
    """Rank the true object of (subject, predicate, ?).

    All entities are candidates unless ``candidate_index`` restricts them to
    schema-legal target types (see :func:`type_constrained_candidates`).
    """
    if setting not in SETTINGS:
        raise ValueError(f"setting must be one of {SETTINGS}, got {setting!r}")
    if not 0 <= query.subject < params.num_entities or not 0 <= query.true_object < params.num_entities:
        raise KeyError(f"query references unknown entity: {query}")
    if not 0 <= query.predicate < params.num_relations:
        raise KeyError(f"query references unknown relation: {query}")
    scores = score_objects(params, query.subject, query.predicate)
    excluded = None
    if setting == "filtered" and filter_index is not None:
        excluded = filter_index.get((query.subject, query.predicate))
    candidates = None if candidate_index is None else candidate_index.get(query.predicate)
    rank, n_candidates = _rank_from_scores(scores, query.true_object, excluded, tie_policy, candidates)
    return RankResult(query=query, rank=rank, num_candidates=n_candidates, setting=setting, tie_policy=tie_policy)


def _as_queries(queries) -> list[Query]:
    if isinstance(queries, np.ndarray):
        return [Query(int(s), int(r), int(o)) for s, r, o in np.atleast_2d(queries)]
    return [q if isinstance(q, Query) else Query(*q) for q in queries]


def evaluate(
    params: ModelParams,
    queries,
    filter_set=None,
    setting: str = "filtered",
    tie_policy: str = "realistic",
    threads: int = 1,
    candidate_index: CandidateIndex | None = None,
) -> EvalReport:
    """Aggregate MRR and hits@k over queries, overall and per relation type.

    ``queries`` may be Query objects, (s, r, o) tuples, or an (M, 3) id
    array.  ``filter_set`` is either a prebuilt filter index or a list of
    triple arrays covering all known-true triples.  Aggregation is
    order-independent, so queries may be partitioned across threads.
    """
    query_list = _as_queries(queries)
    if not query_list:
        raise EmptyQuerySet("evaluate() needs at least one query")
    if isinstance(filter_set, dict) or filter_set is None:
        filter_index = filter_set
    else:
        filter_index = build_filter_index(list(filter_set))

    def rank_chunk(chunk: list[Query]) -> list[float]:
        return [
            rank_object(params, q, filter_index, setting, tie_policy, candidate_index).rank
            for q in chunk
        ]

    if threads > 1 and len(query_list) > 1:
        chunks = [query_list[i::threads] for i in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(rank_chunk, chunks))
        ranks_by_query: dict[int, float] = {}
        for ci, chunk in enumerate(chunks):
            for qi, rank in zip(range(ci, len(query_list), threads), results[ci]):
                ranks_by_query[qi] = rank
        ranks = np.array([ranks_by_query[i] for i in range(len(query_list))])
    else:
        ranks = np.array(rank_chunk(query_list))

    def metrics(idx: np.ndarray) -> tuple[float, dict[int, float]]:
        rs = ranks[idx]
        return float(np.mean(1.0 / rs)), {k: float(np.mean(rs <= k)) for k in HITS_KS}

    all_idx = np.arange(len(query_list))
    mrr, hits = metrics(all_idx)
    per_relation: dict[int, PerRelationMetrics] = {}
    rels = np.array([q.predicate for q in query_list])
    for rel in sorted(set(rels.tolist())):
        idx = np.where(rels == rel)[0]
        rel_mrr, rel_hits = metrics(idx)
        per_relation[rel] = PerRelationMetrics(mrr=rel_mrr, hits=rel_hits, count=len(idx))
    return EvalReport(
        mrr=mrr,
        hits=hits,
        per_relation=per_relation,
        setting=setting,
        tie_policy=tie_policy,
        num_queries=len(query_list),
    )


@dataclass
class PerRelationTable:
    """MRR by (relation, model) with best-to-worst rank annotations per model."""

    relations: list[int]
    models: list[str]
    mrr: np.ndarray  # (num_relations, num_models)
    ordinal: np.ndarray  # same shape; 1 = best relation for that model

    def to_text(self, relation_names: dict[int, str] | None = None) -> str:
        names = relation_names or {}
        header = ["relation"] + [f"{m}\trank" for m in self.models]
        lines = ["\t".join(header)]
        for i, rel in enumerate(self.relations):
            cells = [names.get(rel, str(rel))]
            for j in range(len(self.models)):
                cells.append(f"{self.mrr[i, j]:.4f}\t{int(self.ordinal[i, j])}")
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"

    def to_csv(self, path: str | Path, relation_names: dict[int, str] | None = None) -> None:
        names = relation_names or {}
        cols = ["relation"]
        for m in self.models:
            cols += [f"{m}_mrr", f"{m}_rank"]
        lines = [",".join(cols)]
        for i, rel in enumerate(self.relations):
            cells = [names.get(rel, str(rel))]
            for j in range(len(self.models)):
                cells += [f"{self.mrr[i, j]:.6f}", str(int(self.ordinal[i, j]))]
            lines.append(",".join(cells))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def per_relation_table(reports: dict[str, EvalReport]) -> PerRelationTable:
    """Combine per-relation MRRs of several models into one ranked matrix."""
    if not reports:
        raise VocabularyMismatch("no reports given")
    models = list(reports)
    vocab = None
    for name, report in reports.items():
        keys = set(report.per_relation)
        if vocab is None:
            vocab = keys
        elif keys != vocab:
            raise VocabularyMismatch(
                f"report {name!r} covers relations {sorted(keys)}, expected {sorted(vocab)}"
            )
    relations = sorted(vocab or set())
    mrr = np.zeros((len(relations), len(models)))
    for j, name in enumerate(models):
        for i, rel in enumerate(relations):
            mrr[i, j] = reports[name].per_relation[rel].mrr
    # Rank within each model column: 1 = best relation, ties share the
    # smaller ordinal by first appearance in descending sort order.
    ordinal = np.zeros_like(mrr, dtype=np.int64)
    for j in range(len(models)):
        order = np.argsort(-mrr[:, j], kind="stable")
        ordinal[order, j] = np.arange(1, len(relations) + 1)
    return PerRelationTable(relations=relations, models=models, mrr=mrr, ordinal=ordinal)
