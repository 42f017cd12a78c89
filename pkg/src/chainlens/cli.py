"""Command-line front end: generate, split, train, eval, analyze, export.

One binary with subcommands sharing config and manifest machinery.  Every
run writes exactly one JSON manifest alongside its outputs recording the
command, effective config, seeds, paths, tool version, and wall-clock
duration, so reruns are checkable.  All randomness flows from a single
per-run seed.

Exit codes: 0 success, 1 usage error, 2 data/schema error, 3 infeasible
operation.  The environment variable CHAINLENS_LOG (error, info, debug)
controls verbosity.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__
from .analytics import criticality, critical_paths, sole_supplier_scopes
from .dataset import (
    ConfigError,
    GeneratorConfig,
    ParseError,
    SplitConfig,
    SplitInfeasible,
    export_triples,
    generate_synthetic,
    load_split_dir,
    load_triples,
    transductive_split,
    write_split,
)
from .evaluation import (
    EmptyQuerySet,
    VocabularyMismatch,
    build_filter_index,
    evaluate,
    per_relation_table,
    type_constrained_candidates,
)
from .exports import FORMATS, ExportMismatch, export_graph
from .graph import (
    DEFAULT_SCHEMA,
    EntityType,
    GraphError,
    RELATION_BY_INDEX,
    RelationType,
    Schema,
)
from .models import ModelKind, load_checkpoint, save_checkpoint
from .training import GRID_DIMS, GRID_LEARNING_RATES, TrainConfig, grid_search, train

logger = logging.getLogger(__name__)

RELATION_NAMES = {i: r.value for i, r in enumerate(RELATION_BY_INDEX)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1 on usage errors, not argparse's 2
        raise UsageError(message)


def _configure_logging() -> None:
    level_name = os.environ.get("CHAINLENS_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        level=levels.get(level_name, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _model_kind(name: str) -> ModelKind:
    try:
        return ModelKind.from_name(name)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load_schema(args) -> Schema:
    if getattr(args, "schema", None):
        return Schema.from_file(args.schema)
    return DEFAULT_SCHEMA


def _write_manifest(
    manifest_path: Path,
    command: str,
    config: dict,
    seeds: list[int],
    inputs: list[str],
    outputs: list[str],
    started: float,
) -> None:
    manifest = {
        "command": command,
        "config": config,
        "seeds": seeds,
        "inputs": sorted(inputs),
        "outputs": sorted(outputs),
        "version": __version__,
        "duration_seconds": round(time.perf_counter() - started, 6),
    }
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _generator_config_snapshot(cfg: GeneratorConfig) -> dict:
    snap: dict = {
        "seed": cfg.seed,
        "hub_label": cfg.hub_label,
        "hub_fanout": cfg.hub_fanout,
        "shortcut_fraction": cfg.shortcut_fraction,
        "tier1": cfg.tier_sizes[0],
        "tier2": cfg.tier_sizes[1],
        "tier3": cfg.tier_sizes[2],
    }
    for et, count in cfg.entity_counts.items():
        snap[et.value] = count
    for rt, count in cfg.relation_counts.items():
        snap[rt.value] = count
    return snap


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    started = time.perf_counter()
    cfg = GeneratorConfig.from_file(args.config) if args.config else GeneratorConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    schema = _load_schema(args)
    graph = generate_synthetic(cfg, schema)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    export_triples(graph, out)
    stats = graph.stats()
    print(f"generated {stats.total_entities} entities, {stats.total_triples} triples -> {out}")
    _write_manifest(
        Path(str(out) + ".manifest.json"),
        "generate",
        _generator_config_snapshot(cfg),
        [cfg.seed],
        [args.config] if args.config else [],
        [str(out)],
        started,
    )
    return 0


def cmd_split(args) -> int:
    started = time.perf_counter()
    schema = _load_schema(args)
    graph = load_triples(args.in_path, schema)
    cfg = SplitConfig.from_file(args.config) if args.config else SplitConfig()
    overrides = {}
    if args.fractions is not None:
        overrides["validation_fraction"] = args.fractions[0]
        overrides["test_fraction"] = args.fractions[1]
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        cfg = replace(cfg, **overrides)
    result = transductive_split(graph, cfg)
    out_dir = Path(args.out)
    write_split(graph, result, out_dir)
    print(
        f"split {graph.num_triples} triples -> train {len(result.train)} / "
        f"valid {len(result.validation)} / test {len(result.test)} in {out_dir}"
    )
    if args.check:
        train_ents = {t.subject for t in result.train} | {t.object for t in result.train}
        train_rels = {t.predicate for t in result.train}
        for name, part in (("validation", result.validation), ("test", result.test)):
            for t in part:
                if t.subject not in train_ents or t.object not in train_ents or t.predicate not in train_rels:
                    print(f"transductive check: FAIL ({name} triple {t})")
                    return 2
        print("transductive check: PASS")
    _write_manifest(
        out_dir / "manifest.json",
        "split",
        {"validation_fraction": cfg.validation_fraction, "test_fraction": cfg.test_fraction, "seed": cfg.seed},
        [cfg.seed],
        [str(args.in_path)] + ([args.config] if args.config else []),
        [str(out_dir / n) for n in ("train.tsv", "valid.tsv", "test.tsv")],
        started,
    )
    return 0


def cmd_train(args) -> int:
    started = time.perf_counter()
    schema = _load_schema(args)
    graph, train_arr, valid_arr, _ = load_split_dir(args.split_dir, schema)
    cfg = TrainConfig.from_file(args.config) if args.config else TrainConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    num_entities, num_relations = graph.num_entities, len(RELATION_BY_INDEX)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.grid:
        result = grid_search(
            args.model, train_arr, valid_arr, num_entities, num_relations, cfg,
            dims=GRID_DIMS, learning_rates=GRID_LEARNING_RATES,
        )
        print(f"grid search over {len(result.runs)} runs; best: dim={result.best_config.dim} "
              f"lr={result.best_config.learning_rate:g} val mrr={result.best_mrr:.4f}")
        for dim, lr, mrr in result.runs:
            print(f"  dim={dim} lr={lr:g}: val mrr {mrr:.4f}")
        params, history, cfg = result.best_params, result.best_history, result.best_config
    else:
        params, history = train(args.model, train_arr, valid_arr, num_entities, num_relations, cfg)
    save_checkpoint(params, out)
    history_path = Path(str(out) + ".history.csv")
    history.to_csv(history_path)
    last = history.records[-1] if history.records else None
    print(
        f"trained {args.model.value} for best epoch {history.best_epoch}"
        + (f" (val hits@10 {last.hits10:.4f}, mrr {last.mrr:.4f} at final eval)" if last else "")
        + f" -> {out}"
    )
    _write_manifest(
        Path(str(out) + ".manifest.json"),
        "train",
        {"model": args.model.value, "grid": bool(args.grid), **asdict(cfg)},
        [cfg.seed],
        [str(args.split_dir)] + ([args.config] if args.config else []),
        [str(out), str(history_path)],
        started,
    )
    return 0


def cmd_eval(args) -> int:
    started = time.perf_counter()
    schema = _load_schema(args)
    params = load_checkpoint(args.checkpoint)
    graph, train_arr, valid_arr, test_arr = load_split_dir(args.split_dir, schema)
    if params.num_entities != graph.num_entities:
        raise GraphError(
            f"checkpoint was trained on {params.num_entities} entities but the split "
            f"directory has {graph.num_entities}"
        )
    filter_index = build_filter_index([train_arr, valid_arr, test_arr])
    candidate_index = type_constrained_candidates(graph, schema) if args.type_constrained else None
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    settings = ["filtered", "raw"] if args.setting == "both" else [args.setting]
    reports = {}
    outputs: list[str] = []
    for setting in settings:
        report = evaluate(
            params, test_arr, filter_index, setting=setting, tie_policy=args.tie,
            threads=args.threads, candidate_index=candidate_index,
        )
        reports[setting] = report
        text_path = out_dir / f"eval_{setting}.txt"
        csv_path = out_dir / f"eval_{setting}.csv"
        text_path.write_text(report.to_text(RELATION_NAMES), encoding="utf-8")
        report.to_csv(csv_path, RELATION_NAMES)
        outputs += [str(text_path), str(csv_path)]
        print(
            f"{params.kind.value} [{setting}/{args.tie}] mrr {report.mrr:.4f}  "
            f"hits@1 {report.hits[1]:.4f}  hits@3 {report.hits[3]:.4f}  hits@10 {report.hits[10]:.4f}"
        )
    if len(reports) == 2:
        assert reports["filtered"].mrr >= reports["raw"].mrr, "filtered MRR fell below raw MRR"
        print(f"filtered MRR {reports['filtered'].mrr:.4f} >= raw MRR {reports['raw'].mrr:.4f}: OK")
    if args.per_relation:
        table = per_relation_table({params.kind.value: reports[settings[0]]})
        table_path = out_dir / "per_relation.csv"
        table.to_csv(table_path, RELATION_NAMES)
        print(table.to_text(RELATION_NAMES), end="")
        outputs.append(str(table_path))
    _write_manifest(
        out_dir / "manifest.json",
        "eval",
        {"checkpoint": str(args.checkpoint), "setting": args.setting, "tie_policy": args.tie,
         "per_relation": bool(args.per_relation), "type_constrained": bool(args.type_constrained),
         "threads": args.threads},
        [params.seed],
        [str(args.checkpoint), str(args.split_dir)],
        outputs,
        started,
    )
    return 0


def cmd_analyze(args) -> int:
    started = time.perf_counter()
    schema = _load_schema(args)
    graph = load_triples(args.in_path, schema)
    suppliers = graph.project_subgraph({EntityType.SUPPLIER}, {RelationType.SUPPLIES_TO})
    report = criticality(suppliers, threshold=args.threshold, threads=args.threads)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "criticality.csv"
    summary_path = out_dir / "summary.txt"
    report.to_csv(csv_path)
    summary_path.write_text(report.summary_text(), encoding="utf-8")
    n_critical = int(report.is_critical.sum())
    paths = critical_paths(suppliers, report)
    print(
        f"analyzed {suppliers.num_entities} suppliers: {n_critical} critical "
        f"(threshold {args.threshold:g}), {len(paths)} critical supply paths"
    )
    outputs = [str(csv_path), str(summary_path)]
    if args.sole_scopes:
        scopes = sole_supplier_scopes(graph)
        scope_path = out_dir / "sole_scopes.csv"
        lines = ["business_scope,supplier"]
        for scope_id, sup_id in scopes:
            lines.append(f"{graph.entities[scope_id].label},{graph.entities[sup_id].label}")
        scope_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        outputs.append(str(scope_path))
        print(f"{len(scopes)} sole-supplier business scopes -> {scope_path}")
    _write_manifest(
        out_dir / "manifest.json",
        "analyze",
        {"threshold": args.threshold, "sole_scopes": bool(args.sole_scopes), "threads": args.threads},
        [],
        [str(args.in_path)],
        outputs,
        started,
    )
    return 0


def cmd_export(args) -> int:
    started = time.perf_counter()
    schema = _load_schema(args)
    graph = load_triples(args.in_path, schema)
    critical_by_label: dict[str, bool] = {}
    with open(args.report, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            critical_by_label[row["node"]] = row["is_critical"] == "1"
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    export_graph(graph, critical_by_label, args.format, out)
    print(f"exported {args.format} -> {out}")
    _write_manifest(
        Path(str(out) + ".manifest.json"),
        "export",
        {"format": args.format, "report": str(args.report)},
        [],
        [str(args.in_path), str(args.report)],
        [str(out)],
        started,
    )
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chainlens", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"chainlens {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic supply network")
    p.add_argument("--config", help="generator key=value config file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--schema", help="schema description file (default: built-in)")
    p.add_argument("--out", required=True, help="output triple file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("split", help="transductive train/valid/test split")
    p.add_argument("--in", dest="in_path", required=True, help="input triple file")
    p.add_argument("--config", help="split key=value config file")
    p.add_argument("--fractions", nargs=2, type=float, default=None,
                   metavar=("VALID", "TEST"), help="held-out fractions (default 0.1 0.1)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--schema", help="schema description file")
    p.add_argument("--check", action="store_true", help="verify the transductive property")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train an embedding model on a split")
    p.add_argument("--model", required=True, type=_model_kind,
                   help="one of: " + ", ".join(k.value for k in ModelKind))
    p.add_argument("--split-dir", required=True)
    p.add_argument("--config", help="training key=value config file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--schema", help="schema description file")
    p.add_argument("--grid", action="store_true",
                   help=f"search dims {GRID_DIMS} x learning rates {GRID_LEARNING_RATES}")
    p.add_argument("--out", required=True, help="output checkpoint (.npz)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="rank test queries and report MRR / hits@k")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--split-dir", required=True)
    p.add_argument("--setting", choices=("raw", "filtered", "both"), default="filtered")
    p.add_argument("--tie", choices=("optimistic", "realistic", "pessimistic"), default="realistic")
    p.add_argument("--per-relation", action="store_true", help="write the per-relation MRR table")
    p.add_argument("--type-constrained", action="store_true",
                   help="restrict candidate objects to schema-legal target types")
    p.add_argument("--schema", help="schema description file")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("analyze", help="criticality scores on the supplier subgraph")
    p.add_argument("--in", dest="in_path", required=True, help="input triple file")
    p.add_argument("--threshold", type=float, default=10.0)
    p.add_argument("--sole-scopes", action="store_true",
                   help="also list business scopes with exactly one related supplier")
    p.add_argument("--schema", help="schema description file")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("export", help="export an annotated graph for visualization")
    p.add_argument("--in", dest="in_path", required=True, help="input triple file")
    p.add_argument("--report", required=True, help="criticality.csv from `analyze`")
    p.add_argument("--format", choices=FORMATS, default="dot")
    p.add_argument("--schema", help="schema description file")
    p.add_argument("--out", required=True, help="output file")
    p.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"chainlens: usage error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, SplitInfeasible) as exc:
        print(f"chainlens: infeasible: {exc}", file=sys.stderr)
        return 3
    except (ParseError, GraphError, ExportMismatch, VocabularyMismatch, EmptyQuerySet) as exc:
        print(f"chainlens: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"chainlens: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
