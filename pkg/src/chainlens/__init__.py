"""chainlens: supply-network knowledge graphs, link prediction, criticality scoring."""

__version__ = "0.1.0"

from .graph import (
    DEFAULT_SCHEMA,
    DuplicateTriple,
    Entity,
    EntityType,
    Graph,
    GraphError,
    RelationType,
    Schema,
    SchemaViolation,
    Triple,
    UnknownEntity,
)
from .dataset import (
    ConfigError,
    GeneratorConfig,
    ParseError,
    SplitConfig,
    SplitInfeasible,
    SplitResult,
    export_triples,
    generate_synthetic,
    load_triples,
    transductive_split,
)
from .models import ModelKind, ModelParams, init_params, load_checkpoint, save_checkpoint, score
from .training import TrainConfig, TrainHistory, grid_search, train
from .evaluation import EvalReport, Query, evaluate, per_relation_table, rank_object
from .analytics import CriticalityReport, criticality, critical_paths, sole_supplier_scopes

__all__ = [
    "DEFAULT_SCHEMA",
    "ConfigError",
    "CriticalityReport",
    "DuplicateTriple",
    "Entity",
    "EntityType",
    "EvalReport",
    "GeneratorConfig",
    "Graph",
    "GraphError",
    "ModelKind",
    "ModelParams",
    "ParseError",
    "Query",
    "RelationType",
    "Schema",
    "SchemaViolation",
    "SplitConfig",
    "SplitInfeasible",
    "SplitResult",
    "TrainConfig",
    "TrainHistory",
    "Triple",
    "UnknownEntity",
    "criticality",
    "critical_paths",
    "evaluate",
    "export_triples",
    "generate_synthetic",
    "grid_search",
    "init_params",
    "load_checkpoint",
    "load_triples",
    "per_relation_table",
    "rank_object",
    "save_checkpoint",
    "score",
    "sole_supplier_scopes",
    "train",
    "transductive_split",
]
