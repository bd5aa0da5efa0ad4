"""kgforge: a desk-scale knowledge-graph embedding toolkit.

Ingest a knowledge graph (TSV, N-Triples, CX), train one of nine
embedding models under a uniform deterministic protocol, evaluate with
rank-based metrics, optimize hyper-parameters by random search, run ranked
inference over candidate triples, and export a reproducibility bundle.
"""

from kgforge.artifacts import (
    ExperimentBundle,
    ValidationReport,
    export_experiment,
    load_bundle,
    load_experiment,
    validate_zoo_entry,
)
from kgforge.config import ExperimentConfig
from kgforge.errors import (
    BundleError,
    ConfigError,
    GraphError,
    HPOError,
    IngestError,
    KGForgeError,
    ModelError,
    RemoteFetchError,
    SplitError,
    TrainingDivergedError,
)
from kgforge.estimator import KGEmbedder
from kgforge.evaluation import RankMetrics, evaluate, rank_one
from kgforge.graph import IndexedKG, Triple, build_index, split
from kgforge.hpo import (
    RandomSearch,
    SearchSpace,
    SearchStrategy,
    SelectionMetric,
    TrialRecord,
    random_search,
    sample_config,
)
from kgforge.inference import (
    enumerate_candidates,
    predict,
    rank_candidates,
    write_predictions,
    write_triples,
)
from kgforge.ingest import (
    SOURCE_FORMATS,
    fetch_network,
    read_cx,
    read_ntriples,
    read_triples,
    read_tsv,
)
from kgforge.losses import LossSpec, bce_loss, margin_loss
from kgforge.models import (
    BUILTIN_MODEL_NAMES,
    EmbeddingModel,
    ModelParams,
    SparseGradient,
    apply_constraints,
    get_model,
    grad_loss,
    init_params,
    register_model,
    score,
)
from kgforge.synthetic import group_structured_kg
from kgforge.training import TrainingHistory, sample_negative, train

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_MODEL_NAMES",
    "BundleError",
    "ConfigError",
    "EmbeddingModel",
    "ExperimentBundle",
    "ExperimentConfig",
    "GraphError",
    "HPOError",
    "IndexedKG",
    "IngestError",
    "KGEmbedder",
    "KGForgeError",
    "LossSpec",
    "ModelError",
    "ModelParams",
    "RandomSearch",
    "RankMetrics",
    "RemoteFetchError",
    "SOURCE_FORMATS",
    "SearchSpace",
    "SearchStrategy",
    "SelectionMetric",
    "SparseGradient",
    "SplitError",
    "TrainingDivergedError",
    "TrainingHistory",
    "TrialRecord",
    "Triple",
    "ValidationReport",
    "apply_constraints",
    "bce_loss",
    "build_index",
    "enumerate_candidates",
    "evaluate",
    "export_experiment",
    "fetch_network",
    "get_model",
    "grad_loss",
    "group_structured_kg",
    "init_params",
    "load_bundle",
    "load_experiment",
    "margin_loss",
    "predict",
    "random_search",
    "rank_candidates",
    "rank_one",
    "read_cx",
    "read_ntriples",
    "read_triples",
    "read_tsv",
    "register_model",
    "sample_config",
    "sample_negative",
    "score",
    "split",
    "train",
    "validate_zoo_entry",
    "write_predictions",
    "write_triples",
]
