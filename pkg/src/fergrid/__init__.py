"""Deterministic grid-world simulation of embodied expression classifiers.

Agents on a toroidal lattice display facial-expression embeddings, learn
small per-agent classification heads during a clean learning phase, then
face scheduled embedding degradation while frozen. The package provides
the embedding store format, the classifier head with its optimizer, the
simulation loop, block metrics, and cross-run reporting.
"""

from .adapter import (
    AdapterParams,
    OptimizerState,
    Prediction,
    TrainingConfig,
    adamw_step,
    forward,
    init_params,
    loss_and_grad,
    predict,
    train_step,
)
from .agents import Agent, MoveIntent, PerceptionEvent
from .config import ExperimentConfig, load_config, parse_config_text, serialize_config
from .corpus import (
    EmbeddingStore,
    SampleKey,
    SyntheticCorpusSpec,
    SyntheticGroupSpec,
    default_synthetic_spec,
    generate_synthetic,
    load_store,
    sample_display,
    write_store,
)
from .errors import (
    ConfigError,
    ContractError,
    DataError,
    DegenerateBaselineError,
    FergridError,
    FormatError,
    IncompleteStoreError,
    IoError,
    NumericError,
    RangeError,
)
from .labels import (
    EXPRESSION_NAMES,
    N_CLASSES,
    NEGATIVE,
    POSITIVE,
    CultureGroup,
    Expression,
    expression_from_name,
)
from .lattice import Occupancy, Torus, free_adjacent, moore_neighbors
from .metrics import BlockMetrics, degradation_table, ece, macro_f1
from .reporting import generate_report
from .runner import RunOutput, build_cohort, open_store, run_experiment
from .schedule import Block, BlurSchedule

__version__ = "0.1.0"

__all__ = [
    "AdapterParams",
    "Agent",
    "Block",
    "BlockMetrics",
    "BlurSchedule",
    "ConfigError",
    "ContractError",
    "CultureGroup",
    "DataError",
    "DegenerateBaselineError",
    "EmbeddingStore",
    "ExperimentConfig",
    "Expression",
    "EXPRESSION_NAMES",
    "FergridError",
    "FormatError",
    "IncompleteStoreError",
    "IoError",
    "MoveIntent",
    "N_CLASSES",
    "NEGATIVE",
    "NumericError",
    "Occupancy",
    "OptimizerState",
    "PerceptionEvent",
    "POSITIVE",
    "Prediction",
    "RangeError",
    "RunOutput",
    "SampleKey",
    "SyntheticCorpusSpec",
    "SyntheticGroupSpec",
    "Torus",
    "TrainingConfig",
    "adamw_step",
    "build_cohort",
    "default_synthetic_spec",
    "degradation_table",
    "ece",
    "expression_from_name",
    "forward",
    "free_adjacent",
    "generate_report",
    "generate_synthetic",
    "init_params",
    "load_config",
    "load_store",
    "loss_and_grad",
    "macro_f1",
    "moore_neighbors",
    "open_store",
    "parse_config_text",
    "predict",
    "run_experiment",
    "sample_display",
    "serialize_config",
    "train_step",
    "write_store",
]
