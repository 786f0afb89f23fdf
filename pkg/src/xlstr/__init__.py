"""Cross-lingual semantic textual relatedness: donor selection, data assembly,
augmentation, romanization, a lexical scorer and Spearman evaluation."""

from .corpus import AssemblyStrategy, Dataset, Split, STRInstance, StrategyKind, TrainSet, assemble, select_sources
from .evaluation import EvalReport, report_table, spearman
from .experiment import ExperimentConfig, run_experiment, run_suite
from .langsim import FeatureKind, SimilarityMatrix, load_similarity_matrix, nearest_sources
from .scorer import ScorerParams, TrainConfig, extract_features, predict, train

__version__ = "0.1.0"

__all__ = [
    "AssemblyStrategy", "Dataset", "EvalReport", "ExperimentConfig", "FeatureKind",
    "STRInstance", "ScorerParams", "SimilarityMatrix", "Split", "StrategyKind", "TrainConfig",
    "TrainSet", "assemble", "extract_features", "load_similarity_matrix", "nearest_sources",
    "predict", "report_table", "run_experiment", "run_suite", "select_sources", "spearman", "train",
]
