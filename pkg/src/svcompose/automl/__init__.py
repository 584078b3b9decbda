"""Toy AutoML pipeline-composition domain: datasets, servicified learners,
the pipeline template, the 0-1-loss objective, and the end-to-end runner."""

from .data import Dataset, DatasetError, SplitSpec, load_dataset, split_indices, stratified_split
from .domain import EmptyPortfolio, build_service_domain, query_input_values
from .learners import build_registry
from .objective import ObjectiveReport, make_benchmark_objective
from .runner import ConfigError, RunConfig, RunOutcome, run_automl_search

__all__ = [
    "Dataset",
    "DatasetError",
    "SplitSpec",
    "load_dataset",
    "split_indices",
    "stratified_split",
    "EmptyPortfolio",
    "build_service_domain",
    "query_input_values",
    "build_registry",
    "ObjectiveReport",
    "make_benchmark_objective",
    "ConfigError",
    "RunConfig",
    "RunOutcome",
    "run_automl_search",
]
