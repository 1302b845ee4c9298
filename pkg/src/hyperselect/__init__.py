"""Rule-based selection hyper-heuristics with explicit feature transforms and kernel distances."""

from .core import DomainAdapter, Rule, Selector, SolveOutcome, run_heuristic, select_action, solve_instance, synthetic_oracle
from .errors import ConfigError, DomainError, InvalidInputError, ParseError
from .ga import GAConfig, train
from .kernels import KernelSpec, default_gamma, kernel_distance_sq, kernel_eval
from .transforms import TransformSpec, fit_bounds

__all__ = [
    "ConfigError", "DomainAdapter", "DomainError", "GAConfig", "InvalidInputError", "KernelSpec", "ParseError",
    "Rule", "Selector", "SolveOutcome", "TransformSpec", "default_gamma", "fit_bounds", "kernel_distance_sq",
    "kernel_eval", "run_heuristic", "select_action", "solve_instance", "synthetic_oracle", "train",
]
