"""Problem domains and the helpers that load their instance files."""

from pathlib import Path

from ..core import DomainAdapter
from ..errors import ConfigError
from .csp import CSP_FEATURES, CspDomain, load_csp_instances
from .knapsack import KnapsackDomain, load_knapsack_instances
from .partition import PartitionDomain, load_partition_instances

DOMAINS = ("csp", "csp2", "knapsack", "partition")


def get_domain(name: str) -> DomainAdapter:
    """``csp2`` is the CSP domain restricted to the two features p1 and p2."""
    if name == "csp":
        return CspDomain(CSP_FEATURES)
    if name == "csp2":
        return CspDomain(("p1", "p2"))
    if name == "knapsack":
        return KnapsackDomain()
    if name == "partition":
        return PartitionDomain()
    raise ConfigError(f"unknown domain {name!r}; choose one of {', '.join(DOMAINS)}")


def load_instances(domain: str, path: str | Path) -> list:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"instance path does not exist: {path}")
    if domain in ("csp", "csp2"):
        return load_csp_instances(path)
    if domain == "knapsack":
        return load_knapsack_instances(path)
    if domain == "partition":
        return load_partition_instances(path)
    raise ConfigError(f"unknown domain {domain!r}")
