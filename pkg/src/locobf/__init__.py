"""Location obfuscation mechanisms with brute-force privacy audits.

The package builds row-stochastic reporting matrices over a finite grid of
locations (a per-location searched-set scheme plus two corrected variants),
measures them against a Bayesian adversary, and certifies or refutes their
differential-privacy claims by exhaustive ratio checks.
"""

from .audit import (
    AuditReport,
    check_cross_pls,
    check_dp_on_set,
    check_geo_indist,
    circle_sets,
    find_observation1,
)
from .datasets import bundled_regions_path, load_bundled_example
from .domain import (
    Location,
    LocationDomain,
    PriorDistribution,
    distance,
    domain_from_json,
    domain_to_json,
    load_domain,
    random_prior,
    save_domain,
)
from .harness import ExperimentConfig, demo_violations, run_sweep, run_table1
from .hilbert import RankTable, hilbert_inverse, hilbert_value, rank_domain
from .mechanisms import (
    ObfuscationMatrix,
    PersonalizedSensitivityMechanism,
    PiveMechanism,
    SchemeConfig,
    UniformSensitivityMechanism,
    build_personalized_matrix,
    build_pive_matrix,
    build_uniform_matrix,
    sample_pseudo,
    save_matrix,
    search_all,
)
from .metrics import (
    MetricsReport,
    PosteriorRow,
    dop_er,
    expected_error,
    metrics_report,
    optimal_attack,
    piv_er,
    posterior,
    quality_loss,
    violation_mass,
    write_metrics_csv,
)
from .pls import (
    DomainPartition,
    InfeasiblePartitionError,
    NoFeasibleSetError,
    ProtectionLocationSet,
    SearchParams,
    e_prime_score,
    e_score,
    make_pls,
    partition_domain,
    pive_search,
)

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "DomainPartition",
    "ExperimentConfig",
    "InfeasiblePartitionError",
    "Location",
    "LocationDomain",
    "MetricsReport",
    "NoFeasibleSetError",
    "ObfuscationMatrix",
    "PersonalizedSensitivityMechanism",
    "PiveMechanism",
    "PosteriorRow",
    "PriorDistribution",
    "ProtectionLocationSet",
    "RankTable",
    "SchemeConfig",
    "SearchParams",
    "UniformSensitivityMechanism",
    "bundled_regions_path",
    "build_personalized_matrix",
    "build_pive_matrix",
    "build_uniform_matrix",
    "check_cross_pls",
    "check_dp_on_set",
    "check_geo_indist",
    "circle_sets",
    "demo_violations",
    "distance",
    "domain_from_json",
    "domain_to_json",
    "dop_er",
    "e_prime_score",
    "e_score",
    "expected_error",
    "find_observation1",
    "hilbert_inverse",
    "hilbert_value",
    "load_bundled_example",
    "load_domain",
    "make_pls",
    "metrics_report",
    "optimal_attack",
    "partition_domain",
    "piv_er",
    "pive_search",
    "posterior",
    "quality_loss",
    "random_prior",
    "rank_domain",
    "run_sweep",
    "run_table1",
    "sample_pseudo",
    "save_matrix",
    "save_domain",
    "search_all",
    "violation_mass",
    "write_metrics_csv",
]
