"""Posterior inference on finite-alphabet dynamical systems.

Library for generalized Bayesian posteriors weighted by integrated path
losses: exact partition-function recursions, relative entropy rates,
pressure and Gibbs measures of finite-range potentials, the depth-m
variational characterization of the posterior rate functional, and
hypermixing coefficient profiles, together with samplers and a
config-driven CLI for desk-scale consistency experiments.
"""

__version__ = "0.1.0"

from .core import (
    Alphabet,
    BlockMeasure,
    MarkovMeasure,
    PathSample,
    block_marginal,
    empirical_block_measure,
    markov_from_json,
    markov_to_json,
    stationary_distribution,
)
from .entropy import (
    DriftPair,
    EntropyRateResult,
    entropy_rate_diffusion_mc,
    entropy_rate_gibbs,
    entropy_rate_iid,
    entropy_rate_markov,
    entropy_rate_vs_uniform_product,
    finite_horizon_entropy_curve,
    ks_entropy,
    relative_entropy,
    shannon_entropy,
)
from .errors import (
    ConfigError,
    DepthTooSmall,
    Diverged,
    EmptyFamily,
    EmptyNeighborhood,
    Infeasible,
    InsufficientLength,
    InsufficientSamples,
    InvalidParameter,
    LdbayesError,
    NonErgodic,
    RangeViolation,
    ShapeMismatch,
    SolverStall,
    TooLarge,
)
from .gibbs import (
    FiniteRangePotential,
    GibbsModel,
    build_gibbs_model,
    check_exponential_tilting,
    gibbs_markov_measure,
    potential_from_json,
    potential_to_json,
    pressure,
    uniform_family_constants,
    verify_gibbs_property,
)
from .hypermix import (
    HypermixingProfile,
    LogSobolevSpec,
    check_regular_family,
    check_two_state_correlation_bound,
    cls_locally_nonconvex,
    cls_strongly_convex,
    hypermixing_profile,
)
from .posterior import (
    LossSpec,
    PosteriorResult,
    ThetaGrid,
    check_loss_assumption,
    consistency_curve,
    integrated_loss,
    log_partition_curve,
    log_partition_dp,
    log_partition_mc,
    posterior_over_grid,
    theta_neighborhood,
    write_posterior_csv,
)
from .simulate import (
    LangevinSpec,
    ObservedSystemSpec,
    generate_observation,
    rng_from_seed,
    sample_gibbs,
    sample_langevin,
    sample_markov,
)
from .variational import (
    DepthProfile,
    JoiningBlockMeasure,
    VariationalResult,
    compare_dp_vs_variational,
    depth_profile,
    fibre_entropy_block,
    joining_objective,
    solve_V,
    theta_min,
    write_variational_csv,
)

__all__ = [
    "Alphabet",
    "BlockMeasure",
    "MarkovMeasure",
    "PathSample",
    "block_marginal",
    "empirical_block_measure",
    "markov_from_json",
    "markov_to_json",
    "stationary_distribution",
    "DriftPair",
    "EntropyRateResult",
    "entropy_rate_diffusion_mc",
    "entropy_rate_gibbs",
    "entropy_rate_iid",
    "entropy_rate_markov",
    "entropy_rate_vs_uniform_product",
    "finite_horizon_entropy_curve",
    "ks_entropy",
    "relative_entropy",
    "shannon_entropy",
    "ConfigError",
    "DepthTooSmall",
    "Diverged",
    "EmptyFamily",
    "EmptyNeighborhood",
    "Infeasible",
    "InsufficientLength",
    "InsufficientSamples",
    "InvalidParameter",
    "LdbayesError",
    "NonErgodic",
    "RangeViolation",
    "ShapeMismatch",
    "SolverStall",
    "TooLarge",
    "FiniteRangePotential",
    "GibbsModel",
    "build_gibbs_model",
    "check_exponential_tilting",
    "gibbs_markov_measure",
    "potential_from_json",
    "potential_to_json",
    "pressure",
    "uniform_family_constants",
    "verify_gibbs_property",
    "HypermixingProfile",
    "LogSobolevSpec",
    "check_regular_family",
    "check_two_state_correlation_bound",
    "cls_locally_nonconvex",
    "cls_strongly_convex",
    "hypermixing_profile",
    "LossSpec",
    "PosteriorResult",
    "ThetaGrid",
    "check_loss_assumption",
    "consistency_curve",
    "integrated_loss",
    "log_partition_curve",
    "log_partition_dp",
    "log_partition_mc",
    "posterior_over_grid",
    "theta_neighborhood",
    "write_posterior_csv",
    "LangevinSpec",
    "ObservedSystemSpec",
    "generate_observation",
    "rng_from_seed",
    "sample_gibbs",
    "sample_langevin",
    "sample_markov",
    "DepthProfile",
    "JoiningBlockMeasure",
    "VariationalResult",
    "compare_dp_vs_variational",
    "depth_profile",
    "fibre_entropy_block",
    "joining_objective",
    "solve_V",
    "theta_min",
    "write_variational_csv",
]
