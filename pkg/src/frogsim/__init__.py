"""Frog model on Z with random geometric lifetimes, and firework rumor processes."""

__version__ = "0.1.0"

from .analysis import (
    CriterionReport, PhaseCell, alpha0, criterion_check, phase_diagram, scaled_tail_curve,
    theorem_tag,
)
from .displacement import (
    EngineKind, ParticleReach, UnboundedReach, joint_cdf, sample_d_right, sample_d_star_upper,
    sample_joint_reach, simulate_walk_reach, tail_d_right, tail_d_right_beta, tail_d_star,
    tail_ratio,
)
from .frog import (
    ClosureResult, FrogConfig, SurvivalEstimate, closure_bfs_oracle, estimate_survival,
    recurrence_profile, run_frog_closure, run_replications, wilson_interval,
)
from .laws import (
    Bernoulli, Beta, Constant, GeometricNumber, PointMass, Poisson, mean_occupancy,
    parse_occupancy, parse_pi_law, pgf_occupancy, sample_occupancy, sample_pi,
)
from .rng import SeedSpec
from .rumor import (
    Analytic, BernoulliRadius, EmpiricalSampler, GeometricTail, PowerLawTail, coupling_audit,
    fw_reach_probability_dp, radius_cdf_from_occupancy, run_bfw, run_bfw_star, run_firework,
    series_criterion,
)
from .special import DomainError, beta_function, log_beta
