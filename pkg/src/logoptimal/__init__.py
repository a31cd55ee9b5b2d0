"""Log-optimal portfolios, regret and information divergence on finite markets."""

from .divergence import (
    action_regret,
    bregman_identity_residual,
    cover_gap,
    distribution_regret,
    kl_divergence,
)
from .dominance import (
    PruneResult,
    basis_domination_witness,
    basis_dominance_matrix,
    domination_margin,
    dominates,
    prune,
    strictly_dominates,
)
from .errors import ConvergenceError, EmbeddingError, IndeterminateError, InfeasibleError, MarketError
from .gambling import (
    Embedding,
    Fairness,
    IProjection,
    classify_fairness,
    dutch_book,
    embed_ideal,
    is_kelly_market,
    reverse_iprojection,
)
from .logopt import OptimalFace, PortfolioConstraints, SolveReport, Uniqueness, kkt_residual, optimal_face, solve
from .market import (
    NEG_INFINITY,
    POS_INFINITY,
    Market,
    as_distribution,
    as_portfolio,
    deduplicate_outcomes,
    empirical_distribution,
    growth_rate,
    wealth_trajectory,
)
from .minimax import MinimaxReport, lower_bound_check, minimax_regret, saddle_check
from .sufficiency import (
    ProportionalityVerdict,
    characterization_crosscheck,
    injectivity_test,
    proportionality_test,
)

__version__ = "0.1.0"
