"""Safe bandit-feedback optimization with constraint-set sharpness geometry.

The package splits into polytope geometry (shrunk sets, maximum shrinkage,
sharpness, condition constants), online confidence-set estimation,
conservative safe-set predicates, the two-phase policy, the trial
simulator, and a campaign runner with a CLI.
"""

from .campaign import (CampaignConfig, build_eb_safety, geometry_report,
                       run_campaign, smoke_config)
from .errors import SafeBanditError
from .estimation import (ConfidenceParams, ConfidenceState, beta_sqrt_value,
                         contains, l1_vertices, min_eigenvalue, update,
                         weighted_norm)
from .geometry import (L1, L2, LINF, Norm, Polytope, Vertex,
                       condition_constant, diameter, is_bounded, is_empty,
                       load_polytope, max_shrinkage, project, save_polytope,
                       sharpness, sharpness_curve, shrink, vertices)
from .policy import (CandidateGrid, ExplorationSampler, OptimisticChoice,
                     Schedule, fit_exploration_sampler, refine_candidates,
                     schedule, select_optimistic)
from .safesets import ActionBox, in_G0, in_Gt, safety_margin
from .simulator import (PolicyConfig, ProblemInstance, RegretBound, TrialLog,
                        optimal_action, run_trial, step_environment,
                        theoretical_bound)

__version__ = "0.1.0"
