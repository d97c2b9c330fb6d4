"""Tabular MDP/POMDP laboratory for discount-factor selection.

Exact solvers for finite MDPs, Blackwell discount-factor detection,
structural parameters with their bias/variance/planning-loss bounds,
state-abstraction analysis, and seeded experiment campaigns.
"""

from .mdp import (
    DeterministicPolicy,
    DiscountGrid,
    SchemaError,
    TabularMDP,
    blackwell_gamma,
    evaluate_policy,
    load_mdp,
    optimal_policy,
    save_mdp,
    scan_optimal_policies,
)
from .modelgen import (
    EmpiricalModel,
    FixedSpec,
    generate_fixed,
    sample_empirical_model,
)
from .structure import (
    DiscordantPairs,
    StructuralReport,
    action_variation,
    compute_structural_report,
    discordant_pairs,
    empirical_action_variation,
    horizon_sensitive_action_variation,
    k_step_distance,
    model_approx_variance,
    value_function_variation,
)
from .bounds import (
    BoundReport,
    bias_bound_ext,
    bias_bound_prior,
    compute_bound_report,
    condition_holds,
    measured_bias,
    measured_planning_loss,
    measured_variance,
    normalized_bias,
    planning_loss_bound,
    prior_planning_loss_bound,
    variance_bound,
)
from .abstraction import (
    AbstractionReport,
    ObservationMap,
    abstract_mdp,
    beliefs,
    belief_l1_diameter,
    delta_eps_phi,
    identity_observation_map,
    lifted_policy,
    load_observation_map,
    normalized_params,
    observation_value_variation,
    pomdp_structural_params,
    random_observation_map,
    save_observation_map,
    theorem2_check,
)
from .campaign import (
    CampaignConfig,
    CampaignInvariantError,
    SCHEMAS,
    run_campaign,
    run_fig1,
    run_fig2,
    run_fig3,
    run_single,
)

__version__ = "0.1.0"
