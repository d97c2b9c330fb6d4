"""Bias, variance, and planning-loss bounds, the measured quantities they
dominate, and the tightness condition comparing the structural bound against
the prior planning-loss bound.

All measured quantities evaluate policies on the true MDP at the Blackwell
horizon; the bound formulas take the structural parameters as plain floats so
they can be checked independently of any MDP.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .mdp import TabularMDP, evaluate_policy, optimal_policy
from .structure import (
    compute_structural_report,
    StructuralReport,
)

CONDITION_DENOMINATORS = ("paper", "consistent")


def _check_horizons(gamma: float, gamma_bw: float) -> None:
    if not (0.0 <= gamma < 1.0):
        raise ValueError(f"gamma must lie in [0, 1), got {gamma!r}")
    if not (0.0 <= gamma_bw < 1.0):
        raise ValueError(f"gamma_bw must lie in [0, 1), got {gamma_bw!r}")
    if gamma > gamma_bw:
        raise ValueError("gamma must not exceed gamma_bw")


def _check_params(**params: float) -> None:
    for name, value in params.items():
        if value < 0:
            raise ValueError(f"{name} must be non-negative, got {value!r}")
        if name.startswith("delta") and value > 2.0 + 1e-9:
            raise ValueError(f"{name} must lie in [0, 2], got {value!r}")


def _divergence_term(x: float, gamma_bw: float) -> float:
    """(x/2) / (1 - gamma_bw * (1 - x/2)) -- the geometric-series factor a
    transition divergence of x contributes at horizon gamma_bw."""
    return (x / 2.0) / (1.0 - gamma_bw * (1.0 - x / 2.0))


# --- measured quantities ----------------------------------------------------


def measured_bias(mdp: TabularMDP, gamma: float, gamma_bw: float) -> float:
    """Sup-norm value loss at the Blackwell horizon from planning with the
    shallow discount instead."""
    _check_horizons(gamma, gamma_bw)
    pi_bw, _ = optimal_policy(mdp, gamma_bw)
    pi_shallow, _ = optimal_policy(mdp, gamma)
    v_bw = evaluate_policy(mdp, pi_bw, gamma_bw)
    v_shallow = evaluate_policy(mdp, pi_shallow, gamma_bw)
    return float(np.max(np.abs(v_bw - v_shallow)))


def measured_variance(
    mdp: TabularMDP, mdp_hat: TabularMDP, gamma: float, gamma_bw: float
) -> float:
    """Sup-norm gap, at the Blackwell horizon on the true MDP, between the
    shallow policies planned on the true and the approximate model."""
    _check_horizons(gamma, gamma_bw)
    if mdp_hat.transitions.shape != mdp.transitions.shape:
        raise ValueError("mdp and mdp_hat have different shapes")
    pi_true, _ = optimal_policy(mdp, gamma)
    pi_hat, _ = optimal_policy(mdp_hat, gamma)
    v_true = evaluate_policy(mdp, pi_true, gamma_bw)
    v_hat = evaluate_policy(mdp, pi_hat, gamma_bw)
    return float(np.max(np.abs(v_true - v_hat)))


def measured_planning_loss(
    mdp: TabularMDP, mdp_hat: TabularMDP, gamma: float, gamma_bw: float
) -> float:
    """Sup-norm gap between the Blackwell-optimal policy and the policy
    planned on the approximate model at the shallow discount, both evaluated
    on the true MDP at the Blackwell horizon."""
    _check_horizons(gamma, gamma_bw)
    if mdp_hat.transitions.shape != mdp.transitions.shape:
        raise ValueError("mdp and mdp_hat have different shapes")
    pi_bw, _ = optimal_policy(mdp, gamma_bw)
    pi_hat, _ = optimal_policy(mdp_hat, gamma)
    v_bw = evaluate_policy(mdp, pi_bw, gamma_bw)
    v_hat = evaluate_policy(mdp, pi_hat, gamma_bw)
    return float(np.max(np.abs(v_bw - v_hat)))


def normalized_bias(mdp: TabularMDP, gamma: float, gamma_bw: float) -> float:
    """Measured bias per state divided by the optimal value of that state,
    maximized over states with non-negligible optimal value.

    States whose optimal value is below 1e-12 are skipped rather than
    clamped; if every state is skipped the result is 0 with a warning.
    """
    _check_horizons(gamma, gamma_bw)
    pi_bw, _ = optimal_policy(mdp, gamma_bw)
    pi_shallow, _ = optimal_policy(mdp, gamma)
    v_bw = evaluate_policy(mdp, pi_bw, gamma_bw)
    v_shallow = evaluate_policy(mdp, pi_shallow, gamma_bw)
    keep = v_bw > 1e-12
    if not np.any(keep):
        warnings.warn(
            "normalized_bias: all states have near-zero optimal value; returning 0"
        )
        return 0.0
    return float(np.max((v_bw[keep] - v_shallow[keep]) / v_bw[keep]))


# --- bound formulas ---------------------------------------------------------


def bias_bound_prior(
    kappa: float, delta: float, gamma: float, gamma_bw: float
) -> float:
    """Bias bound using the unrestricted action variation."""
    _check_horizons(gamma, gamma_bw)
    _check_params(kappa=kappa, delta=delta)
    return (delta / 2.0 * kappa * (gamma_bw - gamma)) / (
        (1.0 - gamma_bw) * (1.0 - gamma_bw * (1.0 - delta / 2.0))
    )


def bias_bound_ext(
    kappa: float, delta_gamma: float, gamma: float, gamma_bw: float
) -> float:
    """Tighter bias bound using the horizon-sensitive action variation."""
    return bias_bound_prior(kappa, delta_gamma, gamma, gamma_bw)


def variance_bound(
    epsilon_hat: float,
    kappa: float,
    delta_hat: float,
    gamma: float,
    gamma_bw: float,
) -> float:
    """Variance bound from the model-approximation gap and the empirical
    action variation."""
    _check_horizons(gamma, gamma_bw)
    _check_params(epsilon_hat=epsilon_hat, kappa=kappa, delta_hat=delta_hat)
    return epsilon_hat * (1.0 - gamma) / (1.0 - gamma_bw) + (
        delta_hat / 2.0 * kappa * (gamma_bw - gamma)
    ) / ((1.0 - gamma_bw) * (1.0 - gamma_bw * (1.0 - delta_hat / 2.0)))


def planning_loss_bound(
    kappa: float,
    delta_gamma: float,
    delta_hat: float,
    epsilon_hat: float,
    gamma: float,
    gamma_bw: float,
) -> float:
    """Planning-loss bound; algebraically equal to the sum of the extended
    bias bound and the variance bound."""
    _check_horizons(gamma, gamma_bw)
    _check_params(
        kappa=kappa,
        delta_gamma=delta_gamma,
        delta_hat=delta_hat,
        epsilon_hat=epsilon_hat,
    )
    return kappa * ((gamma_bw - gamma) / (1.0 - gamma_bw)) * (
        _divergence_term(delta_gamma, gamma_bw)
        + _divergence_term(delta_hat, gamma_bw)
    ) + epsilon_hat * (1.0 - gamma) / (1.0 - gamma_bw)


def prior_planning_loss_bound(
    r_max: float, epsilon_hat: float, gamma: float, gamma_bw: float
) -> float:
    """Planning-loss bound that ignores MDP structure."""
    _check_horizons(gamma, gamma_bw)
    _check_params(r_max=r_max, epsilon_hat=epsilon_hat)
    return (gamma_bw - gamma) / ((1.0 - gamma_bw) * (1.0 - gamma)) * r_max + epsilon_hat


def condition_holds(
    r_max: float,
    kappa: float,
    delta_gamma: float,
    delta_hat: float,
    epsilon_hat: float,
    gamma: float,
    gamma_bw: float,
    denominator: str = "paper",
) -> bool:
    """Whether the model approximation is good enough for the structural
    planning-loss bound to beat the prior one.

    denominator="paper" keeps the published form of the last denominator,
    1 - gamma_bw * (1 - delta_hat); "consistent" uses the halved divergence
    1 - gamma_bw * (1 - delta_hat / 2) matching the variance bound, which
    makes the condition exactly equivalent to comparing the two bounds.
    """
    if denominator not in CONDITION_DENOMINATORS:
        raise ValueError(f"denominator must be one of {CONDITION_DENOMINATORS}")
    _check_horizons(gamma, gamma_bw)
    _check_params(
        r_max=r_max,
        kappa=kappa,
        delta_gamma=delta_gamma,
        delta_hat=delta_hat,
        epsilon_hat=epsilon_hat,
    )
    if denominator == "paper":
        hat_term = (delta_hat / 2.0) / (1.0 - gamma_bw * (1.0 - delta_hat))
    else:
        hat_term = _divergence_term(delta_hat, gamma_bw)
    threshold = r_max / (1.0 - gamma) - kappa * (
        _divergence_term(delta_gamma, gamma_bw) + hat_term
    )
    return bool(epsilon_hat <= threshold)


# --- report -----------------------------------------------------------------

BOUND_REPORT_FIELDS = (
    "gamma",
    "gamma_bw",
    "measured_bias",
    "bias_bound_prior",
    "bias_bound_ext",
    "measured_variance",
    "variance_bound",
    "measured_planning_loss",
    "planning_loss_bound",
    "prior_planning_loss_bound",
    "condition_holds",
)


@dataclass(frozen=True)
class BoundReport:
    """Measured bias/variance/planning loss with every bound value and the
    tightness-condition flag for one (M, M_hat, gamma) configuration."""

    gamma: float
    gamma_bw: float
    measured_bias: float
    bias_bound_prior: float
    bias_bound_ext: float
    measured_variance: float
    variance_bound: float
    measured_planning_loss: float
    planning_loss_bound: float
    prior_planning_loss_bound: float
    condition_holds: bool

    def to_json_dict(self) -> dict:
        return {name: getattr(self, name) for name in BOUND_REPORT_FIELDS}

    def domination_violations(self, tol: float = 1e-9) -> list:
        """Names of any violated domination inequalities (empty when sound)."""
        checks = (
            ("measured_bias <= bias_bound_ext", self.measured_bias, self.bias_bound_ext),
            ("bias_bound_ext <= bias_bound_prior", self.bias_bound_ext, self.bias_bound_prior),
            ("measured_variance <= variance_bound", self.measured_variance, self.variance_bound),
            (
                "measured_planning_loss <= measured_bias + measured_variance",
                self.measured_planning_loss,
                self.measured_bias + self.measured_variance,
            ),
            (
                "measured_planning_loss <= planning_loss_bound",
                self.measured_planning_loss,
                self.planning_loss_bound,
            ),
        )
        return [name for name, lhs, rhs in checks if lhs > rhs + tol]


def compute_bound_report(
    mdp: TabularMDP,
    mdp_hat: TabularMDP,
    gamma: float,
    gamma_bw: float,
    condition_denominator: str = "paper",
    structural: StructuralReport | None = None,
):
    """Build the full bound report for one configuration.

    The evaluation horizon is max(gamma, gamma_bw): the detected Blackwell
    discount is a grid value, so a campaign gamma may exceed it, in which
    case planning at gamma is already Blackwell-optimal and every inequality
    holds with equality. The report's gamma_bw field records the horizon
    actually used.
    """
    horizon = max(gamma, gamma_bw)
    if structural is None:
        structural = compute_structural_report(mdp, mdp_hat, gamma, gamma_bw)
    report = BoundReport(
        gamma=gamma,
        gamma_bw=horizon,
        measured_bias=measured_bias(mdp, gamma, horizon),
        bias_bound_prior=bias_bound_prior(structural.kappa, structural.delta, gamma, horizon),
        bias_bound_ext=bias_bound_ext(structural.kappa, structural.delta_gamma, gamma, horizon),
        measured_variance=measured_variance(mdp, mdp_hat, gamma, horizon),
        variance_bound=variance_bound(
            structural.epsilon_hat, structural.kappa, structural.delta_hat, gamma, horizon
        ),
        measured_planning_loss=measured_planning_loss(mdp, mdp_hat, gamma, horizon),
        planning_loss_bound=planning_loss_bound(
            structural.kappa,
            structural.delta_gamma,
            structural.delta_hat,
            structural.epsilon_hat,
            gamma,
            horizon,
        ),
        prior_planning_loss_bound=prior_planning_loss_bound(
            mdp.r_max, structural.epsilon_hat, gamma, horizon
        ),
        condition_holds=condition_holds(
            mdp.r_max,
            structural.kappa,
            structural.delta_gamma,
            structural.delta_hat,
            structural.epsilon_hat,
            gamma,
            horizon,
            denominator=condition_denominator,
        ),
    )
    return report
