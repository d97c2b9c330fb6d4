"""Structural parameters of an MDP: value-function variation, action
variation, discordant state-action pairs, and the horizon-sensitive and
empirical refinements restricted to those pairs.

The max over an empty discordant set is 0 throughout: when the two policies
coincide there is no transition divergence to measure, and 0 is the value
under which the downstream bias/variance bounds vanish as they should.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mdp import DeterministicPolicy, TabularMDP, evaluate_policy, optimal_policy


@dataclass(frozen=True)
class DiscordantPairs:
    """State-action pairs (s, policy_b(s)) at states where two policies
    disagree."""

    pairs: frozenset

    def __len__(self) -> int:
        return len(self.pairs)

    def states(self) -> list:
        return sorted(s for s, _ in self.pairs)


def discordant_pairs(
    policy_a: DeterministicPolicy, policy_b: DeterministicPolicy
) -> DiscordantPairs:
    if len(policy_a) != len(policy_b):
        raise ValueError(
            f"policy lengths differ: {len(policy_a)} vs {len(policy_b)}"
        )
    disagree = np.flatnonzero(policy_a.actions != policy_b.actions)
    return DiscordantPairs(
        pairs=frozenset((int(s), int(policy_b.actions[s])) for s in disagree)
    )


def value_function_variation(mdp: TabularMDP, gamma: float) -> float:
    """Largest spread of optimal state values at discount gamma."""
    _, values = optimal_policy(mdp, gamma)
    return float(values.max() - values.min())


def action_variation(mdp: TabularMDP) -> float:
    """Largest L1 distance between two actions' transition rows at any state."""
    best = 0.0
    for a in range(mdp.n_actions):
        for b in range(a + 1, mdp.n_actions):
            diff = np.abs(mdp.transitions[:, a] - mdp.transitions[:, b]).sum(axis=1)
            best = max(best, float(diff.max()))
    return best


def _max_row_divergence(
    mdp: TabularMDP, policy: DeterministicPolicy, pairs: DiscordantPairs
) -> float:
    """Max L1 distance between the policy's transition row and the row of the
    discordant action, over the discordant pairs; 0 on the empty set."""
    best = 0.0
    for s, a in pairs.pairs:
        row_pi = mdp.transitions[s, policy.actions[s]]
        best = max(best, float(np.abs(row_pi - mdp.transitions[s, a]).sum()))
    return best


def horizon_sensitive_action_variation(
    mdp: TabularMDP, gamma: float, gamma_bw: float
) -> float:
    """Action variation restricted to states where the shallow-horizon optimal
    policy disagrees with the Blackwell-horizon one."""
    if gamma > gamma_bw:
        raise ValueError("gamma must not exceed gamma_bw")
    pi_shallow, _ = optimal_policy(mdp, gamma)
    pi_bw, _ = optimal_policy(mdp, gamma_bw)
    return _max_row_divergence(mdp, pi_shallow, discordant_pairs(pi_shallow, pi_bw))


def empirical_action_variation(
    mdp: TabularMDP, mdp_hat: TabularMDP, gamma: float
) -> float:
    """Action variation restricted to states where planning on the approximate
    model changes the optimal action; rows are taken from the true model."""
    if mdp_hat.transitions.shape != mdp.transitions.shape:
        raise ValueError("mdp and mdp_hat have different shapes")
    pi_true, _ = optimal_policy(mdp, gamma)
    pi_hat, _ = optimal_policy(mdp_hat, gamma)
    return _max_row_divergence(mdp, pi_true, discordant_pairs(pi_true, pi_hat))


def model_approx_variance(
    mdp: TabularMDP, mdp_hat: TabularMDP, gamma: float
) -> float:
    """Max value gap from planning on the approximate model, both policies
    evaluated on the true MDP at gamma."""
    if mdp_hat.transitions.shape != mdp.transitions.shape:
        raise ValueError("mdp and mdp_hat have different shapes")
    pi_true, v_true = optimal_policy(mdp, gamma)
    pi_hat, _ = optimal_policy(mdp_hat, gamma)
    v_hat = evaluate_policy(mdp, pi_hat, gamma)
    return float(np.max(np.abs(v_true - v_hat)))


def k_step_distance(
    mdp: TabularMDP,
    policy_a: DeterministicPolicy,
    policy_b: DeterministicPolicy,
    state: int,
    k: int,
) -> float:
    """L1 distance between the k-step transition rows of two policies from a
    given state."""
    if k < 1:
        raise ValueError("k must be >= 1")
    P_a, _ = mdp.policy_matrices(policy_a)
    P_b, _ = mdp.policy_matrices(policy_b)
    row_a = P_a[state].copy()
    row_b = P_b[state].copy()
    for _ in range(k - 1):
        row_a = row_a @ P_a
        row_b = row_b @ P_b
    return float(np.abs(row_a - row_b).sum())


@dataclass(frozen=True)
class StructuralReport:
    """All structural parameters of one (M, M_hat, gamma) configuration."""

    kappa: float
    delta: float
    delta_gamma: float
    delta_hat: float
    epsilon_hat: float
    gamma_bw: float
    gamma: float

    def to_json_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "delta": self.delta,
            "delta_gamma": self.delta_gamma,
            "delta_hat": self.delta_hat,
            "epsilon_hat": self.epsilon_hat,
            "gamma_bw": self.gamma_bw,
            "gamma": self.gamma,
        }


def compute_structural_report(
    mdp: TabularMDP, mdp_hat: TabularMDP, gamma: float, gamma_bw: float
) -> StructuralReport:
    """Compute every structural parameter for one configuration.

    When gamma exceeds the detected Blackwell discount (possible because the
    scan is a grid approximation), the horizon-sensitive variation compares
    the policy against itself and is exactly 0.
    """
    horizon = max(gamma, gamma_bw)
    report = StructuralReport(
        kappa=value_function_variation(mdp, gamma),
        delta=action_variation(mdp),
        delta_gamma=horizon_sensitive_action_variation(mdp, gamma, horizon),
        delta_hat=empirical_action_variation(mdp, mdp_hat, gamma),
        epsilon_hat=model_approx_variance(mdp, mdp_hat, gamma),
        gamma_bw=gamma_bw,
        gamma=gamma,
    )
    assert report.delta_gamma <= report.delta + 1e-12
    assert report.delta_hat <= report.delta + 1e-12
    assert report.kappa <= mdp.r_max / (1.0 - gamma) + 1e-9
    return report
