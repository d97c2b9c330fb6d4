import numpy as np
import pytest

from shallow_plan_lab import (
    DiscountGrid,
    FixedSpec,
    TabularMDP,
    bias_bound_ext,
    bias_bound_prior,
    blackwell_gamma,
    compute_bound_report,
    condition_holds,
    generate_fixed,
    measured_bias,
    measured_planning_loss,
    measured_variance,
    normalized_bias,
    planning_loss_bound,
    prior_planning_loss_bound,
    sample_empirical_model,
    variance_bound,
)
from conftest import make_mdp


# --- formula hand checks -------------------------------------------------------


def test_bias_bound_hand_values():
    assert bias_bound_prior(1.0, 2.0, 0.5, 0.9) == pytest.approx(4.0, abs=1e-12)
    assert bias_bound_prior(1.0, 0.0, 0.5, 0.9) == 0.0
    assert bias_bound_prior(1.0, 2.0, 0.9, 0.9) == 0.0
    assert bias_bound_ext(1.0, 2.0, 0.5, 0.9) == pytest.approx(4.0, abs=1e-12)
    assert bias_bound_ext(1.0, 0.0, 0.5, 0.9) == 0.0


def test_bias_bound_rejects_degenerate_horizon():
    with pytest.raises(ValueError):
        bias_bound_prior(1.0, 2.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        bias_bound_prior(1.0, 2.0, 0.9, 0.5)
    with pytest.raises(ValueError):
        bias_bound_prior(1.0, 2.5, 0.5, 0.9)
    with pytest.raises(ValueError):
        bias_bound_prior(-1.0, 2.0, 0.5, 0.9)


def test_variance_bound_hand_values():
    assert variance_bound(0.0, 1.0, 0.0, 0.5, 0.9) == 0.0
    assert variance_bound(0.1, 7.3, 0.0, 0.5, 0.9) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        variance_bound(0.1, 1.0, 0.0, 0.5, 1.0)


def test_planning_loss_bound_hand_values():
    assert planning_loss_bound(1.0, 0.0, 0.0, 0.0, 0.5, 0.9) == 0.0
    with pytest.raises(ValueError):
        planning_loss_bound(1.0, 0.0, 0.0, 0.0, 0.5, 1.0)


def test_planning_loss_is_bias_plus_variance_bound():
    rng = np.random.default_rng(0)
    for _ in range(500):
        gamma_bw = rng.uniform(0.01, 0.99)
        gamma = rng.uniform(0.0, gamma_bw)
        kappa = rng.uniform(0.0, 5.0)
        dg, dh = rng.uniform(0.0, 2.0, size=2)
        eps = rng.uniform(0.0, 2.0)
        total = planning_loss_bound(kappa, dg, dh, eps, gamma, gamma_bw)
        split = bias_bound_ext(kappa, dg, gamma, gamma_bw) + variance_bound(
            eps, kappa, dh, gamma, gamma_bw
        )
        assert total == pytest.approx(split, rel=1e-12, abs=1e-12)


def test_prior_planning_loss_hand_values():
    assert prior_planning_loss_bound(1.0, 0.3, 0.9, 0.9) == pytest.approx(0.3)
    assert prior_planning_loss_bound(1.0, 0.0, 0.5, 0.9) == pytest.approx(8.0, abs=1e-12)
    with pytest.raises(ValueError):
        prior_planning_loss_bound(1.0, 0.0, 0.5, 1.0)


def test_condition_trivial_case():
    assert condition_holds(1.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.9)
    with pytest.raises(ValueError):
        condition_holds(1.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.9, denominator="other")


def test_condition_equivalent_to_bound_comparison():
    # With the halved divergence denominator, the condition is algebraically
    # the comparison of the structural bound against the prior one whenever
    # gamma is strictly below the Blackwell discount.
    rng = np.random.default_rng(1)
    agree = 0
    for _ in range(10_000):
        gamma_bw = rng.uniform(0.05, 0.99)
        gamma = rng.uniform(0.0, gamma_bw * 0.999)
        kappa = rng.uniform(0.0, 1.0 / (1 - gamma))
        dg, dh = rng.uniform(0.0, 2.0, size=2)
        eps = rng.uniform(0.0, 3.0)
        lhs = planning_loss_bound(kappa, dg, dh, eps, gamma, gamma_bw)
        rhs = prior_planning_loss_bound(1.0, eps, gamma, gamma_bw)
        flag = condition_holds(1.0, kappa, dg, dh, eps, gamma, gamma_bw, denominator="consistent")
        agree += flag == (lhs <= rhs)
    assert agree == 10_000


def test_condition_denominators_differ():
    # delta_hat mid-range separates the two variants: thresholds 0.5 vs 1/11
    params = dict(
        r_max=1.0, kappa=1.0, delta_gamma=0.0, delta_hat=1.0,
        epsilon_hat=0.3, gamma=0.0, gamma_bw=0.9,
    )
    assert condition_holds(**params, denominator="paper") != condition_holds(
        **params, denominator="consistent"
    )


def test_bounds_monotone_in_each_parameter():
    gammas = [(0.0, 0.5), (0.3, 0.9), (0.8, 0.9)]
    grid = np.linspace(0.0, 2.0, 9)
    kappas = np.linspace(0.0, 4.0, 9)
    eps = np.linspace(0.0, 2.0, 9)
    for g, gbw in gammas:
        for k in kappas:
            seq = [bias_bound_prior(k, d, g, gbw) for d in grid]
            assert np.all(np.diff(seq) >= -1e-12)
            seq = [variance_bound(0.5, k, d, g, gbw) for d in grid]
            assert np.all(np.diff(seq) >= -1e-12)
            seq = [planning_loss_bound(k, d, d, 0.5, g, gbw) for d in grid]
            assert np.all(np.diff(seq) >= -1e-12)
        seq = [bias_bound_prior(k, 1.0, g, gbw) for k in kappas]
        assert np.all(np.diff(seq) >= -1e-12)
        seq = [variance_bound(e, 1.0, 1.0, g, gbw) for e in eps]
        assert np.all(np.diff(seq) >= -1e-12)
        seq = [planning_loss_bound(1.0, 1.0, 1.0, e, g, gbw) for e in eps]
        assert np.all(np.diff(seq) >= -1e-12)
        seq = [prior_planning_loss_bound(1.0, e, g, gbw) for e in eps]
        assert np.all(np.diff(seq) >= -1e-12)


# --- measured quantities ----------------------------------------------------------


def test_measured_bias_zero_at_blackwell():
    mdp = generate_fixed(FixedSpec(5, 2, 2, seed=11))
    gbw = blackwell_gamma(mdp)
    assert measured_bias(mdp, gbw, gbw) == 0.0


def test_measured_bias_matches_enumeration(golden_mdp):
    # hand value: the stay/move structure gives bias 1/104 at (0.3, 0.48)
    assert measured_bias(golden_mdp, 0.3, 0.48) == pytest.approx(1 / 104, abs=1e-12)


def test_measured_variance_trivial_and_range():
    mdp = generate_fixed(FixedSpec(6, 3, 2, seed=2))
    gbw = blackwell_gamma(mdp)
    assert measured_variance(mdp, mdp, 0.2, max(gbw, 0.2)) == 0.0
    emp = sample_empirical_model(mdp, 10, seed=1)
    horizon = max(gbw, 0.2)
    assert measured_variance(mdp, emp.model, 0.2, horizon) <= mdp.r_max / (1 - horizon)


def test_measured_planning_loss_triangle():
    for seed in range(10):
        mdp = generate_fixed(FixedSpec(7, 3, 2, seed=600 + seed))
        emp = sample_empirical_model(mdp, 10, seed=seed)
        gbw = blackwell_gamma(mdp)
        gamma = round(gbw / 2, 2)
        loss = measured_planning_loss(mdp, emp.model, gamma, gbw)
        parts = measured_bias(mdp, gamma, gbw) + measured_variance(mdp, emp.model, gamma, gbw)
        assert loss <= parts + 1e-12


# --- normalized bias ----------------------------------------------------------------


def test_normalized_bias_trivial_and_range():
    mdp = generate_fixed(FixedSpec(6, 3, 2, seed=8))
    gbw = blackwell_gamma(mdp)
    assert normalized_bias(mdp, gbw, gbw) == 0.0
    for gamma in (0.0, round(gbw / 2, 2)):
        nb = normalized_bias(mdp, gamma, gbw)
        assert 0.0 <= nb <= 1.0


def test_normalized_bias_golden_value(golden_mdp):
    assert normalized_bias(golden_mdp, 0.3, 0.48) == pytest.approx(1 / 96, abs=1e-12)


def test_normalized_bias_all_states_skipped_warns():
    P = np.zeros((2, 2, 2))
    P[:, :, 0] = 1.0
    mdp = TabularMDP(2, 2, P, np.zeros((2, 2)))  # zero reward everywhere
    with pytest.warns(UserWarning, match="near-zero"):
        assert normalized_bias(mdp, 0.2, 0.5) == 0.0


def test_mean_normalized_bias_trend():
    # averaged over seeds, the bias curve does not rise with gamma
    gammas = [0.0, 0.2, 0.4, 0.6, 0.8]
    totals = np.zeros(len(gammas))
    n = 100
    for seed in range(n):
        mdp = generate_fixed(FixedSpec(10, 3, 2, seed=7000 + seed))
        gbw = blackwell_gamma(mdp)
        for i, g in enumerate(gammas):
            totals[i] += normalized_bias(mdp, g, gbw) if g < gbw else 0.0
    curve = totals / n
    inversions = int(np.sum(np.diff(curve) > 1e-12))
    assert inversions <= 1


# --- full report ---------------------------------------------------------------------


def test_report_domination_chain_random_instances():
    for seed in range(25):
        mdp = generate_fixed(FixedSpec(8, 3, 2, seed=700 + seed))
        emp = sample_empirical_model(mdp, 10, seed=seed)
        gbw = blackwell_gamma(mdp)
        for gamma in (0.0, 0.3, 0.7):
            report = compute_bound_report(mdp, emp.model, gamma, gbw)
            assert report.domination_violations() == []


def test_report_equalities_above_blackwell():
    # planning discount above the detected Blackwell value: every inequality
    # collapses to an exact equality at the effective horizon
    rng = np.random.default_rng(5)
    row = rng.dirichlet(np.ones(4), size=4)
    P = np.stack([row, row], axis=1)
    R = rng.uniform(size=(4, 2))
    mdp = TabularMDP(4, 2, P, R)  # action-independent: gamma_bw = 0
    emp = sample_empirical_model(mdp, 10, seed=0)
    report = compute_bound_report(mdp, emp.model, 0.5, 0.0)
    assert report.gamma_bw == 0.5
    assert report.measured_bias == 0.0
    assert report.measured_variance == pytest.approx(report.variance_bound, abs=1e-12)
    assert report.measured_planning_loss == pytest.approx(report.planning_loss_bound, abs=1e-12)


def test_report_field_order():
    mdp = generate_fixed(FixedSpec(4, 2, 2, seed=1))
    report = compute_bound_report(mdp, mdp, 0.3, 0.5)
    assert list(report.to_json_dict()) == [
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
    ]


def test_golden_report_values(golden_mdp):
    report = compute_bound_report(golden_mdp, golden_mdp, 0.3, 0.48)
    assert report.measured_bias == pytest.approx(1 / 104, abs=1e-12)
    assert report.bias_bound_prior == pytest.approx(27 / 104, abs=1e-12)
    assert report.bias_bound_ext == pytest.approx(27 / 104, abs=1e-12)
    assert report.measured_variance == 0.0
    assert report.variance_bound == 0.0
    assert report.planning_loss_bound == pytest.approx(27 / 104, abs=1e-12)
    assert report.prior_planning_loss_bound == pytest.approx(45 / 91, abs=1e-12)
    assert report.condition_holds is True
