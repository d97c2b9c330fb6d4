"""Seeded experiment campaigns with CSV/JSON persistence.

Determinism contract: every per-trial quantity is a pure function of
(config, trial index); per-trial seeds derive from the master seed and the
trial index, and rows are collected in trial order before writing, so the
output bytes do not depend on the worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial

import numpy as np

from .abstraction import (
    ObservationMap,
    abstract_mdp,
    action_variation,
    beliefs,
    belief_l1_diameter,
    identity_observation_map,
    lifted_policy,
    load_observation_map,
    random_observation_map,
    theorem2_check,
)
from .bounds import compute_bound_report, condition_holds
from .mdp import DiscountGrid, TabularMDP, evaluate_policy, load_mdp, optimal_policy, scan_optimal_policies
from .modelgen import FixedSpec, derive_seed, generate_fixed, sample_empirical_model
from .structure import compute_structural_report

EXPERIMENTS = ("fig1", "fig2", "fig3", "single")
FORMATS = ("csv", "json")

# Seed-derivation tags, one per independent random object.
_SEED_MDP = 101
_SEED_SAMPLE = 202
_SEED_OMAP = 303

SCHEMAS = {
    "fig1": ("gamma", "proportion_true", "n"),
    "fig2_blackwell": ("trial", "mdp_seed", "n_obs", "gamma_bw"),
    "fig2_bias": ("trial", "mdp_seed", "n_obs", "gamma", "gamma_bw", "normalized_bias"),
    "fig3": (
        "trial",
        "mdp_seed",
        "n_obs",
        "gamma",
        "kappa_phi",
        "delta_phi",
        "kappa_s",
        "delta_s",
        "kappa_ratio",
        "delta_ratio",
    ),
}

_EXPERIMENT_TABLES = {
    "fig1": ("fig1",),
    "fig2": ("fig2_blackwell", "fig2_bias"),
    "fig3": ("fig3",),
    "single": (),
}

# Fraction of trials whose bound rows are re-verified against the domination
# chain during a campaign run.
_SPOT_CHECK_EVERY = 100


class CampaignInvariantError(RuntimeError):
    """A spot-validated bound row violated the domination chain."""


@dataclass(frozen=True)
class CampaignConfig:
    """Everything a campaign needs; all fields picklable for worker pools."""

    experiment: str
    n_mdps: int = 1000
    n_states: int = 10
    branching: int = 3
    n_actions: int = 2
    observation_sizes: tuple = (10, 8, 6, 4, 2, 1)
    gamma_start: float = 0.99
    gamma_step: float = 0.01
    gamma_end: float = 0.0
    n_per_pair: int = 10
    master_seed: int = 0
    output_path: str = "results.csv"
    output_format: str = "csv"
    workers: int = 1
    condition_denominator: str = "paper"
    gamma: float = 0.5  # planning discount for `single`

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}")
        if self.output_format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        if self.n_mdps < 1:
            raise ValueError("n_mdps must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if any(o > self.n_states or o < 1 for o in self.observation_sizes):
            raise ValueError("observation sizes must lie in [1, n_states]")
        object.__setattr__(self, "observation_sizes", tuple(self.observation_sizes))

    @property
    def grid(self) -> DiscountGrid:
        return DiscountGrid(self.gamma_start, self.gamma_step, self.gamma_end)

    def fixed_spec(self, trial: int) -> FixedSpec:
        return FixedSpec(
            n_states=self.n_states,
            branching=self.branching,
            n_actions=self.n_actions,
            seed=derive_seed(self.master_seed, _SEED_MDP, trial),
        )

    def sample_seed(self, trial: int) -> int:
        return derive_seed(self.master_seed, _SEED_SAMPLE, trial)

    def omap_seed(self, trial: int, n_obs: int) -> int:
        return derive_seed(self.master_seed, _SEED_OMAP, trial, n_obs)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_table(path: str, columns: tuple, rows: list, output_format: str) -> None:
    if output_format == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    else:
        payload = [dict(zip(columns, row)) for row in rows]
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")


def table_paths(config: CampaignConfig) -> dict:
    """Output path per table; fig2 derives sibling files from the stem."""
    base = config.output_path
    ext = ".json" if config.output_format == "json" else ".csv"
    stem = base[: -len(ext)] if base.endswith(ext) else base
    tables = _EXPERIMENT_TABLES[config.experiment]
    if len(tables) == 1:
        return {tables[0]: stem + ext}
    return {name: f"{stem}_{name.split('_', 1)[1]}{ext}" for name in tables}


def _run_trials(config: CampaignConfig, trial_fn, n: int) -> list:
    if config.workers == 1:
        return [trial_fn(config, t) for t in range(n)]
    chunk = max(1, n // (config.workers * 4))
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(partial(trial_fn, config), range(n), chunksize=chunk))


def _blackwell_index(policies: list) -> int:
    """Index of the last grid point (scanning down) whose canonical policy
    still matches the policy at the grid start."""
    idx = 0
    for i in range(1, len(policies)):
        if policies[i] == policies[0]:
            idx = i
        else:
            break
    return idx


def _campaign_omap(config: CampaignConfig, trial: int, n_obs: int) -> ObservationMap:
    """Full observability uses the identity map; anything coarser draws a
    random surjective map from the trial's stream."""
    if n_obs == config.n_states:
        return identity_observation_map(config.n_states)
    return random_observation_map(config.n_states, n_obs, config.omap_seed(trial, n_obs))


def _normalized_bias_rows(v_bw: np.ndarray, v_g: np.ndarray) -> float:
    keep = v_bw > 1e-12
    if not np.any(keep):
        return 0.0
    return float(np.max((v_bw[keep] - v_g[keep]) / v_bw[keep]))


# --- fig1: proportion of instances satisfying the tightness condition -------


def _fig1_trial(config: CampaignConfig, trial: int) -> list:
    spec = config.fixed_spec(trial)
    mdp = generate_fixed(spec)
    emp = sample_empirical_model(mdp, config.n_per_pair, config.sample_seed(trial))
    grid = config.grid
    policies = scan_optimal_policies(mdp, grid)
    policies_hat = scan_optimal_policies(emp.model, grid)
    bw_idx = _blackwell_index(policies)
    n = mdp.n_states
    flags = []
    for i, g in enumerate(grid):
        h_idx = min(i, bw_idx)  # effective horizon index: max(gamma, gamma_bw)
        horizon = grid.values[h_idx]
        pi_g, pi_h, pi_bw = policies[i], policies_hat[i], policies[h_idx]
        v_g = evaluate_policy(mdp, pi_g, g)
        kappa = float(v_g.max() - v_g.min())
        d_gamma = max(
            (
                float(np.abs(mdp.transitions[s, pi_g.actions[s]] - mdp.transitions[s, pi_bw.actions[s]]).sum())
                for s in range(n)
                if pi_g.actions[s] != pi_bw.actions[s]
            ),
            default=0.0,
        )
        d_hat = max(
            (
                float(np.abs(mdp.transitions[s, pi_g.actions[s]] - mdp.transitions[s, pi_h.actions[s]]).sum())
                for s in range(n)
                if pi_g.actions[s] != pi_h.actions[s]
            ),
            default=0.0,
        )
        v_hat = evaluate_policy(mdp, pi_h, g)
        eps_hat = float(np.max(np.abs(v_g - v_hat)))
        flags.append(
            condition_holds(
                mdp.r_max,
                kappa,
                d_gamma,
                d_hat,
                eps_hat,
                g,
                horizon,
                denominator=config.condition_denominator,
            )
        )
    if trial % _SPOT_CHECK_EVERY == 0:
        _spot_check(config, trial, mdp, emp.model, grid.values[bw_idx])
    return flags


def _spot_check(config, trial, mdp, mdp_hat, gamma_bw) -> None:
    for g in (config.gamma_end, config.gamma_start):
        report = compute_bound_report(
            mdp, mdp_hat, g, gamma_bw, condition_denominator=config.condition_denominator
        )
        violations = report.domination_violations()
        if violations:
            raise CampaignInvariantError(
                f"trial {trial} (mdp seed {config.fixed_spec(trial).seed}) "
                f"violates {violations} at gamma={g}"
            )


def run_fig1(config: CampaignConfig) -> dict:
    per_trial = _run_trials(config, _fig1_trial, config.n_mdps)
    grid = config.grid
    counts = [0] * len(grid)
    for flags in per_trial:
        for i, ok in enumerate(flags):
            counts[i] += int(ok)
    rows = [(g, counts[i] / config.n_mdps, config.n_mdps) for i, g in enumerate(grid)]
    paths = table_paths(config)
    write_table(paths["fig1"], SCHEMAS["fig1"], rows, config.output_format)
    return paths


# --- fig2: Blackwell discounts and normalized bias per observation count ----


def _fig2_trial(config: CampaignConfig, trial: int):
    spec = config.fixed_spec(trial)
    mdp = generate_fixed(spec)
    grid = config.grid
    blackwell_rows, bias_rows = [], []
    for n_obs in config.observation_sizes:
        omap = _campaign_omap(config, trial, n_obs)
        abstract = abstract_mdp(mdp, omap)
        policies = scan_optimal_policies(abstract, grid)
        bw_idx = _blackwell_index(policies)
        gamma_bw = grid.values[bw_idx]
        blackwell_rows.append((trial, spec.seed, n_obs, gamma_bw))
        v_bw = evaluate_policy(abstract, policies[bw_idx], gamma_bw)
        for i, g in enumerate(grid):
            if i <= bw_idx:  # planning at or above the Blackwell discount
                bias = 0.0
            else:
                v_g = evaluate_policy(abstract, policies[i], gamma_bw)
                bias = _normalized_bias_rows(v_bw, v_g)
            bias_rows.append((trial, spec.seed, n_obs, g, gamma_bw, bias))
    return blackwell_rows, bias_rows


def run_fig2(config: CampaignConfig) -> dict:
    per_trial = _run_trials(config, _fig2_trial, config.n_mdps)
    blackwell_rows, bias_rows = [], []
    for bw, bias in per_trial:
        blackwell_rows.extend(bw)
        bias_rows.extend(bias)
    paths = table_paths(config)
    write_table(
        paths["fig2_blackwell"], SCHEMAS["fig2_blackwell"], blackwell_rows, config.output_format
    )
    write_table(paths["fig2_bias"], SCHEMAS["fig2_bias"], bias_rows, config.output_format)
    return paths


# --- fig3: normalized structural parameters ---------------------------------


def _fig3_trial(config: CampaignConfig, trial: int) -> list:
    spec = config.fixed_spec(trial)
    mdp = generate_fixed(spec)
    delta_s = action_variation(mdp)
    grid = config.grid
    rows = []
    for n_obs in config.observation_sizes:
        omap = _campaign_omap(config, trial, n_obs)
        abstract = abstract_mdp(mdp, omap)
        delta_phi = action_variation(abstract)
        B = beliefs(omap)
        for g in grid:
            _, v_star = optimal_policy(mdp, g)
            kappa_s = float(v_star.max() - v_star.min())
            pi_abs, _ = optimal_policy(abstract, g)
            v_lift = evaluate_policy(mdp, lifted_policy(pi_abs, omap), g)
            w = B @ v_lift
            kappa_phi = float(w.max() - w.min())
            kappa_ratio = kappa_phi / kappa_s if kappa_s >= 1e-12 else None
            delta_ratio = delta_phi / delta_s if delta_s >= 1e-12 else None
            rows.append(
                (trial, spec.seed, n_obs, g, kappa_phi, delta_phi, kappa_s, delta_s, kappa_ratio, delta_ratio)
            )
    return rows


def run_fig3(config: CampaignConfig) -> dict:
    per_trial = _run_trials(config, _fig3_trial, config.n_mdps)
    rows = [row for trial_rows in per_trial for row in trial_rows]
    paths = table_paths(config)
    write_table(paths["fig3"], SCHEMAS["fig3"], rows, config.output_format)
    return paths


# --- single-instance report --------------------------------------------------


def run_single(config: CampaignConfig, mdp_path: str, omap_path: str | None = None) -> dict:
    from .mdp import blackwell_gamma  # local import keeps module load light

    mdp = load_mdp(mdp_path)
    omap = load_observation_map(omap_path) if omap_path else None
    if omap is not None:
        omap.validate_for(mdp)
    gamma = config.gamma
    gamma_bw = blackwell_gamma(mdp, config.grid)
    emp = sample_empirical_model(mdp, config.n_per_pair, config.sample_seed(0))
    structural = compute_structural_report(mdp, emp.model, gamma, gamma_bw)
    report = compute_bound_report(
        mdp,
        emp.model,
        gamma,
        gamma_bw,
        condition_denominator=config.condition_denominator,
        structural=structural,
    )
    violations = report.domination_violations()
    if violations:
        raise CampaignInvariantError(f"single-instance report violates {violations}")
    payload = {
        "structural": structural.to_json_dict(),
        "bounds": report.to_json_dict(),
        "abstraction": None,
    }
    if omap is not None:
        abstraction = theorem2_check(mdp, omap, gamma)
        payload["abstraction"] = abstraction.to_json_dict()
    return payload


def run_campaign(config: CampaignConfig, mdp_path=None, omap_path=None):
    if config.experiment == "fig1":
        return run_fig1(config)
    if config.experiment == "fig2":
        return run_fig2(config)
    if config.experiment == "fig3":
        return run_fig3(config)
    if mdp_path is None:
        raise ValueError("experiment 'single' requires an MDP path")
    return run_single(config, mdp_path, omap_path)
