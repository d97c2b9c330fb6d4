"""State abstraction as partial observability: observation maps, uniform
beliefs over preimages, abstract MDP construction, and the checks relating
observation-level structural parameters to the underlying ones.

Two value-variation notions coexist here. The abstract MDP's own optimal
values give the variation of the abstraction treated as a standalone MDP
(`pomdp_structural_params`). The observation-level variation that the
abstraction theorem controls is instead the spread of belief-averaged state
values under the executed (lifted) policy (`observation_value_variation`);
that is the quantity reported and checked by `theorem2_check`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .mdp import (
    DeterministicPolicy,
    SchemaError,
    TabularMDP,
    evaluate_policy,
    optimal_policy,
)
from .modelgen import STREAM_OMAP, pair_rng
from .structure import action_variation, value_function_variation


@dataclass(frozen=True)
class ObservationMap:
    """Surjective map from states to observations; the observation is the
    only thing the agent sees."""

    n_states: int
    n_observations: int
    assignment: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.assignment, dtype=np.int64)
        if a.shape != (self.n_states,):
            raise ValueError(
                f"assignment length {a.shape} != n_states {self.n_states}"
            )
        if not (1 <= self.n_observations <= self.n_states):
            raise ValueError("n_observations must lie in [1, n_states]")
        if np.any(a < 0) or np.any(a >= self.n_observations):
            raise ValueError("assignment entries must be valid observation indices")
        present = np.unique(a)
        if len(present) != self.n_observations:
            missing = sorted(set(range(self.n_observations)) - set(present.tolist()))
            raise ValueError(f"map is not surjective; empty observations: {missing}")
        a.flags.writeable = False
        object.__setattr__(self, "assignment", a)

    def validate_for(self, mdp: TabularMDP) -> None:
        if self.n_states != mdp.n_states:
            raise ValueError(
                f"observation map covers {self.n_states} states, MDP has {mdp.n_states}"
            )

    def to_json_dict(self) -> dict:
        return {
            "n_states": self.n_states,
            "n_observations": self.n_observations,
            "assignment": self.assignment.tolist(),
        }


def identity_observation_map(n_states: int) -> ObservationMap:
    return ObservationMap(n_states, n_states, np.arange(n_states))


def random_observation_map(
    n_states: int, n_observations: int, seed: int
) -> ObservationMap:
    """Uniformly random surjective map: one distinct state per observation
    first, then the remaining states uniformly."""
    rng = pair_rng(seed, STREAM_OMAP, n_observations)
    assignment = np.zeros(n_states, dtype=np.int64)
    perm = rng.permutation(n_states)
    assignment[perm[:n_observations]] = np.arange(n_observations)
    for s in perm[n_observations:]:
        assignment[s] = rng.integers(0, n_observations)
    return ObservationMap(n_states, n_observations, assignment)


def beliefs(omap: ObservationMap) -> np.ndarray:
    """Row-stochastic (observation, state) matrix: uniform over each
    observation's preimage, zero elsewhere."""
    B = np.zeros((omap.n_observations, omap.n_states))
    for o in range(omap.n_observations):
        pre = np.flatnonzero(omap.assignment == o)
        B[o, pre] = 1.0 / len(pre)
    return B


def belief_l1_diameter(omap: ObservationMap) -> float:
    """Largest L1 distance between two observations' belief rows; 0 when
    there is a single observation."""
    B = beliefs(omap)
    best = 0.0
    for i in range(omap.n_observations):
        for j in range(i + 1, omap.n_observations):
            best = max(best, float(np.abs(B[i] - B[j]).sum()))
    return best


def abstract_mdp(mdp: TabularMDP, omap: ObservationMap) -> TabularMDP:
    """MDP over observations with belief-averaged rewards and transitions."""
    omap.validate_for(mdp)
    B = beliefs(omap)
    onehot = np.zeros((omap.n_observations, omap.n_states))
    onehot[omap.assignment, np.arange(omap.n_states)] = 1.0
    R_abs = B @ mdp.rewards
    P_abs = np.einsum("os,sat,pt->oap", B, mdp.transitions, onehot)
    return TabularMDP(
        n_states=omap.n_observations,
        n_actions=mdp.n_actions,
        transitions=P_abs,
        rewards=R_abs,
        r_max=mdp.r_max,
    )


def pomdp_structural_params(abstract: TabularMDP, gamma: float):
    """Value-function variation and action variation of the abstract MDP,
    treating observations as states."""
    return value_function_variation(abstract, gamma), action_variation(abstract)


def lifted_policy(
    abstract_policy: DeterministicPolicy, omap: ObservationMap
) -> DeterministicPolicy:
    """Execute an observation policy on the underlying states."""
    return DeterministicPolicy(abstract_policy.actions[omap.assignment])


def delta_eps_phi(mdp: TabularMDP, omap: ObservationMap, gamma: float) -> float:
    """Exact max value loss on the underlying states from executing the
    lifted abstract-optimal policy instead of the optimal one; the tightest
    constant admissible in the abstraction theorem."""
    omap.validate_for(mdp)
    abstract = abstract_mdp(mdp, omap)
    pi_abs, _ = optimal_policy(abstract, gamma)
    pi_lift = lifted_policy(pi_abs, omap)
    _, v_star = optimal_policy(mdp, gamma)
    v_lift = evaluate_policy(mdp, pi_lift, gamma)
    return float(np.max(np.abs(v_star - v_lift)))


def observation_value_variation(
    mdp: TabularMDP, omap: ObservationMap, gamma: float
) -> float:
    """Spread of observation values, an observation's value being the
    belief-averaged underlying value of the lifted abstract-optimal policy."""
    omap.validate_for(mdp)
    abstract = abstract_mdp(mdp, omap)
    pi_abs, _ = optimal_policy(abstract, gamma)
    v_lift = evaluate_policy(mdp, lifted_policy(pi_abs, omap), gamma)
    w = beliefs(omap) @ v_lift
    return float(w.max() - w.min())


@dataclass(frozen=True)
class AbstractionReport:
    """Observation-level structural parameters versus the underlying ones,
    with the two abstraction-theorem checks."""

    kappa_phi: float
    delta_phi: float
    kappa_s: float
    delta_s: float
    delta_eps_phi: float
    belief_l1_max: float
    thm2_delta_ok: bool
    thm2_kappa_ok: bool

    def to_json_dict(self) -> dict:
        return {
            "kappa_phi": self.kappa_phi,
            "delta_phi": self.delta_phi,
            "kappa_s": self.kappa_s,
            "delta_s": self.delta_s,
            "delta_eps_phi": self.delta_eps_phi,
            "belief_l1_max": self.belief_l1_max,
            "thm2_delta_ok": self.thm2_delta_ok,
            "thm2_kappa_ok": self.thm2_kappa_ok,
        }


def theorem2_check(
    mdp: TabularMDP, omap: ObservationMap, gamma: float
) -> AbstractionReport:
    """Verify that the observation-level action variation is dominated by the
    underlying one, and the observation-level value variation by the
    belief-diameter bound."""
    omap.validate_for(mdp)
    abstract = abstract_mdp(mdp, omap)
    B = beliefs(omap)

    pi_star, v_star = optimal_policy(mdp, gamma)
    kappa_s = float(v_star.max() - v_star.min())
    delta_s = action_variation(mdp)

    pi_abs, _ = optimal_policy(abstract, gamma)
    v_lift = evaluate_policy(mdp, lifted_policy(pi_abs, omap), gamma)
    d_eps = float(np.max(np.abs(v_star - v_lift)))

    w = B @ v_lift
    kappa_phi = float(w.max() - w.min())
    delta_phi = action_variation(abstract)
    l1_max = belief_l1_diameter(omap)

    return AbstractionReport(
        kappa_phi=kappa_phi,
        delta_phi=delta_phi,
        kappa_s=kappa_s,
        delta_s=delta_s,
        delta_eps_phi=d_eps,
        belief_l1_max=l1_max,
        thm2_delta_ok=bool(delta_phi <= delta_s + 1e-9),
        thm2_kappa_ok=bool(kappa_phi <= l1_max / 2.0 * (kappa_s + d_eps) + 1e-9),
    )


def normalized_params(mdp: TabularMDP, omap: ObservationMap, gamma: float):
    """Observation-level parameters divided by the underlying ones; a ratio
    is None when its denominator is below 1e-12."""
    report = theorem2_check(mdp, omap, gamma)
    kappa_ratio = (
        report.kappa_phi / report.kappa_s if report.kappa_s >= 1e-12 else None
    )
    delta_ratio = (
        report.delta_phi / report.delta_s if report.delta_s >= 1e-12 else None
    )
    return kappa_ratio, delta_ratio


# --- JSON interface ---------------------------------------------------------


def omap_from_json_dict(payload: dict) -> ObservationMap:
    if not isinstance(payload, dict):
        raise SchemaError("observation map payload must be a JSON object")
    for name in ("n_states", "n_observations", "assignment"):
        if name not in payload:
            raise SchemaError(f"observation map payload missing field '{name}'")
    try:
        return ObservationMap(
            n_states=int(payload["n_states"]),
            n_observations=int(payload["n_observations"]),
            assignment=np.asarray(payload["assignment"], dtype=np.int64),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc))


def load_observation_map(path: str) -> ObservationMap:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")
    try:
        return omap_from_json_dict(payload)
    except SchemaError as exc:
        raise SchemaError(f"{path}: {exc}")


def save_observation_map(omap: ObservationMap, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(omap.to_json_dict(), fh)
        fh.write("\n")
