"""Finite tabular MDPs: exact policy evaluation, policy optimization, and
Blackwell discount-factor detection.

All solvers are exact up to linear-system round-off: policy evaluation solves
(I - gamma * P_pi) V = R_pi directly, and policy iteration terminates with the
canonical optimal policy (greedy on the optimal values, ties broken by lowest
action index). Canonical tie-breaking matters: the Blackwell scan compares
policies across a discount grid bitwise, so any spurious tie-flip would
register as a policy change.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

ROW_SUM_TOL = 1e-9
_ENTRY_TOL = 1e-12


class SchemaError(ValueError):
    """Raised when a JSON payload fails schema or invariant validation."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TabularMDP:
    """Finite MDP (S, A, P, R) with dense transition tensor and reward matrix.

    transitions is indexed (state, action, next_state); rewards is indexed
    (state, action) with entries in [0, r_max].
    """

    n_states: int
    n_actions: int
    transitions: np.ndarray
    rewards: np.ndarray
    r_max: float = 1.0

    def __post_init__(self):
        if self.n_states < 1 or self.n_actions < 1:
            raise ValueError("n_states and n_actions must be positive")
        if self.r_max <= 0:
            raise ValueError("r_max must be positive")
        P = np.asarray(self.transitions, dtype=np.float64)
        R = np.asarray(self.rewards, dtype=np.float64)
        if P.shape != (self.n_states, self.n_actions, self.n_states):
            raise ValueError(
                f"transitions shape {P.shape} != "
                f"({self.n_states}, {self.n_actions}, {self.n_states})"
            )
        if R.shape != (self.n_states, self.n_actions):
            raise ValueError(
                f"rewards shape {R.shape} != ({self.n_states}, {self.n_actions})"
            )
        if np.any(P < -_ENTRY_TOL) or np.any(P > 1.0 + _ENTRY_TOL):
            raise ValueError("transition probabilities must lie in [0, 1]")
        row_sums = P.sum(axis=2)
        bad = np.abs(row_sums - 1.0) > ROW_SUM_TOL
        if np.any(bad):
            s, a = np.argwhere(bad)[0]
            raise ValueError(
                f"transition row (state={s}, action={a}) sums to "
                f"{row_sums[s, a]!r}, not 1"
            )
        if np.any(R < -_ENTRY_TOL) or np.any(R > self.r_max + _ENTRY_TOL):
            raise ValueError(f"rewards must lie in [0, {self.r_max}]")
        object.__setattr__(self, "transitions", _readonly(P))
        object.__setattr__(self, "rewards", _readonly(R))

    def policy_matrices(self, policy: "DeterministicPolicy"):
        """Transition matrix and reward vector induced by a policy."""
        idx = np.arange(self.n_states)
        return self.transitions[idx, policy.actions], self.rewards[idx, policy.actions]

    def to_json_dict(self) -> dict:
        return {
            "n_states": self.n_states,
            "n_actions": self.n_actions,
            "transitions": self.transitions.tolist(),
            "rewards": self.rewards.tolist(),
            "r_max": self.r_max,
        }


@dataclass(frozen=True, eq=False)
class DeterministicPolicy:
    """One action index per state."""

    actions: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.actions, dtype=np.int64)
        if a.ndim != 1:
            raise ValueError("policy actions must be a 1-d integer vector")
        a.flags.writeable = False
        object.__setattr__(self, "actions", a)

    def validate_for(self, mdp: TabularMDP) -> None:
        if len(self.actions) != mdp.n_states:
            raise ValueError(
                f"policy length {len(self.actions)} != n_states {mdp.n_states}"
            )
        if np.any(self.actions < 0) or np.any(self.actions >= mdp.n_actions):
            raise ValueError("policy contains invalid action indices")

    def __eq__(self, other) -> bool:
        if not isinstance(other, DeterministicPolicy):
            return NotImplemented
        return np.array_equal(self.actions, other.actions)

    def __len__(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class DiscountGrid:
    """Strictly descending discount grid from start down to end.

    The default matches the 0.99 / 0.01 / 0.0 scan used for Blackwell
    detection; end is always included even if the step overshoots it.
    """

    start: float = 0.99
    step: float = 0.01
    end: float = 0.0
    values: tuple = field(init=False)

    def __post_init__(self):
        if not (0.0 <= self.end <= self.start < 1.0):
            raise ValueError("grid must satisfy 0 <= end <= start < 1")
        if self.step <= 0:
            raise ValueError("grid step must be positive")
        vals = []
        v = self.start
        while v > self.end + 1e-12:
            vals.append(round(v, 12))
            v -= self.step
        vals.append(round(self.end, 12))
        object.__setattr__(self, "values", tuple(vals))

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not (0.0 <= gamma < 1.0):
        raise ValueError(f"gamma must lie in [0, 1), got {gamma!r}")
    return gamma


def evaluate_policy(
    mdp: TabularMDP, policy: DeterministicPolicy, gamma: float
) -> np.ndarray:
    """Exact state values of a deterministic policy at discount gamma.

    Solves (I - gamma * P_pi) V = R_pi; the system is nonsingular for every
    gamma < 1 because the spectral radius of gamma * P_pi is below 1.
    """
    gamma = _check_gamma(gamma)
    policy.validate_for(mdp)
    P_pi, R_pi = mdp.policy_matrices(policy)
    if gamma == 0.0:
        return R_pi.copy()
    return np.linalg.solve(np.eye(mdp.n_states) - gamma * P_pi, R_pi)


def _greedy(mdp: TabularMDP, values: np.ndarray, gamma: float) -> np.ndarray:
    q = mdp.rewards + gamma * np.tensordot(mdp.transitions, values, axes=([2], [0]))
    return np.argmax(q, axis=1)  # first max = lowest action index


def optimal_policy(mdp: TabularMDP, gamma: float):
    """Canonical optimal policy and its exact values, via policy iteration.

    The returned policy is the greedy policy of the optimal value function
    with argmax ties broken by lowest action index, which is unique, so the
    result does not depend on the iteration path.
    """
    gamma = _check_gamma(gamma)
    actions = np.argmax(mdp.rewards, axis=1)
    seen = set()
    for _ in range(mdp.n_states * mdp.n_actions + 64):
        values = evaluate_policy(mdp, DeterministicPolicy(actions), gamma)
        improved = _greedy(mdp, values, gamma)
        if np.array_equal(improved, actions):
            break
        key = improved.tobytes()
        if key in seen:  # float-noise tie cycle; both policies are optimal
            actions = improved
            break
        seen.add(key)
        actions = improved
    policy = DeterministicPolicy(actions)
    return policy, evaluate_policy(mdp, policy, gamma)


def scan_optimal_policies(mdp: TabularMDP, grid: DiscountGrid) -> list:
    """Canonical optimal policy at every grid point, highest gamma first."""
    return [optimal_policy(mdp, g)[0] for g in grid]


def blackwell_gamma(mdp: TabularMDP, grid: DiscountGrid | None = None) -> float:
    """Smallest grid discount above which the canonical optimal policy is
    constant, scanning the grid from start downward; returns the grid end
    when the policy never changes.
    """
    if grid is None:
        grid = DiscountGrid()
    reference = None
    gbw = grid.values[0]
    for g in grid:
        pi, _ = optimal_policy(mdp, g)
        if reference is None:
            reference = pi
            gbw = g
        elif pi == reference:
            gbw = g
        else:
            break
    return gbw


# --- JSON interface ---------------------------------------------------------

_MDP_FIELDS = {
    "n_states": int,
    "n_actions": int,
    "transitions": list,
    "rewards": list,
    "r_max": (int, float),
}


def mdp_from_json_dict(payload: dict) -> TabularMDP:
    if not isinstance(payload, dict):
        raise SchemaError("MDP payload must be a JSON object")
    for name, typ in _MDP_FIELDS.items():
        if name not in payload:
            raise SchemaError(f"MDP payload missing field '{name}'")
        if not isinstance(payload[name], typ) or isinstance(payload[name], bool):
            raise SchemaError(f"field '{name}' has wrong type")
    try:
        P = np.asarray(payload["transitions"], dtype=np.float64)
        R = np.asarray(payload["rewards"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"transitions/rewards are not rectangular arrays: {exc}")
    try:
        return TabularMDP(
            n_states=payload["n_states"],
            n_actions=payload["n_actions"],
            transitions=P,
            rewards=R,
            r_max=float(payload["r_max"]),
        )
    except ValueError as exc:
        raise SchemaError(str(exc))


def load_mdp(path: str) -> TabularMDP:
    """Load an MDP from a JSON file, reporting where validation failed."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")
    try:
        return mdp_from_json_dict(payload)
    except SchemaError as exc:
        raise SchemaError(f"{path}: {exc}")


def save_mdp(mdp: TabularMDP, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(mdp.to_json_dict(), fh)
        fh.write("\n")
