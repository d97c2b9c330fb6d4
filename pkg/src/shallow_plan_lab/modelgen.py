"""Random MDP generation and empirical model estimation.

Every (state, action) pair draws from its own PCG64 stream keyed by
(seed, stream tag, state, action), so generation is reproducible and
order-independent: parallel workers produce bit-identical models.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .mdp import SchemaError, TabularMDP, mdp_from_json_dict

# Stream tags keep the generator, the sampler, and observation-map draws
# statistically independent even under a shared seed.
STREAM_GENERATE = 0
STREAM_SAMPLE = 1
STREAM_OMAP = 2


def pair_rng(seed: int, stream: int, *key: int) -> np.random.Generator:
    """Independent PCG64 stream for (seed, stream, key...)."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([int(seed), int(stream), *map(int, key)]))
    )


def derive_seed(*key: int) -> int:
    """Collapse a key tuple into a single 64-bit seed."""
    return int(np.random.SeedSequence([int(k) for k in key]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class FixedSpec:
    """Parameters of the Fixed(|S|, d) random-MDP family: each state-action
    pair reaches exactly d next states."""

    n_states: int
    branching: int
    n_actions: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.n_states < 1 or self.n_actions < 1:
            raise ValueError("n_states and n_actions must be positive")
        if not (1 <= self.branching <= self.n_states):
            raise ValueError("branching must satisfy 1 <= d <= n_states")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def generate_fixed(spec: FixedSpec) -> TabularMDP:
    """Sample a Fixed(|S|, d) MDP.

    Per (s, a): pick d distinct next states uniformly without replacement,
    weight them with U[0,1] draws normalized to a distribution, and draw the
    reward from U[0,1].
    """
    n, d = spec.n_states, spec.branching
    P = np.zeros((n, spec.n_actions, n))
    R = np.zeros((n, spec.n_actions))
    for s in range(n):
        for a in range(spec.n_actions):
            rng = pair_rng(spec.seed, STREAM_GENERATE, s, a)
            support = rng.choice(n, size=d, replace=False)
            weights = rng.uniform(0.0, 1.0, size=d)
            while weights.sum() == 0.0:  # probability-zero guard
                weights = rng.uniform(0.0, 1.0, size=d)
            P[s, a, support] = weights / weights.sum()
            R[s, a] = rng.uniform(0.0, 1.0)
    return TabularMDP(n, spec.n_actions, P, R, r_max=1.0)


@dataclass(frozen=True)
class EmpiricalModel:
    """Frequency-estimated model: counts of sampled next states per
    (state, action), with rewards copied from the true MDP."""

    model: TabularMDP
    counts: np.ndarray
    n_per_pair: int
    seed: int

    def __post_init__(self):
        c = np.ascontiguousarray(self.counts, dtype=np.int64)
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)
        if np.any(c.sum(axis=2) != self.n_per_pair):
            raise ValueError("counts rows must each sum to n_per_pair")

    def to_json_dict(self) -> dict:
        return {
            "model": self.model.to_json_dict(),
            "counts": self.counts.tolist(),
            "n_per_pair": self.n_per_pair,
            "seed": self.seed,
        }


def sample_empirical_model(
    mdp: TabularMDP, n_per_pair: int, seed: int
) -> EmpiricalModel:
    """Draw n_per_pair next states per (s, a) from the true transition row
    and return the frequency estimate. Rewards are deterministic in this
    setting, so the estimate copies them exactly.
    """
    if n_per_pair < 1:
        raise ValueError("n_per_pair must be >= 1")
    counts = np.zeros_like(mdp.transitions, dtype=np.int64)
    for s in range(mdp.n_states):
        for a in range(mdp.n_actions):
            rng = pair_rng(seed, STREAM_SAMPLE, s, a)
            counts[s, a] = rng.multinomial(n_per_pair, mdp.transitions[s, a])
    model = TabularMDP(
        mdp.n_states,
        mdp.n_actions,
        counts / n_per_pair,
        mdp.rewards,
        r_max=mdp.r_max,
    )
    return EmpiricalModel(model=model, counts=counts, n_per_pair=n_per_pair, seed=seed)


def empirical_model_from_json_dict(payload: dict) -> EmpiricalModel:
    if not isinstance(payload, dict):
        raise SchemaError("empirical model payload must be a JSON object")
    for name in ("model", "counts", "n_per_pair", "seed"):
        if name not in payload:
            raise SchemaError(f"empirical model payload missing field '{name}'")
    model = mdp_from_json_dict(payload["model"])
    try:
        counts = np.asarray(payload["counts"], dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"counts is not a rectangular integer array: {exc}")
    if counts.shape != model.transitions.shape:
        raise SchemaError("counts shape does not match the model")
    try:
        return EmpiricalModel(
            model=model,
            counts=counts,
            n_per_pair=int(payload["n_per_pair"]),
            seed=int(payload["seed"]),
        )
    except ValueError as exc:
        raise SchemaError(str(exc))


def load_empirical_model(path: str) -> EmpiricalModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")
    try:
        return empirical_model_from_json_dict(payload)
    except SchemaError as exc:
        raise SchemaError(f"{path}: {exc}")
