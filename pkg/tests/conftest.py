import numpy as np
import pytest

from shallow_plan_lab import TabularMDP


@pytest.fixture
def golden_mdp() -> TabularMDP:
    """Two-state MDP with a hand-solvable structure.

    State 0 can either stay (reward 0.475) or move to state 1 (reward 0);
    state 1 can stay forever on reward 1. The optimal action at state 0
    switches from stay to move at gamma = 0.475, so the 0.01-grid Blackwell
    discount is 0.48.
    """
    P = np.zeros((2, 2, 2))
    P[0, 0] = [1.0, 0.0]
    P[0, 1] = [0.0, 1.0]
    P[1, 0] = [0.5, 0.5]
    P[1, 1] = [0.0, 1.0]
    R = np.array([[0.475, 0.0], [0.0, 1.0]])
    return TabularMDP(2, 2, P, R)


def make_mdp(P, R, r_max=1.0) -> TabularMDP:
    P = np.asarray(P, dtype=float)
    R = np.asarray(R, dtype=float)
    return TabularMDP(P.shape[0], P.shape[1], P, R, r_max=r_max)
