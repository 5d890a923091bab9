"""Gemeinsame Fixtures: kleine handgebaute und generierte Instanzen."""

import pytest

from env import DeterministicMdp, DeterministicReward, gen_mdp, solve_dp


def det(*values):
    return tuple(DeterministicReward(v) for v in values)


@pytest.fixture
def chain_mdp():
    """H=2, Start mit zwei Aktionen; beide Aktionen am Start sind optimal (Q* = 0.75)."""
    return DeterministicMdp(
        horizon=2,
        levels=(1, 2),
        actions=((2,), (2, 2)),
        transitions=(((0, 1),), ((), ())),
        rewards=((det(0.25, 0.0),), (det(0.5, 0.25), det(0.75, 0.5))),
    )


@pytest.fixture
def bandit_mdp():
    """H=1 mit drei Aktionen."""
    return DeterministicMdp(
        horizon=1,
        levels=(1,),
        actions=((3,),),
        transitions=((),),
        rewards=((det(0.5, 0.75, 0.25),),),
    )


@pytest.fixture
def small_mdp():
    return gen_mdp(seed=3, horizon=3, level_widths=[1, 3, 3], actions_per_state=2, target_gap=0.2)


@pytest.fixture
def small_truth(small_mdp):
    return solve_dp(small_mdp)


def seeds(n, fast=10):
    """Seeds ``0..n-1``; alles ab ``fast`` laeuft nur ohne ``-m 'not slow'``."""
    return [seed if seed < fast else pytest.param(seed, marks=pytest.mark.slow) for seed in range(n)]
