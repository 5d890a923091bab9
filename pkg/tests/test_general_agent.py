"""Tests for the general-class agents, reward sampling and least-squares fitting."""

import math

import numpy as np
import pytest

from env import (
    DeterministicMdp,
    EpisodicEnv,
    TwoPointReward,
    gen_mdp,
    gen_stochastic_rewards,
    policy_matches,
    solve_dp,
)
from funclass import (
    FeatureMap,
    FiniteClass,
    LinearClass,
    compute_approx_error,
    eluder_dim_bruteforce,
    gen_finite_class,
)
from general_agent import (
    ExplorationLimitError,
    GeneralAgentConfig,
    StochasticConfig,
    estimate_reward,
    hoeffding_count,
    learn_general,
    learn_stochastic,
    least_squares_fit,
    sample_count,
)
from harness.bounds import (
    dataset_max_delta,
    dataset_premise,
    default_delta_r,
    estimate_bound,
    general_max_delta,
    general_premise,
    stochastic_premise,
)
from oracle import Dataset

from conftest import seeds


def _finite_instance(seed, class_size=5, delta_target=0.0, gap=0.2, max_path_sum=1.0):
    mdp = gen_mdp(seed, 2, [1, 2], 2, gap, max_path_sum=max_path_sum)
    truth = solve_dp(mdp)
    cls = gen_finite_class(truth, class_size=class_size, delta_target=delta_target, seed=seed)
    return mdp, truth, cls


def _class_near_feasibility(truth, seed, max_delta, class_size=5):
    """Planted class with its error at 90% of ``max_delta(dim_E)``, dim_E of the returned class."""
    eps = truth.gap / 4.0
    dim_e = eluder_dim_bruteforce(gen_finite_class(truth, class_size, 0.0, seed), truth.pairs, eps)
    while True:
        cls = gen_finite_class(truth, class_size, 0.9 * max_delta(dim_e), seed)
        final = eluder_dim_bruteforce(cls, cls.keys, eps)
        if final <= dim_e:
            return cls, final
        dim_e = final


def _coin_env(seed=0):
    mdp = DeterministicMdp(
        horizon=1,
        levels=(1,),
        actions=((1,),),
        transitions=((),),
        rewards=(((TwoPointReward(0.0, 1.0, 0.5),),),),
    )
    return EpisodicEnv(mdp, rng=np.random.default_rng(seed))


# -----------------------------------------------------------------------
# Sampling
# -----------------------------------------------------------------------


class TestSampling:
    def test_sample_count(self):
        assert sample_count(4, 0.05, 0.1, 3) == 24570
        assert sample_count(1, 1.0, 0.5, 1) == math.ceil(0.5 * math.log(36.0))

    @pytest.mark.parametrize(
        "args",
        [(0, 0.1, 0.1, 1), (2, 0.0, 0.1, 1), (2, 0.1, 1.0, 1), (2, 0.1, 0.1, 0)],
    )
    def test_sample_count_rejects(self, args):
        with pytest.raises(ValueError):
            sample_count(*args)

    def test_hoeffding_count(self):
        assert hoeffding_count(1, 0.1, 0.1) == math.ceil(50 * math.log(10.0))

    def test_estimate_of_constant_reward_is_exact(self, chain_mdp):
        noisy = gen_stochastic_rewards(chain_mdp, seed=0, noise_family="degenerate")
        env = EpisodicEnv(noisy, rng=np.random.default_rng(0))
        assert estimate_reward(env, (1, 1, 0), 1000) == 0.75
        assert env.account.reward_samples_drawn == 1000

    def test_estimate_needs_samples(self):
        with pytest.raises(ValueError):
            estimate_reward(_coin_env(), (0, 0, 0), 0)

    def test_hoeffding_concentration(self):
        horizon, delta_r, p_prime, trials = 1, 0.1, 0.1, 1000
        n = hoeffding_count(horizon, delta_r, p_prime)
        env = _coin_env(7)
        misses = sum(
            abs(estimate_reward(env, (0, 0, 0), n) - 0.5) > delta_r / horizon for _ in range(trials)
        )
        assert misses / trials <= p_prime + 3.0 * math.sqrt(p_prime / trials)

    def test_stochastic_config_validates(self):
        with pytest.raises(ValueError):
            StochasticConfig(delta_r=0.01, p=0.1, dim_e_value=0, horizon=2)
        assert StochasticConfig(delta_r=0.05, p=0.1, dim_e_value=3, horizon=4).n_samples == 24570


# -----------------------------------------------------------------------
# Fitting
# -----------------------------------------------------------------------


class TestLeastSquaresFit:
    def test_finite_picks_smallest_residual(self):
        keys = ((0, 0, 0), (0, 0, 1))
        cls = FiniteClass(keys=keys, tables=np.array([[0.0, 0.0], [0.5, 0.5], [0.5, 0.5], [0.4, 0.9]]))
        dataset = Dataset()
        dataset.append((0, 0, 0), 0.5)
        fitted = least_squares_fit(dataset, cls)
        assert fitted.index == 1
        assert fitted.residual == 0.0

    def test_empty_dataset(self):
        cls = FiniteClass(keys=((0, 0, 0),), tables=np.array([[0.3], [0.6]]))
        assert least_squares_fit(Dataset(), cls).index == 0
        linear = LinearClass(FeatureMap(d=2, keys=((0, 0, 0),), features=np.array([[1.0, 0.0]])))
        np.testing.assert_array_equal(least_squares_fit(Dataset(), linear).theta, [0.0, 0.0])

    def test_linear_fit_projected_onto_ball(self):
        keys = ((0, 0, 0), (0, 0, 1))
        linear = LinearClass(FeatureMap(d=2, keys=keys, features=np.array([[0.5, 0.0], [0.0, 0.5]])))
        dataset = Dataset()
        dataset.append((0, 0, 0), 1.0)
        fitted = least_squares_fit(dataset, linear)
        assert fitted.projected
        np.testing.assert_allclose(fitted.theta, [1.0, 0.0])
        assert fitted.value((0, 0, 0)) == pytest.approx(0.5)


# -----------------------------------------------------------------------
# Deterministic rewards
# -----------------------------------------------------------------------


class TestLearnGeneral:
    @pytest.mark.parametrize("seed", seeds(50))
    def test_realizable_finite_class(self, seed):
        mdp, truth, cls = _finite_instance(seed)
        dim_e = eluder_dim_bruteforce(cls, cls.keys, truth.gap / 4.0)
        policy, stats = learn_general(EpisodicEnv(mdp), cls, rho=truth.gap, delta=0.0)
        assert policy_matches(truth, policy, mdp)
        assert stats.y_size <= 18 * max(dim_e, 1)
        assert stats.y_size == len(stats.labels)
        assert stats.oracle_calls == stats.explore_calls + stats.y_size
        assert stats.value_at_root == pytest.approx(truth.v_star[mdp.start])

    def test_labels_are_q_star(self):
        mdp, truth, cls = _finite_instance(4)
        _, stats = learn_general(EpisodicEnv(mdp), cls, rho=truth.gap, delta=0.0)
        for key, label in stats.labels:
            assert label == pytest.approx(truth.q_star[key])

    @pytest.mark.parametrize("c", [2.0, 18.0])
    @pytest.mark.parametrize("seed", seeds(50))
    def test_error_near_feasibility(self, seed, c):
        mdp, truth, _ = _finite_instance(seed, gap=0.3)

        def max_delta(dim_e):
            dim_e = max(dim_e, 1)
            return min(general_max_delta(truth.gap, dim_e), dataset_max_delta(truth.gap, dim_e, c))

        cls, dim_e = _class_near_feasibility(truth, seed, max_delta)
        delta = compute_approx_error(cls, truth).delta
        assert general_premise(truth.gap, delta, dim_e)
        assert dataset_premise(truth.gap, delta, dim_e, c)

        policy, stats = learn_general(EpisodicEnv(mdp), cls, rho=truth.gap, delta=delta)
        assert policy_matches(truth, policy, mdp)
        assert stats.y_size <= c * max(dim_e, 1)
        for state, returns in stats.explore_returns.items():
            np.testing.assert_allclose(returns, truth.v_star[state], atol=1e-12)

    def test_dataset_cap(self, bandit_mdp):
        truth = solve_dp(bandit_mdp)
        q = truth.q_array
        # 0.05 beats the guard 0.125 - 0.1 at action 0, yet 0.05^2 stays inside the tolerance 0.2^2
        cls = FiniteClass(keys=truth.pairs, tables=np.vstack([q, q + np.array([0.05, 0.0, 0.0])]))
        with pytest.raises(ExplorationLimitError, match="dataset_cap_factor 18"):
            learn_general(EpisodicEnv(bandit_mdp), cls, rho=0.25, delta=0.1)

    def test_lower_cap_factor_stops_sooner(self, bandit_mdp):
        truth = solve_dp(bandit_mdp)
        q = truth.q_array
        cls = FiniteClass(keys=truth.pairs, tables=np.vstack([q, q + np.array([0.05, 0.0, 0.0])]))
        env = EpisodicEnv(bandit_mdp)
        with pytest.raises(ExplorationLimitError, match="cap of 3 entries"):
            learn_general(env, cls, rho=0.25, delta=0.1, config=GeneralAgentConfig(dataset_cap_factor=1))

    @pytest.mark.parametrize(
        "rho, delta",
        [(0.0, 0.0), (1.2, 0.0), (0.2, -0.01), (0.2, 0.1), (0.25, 0.2)],
    )
    def test_parameters_validated(self, chain_mdp, rho, delta):
        cls = gen_finite_class(solve_dp(chain_mdp), class_size=2, delta_target=0.0, seed=0)
        with pytest.raises(ValueError):
            learn_general(EpisodicEnv(chain_mdp), cls, rho=rho, delta=delta)

    def test_cap_factor_validated(self):
        with pytest.raises(ValueError):
            GeneralAgentConfig(dataset_cap_factor=0)


# -----------------------------------------------------------------------
# Stochastic rewards
# -----------------------------------------------------------------------


class TestLearnStochastic:
    def test_needs_random_generator(self, chain_mdp):
        cls = gen_finite_class(solve_dp(chain_mdp), class_size=1, delta_target=0.0, seed=0)
        cfg = StochasticConfig(delta_r=0.01, p=0.1, dim_e_value=1, horizon=2)
        with pytest.raises(ValueError):
            learn_stochastic(EpisodicEnv(chain_mdp), cls, rho=0.25, delta=0.0, cfg=cfg)

    @pytest.mark.parametrize("delta", [0.125, 0.2])
    def test_error_of_half_gap_refused(self, chain_mdp, delta):
        noisy = gen_stochastic_rewards(chain_mdp, seed=0, noise_family="degenerate")
        cls = gen_finite_class(solve_dp(chain_mdp), class_size=2, delta_target=0.0, seed=0)
        cfg = StochasticConfig(delta_r=0.01, p=0.1, dim_e_value=1, horizon=2)
        env = EpisodicEnv(noisy, rng=np.random.default_rng(0))
        with pytest.raises(ValueError, match="rho/2"):
            learn_stochastic(env, cls, rho=0.25, delta=delta, cfg=cfg)
        assert env.account.reward_samples_drawn == 0

    def test_return_line_estimates_on_demand(self, chain_mdp):
        truth = solve_dp(chain_mdp)
        noisy = gen_stochastic_rewards(chain_mdp, seed=0, noise_family="degenerate")
        cls = gen_finite_class(truth, class_size=1, delta_target=0.0, seed=0)
        cfg = StochasticConfig(delta_r=0.05, p=0.1, dim_e_value=1, horizon=2)
        env = EpisodicEnv(noisy, rng=np.random.default_rng(0))
        policy, stats = learn_stochastic(env, cls, rho=truth.gap, delta=0.0, cfg=cfg)
        # A single member never disagrees, so only the return line draws samples
        assert stats.y_size == 0
        assert stats.on_demand_estimates == stats.estimate_calls == chain_mdp.horizon
        assert stats.reward_samples == chain_mdp.horizon * cfg.n_samples
        assert stats.value_at_root == truth.v_star[chain_mdp.start]
        assert policy_matches(truth, policy, chain_mdp)

    @pytest.mark.slow
    def test_success_rate(self):
        trials, noise_width = 200, 0.1
        mdp, truth, cls = _finite_instance(0, class_size=4, gap=0.3, max_path_sum=1.0 - 2 * noise_width - 1e-9)
        noisy = gen_stochastic_rewards(mdp, seed=0, noise_family="twopoint", width=noise_width)
        dim_e = max(eluder_dim_bruteforce(cls, cls.keys, truth.gap / 4.0), 1)
        # Largest reward tolerance the premise admits at delta = 0, with 10% slack
        delta_r = 0.9 * truth.gap / (6.0 * math.sqrt(2.0) * math.sqrt(dim_e) + 2.0)
        assert stochastic_premise(truth.gap, 0.0, delta_r, dim_e)
        cfg = StochasticConfig(delta_r=delta_r, p=0.1, dim_e_value=dim_e, horizon=mdp.horizon)

        matched = 0
        for seed in range(trials):
            env = EpisodicEnv(noisy, rng=np.random.default_rng([seed, 1]))
            policy, stats = learn_stochastic(env, cls, rho=truth.gap, delta=0.0, cfg=cfg)
            if policy_matches(truth, policy, mdp):
                matched += 1
                assert stats.estimate_calls <= estimate_bound(dim_e, mdp.horizon)
        assert matched / trials >= 0.85


def test_general_config_section(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("general_agent:\n  dataset_cap_factor: 4\n  trace: false\n", encoding="utf-8")
    config = GeneralAgentConfig.from_config_yaml(path)
    assert config.dataset_cap_factor == 4
    assert not config.trace
    assert config.strict_labels
