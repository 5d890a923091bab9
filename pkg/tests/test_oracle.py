"""Tests for the maximum-uncertainty oracle and its dataset."""

import numpy as np
import pytest

from funclass import FeatureMap, FiniteClass, LinearClass
from oracle import (
    FEASIBILITY_TOL,
    Dataset,
    DatasetConflictError,
    max_uncertainty,
    second_moment,
    witness_constraint,
)

QUERY = (0, 0)


def _unit_disk(rng, n):
    angles = rng.uniform(0.0, 2.0 * np.pi, n)
    radii = np.sqrt(rng.uniform(0.0, 1.0, n))
    return np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])


def _planar_class(rng, n_data):
    """Two query actions at (0, 0) plus ``n_data`` single-action data states at level 1."""
    keys = ((0, 0, 0), (0, 0, 1)) + tuple((1, j, 0) for j in range(n_data))
    features = _unit_disk(rng, len(keys))
    return LinearClass(FeatureMap(d=2, keys=keys, features=features))


def _swept_value(phi, moment, delta_prime, n_angles=100000):
    """max |phi^T D| over D^T M D <= delta'^2, ||D|| <= 2, by sweeping directions."""
    angles = np.linspace(0.0, np.pi, n_angles, endpoint=False)
    u = np.column_stack([np.cos(angles), np.sin(angles)])
    energy = np.einsum("ij,jk,ik->i", u, moment, u)
    with np.errstate(divide="ignore"):
        reach = np.where(energy > 0.0, delta_prime / np.sqrt(energy), np.inf)
    radius = np.minimum(2.0, reach)
    return float(np.max(np.abs(u @ phi) * radius))


# -----------------------------------------------------------------------
# Dataset
# -----------------------------------------------------------------------


class TestDataset:
    def test_conflicting_repeat_rejected(self):
        dataset = Dataset()
        dataset.append((1, 0, 0), 0.5)
        dataset.append((1, 0, 0), 0.5)
        with pytest.raises(DatasetConflictError):
            dataset.append((1, 0, 0), 0.25)
        assert len(dataset) == 2

    def test_lenient_labels_for_noisy_rewards(self):
        dataset = Dataset(strict_labels=False)
        dataset.append((1, 0, 0), 0.5)
        dataset.append((1, 0, 0), 0.25)
        np.testing.assert_array_equal(dataset.labels, [0.5, 0.25])

    def test_snapshot_is_detached(self):
        dataset = Dataset()
        dataset.append((1, 0, 0), 0.5)
        copy = dataset.snapshot()
        dataset.append((1, 1, 0), 0.1)
        assert len(copy) == 1
        assert (1, 1, 0) not in copy
        assert dataset.to_list() == [[1, 0, 0, 0.5], [1, 1, 0, 0.1]]


# -----------------------------------------------------------------------
# Finite oracle
# -----------------------------------------------------------------------


class TestFiniteOracle:
    def test_empty_data_takes_widest_action(self):
        keys = ((0, 0, 0), (0, 0, 1), (0, 0, 2))
        cls = FiniteClass(keys=keys, tables=np.array([[0.1, 0.2, 0.3], [0.2, 0.7, 0.3], [0.0, 0.4, 0.3]]))
        answer = max_uncertainty(QUERY, 0.1, Dataset(), cls)
        assert answer.action == 1
        assert answer.uncertainty == pytest.approx(0.5)
        assert answer.per_action == pytest.approx((0.2, 0.5, 0.0))
        i, j = answer.witnesses
        assert abs(cls.tables[i, 1] - cls.tables[j, 1]) == pytest.approx(0.5)

    def test_ties_go_to_lowest_action(self):
        keys = ((0, 0, 0), (0, 0, 1))
        cls = FiniteClass(keys=keys, tables=np.array([[0.0, 0.5], [0.25, 0.75]]))
        answer = max_uncertainty(QUERY, 0.0, Dataset(), cls)
        assert answer.action == 0
        assert answer.uncertainty == 0.25

    def test_data_rules_out_pairs(self):
        keys = ((0, 0, 0), (0, 0, 1), (1, 0, 0))
        # Member 2 disagrees most at the query but is far off on the datum
        cls = FiniteClass(
            keys=keys,
            tables=np.array([[0.1, 0.1, 0.5], [0.2, 0.1, 0.5], [0.9, 0.1, 0.0]]),
        )
        dataset = Dataset()
        dataset.append((1, 0, 0), 0.5)
        answer = max_uncertainty(QUERY, 0.1, dataset, cls)
        assert answer.uncertainty == pytest.approx(0.1)
        assert set(answer.witnesses) == {0, 1}
        loose = max_uncertainty(QUERY, 0.5, dataset, cls)
        assert loose.uncertainty == pytest.approx(0.8)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_exhaustive_search(self, seed):
        rng = np.random.default_rng(seed)
        n_data_states = 4
        keys = ((0, 0, 0), (0, 0, 1), (0, 0, 2)) + tuple((1, j, 0) for j in range(n_data_states))
        cls = FiniteClass(keys=keys, tables=rng.uniform(0.0, 1.0, size=(6, len(keys))))
        dataset = Dataset(strict_labels=False)
        for j in rng.integers(0, n_data_states, size=5):
            dataset.append((1, int(j), 0), 0.0)
        delta_prime = float(rng.uniform(0.05, 0.5))
        answer = max_uncertainty(QUERY, delta_prime, dataset, cls)

        best = -1.0
        columns = cls.columns(dataset.keys)
        for i in range(cls.size):
            for j in range(cls.size):
                diff = cls.tables[i, columns] - cls.tables[j, columns]
                if np.sum(diff**2) <= len(dataset) * delta_prime**2 + FEASIBILITY_TOL * len(dataset):
                    best = max(best, float(np.max(np.abs(cls.tables[i, :3] - cls.tables[j, :3]))))
        assert answer.uncertainty == pytest.approx(best)
        assert witness_constraint(answer, dataset, cls) <= len(dataset) * delta_prime**2 * (1 + 1e-9) + 1e-12

    def test_more_data_never_widens_at_zero_tolerance(self):
        rng = np.random.default_rng(7)
        keys = ((0, 0, 0), (0, 0, 1)) + tuple((1, j, 0) for j in range(4))
        for _ in range(20):
            # Coarse value grid so that members agree on some data points
            cls = FiniteClass(keys=keys, tables=rng.choice([0.0, 0.5, 1.0], size=(6, len(keys))))
            dataset = Dataset(strict_labels=False)
            previous = max_uncertainty(QUERY, 0.0, dataset, cls).uncertainty
            for j in rng.permutation(4):
                dataset.append((1, int(j), 0), 0.0)
                current = max_uncertainty(QUERY, 0.0, dataset, cls).uncertainty
                assert current <= previous
                previous = current

    def test_more_data_can_widen_at_positive_tolerance(self):
        keys = ((0, 0, 0), (1, 0, 0), (1, 1, 0))
        cls = FiniteClass(keys=keys, tables=np.array([[0.0, 0.0, 0.0], [1.0, 0.12, 0.0]]))
        dataset = Dataset()
        dataset.append((1, 0, 0), 0.0)
        # 0.12^2 exceeds 1 * 0.1^2 but not 2 * 0.1^2
        assert max_uncertainty(QUERY, 0.1, dataset, cls).uncertainty == 0.0
        dataset.append((1, 1, 0), 0.0)
        assert max_uncertainty(QUERY, 0.1, dataset, cls).uncertainty == pytest.approx(1.0)

    def test_negative_tolerance_rejected(self):
        cls = FiniteClass(keys=((0, 0, 0),), tables=np.array([[0.5]]))
        with pytest.raises(ValueError):
            max_uncertainty(QUERY, -0.1, Dataset(), cls)


# -----------------------------------------------------------------------
# Linear oracle
# -----------------------------------------------------------------------


class TestLinearOracle:
    def test_empty_data_gives_full_width(self):
        rng = np.random.default_rng(0)
        cls = _planar_class(rng, 0)
        answer = max_uncertainty(QUERY, 0.1, Dataset(), cls)
        norms = np.linalg.norm(cls.feature_map.features[:2], axis=1)
        assert answer.per_action == pytest.approx(tuple(2.0 * norms), rel=1e-9)
        assert answer.action == int(np.argmax(norms))

    @pytest.mark.parametrize("seed", range(30))
    def test_agrees_with_boundary_sweep(self, seed):
        rng = np.random.default_rng(seed)
        n_data = int(rng.integers(1, 6))
        cls = _planar_class(rng, n_data)
        dataset = Dataset(strict_labels=False)
        for j in range(n_data):
            dataset.append((1, j, 0), 0.0)
        delta_prime = float(rng.uniform(0.05, 0.5))
        moment = second_moment(cls.feature_map.rows(dataset.keys))

        answer = max_uncertainty(QUERY, delta_prime, dataset, cls)
        for action in (0, 1):
            phi = cls.feature_map.phi((0, 0, action))
            expected = _swept_value(phi, moment, delta_prime)
            assert answer.per_action[action] == pytest.approx(expected, rel=1e-2, abs=1e-9)

        first, second = answer.witnesses
        assert cls.contains(first) and cls.contains(second)
        assert witness_constraint(answer, dataset, cls) <= len(dataset) * delta_prime**2 * (1 + 1e-6) + 1e-12

    def test_unobserved_direction_keeps_full_width(self):
        keys = ((0, 0, 0), (1, 0, 0))
        cls = LinearClass(FeatureMap(d=2, keys=keys, features=np.array([[0.0, 1.0], [1.0, 0.0]])))
        dataset = Dataset()
        dataset.append((1, 0, 0), 0.4)
        answer = max_uncertainty(QUERY, 0.1, dataset, cls)
        assert answer.uncertainty == pytest.approx(2.0, rel=1e-6)

    @pytest.mark.parametrize("seed", range(10))
    def test_dominates_sampled_feasible_differences(self, seed):
        rng = np.random.default_rng(500 + seed)
        n_data = int(rng.integers(1, 5))
        cls = _planar_class(rng, n_data)
        dataset = Dataset(strict_labels=False)
        for j in range(n_data):
            dataset.append((1, j, 0), 0.0)
        delta_prime = float(rng.uniform(0.05, 0.5))
        moment = second_moment(cls.feature_map.rows(dataset.keys))
        answer = max_uncertainty(QUERY, delta_prime, dataset, cls)

        # Differences drawn inside the radius-2 ball cut by the data constraint
        angles = rng.uniform(0.0, 2.0 * np.pi, 10_000)
        u = np.column_stack([np.cos(angles), np.sin(angles)])
        energy = np.einsum("ij,jk,ik->i", u, moment, u)
        with np.errstate(divide="ignore"):
            reach = np.where(energy > 0.0, delta_prime / np.sqrt(energy), np.inf)
        diffs = u * (rng.uniform(0.0, 1.0, 10_000) * np.minimum(2.0, reach))[:, None]
        query_rows = cls.feature_map.rows(((0, 0, 0), (0, 0, 1)))
        sampled = float(np.max(np.abs(diffs @ query_rows.T)))
        assert answer.uncertainty >= sampled * (1 - 1e-6) - 1e-12

    def test_zero_tolerance_stays_in_null_space(self):
        keys = ((0, 0, 0), (0, 0, 1), (1, 0, 0))
        features = np.array([[0.6, 0.8], [1.0, 0.0], [1.0, 0.0]])
        cls = LinearClass(FeatureMap(d=2, keys=keys, features=features))
        dataset = Dataset()
        dataset.append((1, 0, 0), 0.3)
        answer = max_uncertainty(QUERY, 0.0, dataset, cls)
        # Only the second coordinate is unobserved
        assert answer.action == 0
        assert answer.uncertainty == pytest.approx(1.6)
        assert answer.per_action[1] == pytest.approx(0.0, abs=1e-12)

    def test_second_moment_of_empty_data(self):
        np.testing.assert_array_equal(second_moment(np.zeros((0, 3))), np.zeros((3, 3)))
