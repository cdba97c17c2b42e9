import itertools
import math

import numpy as np
import pytest

from spexplore.errors import EmptyHistory, InvalidAction, SingularCovariance
from spexplore.mdp import (
    ACTIONS,
    Action,
    ExplorationMDP,
    RewardParams,
    covariance,
    gaussian_entropy,
    logdet_spd,
    make_root,
    median_spectral_distance,
    revisit_count,
    reward,
    step,
    valid_actions,
)

HALF_LOG_2PIE = 0.5 * math.log(2 * math.pi * math.e)


def root_at(scene, cells):
    return make_root(scene, cells, [scene.oracle.spectrum(c) for c in cells])


class TestActions:
    def test_eight_moves(self):
        assert len(ACTIONS) == 8
        assert {a.delta for a in ACTIONS} == {(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)} - {(0, 0)}

    def test_reverse(self):
        for a in ACTIONS:
            assert a.reverse.reverse == a
            assert tuple(-v for v in a.delta) == a.reverse.delta

    @pytest.mark.parametrize(
        "cell, count",
        [((3, 3), 8), ((0, 0), 3), ((7, 7), 3), ((0, 7), 3), ((7, 0), 3), ((0, 4), 5), ((4, 7), 5)],
    )
    def test_valid_action_counts(self, small_scene, cell, count):
        assert len(valid_actions(root_at(small_scene, [cell]))) == count


class TestStep:
    def test_first_expansion(self, small_scene):
        root = root_at(small_scene, [(2, 2)])
        s1, _ = step(root, Action.E)
        assert s1.planned_cells == ((2, 3),)
        np.testing.assert_array_equal(s1.planned_remote[0], small_scene.remote_spectrum((2, 3)))
        assert s1.rover_cell == (2, 3)

    def test_in_situ_unchanged(self, small_scene):
        root = root_at(small_scene, [(2, 2), (2, 3)])
        s1, _ = step(root, Action.S)
        s2, _ = step(s1, Action.SE)
        for s in (s1, s2):
            assert s.visited == root.visited
            assert s.in_situ is root.in_situ

    def test_siblings_differ_only_in_last_entry(self, small_scene):
        s1, _ = step(root_at(small_scene, [(4, 4)]), Action.N)
        a, _ = step(s1, Action.W)
        b, _ = step(s1, Action.E)
        assert a.planned_cells[:-1] == b.planned_cells[:-1] == s1.planned_cells
        np.testing.assert_array_equal(a.planned_remote[:-1], b.planned_remote[:-1])
        assert a.planned_cells[-1] != b.planned_cells[-1]
        assert not np.array_equal(a.planned_remote[-1], b.planned_remote[-1])

    def test_invalid(self, small_scene):
        with pytest.raises(InvalidAction):
            step(root_at(small_scene, [(0, 0)]), Action.N)

    def test_deterministic(self, small_scene):
        root = root_at(small_scene, [(3, 3)])
        (a, ra), (b, rb) = step(root, Action.NE), step(root, Action.NE)
        assert a.same_as(b) and ra == rb

    def test_reachable_states_share_history(self, small_scene):
        root = root_at(small_scene, [(1, 1), (2, 2)])
        rng = np.random.default_rng(0)
        s = root
        for _ in range(12):
            acts = valid_actions(s)
            s, _ = step(s, acts[rng.integers(len(acts))])
            assert s.visited == root.visited
            np.testing.assert_array_equal(s.in_situ, root.in_situ)


class TestReward:
    def test_one_by_one(self):
        assert gaussian_entropy([[1.0]]) == pytest.approx(HALF_LOG_2PIE, abs=1e-12)
        assert HALF_LOG_2PIE == pytest.approx(1.41894, abs=1e-5)

    def test_one_by_one_via_state(self, small_scene):
        params = RewardParams(kernel_sigma_f=math.sqrt(0.99), kernel_noise=0.1, kernel_lengthscale=0.3)
        assert reward(root_at(small_scene, [(0, 0)]), params) == pytest.approx(HALF_LOG_2PIE, abs=1e-12)

    def test_revisit_penalty_is_linear(self, small_scene):
        root = root_at(small_scene, [(3, 3), (3, 4)])
        back, _ = step(root, Action.W)
        assert revisit_count(back.cells) == 1
        r0 = reward(back, RewardParams(tau=0.0, kernel_lengthscale=0.5))
        r1 = reward(back, RewardParams(tau=1.0, kernel_lengthscale=0.5))
        assert r0 - r1 == pytest.approx(1.0, abs=1e-12)

    def test_two_by_two_hand_determinant(self):
        y1, y2 = np.array([0.2, 0.4, 0.1]), np.array([0.5, 0.1, 0.3])
        sf, ell, sn = 1.3, 0.4, 0.2
        k12 = sf**2 * math.exp(-sum((a - b) ** 2 for a, b in zip(y1, y2)) / (2 * ell**2))
        k11 = k22 = sf**2 + sn**2
        expected = 0.5 * math.log((2 * math.pi * math.e) ** 2 * (k11 * k22 - k12**2))
        cov = covariance([y1, y2], RewardParams(sf, ell, sn))
        assert gaussian_entropy(cov) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_cholesky_logdet_matches_determinant(self, n):
        rng = np.random.default_rng(n)
        S = rng.uniform(0, 1, size=(n, 6))
        cov = covariance(S, RewardParams(1.0, 0.7, 0.1))
        assert logdet_spd(cov) == pytest.approx(math.log(np.linalg.det(cov)), abs=1e-8)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(3)
        S = rng.uniform(0, 1, size=(5, 4))
        p = RewardParams(1.0, 0.5, 0.1)
        base = gaussian_entropy(covariance(S, p))
        for perm in itertools.permutations(range(5)):
            assert gaussian_entropy(covariance(S[list(perm)], p)) == pytest.approx(base, abs=1e-9)

    def test_duplicate_gain_closed_form(self):
        sf, sn = 1.0, 0.1
        y = np.array([0.3, 0.2, 0.6])
        p = RewardParams(sf, 0.5, sn)
        gain = gaussian_entropy(covariance([y, y], p)) - gaussian_entropy(covariance([y], p))
        c = (2 * sf**2 + sn**2) / (sf**2 + sn**2)
        assert gain == pytest.approx(0.5 * math.log(2 * math.pi * math.e * sn**2 * c), abs=1e-10)

    def test_duplicate_worse_than_novel(self, full_scene):
        params = RewardParams().resolve(full_scene)
        base = [(5, 5)]
        root = root_at(full_scene, base)
        dup, _ = step(root_at(full_scene, [(5, 5), (5, 6)]), Action.W)
        far_cell = max(full_scene.grid.cells(), key=lambda c: np.linalg.norm(
            full_scene.remote_spectrum(c) - root.in_situ[0]))
        far = make_root(full_scene, [far_cell, (5, 6)], [full_scene.remote_spectrum(far_cell),
                                                       full_scene.oracle.spectrum((5, 6))])
        # same set size, one repeated location vs. one distinct far spectrum
        assert reward(dup, params) < reward(far, params)

    def test_singular_covariance(self):
        with pytest.raises(SingularCovariance):
            logdet_spd(-np.eye(3))

    def test_jitter_rescues_semidefinite(self):
        assert math.isfinite(logdet_spd(np.ones((2, 2))))

    def test_median_lengthscale(self, small_scene):
        px = small_scene.orbital.pixels()
        d = [np.linalg.norm(a - b) for a, b in itertools.combinations(px, 2)]
        assert median_spectral_distance(small_scene) == pytest.approx(float(np.median(d)), rel=1e-12)
        assert RewardParams().resolve(small_scene).kernel_lengthscale == median_spectral_distance(small_scene)


class TestRoot:
    def test_one_visited(self, small_scene):
        root = root_at(small_scene, [(1, 1)])
        assert root.in_situ.shape[0] == 1 and root.planned_cells == ()
        assert root.rover_cell == (1, 1)

    def test_k_traverses(self, small_scene):
        cells = [(1, 1), (1, 2), (2, 3), (3, 3)]
        root = root_at(small_scene, cells)
        assert len(root.in_situ) == 4 and root.rover_cell == (3, 3)

    def test_root_reward_uses_in_situ_only(self, small_scene):
        root = root_at(small_scene, [(1, 1), (4, 5)])
        p = RewardParams().resolve(small_scene)
        assert reward(root, p) == pytest.approx(gaussian_entropy(covariance(root.in_situ, p)), abs=1e-12)

    def test_empty(self, small_scene):
        with pytest.raises(EmptyHistory):
            make_root(small_scene, [], np.empty((0, 8)))
        with pytest.raises(EmptyHistory):
            make_root(small_scene, [(0, 0), (0, 1)], np.zeros((1, 8)))


class TestCachedModel:
    def test_matches_scratch(self, full_scene):
        rng = np.random.default_rng(4)
        model = ExplorationMDP(full_scene)
        for trial in range(5):
            cells = [(int(r), int(c)) for r, c in rng.integers(0, 32, size=(10 + trial, 2))]
            root = make_root(full_scene, cells, [full_scene.oracle.spectrum(c) for c in cells])
            s = root
            for _ in range(7):
                acts = model.actions(s)
                s, r = model.step(s, acts[rng.integers(len(acts))])
                assert r == pytest.approx(reward(s, model.params), abs=1e-8)
