import math
from fractions import Fraction

import numpy as np
import pytest

from beamband.bandits import ArmEstimate, PolicyKind, new_policy, select_arm, update
from beamband.tree import (Layer, PathSelection, backpropagate, build_tree,
                           select_best_k, select_path, update_leaf_stats)

PERIODS = (10.0, 20.0, 40.0, 80.0, 160.0)
SECTORS = (16, 32, 64, 128, 256, 512)


class TestStructure:
    def test_two_layer_shape(self):
        tree = build_tree(PERIODS, SECTORS)
        assert tree.layer is Layer.PERIOD_ROOT
        assert len(tree.children) == 5
        for pnode in tree.children:
            assert pnode.layer is Layer.PERIOD
            assert len(pnode.children) == 6
            for bnode in pnode.children:
                assert bnode.layer is Layer.BEAMWIDTH
                assert bnode.leaf_pulls is None

    def test_beam_leaf_shape(self):
        tree = build_tree(PERIODS, SECTORS, beam_leaves=True)
        for pnode in tree.children:
            for bnode in pnode.children:
                n = int(bnode.action_value)
                assert len(bnode.children) == n
                assert all(c.layer is Layer.BEAM_LEAF for c in bnode.children)
                assert bnode.leaf_pulls.shape == (n,)
                stats = bnode.leaf_policy_stats
                assert len(stats) == n and all(isinstance(s, ArmEstimate) for s in stats)

    def test_select_path_rejects_non_root(self):
        tree = build_tree(PERIODS, SECTORS)
        with pytest.raises(ValueError):
            select_path(tree.children[0], np.random.default_rng(0))


class TestSelectPath:
    def test_unique_path_when_no_choice(self):
        tree = build_tree([40.0], [256])
        path = select_path(tree, np.random.default_rng(0))
        assert path.period_node.action_value == 40.0
        assert path.beamwidth_node.action_value == 256
        assert path.swept_beams == tuple(range(256))

    def test_single_layer_tree(self):
        tree = build_tree(PERIODS)
        path = select_path(tree, np.random.default_rng(0))
        assert path.beamwidth_node is None
        assert path.swept_beams == ()

    def test_forced_exploration_covers_children_once(self):
        tree = build_tree(PERIODS)
        rng = np.random.default_rng(42)
        seen = []
        for _ in range(len(PERIODS)):
            path = select_path(tree, rng)
            seen.append(path.period_node.action_value)
            backpropagate(path, 0.5)
        assert sorted(seen) == sorted(PERIODS)

    def test_flat_equivalence_single_layer(self):
        # Same seed, same reward tape: the one-layer tree must reproduce the
        # flat bandit's selections bit for bit.
        tape = np.random.default_rng(9).random((2000, 5))
        for seed in (0, 1, 2):
            flat_state = new_policy(PolicyKind.KLUCB, 5)
            flat_rng = np.random.default_rng(seed)
            flat_seq = []
            for t in range(2000):
                arm = select_arm(flat_state, flat_rng)
                update(flat_state, arm, float(tape[t, arm]))
                flat_seq.append(arm)

            tree = build_tree(list(range(5)))
            tree_rng = np.random.default_rng(seed)
            tree_seq = []
            for t in range(2000):
                path = select_path(tree, tree_rng, node_policy=PolicyKind.KLUCB)
                arm = int(path.period_node.action_value)
                backpropagate(path, float(tape[t, arm]))
                tree_seq.append(arm)
            assert flat_seq == tree_seq


class TestSelectBestK:
    def _node(self, pulls, means):
        node = build_tree([10.0], [len(pulls)], beam_leaves=True).children[0].children[0]
        node.leaf_pulls = np.asarray(pulls, dtype=np.int64)
        node.leaf_means = np.asarray(means, dtype=np.float64)
        return node

    def test_k_equals_n_returns_all(self):
        node = self._node([3, 1, 7, 2], [0.1, 0.9, 0.5, 0.2])
        assert select_best_k(node, 4, np.random.default_rng(0)) == (0, 1, 2, 3)

    def test_dominant_beam_selected(self):
        node = self._node([100, 100, 100, 100], [1.0, 0.0, 0.0, 0.0])
        assert select_best_k(node, 1, np.random.default_rng(0)) == (0,)

    def test_paper_ratio_512_quarter(self):
        node = self._node(np.ones(512), np.zeros(512))
        got = select_best_k(node, 128, np.random.default_rng(0))
        assert len(got) == 128

    def test_returns_k_distinct_indices(self):
        rng = np.random.default_rng(4)
        node = self._node(rng.integers(0, 5, size=64), rng.random(64))
        for k in (1, 8, 33, 64):
            got = select_best_k(node, k, rng)
            assert len(got) == k and len(set(got)) == k

    def test_unpulled_swept_before_exploitation(self):
        node = self._node([0] * 32, [0.0] * 32)
        rng = np.random.default_rng(1)
        seen = set()
        for _ in range(4):
            swept = np.asarray(select_best_k(node, 8, rng), dtype=np.int64)
            assert not (set(int(b) for b in swept) & seen)
            seen.update(int(b) for b in swept)
            update_leaf_stats(node, swept, np.zeros(8))
        assert seen == set(range(32))

    def test_k_out_of_range(self):
        node = self._node([1, 1], [0.5, 0.5])
        for bad in (0, 3, -1):
            with pytest.raises(ValueError):
                select_best_k(node, bad, np.random.default_rng(0))

    def test_convergence_to_best_beam(self):
        # One beam succeeds w.p. 0.9, the rest 0.1; the best beam should sit
        # in the swept set almost always once identified.
        n, k, slots = 32, 8, 1000
        fractions = []
        for seed in range(100):
            rng = np.random.default_rng(seed)
            node = self._node([0] * n, [0.0] * n)
            best_in = 0
            for t in range(slots):
                swept = np.asarray(select_best_k(node, k, rng), dtype=np.int64)
                p = np.where(swept == 0, 0.9, 0.1)
                update_leaf_stats(node, swept, (rng.random(k) < p).astype(float))
                if t >= 200:
                    best_in += 0 in swept
            fractions.append(best_in / (slots - 200))
        assert np.mean(fractions) > 0.95


class TestBackpropagate:
    def test_fresh_path(self):
        tree = build_tree([10.0], [16])
        path = select_path(tree, np.random.default_rng(0))
        backpropagate(path, 0.6)
        assert path.period_node.stats.pulls == 1
        assert path.period_node.stats.mean_reward == pytest.approx(0.6)
        assert path.beamwidth_node.stats.pulls == 1
        assert path.beamwidth_node.stats.mean_reward == pytest.approx(0.6)

    def test_running_mean_over_two_slots(self):
        tree = build_tree([10.0], [16])
        rng = np.random.default_rng(0)
        for reward in (0.2, 0.8):
            backpropagate(select_path(tree, rng), reward)
        assert tree.children[0].stats.mean_reward == pytest.approx(0.5)

    def test_leaf_feedback_state_diff(self):
        tree = build_tree([10.0], [16], beam_leaves=True)
        node = tree.children[0].children[0]
        path = PathSelection(tree.children[0], node, (3, 7))
        before = [(s.pulls, s.mean_reward) for s in node.leaf_policy_stats]
        backpropagate(path, 0.5, {3: 1, 7: 0})
        after = node.leaf_policy_stats
        assert after[3].pulls == before[3][0] + 1 and after[3].mean_reward == 1.0
        assert after[7].pulls == before[7][0] + 1 and after[7].mean_reward == 0.0
        assert (after[5].pulls, after[5].mean_reward) == before[5]

    def test_feedback_for_unswept_beam_rejected(self):
        tree = build_tree([10.0], [16], beam_leaves=True)
        path = PathSelection(tree.children[0], tree.children[0].children[0], (3, 7))
        with pytest.raises(ValueError):
            backpropagate(path, 0.5, {5: 1})

    def test_feedback_without_leaves_rejected(self):
        tree = build_tree([10.0], [16])
        path = select_path(tree, np.random.default_rng(0))
        with pytest.raises(ValueError):
            backpropagate(path, 0.5, {0: 1})

    def test_reward_range_enforced(self):
        tree = build_tree([10.0], [16])
        path = select_path(tree, np.random.default_rng(0))
        with pytest.raises(ValueError):
            backpropagate(path, 1.5)


def test_conservation_of_pulls():
    tree = build_tree(PERIODS, SECTORS)
    rng = np.random.default_rng(17)
    slots = 400
    for _ in range(slots):
        path = select_path(tree, rng)
        backpropagate(path, float(rng.random()))
    assert sum(p.stats.pulls for p in tree.children) == slots
    for pnode in tree.children:
        assert sum(b.stats.pulls for b in pnode.children) == pnode.stats.pulls
