"""Bandit-based tree search over the factored action space.

Layers: period -> beamwidth -> beam leaves. Every non-leaf node runs a local
index bandit over its children (KL-UCB by default); the leaf layer is a
best-K identification problem solved with per-beam UCB1 indices over binary
connect/no-connect feedback. The slot reward is backpropagated unchanged to
the period and beamwidth nodes on the selected path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .bandits import ArmEstimate, PolicyKind, argmax_with_ties, kl_ucb_index, ucb1_index


class Layer(Enum):
    PERIOD_ROOT = "period_root"
    PERIOD = "period"
    BEAMWIDTH = "beamwidth"
    BEAM_LEAF = "beam_leaf"


@dataclass
class TreeNode:
    layer: Layer
    action_value: float | int | None
    stats: ArmEstimate = field(default_factory=ArmEstimate)
    children: list["TreeNode"] = field(default_factory=list)
    # Per-beam binary-feedback statistics for BEAMWIDTH nodes that carry beam
    # leaves; array-backed because they are updated for every swept beam of
    # every slot. Distinct from the rate-reward stats on the path.
    leaf_pulls: np.ndarray | None = None
    leaf_means: np.ndarray | None = None

    @property
    def leaf_policy_stats(self) -> list[ArmEstimate] | None:
        if self.leaf_pulls is None:
            return None
        return [ArmEstimate(pulls=int(n), mean_reward=float(m))
                for n, m in zip(self.leaf_pulls, self.leaf_means)]


@dataclass
class PathSelection:
    period_node: TreeNode
    beamwidth_node: TreeNode | None
    swept_beams: tuple[int, ...]


def build_tree(periods_ms, sector_counts=None, beam_leaves: bool = False) -> TreeNode:
    """Period layer; optionally a beamwidth layer; optionally beam leaves."""
    root = TreeNode(Layer.PERIOD_ROOT, None)
    for p in periods_ms:
        pnode = TreeNode(Layer.PERIOD, p)
        if sector_counts is not None:
            for n_s in sector_counts:
                bnode = TreeNode(Layer.BEAMWIDTH, n_s)
                if beam_leaves:
                    bnode.children = [TreeNode(Layer.BEAM_LEAF, b) for b in range(n_s)]
                    bnode.leaf_pulls = np.zeros(n_s, dtype=np.int64)
                    bnode.leaf_means = np.zeros(n_s, dtype=np.float64)
                pnode.children.append(bnode)
        root.children.append(pnode)
    return root


_CHILD_LAYER = {Layer.PERIOD_ROOT: Layer.PERIOD, Layer.PERIOD: Layer.BEAMWIDTH,
                Layer.BEAMWIDTH: Layer.BEAM_LEAF}

_NODE_INDEX = {PolicyKind.UCB1: ucb1_index, PolicyKind.KLUCB: kl_ucb_index}


def select_child(node: TreeNode, node_policy: PolicyKind, rng: np.random.Generator) -> int:
    """Index-bandit step over the node's children; the local trial count is
    the children's pull sum, which equals the node's own visit count."""
    if not node.children:
        raise ValueError(f"{node.layer.value} node has no children to select from")
    for child in node.children:
        if child.layer is not _CHILD_LAYER[node.layer]:
            raise ValueError(f"{child.layer.value} child under {node.layer.value} node")
    index = _NODE_INDEX[node_policy]
    total = sum(c.stats.pulls for c in node.children)
    values = [math.inf if c.stats.pulls == 0 else index(c.stats, total)
              for c in node.children]
    return argmax_with_ties(values, rng)


def round_half_up(value: Fraction | float) -> int:
    if isinstance(value, Fraction):
        return math.floor(value + Fraction(1, 2))
    return math.floor(value + 0.5)


def select_path(tree: TreeNode, rng: np.random.Generator,
                node_policy: PolicyKind = PolicyKind.KLUCB,
                sweep_ratio: Fraction = Fraction(1),
                leaf_policy: PolicyKind = PolicyKind.UCB1) -> PathSelection:
    """Walk from the root to a period and (if present) a beamwidth node; when
    the beamwidth node carries beam leaves, pick the round(N_s * R) beams to
    sweep via best-K selection."""
    if tree.layer is not Layer.PERIOD_ROOT:
        raise ValueError("select_path expects the period root")
    period_node = tree.children[select_child(tree, node_policy, rng)]
    if not period_node.children:
        return PathSelection(period_node, None, ())
    beamwidth_node = period_node.children[select_child(period_node, node_policy, rng)]
    n_s = int(beamwidth_node.action_value)
    if beamwidth_node.leaf_pulls is None:
        swept = tuple(range(n_s))
    else:
        k = round_half_up(n_s * sweep_ratio)
        swept = select_best_k(beamwidth_node, k, rng, leaf_policy)
    return PathSelection(period_node, beamwidth_node, swept)


def select_best_k(node: TreeNode, k: int, rng: np.random.Generator,
                  leaf_policy: PolicyKind = PolicyKind.UCB1) -> tuple[int, ...]:
    """The k beams with the largest indices over per-beam binary feedback;
    boundary ties are broken uniformly at random, and unpulled beams carry a
    +inf sentinel so every beam is swept before pure exploitation."""
    if node.leaf_pulls is None:
        raise ValueError("node has no beam-leaf statistics")
    n = node.leaf_pulls.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    if leaf_policy is not PolicyKind.UCB1:
        raise ValueError("leaf layer supports UCB1 only")
    pulls = node.leaf_pulls
    total = int(pulls.sum())
    indices = np.full(n, np.inf)
    pulled = pulls > 0
    if total >= 1:
        indices[pulled] = node.leaf_means[pulled] + np.sqrt(
            2.0 * math.log(total) / pulls[pulled])
    kth = np.partition(indices, n - k)[n - k]
    above = np.flatnonzero(indices > kth)
    tied = np.flatnonzero(indices == kth)
    need = k - above.size
    if tied.size > need:
        pick = rng.choice(tied.size, size=need, replace=False)
        tied = tied[np.sort(pick)]
    return tuple(int(b) for b in np.sort(np.concatenate([above, tied])))


def update_leaf_stats(node: TreeNode, swept: np.ndarray, feedback: np.ndarray) -> None:
    """Running-mean update of the swept beams' binary feedback statistics."""
    node.leaf_pulls[swept] += 1
    node.leaf_means[swept] += (feedback - node.leaf_means[swept]) / node.leaf_pulls[swept]


def backpropagate(path: PathSelection, slot_reward: float,
                  per_beam_feedback: dict[int, int] | None = None) -> None:
    """Update the selected path's rate statistics and, for a swept leaf layer,
    each swept beam's binary feedback; untouched beams stay untouched."""
    if not 0.0 <= slot_reward <= 1.0:
        raise ValueError(f"slot reward {slot_reward} outside [0, 1]")
    path.period_node.stats.add(slot_reward)
    if path.beamwidth_node is not None:
        path.beamwidth_node.stats.add(slot_reward)
    if per_beam_feedback:
        node = path.beamwidth_node
        if node is None or node.leaf_pulls is None:
            raise ValueError("per-beam feedback without a beam-leaf layer")
        swept = set(path.swept_beams)
        extra = set(per_beam_feedback) - swept
        if extra:
            raise ValueError(f"feedback for beams not swept: {sorted(extra)}")
        beams = np.fromiter(per_beam_feedback.keys(), dtype=np.int64,
                            count=len(per_beam_feedback))
        bits = np.fromiter((float(v) for v in per_beam_feedback.values()),
                           dtype=np.float64, count=len(per_beam_feedback))
        if not np.isin(bits, (0.0, 1.0)).all():
            raise ValueError("per-beam feedback must be binary")
        update_leaf_stats(node, beams, bits)
