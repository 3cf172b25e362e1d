"""Search tree core: nodes, UCT selection, expansion bookkeeping, backpropagation.

Node statistics follow the running-mean rule: visits start at zero, and each
backpropagation of reward r through a node does

    N <- N + 1
    V <- (V * (N - 1) + r) / N

so V is always the mean of the rewards backpropagated through the node. An
evaluation step may seed V before the first backpropagation; the update above
discards that seed at N=1 by construction, so the mean property is preserved.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, TYPE_CHECKING

from .actions import ActionSample

if TYPE_CHECKING:
    from .valuation import ValueScore

NodeId = int


@dataclass
class Node:
    id: NodeId
    parent: Optional[NodeId]
    action: Optional[ActionSample]
    observation: Optional[str]
    depth: int
    value: float = 0.0
    visits: int = 0
    is_terminal: bool = False
    reward: Optional[float] = None
    eval_score: Optional["ValueScore"] = None
    children: list = field(default_factory=list)
    # True when this node can never be expanded (terminal, or a non-terminal
    # leaf pinned at the depth limit). Exhaustion of inner nodes is tracked
    # separately because it depends on the whole subtree.
    unexpandable: bool = False
    exhausted: bool = False


@dataclass
class ChildSpec:
    """What expansion learned about one proposed child."""

    action: ActionSample
    observation: Optional[str]
    is_terminal: bool = False
    reward: Optional[float] = None


@dataclass
class StateContext:
    """Replayable state of one node: the task input plus every (action,
    observation) pair along the path from the root. len(steps) == depth."""

    input: str
    steps: list = field(default_factory=list)
    reflections: list = field(default_factory=list)


@dataclass
class SearchTree:
    input: str
    nodes: list = field(default_factory=list)

    @classmethod
    def create(cls, input_text: str, root_observation: Optional[str] = None) -> "SearchTree":
        tree = cls(input=input_text)
        tree.nodes.append(
            Node(id=0, parent=None, action=None, observation=root_observation, depth=0)
        )
        return tree

    @property
    def root(self) -> Node:
        return self.nodes[0]

    def node(self, node_id: NodeId) -> Node:
        return self.nodes[node_id]

    def path_to_root(self, node_id: NodeId) -> list:
        """Node ids from the given node up to and including the root."""
        path = []
        cur: Optional[int] = node_id
        while cur is not None:
            path.append(cur)
            cur = self.nodes[cur].parent
        return path


class TreeExhausted(RuntimeError):
    """Every reachable leaf is terminal or depth-capped; nothing to expand."""


def uct(value: float, visits: int, parent_visits: int, w: float) -> float:
    """Upper confidence score: value + w * sqrt(ln(parent_visits) / visits).

    Requires visits >= 1 and parent_visits >= 1; zero-visit children are
    handled by the caller's unvisited-first rule, never by this formula.
    """
    if visits < 1:
        raise ValueError("uct undefined for unvisited node (visits < 1)")
    if parent_visits < 1:
        raise ValueError("uct undefined for unvisited parent (parent_visits < 1)")
    return value + w * math.sqrt(math.log(parent_visits) / visits)


def select_path(tree: SearchTree, w: float) -> Optional[NodeId]:
    """Descend from the root by UCT and return an expandable leaf id.

    At each level only non-exhausted children are considered. Unvisited
    children (visits = 0 under zero-initialization, whether or not a value
    seed is present) are selected before any visited sibling, in creation
    order; otherwise the child maximizing uct() wins, ties broken by lowest
    creation order. Returns None when the whole tree is exhausted.
    """
    current = tree.root
    if current.exhausted:
        return None
    while current.children:
        candidates = [tree.node(c) for c in current.children if not tree.node(c).exhausted]
        if not candidates:
            # Should not happen if exhaustion flags are maintained, but keep
            # the walk total rather than looping.
            return None
        unvisited = [c for c in candidates if c.visits == 0]
        if unvisited:
            current = unvisited[0]
            continue
        parent_visits = max(1, current.visits)
        best = None
        best_score = -math.inf
        for child in candidates:
            score = uct(child.value, child.visits, parent_visits, w)
            if score > best_score:
                best = child
                best_score = score
        current = best
    return current.id


def add_children(tree: SearchTree, parent_id: NodeId, specs: Iterable[ChildSpec]) -> list:
    """Append one child per spec, in order, and return the new ids.

    Duplicate actions are retained as distinct nodes (sibling frequency is a
    signal for the value function). Expanding a terminal node is an error.
    """
    parent = tree.node(parent_id)
    if parent.is_terminal:
        raise ValueError(f"cannot expand terminal node {parent_id}")
    created = []
    for spec in specs:
        if spec.is_terminal and spec.reward is None:
            raise ValueError("terminal child requires a reward")
        if not spec.is_terminal and spec.reward is not None:
            raise ValueError("non-terminal child must not carry a reward")
        node = Node(
            id=len(tree.nodes),
            parent=parent_id,
            action=spec.action,
            observation=spec.observation,
            depth=parent.depth + 1,
            is_terminal=spec.is_terminal,
            reward=spec.reward,
        )
        if spec.is_terminal:
            node.unexpandable = True
            node.exhausted = True
        tree.nodes.append(node)
        parent.children.append(node.id)
        created.append(node.id)
    _propagate_exhaustion(tree, parent_id)
    return created


def mark_unexpandable(tree: SearchTree, node_id: NodeId) -> None:
    """Pin a leaf (e.g. a non-terminal node at the depth limit) so selection
    never returns it, and update ancestor exhaustion."""
    node = tree.node(node_id)
    node.unexpandable = True
    node.exhausted = True
    if node.parent is not None:
        _propagate_exhaustion(tree, node.parent)


def _propagate_exhaustion(tree: SearchTree, node_id: NodeId) -> None:
    cur: Optional[int] = node_id
    while cur is not None:
        node = tree.node(cur)
        if node.children and all(tree.node(c).exhausted for c in node.children):
            if not node.exhausted:
                node.exhausted = True
                cur = node.parent
                continue
        break


def backpropagate(tree: SearchTree, leaf_id: NodeId, reward: float) -> None:
    """Fold reward into every node from the leaf up to the root."""
    for node_id in tree.path_to_root(leaf_id):
        node = tree.node(node_id)
        node.visits += 1
        node.value = (node.value * (node.visits - 1) + reward) / node.visits


def reconstruct_context(tree: SearchTree, node_id: NodeId, reflections: Optional[list] = None) -> StateContext:
    """Build the textual state of a node: every (action, observation) pair
    from the root down, plus any reflection texts to surface in prompts."""
    steps = []
    for nid in reversed(tree.path_to_root(node_id)):
        node = tree.node(nid)
        if node.action is not None:
            steps.append((node.action, node.observation))
    return StateContext(input=tree.input, steps=steps, reflections=list(reflections or []))


def dump_tree(tree: SearchTree) -> list:
    """One plain dict per node, in id order, for the line-delimited dump."""
    rows = []
    for node in tree.nodes:
        rows.append(
            {
                "id": node.id,
                "parent": node.parent,
                "action": node.action.raw if node.action is not None else None,
                "observation": node.observation,
                "value": node.value,
                "visits": node.visits,
                "terminal": node.is_terminal,
                "reward": node.reward,
            }
        )
    return rows


def tree_to_jsonl(tree: SearchTree) -> str:
    lines = [json.dumps(row, sort_keys=True, separators=(",", ":")) for row in dump_tree(tree)]
    return "\n".join(lines) + "\n"
