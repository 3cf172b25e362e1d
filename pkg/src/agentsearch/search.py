"""Search engine over textual agent trajectories.

Four variants share one expansion/valuation substrate:

    mcts          full tree search: UCT selection, n-wide expansion, value
                  scoring, greedy simulation to a terminal state, running-mean
                  backpropagation, and failure reflections across episodes
    dfs_prune     depth-first search that discards children scoring below a
                  threshold; no visit statistics, no backpropagation
    best_of_k     k independent greedy rollouts, one proposal per step
    greedy_retry  best_of_k plus failure reflections carried across rollouts

A run terminates as soon as any trajectory reaches reward 1.0 (that reward is
still backpropagated first, where the variant backpropagates at all), when the
budget k is spent, or when the tree has no expandable leaf left.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, replace
from typing import Optional

from .actions import ActionSample, parse_action
from .backends import BackendError, PolicyBackend
from .envs import (
    DEFAULT_DEPTH,
    DEFAULT_LAMBDA,
    DEFAULT_SKIP_SIMULATION,
    Environment,
    TaskSpec,
    make_env,
    task_input,
)
from .envs.base import INVALID
from .prompts import assemble_prompt, render_acting_steps
from .reflection import ReflectionStore, generate_reflection, inject
from .seeding import stable_seed
from .templates import TemplateSet
from .trace import TraceWriter
from .tree import (
    ChildSpec,
    Node,
    SearchTree,
    add_children,
    backpropagate,
    mark_unexpandable,
    reconstruct_context,
    select_path,
)
from .valuation import VALUE_MODES, evaluate_children

ENGINE_VERSION = "0.1.0"

VARIANTS = ("mcts", "dfs_prune", "best_of_k", "greedy_retry")
PROMPT_STYLES = ("acting", "reasoning")
ROLES = ("policy", "value", "reflection")

# Variants that generate and inject failure reflections.
_REFLECTIVE_VARIANTS = ("mcts", "greedy_retry")


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for one search run.

    depth_limit, lam, and skip_simulation default to None, meaning "use the
    environment kind's default"; resolved() fills them in and validates.
    """

    n: int = 5
    k: int = 50
    depth_limit: Optional[int] = None
    w: float = 1.0
    lam: Optional[float] = None
    value_mode: str = "full"
    reflection_enabled: bool = True
    reflection_limit: int = 4
    skip_simulation: Optional[bool] = None
    variant: str = "mcts"
    prune_threshold: float = 0.4
    prompt_style: str = "acting"
    inject_trajectories_into_agent_prompts: bool = False
    seed: int = 0

    def resolved(self, kind: str) -> "SearchConfig":
        if kind not in DEFAULT_DEPTH:
            raise ValueError(f"unknown environment kind {kind!r}")
        cfg = self
        if cfg.depth_limit is None:
            cfg = replace(cfg, depth_limit=DEFAULT_DEPTH[kind])
        if cfg.lam is None:
            cfg = replace(cfg, lam=DEFAULT_LAMBDA[kind])
        if cfg.skip_simulation is None:
            cfg = replace(cfg, skip_simulation=DEFAULT_SKIP_SIMULATION[kind])
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.value_mode not in VALUE_MODES:
            raise ValueError(f"unknown value mode {self.value_mode!r}")
        if self.prompt_style not in PROMPT_STYLES:
            raise ValueError(f"unknown prompt style {self.prompt_style!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.depth_limit is not None and self.depth_limit < 1:
            raise ValueError("depth_limit must be >= 1")
        if self.w < 0:
            raise ValueError("exploration weight w must be >= 0")
        if self.lam is not None and not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must be in [0, 1]")
        if not 0.0 <= self.prune_threshold <= 1.0:
            raise ValueError("prune_threshold must be in [0, 1]")
        if self.reflection_limit < 0:
            raise ValueError("reflection_limit must be >= 0")


@dataclass
class BackendSet:
    """Backends by role; value and reflection fall back to the policy one."""

    policy: PolicyBackend
    value: Optional[PolicyBackend] = None
    reflection: Optional[PolicyBackend] = None


@dataclass
class SearchResult:
    task_id: str
    task_kind: str
    success: bool
    best_reward: float
    best_node: int
    best_trajectory: str
    episodes_used: int
    nodes_expanded: int
    backend_calls: dict
    tree: SearchTree
    reflections: list
    config: SearchConfig
    terminate_reason: str

    @property
    def proposals(self) -> int:
        return self.backend_calls["policy"]["proposals"]

    def summary(self) -> dict:
        return {
            "task_id": self.task_id,
            "kind": self.task_kind,
            "variant": self.config.variant,
            "success": self.success,
            "best_reward": self.best_reward,
            "episodes": self.episodes_used,
            "expansions": self.nodes_expanded,
            "nodes": len(self.tree.nodes),
            "policy_calls": self.backend_calls["policy"]["calls"],
            "policy_proposals": self.backend_calls["policy"]["proposals"],
            "value_calls": self.backend_calls["value"]["calls"],
            "reflection_calls": self.backend_calls["reflection"]["calls"],
            "reflections": len(self.reflections),
            "terminate_reason": self.terminate_reason,
        }


class _CountingBackend:
    """Counts calls and requested proposals for one backend role."""

    def __init__(self, inner: PolicyBackend, counters: dict, role: str):
        self.inner = inner
        self.counters = counters
        self.role = role

    def propose(self, prompt: str, n: int, seed: int) -> list:
        entry = self.counters[self.role]
        entry["calls"] += 1
        entry["proposals"] += n
        return self.inner.propose(prompt, n, seed)


def run_search(
    task: TaskSpec,
    backends: BackendSet,
    templates: TemplateSet,
    config: Optional[SearchConfig] = None,
    trace: Optional[TraceWriter] = None,
    reflection_store: Optional[ReflectionStore] = None,
    env: Optional[Environment] = None,
) -> SearchResult:
    """Run one search over a task and return the outcome.

    trace and reflection_store may be shared across runs; fresh private ones
    are created when omitted. An explicit env overrides the registry lookup.
    """
    cfg = (config or SearchConfig()).resolved(task.kind)
    engine = _Engine(
        task,
        backends,
        templates,
        cfg,
        trace if trace is not None else TraceWriter(),
        reflection_store if reflection_store is not None else ReflectionStore(),
        env,
    )
    return engine.run()


class _Engine:
    def __init__(self, task, backends, templates, cfg, trace, store, env=None):
        self.task = task
        self.cfg = cfg
        self.trace = trace
        self.store = store
        self.env = env if env is not None else make_env(task.kind)
        self.counters = {role: {"calls": 0, "proposals": 0} for role in ROLES}
        self.policy = _CountingBackend(backends.policy, self.counters, "policy")
        self.value = _CountingBackend(backends.value or backends.policy, self.counters, "value")
        self.reflector = _CountingBackend(
            backends.reflection or backends.policy, self.counters, "reflection"
        )
        self.base_act = replace(
            templates.act,
            include_failed_trajectories=cfg.inject_trajectories_into_agent_prompts,
        )
        self.base_value = templates.value
        self.reflect_bundle = templates.reflect
        self.act_bundle = self.base_act
        self.value_bundle = self.base_value
        obs = self.env.reset(task)
        self.tree = SearchTree.create(task_input(task), root_observation=obs.text)
        self.snapshots = {0: self.env.snapshot()}
        self.new_reflections = []
        self.expansions = 0
        self.episodes = 0
        self.error_episodes = 0

    # -- shared machinery -------------------------------------------------

    def _refresh_bundles(self) -> None:
        if not self.cfg.reflection_enabled or self.cfg.variant not in _REFLECTIVE_VARIANTS:
            self.act_bundle = self.base_act
            self.value_bundle = self.base_value
            return
        records = self.store.select(self.task.task_id, self.cfg.reflection_limit)
        self.act_bundle = inject(self.base_act, records)
        self.value_bundle = inject(self.base_value, records)

    def _apply_proposal(self, parent_id: int, text: str):
        """Parse one proposal and play it in the environment, from the
        parent's saved state. Unparseable texts become thought nodes with an
        invalid-action observation and leave the state untouched."""
        try:
            action = parse_action(text, self.env.grammar)
        except ValueError:
            raw = text if text and text.strip() else "(empty proposal)"
            self.env.restore(self.snapshots[parent_id])
            spec = ChildSpec(action=ActionSample(kind="thought", raw=raw), observation=INVALID)
            return spec, self.env.snapshot()
        self.env.restore(self.snapshots[parent_id])
        obs = self.env.step(action)
        spec = ChildSpec(
            action=action,
            observation=obs.text,
            is_terminal=obs.terminal,
            reward=obs.reward,
        )
        return spec, self.env.snapshot()

    def _expand(self, parent_id: int, episode: int, width: Optional[int] = None) -> list:
        width = width if width is not None else self.cfg.n
        ctx = reconstruct_context(self.tree, parent_id)
        prompt = assemble_prompt(self.act_bundle, ctx, self.cfg.prompt_style)
        seed = stable_seed(self.cfg.seed, self.task.task_id, "policy", episode, parent_id)
        texts = self.policy.propose(prompt, width, seed)
        if not texts:
            raise BackendError("policy backend returned no proposals")
        pairs = [self._apply_proposal(parent_id, text) for text in texts]
        ids = add_children(self.tree, parent_id, [spec for spec, _ in pairs])
        for node_id, (_, snap) in zip(ids, pairs):
            self.snapshots[node_id] = snap
        for node_id in ids:
            node = self.tree.node(node_id)
            if not node.is_terminal and node.depth >= self.cfg.depth_limit:
                mark_unexpandable(self.tree, node_id)
        self.expansions += 1
        self.trace.emit(
            "expand",
            episode=episode,
            parent=parent_id,
            prompt=self.trace.prompt_field(prompt),
            children=[
                {
                    "id": node_id,
                    "action": self.tree.node(node_id).action.raw,
                    "observation": self.tree.node(node_id).observation,
                    "terminal": self.tree.node(node_id).is_terminal,
                    "reward": self.tree.node(node_id).reward,
                }
                for node_id in ids
            ],
        )
        return ids

    def _evaluate(self, parent_id: int, episode: int) -> None:
        if self.cfg.value_mode == "none":
            return
        parent = self.tree.node(parent_id)
        fresh = [c for c in parent.children if self.tree.node(c).eval_score is None]
        evaluate_children(
            self.tree,
            parent_id,
            self.cfg.value_mode,
            self.cfg.lam,
            bundle=self.value_bundle,
            backend=self.value,
            seed=stable_seed(self.cfg.seed, self.task.task_id, "value"),
        )
        scores = []
        for child_id in fresh:
            score = self.tree.node(child_id).eval_score
            if score is None:
                continue
            scores.append(
                {
                    "id": child_id,
                    "lm": score.lm_score,
                    "sc": score.sc_score,
                    "combined": score.combined,
                    "flagged": score.flagged,
                }
            )
        self.trace.emit("evaluate", episode=episode, parent=parent_id, scores=scores)

    def _backprop(self, leaf_id: int, reward: float, episode: int) -> None:
        path = self.tree.path_to_root(leaf_id)
        backpropagate(self.tree, leaf_id, reward)
        self.trace.emit("backprop", episode=episode, leaf=leaf_id, reward=reward, path=path)

    def _winning_child(self, child_ids: list) -> Optional[Node]:
        for child_id in child_ids:
            node = self.tree.node(child_id)
            if node.is_terminal and node.reward is not None and node.reward >= 1.0:
                return node
        return None

    def _choose(self, child_ids: list) -> Node:
        nodes = [self.tree.node(c) for c in child_ids]
        return max(nodes, key=lambda c: (c.value, -c.id))

    def _maybe_reflect(self, node_id: int, reward: float, episode: int) -> None:
        if not self.cfg.reflection_enabled or self.cfg.variant not in _REFLECTIVE_VARIANTS:
            return
        node = self.tree.node(node_id)
        if not node.is_terminal or reward >= 1.0:
            return
        ctx = reconstruct_context(self.tree, node_id)
        text = generate_reflection(
            ctx,
            reward,
            self.reflect_bundle,
            self.reflector,
            seed=stable_seed(self.cfg.seed, self.task.task_id, "reflection", episode),
        )
        if not text:
            return
        record = self.store.record(
            self.task.task_id, render_acting_steps(ctx), reward, text, episode
        )
        self.new_reflections.append(record)
        self.trace.emit("reflect", episode=episode, node=node_id, reward=reward, reflection=text)

    # -- mcts -------------------------------------------------------------

    def _simulate(self, child_ids: list, episode: int):
        """Greedy descent from the best fresh child to a terminal or the
        depth limit. Returns (end node, reward); truncation scores 0."""
        current = self._choose(child_ids)
        self.trace.emit("simulate_step", episode=episode, node=current.id, depth=current.depth)
        while not current.is_terminal and current.depth < self.cfg.depth_limit:
            ids = self._expand(current.id, episode)
            winner = self._winning_child(ids)
            if winner is None:
                self._evaluate(current.id, episode)
                current = self._choose(ids)
            else:
                current = winner
            self.trace.emit(
                "simulate_step", episode=episode, node=current.id, depth=current.depth
            )
        reward = float(current.reward) if current.is_terminal else 0.0
        return current, reward

    def _resolve_skip(self, child_ids: list):
        """Skip-simulation scoring: the best terminal child's reward, or 0
        through the best non-terminal child when nothing terminated."""
        nodes = [self.tree.node(c) for c in child_ids]
        terminal = [c for c in nodes if c.is_terminal and c.reward is not None]
        if terminal:
            best = max(terminal, key=lambda c: (c.reward, c.value, -c.id))
            return best, float(best.reward)
        best = max(nodes, key=lambda c: (c.value, -c.id))
        return best, 0.0

    def _episode(self, episode: int) -> Optional[str]:
        """One full search iteration. Returns a run-ending reason or None."""
        self._refresh_bundles()
        self.trace.emit("episode_start", episode=episode)
        leaf_id = select_path(self.tree, self.cfg.w)
        if leaf_id is None:
            self.trace.emit("episode_end", episode=episode, reward=None, note="tree exhausted")
            return "tree_exhausted"
        self.trace.emit(
            "select",
            episode=episode,
            node=leaf_id,
            path=list(reversed(self.tree.path_to_root(leaf_id))),
        )
        try:
            child_ids = self._expand(leaf_id, episode)
        except BackendError as exc:
            self.error_episodes += 1
            self.trace.emit("episode_end", episode=episode, reward=None, error=str(exc))
            return None
        winner = self._winning_child(child_ids)
        if winner is not None:
            self._backprop(winner.id, float(winner.reward), episode)
            self.trace.emit("episode_end", episode=episode, reward=winner.reward)
            return "success"
        self._evaluate(leaf_id, episode)
        if self.cfg.skip_simulation:
            end, reward = self._resolve_skip(child_ids)
        else:
            try:
                end, reward = self._simulate(child_ids, episode)
            except BackendError as exc:
                self.error_episodes += 1
                self.trace.emit("episode_end", episode=episode, reward=None, error=str(exc))
                return None
        self._backprop(end.id, reward, episode)
        if end.is_terminal and reward >= 1.0:
            self.trace.emit("episode_end", episode=episode, reward=reward)
            return "success"
        self._maybe_reflect(end.id, reward, episode)
        self.trace.emit("episode_end", episode=episode, reward=reward)
        return None

    def _run_mcts(self) -> str:
        for episode in range(1, self.cfg.k + 1):
            self.episodes = episode
            outcome = self._episode(episode)
            if outcome is not None:
                return outcome
        return "budget_exhausted"

    # -- dfs with pruning --------------------------------------------------

    def _run_dfs(self) -> str:
        stack = [0]
        while stack:
            if self.expansions >= self.cfg.k:
                return "budget_exhausted"
            node_id = stack.pop()
            tag = self.expansions
            try:
                ids = self._expand(node_id, tag)
            except BackendError:
                self.error_episodes += 1
                continue
            if self._winning_child(ids) is not None:
                return "success"
            self._evaluate(node_id, tag)
            survivors = []
            for child_id in ids:
                child = self.tree.node(child_id)
                if child.is_terminal or child.depth >= self.cfg.depth_limit:
                    continue
                # With no value function there is nothing to prune on.
                if self.cfg.value_mode != "none" and child.value < self.cfg.prune_threshold:
                    continue
                survivors.append(child)
            survivors.sort(key=lambda c: (c.value, -c.id))  # best popped first
            stack.extend(c.id for c in survivors)
            kept = {c.id for c in survivors}
            self.trace.emit(
                "prune",
                parent=node_id,
                kept=sorted(kept),
                dropped=[c for c in ids if c not in kept],
            )
        return "tree_exhausted"

    # -- greedy rollouts ---------------------------------------------------

    def _run_rollouts(self) -> str:
        for episode in range(1, self.cfg.k + 1):
            self.episodes = episode
            self._refresh_bundles()
            self.trace.emit("episode_start", episode=episode)
            current = self.tree.root
            error = None
            while not current.is_terminal and current.depth < self.cfg.depth_limit:
                try:
                    ids = self._expand(current.id, episode, width=1)
                except BackendError as exc:
                    error = str(exc)
                    break
                current = self.tree.node(ids[0])
            if error is not None:
                self.error_episodes += 1
                self.trace.emit("episode_end", episode=episode, reward=None, error=error)
                continue
            reward = float(current.reward) if current.is_terminal else 0.0
            if current.is_terminal and reward >= 1.0:
                self.trace.emit("episode_end", episode=episode, reward=reward)
                return "success"
            self._maybe_reflect(current.id, reward, episode)
            self.trace.emit("episode_end", episode=episode, reward=reward)
        return "budget_exhausted"

    # -- orchestration ------------------------------------------------------

    def _pick_best(self):
        terminals = [
            n for n in self.tree.nodes if n.is_terminal and n.reward is not None
        ]
        if terminals:
            best = max(terminals, key=lambda n: (n.reward, n.value, -n.id))
            return best, float(best.reward)
        best = max(self.tree.nodes, key=lambda n: (n.value, -n.id))
        return best, 0.0

    def run(self) -> SearchResult:
        self.trace.emit(
            "run_start",
            task_id=self.task.task_id,
            kind=self.task.kind,
            engine_version=ENGINE_VERSION,
            config=dataclasses.asdict(self.cfg),
        )
        if self.cfg.variant == "mcts":
            reason = self._run_mcts()
        elif self.cfg.variant == "dfs_prune":
            reason = self._run_dfs()
        else:
            reason = self._run_rollouts()
        if self.cfg.variant == "dfs_prune":
            self.episodes = self.expansions
        if (
            reason == "budget_exhausted"
            and self.error_episodes
            and self.error_episodes == self.episodes
        ):
            reason = "backend_error"
        return self._finalize(reason)

    def _finalize(self, reason: str) -> SearchResult:
        best, best_reward = self._pick_best()
        success = best.is_terminal and best.reward is not None and best.reward >= 1.0
        trajectory = render_acting_steps(reconstruct_context(self.tree, best.id))
        self.trace.emit(
            "terminate",
            reason=reason,
            success=success,
            best_node=best.id,
            best_reward=best_reward,
            episodes=self.episodes,
            nodes=len(self.tree.nodes),
            expansions=self.expansions,
            counters=self.counters,
            node_stats=[
                {"id": n.id, "value": n.value, "visits": n.visits} for n in self.tree.nodes
            ],
        )
        return SearchResult(
            task_id=self.task.task_id,
            task_kind=self.task.kind,
            success=success,
            best_reward=best_reward,
            best_node=best.id,
            best_trajectory=trajectory,
            episodes_used=self.episodes,
            nodes_expanded=self.expansions,
            backend_calls=self.counters,
            tree=self.tree,
            reflections=list(self.new_reflections),
            config=self.cfg,
            terminate_reason=reason,
        )
