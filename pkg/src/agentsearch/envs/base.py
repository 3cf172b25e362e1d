"""Environment contract shared by the bundled task simulators.

An environment is reset with a TaskSpec, stepped with parsed ActionSamples,
and can serialize its full state to an opaque snapshot token and restore it
later. Restoring a snapshot and replaying the same actions must reproduce
the same observations byte for byte; the search engine leans on that to
revert to arbitrary tree nodes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..actions import ActionGrammar, ActionSample

INVALID = "Invalid action!"


@dataclass(frozen=True)
class EnvObservation:
    text: str
    terminal: bool = False
    reward: Optional[float] = None

    def __post_init__(self):
        if self.terminal and self.reward is None:
            raise ValueError("terminal observation requires a reward")
        if not self.terminal and self.reward is not None:
            raise ValueError("non-terminal observation must not carry a reward")


@dataclass(frozen=True)
class EnvSnapshot:
    kind: str
    task_id: str
    token: str


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    kind: str
    payload: dict = field(default_factory=dict)


class TaskError(ValueError):
    """Malformed task file or payload."""


class Environment:
    """Base class wiring the step preamble all environments share."""

    kind: str = ""
    grammar: ActionGrammar = ActionGrammar()

    def __init__(self):
        self._task: Optional[TaskSpec] = None
        self._done = False

    # -- subclass hooks -------------------------------------------------
    def _do_reset(self, task: TaskSpec) -> EnvObservation:
        raise NotImplementedError

    def _apply(self, action: ActionSample) -> EnvObservation:
        raise NotImplementedError

    def _state(self) -> dict:
        raise NotImplementedError

    def _load_state(self, state: dict) -> None:
        raise NotImplementedError

    # -- public API ------------------------------------------------------
    def reset(self, task: TaskSpec) -> EnvObservation:
        if task.kind != self.kind:
            raise TaskError(f"task kind {task.kind!r} does not fit env {self.kind!r}")
        self._task = task
        self._done = False
        return self._do_reset(task)

    def step(self, action: ActionSample) -> EnvObservation:
        if self._task is None:
            raise RuntimeError("step() before reset()")
        if self._done:
            raise RuntimeError("episode already ended; reset() or restore() first")
        if action.kind == "thought":
            return EnvObservation("OK.")
        if action.verb not in self.grammar.verbs:
            return EnvObservation(INVALID)
        obs = self._apply(action)
        if obs.terminal:
            self._done = True
        return obs

    def snapshot(self) -> EnvSnapshot:
        if self._task is None:
            raise RuntimeError("snapshot() before reset()")
        token = json.dumps(
            {"done": self._done, "state": self._state()},
            sort_keys=True,
            separators=(",", ":"),
        )
        return EnvSnapshot(kind=self.kind, task_id=self._task.task_id, token=token)

    def restore(self, snap: EnvSnapshot) -> None:
        if self._task is None:
            raise RuntimeError("restore() before reset()")
        if snap.kind != self.kind or snap.task_id != self._task.task_id:
            raise ValueError("snapshot belongs to a different environment or task")
        data = json.loads(snap.token)
        self._done = data["done"]
        self._load_state(data["state"])

    @staticmethod
    def invalid() -> EnvObservation:
        return EnvObservation(INVALID)


def load_task(path) -> TaskSpec:
    """Read one task JSON file; sibling corpus/catalog files referenced by
    `corpus_file` / `catalog_file` are inlined into the payload."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise TaskError(f"cannot read task file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise TaskError(f"task file {path} must hold a JSON object")
    kind = data.get("kind")
    if not isinstance(kind, str) or not kind:
        raise TaskError(f"task file {path} is missing a 'kind'")
    task_id = data.get("task_id") or path.stem
    payload = dict(data.get("payload") or {})
    for ref_key, inline_key in (("corpus_file", "corpus"), ("catalog_file", "catalog")):
        ref = payload.pop(ref_key, None)
        if ref is not None and inline_key not in payload:
            ref_path = (path.parent / ref).resolve()
            try:
                payload[inline_key] = json.loads(ref_path.read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise TaskError(f"cannot read {ref_key} {ref_path}: {exc}") from exc
    return TaskSpec(task_id=str(task_id), kind=kind, payload=payload)
