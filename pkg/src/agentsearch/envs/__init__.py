"""Bundled environments and per-kind defaults."""

from __future__ import annotations

from .base import Environment, EnvObservation, EnvSnapshot, TaskError, TaskSpec, load_task
from .docqa import DocQAEnv
from .game24 import Game24Env
from .shop import ShopEnv
from .solution import SolutionEnv

REGISTRY = {
    Game24Env.kind: Game24Env,
    DocQAEnv.kind: DocQAEnv,
    ShopEnv.kind: ShopEnv,
    SolutionEnv.kind: SolutionEnv,
}

# Search depth, value-mixing weight, and simulation mode defaults per kind.
DEFAULT_DEPTH = {"game24": 5, "docqa": 7, "shop": 15, "solution": 8}
DEFAULT_LAMBDA = {"game24": 0.5, "docqa": 0.5, "shop": 0.8, "solution": 0.8}
DEFAULT_SKIP_SIMULATION = {"game24": False, "docqa": False, "shop": False, "solution": True}


def make_env(kind: str) -> Environment:
    try:
        return REGISTRY[kind]()
    except KeyError:
        raise TaskError(f"unknown environment kind {kind!r}") from None


def task_input(task: TaskSpec) -> str:
    """The question/instruction text a task poses, used as the tree root input."""
    if task.kind == "game24":
        from .game24 import question_text

        return question_text(task.payload.get("numbers", []))
    key = {"docqa": "question", "shop": "instruction", "solution": "statement"}.get(task.kind)
    if key is None:
        raise TaskError(f"unknown environment kind {task.kind!r}")
    text = task.payload.get(key)
    if not isinstance(text, str) or not text:
        raise TaskError(f"{task.kind} payload needs a {key!r} string")
    return text


__all__ = [
    "Environment",
    "EnvObservation",
    "EnvSnapshot",
    "TaskError",
    "TaskSpec",
    "load_task",
    "make_env",
    "task_input",
    "REGISTRY",
    "DEFAULT_DEPTH",
    "DEFAULT_LAMBDA",
    "DEFAULT_SKIP_SIMULATION",
    "Game24Env",
    "DocQAEnv",
    "ShopEnv",
    "SolutionEnv",
]
