"""Make-24 arithmetic environment.

State is the multiset of remaining numbers (exact rationals). Each
combine[a op b] consumes two of them and appends the result; after the last
combination the episode ends with reward 1.0 exactly when 24 remains.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .. import solver24
from ..actions import ActionGrammar, ActionSample
from .base import Environment, EnvObservation, TaskError, TaskSpec

GRAMMAR = ActionGrammar(verbs=("combine",), thought_verbs=("think",))

_STEP_RE = re.compile(
    r"^\s*(-?\d+(?:/\d+)?)\s*([+\-*/×÷−])\s*(-?\d+(?:/\d+)?)\s*$"
)
_OP_ALIASES = {"×": "*", "÷": "/", "−": "-"}


def parse_step_argument(argument: str):
    """(a, op, b) from a combine argument, or None when malformed."""
    m = _STEP_RE.match(argument)
    if not m:
        return None
    try:
        a = Fraction(m.group(1))
        b = Fraction(m.group(3))
    except (ValueError, ZeroDivisionError):
        return None
    op = _OP_ALIASES.get(m.group(2), m.group(2))
    return a, op, b


def format_numbers(nums) -> str:
    return " ".join(str(n) for n in nums)


def question_text(numbers) -> str:
    listed = " ".join(str(n) for n in numbers)
    return (
        f"Use the numbers {listed} with + - * / to make 24. "
        "Each number must be used exactly once.\n"
        f"Remaining numbers: {listed}"
    )


class Game24Env(Environment):
    kind = "game24"
    grammar = GRAMMAR

    def __init__(self):
        super().__init__()
        self._nums = []

    def _do_reset(self, task: TaskSpec) -> EnvObservation:
        numbers = task.payload.get("numbers")
        if not isinstance(numbers, list) or len(numbers) < 2:
            raise TaskError("game24 payload needs a 'numbers' list of at least two values")
        try:
            self._nums = [Fraction(n) for n in numbers]
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise TaskError(f"bad number in game24 payload: {exc}") from exc
        return EnvObservation(f"Remaining numbers: {format_numbers(self._nums)}")

    def _apply(self, action: ActionSample) -> EnvObservation:
        step = parse_step_argument(action.argument or "")
        if step is None:
            return self.invalid()
        a, op, b = step
        pool = list(self._nums)
        if a not in pool:
            return self.invalid()
        pool.remove(a)
        if b not in pool:
            return self.invalid()
        pool.remove(b)
        result = solver24.apply_op(a, op, b)
        if result is None:
            return self.invalid()
        pool.append(result)
        self._nums = pool
        text = f"Remaining numbers: {format_numbers(self._nums)}"
        if len(self._nums) == 1:
            reward = 1.0 if self._nums[0] == solver24.TARGET else 0.0
            return EnvObservation(text, terminal=True, reward=reward)
        return EnvObservation(text)

    def _state(self) -> dict:
        return {"nums": [[n.numerator, n.denominator] for n in self._nums]}

    def _load_state(self, state: dict) -> None:
        self._nums = [Fraction(n, d) for n, d in state["nums"]]
