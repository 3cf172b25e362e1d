"""Proposal backends.

Every backend implements one method:

    propose(prompt: str, n: int, seed: int) -> list[str]

returning exactly n completion texts. Deterministic backends return the same
list for the same (prompt, n, seed). Backends must be safe to call from
several worker threads; the scripted backend serializes internally so its
cycling stays deterministic under concurrency.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Protocol, runtime_checkable

from . import solver24
from .seeding import stable_seed


class BackendError(RuntimeError):
    """A backend could not produce completions (bad state, exhausted retries)."""


@runtime_checkable
class PolicyBackend(Protocol):
    def propose(self, prompt: str, n: int, seed: int) -> list: ...


@dataclass
class ScriptRule:
    """Either a literal substring match or an anchored/partial regex."""

    contains: Optional[str] = None
    pattern: Optional[str] = None
    responses: list = field(default_factory=list)

    def matches(self, prompt: str) -> bool:
        if self.contains is not None:
            return self.contains in prompt
        if self.pattern is not None:
            return re.search(self.pattern, prompt) is not None
        return False


class ScriptedBackend:
    """Deterministic canned backend for tests and plumbing checks.

    The first rule whose matcher hits the prompt answers it, handing out its
    next n responses and cycling through the list. Repeating an identical
    (prompt, n, seed) call replays the exact same window instead of advancing
    the cursor, so deterministic-backend semantics hold; a novel call moves
    the cursor forward. Prompts matching no rule get the default response.
    """

    def __init__(self, rules: Optional[list] = None, default: str = "think[no scripted response]"):
        self.rules = list(rules or [])
        self.default = default
        self._cursors = [0] * len(self.rules)
        self._memo = {}
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path) -> "ScriptedBackend":
        data = json.loads(Path(path).read_text())
        rules = []
        for raw in data.get("rules", []):
            rules.append(
                ScriptRule(
                    contains=raw.get("contains"),
                    pattern=raw.get("pattern"),
                    responses=list(raw.get("responses", [])),
                )
            )
        return cls(rules, default=data.get("default", "think[no scripted response]"))

    def propose(self, prompt: str, n: int, seed: int) -> list:
        if n < 1:
            raise ValueError("n must be >= 1")
        with self._lock:
            for index, rule in enumerate(self.rules):
                if not rule.matches(prompt):
                    continue
                if not rule.responses:
                    break
                key = (index, prompt, n, seed)
                if key in self._memo:
                    return list(self._memo[key])
                start = self._cursors[index]
                out = [rule.responses[(start + i) % len(rule.responses)] for i in range(n)]
                self._cursors[index] = (start + n) % len(rule.responses)
                self._memo[key] = out
                return list(out)
            return [self.default] * n


def static_backend(text: str) -> ScriptedBackend:
    """Backend that answers everything with one fixed text."""
    return ScriptedBackend([], default=text)


class HttpChatBackend:
    """Chat-completions client with retry and an on-disk response cache.

    Responses are cached keyed by a hash of (prompt, n, model, temperature),
    so repeating a run against a warm cache makes no network calls. Transport
    errors and 5xx responses are retried up to `retries` times with
    exponential backoff; other HTTP errors raise BackendError immediately.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        temperature: float = 0.7,
        api_key_env: str = "AGENTSEARCH_API_KEY",
        cache_dir=None,
        max_tokens: int = 256,
        timeout: float = 60.0,
        retries: int = 3,
        backoff: float = 0.5,
        session=None,
    ):
        import requests

        self.endpoint = endpoint
        self.model = model
        self.temperature = temperature
        self.api_key_env = api_key_env
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.max_tokens = max_tokens
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._session = session or requests.Session()
        self._lock = threading.Lock()
        if self.cache_dir:
            self.cache_dir.mkdir(parents=True, exist_ok=True)

    def _cache_key(self, prompt: str, n: int) -> str:
        blob = json.dumps(
            {"prompt": prompt, "n": n, "model": self.model, "temperature": self.temperature},
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def _cache_path(self, key: str):
        return self.cache_dir / f"{key}.json" if self.cache_dir else None

    def propose(self, prompt: str, n: int, seed: int) -> list:
        del seed  # sampling randomness lives server-side; cache ignores it too
        path = self._cache_path(self._cache_key(prompt, n))
        if path is not None and path.exists():
            return list(json.loads(path.read_text())["texts"])
        texts = self._request(prompt, n)
        if path is not None:
            with self._lock:
                path.write_text(json.dumps({"texts": texts}, sort_keys=True))
        return texts

    def _request(self, prompt: str, n: int) -> list:
        import os

        import requests

        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "n": n,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }
        last_error = "no attempt made"
        for attempt in range(self.retries):
            try:
                resp = self._session.post(
                    self.endpoint, json=body, headers=headers, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = f"transport error: {exc}"
            else:
                if resp.status_code >= 500:
                    last_error = f"server error {resp.status_code}: {resp.text[:200]}"
                elif resp.status_code >= 400:
                    raise BackendError(
                        f"http backend rejected request ({resp.status_code}): {resp.text[:200]}"
                    )
                else:
                    return self._parse(resp.json(), n)
            if attempt + 1 < self.retries:
                time.sleep(self.backoff * (2**attempt))
        raise BackendError(f"http backend failed after {self.retries} attempts; {last_error}")

    @staticmethod
    def _parse(data: dict, n: int) -> list:
        try:
            texts = [choice["message"]["content"] for choice in data["choices"]]
        except (KeyError, TypeError) as exc:
            raise BackendError(f"malformed completion payload: {exc}") from exc
        if len(texts) < n:
            raise BackendError(f"backend returned {len(texts)} completions, wanted {n}")
        return texts[:n]


_REMAINING_RE = re.compile(r"Remaining numbers:\s*([^\n]+)")


def parse_remaining_numbers(prompt: str) -> list:
    """Extract the current number multiset from the last state line in a
    prompt. Raises BackendError when no parseable state is present."""
    matches = _REMAINING_RE.findall(prompt)
    if not matches:
        raise BackendError("prompt contains no 'Remaining numbers:' state line")
    tokens = matches[-1].split()
    try:
        return [Fraction(tok) for tok in tokens]
    except (ValueError, ZeroDivisionError) as exc:
        raise BackendError(f"unparseable number state {matches[-1]!r}") from exc


class Game24PolicyOracle:
    """Scripted stand-in for an LM of tunable competence on Game of 24.

    Each proposal is, with probability p_correct, a uniformly chosen step
    that keeps the remaining numbers solvable (per the exhaustive solver);
    otherwise it is a uniformly chosen legal step. Draws are seeded from
    (backend seed, call seed), so identical calls return identical lists.
    """

    def __init__(self, p_correct: float, seed: int = 0):
        if not 0.0 <= p_correct <= 1.0:
            raise ValueError("p_correct must be in [0, 1]")
        self.p_correct = p_correct
        self.seed = seed

    def propose(self, prompt: str, n: int, seed: int) -> list:
        nums = parse_remaining_numbers(prompt)
        if len(nums) < 2:
            raise BackendError("number state is already terminal")
        rng = random.Random(stable_seed(self.seed, seed, "policy"))
        legal = solver24.legal_steps(nums)
        correct = solver24.correct_steps(nums)
        out = []
        for _ in range(n):
            pool = correct if (correct and rng.random() < self.p_correct) else legal
            step = pool[rng.randrange(len(pool))]
            out.append(f"combine[{solver24.render_step(step)}]")
        return out


class Game24ValueOracle:
    """Value-prompt counterpart of Game24PolicyOracle.

    With probability `accuracy` it reports score 10 when the remaining
    numbers can still reach 24 (score 1 otherwise, and for terminal states
    score 10 only on exactly 24); with the remaining probability it reports
    a uniform random score. Output ends with the standard score sentence.
    """

    def __init__(self, accuracy: float, seed: int = 0):
        if not 0.0 <= accuracy <= 1.0:
            raise ValueError("accuracy must be in [0, 1]")
        self.accuracy = accuracy
        self.seed = seed

    def propose(self, prompt: str, n: int, seed: int) -> list:
        nums = parse_remaining_numbers(prompt)
        rng = random.Random(stable_seed(self.seed, seed, "value"))
        out = []
        for _ in range(n):
            if rng.random() < self.accuracy:
                if len(nums) == 1:
                    score = 10 if nums[0] == solver24.TARGET else 1
                else:
                    score = 10 if solver24.solvable(nums) else 1
            else:
                score = rng.randint(1, 10)
            out.append(
                "The remaining numbers were checked against the target.\n"
                f"Thus the correctness score is {score}"
            )
        return out
