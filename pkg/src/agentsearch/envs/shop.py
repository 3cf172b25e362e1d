"""Catalog shopping simulator.

The agent searches a product catalog, pages through ranked results three at
a time, opens an item, picks options, and buys. The purchase reward is

    (matched attributes + matched selected options + price-under-cap) /
    (|required attributes| + |required options| + 1)

so 1.0 means the bought item satisfied the instruction completely.
"""

from __future__ import annotations

import string
from typing import Optional

from ..actions import ActionGrammar, ActionSample
from .base import Environment, EnvObservation, TaskError, TaskSpec

GRAMMAR = ActionGrammar(
    verbs=("search", "choose", "click"),
    thought_verbs=("think",),
    terminal_args=(("choose", "buy now"), ("click", "buy now")),
)

PAGE_SIZE = 3

_PUNCT_TABLE = str.maketrans({c: " " for c in string.punctuation})


def _terms(text: str) -> set:
    return set(text.casefold().translate(_PUNCT_TABLE).split())


def title_overlap(query: str, title: str) -> int:
    return len(_terms(query) & _terms(title))


class ShopEnv(Environment):
    kind = "shop"
    grammar = GRAMMAR

    def __init__(self):
        super().__init__()
        self._catalog = {}
        self._instruction = ""
        self._required_attrs = []
        self._required_options = {}
        self._price_cap = 0.0
        self._page_kind = "search"  # search | results | item
        self._ranked = []
        self._page_index = 0
        self._current: Optional[str] = None
        self._selections = {}

    def _do_reset(self, task: TaskSpec) -> EnvObservation:
        catalog = task.payload.get("catalog")
        if not isinstance(catalog, list) or not catalog:
            raise TaskError("shop payload needs a non-empty 'catalog' list")
        self._catalog = {}
        for product in catalog:
            try:
                pid = str(product["id"])
                entry = {
                    "id": pid,
                    "title": str(product["title"]),
                    "price": float(product["price"]),
                    "options": {
                        str(t): [str(v) for v in vals]
                        for t, vals in dict(product.get("options", {})).items()
                    },
                    "attributes": [str(a) for a in product.get("attributes", [])],
                }
            except (KeyError, TypeError, ValueError) as exc:
                raise TaskError(f"malformed catalog product: {exc}") from exc
            if pid in self._catalog:
                raise TaskError(f"duplicate product id {pid!r}")
            self._catalog[pid] = entry
        instruction = task.payload.get("instruction")
        if not isinstance(instruction, str) or not instruction:
            raise TaskError("shop payload needs an 'instruction' string")
        self._instruction = instruction
        self._required_attrs = [str(a) for a in task.payload.get("attributes", [])]
        self._required_options = {
            str(t): str(v) for t, v in dict(task.payload.get("options", {})).items()
        }
        try:
            self._price_cap = float(task.payload["price_cap"])
        except (KeyError, TypeError, ValueError) as exc:
            raise TaskError("shop payload needs a numeric 'price_cap'") from exc
        self._page_kind = "search"
        self._ranked = []
        self._page_index = 0
        self._current = None
        self._selections = {}
        return EnvObservation(self._search_page())

    # -- page rendering ---------------------------------------------------
    def _search_page(self) -> str:
        return f"Instruction: {self._instruction}\n[Search]"

    def _results_page(self) -> str:
        total = len(self._ranked)
        start = self._page_index * PAGE_SIZE
        lines = [f"Page {self._page_index + 1} (Total results: {total})"]
        for pid in self._ranked[start : start + PAGE_SIZE]:
            product = self._catalog[pid]
            lines.append(f"[{pid}]")
            lines.append(product["title"])
            lines.append(f"${product['price']:.2f}")
        return "\n".join(lines)

    def _item_page(self) -> str:
        product = self._catalog[self._current]
        lines = [f"[{product['id']}] {product['title']}", f"${product['price']:.2f}"]
        for opt_type in sorted(product["options"]):
            values = "".join(f"[{v}]" for v in product["options"][opt_type])
            lines.append(f"{opt_type}: {values}")
        lines.append("[Buy Now]")
        return "\n".join(lines)

    def _visible_ids(self) -> list:
        start = self._page_index * PAGE_SIZE
        return self._ranked[start : start + PAGE_SIZE]

    # -- actions ----------------------------------------------------------
    def _apply(self, action: ActionSample) -> EnvObservation:
        argument = (action.argument or "").strip()
        if action.verb == "search":
            if self._page_kind != "search":
                return self.invalid()
            self._ranked = sorted(
                self._catalog,
                key=lambda pid: (-title_overlap(argument, self._catalog[pid]["title"]), pid),
            )
            self._page_index = 0
            self._page_kind = "results"
            return EnvObservation(self._results_page())
        # choose and click are synonyms
        key = argument.casefold()
        if key == "buy now":
            if self._page_kind != "item":
                return self.invalid()
            return self._buy()
        if key == "next page":
            if self._page_kind != "results":
                return self.invalid()
            if (self._page_index + 1) * PAGE_SIZE >= len(self._ranked):
                return self.invalid()
            self._page_index += 1
            return EnvObservation(self._results_page())
        if key == "prev page":
            if self._page_kind != "results" or self._page_index == 0:
                return self.invalid()
            self._page_index -= 1
            return EnvObservation(self._results_page())
        if key == "back to search":
            self._page_kind = "search"
            self._ranked = []
            self._page_index = 0
            self._current = None
            return EnvObservation(self._search_page())
        if self._page_kind == "results":
            for pid in self._visible_ids():
                if pid.casefold() == key:
                    self._current = pid
                    self._page_kind = "item"
                    return EnvObservation(self._item_page())
            return self.invalid()
        if self._page_kind == "item":
            product = self._catalog[self._current]
            for opt_type in sorted(product["options"]):
                for value in product["options"][opt_type]:
                    if value.casefold() == key:
                        self._selections.setdefault(self._current, {})[opt_type] = value
                        return EnvObservation(f"You have clicked {value}.")
            return self.invalid()
        return self.invalid()

    def _buy(self) -> EnvObservation:
        product = self._catalog[self._current]
        chosen = self._selections.get(self._current, {})
        have_attrs = {a.casefold() for a in product["attributes"]}
        matched_attrs = sum(1 for a in self._required_attrs if a.casefold() in have_attrs)
        matched_options = sum(
            1
            for opt_type, value in self._required_options.items()
            if chosen.get(opt_type, "").casefold() == value.casefold()
        )
        price_ok = 1 if product["price"] <= self._price_cap else 0
        denom = len(self._required_attrs) + len(self._required_options) + 1
        reward = (matched_attrs + matched_options + price_ok) / denom
        return EnvObservation("Order placed.", terminal=True, reward=reward)

    # -- snapshots ----------------------------------------------------------
    def _state(self) -> dict:
        return {
            "page_kind": self._page_kind,
            "ranked": list(self._ranked),
            "page_index": self._page_index,
            "current": self._current,
            "selections": {pid: dict(sel) for pid, sel in self._selections.items()},
        }

    def _load_state(self, state: dict) -> None:
        self._page_kind = state["page_kind"]
        self._ranked = list(state["ranked"])
        self._page_index = state["page_index"]
        self._current = state["current"]
        self._selections = {pid: dict(sel) for pid, sel in state["selections"].items()}
