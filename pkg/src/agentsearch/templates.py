"""Prompt template files.

A template is plain text split into bracketed sections:

    [instruction]
    ...the standing instruction...
    [example]
    ...one few-shot exemplar...
    [example]
    ...another...
    [reflections_header]
    ...optional override...
    [cue]
    ...optional next-step cue; an empty section suppresses the cue...

Runtime slots (reflection texts, failed trajectories, the current state
context) are filled at assembly time in a fixed order, so template files
only carry the static text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .prompts import DEFAULT_REFLECTIONS_HEADER, PromptBundle

_SECTION_RE = re.compile(r"^\[(instruction|example|reflections_header|cue)\]\s*$")

ROLES = ("act", "value", "reflect")


def parse_template(text: str, include_failed_trajectories: bool = False) -> PromptBundle:
    sections = []
    current_name = None
    current_lines = []
    for line in text.splitlines():
        m = _SECTION_RE.match(line)
        if m:
            if current_name is not None:
                sections.append((current_name, "\n".join(current_lines).strip()))
            current_name = m.group(1)
            current_lines = []
        elif current_name is not None:
            current_lines.append(line)
        elif line.strip():
            raise ValueError(f"template text before the first section: {line!r}")
    if current_name is not None:
        sections.append((current_name, "\n".join(current_lines).strip()))

    instruction = None
    examples = []
    header = DEFAULT_REFLECTIONS_HEADER
    cue: Optional[str] = None
    for name, body in sections:
        if name == "instruction":
            instruction = body
        elif name == "example":
            examples.append(body)
        elif name == "reflections_header":
            header = body
        elif name == "cue":
            cue = body  # may be "", which suppresses the default cue
    if instruction is None:
        raise ValueError("template is missing an [instruction] section")
    return PromptBundle(
        instruction=instruction,
        few_shot=examples,
        reflections_header=header,
        include_failed_trajectories=include_failed_trajectories,
        cue=cue,
    )


def load_bundle(path, include_failed_trajectories: bool = False) -> PromptBundle:
    return parse_template(Path(path).read_text(), include_failed_trajectories)


@dataclass
class TemplateSet:
    act: PromptBundle
    value: PromptBundle
    reflect: PromptBundle


def load_template_set(kind: str, directory=None) -> TemplateSet:
    """Templates for one environment kind.

    With no directory given, the bundled defaults under data/templates/<kind>
    are used. Value bundles always carry failed trajectories.
    """
    texts = {}
    if directory is not None:
        base = Path(directory) / kind
        for role in ROLES:
            texts[role] = (base / f"{role}.txt").read_text()
    else:
        package = resources.files("agentsearch").joinpath("data", "templates", kind)
        for role in ROLES:
            texts[role] = package.joinpath(f"{role}.txt").read_text()
    return TemplateSet(
        act=parse_template(texts["act"]),
        value=parse_template(texts["value"], include_failed_trajectories=True),
        reflect=parse_template(texts["reflect"]),
    )
