"""Shipped scenario documents, loadable by name or by file path."""

from __future__ import annotations

import json
from importlib import resources

BUILTIN_NAMES = ("fig1a", "fig2a", "fig2b", "fig3", "fig4_one_ant", "fig4_few_ants")


def builtin_scenario(name: str) -> dict:
    if name not in BUILTIN_NAMES:
        raise KeyError(f"no builtin scenario {name!r}; have {', '.join(BUILTIN_NAMES)}")
    text = resources.files(__package__).joinpath(f"{name}.json").read_text("utf-8")
    return json.loads(text)


def resolve_scenario_text(path_or_name: str) -> str:
    """File contents if the argument is an existing path, else a builtin."""
    import os

    if os.path.exists(path_or_name):
        with open(path_or_name, "r", encoding="utf-8") as fh:
            return fh.read()
    if path_or_name in BUILTIN_NAMES:
        return json.dumps(builtin_scenario(path_or_name))
    raise FileNotFoundError(
        f"{path_or_name!r} is neither a file nor a builtin scenario "
        f"({', '.join(BUILTIN_NAMES)})")
