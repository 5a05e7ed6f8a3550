"""Black-box adversarial attacks on text-attributed graphs."""

import json

from ._core import (
    Graph,
    Split,
    TagsiegeError,
    __version__,
    commands,
    defaults,
    generate,
    homophily_edge,
    homophily_node,
    load_graph,
    retrieve_influencers,
    tfidf,
)
from . import _core


def run(command, **config):
    """Run a command; keyword values are stringified. Returns (exit_code, manifest dict)."""
    result = _core.run(command, {k: _fmt(v) for k, v in config.items()})
    manifest = json.loads(result["manifest_json"]) if result["manifest_json"] else {}
    return result["exit_code"], manifest


def replay(manifest_path, **overrides):
    result = _core.replay(str(manifest_path), {k: _fmt(v) for k, v in overrides.items()})
    manifest = json.loads(result["manifest_json"]) if result["manifest_json"] else {}
    return result["exit_code"], manifest


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


__all__ = [
    "Graph",
    "Split",
    "TagsiegeError",
    "__version__",
    "commands",
    "defaults",
    "generate",
    "homophily_edge",
    "homophily_node",
    "load_graph",
    "replay",
    "retrieve_influencers",
    "run",
    "tfidf",
]
