# games/loader.py
"""
NetGame QL — Game File Format
=============================
JSON game files:

    {
      "num_agents": 2,
      "action_counts": [2, 2],
      "edges": [
        {"k": 0, "l": 1, "a_kl": [[1, 0], [0, 1]], "a_lk": [[-1, 0], [0, -1]]}
      ]
    }

Agent indices are 0-based; matrices are row-major nested arrays. Errors
are reported with the file line of the offending edge object.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, ValidationError

from games.errors import DomainError, GameFileError
from games.network_game import Edge, NetworkGame, validate_game

logger = logging.getLogger(__name__)


class EdgeRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k: int
    l: int
    a_kl: List[List[float]]
    a_lk: List[List[float]]


class GameRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    num_agents: int
    action_counts: List[int]
    edges: List[EdgeRecord] = []


# =============================================================================
# LINE ANCHORS
# =============================================================================
def edge_line_numbers(text: str) -> List[int]:
    """
    1-based line of the opening brace of every object inside the top-level
    "edges" array, in order. Tracks string state so braces inside strings
    do not count.
    """
    lines: List[int] = []
    depth = 0
    line = 1
    in_string = False
    escaped = False
    last_key: Optional[str] = None
    key_chars: List[str] = []
    edges_depth: Optional[int] = None

    for ch in text:
        if ch == "\n":
            line += 1
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
                last_key = "".join(key_chars)
            else:
                key_chars.append(ch)
            continue
        if ch == '"':
            in_string = True
            key_chars = []
        elif ch in "{[":
            if ch == "[" and depth == 1 and last_key == "edges" and edges_depth is None:
                edges_depth = depth + 1
            elif ch == "{" and edges_depth is not None and depth == edges_depth:
                lines.append(line)
            depth += 1
        elif ch in "}]":
            depth -= 1
            if edges_depth is not None and depth < edges_depth:
                edges_depth = None
                last_key = None
    return lines


def _anchor(lines: List[int], index: Optional[int]) -> str:
    if index is not None and index < len(lines):
        return f"line {lines[index]}"
    return "line ?"


# =============================================================================
# LOAD / DUMP
# =============================================================================
def parse_game(text: str, source: str = "<string>") -> NetworkGame:
    """Parse and fully validate a game document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise GameFileError(source, [f"line {e.lineno}: invalid JSON ({e.msg})"]) from e

    anchors = edge_line_numbers(text)
    try:
        record = GameRecord.model_validate(raw)
    except ValidationError as e:
        messages = []
        for err in e.errors():
            loc = err["loc"]
            index = loc[1] if len(loc) > 1 and loc[0] == "edges" and isinstance(loc[1], int) else None
            where = _anchor(anchors, index) if index is not None else "line 1"
            messages.append(f"{where}: {'.'.join(str(p) for p in loc)}: {err['msg']}")
        raise GameFileError(source, messages) from e

    edges = []
    messages = []
    for index, item in enumerate(record.edges):
        try:
            edges.append(Edge(item.k, item.l, item.a_kl, item.a_lk))
        except (DomainError, ValueError) as e:
            messages.append(f"{_anchor(anchors, index)}: edge #{index}: {e}")
    if messages:
        raise GameFileError(source, messages)

    game = NetworkGame(record.num_agents, record.action_counts, edges, name=Path(source).stem)
    violations = validate_game(game)
    if violations:
        raise GameFileError(source, [
            f"{_anchor(anchors, v.edge_index) if v.edge_index is not None else 'line 1'}: {v}"
            for v in violations
        ])
    logger.info("📂 loaded %s: %d agents, %d edges", source, game.num_agents, len(game.edges))
    return game


def load_game(path: Union[str, Path]) -> NetworkGame:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise GameFileError(str(path), [f"cannot read file ({e})"]) from e
    return parse_game(text, source=str(path))


def dump_game(game: NetworkGame) -> Dict[str, Any]:
    return {
        "num_agents": game.num_agents,
        "action_counts": list(game.action_counts),
        "edges": [
            {
                "k": edge.k,
                "l": edge.l,
                "a_kl": edge.a_kl.entries.tolist(),
                "a_lk": edge.a_lk.entries.tolist(),
            }
            for edge in game.edges
        ],
    }


def save_game(game: NetworkGame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(dump_game(game), indent=2))
    return path
