# memory/results_store.py
"""
NetGame QL — Result Store
=========================
Writes experiment outputs under one directory:
  - CSV tables with a "# key: value" metadata header (seed, config hash,
    parameters) followed by the pandas table
  - JSON documents with sorted keys

Identical inputs give byte-identical CSV files.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import pandas as pd

logger = logging.getLogger(__name__)

APP_NAME = "netgame_ql"
CSV_FLOAT_FORMAT = "%.12g"


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)


def config_hash(config: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a config."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def run_metadata(command: str, config: Dict[str, Any], seed: Optional[int]) -> Dict[str, str]:
    return {
        "app": APP_NAME,
        "command": command,
        "seed": str(seed),
        "config_sha256": config_hash(config),
        "params": canonical_json(config),
    }


class ResultStore:
    """Output directory for one CLI run."""

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def save_frame(self, name: str, frame: pd.DataFrame, metadata: Optional[Dict[str, str]] = None) -> Path:
        target = self.path(name)
        with open(target, "w", newline="") as handle:
            for key, value in (metadata or {}).items():
                handle.write(f"# {key}: {value}\n")
            frame.to_csv(handle, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        logger.info("💾 wrote %s (%d rows)", target, len(frame))
        return target

    def save_json(self, name: str, payload: Dict[str, Any]) -> Path:
        target = self.path(name)
        target.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
        logger.info("💾 wrote %s", target)
        return target


def read_frame(path: Union[str, Path]) -> Tuple[Dict[str, str], pd.DataFrame]:
    """Read a CSV written by ResultStore, returning (metadata, table)."""
    metadata: Dict[str, str] = {}
    with open(path) as handle:
        for line in handle:
            if not line.startswith("# "):
                break
            key, _, value = line[2:].rstrip("\n").partition(": ")
            metadata[key] = value
    return metadata, pd.read_csv(path, comment="#")
