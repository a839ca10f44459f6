"""Static fixture assets for the toolaudit workbench.

Ships three corpora as plain files: one reference canary per taxonomy
behavior, standalone payload variants per behavior for embedding, and a
set of benign sample tools with fixed test inputs. The manifest records
a checksum for every asset plus each canary's expected verdict vector,
so consumers can detect drift without re-deriving expectations.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

ASSETS = Path(__file__).parent / "assets"

__version__ = "0.1.0"


def canary_path(behavior: str) -> Path:
    """Path of the reference canary for a behavior value string."""
    path = ASSETS / "canaries" / f"{behavior}.py"
    if not path.is_file():
        raise FileNotFoundError(f"no canary for behavior {behavior!r}")
    return path


def standalone_paths(behavior: str) -> list[Path]:
    """Standalone payload variants for a behavior, in name order."""
    return sorted((ASSETS / "standalone" / behavior).glob("*.py"))


def benign_paths() -> list[Path]:
    return sorted((ASSETS / "benign").glob("*.py"))


def benign_inputs() -> dict[str, list]:
    """Five fixed test inputs per benign tool, keyed by file stem."""
    return json.loads((ASSETS / "benign_inputs.json").read_text())


def asset_manifest() -> dict:
    return json.loads((ASSETS / "manifest.json").read_text())


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def checksum_mismatches() -> list[str]:
    """Relative paths whose current checksum differs from the manifest."""
    manifest = asset_manifest()
    bad = []
    for rel, recorded in manifest["checksums"].items():
        path = ASSETS / rel
        if not path.is_file() or _sha256(path) != recorded:
            bad.append(rel)
    return bad
