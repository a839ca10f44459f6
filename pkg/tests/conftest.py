import json
from pathlib import Path

import pytest

from toolaudit import BehaviorId, SubjectSource

ASSETS = Path(__file__).resolve().parents[1] / "fixture_tools" / "src" / "fixture_tools" / "assets"


def canary_source(behavior: BehaviorId) -> SubjectSource:
    path = ASSETS / "canaries" / f"{behavior.value}.py"
    return SubjectSource(tool_id=behavior.value, source_text=path.read_text())


def standalone_sources(behavior: BehaviorId) -> list[SubjectSource]:
    paths = sorted((ASSETS / "standalone" / behavior.value).glob("*.py"))
    return [SubjectSource(tool_id=p.stem, source_text=p.read_text()) for p in paths]


def benign_sources() -> list[SubjectSource]:
    return [
        SubjectSource(tool_id=p.stem, source_text=p.read_text())
        for p in sorted((ASSETS / "benign").glob("*.py"))
    ]


def benign_inputs() -> dict[str, list]:
    return json.loads((ASSETS / "benign_inputs.json").read_text())


@pytest.fixture
def assets_dir() -> Path:
    return ASSETS
