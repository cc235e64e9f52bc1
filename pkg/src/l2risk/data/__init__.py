"""Bundled fixtures: the incident table, a synthetic risk snapshot, the
default flagging ruleset, and ready-to-run simulator scenarios."""

from importlib import resources
from pathlib import Path

INCIDENTS_CSV = "incident-table.csv"
SNAPSHOT_JSON = "snapshot-fixture.json"
RULESET_JSON = "flagging-ruleset.json"


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled fixture (e.g. ``snapshot-fixture.json`` or
    ``scenarios/instant-upgrade.json``)."""
    path = Path(str(resources.files(__name__).joinpath(name)))
    if not path.exists():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return path


def scenario_names() -> list[str]:
    """Names of all bundled simulator scenarios, sorted."""
    scenario_dir = Path(str(resources.files(__name__).joinpath("scenarios")))
    return sorted(p.name for p in scenario_dir.glob("*.json"))
