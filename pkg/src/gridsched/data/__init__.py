"""Bundled example cases (toy systems and an RTS-24-style network)."""

from importlib import resources
from pathlib import Path


def bundled(name: str) -> Path:
    """Filesystem path of a bundled data file."""
    path = Path(str(resources.files(__package__) / name))
    if not path.exists():
        raise FileNotFoundError(f"no bundled data file {name!r}")
    return path
