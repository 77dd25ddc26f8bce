"""Shared output directory for the demo scripts."""

from pathlib import Path


def output_path(name: str) -> Path:
    out = Path(__file__).parent / "output"
    out.mkdir(exist_ok=True)
    return out / name
