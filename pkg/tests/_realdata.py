import os
from pathlib import Path

import pytest

DATA = Path(__file__).resolve().parent.parent / "data"


def real_dataset_dir(name: str):
    """Directory of a converted real dataset container, if present."""
    root = os.environ.get("KGCN_DATA")
    candidates = [DATA / name]
    if root:
        candidates.insert(0, Path(root) / name)
    for c in candidates:
        if (c / "meta.json").is_file():
            return c
    return None


def require_real(name: str) -> Path:
    path = real_dataset_dir(name)
    if path is None:
        pytest.skip(
            f"real dataset {name!r} not available; convert the upstream "
            f"distribution with the converter package and point KGCN_DATA at it"
        )
    return path
