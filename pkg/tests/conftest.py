import os
from pathlib import Path

import numpy as np
import pytest

from mdlgbc.dataset import RawTable, load_csv

DATA_DIR = Path(__file__).parent / "data"
DATA_ENV = "MDLGBC_DATA_DIR"

# filled by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def dataset_path(name: str) -> Path | None:
    dirs = [Path(os.environ[DATA_ENV])] if os.environ.get(DATA_ENV) else []
    dirs.append(DATA_DIR)
    for d in dirs:
        p = d / f"{name}.csv"
        if p.is_file():
            return p
    return None


@pytest.fixture(scope="session")
def iris() -> RawTable:
    return load_csv(DATA_DIR / "iris.csv", "class")


def blobs(rng: np.random.Generator, n: int, d: int, C: int, spread: float = 0.08) -> tuple:
    """Gaussian clusters in the unit cube, two per class, clipped to [0, 1]."""
    centers = rng.uniform(0.15, 0.85, size=(2 * C, d))
    y = np.concatenate([np.arange(C), rng.integers(0, C, size=max(n - C, 0))])[:n]
    which = 2 * y + rng.integers(0, 2, size=n)
    X = np.clip(centers[which] + rng.normal(0.0, spread, size=(n, d)), 0.0, 1.0)
    return X, y.astype(np.int64)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
