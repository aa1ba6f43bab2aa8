"""Shared fixtures and builders for the test suite."""

from __future__ import annotations

import os
import re
from pathlib import Path

import numpy as np
import pytest

from iklogit import (
    Dataset,
    DcObjective,
    KernelSpec,
    decompose_gram,
    gram_matrix,
)

# User-supplied benchmark files live here (see scripts/fetch_uci.py).
DATA_DIR = Path(os.environ.get("IKLOGIT_DATA_DIR", Path(__file__).parent.parent / "data"))

UCI_FILES = {
    "haberman": "haberman.csv",
    "fertility": "fertility.csv",
    "spect": "spect.csv",
    "transfusion": "transfusion.csv",
}


def dataset_path(name: str) -> Path | None:
    path = DATA_DIR / UCI_FILES[name]
    return path if path.exists() else None


def require_dataset(name: str) -> Path:
    path = dataset_path(name)
    if path is None:
        pytest.skip(
            f"{name} data not present; place {UCI_FILES[name]} under {DATA_DIR} "
            "(see scripts/fetch_uci.py)"
        )
    return path


def random_symmetric(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    raw = rng.normal(scale=scale, size=(n, n))
    return 0.5 * (raw + raw.T)


def random_dataset(rng: np.random.Generator, n: int, d: int) -> Dataset:
    features = rng.normal(size=(n, d))
    labels = rng.integers(0, 2, size=n)
    # Guarantee both classes.
    labels[0], labels[1] = 0, 1
    return Dataset(features, labels)


def separated_dataset(
    rng: np.random.Generator, n: int = 20, d: int = 2, gap: float = 4.0
) -> Dataset:
    """Two tight clusters far apart: every sane model classifies them."""
    half = n // 2
    features = np.vstack(
        [
            rng.normal(-gap / 2, 0.1, size=(half, d)),
            rng.normal(gap / 2, 0.1, size=(n - half, d)),
        ]
    )
    labels = np.concatenate([np.zeros(half, dtype=int), np.ones(n - half, dtype=int)])
    return Dataset(features, labels)


def tl1_objective(
    rng: np.random.Generator,
    n: int = 12,
    d: int = 3,
    lam: float = 0.5,
    lam1: float = 0.05,
    tau: float = 1e-6,
) -> DcObjective:
    """Objective over a TL1 Gram of random data (typically indefinite)."""
    data = random_dataset(rng, n, d)
    gram = gram_matrix(KernelSpec.tl1().resolve(d), data)
    decomp = decompose_gram(gram, tau)
    return DcObjective.from_labels(decomp, data.labels, lam, lam1)


def symmetric_objective(
    rng: np.random.Generator,
    n: int = 10,
    lam: float = 0.7,
    lam1: float = 0.1,
    tau: float = 1e-6,
    scale: float = 1.0,
) -> DcObjective:
    """Objective over an arbitrary random symmetric 'Gram' matrix."""
    gram = random_symmetric(rng, n, scale)
    decomp = decompose_gram(gram, tau)
    y = rng.choice([-1.0, 1.0], size=n)
    return DcObjective(decomp=decomp, y_signed=y, lam=lam, lam1=lam1)


def write_csv(path: Path, features: np.ndarray, labels: np.ndarray) -> Path:
    rows = []
    for x, y in zip(features, labels):
        rows.append(",".join(repr(float(v)) for v in x) + f",{int(y)}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20250819)


_ACCEPTANCE_TITLES = {
    1: "positive decomposition correctness",
    2: "DC identity f = g - h",
    3: "gradient finite-difference checks",
    4: "inner solver oracle equivalence",
    5: "descent inequality and terminal residual",
    6: "qualitative linear rate",
    7: "PSD-kernel convex reduction",
    8: "benchmark accuracy reproduction",
    9: "TL1 spectrum statistics",
    10: "dense-model coefficient counts",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One ACCEPTANCE line per criterion at the end of every run."""
    results: dict[int, tuple[str, str]] = {}
    # Later buckets overwrite earlier ones, most severe last.
    for status, label in (
        ("passed", "PASS"),
        ("skipped", "SKIP"),
        ("failed", "FAIL"),
        ("error", "FAIL"),
    ):
        for report in terminalreporter.stats.get(status, []):
            match = re.search(r"test_criterion_(\d+)", getattr(report, "nodeid", ""))
            if not match:
                continue
            number = int(match.group(1))
            detail = ""
            for key, value in getattr(report, "user_properties", []):
                if key == "acceptance_detail":
                    detail = str(value)
            if label == "SKIP" and not detail:
                longrepr = getattr(report, "longrepr", None)
                if isinstance(longrepr, tuple) and len(longrepr) == 3:
                    detail = str(longrepr[2]).removeprefix("Skipped: ")
            results[number] = (label, detail)
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(results):
        label, detail = results[number]
        line = f"ACCEPTANCE {number}: {label} - {_ACCEPTANCE_TITLES[number]}"
        if detail:
            line += f": {detail}"
        terminalreporter.write_line(line)
