#!/usr/bin/env python3
"""Fetch the four UCI benchmark datasets used by the tests and reports.

Each dataset is rewritten as a plain CSV with numeric feature columns and
a trailing {0,1} label so the package's default ingestion options apply
unchanged.  Existing files are left alone.  Downloads are best effort:
failures are reported per dataset and the script exits nonzero if any
requested file is still missing, leaving instructions for manual
placement.

Usage:
    python3 scripts/fetch_uci.py [--dest DIR] [--force]
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import urllib.error
import urllib.request
from pathlib import Path

BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases"


def fetch_text(url: str) -> str:
    with urllib.request.urlopen(url, timeout=30) as response:
        return response.read().decode("utf-8")


def parse_rows(text: str, delimiter: str = ",") -> list[list[str]]:
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    return [row for row in reader if row and any(cell.strip() for cell in row)]


def haberman() -> list[list[str]]:
    # age, year, positive nodes, survival status {1: survived, 2: died}.
    rows = parse_rows(fetch_text(f"{BASE}/haberman/haberman.data"))
    return [row[:3] + [str(int(row[3]) - 1)] for row in rows]


def fertility() -> list[list[str]]:
    # Nine numeric attributes, diagnosis letter {N: normal, O: altered}.
    rows = parse_rows(fetch_text(f"{BASE}/00244/fertility_Diagnosis.txt"))
    mapping = {"N": "0", "O": "1"}
    return [row[:9] + [mapping[row[9].strip()]] for row in rows]


def spect() -> list[list[str]]:
    # Label leads each row; train and test partitions are merged and the
    # label is moved to the trailing column.
    rows = []
    for part in ("SPECT.train", "SPECT.test"):
        rows.extend(parse_rows(fetch_text(f"{BASE}/spect/{part}")))
    return [row[1:] + [row[0]] for row in rows]


def transfusion() -> list[list[str]]:
    # Header row, four numeric attributes, {0,1} donation label.
    rows = parse_rows(fetch_text(f"{BASE}/blood-transfusion/transfusion.data"))
    return rows[1:]


DATASETS = {
    "haberman.csv": haberman,
    "fertility.csv": fertility,
    "spect.csv": spect,
    "transfusion.csv": transfusion,
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--dest",
        default=str(Path(__file__).resolve().parent.parent / "data"),
        help="output directory (default: <repo>/data)",
    )
    parser.add_argument(
        "--force", action="store_true", help="re-download existing files"
    )
    args = parser.parse_args()

    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    missing = []
    for filename, build in DATASETS.items():
        target = dest / filename
        if target.exists() and not args.force:
            print(f"{filename}: already present")
            continue
        try:
            rows = build()
        except (urllib.error.URLError, OSError, KeyError, ValueError, IndexError) as exc:
            print(f"{filename}: download failed ({exc})")
            missing.append(filename)
            continue
        with open(target, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerows(rows)
        print(f"{filename}: wrote {len(rows)} rows")

    if missing:
        print(
            "\nSome files could not be fetched. Obtain them manually from "
            f"the UCI repository and place CSVs (features..., label) in {dest}: "
            + ", ".join(missing),
            file=sys.stderr,
        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
