#!/usr/bin/env python3
"""Download the processed Cleveland heart-disease table from UCI.

Saves data/processed.cleveland.data and sanity-checks its shape: 303 data
rows, 14 comma-separated fields each, 6 rows containing the '?' missing
marker (297 complete rows). Needs outbound network access; if the archive
is unreachable, fetch the file manually and drop it at the same path.
"""

import sys
import urllib.request
from pathlib import Path

URL = (
    "https://archive.ics.uci.edu/ml/machine-learning-databases/"
    "heart-disease/processed.cleveland.data"
)
DEST = Path(__file__).resolve().parent.parent / "data" / "processed.cleveland.data"


def validate(text: str) -> None:
    rows = [ln for ln in text.splitlines() if ln.strip()]
    if len(rows) != 303:
        raise SystemExit(f"expected 303 data rows, got {len(rows)}")
    bad = [i for i, ln in enumerate(rows) if len(ln.split(",")) != 14]
    if bad:
        raise SystemExit(f"rows with wrong field count: {bad[:5]}")
    missing = sum(1 for ln in rows if "?" in ln)
    if missing != 6:
        raise SystemExit(f"expected 6 incomplete rows, got {missing}")


def main() -> int:
    if DEST.exists():
        validate(DEST.read_text(encoding="utf-8"))
        print(f"already present and valid: {DEST}")
        return 0
    print(f"fetching {URL}")
    with urllib.request.urlopen(URL, timeout=60) as resp:
        text = resp.read().decode("utf-8")
    validate(text)
    DEST.parent.mkdir(parents=True, exist_ok=True)
    DEST.write_text(text, encoding="utf-8")
    print(f"saved {DEST} (303 rows, 297 complete)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
