"""Download the UCI communities-and-crime table and save it as a CSV.

The raw file has no header, marks missing values with ``?`` and keeps the
violent-crime rate in the last column, which is what ``load_dataset`` expects by
default. Needs network access; nothing in the test suite calls this.

    python scripts/fetch_crime_data.py data/communities.csv
"""

import argparse
import urllib.request
from pathlib import Path

URL = "https://archive.ics.uci.edu/ml/machine-learning-databases/communities/communities.data"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dest", nargs="?", default="data/communities.csv")
    ap.add_argument("--url", default=URL)
    args = ap.parse_args()
    dest = Path(args.dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    with urllib.request.urlopen(args.url) as resp:
        dest.write_bytes(resp.read())
    print(f"saved {dest} ({dest.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
