"""CSV ingestion for ridge regression.

Cleaning is column-wise by default: a column is dropped if any entry equals the
missing marker or if it holds anything non-numeric. Decisions depend only on
column contents, so shuffling rows never changes which columns survive.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import EmptyAfterCleaning, ParseError


@dataclass(frozen=True)
class Dataset:
    design: np.ndarray  # (m, n)
    response: np.ndarray  # (m,)
    source: str
    columns: tuple = ()
    log: tuple = field(default=())

    def __post_init__(self):
        m, n = self.design.shape
        if m < 1 or n < 1:
            raise EmptyAfterCleaning("dataset has no rows or no feature columns")
        if self.response.shape != (m,):
            raise ParseError("response length does not match the number of rows")

    @property
    def shape(self):
        """(n, m): features, samples."""
        m, n = self.design.shape
        return n, m

    def standardized(self) -> "Dataset":
        """Zero-mean, unit-variance features; constant columns are only centered."""
        mu = self.design.mean(axis=0)
        sd = self.design.std(axis=0)
        sd[sd == 0] = 1.0
        h = (self.design - mu) / sd
        return Dataset(h, self.response, self.source, self.columns, self.log + ("standardized features",))


def _to_float(text: str) -> Optional[float]:
    try:
        v = float(text)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _is_number_or_marker(text: str, marker: str) -> bool:
    text = text.strip()
    return text == marker or _to_float(text) is not None


def _looks_like_header(first, second, marker: str) -> bool:
    return any(
        not _is_number_or_marker(a, marker) and _is_number_or_marker(b, marker)
        for a, b in zip(first, second)
    )


def load_dataset(
    path: Union[str, Path],
    response_column: Union[int, str] = -1,
    missing_marker: str = "?",
    row_drop: bool = False,
    header: Optional[bool] = None,
) -> Dataset:
    """Read a CSV into a design matrix and response.

    ``response_column`` is an index (negative counts from the end) or a header
    name. ``header=None`` autodetects: the first row is a header when at least
    one of its cells is not a number and the same column is numeric below it.
    With ``row_drop`` rows holding the marker are removed instead of columns.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyAfterCleaning(f"{path}: no data rows")

    width = len(rows[0])
    if header is None:
        header = len(rows) > 1 and _looks_like_header(rows[0], rows[1], missing_marker)
    names = [c.strip() for c in rows[0]] if header else [f"c{j}" for j in range(width)]
    body = rows[1:] if header else rows
    first_line = 2 if header else 1
    for i, r in enumerate(body):
        if len(r) != width:
            raise ParseError(f"expected {width} fields, found {len(r)}", row=first_line + i)

    if isinstance(response_column, str):
        if response_column not in names:
            raise ParseError(f"no column named {response_column!r}")
        resp = names.index(response_column)
    else:
        resp = response_column % width if -width <= response_column < width else None
        if resp is None:
            raise ParseError(f"response column {response_column} out of range for {width} columns")

    log = [f"read {len(body)} rows x {width} columns from {path}"]
    cells = [[c.strip() for c in r] for r in body]

    if row_drop:
        kept = [r for r in cells if missing_marker not in r]
        log.append(f"dropped {len(cells) - len(kept)} rows containing {missing_marker!r}")
        cells = kept
        if not cells:
            raise EmptyAfterCleaning("every row contained the missing marker")

    for i, r in enumerate(cells):
        v = r[resp]
        if v == missing_marker or _to_float(v) is None:
            raise ParseError(f"response value {v!r} is not numeric", row=first_line + i, column=resp + 1)

    keep = []
    for j in range(width):
        if j == resp:
            continue
        col = [r[j] for r in cells]
        if missing_marker in col:
            log.append(f"dropped column {names[j]}: missing marker")
        elif any(_to_float(v) is None for v in col):
            log.append(f"dropped column {names[j]}: non-numeric")
        else:
            keep.append(j)
    if not keep:
        raise EmptyAfterCleaning("no numeric feature columns remain")

    h = np.array([[float(r[j]) for j in keep] for r in cells])
    y = np.array([float(r[resp]) for r in cells])
    log.append(f"kept n={h.shape[1]} features, m={h.shape[0]} samples")
    return Dataset(h, y, str(path), tuple(names[j] for j in keep), tuple(log))
