"""CSV reading and writing with a fixed 12-significant-digit float format."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InvalidArgumentError
from .fitting import DataPoint, DataSeries

SERIES_HEADER = ("x", "s", "sigma")


class CsvFormatError(InvalidArgumentError):
    def __init__(self, path, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".12g")
    return str(value)


def write_csv(path: Path | str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def _data_lines(path: Path):
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            yield lineno, stripped


def read_csv(path: Path | str) -> tuple[list[str], list[list[str]]]:
    """Header and raw rows, skipping blank and ``#`` comment lines."""
    path = Path(path)
    header = None
    rows = []
    for _, line in _data_lines(path):
        fields = next(csv.reader([line]))
        if header is None:
            header = fields
        else:
            rows.append(fields)
    if header is None:
        raise CsvFormatError(path, None, "file has no header")
    return header, rows


def read_series_csv(path: Path | str) -> DataSeries:
    """Read an ``x,s,sigma`` data file into a :class:`DataSeries`."""
    path = Path(path)
    try:
        lines = list(_data_lines(path))
    except (OSError, UnicodeDecodeError) as exc:
        raise CsvFormatError(path, None, f"cannot read: {exc}") from exc
    if not lines:
        raise CsvFormatError(path, None, "file has no header")
    lineno, head = lines[0]
    header = [h.strip() for h in next(csv.reader([head]))]
    if tuple(header) != SERIES_HEADER:
        raise CsvFormatError(path, lineno, f"expected header {','.join(SERIES_HEADER)}, got {head!r}")
    points = []
    seen = set()
    for lineno, line in lines[1:]:
        fields = next(csv.reader([line]))
        if len(fields) != 3:
            raise CsvFormatError(path, lineno, f"expected 3 fields, got {len(fields)}")
        try:
            x, s, sigma = (float(f) for f in fields)
        except ValueError:
            raise CsvFormatError(path, lineno, f"non-numeric field in {line!r}") from None
        if not sigma > 0:
            raise CsvFormatError(path, lineno, "sigma must be > 0")
        if x in seen:
            raise CsvFormatError(path, lineno, f"duplicate x value {x}")
        seen.add(x)
        points.append(DataPoint(x, s, sigma))
    if not points:
        raise CsvFormatError(path, None, "no data rows")
    return DataSeries(tuple(points))


def write_series_csv(path: Path | str, series: DataSeries) -> Path:
    return write_csv(path, SERIES_HEADER, ((p.x, p.s, p.sigma) for p in series.points))
