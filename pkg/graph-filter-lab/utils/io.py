import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

import numpy as np

from utils.errors import DimensionMismatchError

PathLike = Union[str, Path]

# Matrix dumps use 12 significant digits
MATRIX_FORMAT = '%.12g'


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def load_features(path: PathLike) -> np.ndarray:
    """Read an N x F CSV of floats; a non-numeric first row is treated as a header"""
    path = Path(path)
    with path.open('r', encoding='utf-8') as handle:
        rows = [row for row in csv.reader(handle) if row and any(cell.strip() for cell in row)]

    if rows and not all(_is_number(cell.strip()) for cell in rows[0]):
        rows = rows[1:]
    if not rows:
        raise DimensionMismatchError(f"no feature rows in {path}")

    widths = {len(row) for row in rows}
    if len(widths) != 1:
        raise DimensionMismatchError(f"ragged feature rows in {path}: widths {sorted(widths)}")
    return np.array([[float(cell) for cell in row] for row in rows], dtype=np.float64)


def matrix_to_csv(Z: np.ndarray, header: Optional[Sequence[str]] = None) -> str:
    buffer = io.StringIO()
    if header:
        buffer.write(','.join(header) + '\n')
    np.savetxt(buffer, np.atleast_2d(Z), fmt=MATRIX_FORMAT, delimiter=',')
    return buffer.getvalue()


def rows_to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([MATRIX_FORMAT % value if isinstance(value, float) else value for value in row])
    return buffer.getvalue()


def write_text(path: Optional[PathLike], text: str) -> None:
    """Write to a file, or to stdout when path is None or '-'"""
    if path is None or str(path) == '-':
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding='utf-8')


def write_json(path: Optional[PathLike], payload: Any) -> None:
    write_text(path, json.dumps(payload, indent=2) + '\n')
