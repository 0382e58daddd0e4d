"""File formats: RKM1 binary matrices, CSV, Matrix Market, label files.

RKM1 layout (dense, bit-exact interchange format):

    bytes 0..3    magic b"RKM1"
    bytes 4..11   row count, unsigned 64-bit little-endian
    bytes 12..19  column count, unsigned 64-bit little-endian
    bytes 20..    row-major IEEE-754 binary64 little-endian values
"""

import csv
import io as _io
import os
import struct
import tempfile
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import InvalidData

RKM1_MAGIC = b"RKM1"
FORMAT_VERSION = "RKM1"


def write_rkm1(path, matrix: np.ndarray) -> None:
    arr = np.ascontiguousarray(np.asarray(matrix, dtype=np.float64))
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise InvalidData(f"RKM1 stores 2-d matrices, got ndim={arr.ndim}")
    payload = (
        RKM1_MAGIC
        + struct.pack("<QQ", arr.shape[0], arr.shape[1])
        + arr.astype("<f8").tobytes(order="C")
    )
    atomic_write_bytes(path, payload)


def read_rkm1(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 20 or raw[:4] != RKM1_MAGIC:
        raise InvalidData(f"{path}: not an RKM1 file")
    n, d = struct.unpack("<QQ", raw[4:20])
    expected = 20 + 8 * n * d
    if len(raw) != expected:
        raise InvalidData(f"{path}: expected {expected} bytes for {n}x{d}, got {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8", offset=20)
    return data.reshape(n, d).astype(np.float64, copy=True)


def read_csv_matrix(path, header: bool = False, label_column=None):
    """Numeric CSV -> (matrix, labels or None).

    ``label_column`` may be a 0-based column index or, when ``header`` is
    set, a column name; that column is returned as label tokens and
    excluded from the numeric matrix.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidData(f"{path}: empty CSV")
    names = None
    if header:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise InvalidData(f"{path}: CSV has a header but no data rows")

    label_idx = None
    if label_column is not None:
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            if names is None or label_column not in names:
                raise InvalidData(f"{path}: no column named {label_column!r}")
            label_idx = names.index(label_column)
        else:
            label_idx = int(label_column)
            width = len(rows[0])
            if not 0 <= label_idx < width:
                raise InvalidData(f"{path}: label column {label_idx} out of range")

    labels = [] if label_idx is not None else None
    numeric = []
    for lineno, row in enumerate(rows, start=2 if header else 1):
        cells = [c.strip() for c in row]
        if labels is not None:
            labels.append(cells[label_idx])
            cells = cells[:label_idx] + cells[label_idx + 1 :]
        try:
            numeric.append([float(c) for c in cells])
        except ValueError as exc:
            raise InvalidData(f"{path}:{lineno}: non-numeric cell ({exc})") from exc
    widths = {len(r) for r in numeric}
    if len(widths) != 1:
        raise InvalidData(f"{path}: ragged rows, widths {sorted(widths)}")
    return np.asarray(numeric, dtype=np.float64), labels


def read_matrix_market(path) -> sp.csr_array:
    try:
        mat = scipy.io.mmread(path)
    except Exception as exc:
        raise InvalidData(f"{path}: failed to parse Matrix Market file ({exc})") from exc
    return sp.csr_array(mat)


def read_labels_file(path) -> list[str]:
    """One label token per line, UTF-8; blank lines rejected."""
    tokens = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tok = line.strip()
            if not tok:
                raise InvalidData(f"{path}:{lineno}: blank label line")
            tokens.append(tok)
    if not tokens:
        raise InvalidData(f"{path}: empty label file")
    return tokens


def load_matrix(path, fmt: str = "auto", csv_header: bool = False, label_column=None):
    """Dispatch on format: returns (RawMatrix, labels or None)."""
    path = Path(path)
    if fmt == "auto":
        suffix = path.suffix.lower()
        if suffix == ".rkm1":
            fmt = "rkm1"
        elif suffix in (".mtx", ".mm"):
            fmt = "mtx"
        elif suffix == ".csv":
            fmt = "csv"
        else:
            with open(path, "rb") as fh:
                head = fh.read(14)
            if head[:4] == RKM1_MAGIC:
                fmt = "rkm1"
            elif head.startswith(b"%%MatrixMarket"):
                fmt = "mtx"
            else:
                fmt = "csv"
    if fmt == "rkm1":
        return read_rkm1(path), None
    if fmt == "mtx":
        return read_matrix_market(path), None
    if fmt == "csv":
        return read_csv_matrix(path, header=csv_header, label_column=label_column)
    raise InvalidData(f"unknown matrix format {fmt!r}")


def atomic_write_bytes(path, payload: bytes) -> None:
    """Write via a temp file in the destination directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def format_float(x: float) -> str:
    """Shortest round-trip decimal form; deterministic across runs."""
    return repr(float(x))


def write_csv_rows(path, header: list[str], rows) -> None:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(c) if isinstance(c, float) else c for c in row])
    atomic_write_text(path, buf.getvalue())
