"""On-disk formats: field snapshots and the diagnostics CSV.

Snapshot layout (version 1), little-endian, row-major:

    bytes 0..63    text header, NUL padded:  b"BEQT2D\\n" + "1 <n> <t>\\n"
                   (version, grid size, time; t in shortest round-trip
                   decimal form)
    bytes 64..     four n*n float64 arrays in order u1, u2, p, q

Round trips are bit-exact.  Size, magic and version are validated on read;
grids are never resampled implicitly.

The diagnostics CSV has exactly the DiagnosticsRow fields as the header, in
declared order; values are written with repr() (shortest representation
that parses back equal), missing values as nan.
"""

from __future__ import annotations

import numpy as np

from .diagnostics import CSV_FIELDS, DiagnosticsRow
from .fields import Grid, QTensorField, SimState, VelocityField

__all__ = [
    "SnapshotError",
    "SchemaError",
    "write_snapshot",
    "read_snapshot",
    "CsvWriter",
    "read_diagnostics_csv",
]

MAGIC = b"BEQT2D\n"
VERSION = 1
HEADER_SIZE = 64


class SnapshotError(ValueError):
    pass


class SchemaError(ValueError):
    pass


def write_snapshot(state: SimState, path) -> None:
    n = state.grid.n
    header = MAGIC + f"{VERSION} {n} {state.t!r}\n".encode("ascii")
    if len(header) > HEADER_SIZE:
        raise SnapshotError(f"header too long ({len(header)} bytes)")
    header = header.ljust(HEADER_SIZE, b"\x00")
    with open(path, "wb") as fh:
        fh.write(header)
        for arr in (state.u.u1, state.u.u2, state.Q.p, state.Q.q):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_snapshot(path) -> SimState:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER_SIZE or not raw.startswith(MAGIC):
        raise SnapshotError(f"{path}: not a BEQT2D snapshot (bad magic)")
    fields = raw[len(MAGIC) : HEADER_SIZE].rstrip(b"\x00").split()
    if len(fields) != 3:
        raise SnapshotError(f"{path}: malformed header")
    version = int(fields[0])
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported snapshot version {version}")
    n = int(fields[1])
    t = float(fields[2])
    expected = HEADER_SIZE + 4 * n * n * 8
    if len(raw) != expected:
        raise SnapshotError(f"{path}: size mismatch, {len(raw)} bytes, expected {expected}")
    grid = Grid(n)
    body = np.frombuffer(raw, dtype="<f8", offset=HEADER_SIZE)
    u1, u2, p, q = (body[i * n * n : (i + 1) * n * n].reshape(n, n).copy() for i in range(4))
    return SimState(t, VelocityField(u1, u2, grid), QTensorField(p, q, grid))


def _fmt(v: float) -> str:
    return repr(float(v))


class CsvWriter:
    """Streaming writer for the diagnostics CSV."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="\n")
        self._fh.write(",".join(CSV_FIELDS) + "\n")

    def write_row(self, row: DiagnosticsRow):
        self._fh.write(",".join(_fmt(getattr(row, name)) for name in CSV_FIELDS) + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_diagnostics_csv(path) -> dict:
    """Parse a diagnostics CSV into {column: float array}; the header must
    match the DiagnosticsRow schema exactly."""
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split(",")
        if header != CSV_FIELDS:
            raise SchemaError(
                f"{path}: header mismatch, got {header}, expected {CSV_FIELDS}"
            )
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    if any(len(r) != len(CSV_FIELDS) for r in rows):
        raise SchemaError(f"{path}: ragged row")
    data = np.array([[float(v) for v in r] for r in rows]) if rows else np.zeros((0, len(CSV_FIELDS)))
    return {name: data[:, i] for i, name in enumerate(CSV_FIELDS)}
