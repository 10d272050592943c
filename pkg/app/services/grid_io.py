import csv
import logging
from pathlib import Path

import numpy as np

from app.core.errors import GridFormatError
from app.models.grid import GridFunction

logger = logging.getLogger("berezin_verifier.grid_io")

MAGIC = b"BGF1"
HEADER = np.dtype([("magic", "S4"), ("half_width", "<f8"), ("resolution", "<i4")])
SAMPLE = np.dtype("<c16")


def encode_grid(grid: GridFunction) -> bytes:
    header = np.array([(MAGIC, grid.half_width, grid.resolution)], dtype=HEADER)
    return header.tobytes() + np.ascontiguousarray(grid.values, dtype=SAMPLE).tobytes()


def decode_grid(payload: bytes) -> GridFunction:
    if len(payload) < HEADER.itemsize:
        raise GridFormatError(f"BGF1 payload of {len(payload)} bytes is shorter than its header.")
    header = np.frombuffer(payload, dtype=HEADER, count=1)[0]
    if bytes(header["magic"]) != MAGIC:
        raise GridFormatError(f"Bad magic {bytes(header['magic'])!r}; expected {MAGIC!r}.")
    half_width = float(header["half_width"])
    resolution = int(header["resolution"])
    if resolution <= 0 or not half_width > 0:
        raise GridFormatError(f"Invalid grid header R={half_width}, N={resolution}.")
    expected = HEADER.itemsize + resolution * resolution * SAMPLE.itemsize
    if len(payload) != expected:
        raise GridFormatError(f"BGF1 payload has {len(payload)} bytes, expected {expected}.")
    values = np.frombuffer(payload, dtype=SAMPLE, offset=HEADER.itemsize).reshape(resolution, resolution)
    try:
        return GridFunction(half_width=half_width, resolution=resolution, values=values)
    except ValueError as exc:
        raise GridFormatError(f"BGF1 samples rejected: {exc}") from exc


def write_grid(path: Path, grid: GridFunction) -> None:
    path.write_bytes(encode_grid(grid))
    logger.info("Wrote %dx%d grid to %s", grid.resolution, grid.resolution, path)


def read_grid(path: Path) -> GridFunction:
    try:
        return decode_grid(path.read_bytes())
    except GridFormatError as exc:
        raise GridFormatError(f"{path}: {exc}") from exc


def write_csv_slice(path: Path, grid: GridFunction, row: int | None = None) -> None:
    """Write one grid row (default N//2) as x, y, re, im records."""
    row = grid.resolution // 2 if row is None else row
    if not 0 <= row < grid.resolution:
        raise ValueError(f"Row {row} is outside 0..{grid.resolution - 1}")
    axis = grid.axis()
    with path.open("w", newline="", encoding="utf-8") as fp:
        writer = csv.writer(fp)
        writer.writerow(["x", "y", "re", "im"])
        for x, value in zip(axis, grid.values[row]):
            writer.writerow([repr(float(x)), repr(float(axis[row])), repr(float(value.real)), repr(float(value.imag))])
    logger.info("Wrote CSV slice row %d to %s", row, path)
