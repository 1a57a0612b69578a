"""Readers and writers for the ingestion formats.

Masks travel as binary PGM (P5, maxval up to 255, nonzero means member) or
as CSV grids of 0/1 integers. Depth and attention maps travel as grayscale
PFM ("Pf", scale sign encodes endianness, rows stored bottom-to-top) or as
CSV grids of reals. Everything here is plain enough to write from any
detector stack without shared libraries.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .core import DepthMap, MassMap2D
from .errors import MalformedFileError, UnsupportedFormatError


def _read_pgm_token(data: bytes, pos: int, path) -> tuple[bytes, int]:
    # Skip whitespace and '#' comment lines between header tokens.
    while pos < len(data):
        ch = data[pos : pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
        else:
            break
    start = pos
    while pos < len(data) and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise MalformedFileError(f"{path}: truncated header")
    return data[start:pos], pos


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a binary (P5) PGM file into a (height, width) integer array."""
    data = Path(path).read_bytes()
    if data[:2] != b"P5":
        raise MalformedFileError(f"{path}: not a binary PGM (missing P5 magic)")
    pos = 2
    fields = []
    for _ in range(3):
        token, pos = _read_pgm_token(data, pos, path)
        try:
            fields.append(int(token))
        except ValueError:
            raise MalformedFileError(f"{path}: non-numeric header token {token!r}") from None
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise MalformedFileError(f"{path}: non-positive dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise UnsupportedFormatError(f"{path}: maxval {maxval} unsupported (need 1..255)")
    pos += 1  # single whitespace byte after maxval
    pixels = data[pos : pos + width * height]
    if len(pixels) != width * height:
        raise MalformedFileError(f"{path}: expected {width * height} pixel bytes, got {len(pixels)}")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width)


def write_pgm(path: str | Path, grid: np.ndarray, maxval: int = 255) -> None:
    arr = np.asarray(grid)
    height, width = arr.shape
    body = np.where(arr != 0, maxval, 0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
        fh.write(body.tobytes())


def read_pfm(path: str | Path) -> np.ndarray:
    """Read a grayscale PFM into a (height, width) float array, top row first."""
    data = Path(path).read_bytes()
    header = data[:2]
    if header == b"PF":
        raise UnsupportedFormatError(f"{path}: color PFM unsupported, need grayscale 'Pf'")
    if header != b"Pf":
        raise MalformedFileError(f"{path}: not a PFM (missing Pf magic)")
    # Three whitespace-terminated header lines: magic, dims, scale.
    match = re.match(rb"Pf\s+(\d+)\s+(\d+)\s+([-+0-9.eE]+)\s", data)
    if match is None:
        raise MalformedFileError(f"{path}: malformed PFM header")
    width = int(match.group(1))
    height = int(match.group(2))
    try:
        scale = float(match.group(3))
    except ValueError:
        raise MalformedFileError(f"{path}: bad scale {match.group(3)!r}") from None
    if scale == 0:
        raise MalformedFileError(f"{path}: zero scale")
    endian = "<" if scale < 0 else ">"
    body = data[match.end() :]
    count = width * height
    if len(body) < 4 * count:
        raise MalformedFileError(f"{path}: expected {4 * count} data bytes, got {len(body)}")
    values = np.frombuffer(body[: 4 * count], dtype=f"{endian}f4").astype(np.float64)
    grid = values.reshape(height, width)[::-1]  # rows are stored bottom-to-top
    nan_pos = np.argwhere(np.isnan(grid))
    if nan_pos.size:
        y, x = nan_pos[0]
        raise MalformedFileError(f"{path}: NaN value at pixel ({x}, {y})")
    return grid


def write_pfm(path: str | Path, grid: np.ndarray) -> None:
    arr = np.asarray(grid, dtype=np.float32)
    height, width = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"Pf\n{width} {height}\n-1.0\n".encode("ascii"))
        fh.write(arr[::-1].tobytes())


def read_csv_grid(path: str | Path) -> np.ndarray:
    try:
        grid = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise MalformedFileError(f"{path}: bad CSV grid: {exc}") from exc
    if grid.size == 0:
        raise MalformedFileError(f"{path}: empty CSV grid")
    return grid


def write_csv_grid(path: str | Path, grid: np.ndarray) -> None:
    np.savetxt(path, np.asarray(grid), delimiter=",", fmt="%.9g")


def _is_pgm(path: Path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(2) == b"P5"


def _is_pfm(path: Path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(2) in (b"Pf", b"PF")


def load_mask(path: str | Path) -> MassMap2D:
    """Load a segmentation mask; nonzero pixels become weight 1.

    An all-zero mask loads fine and is flagged at evaluation time.
    """
    path = Path(path)
    # A .pgm extension commits to the PGM parser so header damage is
    # reported as malformed, not as an unknown format.
    if path.suffix.lower() in (".pgm", ".pnm") or _is_pgm(path):
        grid = read_pgm(path)
    elif path.suffix.lower() == ".csv":
        grid = read_csv_grid(path)
    else:
        raise UnsupportedFormatError(f"{path}: masks must be binary PGM (P5) or CSV")
    return MassMap2D.from_array((np.asarray(grid) != 0).astype(np.float64))


def load_depth(path: str | Path, convention: str = "depth") -> DepthMap:
    """Load a depth (or disparity) map from PFM or CSV."""
    path = Path(path)
    if path.suffix.lower() == ".pfm" or _is_pfm(path):
        grid = read_pfm(path)
    elif path.suffix.lower() == ".csv":
        grid = read_csv_grid(path)
    else:
        raise UnsupportedFormatError(f"{path}: depth must be grayscale PFM or CSV")
    return DepthMap(grid.shape[1], grid.shape[0], grid, convention)


def load_attention(path: str | Path) -> MassMap2D:
    """Load an attention map (nonnegative float grid) from PFM or CSV."""
    path = Path(path)
    if path.suffix.lower() == ".pfm" or _is_pfm(path):
        grid = read_pfm(path)
    elif path.suffix.lower() == ".csv":
        grid = read_csv_grid(path)
    else:
        raise UnsupportedFormatError(f"{path}: attention maps must be grayscale PFM or CSV")
    return MassMap2D.from_array(grid)


def write_float_map(path: str | Path, grid: np.ndarray) -> None:
    """Write a float grid (e.g. a gradient) as PFM, or CSV by extension."""
    if Path(path).suffix.lower() == ".csv":
        write_csv_grid(path, grid)
    else:
        write_pfm(path, grid)
