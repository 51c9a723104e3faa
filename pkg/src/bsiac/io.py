"""CSV, JSON and PGM readers/writers.

Floats go to CSV via ``repr`` so that reading a file back reproduces the
written values bit for bit.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


class InputError(ValueError):
    """Malformed input file."""


def write_csv(path, header, columns) -> None:
    columns = [np.asarray(c) for c in columns]
    n = len(columns[0])
    if any(len(c) != n for c in columns):
        raise ValueError("CSV columns must have equal length")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(n):
            w.writerow([_fmt(c[i]) for c in columns])


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def read_csv(path) -> dict:
    """Read a numeric CSV into ``{column name: float array}``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    out = {}
    for j, name in enumerate(header):
        col = [r[j] for r in body]
        try:
            out[name] = np.array([float(v) if v != "" else np.nan for v in col])
        except ValueError:
            out[name] = np.array(col, dtype=object)
    return out


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _pgm_tokens(data: bytes):
    """Yield header tokens and the offset just past the last one read."""
    pos = 0
    while True:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise InputError("truncated PGM header")
        yield data[start:pos], pos


def read_pgm(path) -> np.ndarray:
    """Read a P2 or P5 PGM as floats in ``[0, 1]`` (row-major image)."""
    data = Path(path).read_bytes()
    tokens = _pgm_tokens(data)
    try:
        magic, _ = next(tokens)
        width, _ = next(tokens)
        height, _ = next(tokens)
        maxval, end = next(tokens)
        width, height, maxval = int(width), int(height), int(maxval)
    except (StopIteration, ValueError) as exc:
        raise InputError(f"{path}: malformed PGM header") from exc
    if magic not in (b"P2", b"P5"):
        raise InputError(f"{path}: unsupported PGM magic {magic!r}")
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise InputError(f"{path}: bad PGM dimensions or maxval")
    count = width * height
    if magic == b"P5":
        raw = data[end + 1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        if len(raw) < count * dtype.itemsize:
            raise InputError(f"{path}: truncated PGM raster")
        pix = np.frombuffer(raw, dtype=dtype, count=count).astype(float)
    else:
        try:
            pix = np.array([float(t) for t in data[end:].split()[:count]])
        except ValueError as exc:
            raise InputError(f"{path}: non-numeric PGM raster") from exc
        if pix.size < count:
            raise InputError(f"{path}: truncated PGM raster")
    if np.any(pix > maxval):
        raise InputError(f"{path}: pixel value above maxval")
    return pix.reshape(height, width) / maxval


def write_pgm(path, image, binary: bool = True, maxval: int = 255) -> None:
    """Write an image with values in ``[0, 1]``; values outside are clipped."""
    img = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    pix = np.rint(img * maxval).astype(int)
    height, width = pix.shape
    if binary:
        dtype = ">u2" if maxval > 255 else "u1"
        with open(path, "wb") as fh:
            fh.write(f"P5\n{width} {height}\n{maxval}\n".encode())
            fh.write(pix.astype(dtype).tobytes())
    else:
        with open(path, "w") as fh:
            fh.write(f"P2\n{width} {height}\n{maxval}\n")
            for row in pix:
                fh.write(" ".join(str(v) for v in row) + "\n")
