"""Image and palette I/O: PNG via Pillow, plus a dependency-free PPM reader."""

from __future__ import annotations

import csv
import os
import re

import numpy as np

from .colorspace import RgbColor


_HEX = re.compile(r"#?[0-9a-fA-F]{6}")


class ImageDecodeError(ValueError):
    pass


def _read_ppm(data: bytes):
    tokens = []
    pos = 0
    # header: magic, width, height, maxval; '#' starts a comment
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise ImageDecodeError("truncated PPM header")
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    magic = tokens[0]
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ImageDecodeError("bad PPM header") from None
    if w <= 0 or h <= 0 or not 0 < maxval < 256:
        raise ImageDecodeError(f"unsupported PPM geometry {w}x{h} maxval {maxval}")
    if magic == b"P6":
        body = data[pos + 1:pos + 1 + 3 * w * h]
        if len(body) != 3 * w * h:
            raise ImageDecodeError("truncated PPM pixel data")
        arr = np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)
    elif magic == b"P3":
        vals = data[pos:].split()
        if len(vals) < 3 * w * h:
            raise ImageDecodeError("truncated PPM pixel data")
        arr = np.array([int(v) for v in vals[:3 * w * h]], dtype=np.int64).reshape(h, w, 3)
    else:
        raise ImageDecodeError(f"not a PPM file (magic {magic!r})")
    if maxval != 255:
        arr = np.rint(arr.astype(np.float64) * (255.0 / maxval))
    return arr.astype(np.uint8)


def read_image(path) -> np.ndarray:
    """Decode a PNG (or any Pillow format) or PPM into an ``(H, W, 3)`` uint8 array."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ImageDecodeError(f"cannot read {path}: {exc.strerror}") from None
    if data[:2] in (b"P3", b"P6"):
        return _read_ppm(data)
    from PIL import Image, UnidentifiedImageError
    import io

    try:
        with Image.open(io.BytesIO(data)) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    except (UnidentifiedImageError, OSError) as exc:
        raise ImageDecodeError(f"cannot decode {path}: {exc}") from None


def write_png(path, array):
    from PIL import Image

    arr = np.ascontiguousarray(array, dtype=np.uint8)
    mode = "L" if arr.ndim == 2 else "RGB"
    Image.fromarray(arr, mode=mode).save(path, format="PNG")


def write_ppm(path, array):
    arr = np.ascontiguousarray(array, dtype=np.uint8)
    h, w = arr.shape[:2]
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(arr.tobytes())


def read_palette(path):
    """One ``RRGGBB`` per line; blank lines and ``#`` comments are skipped.

    A first line reading ``hex`` (a CSV header) is also skipped.
    """
    colors = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not row[0].strip():
                continue
            cell = row[0].strip()
            if lineno == 1 and cell.lower() == "hex":
                continue
            if cell.startswith("#") and not _HEX.fullmatch(cell):
                continue
            try:
                colors.append(RgbColor.from_hex(cell))
            except ValueError as exc:
                raise ValueError(f"{os.fspath(path)}:{lineno}: {exc}") from None
    return colors


def write_palette(path, colors):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for c in colors:
            fh.write(RgbColor(*c).to_hex() + "\n")
