"""Reading and writing 8-bit grayscale PGM and PNG files."""

import os
import re

import numpy as np
from PIL import Image as PILImage, UnidentifiedImageError

from .errors import CorruptFile, UnsupportedFormat
from .image import as_image

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

_TOKEN = re.compile(rb"#[^\n]*|\S+")


def _pgm_tokens(data: bytes, count: int):
    """Return ``count`` header tokens and the offset just past the last one."""
    tokens = []
    pos = 0
    while len(tokens) < count:
        m = _TOKEN.search(data, pos)
        if m is None:
            raise CorruptFile("truncated PGM header")
        pos = m.end()
        if not m.group().startswith(b"#"):
            tokens.append(m.group())
    return tokens, pos


def _read_pgm(data: bytes) -> np.ndarray:
    (magic, w, h, maxval), pos = _pgm_tokens(data, 4)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise CorruptFile("non-numeric PGM header field") from None
    if width < 1 or height < 1:
        raise CorruptFile(f"invalid PGM dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedFormat(f"only maxval 255 PGM files are supported, got {maxval}")
    n = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        raster = data[pos + 1 : pos + 1 + n]
        if len(raster) != n:
            raise CorruptFile(f"P5 raster has {len(raster)} bytes, expected {n}")
        values = np.frombuffer(raster, dtype=np.uint8)
    else:
        body = re.sub(rb"#[^\n]*", b"", data[pos:]).split()
        if len(body) < n:
            raise CorruptFile(f"P2 raster has {len(body)} samples, expected {n}")
        try:
            values = np.array([int(v) for v in body[:n]], dtype=np.int64)
        except ValueError:
            raise CorruptFile("non-numeric sample in P2 raster") from None
        if values.min() < 0 or values.max() > maxval:
            raise CorruptFile("P2 sample outside [0, maxval]")
    return values.reshape(height, width).astype(np.float64)


def _read_png(path: str) -> np.ndarray:
    try:
        with PILImage.open(path) as im:
            if im.format != "PNG":
                raise UnsupportedFormat(f"{path}: not a PNG file")
            if im.mode != "L":
                raise UnsupportedFormat(
                    f"{path}: PNG mode {im.mode!r} is not 8-bit grayscale"
                )
            return np.asarray(im, dtype=np.float64)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise CorruptFile(f"{path}: {exc}") from exc


def load_image(path) -> np.ndarray:
    """Load an 8-bit grayscale PGM (P2/P5) or PNG file as a float image.

    Raises
    ------
    FileNotFoundError
        If ``path`` does not exist.
    UnsupportedFormat
        For color, palette, 16-bit or otherwise non-8-bit-gray files.
    CorruptFile
        If the file is truncated or its header is malformed.
    """
    path = os.fspath(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] in (b"P2", b"P5"):
        return as_image(_read_pgm(data))
    if data[:8] == PNG_SIGNATURE:
        return as_image(_read_png(path))
    if data[:1] == b"P" and data[1:2].isdigit():
        raise UnsupportedFormat(f"{path}: Netpbm type {data[:2].decode()} is not grayscale PGM")
    raise UnsupportedFormat(f"{path}: not a PGM or PNG file")


def quantize(img) -> np.ndarray:
    """Clamp to [0, 255] and round half away from zero to ``uint8``."""
    img = np.clip(as_image(img), 0.0, 255.0)
    return np.floor(img + 0.5).astype(np.uint8)


def save_image(img, path, ascii: bool = False) -> None:
    """Write ``img`` as an 8-bit grayscale file chosen by extension.

    ``.png`` writes PNG, anything else writes PGM (binary P5 unless
    ``ascii`` is set). This is the only place intensities are clamped.
    """
    path = os.fspath(path)
    pixels = quantize(img)
    if path.lower().endswith(".png"):
        PILImage.fromarray(pixels).save(path, format="PNG")
        return
    h, w = pixels.shape
    with open(path, "wb") as fh:
        if ascii:
            fh.write(f"P2\n{w} {h}\n255\n".encode())
            for row in pixels:
                fh.write((" ".join(str(v) for v in row) + "\n").encode())
        else:
            fh.write(f"P5\n{w} {h}\n255\n".encode())
            fh.write(pixels.tobytes())
