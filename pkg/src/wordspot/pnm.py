"""NetPBM image reading, PGM writing, and fixed-threshold binarization.

Supports the uncompressed NetPBM family only: magics P1-P6, `#` comments,
arbitrary whitespace between header tokens, and for the raw formats a single
whitespace byte between the header and the raster. Output is always binary
PGM (P5) with maxval 255.

Pixel conventions used throughout the pipeline:
  - grayscale: 0 is black, maxval is white
  - binary: bit 0 is ink (black), bit 1 is background (white)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# ITU-R BT.601 luma weights for the RGB -> gray conversion.
_LUMA = np.array([0.299, 0.587, 0.114])

_WS = b" \t\n\r\x0b\x0c"
_MAX_PIXELS = 100_000_000


class PnmError(ValueError):
    """Malformed NetPBM data. `offset` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.message = message
        self.offset = offset


@dataclass(eq=False)
class GrayImage:
    """Grayscale raster; `pixels` has shape (height, width), row-major."""

    width: int
    height: int
    maxval: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")
        if not 1 <= self.maxval <= 65535:
            raise ValueError(f"maxval {self.maxval} out of range 1..65535")
        self.pixels = np.asarray(self.pixels, dtype=np.uint16).reshape(
            self.height, self.width
        )
        if int(self.pixels.max()) > self.maxval:
            raise ValueError("pixel value exceeds maxval")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.maxval == other.maxval
            and np.array_equal(self.pixels, other.pixels)
        )


@dataclass(eq=False)
class BinaryImage:
    """Two-level raster; bit 0 = ink, bit 1 = background."""

    width: int
    height: int
    bits: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")
        self.bits = np.asarray(self.bits, dtype=np.uint8).reshape(
            self.height, self.width
        )
        if not ((self.bits == 0) | (self.bits == 1)).all():
            raise ValueError("binary image bits must be 0 or 1")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.bits, other.bits)
        )

    def ink_count(self) -> int:
        return int((self.bits == 0).sum())


class _Reader:
    """Byte cursor over a NetPBM file, tracking offsets for error messages."""

    __slots__ = ("data", "pos")

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_filler(self) -> None:
        data, n = self.data, len(self.data)
        while self.pos < n:
            c = data[self.pos]
            if c in _WS:
                self.pos += 1
            elif c == 0x23:  # '#' comment runs to end of line
                while self.pos < n and data[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                break

    def token(self, what: str) -> tuple[bytes, int]:
        self.skip_filler()
        data, n = self.data, len(self.data)
        if self.pos >= n:
            raise PnmError(f"unexpected end of file while reading {what}", n)
        start = self.pos
        while self.pos < n and data[self.pos] not in _WS and data[self.pos] != 0x23:
            self.pos += 1
        return data[start : self.pos], start

    def integer(self, what: str, lo: int, hi: int) -> int:
        tok, start = self.token(what)
        if not tok.isdigit():
            raise PnmError(f"malformed {what}: {tok!r}", start)
        value = int(tok)
        if not lo <= value <= hi:
            raise PnmError(f"{what} {value} outside {lo}..{hi}", start)
        return value

    def single_whitespace(self) -> None:
        if self.pos >= len(self.data) or self.data[self.pos] not in _WS:
            raise PnmError("raster must follow a single whitespace byte", self.pos)
        self.pos += 1

    def raw(self, count: int, what: str) -> tuple[bytes, int]:
        start = self.pos
        have = len(self.data) - self.pos
        if have < count:
            raise PnmError(
                f"truncated {what}: need {count} bytes, have {have}", len(self.data)
            )
        self.pos += count
        return self.data[start : start + count], start


def _ascii_samples(r: _Reader, count: int, maxval: int) -> np.ndarray:
    vals = np.empty(count, dtype=np.uint16)
    for i in range(count):
        vals[i] = r.integer("sample", 0, maxval)
    return vals


def _ascii_bits(r: _Reader, count: int) -> np.ndarray:
    # P1 bits may be packed without separators; read digit by digit.
    vals = np.empty(count, dtype=np.uint16)
    for i in range(count):
        r.skip_filler()
        if r.pos >= len(r.data):
            raise PnmError("truncated bitmap", len(r.data))
        c = r.data[r.pos]
        if c == 0x30:  # '0' = white
            vals[i] = 1
        elif c == 0x31:  # '1' = ink
            vals[i] = 0
        else:
            raise PnmError(f"invalid bitmap digit {chr(c)!r}", r.pos)
        r.pos += 1
    return vals


def _raw_samples(r: _Reader, count: int, maxval: int) -> np.ndarray:
    if maxval < 256:
        raw, start = r.raw(count, "raster")
        vals = np.frombuffer(raw, dtype=np.uint8).astype(np.uint16)
        size = 1
    else:
        raw, start = r.raw(2 * count, "raster")
        vals = np.frombuffer(raw, dtype=">u2").astype(np.uint16)
        size = 2
    if int(vals.max(initial=0)) > maxval:
        idx = int(np.argmax(vals > maxval))
        raise PnmError(f"sample {int(vals[idx])} exceeds maxval {maxval}", start + idx * size)
    return vals


def _luma(rgb: np.ndarray) -> np.ndarray:
    flat = rgb.astype(np.float64).reshape(-1, 3)
    return np.floor(flat @ _LUMA + 0.5).astype(np.uint16)


def load_image(data: bytes) -> GrayImage:
    """Parse PBM (P1/P4), PGM (P2/P5) or PPM (P3/P6) bytes into a GrayImage.

    PGM values are copied verbatim. PBM ink bits map to gray 0 and white bits
    to gray 1 (maxval 1). PPM pixels are converted with BT.601 luma, rounded
    half-up. Raises PnmError with the offending byte offset on malformed
    input.
    """
    r = _Reader(data)
    magic, start = r.token("magic number")
    if magic not in (b"P1", b"P2", b"P3", b"P4", b"P5", b"P6"):
        raise PnmError(f"unsupported or malformed magic number {magic!r}", start)

    width = r.integer("width", 1, 1_000_000)
    height = r.integer("height", 1, 1_000_000)
    if width * height > _MAX_PIXELS:
        raise PnmError(f"image too large: {width}x{height}", r.pos)

    if magic in (b"P1", b"P4"):
        maxval = 1
        if magic == b"P1":
            gray = _ascii_bits(r, width * height)
        else:
            r.single_whitespace()
            row_bytes = (width + 7) // 8
            raw, _ = r.raw(row_bytes * height, "bitmap raster")
            packed = np.frombuffer(raw, dtype=np.uint8).reshape(height, row_bytes)
            bits = np.unpackbits(packed, axis=1)[:, :width]
            gray = (1 - bits).astype(np.uint16)  # bit 1 = ink = gray 0
        return GrayImage(width, height, maxval, gray)

    maxval = r.integer("maxval", 1, 65535)
    samples_per_pixel = 3 if magic in (b"P3", b"P6") else 1
    count = width * height * samples_per_pixel

    if magic in (b"P2", b"P3"):
        vals = _ascii_samples(r, count, maxval)
    else:
        r.single_whitespace()
        vals = _raw_samples(r, count, maxval)

    if samples_per_pixel == 3:
        vals = _luma(vals)
    return GrayImage(width, height, maxval, vals)


def binarize(img: GrayImage, threshold_fraction: float = 0.5) -> BinaryImage:
    """Threshold a GrayImage: bit 0 (ink) iff gray < threshold_fraction * maxval.

    The comparison is strict, so the 0.5 default is unambiguous at the
    midpoint. threshold_fraction must lie in the open interval (0, 1).
    """
    if not 0.0 < threshold_fraction < 1.0:
        raise ValueError(f"threshold_fraction {threshold_fraction} not in (0, 1)")
    cut = threshold_fraction * img.maxval
    bits = (img.pixels >= cut).astype(np.uint8)
    return BinaryImage(img.width, img.height, bits)


def rescale_to_255(img: GrayImage) -> GrayImage:
    """Return a copy with maxval 255, rescaling values half-up if needed."""
    if img.maxval == 255:
        return GrayImage(img.width, img.height, 255, img.pixels.copy())
    scaled = np.floor(img.pixels.astype(np.float64) * 255.0 / img.maxval + 0.5)
    return GrayImage(img.width, img.height, 255, scaled.astype(np.uint16))


def write_gray(img: GrayImage) -> bytes:
    """Serialize as binary PGM (P5), maxval 255.

    Round-trips through load_image bit-exactly when img.maxval is 255.
    """
    px = rescale_to_255(img).pixels
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + px.astype(np.uint8).tobytes()
