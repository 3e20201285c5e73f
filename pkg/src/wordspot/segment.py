"""Projection-profile page segmentation.

Lines are maximal runs of rows whose ink count exceeds a small noise
threshold; words are runs of columns inside a line band, where zero-ink
column gaps longer than gap_factor * band height separate words and shorter
gaps are kept inside a word.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pnm import BinaryImage
from .util import round_half_up

DEFAULT_GAP_FACTOR = 0.2


@dataclass
class Profile:
    """Ink-pixel counts per row or per column.

    `extent` is the size of the profiled region in the direction
    perpendicular to the axis (image width for a row profile, band height
    for a column profile); every count is bounded by it.
    """

    counts: list[int]
    axis: str
    extent: int

    def __post_init__(self):
        if self.axis not in ("row", "column"):
            raise ValueError(f"axis must be 'row' or 'column', got {self.axis!r}")
        if any(c < 0 or c > self.extent for c in self.counts):
            raise ValueError("profile count outside 0..extent")


@dataclass(frozen=True)
class LineBand:
    """Inclusive row range of one text line."""

    row_start: int
    row_end: int

    def __post_init__(self):
        if self.row_start > self.row_end:
            raise ValueError(f"empty band {self.row_start}..{self.row_end}")

    @property
    def height(self) -> int:
        return self.row_end - self.row_start + 1


@dataclass(frozen=True)
class WordBox:
    """Inclusive pixel bounding box, tight on both axes."""

    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValueError(f"degenerate box {self}")

    @property
    def width(self) -> int:
        return self.x2 - self.x1 + 1

    @property
    def height(self) -> int:
        return self.y2 - self.y1 + 1


def _check_band(img: BinaryImage, band: LineBand) -> None:
    if band.row_start < 0 or band.row_end >= img.height:
        raise ValueError(
            f"band {band.row_start}..{band.row_end} outside image rows 0..{img.height - 1}"
        )


def _runs_above(counts: list[int], threshold: int) -> list[tuple[int, int]]:
    """Maximal inclusive runs of indices with count > threshold."""
    runs = []
    start = None
    for i, c in enumerate(counts):
        if c > threshold:
            if start is None:
                start = i
        elif start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(counts) - 1))
    return runs


def row_profile(img: BinaryImage) -> Profile:
    """Ink pixels per row of the whole image."""
    ink = img.width - img.bits.sum(axis=1, dtype=np.int64)
    return Profile([int(v) for v in ink], "row", img.width)


def column_profile(img: BinaryImage, band: LineBand) -> Profile:
    """Ink pixels per column, restricted to the band's rows."""
    _check_band(img, band)
    sub = img.bits[band.row_start : band.row_end + 1]
    ink = band.height - sub.sum(axis=0, dtype=np.int64)
    return Profile([int(v) for v in ink], "column", band.height)


def default_noise_threshold(width: int) -> int:
    """Row counts at or below this are treated as inter-line gap."""
    return max(1, round_half_up(0.005 * width))


def segment_lines(profile: Profile, noise_threshold: int | None = None) -> list[LineBand]:
    """Group consecutive rows with count above the noise threshold into bands.

    With noise_threshold=None the width-proportional default is used. An
    all-gap profile yields an empty list.
    """
    if profile.axis != "row":
        raise ValueError("segment_lines needs a row profile")
    if noise_threshold is None:
        noise_threshold = default_noise_threshold(profile.extent)
    return [LineBand(a, b) for a, b in _runs_above(profile.counts, noise_threshold)]


def segment_words(
    img: BinaryImage, band: LineBand, gap_factor: float = DEFAULT_GAP_FACTOR
) -> list[WordBox]:
    """Split one line band into word boxes via its column profile.

    The band height stands in for the line's font size. Zero-ink column runs
    of length <= round(gap_factor * band height) are inter-character gaps and
    stay inside a word; longer runs split words. Leading and trailing empty
    columns are trimmed, never treated as splits. Each box is tightened to
    the minimal bounding box of its ink on both axes.
    """
    _check_band(img, band)
    counts = column_profile(img, band).counts
    ink_runs = _runs_above(counts, 0)
    if not ink_runs:
        return []

    gap_limit = round_half_up(gap_factor * band.height)
    groups: list[list[tuple[int, int]]] = [[ink_runs[0]]]
    for run in ink_runs[1:]:
        gap = run[0] - groups[-1][-1][1] - 1
        if gap <= gap_limit:
            groups[-1].append(run)
        else:
            groups.append([run])

    boxes = []
    band_rows = img.bits[band.row_start : band.row_end + 1]
    for group in groups:
        x1, x2 = group[0][0], group[-1][1]
        sub = band_rows[:, x1 : x2 + 1]
        ink_rows = np.where((sub == 0).any(axis=1))[0]
        y1 = band.row_start + int(ink_rows[0])
        y2 = band.row_start + int(ink_rows[-1])
        boxes.append(WordBox(x1, y1, x2, y2))
    return boxes


def crop_box(img: BinaryImage, box: WordBox) -> BinaryImage:
    """Sub-view of the image covering exactly the box (shares storage)."""
    if box.x1 < 0 or box.y1 < 0 or box.x2 >= img.width or box.y2 >= img.height:
        raise ValueError(f"box {box} outside image {img.width}x{img.height}")
    return BinaryImage(
        box.width, box.height, img.bits[box.y1 : box.y2 + 1, box.x1 : box.x2 + 1]
    )
