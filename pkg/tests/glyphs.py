"""Synthetic block-glyph word and page rendering with known ground truth.

Each letter is drawn as the sequence of vertical bars named by its shape
code expansion: an 'A' bar spans ascender+body rows, an 'x' bar the body
rows, a 'g' bar body+descender rows. In connected mode consecutive bars are
joined by a one-pixel-tall stroke in the middle of the body (cursive-style),
which makes the joins the column-profile minimum; in blocky mode bars are
separated by small empty gaps instead. Ground-truth word boxes are the tight
bounding boxes of the pasted ink.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from wordspot.pnm import BinaryImage
from wordspot.segment import WordBox, default_noise_threshold
from wordspot.shapecode import LETTER_CODES
from wordspot.util import round_half_up


@dataclass(frozen=True)
class GlyphMetrics:
    font: int
    ascent: int
    body: int
    descent: int
    bar_width: int
    join_width: int
    gap_width: int


def metrics(font: int, bar_width: int | None = None, join_width: int | None = None,
            gap_width: int = 2) -> GlyphMetrics:
    ascent = round_half_up(font / 4)
    descent = ascent
    body = font - ascent - descent
    if bar_width is None:
        bar_width = max(2, round_half_up(font / 4))
    if join_width is None:
        join_width = max(2, round_half_up(0.225 * font))
    return GlyphMetrics(font, ascent, body, descent, bar_width, join_width, gap_width)


def word_symbols(text: str) -> str:
    return "".join(LETTER_CODES[c] for c in text)


def render_word(text: str, m: GlyphMetrics, connected: bool = True) -> np.ndarray:
    """Bits array (font rows x word width), 0 = ink. Rows outside the word's
    tallest bars stay background, so the tight box height varies with
    content, just like real handwriting."""
    symbols = word_symbols(text)
    step = m.join_width if connected else m.gap_width
    width = len(symbols) * m.bar_width + (len(symbols) - 1) * step
    bits = np.ones((m.font, width), dtype=np.uint8)
    body_top = m.ascent
    body_bottom = m.ascent + m.body - 1
    join_row = m.ascent + m.body // 2
    x = 0
    for i, sym in enumerate(symbols):
        top = 0 if sym == "A" else body_top
        bottom = m.font - 1 if sym == "g" else body_bottom
        bits[top : bottom + 1, x : x + m.bar_width] = 0
        if connected and i + 1 < len(symbols):
            bits[join_row, x + m.bar_width : x + m.bar_width + step] = 0
        x += m.bar_width + step
    return bits


def word_pixel_width(text: str, m: GlyphMetrics, connected: bool = True) -> int:
    symbols = word_symbols(text)
    step = m.join_width if connected else m.gap_width
    return len(symbols) * m.bar_width + (len(symbols) - 1) * step


def default_word_gap(font: int) -> int:
    # Strictly wider than the inter-character gap limit for any band height.
    return round_half_up(0.25 * font) + 2


@dataclass
class PageLayout:
    image: BinaryImage
    boxes: list[list[WordBox]]  # per line, left to right
    words: list[list[str]]


def compose_page(
    line_specs: list[tuple[GlyphMetrics, list[str]]],
    width: int,
    height: int | None = None,
    margin: int = 30,
    line_gap: int = 12,
    connected: bool = True,
    validate: bool = True,
) -> PageLayout:
    """Lay out lines of words on a page; raises if a line overflows or (with
    validate) if any line's ink rows would not survive the default noise
    threshold as a single band."""
    needed = margin
    for m, _ in line_specs:
        needed += m.font + line_gap
    needed = needed - line_gap + margin
    page_h = height if height is not None else needed
    if page_h < needed:
        raise ValueError(f"page height {page_h} too small, need {needed}")

    canvas = np.ones((page_h, width), dtype=np.uint8)
    boxes: list[list[WordBox]] = []
    words: list[list[str]] = []
    y = margin
    for m, line_words in line_specs:
        x = margin
        gap = default_word_gap(m.font)
        line_boxes = []
        for text in line_words:
            glyph = render_word(text, m, connected)
            gh, gw = glyph.shape
            if x + gw > width - margin:
                raise ValueError(f"line overflow at word {text!r} (x={x}, w={gw})")
            canvas[y : y + gh, x : x + gw] &= glyph
            ys, xs = np.where(glyph == 0)
            line_boxes.append(
                WordBox(x + int(xs.min()), y + int(ys.min()),
                        x + int(xs.max()), y + int(ys.max()))
            )
            x += gw + gap
        boxes.append(line_boxes)
        words.append(list(line_words))
        y += m.font + line_gap

    image = BinaryImage(width, page_h, canvas)
    if validate:
        _check_line_bands(image, boxes)
    return PageLayout(image, boxes, words)


def _check_line_bands(image: BinaryImage, boxes: list[list[WordBox]]) -> None:
    """Every line's ink rows must form one run with counts above the default
    noise threshold, or line segmentation would not match the layout."""
    threshold = default_noise_threshold(image.width)
    ink_per_row = image.width - image.bits.sum(axis=1, dtype=np.int64)
    for line_boxes in boxes:
        top = min(b.y1 for b in line_boxes)
        bottom = max(b.y2 for b in line_boxes)
        weak = [r for r in range(top, bottom + 1) if ink_per_row[r] <= threshold]
        if weak:
            raise ValueError(
                f"rows {weak} inside line band {top}..{bottom} fall below the "
                f"noise threshold {threshold}; add more ascender/descender ink"
            )
