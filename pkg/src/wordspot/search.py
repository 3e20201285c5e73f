"""Query answering: size prefilter, lazy shape tokens, ranked edit distance.

A text query is answered in two passes. The size prefilter keeps only
records whose normalized pixel length is within one expected character width
of the query's, scanning just the size-class buckets that can intersect that
interval. Survivors are compared by Levenshtein distance between the query's
shape token and the word image's (computed lazily and cached on the record).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .index import SizeClass, WordIndex, WordRecord, classify_size
from .pnm import BinaryImage
from .segment import LineBand, row_profile, segment_lines
from .shapecode import ShapeParams, ZoneBands, estimate_zones, query_to_wst, word_to_wst

DEFAULT_THRESHOLD = 2.5
DEFAULT_CHAR_WIDTH = 40

PageProvider = Callable[[str], BinaryImage]


class MissingPageError(OSError):
    """A candidate needed its page image and it could not be provided."""

    def __init__(self, doc_id: str, reason: str = ""):
        detail = f": {reason}" if reason else ""
        super().__init__(f"cannot load page image for doc {doc_id!r}{detail}")
        self.doc_id = doc_id


@dataclass(frozen=True)
class SearchParams:
    threshold: float = DEFAULT_THRESHOLD
    char_width: int = DEFAULT_CHAR_WIDTH
    annotate: bool = False

    def __post_init__(self):
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")
        if self.char_width < 1:
            raise ValueError("char_width must be >= 1")


@dataclass
class MatchResult:
    record: WordRecord
    distance: int


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance, O(len(a)*len(b)) time, two-row space."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,  # delete from a
                    current[j - 1] + 1,  # insert into a
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[-1]


def size_prefilter(
    index: WordIndex, query_len: int, params: SearchParams | None = None
) -> list[WordRecord]:
    """Records whose normalized length is within +/- one character width of
    the query's expected pixel length. Only buckets intersecting the interval
    are scanned."""
    if query_len < 1:
        raise ValueError("query_len must be >= 1")
    if params is None:
        params = SearchParams()
    lo = max(0, (query_len - 1) * params.char_width)
    hi = (query_len + 1) * params.char_width
    first, last = classify_size(lo), classify_size(hi)
    out = []
    for cls in range(first, last + 1):
        for rec in index.buckets[SizeClass(cls)]:
            if lo <= rec.norm_length <= hi:
                out.append(rec)
    return out


def _load(cache: dict[str, BinaryImage], provider: PageProvider, doc_id: str) -> BinaryImage:
    page = cache.get(doc_id)
    if page is None:
        try:
            page = provider(doc_id)
        except MissingPageError:
            raise
        except (OSError, KeyError, LookupError) as exc:
            raise MissingPageError(doc_id, str(exc)) from exc
        cache[doc_id] = page
    return page


def _band_for(
    cache: dict[str, list[LineBand]], page: BinaryImage, rec: WordRecord
) -> LineBand:
    bands = cache.get(rec.doc_id)
    if bands is None:
        bands = segment_lines(row_profile(page))
        cache[rec.doc_id] = bands
    if rec.line_idx < len(bands):
        band = bands[rec.line_idx]
        if band.row_start <= rec.box.y1 and rec.box.y2 <= band.row_end:
            return band
    # Re-derived lines no longer match the index; fall back to the word rows.
    return LineBand(rec.box.y1, rec.box.y2)


def search(
    index: WordIndex,
    load_page: PageProvider,
    text: str,
    params: SearchParams | None = None,
    shape: ShapeParams | None = None,
) -> list[MatchResult]:
    """Ranked matches for a text query.

    Candidates come from the size prefilter; each candidate without a cached
    shape token gets one computed from its page image (cached write-once on
    the in-memory record). Matches at distance <= params.threshold are
    returned ordered by distance, then (doc_id, line_idx, word_idx).
    """
    if params is None:
        params = SearchParams()
    if shape is None:
        shape = ShapeParams()
    if not text:
        raise ValueError("query text must be non-empty")
    query = query_to_wst(text)

    pages: dict[str, BinaryImage] = {}
    bands: dict[str, list[LineBand]] = {}
    zones: dict[tuple[str, LineBand], ZoneBands] = {}

    results = []
    for rec in size_prefilter(index, len(text), params):
        if rec.wst is None:
            page = _load(pages, load_page, rec.doc_id)
            band = _band_for(bands, page, rec)
            zone_key = (rec.doc_id, band)
            line_zones = zones.get(zone_key)
            if line_zones is None:
                line_zones = estimate_zones(page, band, shape.zone_fraction)
                zones[zone_key] = line_zones
            rec.wst = word_to_wst(page, band, rec.box, shape, zones=line_zones)
        distance = levenshtein(query, rec.wst)
        if distance <= params.threshold:
            results.append(MatchResult(rec, distance))

    results.sort(
        key=lambda m: (m.distance, m.record.doc_id, m.record.line_idx, m.record.word_idx)
    )
    return results


def format_result(match: MatchResult) -> str:
    """One result line: `<distance> <doc_id> <line> <word> <x1> <y1> <x2> <y2>`."""
    r = match.record
    b = r.box
    return f"{match.distance} {r.doc_id} {r.line_idx} {r.word_idx} {b.x1} {b.y1} {b.x2} {b.y2}"
