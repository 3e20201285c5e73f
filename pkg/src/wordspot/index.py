"""Word records, size classification, and the searchable index.

Segmented word lengths are normalized to a reference font size so that one
pixel-length scale applies across documents with varying handwriting sizes;
records are bucketed into five size classes for fast query prefiltering.

Index file format (UTF-8, LF, space-separated fields):

    WSIDX 1
    K <ref_font_pixels>
    DOC <doc_id> <path> <width> <height>
    W <doc_id> <line_idx> <word_idx> <x1> <y1> <x2> <y2> <H> <L> <Lnorm> <class> <wst>

class is one of VS S M L VL; wst is a string over {A, x, g} or `-` when not
cached. doc_id and path are percent-encoded so they never contain whitespace.
"""

from __future__ import annotations

import enum
import urllib.parse
from dataclasses import dataclass, field

from .pnm import BinaryImage
from .segment import (
    DEFAULT_GAP_FACTOR,
    WordBox,
    row_profile,
    segment_lines,
    segment_words,
)

DEFAULT_REF_FONT = 60

# Lower-inclusive size class boundaries in normalized pixels.
SIZE_BOUNDS = (80, 240, 320, 480)

FORMAT_MAGIC = "WSIDX"
FORMAT_VERSION = 1


class SizeClass(enum.IntEnum):
    VERY_SMALL = 0
    SMALL = 1
    MEDIUM = 2
    LARGE = 3
    VERY_LARGE = 4

    @property
    def code(self) -> str:
        return _CLASS_CODES[self]


_CLASS_CODES = {
    SizeClass.VERY_SMALL: "VS",
    SizeClass.SMALL: "S",
    SizeClass.MEDIUM: "M",
    SizeClass.LARGE: "L",
    SizeClass.VERY_LARGE: "VL",
}
_CODE_CLASSES = {code: cls for cls, code in _CLASS_CODES.items()}


class IndexFormatError(ValueError):
    """Malformed index data. `line` is the 1-based offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


def normalize_length(length: int, height: int, ref_font: int) -> int:
    """Word length rescaled to the reference font size, rounded half-up.

    Computed exactly in integer arithmetic: round(ref_font * length / height).
    """
    if length < 1 or height < 1 or ref_font < 1:
        raise ValueError(
            f"length, height and ref_font must be >= 1 "
            f"(got {length}, {height}, {ref_font})"
        )
    return (2 * ref_font * length + height) // (2 * height)


def classify_size(norm_length: int) -> SizeClass:
    """Map a normalized pixel length onto its size class (lower-inclusive)."""
    if norm_length < 0:
        raise ValueError(f"norm_length must be >= 0, got {norm_length}")
    for cls, bound in zip(SizeClass, SIZE_BOUNDS):
        if norm_length < bound:
            return cls
    return SizeClass.VERY_LARGE


_WST_ALPHABET = set("Axg")


def _check_wst(wst: str | None) -> None:
    if wst is not None and (wst == "" or not set(wst) <= _WST_ALPHABET):
        raise ValueError(f"invalid shape token {wst!r}")


@dataclass
class WordRecord:
    """One segmented word: location, raw and normalized size, cached token.

    `wst` is the only field mutated after construction: queries fill it
    lazily and the value is deterministic, so concurrent writes are benign.
    """

    doc_id: str
    line_idx: int
    word_idx: int
    box: WordBox
    height: int
    length: int
    norm_length: int
    size_class: SizeClass
    wst: str | None = None

    def __post_init__(self):
        if self.height < 1 or self.length < 1:
            raise ValueError("record height and length must be >= 1")
        _check_wst(self.wst)


@dataclass(frozen=True)
class DocEntry:
    doc_id: str
    path: str
    width: int
    height: int


@dataclass(eq=False)
class WordIndex:
    """All word records of a document set, bucketed by size class."""

    ref_font: int
    docs: list[DocEntry]
    records: list[WordRecord]
    buckets: dict[SizeClass, list[WordRecord]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        if self.ref_font < 1:
            raise ValueError("ref_font must be >= 1")
        seen_docs = set()
        for doc in self.docs:
            if doc.doc_id in seen_docs:
                raise ValueError(f"duplicate doc_id {doc.doc_id!r}")
            seen_docs.add(doc.doc_id)
        seen_words = set()
        self.buckets = {cls: [] for cls in SizeClass}
        for rec in self.records:
            key = (rec.doc_id, rec.line_idx, rec.word_idx)
            if key in seen_words:
                raise ValueError(f"duplicate word key {key}")
            seen_words.add(key)
            expected = normalize_length(rec.length, rec.height, self.ref_font)
            if rec.norm_length != expected:
                raise ValueError(
                    f"record {key}: norm_length {rec.norm_length} != {expected}"
                )
            if rec.size_class != classify_size(rec.norm_length):
                raise ValueError(f"record {key}: size class mismatch")
            self.buckets[rec.size_class].append(rec)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WordIndex):
            return NotImplemented
        return (
            self.ref_font == other.ref_font
            and self.docs == other.docs
            and self.records == other.records
        )


def build_index(
    pages: list[tuple[str, BinaryImage]],
    ref_font: int = DEFAULT_REF_FONT,
    *,
    gap_factor: float = DEFAULT_GAP_FACTOR,
    noise_threshold: int | None = None,
    source_paths: dict[str, str] | None = None,
) -> WordIndex:
    """Segment every page and index one record per word.

    Shape tokens are not computed here; they are filled lazily at query time.
    `source_paths` maps doc_id to the file the page came from (defaults to
    the doc_id itself) so that queries can reload page images.
    """
    docs = []
    records = []
    for doc_id, img in pages:
        path = (source_paths or {}).get(doc_id, doc_id)
        docs.append(DocEntry(doc_id, path, img.width, img.height))
        bands = segment_lines(row_profile(img), noise_threshold)
        for line_idx, band in enumerate(bands):
            for word_idx, box in enumerate(segment_words(img, band, gap_factor)):
                length, height = box.width, box.height
                norm = normalize_length(length, height, ref_font)
                records.append(
                    WordRecord(
                        doc_id,
                        line_idx,
                        word_idx,
                        box,
                        height,
                        length,
                        norm,
                        classify_size(norm),
                    )
                )
    return WordIndex(ref_font, docs, records)


def _encode(text: str) -> str:
    return urllib.parse.quote(text, safe="/.-_")


def _decode(text: str) -> str:
    return urllib.parse.unquote(text)


def save_index(index: WordIndex) -> bytes:
    """Serialize to the text index format; load_index inverts this exactly."""
    lines = [f"{FORMAT_MAGIC} {FORMAT_VERSION}", f"K {index.ref_font}"]
    for doc in index.docs:
        lines.append(
            f"DOC {_encode(doc.doc_id)} {_encode(doc.path)} {doc.width} {doc.height}"
        )
    for r in index.records:
        b = r.box
        lines.append(
            f"W {_encode(r.doc_id)} {r.line_idx} {r.word_idx} "
            f"{b.x1} {b.y1} {b.x2} {b.y2} "
            f"{r.height} {r.length} {r.norm_length} {r.size_class.code} "
            f"{r.wst if r.wst is not None else '-'}"
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def _parse_int(token: str, what: str, line_no: int, lo: int = 0) -> int:
    try:
        value = int(token)
    except ValueError:
        raise IndexFormatError(f"malformed {what}: {token!r}", line_no) from None
    if value < lo:
        raise IndexFormatError(f"{what} {value} must be >= {lo}", line_no)
    return value


def load_index(data: bytes) -> WordIndex:
    """Parse index bytes; raises IndexFormatError naming the bad line."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IndexFormatError(f"index is not valid UTF-8: {exc}", 1) from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    if not lines or lines[0] != f"{FORMAT_MAGIC} {FORMAT_VERSION}":
        got = lines[0] if lines else ""
        raise IndexFormatError(
            f"expected header {FORMAT_MAGIC!r} version {FORMAT_VERSION}, got {got!r}", 1
        )
    if len(lines) < 2 or not lines[1].startswith("K "):
        raise IndexFormatError("expected reference font line 'K <pixels>'", 2)
    ref_font = _parse_int(lines[1][2:], "reference font size", 2, lo=1)

    docs: list[DocEntry] = []
    doc_ids: set[str] = set()
    records: list[WordRecord] = []
    seen_words: set[tuple[str, int, int]] = set()

    for line_no, line in enumerate(lines[2:], start=3):
        fields = line.split(" ")
        kind = fields[0]
        if kind == "DOC":
            if len(fields) != 5:
                raise IndexFormatError(
                    f"DOC line needs 5 fields, got {len(fields)}", line_no
                )
            doc_id = _decode(fields[1])
            if doc_id in doc_ids:
                raise IndexFormatError(f"duplicate doc_id {doc_id!r}", line_no)
            doc_ids.add(doc_id)
            width = _parse_int(fields[3], "doc width", line_no, lo=1)
            height = _parse_int(fields[4], "doc height", line_no, lo=1)
            docs.append(DocEntry(doc_id, _decode(fields[2]), width, height))
        elif kind == "W":
            if len(fields) != 13:
                raise IndexFormatError(
                    f"record line needs 13 fields, got {len(fields)}", line_no
                )
            doc_id = _decode(fields[1])
            if doc_id not in doc_ids:
                raise IndexFormatError(f"record references unknown doc {doc_id!r}", line_no)
            line_idx = _parse_int(fields[2], "line index", line_no)
            word_idx = _parse_int(fields[3], "word index", line_no)
            key = (doc_id, line_idx, word_idx)
            if key in seen_words:
                raise IndexFormatError(f"duplicate word key {key}", line_no)
            seen_words.add(key)
            x1, y1, x2, y2 = (
                _parse_int(fields[i], name, line_no)
                for i, name in ((4, "x1"), (5, "y1"), (6, "x2"), (7, "y2"))
            )
            height = _parse_int(fields[8], "word height", line_no, lo=1)
            length = _parse_int(fields[9], "word length", line_no, lo=1)
            norm = _parse_int(fields[10], "normalized length", line_no)
            cls = _CODE_CLASSES.get(fields[11])
            if cls is None:
                raise IndexFormatError(f"unknown size class {fields[11]!r}", line_no)
            wst = None if fields[12] == "-" else fields[12]
            try:
                box = WordBox(x1, y1, x2, y2)
                record = WordRecord(
                    doc_id, line_idx, word_idx, box, height, length, norm, cls, wst
                )
            except ValueError as exc:
                raise IndexFormatError(str(exc), line_no) from None
            if norm != normalize_length(length, height, ref_font):
                raise IndexFormatError(
                    f"normalized length {norm} inconsistent with "
                    f"length {length}, height {height}, K {ref_font}",
                    line_no,
                )
            if cls != classify_size(norm):
                raise IndexFormatError(
                    f"size class {fields[11]} inconsistent with length {norm}", line_no
                )
            records.append(record)
        else:
            raise IndexFormatError(f"unknown line kind {kind!r}", line_no)

    return WordIndex(ref_font, docs, records)
