"""OCR-free word spotting for handwritten page images.

Pages are segmented into lines and words with projection profiles, each word
is encoded as a token over the shape alphabet {A, x, g}, and text queries are
answered by size prefiltering plus Levenshtein distance on shape tokens.
"""

__version__ = "0.1.0"

from .index import (
    DEFAULT_REF_FONT,
    DocEntry,
    IndexFormatError,
    SizeClass,
    WordIndex,
    WordRecord,
    build_index,
    classify_size,
    load_index,
    normalize_length,
    save_index,
)
from .pnm import BinaryImage, GrayImage, PnmError, binarize, load_image, write_gray
from .search import (
    MatchResult,
    MissingPageError,
    SearchParams,
    format_result,
    levenshtein,
    search,
    size_prefilter,
)
from .segment import (
    LineBand,
    Profile,
    WordBox,
    column_profile,
    crop_box,
    row_profile,
    segment_lines,
    segment_words,
)
from .shapecode import (
    LETTER_CODES,
    NoInkError,
    Region,
    ShapeParams,
    UnsupportedCharacterError,
    ZoneBands,
    char_region_segment,
    classify_region,
    estimate_zones,
    query_to_wst,
    word_to_wst,
)

__all__ = [
    "BinaryImage",
    "DEFAULT_REF_FONT",
    "DocEntry",
    "GrayImage",
    "IndexFormatError",
    "LETTER_CODES",
    "LineBand",
    "MatchResult",
    "MissingPageError",
    "NoInkError",
    "PnmError",
    "Profile",
    "Region",
    "SearchParams",
    "ShapeParams",
    "SizeClass",
    "UnsupportedCharacterError",
    "WordBox",
    "WordIndex",
    "WordRecord",
    "ZoneBands",
    "binarize",
    "build_index",
    "char_region_segment",
    "classify_region",
    "classify_size",
    "column_profile",
    "crop_box",
    "estimate_zones",
    "format_result",
    "levenshtein",
    "load_image",
    "load_index",
    "normalize_length",
    "query_to_wst",
    "row_profile",
    "save_index",
    "search",
    "segment_lines",
    "segment_words",
    "size_prefilter",
    "word_to_wst",
    "write_gray",
]
