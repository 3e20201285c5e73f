"""Command-line front end.

Commands:
  index     build a word index from NetPBM page images
  query     run one text query (or a stdin batch) against an index
  annotate  query and write annotated page copies with match boxes
  inspect   dump pipeline intermediates for debugging

Exit codes: 0 success, 1 usage, 2 input parse, 3 I/O, 4 unsupported query
character.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from .index import (
    DEFAULT_REF_FONT,
    IndexFormatError,
    SizeClass,
    WordIndex,
    build_index,
    load_index,
    save_index,
)
from .pnm import BinaryImage, GrayImage, PnmError, binarize, load_image, rescale_to_255, write_gray
from .search import (
    DEFAULT_CHAR_WIDTH,
    DEFAULT_THRESHOLD,
    MissingPageError,
    SearchParams,
    format_result,
    search,
)
from .segment import (
    DEFAULT_GAP_FACTOR,
    LineBand,
    WordBox,
    column_profile,
    row_profile,
    segment_lines,
    segment_words,
)
from .shapecode import ShapeParams, UnsupportedCharacterError, estimate_zones, word_to_wst

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_IO = 3
EXIT_QUERY = 4

BORDER_THICKNESS = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; we reserve 2 for parse
    # errors of input files, so route usage problems through an exception.
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="wordspot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build a word index from page images")
    p_index.add_argument("images", nargs="+", help="NetPBM page images (P1-P6)")
    p_index.add_argument("--ref-font", type=int, default=DEFAULT_REF_FONT,
                         help="reference font size in pixels (default 60)")
    p_index.add_argument("--gap-factor", type=float, default=DEFAULT_GAP_FACTOR,
                         help="inter-character gap limit as a fraction of line height")
    p_index.add_argument("--out", required=True, help="output index file")
    p_index.set_defaults(func=_cmd_index)

    p_query = sub.add_parser("query", help="search an index for a text query")
    _add_query_args(p_query)
    p_query.add_argument("text", nargs="?", help="query word (letters only)")
    p_query.add_argument("--stdin", action="store_true",
                         help="read one query per line from standard input")
    p_query.add_argument("--annotate", metavar="OUT.pgm",
                         help="write matched pages with boxes drawn (one-shot only)")
    p_query.set_defaults(func=_cmd_query)

    p_annot = sub.add_parser("annotate", help="query and write annotated page images")
    _add_query_args(p_annot)
    p_annot.add_argument("text", help="query word (letters only)")
    p_annot.add_argument("--out", required=True, metavar="OUT.pgm",
                         help="annotated output image")
    p_annot.set_defaults(func=_cmd_annotate)

    p_inspect = sub.add_parser("inspect", help="print pipeline intermediates")
    p_inspect.add_argument("input", help="page image or index file")
    p_inspect.add_argument("--what", required=True,
                           choices=["rows", "cols", "lines", "words", "zones", "wst"])
    p_inspect.add_argument("--gap-factor", type=float, default=DEFAULT_GAP_FACTOR)
    p_inspect.add_argument("--valley-slack", type=int, default=1)
    p_inspect.add_argument("--zone-fraction", type=float, default=0.5)
    p_inspect.set_defaults(func=_cmd_inspect)

    return parser


def _add_query_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("index", help="index file built by `wordspot index`")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                   help="maximum shape-token edit distance (default 2.5)")
    p.add_argument("--char-width", type=int, default=DEFAULT_CHAR_WIDTH,
                   help="expected character width in pixels at the reference font")
    p.add_argument("--valley-slack", type=int, default=1,
                   help="how far above the column minimum still counts as a valley")
    p.add_argument("--zone-fraction", type=float, default=0.5,
                   help="row-count fraction of the peak defining the x-height band")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"wordspot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"wordspot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PnmError, IndexFormatError) as exc:
        print(f"wordspot: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnsupportedCharacterError as exc:
        print(f"wordspot: {exc}", file=sys.stderr)
        return EXIT_QUERY
    except MissingPageError as exc:
        print(f"wordspot: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"wordspot: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # Domain errors from flag values (ref font, threshold, ...); the
        # parse-error subclasses were already handled above.
        print(f"wordspot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    raise SystemExit(main())


def _load_page_file(path: str) -> GrayImage:
    data = Path(path).read_bytes()
    try:
        return load_image(data)
    except PnmError as exc:
        raise PnmError(f"{path}: {exc.message}", exc.offset) from None


def _cmd_index(args) -> int:
    pages = []
    paths = {}
    used_ids: set[str] = set()
    for path in args.images:
        gray = _load_page_file(path)
        base = re.sub(r"\s+", "_", Path(path).stem) or "page"
        doc_id = base
        serial = 2
        while doc_id in used_ids:
            doc_id = f"{base}-{serial}"
            serial += 1
        used_ids.add(doc_id)
        pages.append((doc_id, binarize(gray)))
        paths[doc_id] = path

    index = build_index(
        pages, ref_font=args.ref_font, gap_factor=args.gap_factor, source_paths=paths
    )
    data = save_index(index)

    out = Path(args.out)
    tmp = out.with_name(out.name + f".tmp{os.getpid()}")
    try:
        tmp.write_bytes(data)
        os.replace(tmp, out)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise

    for cls in SizeClass:
        print(f"{cls.code} {len(index.buckets[cls])}")
    print(f"TOTAL {len(index.records)}")
    return EXIT_OK


class _PageLoader:
    """Loads and caches page images recorded in an index.

    Paths are tried as given, then relative to the index file's directory.
    """

    def __init__(self, index: WordIndex, base_dir: Path):
        self._paths = {doc.doc_id: doc.path for doc in index.docs}
        self._base_dir = base_dir
        self._gray: dict[str, GrayImage] = {}
        self._binary: dict[str, BinaryImage] = {}

    def _resolve(self, doc_id: str) -> Path:
        raw = self._paths.get(doc_id)
        if raw is None:
            raise MissingPageError(doc_id, "doc not present in index")
        path = Path(raw)
        if path.exists():
            return path
        alt = self._base_dir / raw
        if alt.exists():
            return alt
        raise MissingPageError(doc_id, f"page file {raw!r} not found")

    def gray(self, doc_id: str) -> GrayImage:
        img = self._gray.get(doc_id)
        if img is None:
            img = _load_page_file(str(self._resolve(doc_id)))
            self._gray[doc_id] = img
        return img

    def __call__(self, doc_id: str) -> BinaryImage:
        img = self._binary.get(doc_id)
        if img is None:
            img = binarize(self.gray(doc_id))
            self._binary[doc_id] = img
        return img


def _read_index(path: str) -> WordIndex:
    return load_index(Path(path).read_bytes())


def draw_box_border(pixels: np.ndarray, box: WordBox, thickness: int = BORDER_THICKNESS) -> None:
    """Draw a black frame of the given thickness around (outside) the box.

    Only pixels in the frame ring are touched; everything inside the box and
    beyond the ring is left alone. The ring is clamped to the image.
    """
    h, w = pixels.shape
    ox1, oy1 = max(0, box.x1 - thickness), max(0, box.y1 - thickness)
    ox2, oy2 = min(w - 1, box.x2 + thickness), min(h - 1, box.y2 + thickness)
    pixels[oy1 : box.y1, ox1 : ox2 + 1] = 0
    pixels[box.y2 + 1 : oy2 + 1, ox1 : ox2 + 1] = 0
    pixels[box.y1 : box.y2 + 1, ox1 : box.x1] = 0
    pixels[box.y1 : box.y2 + 1, box.x2 + 1 : ox2 + 1] = 0


def _write_annotations(loader: _PageLoader, results, out_arg: str) -> None:
    by_doc: dict[str, list[WordBox]] = defaultdict(list)
    for match in results:
        by_doc[match.record.doc_id].append(match.record.box)
    if not by_doc:
        return
    out = Path(out_arg)
    single = len(by_doc) == 1
    for doc_id in sorted(by_doc):
        gray = rescale_to_255(loader.gray(doc_id))
        pixels = gray.pixels.copy()
        for box in by_doc[doc_id]:
            draw_box_border(pixels, box)
        target = out if single else out.with_name(f"{out.stem}.{doc_id}{out.suffix}")
        annotated = GrayImage(gray.width, gray.height, 255, pixels)
        target.write_bytes(write_gray(annotated))


def _run_queries(args, texts: list[str], annotate_out: str | None) -> int:
    index = _read_index(args.index)
    loader = _PageLoader(index, Path(args.index).resolve().parent)
    params = SearchParams(
        threshold=args.threshold,
        char_width=args.char_width,
        annotate=annotate_out is not None,
    )
    shape = ShapeParams(valley_slack=args.valley_slack, zone_fraction=args.zone_fraction)
    out = sys.stdout
    for text in texts:
        results = search(index, loader, text, params, shape)
        out.write(f"Q {text}\n")
        for match in results:
            out.write(format_result(match) + "\n")
        out.write(f"COUNT {len(results)}\n")
        if annotate_out is not None:
            _write_annotations(loader, results, annotate_out)
    return EXIT_OK


def _cmd_query(args) -> int:
    if args.stdin and args.text is not None:
        raise _UsageError("give either a query word or --stdin, not both")
    if not args.stdin and args.text is None:
        raise _UsageError("a query word (or --stdin) is required")
    if args.annotate and args.stdin:
        raise _UsageError("--annotate requires a one-shot query")
    if args.stdin:
        texts = [line.strip() for line in sys.stdin if line.strip()]
    else:
        texts = [args.text]
    return _run_queries(args, texts, args.annotate)


def _cmd_annotate(args) -> int:
    return _run_queries(args, [args.text], args.out)


def _cmd_inspect(args) -> int:
    data = Path(args.input).read_bytes()
    if data.startswith(b"WSIDX"):
        return _inspect_index(load_index(data), args.what)
    img = binarize(load_image(data))
    what = args.what
    if what == "rows":
        print(" ".join(str(c) for c in row_profile(img).counts))
        return EXIT_OK
    if what == "cols":
        full = LineBand(0, img.height - 1)
        print(" ".join(str(c) for c in column_profile(img, full).counts))
        return EXIT_OK

    bands = segment_lines(row_profile(img))
    if what == "lines":
        for band in bands:
            print(f"{band.row_start} {band.row_end}")
        return EXIT_OK

    shape = ShapeParams(valley_slack=args.valley_slack, zone_fraction=args.zone_fraction)
    for band in bands:
        if what == "zones":
            zones = estimate_zones(img, band, shape.zone_fraction)
            print(f"{band.row_start} {band.row_end} {zones.body_top} {zones.body_bottom}")
            continue
        for box in segment_words(img, band, args.gap_factor):
            if what == "words":
                print(f"{box.x1} {box.y1} {box.x2} {box.y2}")
            else:  # wst
                print(word_to_wst(img, band, box, shape))
    return EXIT_OK


def _inspect_index(index: WordIndex, what: str) -> int:
    if what == "words":
        for rec in index.records:
            b = rec.box
            print(f"{b.x1} {b.y1} {b.x2} {b.y2}")
        return EXIT_OK
    if what == "wst":
        for rec in index.records:
            print(rec.wst if rec.wst is not None else "-")
        return EXIT_OK
    raise _UsageError(f"--what {what} needs a page image, not an index file")


if __name__ == "__main__":
    run()
