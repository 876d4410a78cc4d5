"""Dataset ingestion: stimulus manifests and human fixation records.

A dataset is described by a JSON manifest:

    {
      "name": "mit1003",
      "pixels_per_degree": 7.7,
      "records": [
        {"id": "i001", "image": "images/i001.jpeg",
         "fixations_csv": "fixations/i001.csv", "exposure_s": 3.0}
      ]
    }

Relative paths resolve against the manifest's directory. Fixation CSVs
carry one row per fixation with the mandatory header
`subject,idx,x,y,t_start,t_end` (coordinates in native pixels, times in
seconds).
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from PIL import Image, UnidentifiedImageError

from .dynamics import Fixation, Scanpath
from .errors import DataError

log = logging.getLogger(__name__)

CSV_HEADER = ["subject", "idx", "x", "y", "t_start", "t_end"]


@dataclass(frozen=True)
class StimulusRecord:
    id: str
    image_path: Path
    native_size: tuple[int, int]  # (w, h)
    exposure: float  # s
    human_scanpaths: tuple[Scanpath, ...]

    def __post_init__(self):
        if self.exposure <= 0:
            raise ValueError(f"record {self.id!r}: exposure must be positive")


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    root: Path
    records: tuple[StimulusRecord, ...]
    pixels_per_degree: float

    def __post_init__(self):
        if not self.records:
            raise ValueError("manifest has no records")
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate record ids: {', '.join(dupes)}")


def parse_fixations_csv(path, native_size: tuple[int, int]) -> list[Scanpath]:
    """One scanpath per subject (sorted), fixations ordered by idx.

    Rows with out-of-bounds coordinates are dropped; the drop count is
    logged. Malformed rows raise DataError with the offending line number.
    """
    path = Path(path)
    w, h = native_size
    per_subject: dict[str, list[tuple[int, Fixation]]] = {}
    dropped = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != CSV_HEADER:
            raise DataError(f"{path}: expected header {','.join(CSV_HEADER)}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise DataError(f"{path}:{line_no}: expected {len(CSV_HEADER)} fields, got {len(row)}")
            subject = row[0]
            try:
                idx = int(row[1])
                x, y, t_start, t_end = (float(v) for v in row[2:])
                if not (0 <= x < w and 0 <= y < h):
                    dropped += 1
                    continue
                fixation = Fixation(x, y, t_start, t_end)
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from exc
            per_subject.setdefault(subject, []).append((idx, fixation))
    if dropped:
        log.warning("%s: dropped %d out-of-bounds fixation rows", path, dropped)

    scanpaths = []
    for subject in sorted(per_subject):
        ordered = [f for _, f in sorted(per_subject[subject], key=lambda p: p[0])]
        try:
            scanpaths.append(Scanpath(tuple(ordered)))
        except ValueError as exc:
            raise DataError(f"{path}: subject {subject!r}: {exc}") from exc
    return scanpaths


def _image_size(path: Path) -> tuple[int, int]:
    try:
        with Image.open(path) as img:
            return img.size  # (w, h)
    except UnidentifiedImageError as exc:
        raise DataError(f"unsupported image format: {path}") from exc
    except OSError as exc:
        raise DataError(f"unreadable image: {path} ({exc})") from exc


def load_manifest(path) -> DatasetManifest:
    """Parse and validate a dataset manifest, resolving and checking all
    referenced files."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    try:
        spec = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc

    for key in ("name", "pixels_per_degree", "records"):
        if key not in spec:
            raise DataError(f"{path}: missing manifest key {key!r}")
    if not isinstance(spec["records"], list) or not spec["records"]:
        raise DataError(f"{path}: 'records' must be a non-empty list")

    root = path.parent
    records = []
    for entry in spec["records"]:
        for key in ("id", "image", "fixations_csv", "exposure_s"):
            if key not in entry:
                raise DataError(f"{path}: record {entry.get('id', '?')!r} missing key {key!r}")
        rec_id = str(entry["id"])
        image_path = root / entry["image"]
        csv_path = root / entry["fixations_csv"]
        if not image_path.exists():
            raise DataError(f"record {rec_id!r}: missing image file {image_path}")
        if not csv_path.exists():
            raise DataError(f"record {rec_id!r}: missing fixations file {csv_path}")
        native_size = _image_size(image_path)
        scanpaths = parse_fixations_csv(csv_path, native_size)
        records.append(
            StimulusRecord(
                id=rec_id,
                image_path=image_path,
                native_size=native_size,
                exposure=float(entry["exposure_s"]),
                human_scanpaths=tuple(scanpaths),
            )
        )
    try:
        return DatasetManifest(str(spec["name"]), root, tuple(records), float(spec["pixels_per_degree"]))
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def to_working_coords(s: Scanpath, native_size: tuple[int, int], working_size: tuple[int, int]) -> Scanpath:
    """Per-axis linear rescale of fixation coordinates; times unchanged."""
    nw, nh = native_size
    ww, wh = working_size
    fx, fy = ww / nw, wh / nh
    return Scanpath(tuple(Fixation(f.x * fx, f.y * fy, f.t_start, f.t_end) for f in s.fixations))
