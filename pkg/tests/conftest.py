import csv
import json

import numpy as np
import pytest
from PIL import Image

from gazesim.imaging import Frame

# acceptance criterion bookkeeping: number -> [description, status]
_CRITERIA: dict[int, list] = {}


def criterion_start(number: int, description: str) -> None:
    # stays FAIL until criterion_pass runs; overrides an earlier SKIP
    _CRITERIA[number] = [description, "FAIL"]


def criterion_pass(number: int) -> None:
    _CRITERIA[number][1] = "PASS"


def criterion_skip(number: int, description: str) -> None:
    _CRITERIA.setdefault(number, [description, "SKIP"])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(_CRITERIA):
        description, status = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} [{status}] {description}")


def blob_map(size: int, blobs) -> np.ndarray:
    """Sum of Gaussian bumps; blobs are ((cx, cy), sigma, peak) triples."""
    ys, xs = np.mgrid[0:size, 0:size]
    img = np.zeros((size, size))
    for (cx, cy), sigma, peak in blobs:
        img += peak * np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2.0 * sigma**2))
    return np.clip(img, 0.0, 1.0)


def blob_frame(size: int, blobs) -> Frame:
    m = blob_map(size, blobs)
    return Frame(np.stack([m, m, m], axis=-1))


def write_image(path, array01: np.ndarray) -> None:
    arr = np.round(np.clip(array01, 0.0, 1.0) * 255).astype(np.uint8)
    if arr.ndim == 2:
        arr = np.stack([arr] * 3, axis=-1)
    Image.fromarray(arr, mode="RGB").save(path)


def write_fixations_csv(path, rows) -> None:
    """rows: (subject, idx, x, y, t_start, t_end) tuples."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject", "idx", "x", "y", "t_start", "t_end"])
        writer.writerows(rows)


def build_toy_dataset(root, size: int = 64, n_images: int = 2, subjects: int = 2, ppd: float = 7.5):
    """Small synthetic dataset: blob images plus human-like scanpaths that
    visit the blob centers in peak order. Returns the manifest path."""
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(7)
    records = []
    for i in range(n_images):
        image_id = f"img{i:03d}"
        centers = [(int(c[0]), int(c[1])) for c in rng.uniform(size * 0.2, size * 0.8, size=(3, 2))]
        blobs = [(c, size / 12.0, 1.0 - 0.2 * j) for j, c in enumerate(centers)]
        write_image(root / f"{image_id}.png", blob_map(size, blobs))
        rows = []
        for s in range(subjects):
            t = 0.0
            for k, (cx, cy) in enumerate(centers + centers[::-1]):  # two passes
                jx, jy = rng.normal(0, 1.0, 2)
                x = float(np.clip(cx + jx, 0, size - 1))
                y = float(np.clip(cy + jy, 0, size - 1))
                rows.append((f"s{s}", k, round(x, 2), round(y, 2), round(t, 3), round(t + 0.25, 3)))
                t += 0.3
        write_fixations_csv(root / f"{image_id}.csv", rows)
        records.append(
            {"id": image_id, "image": f"{image_id}.png", "fixations_csv": f"{image_id}.csv", "exposure_s": 3.0}
        )
    manifest = {"name": "toy", "pixels_per_degree": ppd, "records": records}
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return manifest_path


@pytest.fixture
def toy_manifest(tmp_path):
    return build_toy_dataset(tmp_path / "toy")
