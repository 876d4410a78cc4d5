#!/usr/bin/env python3
"""Generate a synthetic blob corpus with pseudo-human scanpaths.

Creates N images of 2-4 Gaussian blobs on a dark background plus, per
image, a few "subject" scanpaths that visit the blob centers in
descending-peak order with small positional jitter, and a manifest tying
everything together. Useful for exercising `gazesim evaluate` / `tune`
without real eye-tracking datasets; the shipped default damping/gain were
derived by running `gazesim tune` on exactly this corpus (seed 2024).

Usage:
    python3 scripts/synthetic_corpus.py OUTDIR [--images 20] [--size 224] [--seed 2024]
"""

import argparse
import csv
import json
from pathlib import Path

import numpy as np
from PIL import Image


def blob_map(size, blobs):
    ys, xs = np.mgrid[0:size, 0:size]
    img = np.zeros((size, size))
    for (cx, cy), sigma, peak in blobs:
        img += peak * np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2.0 * sigma**2))
    return np.clip(img, 0.0, 1.0)


def sample_blobs(rng, size):
    # rejection-sample centers so blobs stay separated
    n = int(rng.integers(2, 5))
    centers = []
    while len(centers) < n:
        c = rng.uniform(0.15 * size, 0.85 * size, 2)
        if all(np.hypot(*(c - np.asarray(o))) > 0.25 * size for o in centers):
            centers.append(tuple(c))
    peaks = np.linspace(1.0, 0.6, n)
    sigmas = rng.uniform(size / 32, size / 20, n)
    return [(centers[i], float(sigmas[i]), float(peaks[i])) for i in range(n)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--images", type=int, default=20)
    ap.add_argument("--size", type=int, default=224)
    ap.add_argument("--subjects", type=int, default=3)
    ap.add_argument("--exposure", type=float, default=3.0)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    args.outdir.mkdir(parents=True, exist_ok=True)
    records = []
    for i in range(args.images):
        image_id = f"blob{i:03d}"
        blobs = sample_blobs(rng, args.size)
        img = blob_map(args.size, blobs)
        arr = np.round(img * 255).astype(np.uint8)
        Image.fromarray(np.stack([arr] * 3, axis=-1), mode="RGB").save(args.outdir / f"{image_id}.png")

        rows = []
        for s in range(args.subjects):
            t = 0.0
            # two passes over the blobs, like observers re-inspecting a scene
            stops = blobs + blobs[::-1]
            for k, ((cx, cy), sigma, _peak) in enumerate(stops):
                jx, jy = rng.normal(0.0, sigma / 4.0, 2)
                x = float(np.clip(cx + jx, 0, args.size - 1))
                y = float(np.clip(cy + jy, 0, args.size - 1))
                dwell = args.exposure / len(stops)
                rows.append((f"s{s}", k, round(x, 2), round(y, 2), round(t, 3), round(t + 0.8 * dwell, 3)))
                t += dwell
        with open(args.outdir / f"{image_id}.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["subject", "idx", "x", "y", "t_start", "t_end"])
            writer.writerows(rows)
        records.append(
            {
                "id": image_id,
                "image": f"{image_id}.png",
                "fixations_csv": f"{image_id}.csv",
                "exposure_s": args.exposure,
            }
        )

    manifest = {"name": "synthetic-blobs", "pixels_per_degree": 7.5, "records": records}
    (args.outdir / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    print(f"wrote {len(records)} images to {args.outdir}")


if __name__ == "__main__":
    main()
