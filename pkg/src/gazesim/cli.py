"""Command-line surface: simulate, baseline, evaluate, tune, render.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RunConfig, build_run_config, config_snapshot, load_config_file, merge_config
from .data import load_manifest, to_working_coords
from .dynamics import Scanpath, Trajectory, extract_fixations, simulate_detailed, write_trajectory_csv
from .errors import ConfigError, DataError, NumericError
from .features import make_stack
from .gravity import GravityParams, field_grid, mass_from_features
from .imaging import Frame, load_image, resize_bilinear
from .ior import InhibitionMap
from .metrics import ImageScores, build_report, nss, report_table, report_to_dict, score_against_humans
from .render import render_report_figure, render_scanpath_overlay, render_tune_heatmap, save_gray16
from .wta import wta_scanpath


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract reserves 2 for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}") from exc


def _add_common_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config file (flags override file values)")
    p.add_argument("--output-dir", type=Path, help="directory for all outputs")
    p.add_argument("--mode", choices=["basic", "itti"], help="pre-attentive feature set")
    p.add_argument("--model", choices=["GRAV", "WTA"], help="scanpath generator")
    p.add_argument("--working-size", type=int, nargs=2, metavar=("W", "H"), help="processing resolution")
    p.add_argument("--workers", type=int, help="parallel worker processes (default: all cores)")
    p.add_argument("--ppd", type=float, dest="pixels_per_degree", help="pixels per degree of visual angle")
    p.add_argument("--gain", type=float, help="global mass gain")
    p.add_argument("--alphas", type=_float_list, help="per-feature gains, comma separated")
    p.add_argument("--damping", type=float, help="velocity damping (1/s)")
    p.add_argument("--duration", type=float, help="simulated seconds per image")
    p.add_argument("--sample-dt", type=float, help="trajectory sampling step (s)")
    p.add_argument("--init-pos", type=float, nargs=2, metavar=("X", "Y"), help="initial gaze position")
    p.add_argument("--rtol", type=float, help="integrator relative tolerance")
    p.add_argument("--atol", type=float, help="integrator absolute tolerance")
    p.add_argument("--no-ior", action="store_true", help="disable inhibition of return")
    p.add_argument("--beta", type=float, help="inhibition relaxation rate (1/s)")
    p.add_argument("--ior-sigma", type=float, help="inhibition footprint width (px)")
    p.add_argument("--wta-radius", type=float, help="winner-take-all inhibition radius (px)")
    p.add_argument("--num-fixations", type=int, help="winner-take-all fixation count")
    p.add_argument("--fixation-duration", type=float, help="winner-take-all fixation duration (s)")
    p.add_argument("--sed-grid", type=int, help="SED quantization grid size")
    p.add_argument("--tde-window", type=int, help="TDE/STDE subsequence length")
    p.add_argument("--vel-threshold", type=float, help="I-VT velocity threshold (px/s)")
    p.add_argument("--min-duration", type=float, help="minimum fixation duration (s)")


def _flag_overrides(args: argparse.Namespace) -> dict:
    over: dict = {}

    def put(path: tuple[str, ...], value) -> None:
        if value is None:
            return
        node = over
        for key in path[:-1]:
            node = node.setdefault(key, {})
        node[path[-1]] = value

    put(("mode",), args.mode)
    put(("model",), args.model)
    put(("working_size",), args.working_size)
    put(("output_dir",), None if args.output_dir is None else str(args.output_dir))
    put(("workers",), args.workers)
    put(("pixels_per_degree",), args.pixels_per_degree)
    put(("gravity", "global_gain"), args.gain)
    put(("gravity", "alphas"), args.alphas)
    put(("sim", "damping"), args.damping)
    put(("sim", "duration"), args.duration)
    put(("sim", "sample_dt"), args.sample_dt)
    put(("sim", "init_pos"), args.init_pos)
    put(("sim", "rtol"), args.rtol)
    put(("sim", "atol"), args.atol)
    if args.no_ior:
        put(("ior", "enabled"), False)
    put(("ior", "beta"), args.beta)
    put(("ior", "sigma"), args.ior_sigma)
    put(("wta", "inhibition_radius"), args.wta_radius)
    put(("wta", "num_fixations"), args.num_fixations)
    put(("wta", "fixation_duration"), args.fixation_duration)
    put(("metrics", "sed_grid"), args.sed_grid)
    put(("metrics", "tde_window"), args.tde_window)
    put(("extraction", "vel_threshold"), args.vel_threshold)
    put(("extraction", "min_duration"), args.min_duration)
    return over


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    raw = load_config_file(args.config) if args.config else {}
    return build_run_config(merge_config(raw, _flag_overrides(args)))


def _prepare_frame(path, cfg: RunConfig) -> Frame:
    return resize_bilinear(load_image(path), *cfg.working_size)


def _generate(
    frame: Frame, cfg: RunConfig, exposure: float | None = None, ppd: float | None = None
) -> tuple[Scanpath, Trajectory | None]:
    """Run the configured model on one frame; trajectory is None for WTA."""
    stack = make_stack(frame, cfg.mode)
    if cfg.model == "WTA":
        return wta_scanpath(stack, cfg.wta_config(exposure, ppd)), None
    ior = cfg.ior_params(ppd) if cfg.ior_enabled else None
    result = simulate_detailed(frame, stack, cfg.gravity, ior, cfg.sim_for_exposure(exposure))
    scan = extract_fixations(result.trajectory, cfg.extraction.vel_threshold, cfg.extraction.min_duration)
    return scan, result.trajectory


def _write_scanpath_json(path: Path, image_id: str, model: str, snapshot: dict, scan: Scanpath) -> None:
    payload = {"image": image_id, "model": model, "config": snapshot, "fixations": scan.to_dicts()}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _worker_count(cfg: RunConfig) -> int:
    return cfg.workers if cfg.workers is not None else (os.cpu_count() or 1)


def _map_jobs(fn, payloads: list, workers: int) -> list:
    if workers <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, payloads))


# ----------------------------------------------------------------- simulate


def _simulate_job(payload) -> tuple[str, int]:
    image_id, image_path, exposure, ppd, cfg = payload
    frame = _prepare_frame(image_path, cfg)
    scan, traj = _generate(frame, cfg, exposure, ppd)
    snapshot = config_snapshot(cfg, ppd, exposure)
    out = cfg.output_dir
    _write_scanpath_json(out / f"{image_id}.scanpath.json", image_id, cfg.model, snapshot, scan)
    if traj is not None:
        write_trajectory_csv(traj, out / f"{image_id}.trajectory.csv")
    return image_id, len(scan)


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    if getattr(args, "force_wta", False):
        cfg = replace(cfg, model="WTA")

    jobs = []
    if args.manifest:
        manifest = load_manifest(args.manifest)
        for rec in sorted(manifest.records, key=lambda r: r.id):
            jobs.append((rec.id, rec.image_path, rec.exposure, manifest.pixels_per_degree, cfg))
    for image in args.images:
        path = Path(image)
        jobs.append((path.stem, path, None, None, cfg))
    if not jobs:
        raise ConfigError("no input images: pass image paths or --manifest")
    ids = [job[0] for job in jobs]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ConfigError(f"duplicate output ids would overwrite each other: {', '.join(dupes)}")

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    results = _map_jobs(_simulate_job, jobs, _worker_count(cfg))
    for image_id, n_fix in sorted(results):
        print(f"{image_id}: {n_fix} fixations -> {cfg.output_dir / (image_id + '.scanpath.json')}")
    return 0


# ----------------------------------------------------------------- evaluate


def _evaluate_job(payload) -> tuple[str, tuple[float, float, float] | None, str | None]:
    record, ppd, cfg = payload
    try:
        frame = _prepare_frame(record.image_path, cfg)
        scan, _ = _generate(frame, cfg, record.exposure, ppd)
        if len(scan) == 0:
            return record.id, None, "model produced no fixations"
        native = to_working_coords(scan, cfg.working_size, record.native_size)
        scores = score_against_humans(
            native, record.human_scanpaths, record.native_size, cfg.metrics.sed_grid, cfg.metrics.tde_window
        )
        return record.id, scores, None
    except (DataError, ValueError) as exc:
        return record.id, None, str(exc)


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    manifest = load_manifest(args.manifest)

    skipped: list[str] = []
    payloads = []
    for rec in sorted(manifest.records, key=lambda r: r.id):
        if not rec.human_scanpaths:
            skipped.append(f"{rec.id} (no human scanpaths)")
        else:
            payloads.append((rec, manifest.pixels_per_degree, cfg))
    results = _map_jobs(_evaluate_job, payloads, _worker_count(cfg))

    rows = []
    for image_id, scores, reason in results:
        if scores is None:
            skipped.append(f"{image_id} ({reason})")
        else:
            rows.append(ImageScores(image_id, *scores))
    if not rows:
        raise DataError("no image could be scored against human scanpaths")

    snapshot = config_snapshot(cfg, manifest.pixels_per_degree)
    report = build_report(sorted(rows, key=lambda r: r.image_id), snapshot, skipped)

    out = cfg.output_dir
    (out / "figures").mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    table = report_table(report, cfg.model, cfg.mode.capitalize())
    body = table + ("\nskipped:\n" + "\n".join(f"  {s}" for s in skipped) + "\n" if skipped else "")
    (out / "report.txt").write_text(body, encoding="utf-8")
    with open(out / "per_image.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("image,sed,tde,stde\n")
        for r in report.per_image:
            fh.write(f"{r.image_id},{r.sed:.6f},{r.tde:.6f},{r.stde:.6f}\n")
    render_report_figure(
        report, out / "figures" / "metrics.png", f"{manifest.name}: {cfg.model} ({cfg.mode})", snapshot
    )

    print(table, end="")
    if skipped:
        print(f"skipped {len(skipped)} image(s); see report.txt")
    return 0


# --------------------------------------------------------------------- tune


def _nss_job(payload) -> float | None:
    record, ppd, cfg = payload
    try:
        frame = _prepare_frame(record.image_path, cfg)
        stack = make_stack(frame, cfg.mode)
        ior = cfg.ior_params(ppd) if cfg.ior_enabled else None
        result = simulate_detailed(frame, stack, cfg.gravity, ior, cfg.sim_for_exposure(record.exposure))
        points = np.vstack(
            [
                to_working_coords(sp, record.native_size, cfg.working_size).positions()
                for sp in record.human_scanpaths
                if len(sp) > 0
            ]
        )
        return nss(result.mean_mass, points)
    except (DataError, ValueError):
        return None


def cmd_tune(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    cfg = replace(cfg, model="GRAV")  # the grid tunes the trajectory model
    lambdas = args.damping_grid
    gains = args.gain_grid
    if not lambdas or not gains:
        raise ConfigError("tuning grid is empty: pass --damping-grid and --gain-grid")

    manifest = load_manifest(args.manifest)
    records = [r for r in sorted(manifest.records, key=lambda r: r.id) if r.human_scanpaths]
    if not records:
        raise DataError("validation manifest has no records with human scanpaths")
    workers = _worker_count(cfg)

    scores = np.full((len(lambdas), len(gains)), np.nan)
    for i, lam in enumerate(lambdas):
        for j, gain in enumerate(gains):
            candidate = replace(
                cfg,
                sim=replace(cfg.sim, damping=lam),
                gravity=GravityParams(alphas=cfg.gravity.alphas, global_gain=gain),
            )
            values = _map_jobs(_nss_job, [(r, manifest.pixels_per_degree, candidate) for r in records], workers)
            usable = [v for v in values if v is not None]
            if usable:
                scores[i, j] = float(np.mean(usable))
            print(f"damping={lam:g} gain={gain:g}: NSS={scores[i, j]:.4f} ({len(usable)}/{len(records)} images)")

    if np.isnan(scores).all():
        raise DataError("NSS could not be computed for any grid candidate")
    # argmax with ties broken by smaller damping, then smaller gain
    best_i, best_j = min(
        ((i, j) for i in range(len(lambdas)) for j in range(len(gains)) if np.isfinite(scores[i, j])),
        key=lambda ij: (-scores[ij], lambdas[ij[0]], gains[ij[1]]),
    )
    best = {"damping": lambdas[best_i], "global_gain": gains[best_j], "nss": float(scores[best_i, best_j])}

    out = cfg.output_dir
    (out / "figures").mkdir(parents=True, exist_ok=True)
    snapshot = config_snapshot(cfg, manifest.pixels_per_degree)
    payload = {
        "best": best,
        "damping_grid": list(lambdas),
        "gain_grid": list(gains),
        "nss": [[None if np.isnan(v) else float(v) for v in row] for row in scores],
        "config": snapshot,
    }
    (out / "tune.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    with open(out / "tune.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("damping,gain,nss\n")
        for i, lam in enumerate(lambdas):
            for j, gain in enumerate(gains):
                fh.write(f"{lam:g},{gain:g},{scores[i, j]:.6f}\n")
    render_tune_heatmap(lambdas, gains, scores, out / "figures" / "nss_heatmap.png", snapshot)

    print(f"best: damping={best['damping']:g} global_gain={best['global_gain']:g} (NSS {best['nss']:.4f})")
    return 0


# ------------------------------------------------------------------- render


def _load_scanpath_file(path) -> tuple[Scanpath, dict]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"scanpath file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        scan = Scanpath.from_dicts(payload["fixations"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: not a valid scanpath file ({exc})") from exc
    return scan, payload.get("config", {})


def cmd_render(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    scan, embedded = _load_scanpath_file(args.scanpath)
    size = embedded.get("working_size") or list(cfg.working_size)
    frame = resize_bilinear(load_image(args.image), int(size[0]), int(size[1]))

    for i, f in enumerate(scan.fixations):
        if not (0 <= f.x <= frame.width - 1 and 0 <= f.y <= frame.height - 1):
            raise DataError(f"fixation {i} at ({f.x:.1f}, {f.y:.1f}) outside {frame.width}x{frame.height}")

    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    snapshot = embedded or config_snapshot(cfg)
    stem = Path(args.image).stem
    render_scanpath_overlay(frame, scan, out / f"{stem}.overlay.png", snapshot)
    written = [out / f"{stem}.overlay.png"]

    if args.features or args.mass or args.field or args.ior:
        stack = make_stack(frame, cfg.mode)
        if args.features:
            for label, fmap in zip(stack.labels, stack.maps):
                p = out / f"{stem}.feature_{label}.png"
                save_gray16(fmap, p, snapshot)
                written.append(p)
        if args.mass or args.field:
            mass = mass_from_features(stack, cfg.gravity, InhibitionMap.zeros(frame.height, frame.width))
            if args.mass:
                p = out / f"{stem}.mass.png"
                save_gray16(mass.values, p, snapshot)
                written.append(p)
            if args.field:
                grid = field_grid(mass)
                p = out / f"{stem}.field.png"
                save_gray16(np.hypot(grid.field[..., 0], grid.field[..., 1]), p, snapshot)
                written.append(p)
        if args.ior:
            ior = cfg.ior_params()
            result = simulate_detailed(frame, stack, cfg.gravity, ior, cfg.sim)
            p = out / f"{stem}.ior.png"
            save_gray16(result.inhibition.values, p, snapshot)
            written.append(p)

    for p in written:
        print(p)
    return 0


# --------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gazesim", description="Visual-attention scanpath simulation and evaluation")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_sim = sub.add_parser("simulate", help="generate scanpaths for images or a dataset manifest")
    p_sim.add_argument("images", nargs="*", help="input image files (PNG/JPEG/BMP)")
    p_sim.add_argument("--manifest", type=Path, help="dataset manifest JSON")
    _add_common_options(p_sim)
    p_sim.set_defaults(func=cmd_simulate, force_wta=False)

    p_base = sub.add_parser("baseline", help="generate winner-take-all baseline scanpaths")
    p_base.add_argument("images", nargs="*", help="input image files (PNG/JPEG/BMP)")
    p_base.add_argument("--manifest", type=Path, help="dataset manifest JSON")
    _add_common_options(p_base)
    p_base.set_defaults(func=cmd_simulate, force_wta=True)

    p_eval = sub.add_parser("evaluate", help="score the configured model against human scanpaths")
    p_eval.add_argument("--manifest", type=Path, required=True, help="dataset manifest JSON")
    _add_common_options(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)

    p_tune = sub.add_parser("tune", help="grid-search damping and gain by NSS on a validation set")
    p_tune.add_argument("--manifest", type=Path, required=True, help="validation manifest JSON")
    p_tune.add_argument("--damping-grid", type=_float_list, required=True, help="comma-separated candidates")
    p_tune.add_argument("--gain-grid", type=_float_list, required=True, help="comma-separated candidates")
    _add_common_options(p_tune)
    p_tune.set_defaults(func=cmd_tune)

    p_rend = sub.add_parser("render", help="draw a scanpath overlay and optional diagnostic rasters")
    p_rend.add_argument("image", help="stimulus image")
    p_rend.add_argument("scanpath", help="scanpath JSON produced by simulate/baseline")
    p_rend.add_argument("--features", action="store_true", help="dump feature maps as 16-bit PNGs")
    p_rend.add_argument("--mass", action="store_true", help="dump the mass field")
    p_rend.add_argument("--field", action="store_true", help="dump the attraction field magnitude")
    p_rend.add_argument("--ior", action="store_true", help="dump the final inhibition field")
    _add_common_options(p_rend)
    p_rend.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
