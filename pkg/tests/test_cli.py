import json

import numpy as np
import pytest
from PIL import Image

from gazesim.cli import main

from conftest import blob_map, build_toy_dataset, write_image


@pytest.fixture
def blob_png(tmp_path):
    path = tmp_path / "scene.png"
    write_image(path, blob_map(64, [((18, 18), 5.0, 1.0), ((44, 40), 5.0, 0.9)]))
    return path


FAST = ["--working-size", "64", "64", "--duration", "1.0", "--workers", "1"]


def _run(args):
    return main([str(a) for a in args])


class TestSimulateCommand:
    def test_grav_produces_scanpath_and_trajectory(self, blob_png, tmp_path):
        out = tmp_path / "out"
        assert _run(["simulate", blob_png, "--output-dir", out] + FAST) == 0
        payload = json.loads((out / "scene.scanpath.json").read_text())
        assert payload["model"] == "GRAV"
        assert payload["image"] == "scene"
        assert len(payload["fixations"]) >= 1
        assert payload["config"]["sim"]["duration"] == 1.0
        csv_lines = (out / "scene.trajectory.csv").read_text().splitlines()
        assert csv_lines[0] == "t,x,y,vx,vy"
        assert len(csv_lines) == 52  # 51 samples at 20 ms over 1 s

    def test_deterministic_outputs(self, blob_png, tmp_path):
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        _run(["simulate", blob_png, "--output-dir", out1] + FAST)
        _run(["simulate", blob_png, "--output-dir", out2] + FAST)
        assert (out1 / "scene.scanpath.json").read_bytes() == (out2 / "scene.scanpath.json").read_bytes()
        assert (out1 / "scene.trajectory.csv").read_bytes() == (out2 / "scene.trajectory.csv").read_bytes()

    def test_wta_fixation_count(self, blob_png, tmp_path):
        out = tmp_path / "out"
        code = _run(["simulate", blob_png, "--output-dir", out, "--model", "WTA", "--num-fixations", "5"] + FAST)
        assert code == 0
        payload = json.loads((out / "scene.scanpath.json").read_text())
        assert payload["model"] == "WTA"
        assert len(payload["fixations"]) == 5
        assert not (out / "scene.trajectory.csv").exists()

    def test_itti_mode_end_to_end(self, blob_png, tmp_path):
        out = tmp_path / "out"
        code = _run(["simulate", blob_png, "--output-dir", out, "--mode", "itti"] + FAST)
        assert code == 0
        payload = json.loads((out / "scene.scanpath.json").read_text())
        assert payload["config"]["mode"] == "itti"
        assert len(payload["fixations"]) >= 1

    def test_itti_wta_combination(self, blob_png, tmp_path):
        out = tmp_path / "out"
        code = _run(
            ["simulate", blob_png, "--output-dir", out, "--mode", "itti", "--model", "WTA",
             "--num-fixations", "3"] + FAST
        )
        assert code == 0
        assert len(json.loads((out / "scene.scanpath.json").read_text())["fixations"]) == 3

    def test_baseline_alias_forces_wta(self, blob_png, tmp_path):
        out = tmp_path / "out"
        assert _run(["baseline", blob_png, "--output-dir", out, "--num-fixations", "3"] + FAST) == 0
        assert json.loads((out / "scene.scanpath.json").read_text())["model"] == "WTA"

    def test_missing_image_is_data_error(self, tmp_path):
        assert _run(["simulate", tmp_path / "ghost.png", "--output-dir", tmp_path] + FAST) == 2

    def test_no_inputs_is_config_error(self, tmp_path):
        assert _run(["simulate", "--output-dir", tmp_path] + FAST) == 1

    def test_bad_flag_value_exits_1(self, blob_png, tmp_path, capsys):
        code = _run(["simulate", blob_png, "--output-dir", tmp_path, "--damping", "-3"] + FAST)
        assert code == 1
        assert "damping" in capsys.readouterr().err

    def test_config_file_with_flag_override(self, blob_png, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"sim": {"damping": 3.0, "duration": 0.6}}))
        out = tmp_path / "out"
        code = _run(
            ["simulate", blob_png, "--output-dir", out, "--config", cfg_path,
             "--damping", "5.0", "--working-size", "64", "64", "--workers", "1"]
        )
        assert code == 0
        snap = json.loads((out / "scene.scanpath.json").read_text())["config"]
        assert snap["sim"]["damping"] == 5.0  # flag beats file
        assert snap["sim"]["duration"] == 0.6  # file beats default


class TestEvaluateCommand:
    def test_toy_manifest_report(self, tmp_path):
        manifest = build_toy_dataset(tmp_path / "toy", size=64, n_images=2)
        out = tmp_path / "out"
        code = _run(
            ["evaluate", "--manifest", manifest, "--output-dir", out, "--workers", "1",
             "--working-size", "64", "64", "--tde-window", "1"]
        )
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        rows = report["per_image"]
        assert len(rows) >= 1
        for name in ("sed", "tde", "stde"):
            vals = np.array([r[name] for r in rows])
            assert report["aggregate"][name]["mean"] == pytest.approx(vals.mean())
            assert report["aggregate"][name]["std"] == pytest.approx(vals.std())
        assert (out / "report.txt").exists()
        assert (out / "per_image.csv").exists()
        assert (out / "figures" / "metrics.png").exists()

    def test_native_size_differs_from_working(self, tmp_path):
        # scoring happens in native pixels; model fixations are mapped back
        manifest = build_toy_dataset(tmp_path / "toy", size=128, n_images=1)
        out = tmp_path / "out"
        code = _run(
            ["evaluate", "--manifest", manifest, "--output-dir", out, "--workers", "1",
             "--working-size", "64", "64", "--tde-window", "1", "--model", "WTA"]
        )
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert len(report["per_image"]) == 1
        # native-scale TDE on a 128px image can exceed the 64px working diagonal
        assert 0.0 <= report["per_image"][0]["tde"] <= np.hypot(128, 128)

    def test_empty_manifest_is_error(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"name": "x", "pixels_per_degree": 7.5, "records": []}))
        assert _run(["evaluate", "--manifest", path, "--output-dir", tmp_path]) == 2


class TestTuneCommand:
    def test_single_point_grid(self, tmp_path):
        manifest = build_toy_dataset(tmp_path / "toy", size=64, n_images=1)
        out = tmp_path / "out"
        code = _run(
            ["tune", "--manifest", manifest, "--damping-grid", "2.0", "--gain-grid", "500",
             "--output-dir", out, "--workers", "1", "--working-size", "64", "64", "--duration", "1.0"]
        )
        assert code == 0
        payload = json.loads((out / "tune.json").read_text())
        assert payload["best"]["damping"] == 2.0
        assert payload["best"]["global_gain"] == 500.0
        assert (out / "figures" / "nss_heatmap.png").exists()
        assert (out / "tune.csv").read_text().splitlines()[0] == "damping,gain,nss"

    def test_argmax_matches_scores(self, tmp_path):
        manifest = build_toy_dataset(tmp_path / "toy", size=64, n_images=2)
        out = tmp_path / "out"
        code = _run(
            ["tune", "--manifest", manifest, "--damping-grid", "1.0,3.0", "--gain-grid", "300,900",
             "--output-dir", out, "--workers", "1", "--working-size", "64", "64", "--duration", "1.0"]
        )
        assert code == 0
        payload = json.loads((out / "tune.json").read_text())
        scores = np.array(payload["nss"], dtype=float)
        i, j = np.unravel_index(np.nanargmax(scores), scores.shape)
        assert payload["best"]["damping"] == payload["damping_grid"][i]
        assert payload["best"]["global_gain"] == payload["gain_grid"][j]
        assert payload["best"]["nss"] == pytest.approx(scores[i, j])

    def test_gain_rescale_gives_identical_nss_without_ior(self, tmp_path):
        # with inhibition off the integrated mass is an exact rescale
        # across gains, so NSS (affine invariant) must match
        manifest = build_toy_dataset(tmp_path / "toy", size=64, n_images=1)
        out = tmp_path / "out"
        code = _run(
            ["tune", "--manifest", manifest, "--damping-grid", "2.0", "--gain-grid", "400,800",
             "--no-ior", "--output-dir", out, "--workers", "1", "--working-size", "64", "64",
             "--duration", "0.5"]
        )
        assert code == 0
        scores = np.array(json.loads((out / "tune.json").read_text())["nss"], dtype=float)
        assert scores[0, 0] == pytest.approx(scores[0, 1], abs=1e-9)

    def test_empty_grid_is_config_error(self, tmp_path):
        manifest = build_toy_dataset(tmp_path / "toy", size=64, n_images=1)
        assert _run(["tune", "--manifest", manifest, "--damping-grid", "", "--gain-grid", "1",
                     "--output-dir", tmp_path]) == 1


class TestRenderCommand:
    def _scanpath_file(self, blob_png, tmp_path):
        out = tmp_path / "sim"
        _run(["simulate", blob_png, "--output-dir", out] + FAST)
        return out / "scene.scanpath.json"

    def test_overlay_and_rasters(self, blob_png, tmp_path):
        scan = self._scanpath_file(blob_png, tmp_path)
        out = tmp_path / "render"
        code = _run(
            ["render", blob_png, scan, "--features", "--mass", "--field", "--output-dir", out,
             "--working-size", "64", "64", "--workers", "1"]
        )
        assert code == 0
        assert (out / "scene.overlay.png").exists()
        assert (out / "scene.mass.png").exists()
        assert (out / "scene.field.png").exists()
        assert (out / "scene.feature_intensity.png").exists()
        assert (out / "scene.feature_orient_135.png").exists()

    def test_ior_snapshot(self, blob_png, tmp_path):
        scan = self._scanpath_file(blob_png, tmp_path)
        out = tmp_path / "render"
        code = _run(
            ["render", blob_png, scan, "--ior", "--output-dir", out,
             "--working-size", "64", "64", "--duration", "0.5"]
        )
        assert code == 0
        with Image.open(out / "scene.ior.png") as img:
            assert img.size == (64, 64)
            assert img.mode.startswith("I")  # 16-bit grayscale

    def test_png_embeds_config(self, blob_png, tmp_path):
        scan = self._scanpath_file(blob_png, tmp_path)
        out = tmp_path / "render"
        _run(["render", blob_png, scan, "--mass", "--output-dir", out, "--working-size", "64", "64"])
        with Image.open(out / "scene.mass.png") as img:
            meta = img.text
        embedded = json.loads(meta["gazesim:config"])
        assert embedded["model"] == "GRAV"
        with Image.open(out / "scene.overlay.png") as img:
            assert "gazesim:config" in img.text

    def test_out_of_bounds_fixation_names_index(self, blob_png, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(
            json.dumps(
                {
                    "image": "scene",
                    "model": "GRAV",
                    "config": {"working_size": [64, 64]},
                    "fixations": [
                        {"x": 10.0, "y": 10.0, "t_start": 0.0, "t_end": 0.5},
                        {"x": 200.0, "y": 10.0, "t_start": 0.6, "t_end": 1.0},
                    ],
                }
            )
        )
        code = _run(["render", blob_png, bad, "--output-dir", tmp_path, "--working-size", "64", "64"])
        assert code == 2
        assert "fixation 1" in capsys.readouterr().err


class TestManifestSimulate:
    def test_manifest_driven_simulation(self, tmp_path):
        manifest = build_toy_dataset(tmp_path / "toy", size=64, n_images=2)
        out = tmp_path / "out"
        code = _run(
            ["simulate", "--manifest", manifest, "--output-dir", out, "--workers", "1",
             "--working-size", "64", "64", "--duration", "1.0"]
        )
        assert code == 0
        assert (out / "img000.scanpath.json").exists()
        assert (out / "img001.scanpath.json").exists()
        # exposure from the manifest (3 s) overrides the --duration flag
        payload = json.loads((out / "img000.scanpath.json").read_text())
        assert payload["config"]["sim"]["duration"] == 3.0
