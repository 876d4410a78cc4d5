"""Run configuration: defaults, JSON config files, and flag overrides.

Precedence is flags > config file > built-in defaults. Values left null
resolve per run: the inhibition width and the winner-take-all radius
derive from the dataset's pixels-per-degree (2 degrees of visual angle),
the fixation count from the exposure time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .dynamics import DEFAULT_DAMPING, DEFAULT_GLOBAL_GAIN, SimConfig
from .errors import ConfigError, DataError
from .gravity import GravityParams
from .ior import IorParams
from .metrics import DEFAULT_SED_GRID, DEFAULT_TDE_WINDOW
from .wta import WtaConfig

DEFAULT_WORKING_SIZE = (224, 224)
DEFAULT_IOR_SIGMA = 14.0  # px at 224x224
DEFAULT_WTA_RADIUS = 15.0  # px at 224x224
INHIBITION_DEGREES = 2.0  # visual angle covered by IOR and WTA inhibition
FIXATIONS_PER_SECOND = 3.0  # drives the default WTA fixation count


@dataclass(frozen=True)
class MetricConfig:
    sed_grid: int = DEFAULT_SED_GRID
    tde_window: int = DEFAULT_TDE_WINDOW

    def __post_init__(self):
        if self.sed_grid < 1:
            raise ValueError(f"sed_grid must be >= 1, got {self.sed_grid}")
        if self.tde_window < 1:
            raise ValueError(f"tde_window must be >= 1, got {self.tde_window}")


@dataclass(frozen=True)
class ExtractionConfig:
    vel_threshold: float = 700.0  # px/s
    min_duration: float = 0.08  # s

    def __post_init__(self):
        if self.vel_threshold <= 0 or self.min_duration <= 0:
            raise ValueError("fixation extraction thresholds must be positive")


@dataclass(frozen=True)
class RunConfig:
    mode: str = "basic"  # "basic" | "itti"
    model: str = "GRAV"  # "GRAV" | "WTA"
    working_size: tuple[int, int] = DEFAULT_WORKING_SIZE
    gravity: GravityParams = field(default_factory=lambda: GravityParams(global_gain=DEFAULT_GLOBAL_GAIN))
    ior_enabled: bool = True
    ior_beta: float = 0.1
    ior_sigma: float | None = None  # None: 2 deg at the effective pixels-per-degree
    sim: SimConfig = field(default_factory=SimConfig)
    wta_radius: float | None = None  # None: 2 deg
    wta_num_fixations: int | None = None  # None: ceil(3 * exposure)
    wta_fixation_duration: float | None = None  # None: exposure / count
    metrics: MetricConfig = field(default_factory=MetricConfig)
    extraction: ExtractionConfig = field(default_factory=ExtractionConfig)
    output_dir: Path = Path("out")
    workers: int | None = None  # None: all cores
    pixels_per_degree: float | None = None  # None: manifest value or unknown

    def __post_init__(self):
        if self.mode not in ("basic", "itti"):
            raise ValueError(f"mode must be 'basic' or 'itti', got {self.mode!r}")
        if self.model not in ("GRAV", "WTA"):
            raise ValueError(f"model must be 'GRAV' or 'WTA', got {self.model!r}")
        w, h = self.working_size
        if w < 16 or h < 16:
            raise ValueError(f"working size {w}x{h} below 16px minimum")
        if not 0 < self.ior_beta < 1:
            raise ValueError(f"ior beta must lie in (0, 1), got {self.ior_beta}")
        for name in ("ior_sigma", "wta_radius", "wta_fixation_duration"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")
        if self.wta_num_fixations is not None and self.wta_num_fixations < 1:
            raise ValueError(f"wta_num_fixations must be >= 1, got {self.wta_num_fixations}")
        if self.workers is not None and self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.pixels_per_degree is not None and self.pixels_per_degree <= 0:
            raise ValueError("pixels_per_degree must be positive")
        if self.gravity.alphas is not None:
            expected = 8 if self.mode == "basic" else 1
            if len(self.gravity.alphas) != expected:
                raise ValueError(
                    f"{len(self.gravity.alphas)} feature gains for mode {self.mode!r} (needs {expected})"
                )

    def effective_ppd(self, manifest_ppd: float | None = None) -> float | None:
        return self.pixels_per_degree if self.pixels_per_degree is not None else manifest_ppd

    def ior_params(self, manifest_ppd: float | None = None) -> IorParams:
        sigma = self.ior_sigma
        if sigma is None:
            ppd = self.effective_ppd(manifest_ppd)
            sigma = INHIBITION_DEGREES * ppd if ppd is not None else DEFAULT_IOR_SIGMA
        return IorParams(beta=self.ior_beta, sigma=sigma)

    def wta_config(self, exposure: float | None = None, manifest_ppd: float | None = None) -> WtaConfig:
        radius = self.wta_radius
        if radius is None:
            ppd = self.effective_ppd(manifest_ppd)
            radius = INHIBITION_DEGREES * ppd if ppd is not None else DEFAULT_WTA_RADIUS
        exposure = exposure if exposure is not None else self.sim.duration
        count = self.wta_num_fixations
        if count is None:
            count = max(1, math.ceil(FIXATIONS_PER_SECOND * exposure))
        duration = self.wta_fixation_duration
        if duration is None:
            duration = exposure / count
        return WtaConfig(inhibition_radius=radius, num_fixations=count, fixation_duration=duration)

    def sim_for_exposure(self, exposure: float | None = None) -> SimConfig:
        if exposure is None or exposure == self.sim.duration:
            return self.sim
        return replace(self.sim, duration=exposure)


def default_config_dict() -> dict:
    return {
        "mode": "basic",
        "model": "GRAV",
        "working_size": list(DEFAULT_WORKING_SIZE),
        "gravity": {"alphas": None, "global_gain": DEFAULT_GLOBAL_GAIN},
        "ior": {"enabled": True, "beta": 0.1, "sigma": None},
        "sim": {
            "damping": DEFAULT_DAMPING,
            "duration": 3.0,
            "sample_dt": 0.02,
            "init_pos": None,
            "init_vel": [0.0, 0.0],
            "rtol": 1e-6,
            "atol": 1e-8,
            "rng_seed": 0,
        },
        "wta": {"inhibition_radius": None, "num_fixations": None, "fixation_duration": None},
        "metrics": {"sed_grid": DEFAULT_SED_GRID, "tde_window": DEFAULT_TDE_WINDOW},
        "extraction": {"vel_threshold": 700.0, "min_duration": 0.08},
        "output_dir": "out",
        "workers": None,
        "pixels_per_degree": None,
    }


def merge_config(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge_config(out[key], value)
        elif value is not None or key not in out:
            out[key] = value
    return out


def load_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise DataError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return raw


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} key(s): {', '.join(sorted(unknown))}")


def build_run_config(raw: dict) -> RunConfig:
    """Validate a merged config dict and construct the typed RunConfig."""
    raw = merge_config(default_config_dict(), raw)
    _check_keys(raw, set(default_config_dict()), "config")
    for section in ("gravity", "ior", "sim", "wta", "metrics", "extraction"):
        if not isinstance(raw[section], dict):
            raise ConfigError(f"config section {section!r} must be an object")
        _check_keys(raw[section], set(default_config_dict()[section]), section)

    g, i, s, wta_raw, m, e = (raw[k] for k in ("gravity", "ior", "sim", "wta", "metrics", "extraction"))
    try:
        alphas = tuple(g["alphas"]) if g["alphas"] is not None else None
        return RunConfig(
            mode=str(raw["mode"]).lower(),
            model=str(raw["model"]).upper(),
            working_size=tuple(int(v) for v in raw["working_size"]),
            gravity=GravityParams(alphas=alphas, global_gain=float(g["global_gain"])),
            ior_enabled=bool(i["enabled"]),
            ior_beta=float(i["beta"]),
            ior_sigma=None if i["sigma"] is None else float(i["sigma"]),
            sim=SimConfig(
                damping=float(s["damping"]),
                duration=float(s["duration"]),
                sample_dt=float(s["sample_dt"]),
                init_pos=None if s["init_pos"] is None else tuple(float(v) for v in s["init_pos"]),
                init_vel=tuple(float(v) for v in s["init_vel"]),
                rtol=float(s["rtol"]),
                atol=float(s["atol"]),
                rng_seed=int(s["rng_seed"]),
            ),
            wta_radius=None if wta_raw["inhibition_radius"] is None else float(wta_raw["inhibition_radius"]),
            wta_num_fixations=None if wta_raw["num_fixations"] is None else int(wta_raw["num_fixations"]),
            wta_fixation_duration=(
                None if wta_raw["fixation_duration"] is None else float(wta_raw["fixation_duration"])
            ),
            metrics=MetricConfig(sed_grid=int(m["sed_grid"]), tde_window=int(m["tde_window"])),
            extraction=ExtractionConfig(
                vel_threshold=float(e["vel_threshold"]), min_duration=float(e["min_duration"])
            ),
            output_dir=Path(raw["output_dir"]),
            workers=None if raw["workers"] is None else int(raw["workers"]),
            pixels_per_degree=None if raw["pixels_per_degree"] is None else float(raw["pixels_per_degree"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def config_snapshot(cfg: RunConfig, manifest_ppd: float | None = None, exposure: float | None = None) -> dict:
    """Fully resolved parameter record embedded in every output file."""
    ior = cfg.ior_params(manifest_ppd)
    wta = cfg.wta_config(exposure, manifest_ppd)
    sim = cfg.sim_for_exposure(exposure)
    return {
        "mode": cfg.mode,
        "model": cfg.model,
        "working_size": list(cfg.working_size),
        "gravity": {
            "alphas": None if cfg.gravity.alphas is None else list(cfg.gravity.alphas),
            "global_gain": cfg.gravity.global_gain,
        },
        "ior": {"enabled": cfg.ior_enabled, "beta": ior.beta, "sigma": ior.sigma},
        "sim": {
            "damping": sim.damping,
            "duration": sim.duration,
            "sample_dt": sim.sample_dt,
            "init_pos": None if sim.init_pos is None else list(sim.init_pos),
            "init_vel": list(sim.init_vel),
            "rtol": sim.rtol,
            "atol": sim.atol,
            "rng_seed": sim.rng_seed,
        },
        "wta": {
            "inhibition_radius": wta.inhibition_radius,
            "num_fixations": wta.num_fixations,
            "fixation_duration": wta.fixation_duration,
        },
        "metrics": {"sed_grid": cfg.metrics.sed_grid, "tde_window": cfg.metrics.tde_window},
        "extraction": {
            "vel_threshold": cfg.extraction.vel_threshold,
            "min_duration": cfg.extraction.min_duration,
        },
        "pixels_per_degree": cfg.effective_ppd(manifest_ppd),
    }
