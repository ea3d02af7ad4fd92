"""Run configuration: one JSON file reproduces every artifact of a run."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .artifacts import DEFAULT_ENGINE, EngineSettings
from .masking import DEFAULT_MASKING, MaskingConfig
from .planning import DEFAULT_ITEMS_BY_ARTIFACT, SERIES_NAMES
from .errors import InputError


@dataclass
class RunConfig:
    """Paths, generation, planning and analysis parameters of one experiment.

    The config file is the single source of truth; CLI flags override
    individual fields. A stored config plus the input items reproduces all
    outputs bit-identically.
    """

    # paths (relative paths resolve against the config file's directory)
    items_dir: str = "items"
    out_dir: str = "out"
    scores_csv: str = ""

    # generation
    seed: int = 0
    fft_size: int = 2048
    hop_size: int = 1024
    window: str = "sine"
    ms_gain: float = 0.7071067811865476
    bit_depth: int | str = 24
    lowpass_cutoffs: list = field(default_factory=lambda: [3500.0, 7000.0])
    masking: dict = field(default_factory=dict)
    items_by_artifact: dict = field(
        default_factory=lambda: {k: list(v) for k, v in DEFAULT_ITEMS_BY_ARTIFACT.items()}
    )

    # planning
    series: list = field(default_factory=lambda: list(SERIES_NAMES))
    series_items: dict = field(default_factory=dict)
    training_items: list = field(default_factory=list)

    # service
    host: str = "127.0.0.1"
    port: int = 8321
    ui_dir: str = ""

    # analysis
    bootstrap_b: int = 10_000
    stats_seed: int = 0
    star_thresholds: list = field(default_factory=lambda: [0.05, 0.01, 0.001])
    column_mapping: dict = field(default_factory=dict)

    # ---- derived paths ------------------------------------------------
    @property
    def stimuli_dir(self) -> Path:
        return Path(self.out_dir) / "stimuli"

    @property
    def manifest_path(self) -> Path:
        return Path(self.out_dir) / "manifest.jsonl"

    @property
    def plan_path(self) -> Path:
        return Path(self.out_dir) / "plan.json"

    @property
    def db_path(self) -> Path:
        return Path(self.out_dir) / "ratings.sqlite"

    @property
    def analysis_dir(self) -> Path:
        return Path(self.out_dir) / "analysis"

    def masking_config(self) -> MaskingConfig:
        known = {f.name for f in fields(MaskingConfig)}
        unknown = set(self.masking) - known
        if unknown:
            raise InputError(f"unknown masking parameters: {sorted(unknown)}")
        base = asdict(DEFAULT_MASKING)
        base.update(self.masking)
        return MaskingConfig(**base)

    def engine_settings(self) -> EngineSettings:
        return EngineSettings(
            fft_size=self.fft_size,
            hop_size=self.hop_size,
            window=self.window,
            ms_gain=self.ms_gain,
            masking=self.masking_config(),
        )

    # ---- serialization -------------------------------------------------
    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise InputError(f"config file not found: {path}")
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"config {path} is not valid JSON: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise InputError(f"unknown config fields: {sorted(unknown)}")
        config = cls(**payload)
        # relative paths are taken relative to the config file
        base = path.parent
        for attr in ("items_dir", "out_dir", "scores_csv", "ui_dir"):
            value = getattr(config, attr)
            if value and not Path(value).is_absolute():
                setattr(config, attr, str(base / value))
        return config

    def validate(self) -> None:
        if DEFAULT_ENGINE.fft_size and self.fft_size & (self.fft_size - 1):
            raise InputError(f"fft_size must be a power of two, got {self.fft_size}")
        if not 0 < self.hop_size <= self.fft_size:
            raise InputError("hop_size must be in (0, fft_size]")
        for name in self.series:
            if name not in SERIES_NAMES:
                raise InputError(f"unknown series {name!r} in config")
        if self.bit_depth not in (16, 24, "32f"):
            raise InputError(f"bit_depth must be 16, 24 or '32f', got {self.bit_depth!r}")
