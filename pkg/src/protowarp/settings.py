"""
Pipeline configuration.

Every tunable constant lives here with its default. A TOML file overrides the
defaults section by section; unknown sections or keys are rejected.
"""

import dataclasses
import importlib
import tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from .exceptions import ConfigError
from .records import Label, LeadId

DEFAULT_CONFIG_FILENAME = "protowarp.toml"

DEFAULT_POOLS = {
    "Normal": {"strategy": "random", "count": 256},
    "LVH": {"strategy": "all"},
}

STRATEGY_ALIASES = {
    "all": "protowarp.strategies.AllRecordsStrategy",
    "random": "protowarp.strategies.RandomSampleStrategy",
    "exact": "protowarp.strategies.ExactRecordsStrategy",
}


@dataclass(frozen=True)
class IoConfig:
    sample_rate_hz: float = 500.0
    input_format: str = "auto"  # {"auto", "wfdb", "csv"}
    labels_file: str = ""

    def validate(self):
        if self.sample_rate_hz <= 0:
            raise ConfigError("io.sample_rate_hz must be positive")
        if self.input_format not in ("auto", "wfdb", "csv"):
            raise ConfigError(
                "io.input_format must be auto, wfdb or csv, got {!r}".format(
                    self.input_format
                )
            )


@dataclass(frozen=True)
class PreprocessConfig:
    # Baseline wander
    highpass_cutoff_hz: float = 0.5
    highpass_order: int = 4

    # R-peak detection on the composite lead
    band_low_hz: float = 5.0
    band_high_hz: float = 15.0
    band_order: int = 2
    integration_window_s: float = 0.150
    refractory_s: float = 0.3
    threshold_ratio: float = 0.5
    threshold_history: int = 8
    learning_period_s: float = 2.0
    refine_window_s: float = 0.05

    # Segmentation
    beat_length: int = 500

    def validate(self):
        if self.highpass_order < 1 or self.band_order < 1:
            raise ConfigError("preprocess filter orders must be >= 1")
        if not 0 < self.band_low_hz < self.band_high_hz:
            raise ConfigError("preprocess band must satisfy 0 < low < high")
        if self.threshold_history < 1:
            raise ConfigError("preprocess.threshold_history must be >= 1")
        if self.beat_length < 2:
            raise ConfigError("preprocess.beat_length must be >= 2")


@dataclass(frozen=True)
class ScreeningConfig:
    threshold: float = 0.3

    def validate(self):
        if self.threshold <= 0:
            raise ConfigError("screening.threshold must be positive")


@dataclass(frozen=True)
class WarpConfig:
    w_r: float = 20.0
    w_s: float = 1e-4
    w_o: float = 1e10
    s_min: float = -100.0
    s_max: float = 100.0
    max_iters: int = 2000
    step_size: float = 1e-3
    step_growth: float = 1.2
    rel_tol: float = 1e-6
    r_floor: float = 1e-3
    method: str = "lbfgs"  # {"lbfgs", "descent"}
    shift_scale: float = 10.0
    global_start: bool = True

    def validate(self):
        if min(self.w_r, self.w_s, self.w_o) <= 0:
            raise ConfigError("warp weights w_r, w_s, w_o must be positive")
        if not self.s_min < 0 < self.s_max:
            raise ConfigError("warp bounds must satisfy s_min < 0 < s_max")
        if self.max_iters < 1:
            raise ConfigError("warp.max_iters must be >= 1")
        if self.step_size <= 0 or self.step_growth < 1:
            raise ConfigError("warp step_size > 0 and step_growth >= 1")
        if self.r_floor <= 0 or self.shift_scale <= 0:
            raise ConfigError("warp r_floor and shift_scale must be positive")
        if self.method not in ("lbfgs", "descent"):
            raise ConfigError(
                "warp.method must be lbfgs or descent; got {!r}".format(
                    self.method
                )
            )


@dataclass(frozen=True)
class PrototypeConfig:
    r_threshold_ratio: float = 0.015
    s_threshold: float = 20.0
    max_rounds: int = 20
    smoothing_window: int = 25
    zero_distance_eps: float = 1e-9
    pools: Mapping[str, Mapping[str, Any]] = field(
        default_factory=lambda: {k: dict(v) for k, v in DEFAULT_POOLS.items()}
    )

    def validate(self):
        if self.max_rounds < 1 or self.smoothing_window < 1:
            raise ConfigError("prototype max_rounds/smoothing_window >= 1")
        for name in self.pools:
            try:
                label = Label.parse(name)
            except ValueError as e:
                raise ConfigError("prototype.pools: {}".format(e)) from e
            if label is Label.UNKNOWN:
                raise ConfigError("prototype.pools: Unknown is not a class")
            if "strategy" not in self.pools[name]:
                raise ConfigError(
                    "prototype.pools.{} needs a strategy".format(name)
                )


@dataclass(frozen=True)
class DiagnosisConfig:
    decision_leads: Tuple[str, ...] = ("V1", "V5", "V6")
    nearest_k: int = 2
    r_weight: float = 10.0
    landmark_window: int = 60
    sokolow_lyon_mv: float = 3.5
    cornell_mv: float = 1.2
    test_per_class: int = 100

    def validate(self):
        for lead in self.decision_leads:
            try:
                LeadId.parse(lead)
            except ValueError as e:
                raise ConfigError("diagnosis.decision_leads: {}".format(e))
        if not self.decision_leads:
            raise ConfigError("diagnosis.decision_leads must not be empty")
        if self.nearest_k < 1 or self.landmark_window < 1:
            raise ConfigError("diagnosis nearest_k/landmark_window >= 1")

    @property
    def leads(self) -> Tuple[LeadId, ...]:
        return tuple(LeadId.parse(x) for x in self.decision_leads)


SECTIONS = {
    "io": IoConfig,
    "preprocess": PreprocessConfig,
    "screening": ScreeningConfig,
    "warp": WarpConfig,
    "prototype": PrototypeConfig,
    "diagnosis": DiagnosisConfig,
}


@dataclass(frozen=True)
class PipelineConfig:
    io: IoConfig = field(default_factory=IoConfig)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    screening: ScreeningConfig = field(default_factory=ScreeningConfig)
    warp: WarpConfig = field(default_factory=WarpConfig)
    prototype: PrototypeConfig = field(default_factory=PrototypeConfig)
    diagnosis: DiagnosisConfig = field(default_factory=DiagnosisConfig)
    rng_seed: int = 0
    workers: int = 1

    def validate(self) -> "PipelineConfig":
        for name in SECTIONS:
            getattr(self, name).validate()
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes).validate()

    @property
    def strategies(self):
        """Instantiated pool strategies keyed by class label."""
        ret = {}
        for name, options in self.prototype.pools.items():
            options = dict(options)
            strategy_path = options.pop("strategy")
            klass = import_string(
                STRATEGY_ALIASES.get(strategy_path, strategy_path)
            )
            try:
                ret[Label.parse(name)] = klass(name=name, **options)
            except TypeError as e:
                raise ConfigError(
                    "prototype.pools.{}: {}".format(name, e)
                ) from e
        return ret


def import_string(dotted_path: str):
    try:
        module_path, attribute = dotted_path.rsplit(".", 1)
        return getattr(importlib.import_module(module_path), attribute)
    except (ValueError, ImportError, AttributeError) as e:
        raise ConfigError(
            "Cannot import strategy {!r}: {}".format(dotted_path, e)
        ) from e


def _build_section(name: str, klass, values: Mapping[str, Any]):
    if not isinstance(values, Mapping):
        raise ConfigError("[{}] must be a table".format(name))

    known = {f.name: f for f in dataclasses.fields(klass)}
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise ConfigError(
            "Unknown key(s) in [{}]: {}".format(name, ", ".join(unknown))
        )

    kwargs = {}
    defaults = klass()
    for key, value in values.items():
        default = getattr(defaults, key)
        kwargs[key] = _coerce(name, key, value, default)
    return klass(**kwargs)


def _coerce(section, key, value, default):
    where = "{}.{}".format(section, key)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError("{} must be a boolean".format(where))
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError("{} must be an integer".format(where))
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("{} must be a number".format(where))
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError("{} must be a string".format(where))
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list):
            raise ConfigError("{} must be an array".format(where))
        return tuple(value)
    if isinstance(default, Mapping):
        if not isinstance(value, Mapping):
            raise ConfigError("{} must be a table".format(where))
        return {k: dict(v) for k, v in value.items()}
    return value


def config_from_mapping(data: Mapping[str, Any]) -> PipelineConfig:
    data = dict(data)
    kwargs = {}  # type: Dict[str, Any]

    for key in ("rng_seed", "workers"):
        if key in data:
            kwargs[key] = _coerce("config", key, data.pop(key), 0)

    for name, klass in SECTIONS.items():
        if name in data:
            kwargs[name] = _build_section(name, klass, data.pop(name))

    if data:
        raise ConfigError(
            "Unknown section(s) or key(s): {}".format(", ".join(sorted(data)))
        )

    return PipelineConfig(**kwargs).validate()


def load_config(path: Optional[Path] = None) -> PipelineConfig:
    """
    Load configuration from `path`. Without a path, a `protowarp.toml` in the
    working directory is used if present, otherwise the built-in defaults.
    """
    if path is None:
        candidate = Path.cwd() / DEFAULT_CONFIG_FILENAME
        if not candidate.exists():
            return PipelineConfig().validate()
        path = candidate

    try:
        with Path(path).open("rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError as e:
        raise ConfigError("Config file {} not found".format(path)) from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError("Cannot parse {}: {}".format(path, e)) from e

    return config_from_mapping(data)
