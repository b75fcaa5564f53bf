"""Experiment configuration: dataclasses, TOML loading and the sweep axis.

A config file is TOML with top-level keys ``name``, ``seeds``, ``modes``,
``workers``, ``output`` and ``schema_version`` plus the sections
``[channel]`` (with ``[channel.burst]``), ``[equalizer]``, ``[frame]``,
``[link]``, ``[sweep]`` and ``[spectrum]``. Every omitted key takes its
default. Unknown keys are rejected.
"""

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import tomli
import tomli_w

from ..channel import BurstConfig, ChannelConfig
from ..equalizers.dfe import resolve_mode
from ..exceptions import ConfigurationError
from ..signal import PRBS_TAPS
from ..utils import check_scalar

SCHEMA_VERSION = 1
SPECTRUM_STAGES = ("received", "pnle", "dfe", "wdfe", "mlse")
SWEEP_SECTIONS = ("channel", "equalizer", "frame", "link")
MODE_NAMES = {"classical_dfe": "dfe", "weighted_dfe": "wdfe"}


def short_mode(mode):
    """Canonical short name (``'dfe'`` or ``'wdfe'``) of an equalizer mode."""
    return MODE_NAMES[resolve_mode(mode)]


@dataclass(frozen=True)
class FrameConfig:
    training_length: int = 5000
    payload_length: int = 100_000
    prbs_order: int = 23

    def __post_init__(self):
        check_scalar(self.training_length, "frame.training_length", int, min_val=64)
        check_scalar(self.payload_length, "frame.payload_length", int, min_val=1)
        if self.prbs_order not in PRBS_TAPS:
            raise ConfigurationError(
                f"frame.prbs_order must be one of {sorted(PRBS_TAPS)}, got {self.prbs_order}")


@dataclass(frozen=True)
class LinkConfig:
    """Transceiver rates and pulse shaping.

    ``adc_rate = 0`` skips the ADC resampling round trip and
    ``sync_window = 0`` searches lags up to the training length.
    """

    symbol_rate: float = 72e9
    roll_off: float = 0.02
    rrc_span: int = 32
    samples_per_symbol: int = 2
    adc_rate: float = 80e9
    sync_window: int = 0

    def __post_init__(self):
        check_scalar(self.symbol_rate, "link.symbol_rate", min_val=0.0, include_min=False)
        check_scalar(self.roll_off, "link.roll_off", min_val=0.0, max_val=1.0)
        check_scalar(self.rrc_span, "link.rrc_span", int, min_val=4)
        check_scalar(self.samples_per_symbol, "link.samples_per_symbol", int, min_val=2)
        check_scalar(self.adc_rate, "link.adc_rate", min_val=0.0)
        check_scalar(self.sync_window, "link.sync_window", int, min_val=0)


@dataclass(frozen=True)
class EqualizerConfig:
    """Receiver chain settings.

    ``pnle_taps = []`` disables the PNLE. ``pf_alpha`` is a number or
    ``"auto"`` (see :func:`~burstdfe.equalizers.whitening_alpha`).
    ``mlse_memory = 0`` bypasses both the post filter and the MLSE.
    ``traceback_depth = 0`` selects the detector default.
    """

    pnle_taps: tuple = ()
    pnle_mu: tuple = (1e-3, 1e-4, 1e-4)
    dfe_taps: tuple = (71, 51)
    mu1: float = 1e-3
    mu2: float = 1e-3
    mu_decay: float = 0.9995
    mu_floor: float = 0.1
    training_passes: int = 10
    weight_exponent: float = 1.0
    pf_alpha: object = 0.0
    mlse_memory: int = 6
    max_memory: int = 20
    traceback_depth: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pnle_taps", tuple(self.pnle_taps))
        object.__setattr__(self, "pnle_mu", tuple(float(m) for m in self.pnle_mu))
        object.__setattr__(self, "dfe_taps", tuple(self.dfe_taps))
        if self.pnle_taps:
            if len(self.pnle_taps) != 3 or any(int(n) != n or n < 1 or n % 2 == 0
                                               for n in self.pnle_taps):
                raise ConfigurationError(
                    f"equalizer.pnle_taps must be three odd positive integers, got {self.pnle_taps}")
        if len(self.pnle_mu) != 3:
            raise ConfigurationError("equalizer.pnle_mu must hold three step sizes")
        if len(self.dfe_taps) != 2 or self.dfe_taps[0] < 1 or self.dfe_taps[1] < 0:
            raise ConfigurationError(
                f"equalizer.dfe_taps must be [n_feedforward >= 1, n_feedback >= 0], got {self.dfe_taps}")
        if self.dfe_taps[0] % 2 == 0:
            raise ConfigurationError("equalizer.dfe_taps feedforward length must be odd")
        for name in ("mu1", "mu2"):
            check_scalar(getattr(self, name), f"equalizer.{name}", min_val=0.0)
        check_scalar(self.mu_decay, "equalizer.mu_decay", min_val=0.0, max_val=1.0,
                     include_min=False)
        check_scalar(self.mu_floor, "equalizer.mu_floor", min_val=0.0, max_val=1.0)
        check_scalar(self.training_passes, "equalizer.training_passes", int, min_val=1)
        check_scalar(self.weight_exponent, "equalizer.weight_exponent", min_val=0.0,
                     include_min=False)
        if isinstance(self.pf_alpha, str):
            if self.pf_alpha != "auto":
                raise ConfigurationError(
                    f"equalizer.pf_alpha must be a number or 'auto', got {self.pf_alpha!r}")
        else:
            check_scalar(self.pf_alpha, "equalizer.pf_alpha", min_val=-1.0, max_val=1.0)
        check_scalar(self.mlse_memory, "equalizer.mlse_memory", int, min_val=0)
        check_scalar(self.max_memory, "equalizer.max_memory", int, min_val=0)
        check_scalar(self.traceback_depth, "equalizer.traceback_depth", int, min_val=0)


@dataclass(frozen=True)
class SweepConfig:
    """One swept field. ``axis = ""`` runs the base config once per seed."""

    axis: str = ""
    values: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if self.axis and not self.values:
            raise ConfigurationError(f"sweep over {self.axis!r} needs at least one value")
        if self.values and not self.axis:
            raise ConfigurationError("sweep.values given without sweep.axis")


@dataclass(frozen=True)
class SpectrumConfig:
    stages: tuple = ()
    segment: int = 4096
    overlap: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        for st in self.stages:
            if st not in SPECTRUM_STAGES:
                raise ConfigurationError(
                    f"spectrum.stages entry {st!r} is not one of {SPECTRUM_STAGES}")
        check_scalar(self.segment, "spectrum.segment", int, min_val=16)
        check_scalar(self.overlap, "spectrum.overlap", min_val=0.0, max_val=1.0,
                     include_max=False)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    schema_version: int = SCHEMA_VERSION
    seeds: tuple = (1,)
    modes: tuple = ("dfe", "wdfe")
    workers: int = 1
    output: str = "results"
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    equalizer: EqualizerConfig = field(default_factory=EqualizerConfig)
    frame: FrameConfig = field(default_factory=FrameConfig)
    link: LinkConfig = field(default_factory=LinkConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    spectrum: SpectrumConfig = field(default_factory=SpectrumConfig)

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigurationError(
                f"schema_version {self.schema_version} is not supported (expected {SCHEMA_VERSION})")
        object.__setattr__(self, "seeds", tuple(self.seeds))
        object.__setattr__(self, "modes", tuple(short_mode(m) for m in self.modes))
        if not self.seeds:
            raise ConfigurationError("seeds must list at least one seed")
        for s in self.seeds:
            check_scalar(s, "seeds", int, min_val=0)
        if not self.modes:
            raise ConfigurationError("modes must list at least one equalizer mode")
        if len(set(self.modes)) != len(self.modes):
            raise ConfigurationError(f"modes contains duplicates: {self.modes}")
        check_scalar(self.workers, "workers", int, min_val=1)
        for st in ("dfe", "wdfe"):
            if st in self.spectrum.stages and st not in self.modes:
                raise ConfigurationError(f"spectrum stage {st!r} requires mode {st!r} in modes")
        if "pnle" in self.spectrum.stages and not self.equalizer.pnle_taps:
            raise ConfigurationError("spectrum stage 'pnle' requires equalizer.pnle_taps")
        if self.sweep.axis:
            canonical = resolve_axis(self.sweep.axis)
            object.__setattr__(self, "sweep", SweepConfig(canonical, self.sweep.values))
            for v in self.sweep.values:
                apply_override(self, canonical, v)
        else:
            _check_training(self)

    @property
    def n_planned_runs(self):
        return max(1, len(self.sweep.values)) * len(self.seeds)


def _check_training(cfg):
    need = 10 * (cfg.equalizer.mlse_memory + 1)
    if cfg.frame.training_length < need:
        raise ConfigurationError(
            f"frame.training_length {cfg.frame.training_length} is below the {need} symbols "
            f"needed to fit equalizer.mlse_memory = {cfg.equalizer.mlse_memory}")


_SECTION_TYPES = {
    "channel": ChannelConfig,
    "equalizer": EqualizerConfig,
    "frame": FrameConfig,
    "link": LinkConfig,
    "sweep": SweepConfig,
    "spectrum": SpectrumConfig,
}


def _field_names(cls):
    return [f.name for f in dataclasses.fields(cls)]


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{where or 'config'} must be a table")
    allowed = set(_field_names(cls))
    for key in data:
        if key not in allowed:
            prefix = f"{where}." if where else ""
            raise ConfigurationError(f"unknown config key '{prefix}{key}'")
    kwargs = dict(data)
    if cls is ChannelConfig and "burst" in kwargs:
        kwargs["burst"] = _build(BurstConfig, kwargs["burst"], f"{where}.burst")
    if cls is ExperimentConfig:
        for sec, sub in _SECTION_TYPES.items():
            if sec in kwargs:
                kwargs[sec] = _build(sub, kwargs[sec], sec)
    try:
        return cls(**kwargs)
    except ConfigurationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid value in {where or 'config'}: {exc}") from exc


def config_from_dict(data):
    """Build and validate an :class:`ExperimentConfig` from nested dicts."""
    return _build(ExperimentConfig, data, "")


def config_to_dict(cfg):
    """Fully resolved config as TOML-serializable nested dicts."""
    out = {
        "schema_version": cfg.schema_version,
        "name": cfg.name,
        "seeds": list(cfg.seeds),
        "modes": list(cfg.modes),
        "workers": cfg.workers,
        "output": cfg.output,
        "channel": cfg.channel.to_dict(),
    }
    for sec in ("equalizer", "frame", "link", "sweep", "spectrum"):
        d = dataclasses.asdict(getattr(cfg, sec))
        out[sec] = {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}
    return out


def dumps_config(cfg):
    return tomli_w.dumps(config_to_dict(cfg))


def loads_config(text, source="<string>"):
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        lineno = getattr(exc, "lineno", None)
        where = f"line {lineno}" if lineno else "unknown line"
        raise ConfigurationError(f"{source}: TOML parse error at {where}: {exc}") from exc
    return config_from_dict(data)


def load_config(path):
    """Read, parse and validate an experiment config file.

    ``path`` may also name a bundled preset (see :func:`preset_names`).
    """
    p = Path(path)
    if not p.exists() and str(path) in preset_names():
        return loads_config(preset_text(str(path)), source=f"preset {path}")
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return loads_config(text, source=str(path))


def preset_names():
    """Names of the experiment presets shipped with the package."""
    root = resources.files("burstdfe.harness") / "presets"
    return sorted(e.name[:-5] for e in root.iterdir() if e.name.endswith(".toml"))


def preset_text(name):
    root = resources.files("burstdfe.harness") / "presets"
    return (root / f"{name}.toml").read_text(encoding="utf-8")


def resolve_axis(axis):
    """Canonical dotted path of a sweep axis.

    A bare name such as ``"rop_dbm"`` must match a field of exactly one of the
    channel, equalizer, frame or link sections. Dotted paths are checked
    field by field, e.g. ``"channel.burst.amplitude"``.
    """
    parts = axis.split(".")
    if len(parts) == 1:
        hits = [sec for sec in SWEEP_SECTIONS if axis in _field_names(_SECTION_TYPES[sec])]
        if not hits:
            hits = ["channel.burst"] if axis in _field_names(BurstConfig) else []
        if len(hits) != 1:
            reason = "is ambiguous" if hits else "does not name a config field"
            raise ConfigurationError(f"sweep axis {axis!r} {reason}")
        return f"{hits[0]}.{axis}"
    if parts[0] not in SWEEP_SECTIONS:
        raise ConfigurationError(f"sweep axis {axis!r} does not name a config field")
    cls = _SECTION_TYPES[parts[0]]
    for i, part in enumerate(parts[1:], start=1):
        if part not in _field_names(cls):
            raise ConfigurationError(f"sweep axis {axis!r} does not name a config field")
        if cls is ChannelConfig and part == "burst":
            cls = BurstConfig
        elif i < len(parts) - 1:
            raise ConfigurationError(f"sweep axis {axis!r} does not name a config field")
    return axis


def apply_override(cfg, axis, value):
    """Copy of ``cfg`` with the field at dotted ``axis`` set to ``value``."""
    parts = resolve_axis(axis).split(".")

    def rebuild(obj, path):
        if len(path) == 1:
            return dataclasses.replace(obj, **{path[0]: value})
        return dataclasses.replace(obj, **{path[0]: rebuild(getattr(obj, path[0]), path[1:])})

    try:
        section = rebuild(getattr(cfg, parts[0]), parts[1:])
    except ConfigurationError as exc:
        raise ConfigurationError(f"sweep value {value!r} for {axis!r}: {exc}") from exc
    out = dataclasses.replace(cfg, **{parts[0]: section, "sweep": SweepConfig()})
    return out
