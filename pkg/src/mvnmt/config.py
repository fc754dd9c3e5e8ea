"""Run configuration files.

A run is described by an INI file with one section per component::

    [model]     ModelConfig fields
    [train]     TrainConfig fields
    [loss]      LossConfig fields
    [decode]    DecodeConfig fields
    [data]      toy-task generator or parallel text files
    [run]       output directory, model seed, evaluation metric

Unknown sections or keys are errors.  Every key may be omitted, in which
case the dataclass default applies.  :meth:`RunConfig.dumps` writes every
key, with floats in ``repr`` form so that a resolved file reloads to an
identical config.
"""

from __future__ import annotations

import configparser
import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from .decoding import DecodeConfig
from .errors import ConfigError
from .model import ModelConfig
from .objectives import LossConfig, dark_mode_str
from .training import TrainConfig


@dataclass
class DataConfig:
    """Where training and evaluation pairs come from.

    With ``train_src`` and ``train_tgt`` set, text files are read; otherwise
    a toy corpus is generated.
    """

    task: str = "copy"
    vocab_size: int = 20
    len_min: int = 3
    len_max: int = 10
    train_count: int = 2000
    test_count: int = 200
    data_seed: int = 1
    test_seed: int = 2
    train_src: str = ""
    train_tgt: str = ""
    valid_src: str = ""
    valid_tgt: str = ""

    @property
    def uses_files(self) -> bool:
        return bool(self.train_src or self.train_tgt)


@dataclass
class RunSection:
    output_dir: str = "run"
    model_seed: int = 1
    metric: str = "token_accuracy"
    consistency: bool = True

    def __post_init__(self):
        if self.metric not in ("token_accuracy", "bleu"):
            raise ConfigError(f"unknown metric {self.metric!r}")


_SECTIONS = {
    "model": ModelConfig,
    "train": TrainConfig,
    "loss": LossConfig,
    "decode": DecodeConfig,
    "data": DataConfig,
    "run": RunSection,
}


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    decode: DecodeConfig = field(default_factory=DecodeConfig)
    data: DataConfig = field(default_factory=DataConfig)
    run: RunSection = field(default_factory=RunSection)

    def as_dict(self) -> Dict[str, Dict[str, Any]]:
        out = {}
        for name in _SECTIONS:
            d = dataclasses.asdict(getattr(self, name))
            if name == "loss":
                d["dark_mode"] = dark_mode_str(self.loss.dark_mode)
            out[name] = d
        return out

    def dumps(self) -> str:
        lines = []
        for section, values in self.as_dict().items():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {_format(v)}" for k, v in values.items())
            lines.append("")
        return "\n".join(lines)

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.dumps(), encoding="utf-8")
        return path

    def with_overrides(self, overrides: Dict[str, Dict[str, Any]]) -> "RunConfig":
        """Copy with ``{section: {key: value}}`` applied; values may be strings."""
        merged = self.as_dict()
        for section, values in overrides.items():
            if section not in _SECTIONS:
                raise ConfigError(f"unknown config section [{section}]")
            for key, value in values.items():
                if key not in merged[section]:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                merged[section][key] = value
        return RunConfig.from_dict(merged)

    @classmethod
    def from_dict(cls, d: Dict[str, Dict[str, Any]]) -> "RunConfig":
        built = {}
        for section, klass in _SECTIONS.items():
            built[section] = _build(klass, section, d.get(section, {}))
        unknown = set(d) - set(_SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
        return cls(**built)


def _format(v: Any) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(raw: Any, hint, section: str, key: str):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    origin = typing.get_origin(hint)
    if origin is typing.Union:
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        if text.lower() == "none":
            return None
        hint = args[0] if len(args) == 1 else str
    try:
        if hint is bool:
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(text)
        if hint is int:
            return int(text)
        if hint is float:
            return float(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as {hint.__name__}") from None
    return text


def _build(klass, section: str, values: Dict[str, Any]):
    hints = typing.get_type_hints(klass)
    names = {f.name for f in dataclasses.fields(klass)}
    unknown = set(values) - names
    if unknown:
        raise ConfigError(f"unknown key(s) in section [{section}]: {sorted(unknown)}")
    kwargs = {k: _coerce(v, hints[k], section, k) for k, v in values.items()}
    try:
        return klass(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"[{section}] {e}") from e


def loads(text: str, base: Optional[RunConfig] = None) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str  # keys are case sensitive (M, N, M_a)
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from e
    overrides = {s: dict(parser.items(s)) for s in parser.sections()}
    return (base or RunConfig()).with_overrides(overrides)


def load(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return loads(text)


def parse_override(item: str) -> tuple:
    """``section.key=value`` as given on the command line."""
    if "=" not in item or "." not in item.split("=", 1)[0]:
        raise ConfigError(f"override {item!r} is not of the form section.key=value")
    lhs, value = item.split("=", 1)
    section, key = lhs.split(".", 1)
    return section.strip(), key.strip(), value
