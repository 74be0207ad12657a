"""Screening parameters and the flat ``key = value`` config file format.

Keys use dotted names matching the nested dataclasses, e.g.::

    t1 = 0.48
    t_ssim = 0.03
    cluster.window_n = 64
    saliency.sigma = 1.0

Resolution order is CLI flag > config file > built-in default.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .hcluster import LINKAGES
from .ssim import SsimParams

COMPARE_MODES = ("adjacent", "reference")
DEFAULT_PLAY_RATE = 984.1  # frames per minute


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ClusterParams:
    window_n: int = 64
    linkage: str = "average"

    def __post_init__(self):
        if self.window_n < 1:
            raise ConfigError("cluster.window_n", f"must be >= 1, got {self.window_n}")
        if self.linkage not in LINKAGES:
            raise ConfigError("cluster.linkage", f"must be one of {LINKAGES}, got {self.linkage!r}")


@dataclass(frozen=True)
class SaliencyParams:
    sigma: float = 1.0
    block_size: int = 40
    k: int = 3

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigError("saliency.sigma", f"must be positive, got {self.sigma}")
        if self.block_size < 1:
            raise ConfigError("saliency.block_size", f"must be >= 1, got {self.block_size}")
        if self.k < 1:
            raise ConfigError("saliency.k", f"must be >= 1, got {self.k}")


@dataclass(frozen=True)
class FeatureParams:
    mask_dark_threshold: float | None = None

    def __post_init__(self):
        t = self.mask_dark_threshold
        if t is not None and not 0 <= t <= 1:
            raise ConfigError("features.mask_dark_threshold", f"must lie in [0, 1], got {t}")


@dataclass(frozen=True)
class ScreenParams:
    t1: float = 0.48
    t_ssim: float = 0.03
    compare_mode: str = "adjacent"
    cluster: ClusterParams = field(default_factory=ClusterParams)
    saliency: SaliencyParams = field(default_factory=SaliencyParams)
    ssim: SsimParams = field(default_factory=SsimParams)
    features: FeatureParams = field(default_factory=FeatureParams)

    def __post_init__(self):
        if not 0 < self.t1 <= 1:
            raise ConfigError("t1", f"must lie in (0, 1], got {self.t1}")
        if not self.t_ssim >= 0:
            raise ConfigError("t_ssim", f"must be >= 0, got {self.t_ssim}")
        if self.compare_mode not in COMPARE_MODES:
            raise ConfigError("compare_mode", f"must be one of {COMPARE_MODES}, got {self.compare_mode!r}")
        if self.ssim.window > self.saliency.block_size:
            raise ConfigError(
                "ssim.window",
                f"window {self.ssim.window} exceeds saliency.block_size {self.saliency.block_size}",
            )

    @property
    def window_n(self) -> int:
        return self.cluster.window_n

    def replace(self, **changes) -> "ScreenParams":
        return dataclasses.replace(self, **changes)


_SECTIONS = {
    "cluster": ClusterParams,
    "saliency": SaliencyParams,
    "ssim": SsimParams,
    "features": FeatureParams,
}
_ALIASES = {"pipeline.compare_mode": "compare_mode", "cluster.t1": "t1", "ssim.t_ssim": "t_ssim"}
# Run options that live next to the screening parameters in config files.
RUN_KEYS = {"play_rate": float, "threads": int, "input": str, "pattern": str}


def _coerce(key: str, raw: Any, default: Any) -> Any:
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if isinstance(default, bool):
            return text.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if default is None:  # optional float
            return None if text.lower() in ("", "none", "off") else float(text)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r}") from None
    return text


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}", f"expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}", "empty key")
        values[_ALIASES.get(key, key)] = value
    return values


def load_config_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(str(path), f"cannot read config file: {e}") from e
    return parse_config_text(text, str(path))


def build_params(values: Mapping[str, Any]) -> ScreenParams:
    """Build ``ScreenParams`` from flat dotted keys; unknown keys are rejected.

    Run options in ``RUN_KEYS`` are ignored here.
    """
    top: dict[str, Any] = {}
    nested: dict[str, dict[str, Any]] = {name: {} for name in _SECTIONS}
    top_fields = {f.name: f for f in dataclasses.fields(ScreenParams) if f.name not in _SECTIONS}
    defaults = ScreenParams()
    for raw_key, raw in values.items():
        key = _ALIASES.get(raw_key, raw_key)
        if key in RUN_KEYS:
            continue
        if "." in key:
            section, name = key.split(".", 1)
            cls = _SECTIONS.get(section)
            fields = {f.name: f for f in dataclasses.fields(cls)} if cls else {}
            if name not in fields:
                raise ConfigError(key, "unknown configuration key")
            default = getattr(getattr(defaults, section), name)
            nested[section][name] = _coerce(key, raw, default)
        elif key in top_fields:
            top[key] = _coerce(key, raw, getattr(defaults, key))
        else:
            raise ConfigError(key, "unknown configuration key")
    try:
        sections = {name: _SECTIONS[name](**kw) for name, kw in nested.items()}
    except ConfigError:
        raise
    except ValueError as e:
        # SsimParams messages start with the offending dotted key.
        key, _, msg = str(e).partition(" ")
        raise ConfigError(key, msg) from e
    return ScreenParams(**top, **sections)


def resolve_run_option(key: str, cli_value: Any, file_values: Mapping[str, str], default: Any) -> Any:
    if cli_value is not None:
        return cli_value
    if key in file_values:
        try:
            return RUN_KEYS[key](file_values[key])
        except ValueError:
            raise ConfigError(key, f"cannot parse {file_values[key]!r}") from None
    return default
