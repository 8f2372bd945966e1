"""Matching configuration: feature weights, sensitivities and thresholds.

The on-disk format is plain ``key = value`` text; keys mirror the parameter
table below. Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import ParseError

FEATURES = ("spatial", "shape", "color", "rotation", "scale", "texture")


@dataclass(frozen=True)
class Weights:
    """Relevance of each feature group in the overall similarity.

    Must be nonnegative and sum to 1.
    """

    spatial: float = 0.30
    shape: float = 0.30
    color: float = 0.11
    rotation: float = 0.11
    scale: float = 0.11
    texture: float = 0.07

    def __post_init__(self):
        vals = self.as_dict()
        if any(v < 0.0 for v in vals.values()):
            raise ValueError(f"weights must be nonnegative: {vals}")
        total = sum(vals.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {total!r}")

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in FEATURES}

    @staticmethod
    def uniform() -> "Weights":
        return Weights(*(1.0 / 6.0,) * 6)


# Default (fx, fy) sensitivity pairs per feature. Angular distances are in
# degrees, color in RGB euclidean units, shape in 1 - similarity, scale is a
# dimensionless ratio gap, texture in standardized units.
DEFAULT_SENSITIVITIES: dict[str, tuple[float, float]] = {
    "spatial": (90.0, 0.40),
    "shape": (0.005, 0.20),
    "color": (110.0, 0.40),
    "rotation": (90.0, 0.40),
    "scale": (0.50, 0.40),
    "texture": (110.0, 0.40),
}


@dataclass(frozen=True)
class SensitivityConfig:
    """Smoothing sensitivities plus the matcher's pruning thresholds."""

    sensitivities: dict[str, tuple[float, float]] = field(
        default_factory=lambda: dict(DEFAULT_SENSITIVITIES)
    )
    fourier_descriptors_threshold: float = 0.98
    circular_symmetry_threshold: float = 0.99
    spatial_similarity_threshold: float = 0.30
    symmetry_maxima_threshold: float = 0.10
    global_similarity_threshold: float = 0.70
    # Optional per-component texture standard deviations; when None they are
    # computed from the target image's regions.
    texture_stds: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in FEATURES:
            fx, fy = self.sensitivities[name]
            if not (fx > 0.0):
                raise ValueError(f"{name} sensitivity fx must be positive, got {fx}")
            if not (0.0 < fy < 1.0):
                raise ValueError(f"{name} sensitivity fy must be in (0,1), got {fy}")
        for label in (
            "fourier_descriptors_threshold",
            "circular_symmetry_threshold",
            "spatial_similarity_threshold",
            "symmetry_maxima_threshold",
            "global_similarity_threshold",
        ):
            v = getattr(self, label)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{label} must be in [0,1], got {v}")

    def fx(self, feature: str) -> float:
        return self.sensitivities[feature][0]

    def fy(self, feature: str) -> float:
        return self.sensitivities[feature][1]

    def with_threshold(self, value: float) -> "SensitivityConfig":
        return replace(self, global_similarity_threshold=value)


_THRESHOLD_KEYS = (
    "fourier_descriptors_threshold",
    "circular_symmetry_threshold",
    "spatial_similarity_threshold",
    "symmetry_maxima_threshold",
    "global_similarity_threshold",
)


def parse_config_text(text: str) -> tuple[Weights, SensitivityConfig]:
    """Parse ``key = value`` configuration text; missing keys keep defaults."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        try:
            values[key] = float(val.strip())
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric value {val.strip()!r}")

    weight_kwargs = {}
    sensitivities = dict(DEFAULT_SENSITIVITIES)
    threshold_kwargs = {}
    for key, val in values.items():
        feature, _, rest = key.partition("_similarity_")
        if feature in FEATURES and rest == "weight":
            weight_kwargs[feature] = val
        elif feature in FEATURES and rest == "sensitivity_fx":
            sensitivities[feature] = (val, sensitivities[feature][1])
        elif feature in FEATURES and rest == "sensitivity_fy":
            sensitivities[feature] = (sensitivities[feature][0], val)
        elif key in _THRESHOLD_KEYS:
            threshold_kwargs[key] = val
        else:
            raise ParseError(f"unknown configuration key {key!r}")

    try:
        weights = Weights(**weight_kwargs) if weight_kwargs else Weights()
        cfg = SensitivityConfig(sensitivities=sensitivities, **threshold_kwargs)
    except ValueError as exc:
        raise ParseError(str(exc))
    return weights, cfg


def load_config(path: Union[str, Path]) -> tuple[Weights, SensitivityConfig]:
    return parse_config_text(Path(path).read_text())


def config_text(weights: Weights, cfg: SensitivityConfig) -> str:
    """Render a configuration back to the key = value format."""
    lines = []
    for key in _THRESHOLD_KEYS:
        if key == "global_similarity_threshold":
            continue
        lines.append(f"{key} = {getattr(cfg, key)}")
    for name in FEATURES:
        fx, fy = cfg.sensitivities[name]
        lines.append(f"{name}_similarity_weight = {getattr(weights, name)}")
        lines.append(f"{name}_similarity_sensitivity_fx = {fx}")
        lines.append(f"{name}_similarity_sensitivity_fy = {fy}")
    lines.append(f"global_similarity_threshold = {cfg.global_similarity_threshold}")
    return "\n".join(lines) + "\n"
