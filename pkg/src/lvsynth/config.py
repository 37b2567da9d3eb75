"""Generation config parsing and manifest serialization."""
from __future__ import annotations

import json
import logging
import numbers
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError

logger = logging.getLogger(__name__)

_REQUIRED = ("input_image", "input_mask", "output_dir", "longitudinal_ratio",
             "radial_ratio", "torsions_deg", "torsion_centers")
_OPTIONAL = ("target_volume_ratio", "boundary_falloff_voxels")


@dataclass(frozen=True)
class GenerationConfig:
    input_image: Path
    input_mask: Path
    output_dir: Path
    longitudinal_ratio: float
    radial_ratio: float | str
    torsions_deg: tuple
    torsion_centers: tuple
    target_volume_ratio: float | None = None
    boundary_falloff_voxels: int = 0

    @property
    def auto_radial(self):
        return self.radial_ratio == "auto"

    def sweep_plan(self):
        """``(sample_id, torsion_deg, torsion_center)`` tuples, torsion-major."""
        return [
            (sample_id(t, c), t, c)
            for t in self.torsions_deg
            for c in self.torsion_centers
        ]


def sample_id(torsion_deg, center):
    return f"t{torsion_deg:.4f}_c{center:.4f}"


def _number(raw, key):
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigError(key, f"expected a number, got {value!r}")
    return float(value)


def _ratio(raw, key):
    value = _number(raw, key)
    if not 0 < value <= 2:
        raise ConfigError(key, f"must lie in (0, 2], got {value}")
    return value


def _number_list(raw, key, lo, hi):
    values = raw[key]
    if not isinstance(values, list) or not values:
        raise ConfigError(key, "expected a non-empty list")
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, numbers.Real):
            raise ConfigError(key, f"expected numbers, got {v!r}")
        if not lo <= v <= hi:
            raise ConfigError(key, f"value {v} outside [{lo}, {hi}]")
        out.append(float(v))
    return tuple(out)


def _path(raw, key, base_dir):
    value = raw[key]
    if not isinstance(value, str) or not value:
        raise ConfigError(key, "expected a non-empty path string")
    path = Path(value)
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    return path


def parse_config(raw, base_dir=None):
    """Validate a decoded JSON mapping. Relative paths resolve against ``base_dir``."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    for key in raw:
        if key not in _REQUIRED and key not in _OPTIONAL:
            raise ConfigError(key, "unknown key")
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(key, "required key missing")

    radial = raw["radial_ratio"]
    target = None
    if radial == "auto":
        if "target_volume_ratio" not in raw:
            raise ConfigError("target_volume_ratio", 'required when radial_ratio is "auto"')
        target = _ratio(raw, "target_volume_ratio")
    else:
        radial = _ratio(raw, "radial_ratio")
        if "target_volume_ratio" in raw:
            logger.warning("target_volume_ratio is ignored unless radial_ratio is \"auto\"")

    falloff = raw.get("boundary_falloff_voxels", 0)
    if isinstance(falloff, bool) or not isinstance(falloff, int) or falloff < 0:
        raise ConfigError("boundary_falloff_voxels", f"expected an integer >= 0, got {falloff!r}")

    cfg = GenerationConfig(
        input_image=_path(raw, "input_image", base_dir),
        input_mask=_path(raw, "input_mask", base_dir),
        output_dir=_path(raw, "output_dir", base_dir),
        longitudinal_ratio=_ratio(raw, "longitudinal_ratio"),
        radial_ratio=radial,
        torsions_deg=_number_list(raw, "torsions_deg", 0.0, 90.0),
        torsion_centers=_number_list(raw, "torsion_centers", 0.0, 1.0),
        target_volume_ratio=target,
        boundary_falloff_voxels=falloff,
    )
    ids = [sid for sid, _, _ in cfg.sweep_plan()]
    if len(set(ids)) != len(ids):
        raise ConfigError("torsions_deg", "sweep contains duplicate sample ids")
    return cfg


def read_config(text, base_dir=None):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from exc
    return parse_config(raw, base_dir)


def load_config(path):
    path = Path(path)
    return read_config(path.read_text(), base_dir=path.parent)


def default_config_text():
    """The bundled default sweep: 12 torsions over 0-35 degrees x 5 centers."""
    return resources.files("lvsynth").joinpath("data/default_config.json").read_text()


def write_manifest(entries):
    """One JSON object per line, in the order given."""
    return "".join(json.dumps(entry) + "\n" for entry in entries)


def read_manifest(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]
