"""
Module for experiment configurations.

Configurations are INI files read with `configparser`. The bundled presets
live in the `configs` directory of the package; keys missing from a user file
fall back to the `barrier` preset, a square barrier with the reference packets.
"""

# Import standard modules
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Tuple, Union
import configparser
import logging
import math

# Import third-party libraries
import numpy as np

# Import local modules
from .common import ConfigError
from .packets import PacketSpec, normalize
from .potential import PotentialKind, PotentialSpec, piecewise_constant, square_barrier

LOGGER = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).parent / "configs"

DEFAULT_PRESET = "barrier"


@dataclass(frozen=True)
class ExperimentConfig:
    """
    A validated experiment configuration.
    """

    name: str

    # [potential]
    kind: PotentialKind
    height: float
    radius: float
    segments: Tuple[Tuple[float, float, float], ...]

    # [packet]
    orders: Tuple[int, ...]
    width: float
    momentum: float
    position: float

    # [observation]
    left: float
    right: float
    points: int
    probe: float
    snapshot_left: float
    snapshot_right: float
    snapshot_points: int

    # [schedule]
    start: float
    stop: float
    count: int
    snapshots: Tuple[float, ...]

    # [quadrature]
    order: int
    panel_phase: float
    cutoff: float
    max_width: float
    damping: float
    depth: float

    # [grid]
    dx: float
    dt: float
    scheme: str
    oracle_times: Tuple[float, ...]

    # [tolerances]
    vanishing: float
    support: float
    budget: float
    slope: Tuple[float, ...]
    ratio: float
    oracle: float
    unitarity: float
    norm: float
    stability: float

    # [output]
    directory: Path
    workers: int

    def potential(self) -> PotentialSpec:
        if self.kind is PotentialKind.SQUARE_BARRIER:
            return square_barrier(self.height, self.radius)
        return piecewise_constant(self.segments, self.radius)

    def packet(self, m: int) -> PacketSpec:
        return normalize(m, self.width, self.momentum, self.position)

    def times(self) -> np.ndarray:
        return np.geomspace(self.start, self.stop, self.count)

    def snapshot_xs(self) -> np.ndarray:
        return np.linspace(self.snapshot_left, self.snapshot_right, self.snapshot_points)

    def observation_xs(self) -> np.ndarray:
        return np.linspace(self.left, self.right, self.points)

    def quadrature(self) -> dict:
        """
        Keyword arguments of `evolve_spectral`.
        """

        return {
            "order": self.order,
            "panel_phase": self.panel_phase,
            "cutoff": self.cutoff,
            "max_width": self.max_width,
            "damping": self.damping,
            "depth": self.depth,
            "tolerance": self.budget,
        }

    def slope_tolerance(self, m: int) -> float:
        return self.slope[min(m, len(self.slope) - 1)]


def _preset_path(name: str) -> Path:
    path = CONFIG_DIR / f"{name}.ini"
    if not path.is_file():
        raise ConfigError([f"Unknown preset `{name}`"])
    return path


class _Reader:
    """
    Typed access to a parser, collecting one message per failing field.
    """

    def __init__(self, parser: configparser.ConfigParser) -> None:
        self.parser = parser
        self.messages: List[str] = []

    def get(self, section: str, key: str, convert: Callable, check=None, problem: str = ""):
        raw = self.parser.get(section, key, fallback=None)
        if raw is None:
            self.messages.append(f"{section}.{key}: missing")
            return None
        try:
            value = convert(raw.strip())
        except (TypeError, ValueError):
            self.messages.append(f"{section}.{key}: cannot parse (got {raw.strip()!r})")
            return None
        if check is not None and not check(value):
            self.messages.append(f"{section}.{key}: {problem} (got {raw.strip()!r})")
            return None

        return value


def _floats(raw: str) -> Tuple[float, ...]:
    return tuple(float(item) for item in raw.split(",") if item.strip())


def _ints(raw: str) -> Tuple[int, ...]:
    return tuple(int(item) for item in raw.split(",") if item.strip())


def _segments(raw: str) -> Tuple[Tuple[float, float, float], ...]:
    segments = []
    for item in raw.split(","):
        if item.strip():
            left, right, value = (float(part) for part in item.split(":"))
            segments.append((left, right, value))
    return tuple(segments)


def _positive(value) -> bool:
    return math.isfinite(value) and value > 0.0


def _increasing(values) -> bool:
    return all(first < second for first, second in zip(values, values[1:]))


def parse_config(parser: configparser.ConfigParser, name: str) -> ExperimentConfig:
    """
    Validate a parsed configuration.

    Raises
    ------
    ConfigError
        With one message per failing field.
    """

    read = _Reader(parser)
    fields = {"name": name}

    kind = read.get(
        "potential", "kind", PotentialKind, problem="unknown potential kind"
    )
    fields["kind"] = kind
    fields["height"] = read.get(
        "potential", "height", float, lambda v: math.isfinite(v) and v >= 0.0,
        "must be nonnegative",
    )
    fields["radius"] = read.get("potential", "range", float, _positive, "must be positive")
    fields["segments"] = read.get(
        "potential", "segments", _segments,
        lambda v: all(value >= 0.0 and left < right for left, right, value in v),
        "needs nonnegative values on nonempty segments",
    )
    if kind is PotentialKind.PIECEWISE_CONSTANT and not fields["segments"]:
        read.messages.append("potential.segments: piecewise potential without segments")

    fields["orders"] = read.get(
        "packet", "orders", _ints, lambda v: v and all(0 <= m <= 3 for m in v),
        "orders must lie between 0 and 3",
    )
    fields["width"] = read.get("packet", "width", float, _positive, "must be positive")
    fields["momentum"] = read.get("packet", "momentum", float, math.isfinite, "must be finite")
    fields["position"] = read.get("packet", "position", float, math.isfinite, "must be finite")

    fields["left"] = read.get("observation", "left", float, math.isfinite, "must be finite")
    fields["right"] = read.get("observation", "right", float, math.isfinite, "must be finite")
    if None not in (fields["left"], fields["right"]) and not fields["left"] < fields["right"]:
        read.messages.append(
            f"observation.right: must exceed observation.left (got {fields['right']!r})"
        )
    fields["points"] = read.get(
        "observation", "points", int, lambda v: v >= 200, "needs at least 200 samples"
    )
    fields["probe"] = read.get("observation", "probe", float, math.isfinite, "must be finite")
    fields["snapshot_left"] = read.get("observation", "snapshot_left", float)
    fields["snapshot_right"] = read.get("observation", "snapshot_right", float)
    fields["snapshot_points"] = read.get(
        "observation", "snapshot_points", int, lambda v: v >= 2, "needs at least 2 samples"
    )

    fields["start"] = read.get("schedule", "start", float, _positive, "must be positive")
    fields["stop"] = read.get("schedule", "stop", float, _positive, "must be positive")
    fields["count"] = read.get("schedule", "count", int, lambda v: v >= 2, "needs at least 2")
    if None not in (fields["start"], fields["stop"]) and not fields["start"] < fields["stop"]:
        read.messages.append(
            f"schedule.stop: schedule must be strictly increasing (got {fields['stop']!r})"
        )
    fields["snapshots"] = read.get(
        "schedule", "snapshots", _floats,
        lambda v: all(t >= 0.0 for t in v) and _increasing(v),
        "must be nonnegative and strictly increasing",
    )

    fields["order"] = read.get("quadrature", "order", int, lambda v: v >= 2, "must be at least 2")
    for key in ("panel_phase", "cutoff", "max_width", "damping", "depth"):
        fields[key] = read.get("quadrature", key, float, _positive, "must be positive")

    fields["dx"] = read.get("grid", "dx", float, _positive, "must be positive")
    fields["dt"] = read.get("grid", "dt", float, _positive, "must be positive")
    fields["scheme"] = read.get(
        "grid", "scheme", str, lambda v: v in ("numerov", "standard"), "unknown scheme"
    )
    fields["oracle_times"] = read.get(
        "grid", "times", _floats, lambda v: all(t > 0.0 for t in v), "must be positive"
    )

    for key in ("vanishing", "support", "budget", "ratio", "oracle", "unitarity", "norm",
                "stability"):
        fields[key] = read.get("tolerances", key, float, _positive, "tolerances must be positive")
    fields["slope"] = read.get(
        "tolerances", "slope", _floats, lambda v: v and all(_positive(s) for s in v),
        "tolerances must be positive",
    )

    fields["directory"] = read.get("output", "directory", Path)
    fields["workers"] = read.get("output", "workers", int, lambda v: v >= 1, "must be at least 1")

    if read.messages:
        raise ConfigError(read.messages)

    config = ExperimentConfig(**fields)
    try:
        config.potential()
    except ValueError as error:
        raise ConfigError([f"potential: {error}"]) from error

    return config


def load_config(source: Optional[Union[str, Path]] = None) -> ExperimentConfig:
    """
    Load a configuration from a preset name or a file.

    Parameters
    ----------
    source : Optional[Union[str, Path]]
        A preset name (e.g. "barrier" or "free"), a path to an INI file, or
        None for the default preset.

    Returns
    -------
    ExperimentConfig
        The validated configuration.

    Raises
    ------
    ConfigError
        If the file is missing or a field fails validation.
    """

    parser = configparser.ConfigParser()
    parser.read(_preset_path(DEFAULT_PRESET), encoding="utf-8")

    if source is None:
        return parse_config(parser, DEFAULT_PRESET)

    path = Path(source)
    if path.suffix == "" and not path.exists():
        name = str(source)
        path = _preset_path(name)
    elif not path.is_file():
        raise ConfigError([f"Configuration file `{source}` not found"])
    else:
        name = path.stem

    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as error:
        raise ConfigError([f"Malformed configuration `{source}`: {error}"]) from error
    LOGGER.debug("Configuration `%s` read from %s", name, path)

    return parse_config(parser, name)


DEFAULT_CONFIG = load_config()
