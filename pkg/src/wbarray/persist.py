"""
File formats.

Tensor files (``.wbt``) are little-endian::

    offset  size       field
    0       4          magic b"WBT1"
    4       4          version, uint32 (currently 1)
    8       1          ndim, uint8
    9       8 * ndim   dims, uint64 each
    ...     16 * prod  payload: (re, im) float64 pairs, row-major

Run configurations are flat ``key = value`` text files with ``#`` comments.
"""

from __future__ import annotations

import csv
import json
import math
import re
import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .correlation import CorrMap, ScfMap
from .design import DesignConfig
from .errors import (
    ConfigError,
    DimensionError,
    DimsOverflowError,
    MagicError,
    TruncatedError,
    VersionError,
    WbArrayError,
)
from .manifold import (
    ElementPattern,
    FrequencyGrid,
    RingArrayGeometry,
    SteeringGrid,
    WidebandManifold,
)

MAGIC = b"WBT1"
VERSION = 1
_HEADER = struct.Struct("<4sIB")
_MAX_ELEMENTS = 2**63 // 16


def encode_tensor(a) -> bytes:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 0 or a.ndim > 255:
        raise DimensionError("tensor files hold 1 to 255 axes")
    header = _HEADER.pack(MAGIC, VERSION, a.ndim) + struct.pack(f"<{a.ndim}Q", *a.shape)
    return header + np.ascontiguousarray(a, dtype="<c16").tobytes()


def decode_tensor(raw: bytes) -> np.ndarray:
    if len(raw) < _HEADER.size:
        raise TruncatedError("file shorter than the tensor header")
    magic, version, ndim = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise MagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise VersionError(f"unsupported tensor file version {version}")
    if ndim == 0:
        raise DimsOverflowError("tensor file declares zero axes")
    offset = _HEADER.size + 8 * ndim
    if len(raw) < offset:
        raise TruncatedError("file ends inside the dims table")
    dims = struct.unpack_from(f"<{ndim}Q", raw, _HEADER.size)
    count = 1
    for d in dims:
        if d == 0:
            raise DimsOverflowError("zero-length axis in tensor file")
        count *= d
        if count > _MAX_ELEMENTS:
            raise DimsOverflowError(f"dims {dims} overflow the addressable payload")
    expected = offset + 16 * count
    if len(raw) < expected:
        raise TruncatedError(f"payload has {len(raw) - offset} bytes, need {16 * count}")
    if len(raw) > expected:
        raise TruncatedError(f"{len(raw) - expected} unexpected trailing bytes")
    data = np.frombuffer(raw, dtype="<c16", count=count, offset=offset)
    return data.astype(np.complex128).reshape(dims)


def write_tensor(path, a) -> None:
    Path(path).write_bytes(encode_tensor(a))


def read_tensor(path) -> np.ndarray:
    return decode_tensor(Path(path).read_bytes())


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_map_csv(path, map_) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        out = csv.writer(fh, lineterminator="\n")
        values = np.asarray(map_.values)
        if isinstance(map_, ScfMap):
            out.writerow(["theta1", "theta2", "re", "im", "abs"])
            for i, t1 in enumerate(map_.angles):
                for j, t2 in enumerate(map_.angles):
                    v = values[i, j]
                    out.writerow([_fmt(t1), _fmt(t2), _fmt(v.real), _fmt(v.imag), _fmt(abs(v))])
        elif isinstance(map_, CorrMap):
            out.writerow(["theta", "re", "im", "abs"])
            for t, v in zip(map_.angles, values):
                out.writerow([_fmt(t), _fmt(v.real), _fmt(v.imag), _fmt(abs(v))])
        else:
            raise TypeError(f"cannot write {type(map_).__name__} as a map")


def read_map_csv(path, tau: float = float("nan")):
    """Load a map written by :func:`write_map_csv`.

    ScfMap files are recognized from their header; the angle grid is rebuilt
    from the first column in file order.
    """
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise WbArrayError(f"{path}: empty map file")
    header, body = rows[0], rows[1:]
    try:
        return _map_from_rows(header, body, tau)
    except ValueError as exc:
        raise WbArrayError(f"{path}: malformed map file ({exc})") from None


def _map_from_rows(header, body, tau):
    if header == ["theta", "re", "im", "abs"]:
        arr = np.array(body, dtype=float).reshape(-1, 4)
        return CorrMap(arr[:, 0], tau, arr[:, 1] + 1j * arr[:, 2])
    if header == ["theta1", "theta2", "re", "im", "abs"]:
        arr = np.array(body, dtype=float).reshape(-1, 5)
        n = math.isqrt(len(arr))
        if n * n != len(arr):
            raise DimensionError(f"{len(arr)} rows is not a square map")
        angles = arr[::n, 0]
        values = (arr[:, 2] + 1j * arr[:, 3]).reshape(n, n)
        diag = np.diag(values)
        return ScfMap(angles, values, bool(np.allclose(diag, 1.0)))
    raise WbArrayError(f"unrecognized map header {header}")


def write_training_log(path, history) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["iteration", "heldout_error", "batch_error"])
        for k, held, batch in history.records:
            out.writerow([k, _fmt(held), _fmt(batch)])


# --------------------------------------------------------------------------
# run configuration

@dataclass(frozen=True)
class RunConfig:
    """Everything needed to rebuild both manifolds and run the design."""

    carrier_hz: float
    bandwidth_low_hz: float
    bandwidth_high_hz: float
    n_frequencies: int
    n_elements: int
    spacing_wavelengths: float
    pattern: str
    pattern_exponent: float
    normalize: bool
    n_angles: int
    design: DesignConfig

    @property
    def grid_low(self) -> FrequencyGrid:
        return FrequencyGrid(self.carrier_hz, self.bandwidth_low_hz, self.n_frequencies)

    @property
    def grid_high(self) -> FrequencyGrid:
        return FrequencyGrid(self.carrier_hz, self.bandwidth_high_hz, self.n_frequencies)

    @property
    def geometry(self) -> RingArrayGeometry:
        # Spacing is in wavelengths of the lowest sub-carrier of the field system.
        spacing = self.spacing_wavelengths * self.grid_low.lowest_wavelength
        return RingArrayGeometry(self.n_elements, spacing)

    @property
    def element_pattern(self) -> ElementPattern:
        return ElementPattern(self.pattern, self.pattern_exponent)

    def manifold(self, band: str = "low") -> WidebandManifold:
        grid = {"low": self.grid_low, "high": self.grid_high}[band]
        return WidebandManifold(self.geometry, self.element_pattern, grid, self.normalize)


def _parse_float(text: str) -> float:
    """Float literal, or a multiple/fraction of pi such as ``-pi``, ``pi/4``."""
    m = re.fullmatch(r"([+-]?)\s*(\d*\.?\d*(?:[eE][+-]?\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?", text)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        scale = float(m.group(2)) if m.group(2) else 1.0
        div = float(m.group(3)) if m.group(3) else 1.0
        return sign * scale * math.pi / div
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("not finite")
    return value


def _parse_int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError("not an integer")
    return int(value)


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError("not a boolean")


# key -> (parser, default or None when required, validity check, description)
_KEYS = {
    "carrier_hz": (_parse_float, None, lambda v: v > 0, "> 0"),
    "bandwidth_low_hz": (_parse_float, None, lambda v: v > 0, "> 0"),
    "bandwidth_high_hz": (_parse_float, None, lambda v: v > 0, "> 0"),
    "n_frequencies": (_parse_int, None, lambda v: v >= 2, ">= 2"),
    "n_elements": (_parse_int, None, lambda v: v >= 2, ">= 2"),
    "spacing_wavelengths": (_parse_float, None, lambda v: v > 0, "> 0"),
    "pattern": (str, None, lambda v: v in ("isotropic", "patch"), "isotropic or patch"),
    "pattern_exponent": (_parse_float, 1.0, lambda v: v >= 0, ">= 0"),
    "normalize": (_parse_bool, True, lambda v: True, ""),
    "n_angles": (_parse_int, 720, lambda v: v >= 1, ">= 1"),
    "batches": (_parse_int, None, lambda v: v >= 0, ">= 0"),
    "batch_size": (_parse_int, None, lambda v: v >= 1, ">= 1"),
    "theta_low": (_parse_float, None, lambda v: -math.pi <= v <= math.pi, "in [-pi, pi]"),
    "theta_high": (_parse_float, None, lambda v: -math.pi <= v <= math.pi, "in [-pi, pi]"),
    "step_size": (_parse_float, None, lambda v: v > 0, "> 0"),
    "beta1": (_parse_float, None, lambda v: 0 <= v <= 1, "in [0, 1]"),
    "beta2": (_parse_float, None, lambda v: 0 <= v <= 1, "in [0, 1]"),
    "epsilon": (_parse_float, None, lambda v: v > 0, "> 0"),
    "seed": (_parse_int, 0, lambda v: True, ""),
    "heldout_grid_size": (_parse_int, 181, lambda v: v >= 1, ">= 1"),
    "checkpoint_every": (_parse_int, 1000, lambda v: v >= 1, ">= 1"),
}


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}", key)
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}", key)
        raw[key] = value

    values = {}
    for key, (parse, default, valid, desc) in _KEYS.items():
        if key not in raw:
            if default is None:
                raise ConfigError(f"{source}: missing required key {key!r}", key)
            values[key] = default
            continue
        try:
            value = parse(raw[key])
        except ValueError:
            raise ConfigError(f"{source}: {key}: cannot parse {raw[key]!r}", key) from None
        if not valid(value):
            raise ConfigError(f"{source}: {key} = {raw[key]} out of range (must be {desc})", key)
        values[key] = value

    if not values["theta_low"] < values["theta_high"]:
        raise ConfigError(f"{source}: theta_low must be below theta_high", "theta_low")
    for key in ("bandwidth_low_hz", "bandwidth_high_hz"):
        if not values[key] < 2 * values["carrier_hz"]:
            raise ConfigError(f"{source}: {key} must be below twice carrier_hz", key)

    design = DesignConfig(
        batches=values.pop("batches"),
        batch_size=values.pop("batch_size"),
        theta_low=values.pop("theta_low"),
        theta_high=values.pop("theta_high"),
        step_size=values.pop("step_size"),
        beta1=values.pop("beta1"),
        beta2=values.pop("beta2"),
        epsilon=values.pop("epsilon"),
        seed=values.pop("seed"),
        heldout_grid_size=values.pop("heldout_grid_size"),
        checkpoint_every=values.pop("checkpoint_every"),
    )
    return RunConfig(design=design, **values)


def parse_config(path) -> RunConfig:
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), str(path))


def format_config(cfg: RunConfig) -> str:
    """Render ``cfg`` back into the ``key = value`` format."""
    flat = {k: v for k, v in asdict(cfg).items() if k != "design"}
    flat.update(asdict(cfg.design))
    lines = []
    for key in _KEYS:
        value = flat[key]
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# steering grids with a JSON sidecar

def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_steering_grid(path, grid: SteeringGrid, cfg: RunConfig, band: str) -> None:
    write_tensor(path, grid.tensor)
    meta = {
        "band": band,
        "angles": [float(a) for a in grid.angles],
        "config": format_config(cfg),
    }
    sidecar_path(path).write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")


def read_steering_grid(path):
    """Return ``(SteeringGrid, WidebandManifold)`` for a file from ``write_steering_grid``."""
    tensor = read_tensor(path)
    meta = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
    cfg = parse_config_text(meta["config"], str(sidecar_path(path)))
    grid = SteeringGrid(tensor, np.asarray(meta["angles"], dtype=float))
    return grid, cfg.manifold(meta["band"])
