"""
Wideband array response models.

The response of element ``m`` at sub-carrier ``f_k`` to a plane wave arriving
from azimuth ``theta`` is

    g_m(theta) * exp(+j 2 pi f_k (p_m . u(theta)) / c),   u = (cos, sin, 0)

so the inter-element phase differences grow with frequency. Over a wide band
this angle/frequency coupling decorrelates the responses of angles that alias
onto each other at a single frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError
from .multiway import random_complex_normal

SPEED_OF_LIGHT = 299_792_458.0


def check_angle(theta) -> np.ndarray:
    """Validate azimuths against (-pi, pi] and return them as a float array."""
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)) or np.any(theta <= -np.pi) or np.any(theta > np.pi):
        raise DomainError("azimuth must lie in (-pi, pi]")
    return theta


def uniform_angle_grid(n: int, low: float = -np.pi, high: float = np.pi) -> np.ndarray:
    """``n`` equally spaced angles covering the half-open interval (low, high]."""
    if n < 1:
        raise DomainError("angle grid needs at least one point")
    if not low < high:
        raise DomainError("angle grid needs low < high")
    return low + (high - low) * np.arange(1, n + 1) / n


@dataclass(frozen=True)
class FrequencyGrid:
    """Equally spaced sub-carriers ``carrier - B/2 ... carrier + B/2``.

    A single-point grid sits at the carrier and ignores the bandwidth; it is
    the narrowband special case.
    """

    carrier_hz: float
    bandwidth_hz: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 1:
            raise DomainError("frequency grid needs at least one point")
        if not self.carrier_hz > 0:
            raise DomainError("carrier frequency must be positive")
        if self.n_points >= 2:
            if not self.bandwidth_hz > 0:
                raise DomainError("bandwidth must be positive")
            if not self.bandwidth_hz < 2 * self.carrier_hz:
                raise DomainError("bandwidth must be below twice the carrier")

    @property
    def frequencies(self) -> np.ndarray:
        if self.n_points == 1:
            return np.array([float(self.carrier_hz)])
        k = np.arange(self.n_points)
        step = self.bandwidth_hz / (self.n_points - 1)
        return self.carrier_hz - self.bandwidth_hz / 2 + k * step

    @property
    def lowest_wavelength(self) -> float:
        """Wavelength of the lowest sub-carrier (the longest wavelength)."""
        return SPEED_OF_LIGHT / float(self.frequencies[0])


@dataclass(frozen=True)
class RingArrayGeometry:
    """``n_elements`` on a circle in the X-Y plane, facing radially outward.

    ``spacing_m`` is the chord between neighbours; the radius follows as
    ``d / (2 sin(pi / N))``.
    """

    n_elements: int
    spacing_m: float

    def __post_init__(self):
        if self.n_elements < 2:
            raise DomainError("ring needs at least two elements")
        if not self.spacing_m > 0:
            raise DomainError("element spacing must be positive")

    @property
    def radius(self) -> float:
        return self.spacing_m / (2 * math.sin(math.pi / self.n_elements))

    @property
    def element_angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_elements) / self.n_elements

    @property
    def positions(self) -> np.ndarray:
        phi = self.element_angles
        return self.radius * np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], axis=1)

    @property
    def boresights(self) -> np.ndarray:
        phi = self.element_angles
        return np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], axis=1)


@dataclass(frozen=True)
class ExplicitGeometry:
    """Arbitrary element positions (meters) with per-element boresights.

    Boresights default to +x for every element; they only matter for
    directional element patterns.
    """

    positions: np.ndarray
    boresights: np.ndarray = None

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.shape[1] == 2:
            pos = np.hstack([pos, np.zeros((len(pos), 1))])
        if pos.ndim != 2 or pos.shape[1] != 3 or len(pos) < 1:
            raise DimensionError("positions must have shape (N_R, 2) or (N_R, 3)")
        if self.boresights is None:
            bs = np.tile([1.0, 0.0, 0.0], (len(pos), 1))
        else:
            bs = np.atleast_2d(np.asarray(self.boresights, dtype=float))
            if bs.shape != pos.shape:
                raise DimensionError("boresights must match positions")
            bs = bs / np.linalg.norm(bs, axis=1, keepdims=True)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "boresights", bs)

    @property
    def n_elements(self) -> int:
        return len(self.positions)


def uniform_linear_array(n_elements: int, spacing_m: float) -> ExplicitGeometry:
    """ULA along +y with element 0 at the origin (the phase reference)."""
    y = np.arange(n_elements) * spacing_m
    return ExplicitGeometry(np.stack([np.zeros(n_elements), y], axis=1))


@dataclass(frozen=True)
class ElementPattern:
    kind: str = "isotropic"
    exponent: float = 1.0

    def __post_init__(self):
        if self.kind not in ("isotropic", "patch"):
            raise DomainError(f"unknown element pattern {self.kind!r}")
        if not self.exponent >= 0:
            raise DomainError("patch exponent must be nonnegative")


def element_gain(pattern: ElementPattern, psi):
    """Real amplitude gain at angle ``psi`` off the element boresight.

    Isotropic elements return 1; patches use the clipped cosine
    ``max(0, cos psi) ** q``.
    """
    psi = np.asarray(psi, dtype=float)
    if pattern.kind == "isotropic":
        gain = np.ones_like(psi)
    else:
        gain = np.maximum(0.0, np.cos(psi)) ** pattern.exponent
    return gain if gain.ndim else float(gain)


@dataclass(frozen=True)
class PathParams:
    gamma: complex
    theta: float
    tau: float

    def __post_init__(self):
        check_angle(self.theta)
        check_delay(self.tau)


@dataclass(frozen=True)
class WidebandManifold:
    geometry: RingArrayGeometry | ExplicitGeometry
    pattern: ElementPattern
    grid: FrequencyGrid
    normalize_per_angle: bool = True

    @property
    def dims(self) -> tuple[int, int]:
        return (self.grid.n_points, self.geometry.n_elements)


@dataclass(frozen=True)
class SteeringGrid:
    """Steering tensors evaluated on an angle list, stacked on the last axis."""

    tensor: np.ndarray  # (N_F, N_R, N_theta)
    angles: np.ndarray

    def __post_init__(self):
        if self.tensor.ndim != 3:
            raise DimensionError("steering grid must be a 3-way array")
        if len(self.angles) != self.tensor.shape[2]:
            raise DimensionError("angle list does not match the steering grid")

    @property
    def dims(self) -> tuple[int, int]:
        return self.tensor.shape[:2]


def response(manifold: WidebandManifold, thetas) -> np.ndarray:
    """Steering tensors for any real azimuths, shape (N_F, N_R, len(thetas)).

    No range check; :func:`steering` and :func:`steering_grid` are the
    validated entry points.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    geom = manifold.geometry
    u = np.stack([np.cos(thetas), np.sin(thetas), np.zeros_like(thetas)], axis=1)
    path = geom.positions @ u.T  # (N_R, A) projected lever arm, meters
    cos_psi = np.clip(geom.boresights @ u.T, -1.0, 1.0)
    gain = element_gain(manifold.pattern, np.arccos(cos_psi))
    freqs = manifold.grid.frequencies
    phase = (2 * np.pi / SPEED_OF_LIGHT) * freqs[:, None, None] * path[None, :, :]
    a = gain[None, :, :] * np.exp(1j * phase)
    if manifold.normalize_per_angle:
        norms = np.sqrt(np.sum(np.abs(a) ** 2, axis=(0, 1)))
        if np.any(norms == 0):
            raise DomainError("array has no response at some angle; cannot normalize")
        a = a / norms
    return np.ascontiguousarray(a)


def steering(manifold: WidebandManifold, theta: float) -> np.ndarray:
    """Steering tensor ``a(theta)`` of shape (N_F, N_R)."""
    check_angle(theta)
    return response(manifold, [theta])[:, :, 0]


def steering_grid(manifold: WidebandManifold, angles) -> SteeringGrid:
    angles = check_angle(np.atleast_1d(angles))
    return SteeringGrid(response(manifold, angles), angles.copy())


def check_delay(tau) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    if not np.all(np.isfinite(tau)) or np.any(tau <= 0) or np.any(tau > 1):
        raise DomainError("normalized delay must lie in (0, 1]")
    return tau


def delay_steering(grid: FrequencyGrid, tau: float) -> np.ndarray:
    """Delay response ``exp(-j 2 pi k tau)`` over the sub-carrier index ``k``."""
    check_delay(tau)
    k = np.arange(grid.n_points)
    return np.exp(-2j * np.pi * k * float(tau))


def synthesize_channel(
    manifold: WidebandManifold,
    paths: Sequence[PathParams],
    noise_variance: float = 0.0,
    seed: int = 0,
) -> np.ndarray:
    """Noisy multipath snapshot ``x`` of shape (N_F, N_R).

    Each path contributes ``gamma * a(theta) * delay(tau)`` with the delay
    response broadcast over elements; the noise is i.i.d. circular complex
    Gaussian with variance ``noise_variance``, drawn from ``seed``.
    """
    if noise_variance < 0:
        raise DomainError("noise variance must be nonnegative")
    if not paths and noise_variance == 0:
        raise DomainError("need at least one path or nonzero noise")
    x = np.zeros(manifold.dims, dtype=np.complex128)
    for p in paths:
        a = steering(manifold, p.theta)
        x += complex(p.gamma) * a * delay_steering(manifold.grid, p.tau)[:, None]
    if noise_variance > 0:
        x += np.sqrt(noise_variance) * random_complex_normal(manifold.dims, seed)
    return x
