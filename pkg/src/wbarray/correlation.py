"""
Spatial correlation functions, correlation functions, and side-lobe metrics.

Functions that need steering tensors accept either a :class:`WidebandManifold`
together with an angle list, or a precomputed :class:`SteeringGrid` (as loaded
from disk by the CLI).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError
from .manifold import SteeringGrid, WidebandManifold, check_delay, steering_grid, uniform_angle_grid
from .multiway import contract

DEFAULT_GRID_SIZE = 720
DEFAULT_HALFWIDTH = np.deg2rad(5.0)
# Reported when nothing at all lies outside the main lobe.
PSL_FLOOR_DB = -400.0


def default_angle_grid(n: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    return uniform_angle_grid(n)


@dataclass(frozen=True)
class ScfMap:
    angles: np.ndarray
    values: np.ndarray  # (N_theta, N_theta), row i = first angle
    normalized: bool


@dataclass(frozen=True)
class CorrMap:
    angles: np.ndarray
    tau: float
    values: np.ndarray


def _grid(source, angles) -> SteeringGrid:
    if isinstance(source, SteeringGrid):
        if angles is not None and not np.array_equal(np.asarray(angles), source.angles):
            raise DimensionError("angle list differs from the precomputed steering grid")
        return source
    if isinstance(source, WidebandManifold):
        if angles is None:
            angles = default_angle_grid()
        return steering_grid(source, angles)
    raise TypeError(f"expected WidebandManifold or SteeringGrid, got {type(source).__name__}")


def _check_operator(phi, in_dims) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.complex128)
    if phi.ndim != 4:
        raise DimensionError(f"operator must be 4-way, got {phi.ndim} axes")
    if tuple(phi.shape[2:]) != tuple(in_dims):
        raise DimensionError(f"operator input dims {phi.shape[2:]} != data dims {tuple(in_dims)}")
    return phi


def apply_operator(phi, s) -> np.ndarray:
    """Map ``s`` of shape (N_F, N_R, ...) to (M_F, M_R, ...).

    Trailing axes of ``s`` (e.g. an angle axis) are carried through, so a whole
    steering grid can be transformed in one call.
    """
    s = np.asarray(s, dtype=np.complex128)
    if s.ndim < 2:
        raise DimensionError("samples need a frequency and an element axis")
    phi = _check_operator(phi, s.shape[:2])
    return contract(phi, s, [(2, 0), (3, 1)])


def _gram(a, normalize: bool) -> np.ndarray:
    z = contract(np.conj(a), a, [(0, 0), (1, 1)])
    z = 0.5 * (z + z.conj().T)
    if normalize:
        diag = np.real(np.diag(z))
        if np.any(diag <= 0):
            raise DomainError("cannot normalize a correlation map with a zero response")
        scale = 1.0 / np.sqrt(diag)
        z = z * scale[:, None] * scale[None, :]
        np.fill_diagonal(z, 1.0)
    return z


def scf(source, angles=None, normalize: bool = True) -> ScfMap:
    """Spatial correlation ``zeta[i, j] = <a(theta_i), a(theta_j)>``.

    The inner product conjugates its first argument. With ``normalize`` the map
    is scaled to correlation-coefficient form (unit diagonal).
    """
    grid = _grid(source, angles)
    return ScfMap(grid.angles, _gram(grid.tensor, normalize), normalize)


def effective_scf(source, phi, angles=None, normalize: bool = True) -> ScfMap:
    """SCF of the composite system 'operator applied to the array output'."""
    grid = _grid(source, angles)
    transformed = apply_operator(phi, grid.tensor)
    return ScfMap(grid.angles, _gram(transformed, normalize), normalize)


def _delay(n_freq: int, tau: float) -> np.ndarray:
    check_delay(tau)
    return np.exp(-2j * np.pi * np.arange(n_freq) * float(tau))


def correlation_function(x, source, angles=None, tau: float = 0.3) -> CorrMap:
    """``C[i] = <x, a(theta_i) * delay(tau)>`` for a snapshot ``x`` (N_F, N_R)."""
    grid = _grid(source, angles)
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != tuple(grid.dims):
        raise DimensionError(f"snapshot dims {x.shape} != manifold dims {tuple(grid.dims)}")
    atoms = grid.tensor * _delay(grid.dims[0], tau)[:, None, None]
    values = contract(np.conj(x), atoms, [(0, 0), (1, 1)])
    return CorrMap(grid.angles, float(tau), values)


def correlation_function_with_operator(x, phi, source, angles=None, tau: float = 0.3) -> CorrMap:
    """Correlation function after passing both snapshot and atoms through ``phi``."""
    grid = _grid(source, angles)
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != tuple(grid.dims):
        raise DimensionError(f"snapshot dims {x.shape} != manifold dims {tuple(grid.dims)}")
    atoms = grid.tensor * _delay(grid.dims[0], tau)[:, None, None]
    fx = apply_operator(phi, x)
    fa = apply_operator(phi, atoms)
    values = contract(np.conj(fx), fa, [(0, 0), (1, 1)])
    return CorrMap(grid.angles, float(tau), values)


def _angular_distance(a, b) -> np.ndarray:
    return np.abs(np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b)))))


def _row_psl(angles, mags, halfwidth) -> float:
    peak = int(np.argmax(mags))
    if mags[peak] <= 0:
        raise DomainError("correlation map is identically zero")
    outside = _angular_distance(angles, angles[peak]) > halfwidth
    if not np.any(outside):
        raise DomainError("main-lobe exclusion covers the whole angle grid")
    side = np.max(mags[outside])
    if side <= 0:
        return PSL_FLOOR_DB
    return max(20.0 * np.log10(side / mags[peak]), PSL_FLOOR_DB)


def peak_sidelobe_level(map_, mainlobe_halfwidth: float = DEFAULT_HALFWIDTH) -> float:
    """Peak side-lobe level in dB.

    Everything within ``mainlobe_halfwidth`` (radians, circular distance) of
    the global peak counts as main lobe. For an :class:`ScfMap` each row is
    treated as a correlation curve and the worst (highest) row is reported.
    """
    if not mainlobe_halfwidth > 0:
        raise DomainError("main-lobe halfwidth must be positive")
    angles = np.asarray(map_.angles, dtype=float)
    mags = np.abs(np.asarray(map_.values))
    if isinstance(map_, ScfMap):
        return max(_row_psl(angles, row, mainlobe_halfwidth) for row in mags)
    return _row_psl(angles, mags, mainlobe_halfwidth)
