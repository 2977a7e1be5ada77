"""
Operator design by mini-batch ADAM.

Given steering grids ``C`` (low-bandwidth system) and ``T`` (high-bandwidth
target), both of shape (N_F, N_R, N_theta), the operator ``Phi`` is fitted so
that the Gram matrix of ``Phi C`` matches the Gram matrix of ``T``:

    e[i, j] = <Phi C_i, Phi C_j> - <T_i, T_j>,      E = sum |e[i, j]|^2

The gradient returned by :func:`wirtinger_gradient` is the conjugate Wirtinger
derivative ``dE/dconj(Phi) = 2 Phi C e C^H`` (flattened form), i.e. half of
``dE/dRe + j dE/dIm``. It vanishes exactly where ``e`` does.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionError, DomainError
from .manifold import WidebandManifold, response, uniform_angle_grid
from .multiway import contract, random_complex_normal

log = logging.getLogger(__name__)


@dataclass
class OperatorTensor:
    phi: np.ndarray  # (M_F, M_R, N_F, N_R)

    def __post_init__(self):
        self.phi = np.ascontiguousarray(self.phi, dtype=np.complex128)
        if self.phi.ndim != 4:
            raise DimensionError("operator must be a 4-way array")

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return tuple(self.phi.shape)

    @classmethod
    def identity(cls, n_freq: int, n_elem: int) -> "OperatorTensor":
        eye = np.einsum("ac,bd->abcd", np.eye(n_freq), np.eye(n_elem))
        return cls(eye.astype(np.complex128))

    @classmethod
    def random(cls, n_freq: int, n_elem: int, seed: int) -> "OperatorTensor":
        return cls(random_complex_normal((n_freq, n_elem, n_freq, n_elem), seed))


@dataclass(frozen=True)
class ManifoldGridPair:
    """Target (``T``) and input (``C``) steering grids on a shared angle list."""

    target: np.ndarray  # T, high bandwidth
    inputs: np.ndarray  # C, low bandwidth
    angles: np.ndarray

    def __post_init__(self):
        if self.target.shape != self.inputs.shape:
            raise DimensionError(f"T {self.target.shape} and C {self.inputs.shape} differ")
        if self.target.ndim != 3 or self.target.shape[2] != len(self.angles):
            raise DimensionError("grids must be (N_F, N_R, N_theta) matching the angle list")

    @classmethod
    def from_manifolds(cls, manifold_low, manifold_high, angles) -> "ManifoldGridPair":
        angles = np.asarray(angles, dtype=float)
        return cls(response(manifold_high, angles), response(manifold_low, angles), angles)


@dataclass(frozen=True)
class DesignConfig:
    batches: int = 250_000  # K
    batch_size: int = 50  # S
    theta_low: float = -np.pi
    theta_high: float = np.pi
    step_size: float = 1e-3  # alpha
    beta1: float = 0.3
    beta2: float = 0.999
    epsilon: float = 1e-15
    seed: int = 0
    heldout_grid_size: int = 181
    checkpoint_every: int = 1000

    def __post_init__(self):
        if self.batches < 0:
            raise DomainError("batches must be >= 0")
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")
        if not self.theta_low < self.theta_high:
            raise DomainError("theta_low must be below theta_high")
        if not (0 <= self.beta1 <= 1 and 0 <= self.beta2 <= 1):
            raise DomainError("decay factors must lie in [0, 1]")
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if not self.step_size > 0:
            raise DomainError("step_size must be positive")
        if self.heldout_grid_size < 1 or self.checkpoint_every < 1:
            raise DomainError("heldout_grid_size and checkpoint_every must be >= 1")


@dataclass
class AdamState:
    z: np.ndarray  # momentum, complex
    v: np.ndarray  # squared-gradient accumulator, real >= 0
    k: int = 0

    @classmethod
    def zeros(cls, dims) -> "AdamState":
        return cls(np.zeros(dims, dtype=np.complex128), np.zeros(dims, dtype=float), 0)


@dataclass
class TrainingLog:
    initial_heldout_error: float | None = None
    records: list[tuple[int, float, float]] = field(default_factory=list)

    def rows(self):
        """(iteration, heldout_error, batch_error) tuples in order."""
        return list(self.records)


def _conform(phi, pair: ManifoldGridPair) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.complex128)
    if phi.ndim != 4 or phi.shape[2:] != pair.inputs.shape[:2]:
        raise DimensionError(
            f"operator dims {phi.shape} do not act on grids of dims {pair.inputs.shape[:2]}"
        )
    return phi


def _target_gram(pair: ManifoldGridPair) -> np.ndarray:
    return contract(np.conj(pair.target), pair.target, [(0, 0), (1, 1)])


def error_matrix(phi, pair: ManifoldGridPair) -> np.ndarray:
    """SCF mismatch ``e`` of shape (N_theta, N_theta)."""
    phi = _conform(phi, pair)
    mapped = contract(phi, pair.inputs, [(2, 0), (3, 1)])
    achieved = contract(np.conj(mapped), mapped, [(0, 0), (1, 1)])
    return achieved - _target_gram(pair)


def objective(phi, pair: ManifoldGridPair) -> float:
    e = error_matrix(phi, pair)
    return float(np.sum(e.real**2 + e.imag**2))


def wirtinger_gradient(phi, pair: ManifoldGridPair) -> np.ndarray:
    phi = _conform(phi, pair)
    mapped = contract(phi, pair.inputs, [(2, 0), (3, 1)])  # (M_F, M_R, S)
    e = contract(np.conj(mapped), mapped, [(0, 0), (1, 1)]) - _target_gram(pair)
    weighted = contract(mapped, e, [(2, 0)])  # (M_F, M_R, S)
    return 2.0 * contract(weighted, np.conj(pair.inputs), [(2, 2)])


def adam_step(phi, state: AdamState, grad, config: DesignConfig):
    """One ADAM update without bias correction.

    Returns the new operator and state; the inputs are left untouched.
    """
    grad = np.asarray(grad)
    if not (np.shape(phi) == grad.shape == state.z.shape == state.v.shape):
        raise DimensionError("operator, gradient and optimizer state must share dims")
    b1, b2 = config.beta1, config.beta2
    z = b1 * state.z + (1.0 - b1) * grad
    v = b2 * state.v + (1.0 - b2) * (grad.real**2 + grad.imag**2)
    w = 1.0 / np.sqrt(v + config.epsilon)
    new_phi = phi - config.step_size * z * w
    return new_phi, AdamState(z, v, state.k + 1)


def draw_angles(rng: np.random.Generator, config: DesignConfig) -> np.ndarray:
    """Uniform draws from (theta_low, theta_high]."""
    u = rng.random(config.batch_size)
    return config.theta_high - u * (config.theta_high - config.theta_low)


def heldout_angles(config: DesignConfig) -> np.ndarray:
    return uniform_angle_grid(config.heldout_grid_size, config.theta_low, config.theta_high)


ProgressSink = Callable[[tuple[int, float, float], np.ndarray], None]


def design_operator(
    manifold_low: WidebandManifold,
    manifold_high: WidebandManifold,
    config: DesignConfig,
    progress_sink: ProgressSink | None = None,
):
    """Fit the operator for ``manifold_low`` against the ``manifold_high`` target.

    The operator is initialized with standard complex normal entries drawn from
    ``config.seed``. Each of the ``config.batches`` iterations draws
    ``batch_size`` angles, evaluates both manifolds on them, and takes one ADAM
    step on the batch gradient. Every ``checkpoint_every`` iterations the
    objective on a fixed held-out grid is appended to the log together with
    the current batch objective, and ``progress_sink(record, phi)`` is called.

    Returns
    -------
    OperatorTensor, TrainingLog
    """
    if manifold_low.dims != manifold_high.dims:
        raise DimensionError(
            f"manifolds must share (N_F, N_R): {manifold_low.dims} vs {manifold_high.dims}"
        )
    n_freq, n_elem = manifold_low.dims
    phi = OperatorTensor.random(n_freq, n_elem, config.seed).phi
    state = AdamState.zeros(phi.shape)
    heldout = ManifoldGridPair.from_manifolds(manifold_low, manifold_high, heldout_angles(config))
    history = TrainingLog(initial_heldout_error=objective(phi, heldout))

    # Angle draws use a stream independent of the initialization stream.
    rng = np.random.default_rng(np.random.SeedSequence(int(config.seed) & ((1 << 64) - 1)).spawn(1)[0])
    for k in range(config.batches):
        batch = ManifoldGridPair.from_manifolds(manifold_low, manifold_high, draw_angles(rng, config))
        grad = wirtinger_gradient(phi, batch)
        phi, state = adam_step(phi, state, grad, config)
        if (k + 1) % config.checkpoint_every == 0:
            record = (k + 1, objective(phi, heldout), objective(phi, batch))
            history.records.append(record)
            log.debug("iteration %d heldout %.6g batch %.6g", *record)
            if progress_sink is not None:
                progress_sink(record, phi)
    return OperatorTensor(phi), history
