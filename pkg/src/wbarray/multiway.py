"""
Dense complex multiway arrays.

Every tensor in the package (channel snapshots, steering grids, the operator,
gradients and optimizer state) is a C-ordered ``complex128`` numpy array. Axis
meaning is fixed by convention at each call site, e.g. the operator is always
``(out_freq, out_elem, in_freq, in_elem)``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError

# Contracted extents above this are summed blockwise, then the block partials
# are reduced with numpy's pairwise summation.
PAIRWISE_THRESHOLD = 2**15

_SEED_MASK = (1 << 64) - 1


def as_multiarray(data, dims: Sequence[int] | None = None) -> np.ndarray:
    """Coerce ``data`` to a C-contiguous complex128 array and validate it.

    Parameters
    ----------
    data : array_like
        Values. A flat sequence is reshaped to ``dims`` when given.
    dims : sequence of int, optional
        Expected axis extents (all positive).
    """
    arr = np.ascontiguousarray(data, dtype=np.complex128)
    if dims is not None:
        dims = tuple(int(d) for d in dims)
        if any(d <= 0 for d in dims):
            raise DimensionError(f"axis extents must be positive, got {dims}")
        if arr.size != int(np.prod(dims)):
            raise DimensionError(f"{arr.size} values cannot fill dims {dims}")
        arr = arr.reshape(dims)
    if not np.all(np.isfinite(arr)):
        raise DomainError("multiway array contains NaN or Inf")
    return arr


def contract(a, b, pairs: Sequence[tuple[int, int]] = ()) -> np.ndarray:
    """Sum products of ``a`` and ``b`` over paired axes.

    The result carries the unpaired axes of ``a`` (in order) followed by the
    unpaired axes of ``b``. With no pairs this is the outer product.

    >>> contract([1, 1j], [1, -1j], [(0, 0)])
    array(2.+0.j)
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    axes_a = [int(p[0]) for p in pairs]
    axes_b = [int(p[1]) for p in pairs]
    for ia, ib in zip(axes_a, axes_b):
        if not (-a.ndim <= ia < a.ndim and -b.ndim <= ib < b.ndim):
            raise DimensionError(f"axis pair ({ia}, {ib}) out of range")
        if a.shape[ia] != b.shape[ib]:
            raise DimensionError(
                f"extent mismatch on pair ({ia}, {ib}): {a.shape[ia]} != {b.shape[ib]}"
            )
    axes_a = [ax % a.ndim for ax in axes_a]
    axes_b = [ax % b.ndim for ax in axes_b]
    if len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise DimensionError("an axis appears in more than one pair")

    summed = int(np.prod([a.shape[ax] for ax in axes_a])) if pairs else 1
    if summed <= PAIRWISE_THRESHOLD:
        return np.tensordot(a, b, axes=(axes_a, axes_b))

    # Flatten the paired axes to a single trailing/leading axis and sum in blocks.
    free_a = [ax for ax in range(a.ndim) if ax not in axes_a]
    free_b = [ax for ax in range(b.ndim) if ax not in axes_b]
    a2 = np.transpose(a, free_a + axes_a).reshape(-1, summed)
    b2 = np.transpose(b, axes_b + free_b).reshape(summed, -1)
    partials = [
        a2[:, s:s + PAIRWISE_THRESHOLD] @ b2[s:s + PAIRWISE_THRESHOLD]
        for s in range(0, summed, PAIRWISE_THRESHOLD)
    ]
    out = np.sum(np.stack(partials), axis=0)
    shape = [a.shape[ax] for ax in free_a] + [b.shape[ax] for ax in free_b]
    return out.reshape(shape)


def conj(a) -> np.ndarray:
    return np.conj(np.asarray(a, dtype=np.complex128))


def frobenius_norm(a) -> float:
    a = np.asarray(a, dtype=np.complex128)
    return float(np.sqrt(np.sum(a.real**2 + a.imag**2)))


def random_complex_normal(dims: Sequence[int], seed: int) -> np.ndarray:
    """Standard circularly-symmetric complex normal samples.

    Real and imaginary parts are independent with variance 1/2 each, so
    ``E|x|^2 = 1``. Any integer seed is accepted; it is reduced modulo 2**64.
    """
    dims = tuple(int(d) for d in dims)
    if any(d <= 0 for d in dims):
        raise DimensionError(f"axis extents must be positive, got {dims}")
    rng = np.random.default_rng(int(seed) & _SEED_MASK)
    parts = rng.standard_normal((2,) + dims)
    return np.ascontiguousarray((parts[0] + 1j * parts[1]) / np.sqrt(2.0))
