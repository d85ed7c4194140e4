"""Dense grid primitives shared by every pipeline stage.

Grids are plain row-major float64 ndarrays. Per-pixel reductions accumulate
in a fixed ascending order, so results are bit-stable across worker counts.
"""

from __future__ import annotations

import numpy as np

DTYPE = np.float64


def as_grid(a, ndim: int | None = None, name: str = "input") -> np.ndarray:
    out = np.asarray(a, dtype=DTYPE)
    if ndim is not None and out.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {out.shape}")
    return out


def require_finite(a: np.ndarray, name: str = "input") -> None:
    if not np.isfinite(a).all():
        idx = tuple(int(i) for i in np.argwhere(~np.isfinite(a))[0])
        raise ValueError(f"{name} has a non-finite value at index {idx}")


def softmax_along_planes(volume: np.ndarray) -> np.ndarray:
    """Per-pixel softmax over axis 0 of a (planes, H, W) grid.

    Stabilized by max subtraction; every per-pixel slice sums to 1.
    """
    v = as_grid(volume, 3, "softmax input")
    require_finite(v, "softmax input")
    shifted = v - v.max(axis=0, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=0, keepdims=True)


def _upsample2x_axis(a: np.ndarray, axis: int) -> np.ndarray:
    """Double one axis: half-pixel sample centers with edge clamping.

    Output sample 2k sits a quarter cell left of input cell k, sample 2k+1 a
    quarter cell right, so each output is 0.75/0.25 blend of neighbors.
    """
    n = a.shape[axis]
    idx = np.arange(n)
    lo = np.take(a, np.maximum(idx - 1, 0), axis=axis)
    hi = np.take(a, np.minimum(idx + 1, n - 1), axis=axis)
    even = 0.75 * a + 0.25 * lo
    odd = 0.75 * a + 0.25 * hi
    shape = list(a.shape)
    shape[axis] = 2 * n
    out = np.empty(shape, dtype=a.dtype)
    sel = [slice(None)] * a.ndim
    sel[axis] = slice(0, None, 2)
    out[tuple(sel)] = even
    sel[axis] = slice(1, None, 2)
    out[tuple(sel)] = odd
    return out


def bilinear_upsample2x(grid: np.ndarray) -> np.ndarray:
    """Upsample an (H, W) map to (2H, 2W) with half-pixel-center bilinear weights."""
    g = as_grid(grid, 2, "upsample input")
    return _upsample2x_axis(_upsample2x_axis(g, 0), 1)


def trilinear_upsample2x(volume: np.ndarray) -> np.ndarray:
    """Double the trailing (planes, H, W) axes of a 3D or 4D grid."""
    v = as_grid(volume, None, "upsample input")
    if v.ndim not in (3, 4):
        raise ValueError(f"expected 3D or 4D volume, got shape {v.shape}")
    for axis in (-3, -2, -1):
        v = _upsample2x_axis(v, axis)
    return v


def avgpool_volume(volume: np.ndarray, factor: int = 2) -> np.ndarray:
    """Mean-pool the trailing (planes, H, W) axes jointly by `factor`.

    Pooling covers the plane axis as well as space so plane counts stay
    aligned across scales.
    """
    v = as_grid(volume, None, "pool input")
    if v.ndim not in (3, 4):
        raise ValueError(f"expected 3D or 4D volume, got shape {v.shape}")
    n, h, w = v.shape[-3:]
    if n % factor or h % factor or w % factor:
        raise ValueError(
            f"avgpool needs (planes, H, W) divisible by {factor}, got {(n, h, w)}; "
            "pad the volume first"
        )
    lead = v.shape[:-3]
    blocks = v.reshape(lead + (n // factor, factor, h // factor, factor, w // factor, factor))
    return blocks.mean(axis=(-5, -3, -1))


def box_smooth_axis(a: np.ndarray, axis: int, radius: int) -> np.ndarray:
    """Edge-clamped box mean along one axis.

    Built from shifted gathers accumulated in a fixed order, which keeps the
    result translation-stable and independent of any row chunking.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return a.copy()
    n = a.shape[axis]
    idx = np.arange(n)
    acc = np.zeros_like(a)
    for off in range(-radius, radius + 1):
        acc += np.take(a, np.clip(idx + off, 0, n - 1), axis=axis)
    return acc / (2 * radius + 1)


def weighted_smooth_axis(a: np.ndarray, axis: int, weights) -> np.ndarray:
    """Edge-clamped correlation with a centered odd-length kernel along one axis."""
    weights = np.asarray(weights, dtype=DTYPE)
    if weights.ndim != 1 or weights.size % 2 == 0:
        raise ValueError("kernel must be 1D with odd length")
    radius = weights.size // 2
    n = a.shape[axis]
    idx = np.arange(n)
    acc = np.zeros_like(a)
    for k, off in enumerate(range(-radius, radius + 1)):
        acc += weights[k] * np.take(a, np.clip(idx + off, 0, n - 1), axis=axis)
    return acc
