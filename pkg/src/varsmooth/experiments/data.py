"""Synthetic inputs: noise, a geometric test image, and two-class point clouds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._validation import check_positive

__all__ = ["SvmDataset", "add_gaussian_noise", "make_phantom", "make_blobs", "normalize_rms"]


@dataclass
class SvmDataset:
    points: np.ndarray
    labels: np.ndarray
    kernel_std: float = 0.5
    C: float = 100.0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim == 1:
            self.points = self.points[:, None]
        self.labels = np.asarray(self.labels, dtype=float)
        if self.points.shape[0] != self.labels.shape[0]:
            raise ValueError("points and labels differ in length")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be +1 or -1")
        check_positive(self.kernel_std, "kernel_std")
        check_positive(self.C, "C")

    def __len__(self):
        return self.labels.shape[0]


def add_gaussian_noise(image, std: float, seed: int) -> np.ndarray:
    """Add i.i.d. ``N(0, std^2)`` noise; no clipping."""
    check_positive(std, "std", allow_zero=True)
    image = np.asarray(image, dtype=float)
    if std == 0:
        return image.copy()
    rng = np.random.default_rng(seed)
    return image + std * rng.standard_normal(image.shape)


def make_phantom(size: int = 128) -> np.ndarray:
    """Piecewise-constant test image in ``[0, 1]``: a square, a disc, a triangle and bars."""
    yy, xx = np.mgrid[0:size, 0:size] / size
    img = np.full((size, size), 0.15)
    img[(xx > 0.1) & (xx < 0.45) & (yy > 0.1) & (yy < 0.45)] = 0.85
    img[(xx - 0.7) ** 2 + (yy - 0.3) ** 2 < 0.18 ** 2] = 0.55
    img[(yy > 0.6) & (yy < 0.9) & (xx > 0.1) & (xx - 0.1 < (yy - 0.6) * 1.2)] = 1.0
    for j, x0 in enumerate(np.linspace(0.55, 0.85, 4)):
        img[(yy > 0.6) & (yy < 0.9) & (xx > x0) & (xx < x0 + 0.04)] = 0.35 + 0.15 * j
    return img


def normalize_rms(points) -> np.ndarray:
    """Divide every point by ``(mean squared norm)^(1/2)`` over the whole set."""
    X = np.asarray(points, dtype=float)
    scale = np.sqrt(np.mean(np.sum(X ** 2, axis=1)))
    if scale == 0:
        return X.copy()
    return X / scale


def make_blobs(n_per_class: int, d: int, center_dist: float, std: float, seed: int,
               kernel_std: float = 0.5, C: float = 100.0) -> SvmDataset:
    """Two Gaussian clouds centred at ``+-(center_dist / 2) * (1, ..., 1)``.

    Rows are ordered class +1 first, then class -1, and normalized jointly.
    """
    if n_per_class < 1 or d < 1:
        raise ValueError("n_per_class and d must be positive")
    rng = np.random.default_rng(seed)
    center = np.full(d, center_dist / 2.0)
    pos = center + std * rng.standard_normal((n_per_class, d))
    neg = -center + std * rng.standard_normal((n_per_class, d))
    X = normalize_rms(np.vstack([pos, neg]))
    y = np.concatenate([np.ones(n_per_class), -np.ones(n_per_class)])
    return SvmDataset(X, y, kernel_std=kernel_std, C=C)
