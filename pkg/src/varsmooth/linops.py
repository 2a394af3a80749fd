"""Linear operators with forward/adjoint application and a norm bound.

Every operator acts on flat 1-D float arrays; images are row-major
flattenings of ``rows x cols`` arrays.
"""

from __future__ import annotations

import warnings
from typing import NamedTuple, Sequence

import numpy as np

from ._validation import check_positive, check_vector

__all__ = [
    "LinearMap",
    "StackedMap",
    "NormEstimate",
    "identity",
    "diagonal",
    "matrix",
    "gaussian_kernel",
    "make_gaussian_blur",
    "make_haar_dwt",
    "make_gram",
    "estimate_norm",
    "stack",
]


class LinearMap:
    """A bounded linear map ``K: R^in_dim -> R^out_dim``.

    Parameters
    ----------
    in_dim, out_dim : int
        Domain and codomain dimensions.
    forward, adjoint : callable
        ``forward(x)`` computes ``Kx`` and ``adjoint(y)`` computes ``K* y``.
    norm_sq_bound : float
        Upper bound on ``||K||^2``.
    name : str, optional
        Label used in ``repr``.
    self_adjoint : bool
        Whether ``forward`` and ``adjoint`` are the same map.
    """

    def __init__(self, in_dim, out_dim, forward, adjoint, norm_sq_bound,
                 name="LinearMap", self_adjoint=False):
        if int(in_dim) < 1 or int(out_dim) < 1:
            raise ValueError("in_dim and out_dim must be positive integers")
        if not norm_sq_bound >= 0:
            raise ValueError(f"norm_sq_bound must be nonnegative, got {norm_sq_bound}")
        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)
        self._forward = forward
        self._adjoint = adjoint
        self.norm_sq_bound = float(norm_sq_bound)
        self.name = name
        self.self_adjoint = bool(self_adjoint)

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.in_dim,):
            raise ValueError(f"{self.name}: expected input of shape ({self.in_dim},), got {x.shape}")
        return self._forward(x)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.out_dim,):
            raise ValueError(f"{self.name}: expected input of shape ({self.out_dim},), got {y.shape}")
        return self._adjoint(y)

    __call__ = forward

    @property
    def shape(self) -> tuple[int, int]:
        return (self.out_dim, self.in_dim)

    def with_norm_sq_bound(self, bound: float) -> "LinearMap":
        """Return a copy of this map carrying a different norm bound."""
        return LinearMap(self.in_dim, self.out_dim, self._forward, self._adjoint,
                         bound, name=self.name, self_adjoint=self.self_adjoint)

    def to_dense(self) -> np.ndarray:
        eye = np.eye(self.in_dim)
        return np.column_stack([self.forward(e) for e in eye])

    def __repr__(self):
        return (f"{self.name}(in_dim={self.in_dim}, out_dim={self.out_dim}, "
                f"norm_sq_bound={self.norm_sq_bound:.6g})")


class StackedMap(LinearMap):
    """Vertical concatenation ``Kx = (K_1 x, ..., K_m x)`` of maps sharing a domain."""

    def __init__(self, parts: Sequence[LinearMap]):
        parts = tuple(parts)
        if not parts:
            raise ValueError("stack requires at least one operator")
        in_dim = parts[0].in_dim
        for op in parts[1:]:
            if op.in_dim != in_dim:
                raise ValueError(
                    f"all stacked operators must share in_dim={in_dim}, got {op.in_dim}")
        self.parts = parts
        self.offsets = np.cumsum([0] + [op.out_dim for op in parts])
        super().__init__(
            in_dim,
            int(self.offsets[-1]),
            self._stacked_forward,
            self._stacked_adjoint,
            sum(op.norm_sq_bound for op in parts),
            name="StackedMap",
        )

    def split(self, y: np.ndarray) -> list[np.ndarray]:
        """Cut a codomain vector into the per-part slices."""
        return [y[lo:hi] for lo, hi in zip(self.offsets[:-1], self.offsets[1:])]

    def _stacked_forward(self, x):
        return np.concatenate([op.forward(x) for op in self.parts])

    def _stacked_adjoint(self, y):
        out = np.zeros(self.in_dim)
        for op, yi in zip(self.parts, self.split(y)):
            out += op.adjoint(yi)
        return out


def identity(n: int) -> LinearMap:
    return LinearMap(n, n, np.copy, np.copy, 1.0, name="Identity", self_adjoint=True)


def diagonal(entries) -> LinearMap:
    d = check_vector(entries, name="entries").copy()
    return LinearMap(d.size, d.size, lambda x: d * x, lambda y: d * y,
                     float(np.max(d ** 2)), name="Diagonal", self_adjoint=True)


def matrix(M, norm_sq_bound=None) -> LinearMap:
    """Wrap a dense 2-D array. The bound defaults to the exact ``||M||_2^2``."""
    M = np.array(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("matrix operator needs a 2-D array")
    if norm_sq_bound is None:
        norm_sq_bound = float(np.linalg.norm(M, 2) ** 2)
    sym = M.shape[0] == M.shape[1] and np.array_equal(M, M.T)
    return LinearMap(M.shape[1], M.shape[0], lambda x: M @ x, lambda y: M.T @ y,
                     norm_sq_bound, name="Matrix", self_adjoint=sym)


def gaussian_kernel(filter_size: int, std: float) -> np.ndarray:
    """Truncated 2-D Gaussian filter normalized to unit sum (``fspecial`` style)."""
    if int(filter_size) != filter_size or filter_size < 1 or filter_size % 2 == 0:
        raise ValueError(f"filter_size must be an odd positive integer, got {filter_size}")
    check_positive(std, "std")
    r = (filter_size - 1) // 2
    i = np.arange(-r, r + 1, dtype=float)
    h = np.exp(-(i[:, None] ** 2 + i[None, :] ** 2) / (2.0 * std ** 2))
    return h / h.sum()


def _blur_axis(img, taps, axis):
    # half-sample symmetric extension: d c b a | a b c d | d c b a
    r = (taps.size - 1) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (r, r)
    ext = np.pad(img, pad, mode="symmetric")
    n = img.shape[axis]
    out = np.zeros_like(img)
    for j, w in enumerate(taps):
        if axis == 0:
            out += w * ext[j:j + n, :]
        else:
            out += w * ext[:, j:j + n]
    return out


def make_gaussian_blur(filter_size: int, std: float, rows: int, cols: int) -> LinearMap:
    """Gaussian blur with reflexive boundary conditions.

    The truncated Gaussian is separable, so the 2-D convolution is applied as
    two 1-D passes. With a symmetric kernel and half-sample symmetric padding
    the resulting matrix is symmetric, so ``adjoint`` is ``forward``.
    """
    h2 = gaussian_kernel(filter_size, std)
    if filter_size > min(rows, cols):
        raise ValueError(f"filter_size={filter_size} exceeds image size {rows}x{cols}")
    r = (filter_size - 1) // 2
    i = np.arange(-r, r + 1, dtype=float)
    taps = np.exp(-i ** 2 / (2.0 * std ** 2))
    taps /= taps.sum()

    def apply(x):
        img = x.reshape(rows, cols)
        return _blur_axis(_blur_axis(img, taps, 0), taps, 1).ravel()

    op = LinearMap(rows * cols, rows * cols, apply, apply, 1.0,
                   name="GaussianBlur", self_adjoint=True)
    op.kernel = h2
    return op


_S = 1.0 / np.sqrt(2.0)


def _haar_step(a, axis):
    a = np.moveaxis(a, axis, 0)
    lo = (a[0::2] + a[1::2]) * _S
    hi = (a[0::2] - a[1::2]) * _S
    return np.moveaxis(np.concatenate([lo, hi]), 0, axis)


def _haar_step_inv(c, axis):
    c = np.moveaxis(c, axis, 0)
    h = c.shape[0] // 2
    lo, hi = c[:h], c[h:]
    out = np.empty_like(c)
    out[0::2] = (lo + hi) * _S
    out[1::2] = (lo - hi) * _S
    return np.moveaxis(out, 0, axis)


def make_haar_dwt(levels: int, rows: int, cols: int) -> LinearMap:
    """Orthonormal 2-D Haar transform with Mallat-style recursion.

    Coefficients are stored in place: after each level the approximation band
    occupies the top-left ``rows/2^l x cols/2^l`` block.
    """
    levels = int(levels)
    if levels < 1:
        raise ValueError("levels must be a positive integer")
    q = 2 ** levels
    if rows % q or cols % q:
        raise ValueError(f"image size {rows}x{cols} not divisible by 2^{levels}={q}")

    def fwd(x):
        c = x.reshape(rows, cols).copy()
        r, s = rows, cols
        for _ in range(levels):
            block = _haar_step(_haar_step(c[:r, :s], 0), 1)
            c[:r, :s] = block
            r, s = r // 2, s // 2
        return c.ravel()

    def inv(y):
        c = y.reshape(rows, cols).copy()
        for lev in reversed(range(levels)):
            r, s = rows >> lev, cols >> lev
            c[:r, :s] = _haar_step_inv(_haar_step_inv(c[:r, :s], 1), 0)
        return c.ravel()

    return LinearMap(rows * cols, rows * cols, fwd, inv, 1.0, name="HaarDWT")


def make_gram(kernel_std: float, points, seed: int = 0) -> LinearMap:
    """Dense Gaussian-kernel Gram matrix ``K_ij = exp(-|X_i - X_j|^2 / (2 sigma^2))``."""
    check_positive(kernel_std, "kernel_std")
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("make_gram needs a nonempty list of points")
    G = gaussian_gram(X, X, kernel_std)
    # exact symmetry so forward == adjoint bitwise
    G = 0.5 * (G + G.T)
    op = LinearMap(G.shape[0], G.shape[0], lambda c: G @ c, lambda c: G @ c, 0.0,
                   name="Gram", self_adjoint=True)
    op.matrix = G
    # power iteration approaches from below; pad so the value stays an upper bound
    op.norm_sq_bound = estimate_norm(op, tol=1e-12, max_iter=5000, seed=seed) * (1.0 + 1e-9)
    return op


def gaussian_gram(X, Y, kernel_std):
    sq = (np.sum(X ** 2, axis=1)[:, None] + np.sum(Y ** 2, axis=1)[None, :]
          - 2.0 * X @ Y.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-sq / (2.0 * kernel_std ** 2))


class NormEstimate(NamedTuple):
    value: float
    converged: bool
    n_iter: int


def estimate_norm(op: LinearMap, tol: float = 1e-6, max_iter: int = 1000, seed: int = 0,
                  return_info: bool = False):
    """Estimate ``||K||^2`` by power iteration on ``K* K``.

    Non-convergence within ``max_iter`` emits a ``RuntimeWarning`` and the
    best estimate is returned; pass ``return_info=True`` to receive a
    :class:`NormEstimate` carrying the convergence flag instead of a float.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.in_dim)
    x /= np.linalg.norm(x)
    lam = 0.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        Kx = op.forward(x)
        # Rayleigh quotient of K*K at a unit vector
        new = float(Kx @ Kx)
        z = op.adjoint(Kx)
        zn = float(np.linalg.norm(z))
        if zn == 0.0:
            lam, converged = 0.0, True
            break
        x = z / zn
        if abs(new - lam) <= tol * new:
            lam, converged = max(new, lam), True
            break
        lam = max(new, lam)
    if not converged:
        warnings.warn(f"power iteration did not converge in {max_iter} iterations",
                      RuntimeWarning, stacklevel=2)
    if return_info:
        return NormEstimate(lam, converged, it)
    return lam


def stack(ops: Sequence[LinearMap]) -> StackedMap:
    return StackedMap(ops)


def adjoint_mismatch(op: LinearMap, rng: np.random.Generator) -> float:
    """Relative defect ``|<Kx, y> - <x, K*y>| / (1 + |x||y|)`` on one random pair."""
    x = rng.standard_normal(op.in_dim)
    y = rng.standard_normal(op.out_dim)
    lhs = float(op.forward(x) @ y)
    rhs = float(x @ op.adjoint(y))
    return abs(lhs - rhs) / (1.0 + np.linalg.norm(x) * np.linalg.norm(y))

