"""Prox-capable convex functions, Moreau envelopes and a closed-form catalog.

A :class:`ProxFunction` carries its value, its proximal map
``prox(gamma, x) = argmin_y f(y) + |y - x|^2 / (2 gamma)`` and its Lipschitz
constant. The conjugate prox is obtained through Moreau's decomposition
unless the entry ships a direct closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._validation import check_positive, check_vector
from .linops import LinearMap

__all__ = [
    "ProxFunction",
    "SmoothFunction",
    "conj_prox",
    "conj_prox_decomposed",
    "envelope",
    "envelope_grad",
    "soft_threshold",
    "catalog_zero_prox",
    "catalog_scaled_l1",
    "catalog_l1_deviation",
    "catalog_hinge_component",
    "catalog_hinge_sum",
    "catalog_zero",
    "catalog_quadratic_form",
]


@dataclass(frozen=True)
class ProxFunction:
    """Convex, Lipschitz continuous function with a closed-form prox.

    Attributes
    ----------
    dim : int
    lipschitz : float
        Exact Lipschitz constant; also the radius of a ball containing the
        domain of the conjugate.
    value : callable ``x -> float``
    prox : callable ``(gamma, x) -> array``
    conj_prox_closed : callable ``(sigma, x) -> array``, optional
        Direct formula for ``Prox_{(1/sigma) f*}(x / sigma)``.
    conjugate : callable ``p -> float``, optional
        ``f*(p)`` for ``p`` in the conjugate's domain.
    """

    dim: int
    lipschitz: float
    value: Callable[[np.ndarray], float]
    prox: Callable[[float, np.ndarray], np.ndarray]
    conj_prox_closed: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    conjugate: Optional[Callable[[np.ndarray], float]] = None
    name: str = field(default="ProxFunction")

    def __call__(self, x):
        return self.value(x)


@dataclass(frozen=True)
class SmoothFunction:
    """Convex differentiable function with ``grad_lipschitz``-Lipschitz gradient."""

    dim: int
    grad_lipschitz: float
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    name: str = field(default="SmoothFunction")

    def __call__(self, x):
        return self.value(x)


def conj_prox_decomposed(f: ProxFunction, sigma: float, x) -> np.ndarray:
    """``Prox_{(1/sigma) f*}(x / sigma)`` via ``(x - Prox_{sigma f}(x)) / sigma``."""
    x = check_vector(x, f.dim)
    return (x - f.prox(sigma, x)) / sigma


def conj_prox(f: ProxFunction, sigma: float, x) -> np.ndarray:
    """Prox of the scaled conjugate at ``x / sigma``.

    Uses the entry's closed form when present, otherwise Moreau's
    decomposition. The result lies in the conjugate's domain, hence has norm
    at most ``f.lipschitz``.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if f.conj_prox_closed is not None:
        return f.conj_prox_closed(sigma, check_vector(x, f.dim))
    return conj_prox_decomposed(f, sigma, x)


def envelope(f: ProxFunction, gamma: float, x) -> float:
    """Moreau envelope value ``f(p) + |x - p|^2 / (2 gamma)`` with ``p = prox(gamma, x)``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    x = check_vector(x, f.dim)
    p = f.prox(gamma, x)
    d = x - p
    return float(f.value(p) + d @ d / (2.0 * gamma))


def envelope_grad(f: ProxFunction, gamma: float, x) -> np.ndarray:
    """Gradient of the envelope, ``(x - prox(gamma, x)) / gamma``; it is ``1/gamma``-Lipschitz."""
    return conj_prox(f, gamma, x)


def soft_threshold(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def catalog_zero_prox(n: int) -> ProxFunction:
    """``f = 0`` viewed as a Lipschitz function with constant 0."""
    return ProxFunction(
        dim=n,
        lipschitz=0.0,
        value=lambda x: 0.0,
        prox=lambda gamma, x: np.array(x, dtype=float),
        conj_prox_closed=lambda sigma, x: np.zeros(n),
        conjugate=lambda p: 0.0,
        name="Zero",
    )


def catalog_scaled_l1(lam: float, n: int) -> ProxFunction:
    """``lam * |x|_1``; Lipschitz constant ``lam * sqrt(n)``, conjugate is the box indicator."""
    lam = check_positive(lam, "lambda")

    def conj_closed(sigma, x):
        return np.clip(x / sigma, -lam, lam)

    return ProxFunction(
        dim=n,
        lipschitz=lam * np.sqrt(n),
        value=lambda x: float(lam * np.sum(np.abs(x))),
        prox=lambda gamma, x: soft_threshold(x, lam * gamma),
        conj_prox_closed=conj_closed,
        conjugate=lambda p: 0.0,
        name="ScaledL1",
    )


def catalog_l1_deviation(b) -> ProxFunction:
    """``|x - b|_1``; Lipschitz constant ``sqrt(n)``, conjugate ``p -> p.b`` on ``[-1, 1]^n``."""
    b = check_vector(b, name="b").copy()
    b.setflags(write=False)
    n = b.size

    def conj_closed(sigma, x):
        return np.clip((x - b) / sigma, -1.0, 1.0)

    return ProxFunction(
        dim=n,
        lipschitz=float(np.sqrt(n)),
        value=lambda x: float(np.sum(np.abs(x - b))),
        prox=lambda gamma, x: b + soft_threshold(x - b, gamma),
        conj_prox_closed=conj_closed,
        conjugate=lambda p: float(p @ b),
        name="L1Deviation",
    )


def _hinge_prox_scalar(gamma, C, y, t):
    # prox of s -> gamma*C*max(1 - s, 0) in the margin variable s = y*t
    s = y * t
    s_new = np.where(s >= 1.0, s, np.where(s <= 1.0 - gamma * C, s + gamma * C, 1.0))
    return y * s_new


def _hinge_box(y, C):
    return (-C, 0.0) if y > 0 else (0.0, C)


def catalog_hinge_component(i: int, y_label: int, C: float, n: int) -> ProxFunction:
    """``c -> C * max(1 - c_i * y_label, 0)`` on ``R^n``; Lipschitz constant ``C``."""
    C = check_positive(C, "C")
    if not 0 <= i < n:
        raise ValueError(f"index {i} out of range for dimension {n}")
    if y_label not in (1, -1):
        raise ValueError(f"y_label must be +1 or -1, got {y_label!r}")
    lo, hi = _hinge_box(y_label, C)

    def prox(gamma, x):
        out = np.array(x, dtype=float)
        out[i] = _hinge_prox_scalar(gamma, C, y_label, out[i])
        return out

    def conj_closed(sigma, x):
        out = np.zeros(n)
        out[i] = np.clip((x[i] - y_label) / sigma, lo, hi)
        return out

    def conjugate(p):
        return float(p[i] * y_label)

    return ProxFunction(
        dim=n,
        lipschitz=C,
        value=lambda x: float(C * max(1.0 - x[i] * y_label, 0.0)),
        prox=prox,
        conj_prox_closed=conj_closed,
        conjugate=conjugate,
        name="HingeComponent",
    )


def catalog_hinge_sum(labels, C: float) -> ProxFunction:
    """Separable sum of all hinge components: ``c -> C * sum_i max(1 - c_i y_i, 0)``.

    Its envelope, gradient and conjugate prox equal the sums over the
    individual components; the Lipschitz constant is ``C * sqrt(n)``.
    """
    C = check_positive(C, "C")
    y = check_vector(labels, name="labels").copy()
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    y.setflags(write=False)
    n = y.size
    lo = np.where(y > 0, -C, 0.0)
    hi = np.where(y > 0, 0.0, C)

    return ProxFunction(
        dim=n,
        lipschitz=C * np.sqrt(n),
        value=lambda c: float(C * np.sum(np.maximum(1.0 - c * y, 0.0))),
        prox=lambda gamma, c: _hinge_prox_scalar(gamma, C, y, c),
        conj_prox_closed=lambda sigma, c: np.clip((c - y) / sigma, lo, hi),
        conjugate=lambda p: float(p @ y),
        name="HingeSum",
    )


def catalog_zero(n: int) -> SmoothFunction:
    return SmoothFunction(
        dim=n,
        grad_lipschitz=0.0,
        value=lambda x: 0.0,
        gradient=lambda x: np.zeros(n),
        name="Zero",
    )


def catalog_quadratic_form(M: LinearMap, check_trials: int = 10, seed: int = 0) -> SmoothFunction:
    """``c -> 0.5 <c, Mc>`` for a self-adjoint positive semidefinite ``M``.

    The gradient ``Mc`` is Lipschitz with constant ``||M|| = sqrt(norm_sq_bound)``.
    """
    if M.in_dim != M.out_dim:
        raise ValueError("quadratic form needs a square operator")
    rng = np.random.default_rng(seed)
    for _ in range(check_trials):
        x, y = rng.standard_normal((2, M.in_dim))
        gap = abs(float(M.forward(x) @ y) - float(x @ M.forward(y)))
        if gap > 1e-8 * (1.0 + np.linalg.norm(x) * np.linalg.norm(y)):
            raise ValueError("quadratic form needs a self-adjoint operator")

    def value(c):
        return 0.5 * float(c @ M.forward(c))

    return SmoothFunction(
        dim=M.in_dim,
        grad_lipschitz=float(np.sqrt(M.norm_sq_bound)),
        value=value,
        gradient=M.forward,
        name="QuadraticForm",
    )

