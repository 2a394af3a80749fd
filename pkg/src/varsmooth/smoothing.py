"""Composite problems ``f(x) + sum_i g_i(K_i x)`` and their Moreau-smoothed surrogates.

With smoothing parameters ``(rho, mu)`` the surrogate is

    F^{rho,mu}(x) = env_rho f(x) + sum_i env_mu g_i(K_i x)

(``f`` itself replaces its envelope when ``f`` is smooth). The surrogate
underestimates ``F`` by at most :func:`gap_bound` and has a gradient that is
Lipschitz with constant :func:`lipschitz_of_smoothed`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ._validation import check_vector
from .linops import LinearMap, stack
from .prox import ProxFunction, SmoothFunction, conj_prox, envelope

__all__ = [
    "Term",
    "CompositeProblem",
    "SmoothingParams",
    "smoothed_value",
    "smoothed_gradient",
    "lipschitz_of_smoothed",
    "gap_bound",
    "separable_sum",
    "stacked_form",
]

LIPSCHITZ = "lipschitz"
SMOOTH = "smooth"


@dataclass(frozen=True)
class Term:
    g: ProxFunction
    op: LinearMap


class CompositeProblem:
    """The objective ``F(x) = f(x) + sum_i g_i(K_i x)``.

    Parameters
    ----------
    f_term : ProxFunction or SmoothFunction
        A :class:`ProxFunction` selects Lipschitz mode (``f`` gets smoothed
        with parameter ``rho``); a :class:`SmoothFunction` selects smooth mode.
    terms : sequence of ``(g, K)`` pairs or :class:`Term`
    """

    def __init__(self, f_term: Union[ProxFunction, SmoothFunction], terms: Sequence):
        if isinstance(f_term, SmoothFunction):
            self.mode = SMOOTH
        elif isinstance(f_term, ProxFunction):
            self.mode = LIPSCHITZ
        else:
            raise TypeError(f"f_term must be a ProxFunction or SmoothFunction, got {type(f_term)!r}")
        self.f = f_term
        self.dim = f_term.dim
        terms = [t if isinstance(t, Term) else Term(*t) for t in terms]
        if not terms:
            raise ValueError("a composite problem needs at least one (g, K) term")
        for t in terms:
            if t.op.in_dim != self.dim:
                raise ValueError(f"operator {t.op!r} does not act on dimension {self.dim}")
            if t.op.out_dim != t.g.dim:
                raise ValueError(f"operator {t.op!r} maps into dimension {t.op.out_dim}, "
                                 f"but g has dimension {t.g.dim}")
            if not (np.isfinite(t.g.lipschitz) and t.g.lipschitz > 0):
                raise ValueError(f"g terms need a finite positive Lipschitz constant, got {t.g.lipschitz}")
        self.terms = tuple(terms)

    @property
    def L_f(self) -> Optional[float]:
        return self.f.lipschitz if self.mode == LIPSCHITZ else None

    @property
    def grad_lipschitz(self) -> Optional[float]:
        return self.f.grad_lipschitz if self.mode == SMOOTH else None

    @property
    def L_g_sq_total(self) -> float:
        return float(sum(t.g.lipschitz ** 2 for t in self.terms))

    @property
    def K_norm_sq_total(self) -> float:
        return float(sum(t.op.norm_sq_bound for t in self.terms))

    def objective(self, x) -> float:
        """The nonsmooth objective ``F(x)``."""
        x = check_vector(x, self.dim)
        return _objectives(self, None, x)[0]

    def __repr__(self):
        return f"CompositeProblem(mode={self.mode!r}, dim={self.dim}, terms={len(self.terms)})"


@dataclass(frozen=True)
class SmoothingParams:
    mu: float
    rho: Optional[float] = None

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.rho is not None and not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")


def _check_params(p: CompositeProblem, s: SmoothingParams):
    if p.mode == LIPSCHITZ and s.rho is None:
        raise ValueError("rho is required when f is a Lipschitz (nonsmooth) term")
    if p.mode == SMOOTH and s.rho is not None:
        raise ValueError("rho must be absent when f is smooth")


def _forward_all(p, x):
    # terms sharing one operator object share one forward application
    cache = {}
    out = []
    for t in p.terms:
        key = id(t.op)
        if key not in cache:
            cache[key] = t.op.forward(x)
        out.append(cache[key])
    return out


def _objectives(p, s, x, Kx=None):
    """Return ``(F(x), F^{rho,mu}(x))``; the second is None when ``s`` is None."""
    if Kx is None:
        Kx = _forward_all(p, x)
    true = float(p.f.value(x)) + sum(float(t.g.value(y)) for t, y in zip(p.terms, Kx))
    if s is None:
        return true, None
    if p.mode == LIPSCHITZ:
        sm = envelope(p.f, s.rho, x)
    else:
        sm = float(p.f.value(x))
    sm += sum(envelope(t.g, s.mu, y) for t, y in zip(p.terms, Kx))
    return true, sm


def smoothed_value(p: CompositeProblem, s: SmoothingParams, x) -> float:
    _check_params(p, s)
    x = check_vector(x, p.dim)
    return _objectives(p, s, x)[1]


def smoothed_gradient(p: CompositeProblem, s: SmoothingParams, x) -> np.ndarray:
    """``grad F^{rho,mu}(x) = Prox_{f*/rho}(x/rho) + sum_i K_i* Prox_{g_i*/mu}(K_i x/mu)``."""
    _check_params(p, s)
    x = check_vector(x, p.dim)
    if p.mode == LIPSCHITZ:
        grad = np.array(conj_prox(p.f, s.rho, x), dtype=float)
    else:
        grad = np.array(p.f.gradient(x), dtype=float)
    # sum dual points per shared operator, then apply each adjoint once
    duals = {}
    for t, y in zip(p.terms, _forward_all(p, x)):
        q = conj_prox(t.g, s.mu, y)
        key = id(t.op)
        if key in duals:
            duals[key][1] += q
        else:
            duals[key] = [t.op, np.array(q, dtype=float)]
    for op, q in duals.values():
        grad += op.adjoint(q)
    return grad


def lipschitz_of_smoothed(p: CompositeProblem, s: SmoothingParams) -> float:
    """``1/rho + sum ||K_i||^2 / mu``, or ``L_grad_f + sum ||K_i||^2 / mu`` in smooth mode."""
    _check_params(p, s)
    head = 1.0 / s.rho if p.mode == LIPSCHITZ else p.grad_lipschitz
    return float(head + p.K_norm_sq_total / s.mu)


def gap_bound(p: CompositeProblem, s: SmoothingParams) -> float:
    """Largest possible ``F(x) - F^{rho,mu}(x)``: ``rho L_f^2/2 + mu sum L_gi^2/2``."""
    _check_params(p, s)
    gap = s.mu * p.L_g_sq_total / 2.0
    if p.mode == LIPSCHITZ:
        gap += s.rho * p.L_f ** 2 / 2.0
    return float(gap)


def separable_sum(gs: Sequence[ProxFunction]) -> ProxFunction:
    """``g(y_1, ..., y_m) = sum_i g_i(y_i)`` on the product space.

    Prox and conjugate prox act blockwise; the Lipschitz constant is
    ``sqrt(sum L_i^2)``.
    """
    gs = tuple(gs)
    offsets = np.cumsum([0] + [g.dim for g in gs])
    blocks = list(zip(offsets[:-1], offsets[1:]))

    def value(y):
        return float(sum(g.value(y[lo:hi]) for g, (lo, hi) in zip(gs, blocks)))

    def prox(gamma, y):
        return np.concatenate([g.prox(gamma, y[lo:hi]) for g, (lo, hi) in zip(gs, blocks)])

    def conj_closed(sigma, y):
        return np.concatenate([conj_prox(g, sigma, y[lo:hi]) for g, (lo, hi) in zip(gs, blocks)])

    return ProxFunction(
        dim=int(offsets[-1]),
        lipschitz=float(np.sqrt(sum(g.lipschitz ** 2 for g in gs))),
        value=value,
        prox=prox,
        conj_prox_closed=conj_closed,
        name="SeparableSum",
    )


def stacked_form(p: CompositeProblem) -> CompositeProblem:
    """Rewrite the problem with a single term ``g(Kx)`` over the product space."""
    g = separable_sum([t.g for t in p.terms])
    K = stack([t.op for t in p.terms])
    return CompositeProblem(p.f, [Term(g, K)])
