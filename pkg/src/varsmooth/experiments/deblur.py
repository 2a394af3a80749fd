"""L1 data-fit image deblurring with a Haar-wavelet L1 regularizer.

Solves ``min_x |Ax - b|_1 + lam |Wx|_1`` where ``A`` is a 9x9 Gaussian blur
(std 4, reflexive boundary) and ``W`` a 4-level Haar transform, starting
from the observed image and smoothing both terms with ``mu_k = 1/(a k)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import linops
from ..prox import catalog_l1_deviation, catalog_scaled_l1, catalog_zero
from ..smoothing import CompositeProblem, Term
from ..solvers import RunReport, VariableSmoothF, run
from .data import add_gaussian_noise

__all__ = [
    "DeblurInstance",
    "make_deblur_instance",
    "deblur_problem",
    "deblur_true_objective",
    "run_deblur",
    "isnr",
]

HAAR_LEVELS = 4


@dataclass
class DeblurInstance:
    """Original image, its blurred and noisy observation, and the regularization weight."""

    original: np.ndarray
    observed: np.ndarray
    rows: int
    cols: int
    lam: float = 2e-5
    noise_std: float = 1e-3
    seed: int = 0
    filter_size: int = 9
    blur_std: float = 4.0
    _ops: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def blur(self) -> linops.LinearMap:
        if "A" not in self._ops:
            self._ops["A"] = linops.make_gaussian_blur(self.filter_size, self.blur_std,
                                                       self.rows, self.cols)
        return self._ops["A"]

    @property
    def wavelet(self) -> linops.LinearMap:
        if "W" not in self._ops:
            self._ops["W"] = linops.make_haar_dwt(HAAR_LEVELS, self.rows, self.cols)
        return self._ops["W"]


def make_deblur_instance(image, lam=2e-5, noise_std=1e-3, seed=0, filter_size=9, blur_std=4.0):
    """Blur a 2-D image and add seeded Gaussian noise."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    rows, cols = img.shape
    q = 2 ** HAAR_LEVELS
    if rows % q or cols % q:
        raise ValueError(f"image size {rows}x{cols} must be divisible by {q}")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    inst = DeblurInstance(original=img.ravel().copy(), observed=np.empty(0), rows=rows, cols=cols,
                          lam=lam, noise_std=noise_std, seed=seed,
                          filter_size=filter_size, blur_std=blur_std)
    inst.observed = add_gaussian_noise(inst.blur.forward(inst.original), noise_std, seed)
    return inst


def deblur_problem(inst: DeblurInstance) -> CompositeProblem:
    """``f = 0`` (smooth), ``g1 = |. - b|_1`` on ``A``, ``g2 = lam |.|_1`` on ``W``."""
    n = inst.rows * inst.cols
    terms = [Term(catalog_l1_deviation(inst.observed), inst.blur)]
    if inst.lam > 0:
        terms.append(Term(catalog_scaled_l1(inst.lam, n), inst.wavelet))
    return CompositeProblem(catalog_zero(n), terms)


def deblur_true_objective(inst: DeblurInstance, x) -> float:
    x = np.asarray(x, dtype=float).ravel()
    val = float(np.sum(np.abs(inst.blur.forward(x) - inst.observed)))
    if inst.lam > 0:
        val += inst.lam * float(np.sum(np.abs(inst.wavelet.forward(x))))
    return val


def isnr(original, observed, estimate) -> float:
    """``10 log10(|x - b|^2 / |x - x_k|^2)`` in dB; ``inf`` when the estimate is exact."""
    x = np.asarray(original, dtype=float).ravel()
    num = float(np.sum((x - np.asarray(observed, dtype=float).ravel()) ** 2))
    den = float(np.sum((x - np.asarray(estimate, dtype=float).ravel()) ** 2))
    if den == 0:
        return float("inf")
    return 10.0 * np.log10(num / den)


def run_deblur(inst: DeblurInstance, a: float, iters: int = 100, log_every: int = 1,
               observer=None) -> RunReport:
    """Run the smooth-f variable smoothing scheme from ``x0 = b``, logging ISNR."""
    problem = deblur_problem(inst)
    return run(problem, VariableSmoothF(b=a), inst.observed, iters, observer,
               isnr=lambda x: isnr(inst.original, inst.observed, x), log_every=log_every)
