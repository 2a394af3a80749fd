"""Moreau-envelope smoothing and accelerated first-order solvers for
nonsmooth convex problems ``f(x) + sum_i g_i(K_i x)``."""

from .linops import (LinearMap, StackedMap, estimate_norm, identity, diagonal, make_gaussian_blur,
                     make_gram, make_haar_dwt, stack)
from .prox import (ProxFunction, SmoothFunction, conj_prox, envelope, envelope_grad)
from .smoothing import (CompositeProblem, SmoothingParams, Term, gap_bound, lipschitz_of_smoothed,
                        smoothed_gradient, smoothed_value)
from .solvers import (Accuracy, Constant, Reference, RunReport, Variable, VariableSmoothF, run,
                      theoretical_gap_bound)

__version__ = "0.1.0"
