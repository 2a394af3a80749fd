"""Accelerated gradient schemes on the smoothed surrogate.

One engine covers all four schemes; they differ only in how the smoothing
parameters evolve and whether ``f`` is smoothed:

=====================  ===============  ====================================
schedule               f                per-iteration parameters
=====================  ===============  ====================================
``Variable(a, b)``     Lipschitz        ``rho_k = 1/(a k)``, ``mu_k = 1/(b k)``
``Constant(mu, rho)``  Lipschitz        fixed ``rho``, ``mu``
``VariableSmoothF(b)`` smooth           ``mu_k = 1/(b k)``
``Constant(mu)``       smooth           fixed ``mu``
``Accuracy(eps)``      either           constants derived from ``eps``
=====================  ===============  ====================================
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Union

import numpy as np

from ._validation import check_positive, check_vector
from .smoothing import (
    CompositeProblem,
    SmoothingParams,
    _forward_all,
    _objectives,
    lipschitz_of_smoothed,
    smoothed_gradient,
)

__all__ = [
    "Variable",
    "VariableSmoothF",
    "Constant",
    "Accuracy",
    "Schedule",
    "SolverState",
    "IterationRecord",
    "RunReport",
    "Reference",
    "BoundConstants",
    "SolverError",
    "t_next",
    "params_at",
    "init_state",
    "step",
    "run",
    "theoretical_gap_bound",
    "epsilon_iteration_budget",
]


@dataclass(frozen=True)
class Variable:
    a: float
    b: float

    def __post_init__(self):
        check_positive(self.a, "a")
        check_positive(self.b, "b")


@dataclass(frozen=True)
class VariableSmoothF:
    b: float

    def __post_init__(self):
        check_positive(self.b, "b")


@dataclass(frozen=True)
class Constant:
    mu: float
    rho: Optional[float] = None

    def __post_init__(self):
        check_positive(self.mu, "mu")
        if self.rho is not None:
            check_positive(self.rho, "rho")


@dataclass(frozen=True)
class Accuracy:
    eps: float

    def __post_init__(self):
        check_positive(self.eps, "eps")


Schedule = Union[Variable, VariableSmoothF, Constant, Accuracy]


class SolverError(RuntimeError):
    """Raised when a run produces a non-finite value; ``report`` holds the partial log."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


def t_next(t: float) -> float:
    """``(1 + sqrt(1 + 4 t^2)) / 2``, the momentum sequence update."""
    if not t >= 1:
        raise ValueError(f"t must be >= 1, got {t}")
    return (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0


def params_at(sch: Schedule, k: int, L_f: Optional[float], L_g_sq_total: float) -> SmoothingParams:
    """Smoothing parameters for iteration ``k``.

    ``L_f=None`` means ``f`` is smooth (no ``rho``).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if isinstance(sch, Variable):
        if L_f is None:
            raise ValueError("Variable(a, b) needs a Lipschitz f; use VariableSmoothF for smooth f")
        return SmoothingParams(mu=1.0 / (sch.b * k), rho=1.0 / (sch.a * k))
    if isinstance(sch, VariableSmoothF):
        if L_f is not None:
            raise ValueError("VariableSmoothF needs a smooth f; use Variable for Lipschitz f")
        return SmoothingParams(mu=1.0 / (sch.b * k))
    if isinstance(sch, Constant):
        if (sch.rho is None) != (L_f is None):
            raise ValueError("Constant schedule: rho must be given exactly when f is Lipschitz")
        return SmoothingParams(mu=sch.mu, rho=sch.rho)
    if isinstance(sch, Accuracy):
        if L_f is None:
            return SmoothingParams(mu=sch.eps / L_g_sq_total)
        if L_f == 0:
            raise ValueError("Accuracy schedule with L_f = 0 divides by zero; "
                             "encode f = 0 as a SmoothFunction instead")
        return SmoothingParams(mu=2.0 * sch.eps / (3.0 * L_g_sq_total),
                               rho=2.0 * sch.eps / (3.0 * L_f ** 2))
    raise TypeError(f"unknown schedule {sch!r}")


@dataclass
class SolverState:
    k: int
    x_prev: np.ndarray
    x_cur: np.ndarray
    y: np.ndarray
    t: float


def init_state(x0) -> SolverState:
    x0 = np.array(x0, dtype=float)
    return SolverState(k=1, x_prev=x0.copy(), x_cur=x0.copy(), y=x0.copy(), t=1.0)


def step(p: CompositeProblem, s: SmoothingParams, st: SolverState, L: Optional[float] = None) -> SolverState:
    """One accelerated gradient step on ``F^{rho,mu}`` with step ``1/L``.

    ``L`` defaults to :func:`lipschitz_of_smoothed`.
    """
    if L is None:
        L = lipschitz_of_smoothed(p, s)
    if not L > 0:
        raise ValueError(f"step size needs a positive Lipschitz constant, got {L}")
    x_new = st.y - smoothed_gradient(p, s, st.y) / L
    t_new = t_next(st.t)
    y_new = x_new + ((st.t - 1.0) / t_new) * (x_new - st.x_cur)
    return SolverState(k=st.k + 1, x_prev=st.x_cur, x_cur=x_new, y=y_new, t=t_new)


@dataclass(frozen=True)
class BoundConstants:
    """Problem constants entering the convergence bounds."""

    dist0: float
    L_g_sq_total: float
    K_norm_sq_total: float
    L_f: Optional[float] = None
    grad_lipschitz: Optional[float] = None

    @classmethod
    def from_problem(cls, p: CompositeProblem, dist0: float) -> "BoundConstants":
        return cls(dist0=dist0, L_g_sq_total=p.L_g_sq_total, K_norm_sq_total=p.K_norm_sq_total,
                   L_f=p.L_f, grad_lipschitz=p.grad_lipschitz)


def theoretical_gap_bound(sch: Schedule, k: int, consts: BoundConstants) -> float:
    """Upper bound on ``F(x_{k+1}) - F(x*)`` after ``k`` iterations."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    c = consts
    d2 = c.dist0 ** 2
    smooth = c.L_f is None
    if isinstance(sch, Variable):
        return (2.0 * (sch.a + sch.b * c.K_norm_sq_total) / (k + 2) * d2
                + 2.0 * (1.0 + math.log(k + 1)) / (k + 2)
                * (c.L_f ** 2 / sch.a + c.L_g_sq_total / sch.b))
    if isinstance(sch, VariableSmoothF):
        lead = c.grad_lipschitz + sch.b * c.K_norm_sq_total
        return (2.0 * lead / (k + 2) * d2
                + 2.0 * (1.0 + math.log(k + 1)) / (k + 2)
                * c.L_g_sq_total * lead / (sch.b ** 2 * c.K_norm_sq_total))
    if isinstance(sch, Accuracy):
        s = params_at(sch, 1, c.L_f, c.L_g_sq_total)
        sch = Constant(mu=s.mu, rho=s.rho)
    if isinstance(sch, Constant):
        if smooth:
            L = c.grad_lipschitz + c.K_norm_sq_total / sch.mu
            tail = sch.mu * c.L_g_sq_total / 2.0
        else:
            L = 1.0 / sch.rho + c.K_norm_sq_total / sch.mu
            tail = (sch.rho * c.L_f ** 2 + sch.mu * c.L_g_sq_total) / 2.0
        return 2.0 * L * d2 / (k + 2) ** 2 + tail
    raise TypeError(f"unknown schedule {sch!r}")


def epsilon_iteration_budget(eps: float, L_f: float, L_g_sq_total: float, K_norm_sq: float,
                             dist0: float) -> int:
    """Iteration index by which the constant-smoothing run is ``eps``-optimal.

    Smallest ``k`` with ``eps/3 >= sqrt(L_f^2 + L_g^2 ||K||^2) dist0 / (k + 2)``,
    i.e. ``ceil(3 sqrt(...) dist0 / eps) - 2``.
    """
    return math.ceil(3.0 * math.sqrt(L_f ** 2 + L_g_sq_total * K_norm_sq) * dist0 / eps) - 2


@dataclass(frozen=True)
class IterationRecord:
    k: int
    objective: float
    smoothed: float
    L: float
    elapsed_ms: float
    isnr: Optional[float] = None


@dataclass(frozen=True)
class Reference:
    """Known minimizer (and optionally its value) used to audit the bounds."""

    x_star: np.ndarray
    f_star: Optional[float] = None


@dataclass
class RunReport:
    log: List[IterationRecord]
    final_x: np.ndarray
    schedule: Schedule
    iterations: int = 0
    bound_violations: int = 0
    stop_reason: str = "budget"
    final_objective: Optional[float] = None
    final_isnr: Optional[float] = None
    t_history: List[float] = field(default_factory=list, repr=False)

    @property
    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.log])

    @property
    def has_isnr(self) -> bool:
        return any(r.isnr is not None for r in self.log)

    def to_csv(self, dest=None) -> str:
        """Write ``iter,objective,smoothed,L,elapsed_ms[,isnr]`` rows; returns the text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["iter", "objective", "smoothed", "L", "elapsed_ms"]
        if self.has_isnr:
            header.append("isnr")
        w.writerow(header)
        for r in self.log:
            row = [r.k, repr(r.objective), repr(r.smoothed), repr(r.L), f"{r.elapsed_ms:.3f}"]
            if self.has_isnr:
                row.append(repr(r.isnr))
            w.writerow(row)
        text = buf.getvalue()
        if dest is not None:
            with open(dest, "w", newline="") as fh:
                fh.write(text)
        return text


def _mode_check(p: CompositeProblem, sch: Schedule):
    if isinstance(sch, VariableSmoothF) and p.K_norm_sq_total == 0:
        raise ValueError("smooth-f variable smoothing needs a nonzero operator")
    params_at(sch, 1, p.L_f, p.L_g_sq_total)


def run(p: CompositeProblem, sch: Schedule, x0, iters: int,
        observer: Optional[Callable[[int, np.ndarray, IterationRecord], None]] = None, *,
        isnr: Optional[Callable[[np.ndarray], float]] = None,
        log_every: int = 1,
        reference: Optional[Reference] = None,
        early_stop: Optional[float] = None) -> RunReport:
    """Run ``iters`` accelerated steps from ``x0``.

    Parameters
    ----------
    observer : callable, optional
        Called as ``observer(k, x_k, record)`` after each logged iteration.
    isnr : callable, optional
        Extra per-iterate metric logged in the ``isnr`` column.
    log_every : int
        Log iterations ``1, 1 + j, 1 + 2j, ...`` only.
    reference : Reference, optional
        Known optimum; every logged ``F(x_k)`` with ``k >= 2`` is checked
        against :func:`theoretical_gap_bound` and violations are counted.
    early_stop : float, optional
        Stop when the relative change of consecutive logged objectives drops
        below this threshold. Off by default.
    """
    if int(iters) < 1:
        raise ValueError(f"iters must be >= 1, got {iters}")
    if int(log_every) < 1:
        raise ValueError(f"log_every must be >= 1, got {log_every}")
    x0 = check_vector(x0, p.dim)
    _mode_check(p, sch)

    consts = f_star = None
    if reference is not None:
        x_star = check_vector(reference.x_star, p.dim)
        f_star = reference.f_star if reference.f_star is not None else p.objective(x_star)
        consts = BoundConstants.from_problem(p, float(np.linalg.norm(x0 - x_star)))

    constant = isinstance(sch, (Constant, Accuracy))
    s = params_at(sch, 1, p.L_f, p.L_g_sq_total)
    L = lipschitz_of_smoothed(p, s)

    report = RunReport(log=[], final_x=x0.copy(), schedule=sch)
    st = init_state(x0)
    start = time.perf_counter()
    prev_obj = None
    for k in range(1, int(iters) + 1):
        if not constant and k > 1:
            s = params_at(sch, k, p.L_f, p.L_g_sq_total)
            L = lipschitz_of_smoothed(p, s)
        report.t_history.append(st.t)
        st = step(p, s, st, L)
        x = st.x_cur
        report.iterations = k
        report.final_x = x
        if (k - 1) % log_every:
            continue

        true, sm = _objectives(p, s, x, _forward_all(p, x))
        rec = IterationRecord(k=k, objective=true, smoothed=sm, L=L,
                              elapsed_ms=(time.perf_counter() - start) * 1e3,
                              isnr=None if isnr is None else float(isnr(x)))
        report.log.append(rec)
        if not (np.isfinite(true) and np.isfinite(sm) and np.all(np.isfinite(x))):
            report.stop_reason = "nonfinite"
            raise SolverError(f"non-finite objective at iteration {k}", report)
        if consts is not None and k >= 2:
            bound = theoretical_gap_bound(sch, k - 1, consts)
            if true - f_star > bound + 1e-12 * max(1.0, abs(f_star)):
                report.bound_violations += 1
        if observer is not None:
            observer(k, x, rec)
        if early_stop is not None and prev_obj is not None:
            if abs(true - prev_obj) <= early_stop * max(1.0, abs(prev_obj)):
                report.stop_reason = "early_stop"
                break
        prev_obj = true

    last = report.log[-1] if report.log else None
    if last is not None and last.k == report.iterations:
        report.final_objective, report.final_isnr = last.objective, last.isnr
    else:
        report.final_objective = p.objective(report.final_x)
        report.final_isnr = None if isnr is None else float(isnr(report.final_x))
    return report

