"""Command-line front end.

::

    varsmooth deblur --image cam.pgm --a 1e-1 --lambda 2e-5 --iters 100 --out runs/
    varsmooth svm --data blobs.csv --C 100 --sigma 0.5 --a 1e-3 --folds 10 --iters 10000
    varsmooth solve --config problem.ini --schedule variable --a 1 --b 1 --iters 1000

Every command also reads ``--config FILE``: an INI file whose section named
after the command supplies defaults for the flags (``noise_std = 1e-3``).
Flags given on the command line win. Exit codes: 0 success, 1 runtime
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import logging
import math
import os
import shlex
import sys
from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np

from . import linops, prox
from .experiments import data as exdata
from .experiments import deblur as exdeblur
from .experiments import imageio
from .experiments import svm as exsvm
from .smoothing import CompositeProblem, Term
from .solvers import Accuracy, Constant, SolverError, Variable, VariableSmoothF, run

log = logging.getLogger("varsmooth")

OUT_ENV = "VARSMOOTH_OUT"
SCHEDULES = ("variable", "variable-smooth", "constant", "accuracy")


@dataclass(frozen=True)
class RunConfig:
    command: str
    iters: int
    seed: int
    out: str
    log_every: int = 1
    a: tuple = ()
    schedule: Optional[str] = None
    b: Optional[float] = None
    rho: Optional[float] = None
    mu: Optional[float] = None
    eps: Optional[float] = None
    config: Optional[str] = None
    image: Optional[str] = None
    phantom: bool = False
    lam: Optional[float] = None
    noise_std: Optional[float] = None
    data: Optional[str] = None
    C: Optional[float] = None
    sigma: Optional[float] = None
    folds: Optional[int] = None

    def flags(self, a=None) -> list:
        """Command-line tokens that reproduce this configuration."""
        out = [self.command]
        a_vals = self.a if a is None else (a,)
        if a_vals:
            out += ["--a", *[repr(float(v)) for v in a_vals]]
        for name, flag in _FLAG_NAMES.items():
            val = getattr(self, name)
            if name == "a" or val is None or val is False:
                continue
            if val is True:
                out.append(flag)
            else:
                out += [flag, str(val) if not isinstance(val, float) else repr(val)]
        return out


_FLAG_NAMES = {
    "iters": "--iters", "seed": "--seed", "out": "--out", "log_every": "--log-every",
    "a": "--a", "schedule": "--schedule", "b": "--b", "rho": "--rho", "mu": "--mu",
    "eps": "--eps", "config": "--config", "image": "--image", "phantom": "--phantom",
    "lam": "--lambda", "noise_std": "--noise-std", "data": "--data", "C": "--C",
    "sigma": "--sigma", "folds": "--folds",
}


def _positive(kind):
    def conv(text):
        try:
            val = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value: {text!r}")
        if not val > 0 or (kind is float and not math.isfinite(val)):
            raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
        return val
    conv.__name__ = kind.__name__
    return conv


def _nonneg_float(text):
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid float value: {text!r}")
    if not val >= 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text!r}")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varsmooth",
        description="Variable and constant Moreau-envelope smoothing solvers and experiments.")
    sub = parser.add_subparsers(dest="command", metavar="{solve,deblur,svm}")

    def common(p, iters_default):
        p.add_argument("--config", help="INI file; the section named after the command holds defaults")
        p.add_argument("--iters", type=_positive(int), default=iters_default)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None,
                       help=f"output directory (default: ${OUT_ENV} or ./runs)")
        p.add_argument("--log-every", dest="log_every", type=_positive(int), default=1,
                       help="log every j-th iteration")

    p = sub.add_parser("solve", help="solve a composite problem described in a config file")
    common(p, 1000)
    p.add_argument("--schedule", choices=SCHEDULES)
    p.add_argument("--a", type=_positive(float), nargs=1)
    p.add_argument("--b", type=_positive(float))
    p.add_argument("--rho", type=_positive(float))
    p.add_argument("--mu", type=_positive(float))
    p.add_argument("--eps", type=_positive(float))

    p = sub.add_parser("deblur", help="L1 deblurring with Haar regularization")
    common(p, 100)
    p.add_argument("--image", help="PGM or CSV image (rows/cols divisible by 16)")
    p.add_argument("--phantom", action="store_true", help="use the built-in 128x128 phantom")
    p.add_argument("--a", type=_positive(float), nargs="+", help="one value or a sweep")
    p.add_argument("--lambda", dest="lam", type=_nonneg_float, default=2e-5)
    p.add_argument("--noise-std", dest="noise_std", type=_nonneg_float, default=1e-3)

    p = sub.add_parser("svm", help="kernel SVM with k-fold cross-validation")
    common(p, 10000)
    p.add_argument("--data", help="CSV with rows label,feature1,...,featureD")
    p.add_argument("--C", type=_positive(float), default=100.0)
    p.add_argument("--sigma", type=_positive(float), default=0.5)
    p.add_argument("--a", type=_positive(float), nargs="+", help="one value or a sweep")
    p.add_argument("--folds", type=_positive(int), default=10)
    return parser


def _config_defaults(parser, sub, path, command):
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        parser.exit(2, f"varsmooth: error: cannot read config {path}: {exc.strerror}\n")
    if not cp.has_section(command):
        return {}
    actions = {a.dest: a for a in sub._actions}
    values = {}
    for key, raw in cp.items(command):
        dest = key.replace("-", "_")
        dest = "lam" if dest == "lambda" else dest
        if dest not in actions or dest in ("help", "config"):
            sub.error(f"unknown key {key!r} in section [{command}] of {path}")
        act = actions[dest]
        if isinstance(act, argparse._StoreTrueAction):
            values[dest] = cp.getboolean(command, key)
            continue
        conv = act.type or str
        try:
            if act.nargs in ("+", 1):
                values[dest] = [conv(tok) for tok in raw.replace(",", " ").split()]
            else:
                values[dest] = conv(raw)
        except argparse.ArgumentTypeError as exc:
            sub.error(f"config key {key!r}: {exc}")
        if act.choices and values[dest] not in act.choices:
            sub.error(f"config key {key!r}: invalid choice {raw!r}")
    return values


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Parse ``argv`` into a :class:`RunConfig`; exits with status 2 on usage errors."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        parser.exit(2, "varsmooth: error: a command is required\n")
    ns = parser.parse_args(argv)
    if ns.command is None:
        parser.error("a command is required")
    sub = parser._subparsers._group_actions[0].choices[ns.command]
    if ns.config:
        defaults = _config_defaults(parser, sub, ns.config, ns.command)
        if defaults:
            sub.set_defaults(**defaults)
            ns = parser.parse_args(argv)

    def need(field, flag):
        if getattr(ns, field, None) in (None, [], ()):
            sub.error(f"missing required input: {flag}")

    if ns.command == "deblur":
        if not ns.phantom:
            need("image", "--image (or --phantom)")
        need("a", "--a")
    elif ns.command == "svm":
        need("data", "--data")
        need("a", "--a")
    else:
        need("config", "--config")
        need("schedule", "--schedule")
        required = {"variable": ("a", "b"), "variable-smooth": ("b",),
                    "constant": ("mu",), "accuracy": ("eps",)}[ns.schedule]
        for name in required:
            need(name, f"--{name}")

    out = ns.out or os.environ.get(OUT_ENV) or "runs"
    kw = {f.name: getattr(ns, f.name) for f in fields(RunConfig)
          if hasattr(ns, f.name) and f.name not in ("a", "out")}
    return RunConfig(a=tuple(ns.a or ()), out=out, **kw)


# ---------------------------------------------------------------------------
# problem construction for `solve`

def _floats(text):
    return np.array([float(t) for t in text.replace(",", " ").split()])


def _vector_value(text, base_dir):
    path = os.path.join(base_dir, text)
    if os.path.isfile(path):
        return np.loadtxt(path, delimiter=",", ndmin=1).ravel()
    return _floats(text)


def _operator(sec, n, base_dir):
    kind = sec.get("op", "identity")
    if kind == "identity":
        return linops.identity(n)
    if kind == "diagonal":
        return linops.diagonal(_vector_value(sec["op_entries"], base_dir))
    if kind == "matrix":
        M = np.loadtxt(os.path.join(base_dir, sec["op_matrix"]), delimiter=",", ndmin=2)
        return linops.matrix(M)
    if kind == "blur":
        rows, cols = int(sec["rows"]), int(sec["cols"])
        return linops.make_gaussian_blur(int(sec.get("filter_size", 9)),
                                         float(sec.get("blur_std", 4.0)), rows, cols)
    if kind == "haar":
        return linops.make_haar_dwt(int(sec.get("levels", 4)), int(sec["rows"]), int(sec["cols"]))
    raise ValueError(f"unknown operator {kind!r}")


def _g_function(sec, m, base_dir):
    kind = sec["g"]
    if kind == "l1":
        return prox.catalog_scaled_l1(float(sec.get("lambda", 1.0)), m)
    if kind == "l1_deviation":
        return prox.catalog_l1_deviation(_vector_value(sec["b"], base_dir))
    if kind == "hinge":
        return prox.catalog_hinge_sum(_vector_value(sec["labels"], base_dir), float(sec["C"]))
    raise ValueError(f"unknown g function {kind!r}")


def load_problem(path):
    """Build a :class:`CompositeProblem` and ``x0`` from the INI description.

    ``[problem]`` holds ``dim``, ``f`` (``zero``, ``zero_prox``, ``l1``,
    ``quadratic``) and optionally ``x0``; each ``[term ...]`` section holds
    ``g`` (``l1``, ``l1_deviation``, ``hinge``) and ``op`` (``identity``,
    ``diagonal``, ``matrix``, ``blur``, ``haar``) with their parameters.
    Vector-valued keys take inline comma lists or CSV paths relative to the file.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    with open(path) as fh:
        cp.read_file(fh)
    base = os.path.dirname(os.path.abspath(path))
    if not cp.has_section("problem"):
        raise ValueError(f"{path}: missing [problem] section")
    pr = cp["problem"]
    n = int(pr["dim"])
    f_kind = pr.get("f", "zero")
    if f_kind == "zero":
        f = prox.catalog_zero(n)
    elif f_kind == "zero_prox":
        f = prox.catalog_zero_prox(n)
    elif f_kind == "l1":
        f = prox.catalog_scaled_l1(float(pr.get("f_lambda", 1.0)), n)
    elif f_kind == "quadratic":
        M = np.loadtxt(os.path.join(base, pr["f_matrix"]), delimiter=",", ndmin=2)
        f = prox.catalog_quadratic_form(linops.matrix(M))
    else:
        raise ValueError(f"unknown f {f_kind!r}")
    terms = []
    for name in cp.sections():
        if name.startswith("term"):
            sec = cp[name]
            op = _operator(sec, n, base)
            terms.append(Term(_g_function(sec, op.out_dim, base), op))
    x0 = _vector_value(pr["x0"], base) if "x0" in pr else np.zeros(n)
    return CompositeProblem(f, terms), x0


def schedule_of(cfg: RunConfig):
    if cfg.schedule == "variable":
        return Variable(a=cfg.a[0], b=cfg.b)
    if cfg.schedule == "variable-smooth":
        return VariableSmoothF(b=cfg.b)
    if cfg.schedule == "constant":
        return Constant(mu=cfg.mu, rho=cfg.rho)
    return Accuracy(eps=cfg.eps)


# ---------------------------------------------------------------------------
# outputs

SUMMARY_FIELDS = ("command", "a", "iters", "final_objective", "final_isnr", "cv_error", "flags")


def write_summary(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: row.get(k, "") for k in SUMMARY_FIELDS})


def emit_outputs(report, cfg: RunConfig, out_dir=None, image_shape=None, a=None,
                 write_summary_file=True) -> dict:
    """Write ``iters.csv``, ``objective.dat`` (and ``isnr.dat``, ``restored.pgm``
    for deblurring) plus a one-row ``summary.csv``; returns the summary row."""
    out_dir = out_dir or cfg.out
    os.makedirs(out_dir, exist_ok=True)
    report.to_csv(os.path.join(out_dir, "iters.csv"))
    ks = [r.k for r in report.log]
    imageio.write_two_column(os.path.join(out_dir, "objective.dat"), ks,
                             [r.objective for r in report.log])
    if report.has_isnr:
        imageio.write_two_column(os.path.join(out_dir, "isnr.dat"), ks,
                                 [r.isnr for r in report.log])
    if image_shape is not None:
        imageio.write_pgm(os.path.join(out_dir, "restored.pgm"),
                          report.final_x.reshape(image_shape))
    else:
        np.savetxt(os.path.join(out_dir, "solution.csv"), report.final_x[None, :],
                   delimiter=",", fmt="%.17g")
    row = {
        "command": cfg.command,
        "a": "" if a is None else repr(float(a)),
        "iters": report.iterations,
        "final_objective": repr(report.final_objective),
        "final_isnr": "" if report.final_isnr is None else repr(report.final_isnr),
        "flags": shlex.join(cfg.flags(a=a)),
    }
    if write_summary_file:
        write_summary(os.path.join(out_dir, "summary.csv"), [row])
    return row


def _sweep_dir(cfg, a):
    if len(cfg.a) == 1:
        return cfg.out
    return os.path.join(cfg.out, f"a_{float(a):.0e}")


def cmd_deblur(cfg: RunConfig) -> int:
    if cfg.phantom:
        image = exdata.make_phantom(128)
    else:
        image = imageio.read_image(cfg.image)
    inst = exdeblur.make_deblur_instance(image, lam=cfg.lam, noise_std=cfg.noise_std, seed=cfg.seed)
    rows = []
    for a in cfg.a:
        report = exdeblur.run_deblur(inst, a, cfg.iters, log_every=cfg.log_every)
        row = emit_outputs(report, cfg, _sweep_dir(cfg, a), image.shape, a=a,
                           write_summary_file=False)
        rows.append(row)
        log.info("a=%g  fval=%.3f  ISNR=%.3f", a, report.final_objective, report.final_isnr)
    os.makedirs(cfg.out, exist_ok=True)
    write_summary(os.path.join(cfg.out, "summary.csv"), rows)
    return 0


def cmd_svm(cfg: RunConfig) -> int:
    X, y = imageio.read_dataset_csv(cfg.data)
    ds = exdata.SvmDataset(X, y, kernel_std=cfg.sigma, C=cfg.C)
    if cfg.folds < 2 or cfg.folds > len(ds):
        raise ValueError(f"--folds must lie in [2, {len(ds)}], got {cfg.folds}")
    os.makedirs(cfg.out, exist_ok=True)
    rows = []
    for a in cfg.a:
        err = exsvm.kfold_cv(ds, cfg.folds, a, cfg.iters, seed=cfg.seed)
        rows.append({"command": "svm", "a": repr(float(a)), "iters": cfg.iters,
                     "cv_error": repr(err), "flags": shlex.join(cfg.flags(a=a))})
        log.info("a=%g  cv error=%.4f%%", a, err)
    write_summary(os.path.join(cfg.out, "summary.csv"), rows)
    with open(os.path.join(cfg.out, "cv_error.dat"), "w") as fh:
        for a, row in zip(cfg.a, rows):
            fh.write(f"{a!r} {row['cv_error']}\n")
    return 0


def cmd_solve(cfg: RunConfig) -> int:
    problem, x0 = load_problem(cfg.config)
    report = run(problem, schedule_of(cfg), x0, cfg.iters, log_every=cfg.log_every)
    emit_outputs(report, cfg, a=cfg.a[0] if cfg.a else None)
    log.info("final objective %.6g after %d iterations", report.final_objective, report.iterations)
    return 0


COMMANDS = {"deblur": cmd_deblur, "svm": cmd_svm, "solve": cmd_solve}


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    cfg = parse_args(argv)
    try:
        return COMMANDS[cfg.command](cfg)
    except OSError as exc:
        where = exc.filename or cfg.out
        print(f"varsmooth: error: {where}: {exc.strerror or exc}", file=sys.stderr)
    except (SolverError, ValueError, KeyError) as exc:
        print(f"varsmooth: error: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
