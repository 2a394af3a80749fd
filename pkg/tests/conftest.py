import numpy as np
import pytest

from varsmooth import prox


def catalog_functions(n=5, seed=0):
    """One instance of every catalog ProxFunction on small dimensions."""
    rng = np.random.default_rng(seed)
    labels = rng.choice([-1.0, 1.0], size=n)
    return [
        prox.catalog_zero_prox(n),
        prox.catalog_scaled_l1(0.7, n),
        prox.catalog_l1_deviation(rng.standard_normal(n)),
        prox.catalog_hinge_component(2, 1, 3.0, n),
        prox.catalog_hinge_component(0, -1, 0.5, n),
        prox.catalog_hinge_sum(labels, 2.0),
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=range(6), ids=lambda i: catalog_functions()[i].name + str(i))
def catalog_fn(request):
    return catalog_functions()[request.param]


def random_composite(rng, n=20, smooth=None):
    """A random composite problem on R^n mixing catalog functions and dense operators."""
    from varsmooth import linops
    from varsmooth.smoothing import CompositeProblem, Term

    if smooth is None:
        smooth = bool(rng.integers(2))
    if smooth:
        B = rng.standard_normal((n, n)) / np.sqrt(n)
        f = prox.catalog_quadratic_form(linops.matrix(B @ B.T)) if rng.integers(2) else prox.catalog_zero(n)
    else:
        f = [prox.catalog_scaled_l1(rng.uniform(0.1, 2), n),
             prox.catalog_l1_deviation(rng.standard_normal(n)),
             prox.catalog_zero_prox(n)][rng.integers(3)]
    terms = []
    for _ in range(rng.integers(1, 4)):
        m = int(rng.integers(3, 15))
        K = linops.matrix(rng.standard_normal((m, n)) / np.sqrt(n))
        g = [prox.catalog_scaled_l1(rng.uniform(0.1, 2), m),
             prox.catalog_l1_deviation(rng.standard_normal(m)),
             prox.catalog_hinge_sum(rng.choice([-1.0, 1.0], size=m), rng.uniform(0.5, 3)),
             prox.catalog_hinge_component(int(rng.integers(m)), 1, 2.0, m)][rng.integers(4)]
        terms.append(Term(g, K))
    return CompositeProblem(f, terms)


def random_params(rng, problem):
    from varsmooth.smoothing import LIPSCHITZ, SmoothingParams

    mu = 10 ** rng.uniform(-2, 1)
    rho = 10 ** rng.uniform(-2, 1) if problem.mode == LIPSCHITZ else None
    return SmoothingParams(mu=mu, rho=rho)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
