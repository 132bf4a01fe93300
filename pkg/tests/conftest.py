import numpy as np
import pytest

from qpi.network import init_params

# (criterion, passed, detail) rows collected by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"{name} {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def net1():
    return init_params(1, seed=7)


@pytest.fixture
def net2():
    return init_params(2, seed=8)


def central_diff(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


def third_diff(f, x, h):
    """Five-point central stencil for the third derivative."""
    return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h**3)


def rel_err(approx, exact):
    """Vector relative error max|a - e| / max|e|."""
    approx, exact = np.asarray(approx, dtype=float), np.asarray(exact, dtype=float)
    return float(np.max(np.abs(approx - exact)) / max(np.max(np.abs(exact)), 1e-300))


def directional_check(loss_of_flat, grad, flat, rng, n_dirs=20, eps=1e-5):
    """Worst relative error of g.d against central differences along random d."""
    worst = 0.0
    for _ in range(n_dirs):
        d = rng.standard_normal(flat.size)
        fd = (loss_of_flat(flat + eps * d) - loss_of_flat(flat - eps * d)) / (2 * eps)
        an = float(grad @ d)
        worst = max(worst, abs(fd - an) / max(abs(an), abs(fd), 1e-12))
    return worst
