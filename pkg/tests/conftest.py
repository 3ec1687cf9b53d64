import numpy as np
import pytest

from respars import generators as gen


@pytest.fixture
def triangle():
    return gen.complete(3)


@pytest.fixture
def p3():
    return gen.path(3)


@pytest.fixture
def rng():
    return np.random.default_rng(20081)


def dense_laplacian(g):
    """Brute-force Laplacian from the edge list, independent of the sparse builder."""
    L = np.zeros((g.n, g.n))
    for u, v, w in g.edges:
        L[u, u] += w
        L[v, v] += w
        L[u, v] -= w
        L[v, u] -= w
    return L


def pinv_resistance(g, u, v):
    """Effective resistance via numpy's SVD pseudoinverse."""
    x = np.zeros(g.n)
    x[u], x[v] = 1.0, -1.0
    return float(x @ np.linalg.pinv(dense_laplacian(g)) @ x)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    def _record(criterion: int, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion:>2}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
