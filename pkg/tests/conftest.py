import numpy as np
import pytest

from pcst_maxsum import Instance

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def path3(lam=1.0):
    """r - a - b with c(r,a)=1, c(a,b)=2, prizes 0, 0.5, 3."""
    return Instance.from_edges(3, [(0, 1, 1.0), (1, 2, 2.0)], [0.0, 0.5, 3.0], lam, "P3")


def two_node(lam=1.0):
    return Instance.from_edges(2, [(0, 1, 1.0)], [0.0, 3.0], lam, "pair")


def random_connected(n, extra, seed, lam=1.0, cost_range=(1.0, 4.0), prize_range=(0.0, 3.0)):
    """Random spanning tree plus ``extra`` random chords, real costs and prizes."""
    rng = np.random.default_rng(seed)
    edges = {}
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges[(u, v)] = float(rng.uniform(*cost_range))
    tries = 0
    while len(edges) < n - 1 + extra and tries < 50 * n:
        tries += 1
        u, v = sorted(int(x) for x in rng.choice(n, 2, replace=False))
        edges.setdefault((u, v), float(rng.uniform(*cost_range)))
    prizes = rng.uniform(*prize_range, size=n)
    return Instance.from_edges(n, [(u, v, c) for (u, v), c in sorted(edges.items())],
                               prizes, lam, f"rc{n}_{seed}")


def random_tree(n, seed, lam=1.0):
    return random_connected(n, 0, seed, lam)


@pytest.fixture
def p3():
    return path3()
