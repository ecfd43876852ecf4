import numpy as np
import pytest

from topolink import Graph, build_graph


def er_graph(n: int, p: float, seed: int) -> Graph:
    """Seeded Erdos-Renyi graph."""
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, k=1)
    mask = rng.random(iu.size) < p
    return build_graph(np.column_stack([iu[mask], iv[mask]]), n)


def is_connected(g: Graph) -> bool:
    if g.num_nodes == 0:
        return True
    seen = np.zeros(g.num_nodes, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for v in g.neighbors_of(u):
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return bool(seen.all())


@pytest.fixture
def path3() -> Graph:
    return build_graph([(0, 1), (1, 2)], 3)


@pytest.fixture
def triangle() -> Graph:
    return build_graph([(0, 1), (1, 2), (0, 2)], 3)


@pytest.fixture
def star5() -> Graph:
    return build_graph([(0, i) for i in range(1, 5)], 5)
