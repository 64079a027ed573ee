import itertools
import random

import pytest

from gcl_datalab.graphs import AttributedGraph, LabeledGraph


@pytest.fixture
def triangle():
    return AttributedGraph.build(3, [(0, 1), (1, 2), (0, 2)], graph_id="tri")


@pytest.fixture
def path3():
    return AttributedGraph.build(3, [(0, 1), (1, 2)], graph_id="p3")


def random_graph(rng: random.Random, n: int, attr_values=(0, 1), p_edge=0.45,
                 graph_id="") -> AttributedGraph:
    edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < p_edge]
    attrs = [(rng.choice(attr_values),) for _ in range(n)]
    return AttributedGraph.build(n, edges, attrs, graph_id=graph_id)


def random_connected_graph(rng: random.Random, n: int, attr_values=(1,),
                           extra_edge_p=0.25, graph_id="") -> AttributedGraph:
    """Random tree plus extra edges: connected by construction."""
    edges = set()
    for v in range(1, n):
        edges.add((rng.randrange(v), v))
    for u, v in itertools.combinations(range(n), 2):
        if (u, v) not in edges and rng.random() < extra_edge_p:
            edges.add((u, v))
    attrs = [(rng.choice(attr_values),) for _ in range(n)]
    return AttributedGraph.build(n, edges, attrs, graph_id=graph_id)


def permuted_copy(g: AttributedGraph, rng: random.Random) -> AttributedGraph:
    perm = list(range(g.n))
    rng.shuffle(perm)
    edges = [(perm[u], perm[v]) for u, v in g.edges]
    attrs = [None] * g.n
    for old, new in enumerate(perm):
        attrs[new] = g.node_attrs[old]
    return AttributedGraph.build(g.n, edges, attrs, graph_id=g.graph_id + "-perm")
