"""The shipped example corpus, addressable as ``builtin:NAME``."""

from __future__ import annotations

from functools import lru_cache

from .fibrations import MetricFibration
from .metric_core import FiniteMetricSpace, WeightedGraph, cartesian_product_graph, shortest_path_metric
from .metric_groups import FiniteNormedGroup, aut_group, cyclic_group, validate_group

__all__ = ["GROUPS", "SPACES", "FIBRATIONS", "get", "graph", "names"]


def _v(n: int) -> list[str]:
    return [f"v{i + 1}" for i in range(n)]


def complete_graph(n: int) -> WeightedGraph:
    names = _v(n)
    return WeightedGraph.build(names, [(names[i], names[j]) for i in range(n) for j in range(i + 1, n)])


def cycle_graph(n: int) -> WeightedGraph:
    names = _v(n)
    return WeightedGraph.build(names, [(names[i], names[(i + 1) % n]) for i in range(n)])


def path_graph(n: int) -> WeightedGraph:
    names = _v(n)
    return WeightedGraph.build(names, [(names[i], names[i + 1]) for i in range(n - 1)])


def k33_graph() -> WeightedGraph:
    """K_{3,3} with parts ``v*|0`` and ``v*|1``."""
    names = [f"{v}|{s}" for v in _v(3) for s in (0, 1)]
    edges = [(f"{a}|0", f"{b}|1") for a in _v(3) for b in _v(3)]
    return WeightedGraph.build(names, edges)


_GRAPHS = {
    "K1": lambda: complete_graph(1),
    "K2": lambda: complete_graph(2),
    "K3": lambda: complete_graph(3),
    "K4": lambda: complete_graph(4),
    "P3": lambda: path_graph(3),
    "prism": lambda: cartesian_product_graph(complete_graph(3), complete_graph(2)),
    "K33": k33_graph,
}
for _n in range(3, 9):
    _GRAPHS[f"C{_n}"] = (lambda n: lambda: cycle_graph(n))(_n)

SPACES = tuple(_GRAPHS)


def _z3() -> FiniteNormedGroup:
    return cyclic_group(3)


def _s3() -> FiniteNormedGroup:
    g, perms = aut_group(shortest_path_metric(complete_graph(3)))
    names = ["".join(str(i + 1) for i in p) for p in perms]
    return validate_group(names, g.table, g.norm)


def _v4() -> FiniteNormedGroup:
    names = ["e", "a", "b", "c"]
    table = [[a ^ b for b in range(4)] for a in range(4)]
    return validate_group(names, table, [0, 1, 1, 1])


_GROUPS = {
    "Z2": lambda: cyclic_group(2),
    "Z3": _z3,
    "Z4": lambda: cyclic_group(4),
    "S3": _s3,
    "V4": _v4,
}
GROUPS = tuple(_GROUPS)


def _k33fib() -> MetricFibration:
    total = shortest_path_metric(k33_graph())
    base = shortest_path_metric(complete_graph(3))
    proj = tuple(base.index(lbl.split("|")[0]) for lbl in total.labels)
    return MetricFibration(total, base, proj)


def _prismfib() -> MetricFibration:
    total = shortest_path_metric(_GRAPHS["prism"]())
    base = shortest_path_metric(complete_graph(3))
    proj = tuple(base.index(lbl.split("|")[0]) for lbl in total.labels)
    return MetricFibration(total, base, proj)


_FIBRATIONS = {"K33fib": _k33fib, "prismfib": _prismfib}
FIBRATIONS = tuple(_FIBRATIONS)


def names() -> list[str]:
    return list(SPACES) + list(GROUPS) + list(FIBRATIONS)


def graph(name: str) -> WeightedGraph:
    if name not in _GRAPHS:
        raise KeyError(f"no builtin graph {name!r}; known: {', '.join(SPACES)}")
    return _GRAPHS[name]()


@lru_cache(maxsize=None)
def get(name: str) -> FiniteMetricSpace | FiniteNormedGroup | MetricFibration:
    if name in _GRAPHS:
        return shortest_path_metric(_GRAPHS[name]())
    if name in _GROUPS:
        return _GROUPS[name]()
    if name in _FIBRATIONS:
        return _FIBRATIONS[name]()
    raise KeyError(f"no builtin named {name!r}; known: {', '.join(names())}")
