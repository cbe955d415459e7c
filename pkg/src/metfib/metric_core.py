"""Finite (quasi, extended) metric spaces and weighted graphs.

Distances are exact: every finite value is a :class:`fractions.Fraction` and the
only other admissible value is the singleton :data:`INF`.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence, Union

import networkx as nx

from .errors import ValidationError

__all__ = [
    "INF",
    "Flavor",
    "FiniteMetricSpace",
    "Triangle",
    "WeightedGraph",
    "XRational",
    "cartesian_product_graph",
    "degeneracy_degree",
    "find_isometry",
    "isometries",
    "kolmogorov_quotient",
    "l1_product",
    "pair_label",
    "shortest_path_metric",
    "to_xr",
    "validate_space",
]


class _Infinity:
    """The extended distance value; absorbs addition and dominates every rational."""

    __slots__ = ()
    _instance: "_Infinity | None" = None

    def __new__(cls) -> "_Infinity":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __reduce__(self):
        return (_Infinity, ())

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "inf"

    def __hash__(self) -> int:
        return hash("metfib.INF")

    def __eq__(self, other: object) -> bool:
        return other is self

    def __add__(self, other):
        if other is self or isinstance(other, (int, Fraction)):
            return self
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise ArithmeticError("inf - inf is undefined")
        if isinstance(other, (int, Fraction)):
            return self
        return NotImplemented

    def __rsub__(self, other):
        raise ArithmeticError("subtracting inf from a finite value")

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return other is self

    def __gt__(self, other) -> bool:
        return other is not self

    def __ge__(self, other) -> bool:
        return True


INF = _Infinity()
XRational = Union[Fraction, _Infinity]


def to_xr(value) -> XRational:
    """Coerce ``value`` to an exact nonnegative rational or :data:`INF`.

    Accepts ints, Fractions, :data:`INF` and strings of the form ``p``, ``p/q``
    or ``inf``. Floats are refused so that nothing inexact leaks into the core.
    """
    if value is INF:
        return INF
    if isinstance(value, bool):
        raise TypeError("booleans are not distances")
    if isinstance(value, (int, Fraction)):
        out = Fraction(value)
    elif isinstance(value, str):
        token = value.strip()
        if token.lower() in ("inf", "∞"):
            return INF
        try:
            out = Fraction(token)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    else:
        raise TypeError(f"cannot use {type(value).__name__} as an exact distance")
    if out < 0:
        raise ValueError(f"negative value {out}")
    return out


def _esc(label: str) -> str:
    return label.replace("\\", "\\\\").replace("|", "\\|")


def pair_label(left: str, right: str) -> str:
    """Label of a product point; ``|`` and ``\\`` inside the parts are escaped."""
    return f"{_esc(left)}|{_esc(right)}"


class Flavor(enum.Enum):
    METRIC = "metric"
    QUASI = "quasi"
    # Extended quasi metric: entries may be inf and distinct points may sit at 0.
    EXTENDED = "extended"


@dataclass(frozen=True)
class FiniteMetricSpace:
    labels: tuple[str, ...]
    d: tuple[tuple[XRational, ...], ...]
    flavor: Flavor = Flavor.METRIC

    def __post_init__(self) -> None:
        n = len(self.labels)
        if len(self.d) != n or any(len(row) != n for row in self.d):
            raise ValueError(f"distance matrix is not {n}x{n}")
        if len(set(self.labels)) != n:
            raise ValueError("point labels must be distinct")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no point labelled {label!r}") from None

    def dist(self, i: int, j: int) -> XRational:
        return self.d[i][j]

    @property
    def is_finite(self) -> bool:
        return all(v is not INF for row in self.d for v in row)

    @property
    def diameter(self) -> XRational:
        return max((v for row in self.d for v in row), default=Fraction(0))

    def subspace(self, indices: Sequence[int], labels: Sequence[str] | None = None) -> "FiniteMetricSpace":
        idx = list(indices)
        return FiniteMetricSpace(
            tuple(labels) if labels is not None else tuple(self.labels[i] for i in idx),
            tuple(tuple(self.d[i][j] for j in idx) for i in idx),
            self.flavor,
        )

    def relabel(self, labels: Sequence[str]) -> "FiniteMetricSpace":
        return FiniteMetricSpace(tuple(labels), self.d, self.flavor)


class Triangle(NamedTuple):
    i: int
    j: int
    k: int


@dataclass(frozen=True)
class WeightedGraph:
    vertices: tuple[str, ...]
    # (i, j, weight) with i < j, sorted
    edges: tuple[tuple[int, int, Fraction], ...]

    def __post_init__(self) -> None:
        n = len(self.vertices)
        if len(set(self.vertices)) != n:
            raise ValueError("vertex names must be distinct")
        seen = set()
        for i, j, w in self.edges:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range")
            if i == j:
                raise ValueError(f"self-loop at {self.vertices[i]!r}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {self.vertices[key[0]]!r}-{self.vertices[key[1]]!r}")
            seen.add(key)
            if not isinstance(w, Fraction) or w < 0:
                raise ValueError("edge weights must be nonnegative Fractions")

    @classmethod
    def build(cls, vertices: Sequence[str], edges) -> "WeightedGraph":
        """Build from name pairs ``(u, v)`` or triples ``(u, v, weight)``."""
        names = tuple(vertices)
        pos = {v: i for i, v in enumerate(names)}
        out = []
        for e in edges:
            u, v = e[0], e[1]
            w = to_xr(e[2]) if len(e) > 2 else Fraction(1)
            if w is INF:
                raise ValueError("edge weights must be finite")
            i, j = pos[u], pos[v]
            out.append((min(i, j), max(i, j), w))
        out.sort(key=lambda t: (t[0], t[1]))
        return cls(names, tuple(out))

    def neighbours(self, i: int) -> list[int]:
        return sorted({b if a == i else a for a, b, _ in self.edges if i in (a, b)})


def shortest_path_metric(g: WeightedGraph) -> FiniteMetricSpace:
    """All-pairs shortest path distances of ``g``; unreachable pairs are :data:`INF`."""
    n = len(g.vertices)
    nxg = nx.Graph()
    nxg.add_nodes_from(range(n))
    unit = True
    for i, j, w in g.edges:
        nxg.add_edge(i, j, weight=w)
        unit = unit and w == 1
    if unit:
        lengths = dict(nx.all_pairs_shortest_path_length(nxg))
    else:
        lengths = dict(nx.all_pairs_dijkstra_path_length(nxg, weight="weight"))
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            v = lengths[i].get(j)
            row.append(INF if v is None else Fraction(v))
        rows.append(tuple(row))
    d = tuple(rows)
    if any(v is INF for row in d for v in row):
        flavor = Flavor.EXTENDED
    elif any(d[i][j] == 0 for i in range(n) for j in range(n) if i != j):
        flavor = Flavor.QUASI
    else:
        flavor = Flavor.METRIC
    return FiniteMetricSpace(g.vertices, d, flavor)


def validate_space(matrix, flavor: Flavor = Flavor.METRIC, labels: Sequence[str] | None = None) -> FiniteMetricSpace:
    """Check the axioms of ``flavor`` and return the typed space.

    Raises :class:`ValidationError` naming the first violated axiom together with
    the witness indices.
    """
    rows = [list(r) for r in matrix]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValidationError("shape", f"matrix is not square ({n} rows)")
    d = [[to_xr(v) for v in r] for r in rows]
    if labels is None:
        labels = [str(i) for i in range(n)]
    labels = tuple(labels)
    if len(labels) != n:
        raise ValidationError("shape", f"{len(labels)} labels for {n} points")
    if len(set(labels)) != n:
        raise ValidationError("shape", "duplicate point labels")

    def name(*idx):
        return "(" + ", ".join(labels[i] for i in idx) + ")"

    for i in range(n):
        if d[i][i] != 0:
            raise ValidationError("diagonal", f"d{name(i, i)} = {d[i][i]} is not 0", (i,))
    if flavor is not Flavor.EXTENDED:
        for i in range(n):
            for j in range(n):
                if d[i][j] is INF:
                    raise ValidationError("infinite", f"d{name(i, j)} = inf but flavor is {flavor.value}", (i, j))
    for i in range(n):
        for j in range(i + 1, n):
            if d[i][j] != d[j][i]:
                raise ValidationError(
                    "asymmetry", f"d{name(i, j)} = {d[i][j]} but d{name(j, i)} = {d[j][i]}", (i, j)
                )
    if flavor is Flavor.METRIC:
        for i in range(n):
            for j in range(i + 1, n):
                if d[i][j] == 0:
                    raise ValidationError("non-metric", f"d{name(i, j)} = 0 for distinct points", (i, j))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if d[i][j] + d[j][k] < d[i][k]:
                    raise ValidationError(
                        "triangle",
                        f"d{name(i, j)} + d{name(j, k)} = {d[i][j] + d[j][k]} < d{name(i, k)} = {d[i][k]}",
                        (i, j, k),
                    )
    return FiniteMetricSpace(labels, tuple(tuple(r) for r in d), flavor)


def kolmogorov_quotient(x: FiniteMetricSpace) -> tuple[FiniteMetricSpace, tuple[int, ...]]:
    """Merge points at distance 0; each class is represented by its smallest index.

    Returns the quotient space and the map from old indices to new indices.
    """
    n = len(x)
    reps: list[int] = []
    qmap = [-1] * n
    for i in range(n):
        for c, r in enumerate(reps):
            if x.d[r][i] == 0:
                qmap[i] = c
                break
        else:
            qmap[i] = len(reps)
            reps.append(i)
    q = x.subspace(reps)
    flavor = Flavor.EXTENDED if not q.is_finite else Flavor.METRIC
    return FiniteMetricSpace(q.labels, q.d, flavor), tuple(qmap)


def l1_product(a: FiniteMetricSpace, b: FiniteMetricSpace) -> FiniteMetricSpace:
    """The L1 product; point ``(x, y)`` sits at index ``x * len(b) + y``."""
    pts = [(i, j) for i in range(len(a)) for j in range(len(b))]
    labels = tuple(pair_label(a.labels[i], b.labels[j]) for i, j in pts)
    d = tuple(tuple(a.d[i][k] + b.d[j][l] for k, l in pts) for i, j in pts)
    if Flavor.EXTENDED in (a.flavor, b.flavor):
        flavor = Flavor.EXTENDED
    elif Flavor.QUASI in (a.flavor, b.flavor):
        flavor = Flavor.QUASI
    else:
        flavor = Flavor.METRIC
    return FiniteMetricSpace(labels, d, flavor)


def cartesian_product_graph(g: WeightedGraph, h: WeightedGraph) -> WeightedGraph:
    ng, nh = len(g.vertices), len(h.vertices)
    names = tuple(pair_label(u, v) for u in g.vertices for v in h.vertices)
    edges = []
    for x in range(ng):
        for a, b, w in h.edges:
            edges.append((x * nh + a, x * nh + b, w))
    for a, b, w in g.edges:
        for y in range(nh):
            edges.append((a * nh + y, b * nh + y, w))
    edges.sort(key=lambda t: (t[0], t[1]))
    return WeightedGraph(names, tuple(edges))


def degeneracy_degree(x: FiniteMetricSpace, t: Sequence[int]) -> Fraction:
    """Smallest triangle-inequality slack of the triple ``t`` over its cyclic orders."""
    i, j, k = t
    n = len(x)
    if not all(0 <= v < n for v in (i, j, k)):
        raise IndexError(f"triangle {tuple(t)} has an index outside 0..{n - 1}")
    d = x.d
    if INF in (d[i][j], d[j][k], d[i][k]):
        raise ValueError(f"extended triangle: an infinite side in {tuple(t)}")
    return min(
        d[i][j] + d[j][k] - d[i][k],
        d[j][k] + d[k][i] - d[j][i],
        d[k][i] + d[i][j] - d[k][j],
    )


def isometries(a: FiniteMetricSpace, b: FiniteMetricSpace) -> Iterator[tuple[int, ...]]:
    """All distance-preserving bijections ``a -> b``, in lexicographic order of image words."""
    n = len(a)
    if len(b) != n:
        return
    image = [-1] * n
    used = [False] * n

    def extend(i: int):
        if i == n:
            yield tuple(image)
            return
        for c in range(n):
            if used[c]:
                continue
            if all(b.d[c][image[p]] == a.d[i][p] for p in range(i)):
                image[i] = c
                used[c] = True
                yield from extend(i + 1)
                used[c] = False
        image[i] = -1

    yield from extend(0)


def find_isometry(a: FiniteMetricSpace, b: FiniteMetricSpace) -> tuple[int, ...] | None:
    return next(isometries(a, b), None)


def all_triples(n: int) -> Iterator[tuple[int, int, int]]:
    return itertools.combinations(range(n), 3)
