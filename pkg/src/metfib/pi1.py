"""The fundamental metric group: coline complex, edge-path presentation and loop norms.

As a group it is the edge-path group of the 2-complex whose edges are all
pairs of points and whose filled triangles are the triples of degeneracy
degree 0. The norm side is explored by a bounded shortest-path search on the
graph of loops, which only ever yields upper bounds.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from sympy import Matrix, ZZ
from sympy.combinatorics.coset_table import coset_enumeration_r
from sympy.combinatorics.fp_groups import FpGroup
from sympy.combinatorics.free_groups import free_group
from sympy.matrices.normalforms import invariant_factors

from .errors import ValidationError
from .metric_core import INF, FiniteMetricSpace, Flavor, XRational, degeneracy_degree
from .metric_groups import FiniteNormedGroup, conjugacy_partition

__all__ = [
    "AbelianInvariants",
    "ColineComplex",
    "EdgePathGroup",
    "GroupPresentation",
    "Triviality",
    "TrivialityVerdict",
    "abelianization",
    "coline_complex",
    "hom_classes_to",
    "is_trivial_group",
    "loop_norm_upper_bound",
    "pi1_presentation",
    "realized_hom_classes",
]

Word = tuple[int, ...]


@dataclass(frozen=True)
class ColineComplex:
    space: FiniteMetricSpace
    edges: tuple[tuple[int, int], ...]
    # sorted triples (i < j < k) of degeneracy degree 0
    triangles: tuple[tuple[int, int, int], ...]

    def is_filled(self, i: int, j: int, k: int) -> bool:
        return tuple(sorted((i, j, k))) in set(self.triangles)


def coline_complex(x: FiniteMetricSpace) -> ColineComplex:
    if x.flavor is not Flavor.METRIC or not x.is_finite:
        raise ValueError("the coline complex needs a metric space with finite distances")
    n = len(x)
    edges = tuple(itertools.combinations(range(n), 2))
    tris = tuple(t for t in itertools.combinations(range(n), 3) if degeneracy_degree(x, t) == 0)
    return ColineComplex(x, edges, tris)


def free_reduce(word: Sequence[int]) -> Word:
    out: list[int] = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def cyclic_reduce(word: Sequence[int]) -> Word:
    w = list(free_reduce(word))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


@dataclass(frozen=True)
class GroupPresentation:
    generators: tuple[str, ...]
    # letters are +(i+1) for generator i and -(i+1) for its inverse
    relators: tuple[Word, ...]

    def __post_init__(self) -> None:
        m = len(self.generators)
        for r in self.relators:
            if any(letter == 0 or abs(letter) > m for letter in r):
                raise ValueError(f"relator {r} refers to a missing generator")

    def format_word(self, word: Sequence[int]) -> str:
        if not word:
            return "1"
        parts = []
        for letter in word:
            name = self.generators[abs(letter) - 1]
            parts.append(name if letter > 0 else name + "^-1")
        return " ".join(parts)

    def __str__(self) -> str:
        gens = ", ".join(self.generators)
        rels = ", ".join(self.format_word(r) for r in self.relators)
        return f"< {gens} | {rels} >"


class EdgePathGroup:
    """Edge-path group of the coline complex at ``x0``.

    The 1-skeleton is complete, so the breadth-first tree from ``x0`` is the
    star of edges at ``x0``; every other edge ``{u, v}`` (``u < v``) is a
    generator, read in the direction ``u -> v``.
    """

    def __init__(self, complex_: ColineComplex, x0: int = 0) -> None:
        self.complex = complex_
        self.x0 = x0
        x = complex_.space
        n = len(x)
        if not (0 <= x0 < n):
            raise IndexError("basepoint out of range")
        self.tree = tuple((x0, v) if x0 < v else (v, x0) for v in range(n) if v != x0)
        self.pairs = tuple((u, v) for u, v in complex_.edges if x0 not in (u, v))
        self.slot = {pr: k for k, pr in enumerate(self.pairs)}
        names = tuple(f"{x.labels[u]}-{x.labels[v]}" for u, v in self.pairs)
        rels = []
        for a, b, c in complex_.triangles:
            w = cyclic_reduce(self.edge(a, b) + self.edge(b, c) + self.edge(c, a))
            if w and w not in rels:
                rels.append(w)
        self.presentation = GroupPresentation(names, tuple(rels))

    def edge(self, u: int, v: int) -> Word:
        if u == v or self.x0 in (u, v):
            return ()
        if u < v:
            return (self.slot[(u, v)] + 1,)
        return (-(self.slot[(v, u)] + 1),)

    def word(self, loop: Sequence[int]) -> Word:
        if not loop or loop[0] != self.x0 or loop[-1] != self.x0:
            raise ValueError("loop must start and end at the basepoint")
        w: list[int] = []
        for a, b in zip(loop, loop[1:]):
            w.extend(self.edge(a, b))
        return free_reduce(w)

    def generator_loops(self) -> list[tuple[int, ...]]:
        """The loop ``(x0, u, v, x0)`` for each generator ``u -> v``."""
        return [(self.x0, u, v, self.x0) for u, v in self.pairs]


def pi1_presentation(c: ColineComplex, x0: int = 0) -> GroupPresentation:
    return EdgePathGroup(c, x0).presentation


@dataclass(frozen=True)
class AbelianInvariants:
    free_rank: int
    torsion: tuple[int, ...]

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def __str__(self) -> str:
        parts = [f"Z/{t}" for t in self.torsion]
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        return " + ".join(parts) if parts else "0"


def abelianization(p: GroupPresentation) -> AbelianInvariants:
    """Invariant factors of the exponent-sum matrix of the relators."""
    m = len(p.generators)
    rows = []
    for r in p.relators:
        row = [0] * m
        for letter in r:
            row[abs(letter) - 1] += 1 if letter > 0 else -1
        if any(row):
            rows.append(row)
    if m == 0 or not rows:
        return AbelianInvariants(m, ())
    factors = [abs(int(v)) for v in invariant_factors(Matrix(rows), domain=ZZ) if v != 0]
    return AbelianInvariants(m - len(factors), tuple(v for v in factors if v != 1))


class Triviality(enum.Enum):
    TRIVIAL = "trivial"
    NONTRIVIAL = "nontrivial"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class TrivialityVerdict:
    status: Triviality
    witness: str = ""

    def __str__(self) -> str:
        return f"{self.status.value} ({self.witness})" if self.witness else self.status.value


def is_trivial_group(p: GroupPresentation, work_bound: int = 100_000) -> TrivialityVerdict:
    """Decide triviality by abelianization first, then bounded coset enumeration."""
    if not p.generators:
        return TrivialityVerdict(Triviality.TRIVIAL, "no generators")
    ab = abelianization(p)
    if not ab.is_trivial:
        return TrivialityVerdict(Triviality.NONTRIVIAL, f"abelianization {ab}")
    F, *gens = free_group(",".join(f"g{i}" for i in range(len(p.generators))))
    rels = []
    for r in p.relators:
        w = F.identity
        for letter in r:
            g = gens[abs(letter) - 1]
            w = w * (g if letter > 0 else g**-1)
        rels.append(w)
    G = FpGroup(F, rels)
    try:
        table = coset_enumeration_r(G, [], max_cosets=work_bound)
    except ValueError:
        return TrivialityVerdict(Triviality.UNKNOWN, f"coset enumeration exceeded {work_bound} cosets")
    table.compress()
    order = len(table.table)
    if order == 1:
        return TrivialityVerdict(Triviality.TRIVIAL, "coset enumeration closed with 1 coset")
    return TrivialityVerdict(Triviality.NONTRIVIAL, f"order {order}")


def _scale(x: FiniteMetricSpace) -> int:
    den = 1
    for row in x.d:
        for v in row:
            den = den * v.denominator // math.gcd(den, v.denominator)
    return den


def loop_norm_upper_bound(x: FiniteMetricSpace, loop: Sequence[int], search_bound: int) -> XRational:
    """Least insertion/deletion weight from ``loop`` to the constant loop.

    Only loops with at most ``search_bound`` entries (both copies of the
    basepoint included) are visited, so the result is an upper bound on the
    norm that can only decrease as the bound grows.
    """
    if len(loop) < 2 or loop[0] != loop[-1]:
        raise ValueError("a loop is (x0, x1, ..., xn, x0)")
    if not x.is_finite:
        raise ValueError("loop norms need finite distances")
    if len(loop) > search_bound:
        return INF
    x0 = loop[0]
    n = len(x)
    L = _scale(x)
    D = [[int(v * L) for v in row] for row in x.d]
    # w[a][b][c]: weight of inserting b between a and c
    w = [[[0 if a == c else D[a][b] + D[b][c] - D[a][c] for c in range(n)] for b in range(n)] for a in range(n)]
    max_inner = search_bound - 2
    start = tuple(loop[1:-1])
    dist = {start: 0}
    heap = [(0, len(start), start)]
    while heap:
        dcur, _, t = heapq.heappop(heap)
        if dcur > dist.get(t, dcur):
            continue
        if not t:
            return Fraction(dcur, L)
        s = (x0,) + t + (x0,)
        k = len(t)
        for i in range(1, k + 1):
            nt = t[: i - 1] + t[i:]
            nd = dcur + w[s[i - 1]][s[i]][s[i + 1]]
            if nd < dist.get(nt, nd + 1):
                dist[nt] = nd
                heapq.heappush(heap, (nd, len(nt), nt))
        if k < max_inner:
            for i in range(k + 1):
                a, c = s[i], s[i + 1]
                for b in range(n):
                    nt = t[:i] + (b,) + t[i:]
                    nd = dcur + w[a][b][c]
                    if nd < dist.get(nt, nd + 1):
                        dist[nt] = nd
                        heapq.heappush(heap, (nd, len(nt), nt))
    return INF


def _eval(g: FiniteNormedGroup, word: Sequence[int], images: Sequence[int]) -> int:
    out = g.unit
    for letter in word:
        a = images[abs(letter) - 1]
        out = g.table[out][a if letter > 0 else g.inv[a]]
    return out


def hom_tuples(p: GroupPresentation, g: FiniteNormedGroup) -> list[tuple[int, ...]]:
    """All generator-image tuples that kill every relator."""
    m = len(p.generators)
    rels = [r for r in p.relators if r]
    out: list[tuple[int, ...]] = []
    images: list[int | None] = [None] * m

    def propagate(trail: list[int]) -> bool:
        changed = True
        while changed:
            changed = False
            for r in rels:
                free = [abs(letter) - 1 for letter in r if images[abs(letter) - 1] is None]
                if not free:
                    if _eval(g, r, images) != g.unit:  # type: ignore[arg-type]
                        return False
                    continue
                if len(free) == 1:
                    v = free[0]
                    pos = next(i for i, letter in enumerate(r) if abs(letter) - 1 == v)
                    left = _eval(g, r[:pos], images)  # type: ignore[arg-type]
                    right = _eval(g, r[pos + 1 :], images)  # type: ignore[arg-type]
                    # left * y * right = e  =>  y = left^-1 right^-1
                    y = g.table[g.inv[left]][g.inv[right]]
                    images[v] = y if r[pos] > 0 else g.inv[y]
                    trail.append(v)
                    changed = True
        return True

    def rec(i: int) -> None:
        while i < m and images[i] is not None:
            i += 1
        if i == m:
            if all(_eval(g, r, images) == g.unit for r in rels):  # type: ignore[arg-type]
                out.append(tuple(images))  # type: ignore[arg-type]
            return
        for a in range(len(g)):
            images[i] = a
            trail: list[int] = []
            if propagate(trail):
                rec(i + 1)
            for v in trail:
                images[v] = None
        images[i] = None

    trail0: list[int] = []
    if propagate(trail0):
        rec(0)
    return sorted(set(out))


def hom_classes_to(p: GroupPresentation, g: FiniteNormedGroup) -> list[list[tuple[int, ...]]]:
    """Homomorphisms into ``g`` up to simultaneous conjugation; no norm condition is imposed."""
    return conjugacy_partition(g, hom_tuples(p, g))


def principal_from_hom(epg: EdgePathGroup, g: FiniteNormedGroup, images: Sequence[int]):
    """Transports ``F(x, y) = phi(word(x0, y, x, x0))`` of a homomorphism ``phi``."""
    from .classification import PrincipalAction

    x = epg.complex.space
    n = len(x)
    x0 = epg.x0
    f = tuple(tuple(_eval(g, epg.word((x0, b, a, x0)), images) for b in range(n)) for a in range(n))
    return PrincipalAction(x, g, f)


def realized_hom_classes(x: FiniteMetricSpace, g: FiniteNormedGroup, x0: int = 0) -> tuple[int, int]:
    """``(all hom classes, classes whose transports satisfy the deficit bound)``."""
    from .classification import validate_principal

    epg = EdgePathGroup(coline_complex(x), x0)
    classes = hom_classes_to(epg.presentation, g)
    realized = 0
    for cls in classes:
        try:
            validate_principal(principal_from_hom(epg, g, cls[0]))
        except ValidationError:
            continue
        realized += 1
    return len(classes), realized
