"""Finite normed groups, their metric counterparts and isometry groups.

Group elements are plain indices into ``FiniteNormedGroup.elements``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ValidationError
from .metric_core import INF, FiniteMetricSpace, Flavor, XRational, isometries, to_xr

__all__ = [
    "FiniteNormedGroup",
    "aut_group",
    "canonical_conjugate",
    "conjugacy_partition",
    "cyclic_group",
    "metric_from_norm",
    "norm_from_metric",
    "validate_group",
]


@dataclass(frozen=True)
class FiniteNormedGroup:
    elements: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]
    inv: tuple[int, ...]
    unit: int
    norm: tuple[XRational, ...]

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def mul(self, *gs: int) -> int:
        out = self.unit
        for g in gs:
            out = self.table[out][g]
        return out

    def conj(self, g: int, h: int) -> int:
        """``h^-1 g h``."""
        return self.table[self.table[self.inv[h]][g]][h]

    def index(self, name: str) -> int:
        try:
            return self.elements.index(name)
        except ValueError:
            raise KeyError(f"no group element named {name!r}") from None

    def is_abelian(self) -> bool:
        n = len(self)
        return all(self.table[a][b] == self.table[b][a] for a in range(n) for b in range(a + 1, n))


def _structure(elements: Sequence[str], table) -> tuple[tuple[tuple[int, ...], ...], int, tuple[int, ...]]:
    n = len(elements)
    if n == 0:
        raise ValidationError("shape", "a group needs at least one element")
    if len(set(elements)) != n:
        raise ValidationError("shape", "duplicate element names")
    pos = {name: i for i, name in enumerate(elements)}
    rows = []
    if len(table) != n:
        raise ValidationError("shape", f"table has {len(table)} rows for {n} elements")
    for r, row in enumerate(table):
        if len(row) != n:
            raise ValidationError("shape", f"table row {elements[r]} has {len(row)} entries", (r,))
        out = []
        for c, v in enumerate(row):
            if isinstance(v, str):
                if v not in pos:
                    raise ValidationError("closure", f"{elements[r]}*{elements[c]} = {v} is not an element", (r, c))
                out.append(pos[v])
            else:
                if not (0 <= v < n):
                    raise ValidationError("closure", f"{elements[r]}*{elements[c]} out of range", (r, c))
                out.append(int(v))
        rows.append(tuple(out))
    t = tuple(rows)
    units = [e for e in range(n) if all(t[e][g] == g and t[g][e] == g for g in range(n))]
    if not units:
        raise ValidationError("unit", "no two-sided unit element")
    e = units[0]
    inv = []
    for g in range(n):
        cands = [h for h in range(n) if t[g][h] == e and t[h][g] == e]
        if not cands:
            raise ValidationError("inverse", f"{elements[g]} has no inverse", (g,))
        inv.append(cands[0])
    for a in range(n):
        for b in range(n):
            ab = t[a][b]
            for c in range(n):
                if t[ab][c] != t[a][t[b][c]]:
                    raise ValidationError(
                        "associativity",
                        f"({elements[a]}*{elements[b]})*{elements[c]} != {elements[a]}*({elements[b]}*{elements[c]})",
                        (a, b, c),
                    )
    return t, e, tuple(inv)


def validate_group(elements: Sequence[str], table, norm: Iterable) -> FiniteNormedGroup:
    """Check the group axioms and the norm axioms; return the typed group.

    ``table[g][h]`` is the product ``g*h`` given by index or by element name.
    The norm must vanish exactly at the unit, be subadditive and be invariant
    under inversion and conjugation.
    """
    elements = tuple(str(x) for x in elements)
    t, e, inv = _structure(elements, table)
    nv = tuple(to_xr(v) for v in norm)
    n = len(elements)
    if len(nv) != n:
        raise ValidationError("shape", f"{len(nv)} norm values for {n} elements")
    if nv[e] != 0:
        raise ValidationError("norm-unit", f"|{elements[e]}| = {nv[e]} but the unit must have norm 0", (e,))
    for g in range(n):
        if g != e and nv[g] == 0:
            raise ValidationError("norm-positive", f"|{elements[g]}| = 0 for a non-unit element", (g,))
    for g in range(n):
        if nv[inv[g]] != nv[g]:
            raise ValidationError(
                "norm-inverse",
                f"|{elements[g]}| = {nv[g]} but |{elements[inv[g]]}| = {nv[inv[g]]} for its inverse",
                (g, inv[g]),
            )
    for g in range(n):
        for h in range(n):
            c = t[t[inv[h]][g]][h]
            if nv[c] != nv[g]:
                raise ValidationError(
                    "norm-conjugation",
                    f"|{elements[g]}| = {nv[g]} but its conjugate by {elements[h]} has norm {nv[c]}",
                    (g, h),
                )
    for g in range(n):
        for h in range(n):
            if nv[t[g][h]] > nv[g] + nv[h]:
                raise ValidationError(
                    "norm-subadditive",
                    f"|{elements[g]}*{elements[h]}| = {nv[t[g][h]]} > |{elements[g]}| + |{elements[h]}|",
                    (g, h),
                )
    return FiniteNormedGroup(elements, t, inv, e, nv)


def metric_from_norm(g: FiniteNormedGroup) -> FiniteMetricSpace:
    """The bi-invariant metric ``d(a, b) = |b^-1 a|`` on the elements of ``g``."""
    n = len(g)
    d = tuple(tuple(g.norm[g.table[g.inv[b]][a]] for b in range(n)) for a in range(n))
    flavor = Flavor.EXTENDED if any(v is INF for v in g.norm) else Flavor.METRIC
    return FiniteMetricSpace(g.elements, d, flavor)


def norm_from_metric(x: FiniteMetricSpace, table, unit: int | None = None) -> FiniteNormedGroup:
    """Read a normed group off a metric space carrying a group structure.

    The multiplication must act by isometries on both sides and inversion must
    be an isometry. These are checked, not assumed.
    """
    t, e, inv = _structure(x.labels, table)
    if unit is not None and unit != e:
        raise ValidationError("unit", f"declared unit {x.labels[unit]} is not the unit")
    n = len(x)
    d = x.d
    for k in range(n):
        for a in range(n):
            for b in range(n):
                if d[t[k][a]][t[k][b]] != d[a][b]:
                    raise ValidationError("left-invariance", "left multiplication is not an isometry", (k, a, b))
                if d[t[a][k]][t[b][k]] != d[a][b]:
                    raise ValidationError("right-invariance", "right multiplication is not an isometry", (k, a, b))
    for a in range(n):
        for b in range(n):
            if d[inv[a]][inv[b]] != d[a][b]:
                raise ValidationError("inverse-invariance", "inversion is not an isometry", (a, b))
    norm = tuple(d[e][g] for g in range(n))
    return validate_group(x.labels, t, norm)


def cyclic_group(n: int, norm: Sequence | None = None, prefix: str = "") -> FiniteNormedGroup:
    """Z/n with elements ``0..n-1``; the default norm is the word length ``min(k, n-k)``."""
    names = [f"{prefix}{k}" for k in range(n)]
    table = [[(a + b) % n for b in range(n)] for a in range(n)]
    if norm is None:
        norm = [min(k, n - k) for k in range(n)]
    return validate_group(names, table, norm)


def aut_group(y: FiniteMetricSpace) -> tuple[FiniteNormedGroup, list[tuple[int, ...]]]:
    """Isometry group of ``y`` with the uniform norm ``sup_y d(y, f y)``.

    Elements are listed in lexicographic order of their image words and
    ``table[f][g]`` is the composite ``f o g``.
    """
    perms = sorted(isometries(y, y))
    pos = {p: i for i, p in enumerate(perms)}
    n = len(y)
    table = tuple(tuple(pos[tuple(f[g[i]] for i in range(n))] for g in perms) for f in perms)
    names = tuple("[" + ",".join(y.labels[i] for i in p) + "]" for p in perms)
    norm = tuple(max((y.d[i][p[i]] for i in range(n)), default=Fraction(0)) for p in perms)
    identity = pos[tuple(range(n))]
    inv = []
    for p in perms:
        q = [0] * n
        for i, v in enumerate(p):
            q[v] = i
        inv.append(pos[tuple(q)])
    return FiniteNormedGroup(names, table, tuple(inv), identity, norm), perms


def canonical_conjugate(g: FiniteNormedGroup, tup: Sequence[int]) -> tuple[int, ...]:
    """Lexicographically least simultaneous conjugate of ``tup``."""
    return min(tuple(g.conj(x, h) for x in tup) for h in range(len(g)))


def conjugacy_partition(g: FiniteNormedGroup, tuples: Iterable[Sequence[int]]) -> list[list[tuple[int, ...]]]:
    """Group tuples into orbits of simultaneous conjugation.

    Classes are sorted by their canonical (least) member, members within a class
    are sorted too.
    """
    classes: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    for t in tuples:
        t = tuple(t)
        classes.setdefault(canonical_conjugate(g, t), []).append(t)
    return [sorted(set(classes[k])) for k in sorted(classes)]


def commutes_all(g: FiniteNormedGroup, h: int) -> bool:
    return all(g.table[h][x] == g.table[x][h] for x in range(len(g)))


def product_of(g: FiniteNormedGroup, xs: Iterable[int]) -> int:
    return g.mul(*xs)


def all_tuples(g: FiniteNormedGroup, k: int):
    return itertools.product(range(len(g)), repeat=k)
