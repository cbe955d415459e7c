"""Nonabelian 1-cocycles on a finite metric space and their torsors.

A point of the pasted torsor over ``x_j`` is stored by its coordinate in the
chart indexed by ``r(j)``, the smallest index different from ``j``. The chart
indexed by ``m`` reads the same point as ``u * a[r(j)][j][m]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .classification import Torsor, _check_base
from .errors import ValidationError
from .fibrations import MetricFibration, lift
from .metric_core import INF, FiniteMetricSpace, Flavor, degeneracy_degree, pair_label
from .metric_groups import FiniteNormedGroup, canonical_conjugate

__all__ = [
    "Cocycle",
    "CocycleMorphism",
    "LocalSection",
    "alpha",
    "beta",
    "beta_alpha_isomorphism",
    "beta_morphism",
    "cocycle_compose",
    "cocycle_from_reference",
    "enumerate_cocycle_classes",
    "find_cocycle_morphism",
    "identity_morphism",
    "inverse_morphism",
    "local_section",
    "section_difference",
    "validate_cocycle",
    "validate_cocycle_morphism",
    "validate_section",
]

Table3 = tuple[tuple[tuple[int, ...], ...], ...]


@dataclass(frozen=True)
class Cocycle:
    base: FiniteMetricSpace
    group: FiniteNormedGroup
    a: Table3


@dataclass(frozen=True)
class CocycleMorphism:
    source: Cocycle
    target: Cocycle
    f: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class LocalSection:
    torsor: Torsor
    # pairs[i][j] = (point over x_i, its lift over x_j)
    pairs: tuple[tuple[tuple[int, int], ...], ...]


def validate_cocycle(c: Cocycle) -> Cocycle:
    """``a_ijk a_kjl = a_ijl`` everywhere and ``|a_ijk a_jki a_kij| <= |D(x_i, x_j, x_k)|``."""
    X, G, a = c.base, c.group, c.a
    n = len(X)
    if len(a) != n or any(len(r) != n or any(len(s) != n for s in r) for r in a):
        raise ValidationError("shape", f"cocycle is not an {n}x{n}x{n} table")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if not (0 <= a[i][j][k] < len(G)):
                    raise ValidationError("shape", "cocycle value is not a group element", (i, j, k))
    T = G.table
    for i in range(n):
        for j in range(n):
            aij = a[i][j]
            for k in range(n):
                row = T[aij[k]]
                akj = a[k][j]
                for l in range(n):
                    if row[akj[l]] != aij[l]:
                        raise ValidationError(
                            "cocycle", f"a[{i}][{j}][{k}] a[{k}][{j}][{l}] != a[{i}][{j}][{l}]", (i, j, k, l)
                        )
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if INF in (X.d[i][j], X.d[j][k], X.d[i][k]):
                    continue
                g = G.mul(a[i][j][k], a[j][k][i], a[k][i][j])
                lim = degeneracy_degree(X, (i, j, k))
                if G.norm[g] > lim:
                    raise ValidationError(
                        "norm", f"|a_ijk a_jki a_kij| = {G.norm[g]} > {lim} at ({i}, {j}, {k})", (i, j, k)
                    )
    return c


def validate_cocycle_morphism(m: CocycleMorphism) -> CocycleMorphism:
    a, b, f = m.source.a, m.target.a, m.f
    G = m.source.group
    n = len(m.source.base)
    if m.target.group is not G and m.target.group != G:
        raise ValidationError("group", "cocycles take values in different groups")
    T = G.table
    for i in range(n):
        for j in range(i + 1, n):
            if f[i][j] != f[j][i]:
                raise ValidationError("symmetry", f"f[{i}][{j}] != f[{j}][{i}]", (i, j))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if T[a[i][j][k]][f[j][k]] != T[f[i][j]][b[i][j][k]]:
                    raise ValidationError("morphism", f"a_ijk f_jk != f_ij b_ijk at ({i}, {j}, {k})", (i, j, k))
    return m


def identity_morphism(c: Cocycle) -> CocycleMorphism:
    n = len(c.base)
    e = c.group.unit
    return CocycleMorphism(c, c, tuple((e,) * n for _ in range(n)))


def inverse_morphism(m: CocycleMorphism) -> CocycleMorphism:
    inv = m.source.group.inv
    return CocycleMorphism(m.target, m.source, tuple(tuple(inv[v] for v in row) for row in m.f))


def cocycle_compose(f: CocycleMorphism, g: CocycleMorphism) -> CocycleMorphism:
    """``g o f`` with entries ``f_ij g_ij``; ``f`` must end where ``g`` starts."""
    if f.target != g.source:
        raise ValueError("cannot compose: target of the first morphism is not the source of the second")
    T = f.source.group.table
    n = len(f.f)
    return CocycleMorphism(f.source, g.target, tuple(tuple(T[f.f[i][j]][g.f[i][j]] for j in range(n)) for i in range(n)))


def find_cocycle_morphism(a: Cocycle, b: Cocycle) -> CocycleMorphism | None:
    """First morphism found by choosing ``f_00`` and propagating ``f_ij = a_ijk f_jk b_ijk^-1``."""
    G = a.group
    n = len(a.base)
    if n == 0:
        return CocycleMorphism(a, b, ())
    T, inv = G.table, G.inv
    A, B = a.a, b.a
    for h in range(len(G)):
        f = [[0] * n for _ in range(n)]
        f[0][0] = h
        for i in range(1, n):
            f[i][0] = T[T[A[i][0][0]][h]][inv[B[i][0][0]]]
        for i in range(n):
            for j in range(1, n):
                f[i][j] = T[T[A[i][j][0]][f[j][0]]][inv[B[i][j][0]]]
        cand = CocycleMorphism(a, b, tuple(tuple(r) for r in f))
        try:
            validate_cocycle_morphism(cand)
        except ValidationError:
            continue
        return cand
    return None


def _ref(j: int, n: int) -> int:
    if n == 1:
        return j
    return 1 if j == 0 else 0


def beta(c: Cocycle) -> Torsor:
    """Paste copies of the group along the cocycle.

    Points are ``(j, u)`` with ``u`` the coordinate in the chart ``r(j)``; the
    right action is ``(j, u) h = (j, h^-1 u)``.
    """
    X, G, a = c.base, c.group, c.a
    n, m = len(X), len(G)
    T, inv, norm = G.table, G.inv, G.norm
    pts = [(j, u) for j in range(n) for u in range(m)]
    labels = tuple(pair_label(X.labels[j], G.elements[u]) for j, u in pts)

    def chart(j: int, u: int, other: int) -> int:
        return T[u][a[_ref(j, n)][j][other]]

    rows = []
    for i, u in pts:
        row = []
        for j, v in pts:
            if i == j:
                row.append(norm[T[inv[v]][u]])
            else:
                g = chart(i, u, j)
                h = chart(j, v, i)
                row.append(X.d[i][j] + norm[T[inv[h]][g]])
        rows.append(tuple(row))
    flavor = Flavor.METRIC if X.flavor is Flavor.METRIC and all(v is not INF for v in norm) else X.flavor
    total = FiniteMetricSpace(labels, tuple(rows), flavor)
    fib = MetricFibration(total, X, tuple(j for j, _ in pts))
    right = tuple(tuple(j * m + T[inv[h]][u] for h in range(m)) for j, u in pts)
    return Torsor(fib, G, right)


def beta_morphism(mor: CocycleMorphism) -> tuple[int, ...]:
    """The torsor map ``[g] -> [g f_ij]`` induced by a cocycle morphism."""
    G = mor.source.group
    n, m = len(mor.source.base), len(G)
    return tuple(j * m + G.table[u][mor.f[_ref(j, n)][j]] for j in range(n) for u in range(m))


def _first_by_label(f: MetricFibration, x: int) -> int:
    over = f.fiber(x)
    return min(over, key=lambda e: (f.total.labels[e], e))


def local_section(t: Torsor, picks: Sequence[Sequence[int]] | None = None) -> LocalSection:
    """Pick ``e^ij_i`` for ``i <= j`` (first point over ``x_i`` by label unless
    ``picks[i][j]`` says otherwise); mirror for ``i > j``; lift the rest."""
    f = t.fibration
    n = len(f.base)
    first: dict[tuple[int, int], int] = {}
    for i in range(n):
        for j in range(i, n):
            if picks is not None:
                p = picks[i][j]
                if f.proj[p] != i:
                    raise ValueError(f"picked point {p} does not lie over base point {i}")
                first[(i, j)] = p
            else:
                first[(i, j)] = _first_by_label(f, i)
    pairs = [[(0, 0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i <= j:
                e = first[(i, j)]
            else:
                e = lift(f, first[(j, i)], i)
            pairs[i][j] = (e, lift(f, e, j))
    return LocalSection(t, tuple(tuple(r) for r in pairs))


def validate_section(s: LocalSection) -> LocalSection:
    f = s.torsor.fibration
    n = len(f.base)
    for i in range(n):
        for j in range(n):
            ei, ej = s.pairs[i][j]
            if f.proj[ei] != i or f.proj[ej] != j:
                raise ValidationError("section", f"pair ({i}, {j}) lies over the wrong points", (i, j))
            if lift(f, ei, j) != ej:
                raise ValidationError("section", f"pair ({i}, {j}) is not a lift", (i, j))
            if ei != s.pairs[j][i][1]:
                raise ValidationError("section", f"e^{i}{j}_{i} != e^{j}{i}_{i}", (i, j))
    return s


def _solve(t: Torsor, p: int, q: int) -> int:
    """The unique ``g`` with ``p g = q``."""
    row = t.right_action[p]
    for g, v in enumerate(row):
        if v == q:
            return g
    raise ValueError("points lie in different fibers")


def alpha(t: Torsor, s: LocalSection) -> Cocycle:
    """``a_ijk`` is the element carrying ``e^ij_j`` to ``e^jk_j``."""
    f = t.fibration
    n = len(f.base)
    a = tuple(
        tuple(tuple(_solve(t, s.pairs[i][j][1], s.pairs[j][k][0]) for k in range(n)) for j in range(n))
        for i in range(n)
    )
    return Cocycle(f.base, t.group, a)


def section_difference(t: Torsor, s: LocalSection, s2: LocalSection) -> CocycleMorphism:
    """The morphism ``alpha(s) -> alpha(s2)`` with ``e^ij_i f_ij = mu^ij_i``."""
    n = len(t.fibration.base)
    f = tuple(tuple(_solve(t, s.pairs[i][j][0], s2.pairs[i][j][0]) for j in range(n)) for i in range(n))
    return CocycleMorphism(alpha(t, s), alpha(t, s2), f)


def beta_alpha_isomorphism(t: Torsor, s: LocalSection) -> tuple[Torsor, tuple[int, ...]]:
    """``beta(alpha(t, s))`` together with the map ``[g^ij] -> e^ij g^-1`` into ``t``."""
    c = alpha(t, s)
    b = beta(c)
    G = t.group
    n, m = len(t.fibration.base), len(G)
    phi = tuple(
        t.right_action[s.pairs[_ref(j, n)][j][1]][G.inv[u]] for j in range(n) for u in range(m)
    )
    return b, phi


def cocycle_from_reference(base: FiniteMetricSpace, group: FiniteNormedGroup, a0: Sequence[Sequence[int]]) -> Cocycle:
    """Build ``a_ijk = a0[j][i]^-1 a0[j][k]`` where ``a0[j][k]`` plays ``a_0jk``."""
    n = len(base)
    T, inv = group.table, group.inv
    a = tuple(
        tuple(tuple(T[inv[a0[j][i]]][a0[j][k]] for k in range(n)) for j in range(n)) for i in range(n)
    )
    return Cocycle(base, group, a)


def _normal_pairs(n: int) -> list[tuple[int, int]]:
    return [(k, j) for k in range(1, n) for j in range(k + 1, n)]


def _normal_cocycle(base: FiniteMetricSpace, group: FiniteNormedGroup, values: Sequence[int]) -> Cocycle:
    n = len(base)
    a0 = [[group.unit] * n for _ in range(n)]
    for (k, j), v in zip(_normal_pairs(n), values):
        a0[j][k] = v
    return cocycle_from_reference(base, group, a0)


def _normal_solutions(base: FiniteMetricSpace, group: FiniteNormedGroup) -> Iterator[tuple[int, ...]]:
    """Normalized cocycles (``a_0jk = e`` unless ``0 < k < j``) passing the norm bound."""
    n = len(base)
    pairs = _normal_pairs(n)
    slot = {p: i for i, p in enumerate(pairs)}
    G = group
    T, inv = G.table, G.inv
    # triangles {p < q < s} are checked once (q, s) is assigned
    checks: list[list[tuple[int, int, int, object]]] = [[] for _ in pairs]
    for p in range(n):
        for q in range(p + 1, n):
            for s in range(q + 1, n):
                if q == 0:
                    continue
                checks[slot[(q, s)]].append((p, q, s, degeneracy_degree(base, (p, q, s))))
    a0 = [[G.unit] * n for _ in range(n)]

    def val(i: int, j: int, k: int) -> int:
        return T[inv[a0[j][i]]][a0[j][k]]

    def ok(idx: int) -> bool:
        for p, q, s, lim in checks[idx]:
            g = T[T[val(p, q, s)][val(q, s, p)]][val(s, p, q)]
            if G.norm[g] > lim:
                return False
        return True

    vals = [G.unit] * len(pairs)

    def rec(idx: int):
        if idx == len(pairs):
            yield tuple(vals)
            return
        k, j = pairs[idx]
        for g in range(len(G)):
            a0[j][k] = g
            vals[idx] = g
            if ok(idx):
                yield from rec(idx + 1)
        a0[j][k] = G.unit
        vals[idx] = G.unit

    yield from rec(0)


def enumerate_cocycle_classes(
    base: FiniteMetricSpace, group: FiniteNormedGroup, self_check: bool = True
) -> list[Cocycle]:
    """Representatives of the isomorphism classes of cocycles.

    Every cocycle is isomorphic to one with ``a_0jk = e`` unless ``0 < k < j``;
    among these, isomorphisms are simultaneous conjugations, which is used to
    bucket candidates. Each bucket is then confirmed by explicit morphisms and
    the representatives are checked to be pairwise non-isomorphic.
    """
    _check_base(base)
    buckets: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    for v in _normal_solutions(base, group):
        key = canonical_conjugate(group, v) if v else v
        buckets.setdefault(key, []).append(v)
    trivial = tuple([group.unit] * len(_normal_pairs(len(base))))
    keys = [trivial] + sorted(k for k in buckets if k != trivial)
    reps = [validate_cocycle(_normal_cocycle(base, group, k)) for k in keys]
    if self_check:
        for key, rep in zip(keys, reps):
            for v in buckets[key]:
                if v != key and find_cocycle_morphism(_normal_cocycle(base, group, v), rep) is None:
                    raise RuntimeError("conjugate normalized cocycles failed to be isomorphic")
        for i in range(len(reps)):
            for j in range(i + 1, len(reps)):
                if find_cocycle_morphism(reps[i], reps[j]) is not None:
                    raise RuntimeError(f"cocycle classes {i} and {j} are isomorphic")
    return reps
