"""Principal G-actions, torsors and the classification of fibrations with a given fiber.

Gauge fixing: a principal action ``f`` over a base with basepoint ``x0`` is
isomorphic to ``f^(x, y) = f(y, x0) f(x, y) f(x0, x)``, which satisfies
``f^(x0, x) = e``. Two normalized actions are isomorphic exactly when one is a
simultaneous conjugate of the other, so enumeration runs over the normalized
values ``f^(b, c)`` with ``x0`` not in ``{b, c}`` and then quotients by
conjugation.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import ValidationError
from .fibrations import (
    MetricAction,
    MetricFibration,
    find_fibration_isomorphism,
    grothendieck,
    lift,
    validate_action,
    validate_fibration,
)
from .metric_core import INF, FiniteMetricSpace, Flavor, degeneracy_degree
from .metric_groups import FiniteNormedGroup, aut_group, canonical_conjugate, metric_from_norm

__all__ = [
    "FibrationClass",
    "Holonomy",
    "PrincipalAction",
    "Torsor",
    "associated_action",
    "classify_fibrations",
    "enumerate_principal",
    "fibration_classes",
    "gauge_normalize",
    "holonomy",
    "principal_from_values",
    "principal_to_action",
    "principal_torsor",
    "random_principal",
    "validate_principal",
    "validate_torsor",
    "validate_torsor_morphism",
]


@dataclass(frozen=True)
class PrincipalAction:
    base: FiniteMetricSpace
    group: FiniteNormedGroup
    f: tuple[tuple[int, ...], ...]

    def values(self, x0: int = 0) -> tuple[int, ...]:
        """The free coordinates ``f(b, c)``, ``b < c``, ``x0`` not in ``{b, c}``."""
        return tuple(self.f[b][c] for b, c in _free_pairs(len(self.base), x0))


@dataclass(frozen=True)
class Torsor:
    fibration: MetricFibration
    group: FiniteNormedGroup
    # right_action[p][g] is the point p.g
    right_action: tuple[tuple[int, ...], ...]


def _free_pairs(n: int, x0: int) -> list[tuple[int, int]]:
    return [(b, c) for b in range(n) for c in range(b + 1, n) if x0 not in (b, c)]


def principal_from_values(base: FiniteMetricSpace, group: FiniteNormedGroup, values: Sequence[int], x0: int = 0) -> PrincipalAction:
    """Rebuild a normalized action from its free coordinates."""
    n = len(base)
    e = group.unit
    f = [[e] * n for _ in range(n)]
    for (b, c), g in zip(_free_pairs(n, x0), values):
        f[b][c] = g
        f[c][b] = group.inv[g]
    return PrincipalAction(base, group, tuple(tuple(r) for r in f))


def validate_principal(p: PrincipalAction) -> PrincipalAction:
    """Unit, inverse and the deficit bound ``|f(x,z)^-1 f(y,z) f(x,y)| <= d(x,y) + d(y,z) - d(x,z)``."""
    X, G, f = p.base, p.group, p.f
    n = len(X)
    if len(f) != n or any(len(r) != n for r in f):
        raise ValidationError("shape", "transport table is not indexed by ordered base pairs")
    for x in range(n):
        for y in range(n):
            if not (0 <= f[x][y] < len(G)):
                raise ValidationError("shape", "transport value is not a group element", (x, y))
    for x in range(n):
        if f[x][x] != G.unit:
            raise ValidationError("unit", f"f({X.labels[x]}, {X.labels[x]}) is not the unit", (x,))
    for x in range(n):
        for y in range(n):
            if f[y][x] != G.inv[f[x][y]]:
                raise ValidationError("inverse", f"f({X.labels[y]}, {X.labels[x]}) is not the inverse of f({X.labels[x]}, {X.labels[y]})", (x, y))
    for x in range(n):
        for y in range(n):
            for z in range(n):
                if INF in (X.d[x][y], X.d[y][z], X.d[x][z]):
                    continue
                bound = X.d[x][y] + X.d[y][z] - X.d[x][z]
                c = G.mul(G.inv[f[x][z]], f[y][z], f[x][y])
                if G.norm[c] > bound:
                    raise ValidationError(
                        "deficit",
                        f"|{G.elements[c]}| = {G.norm[c]} exceeds the deficit {bound} of "
                        f"({X.labels[x]}, {X.labels[y]}, {X.labels[z]})",
                        (x, y, z),
                    )
    return p


def principal_to_action(p: PrincipalAction) -> MetricAction:
    """Every fiber is the group metric; ``F_xy`` is left multiplication by ``f(x, y)``."""
    G = p.group
    fib = metric_from_norm(G)
    n = len(p.base)
    transport = tuple(tuple(G.table[p.f[x][y]] for y in range(n)) for x in range(n))
    return MetricAction(p.base, (fib,) * n, transport)


def principal_torsor(p: PrincipalAction) -> Torsor:
    """Grothendieck total space with the right action ``(x, g) h = (x, g h)``."""
    G = p.group
    m = len(G)
    fib = grothendieck(principal_to_action(p))
    right = tuple(
        tuple(x * m + G.table[g][h] for h in range(m)) for x in range(len(p.base)) for g in range(m)
    )
    return Torsor(fib, G, right)


def validate_torsor(t: Torsor) -> Torsor:
    f, G, R = t.fibration, t.group, t.right_action
    validate_fibration(f)
    E, X = f.total, f.base
    m = len(G)
    if len(R) != len(E) or any(len(r) != m for r in R):
        raise ValidationError("shape", "right action table has the wrong shape")
    for p in range(len(E)):
        if R[p][G.unit] != p:
            raise ValidationError("action-unit", f"{E.labels[p]}.e != {E.labels[p]}", (p,))
        for g in range(m):
            for h in range(m):
                if R[R[p][g]][h] != R[p][G.table[g][h]]:
                    raise ValidationError("action-compat", "(p.g).h != p.(gh)", (p, g, h))
    for p in range(len(E)):
        for g in range(m):
            if f.proj[R[p][g]] != f.proj[p]:
                raise ValidationError("fiber-preservation", f"{E.labels[p]}.{G.elements[g]} leaves its fiber", (p, g))
    for g in range(m):
        for p in range(len(E)):
            for q in range(len(E)):
                if E.d[R[p][g]][R[q][g]] != E.d[p][q]:
                    raise ValidationError("isometry", f"acting by {G.elements[g]} changes a distance", (p, q, g))
    for p in range(len(E)):
        orbit = sorted(R[p])
        if orbit != sorted(f.fiber(f.proj[p])) or len(set(R[p])) != m:
            raise ValidationError("free-transitive", f"the action on the fiber of {E.labels[p]} is not simply transitive", (p,))
    for p in range(len(E)):
        for g in range(m):
            if E.d[p][R[p][g]] != G.norm[g]:
                raise ValidationError("fiber-norm", f"d({E.labels[p]}, {E.labels[p]}.{G.elements[g]}) != |{G.elements[g]}|", (p, g))
    for p in range(len(E)):
        for x in range(len(X)):
            if X.d[f.proj[p]][x] is INF:
                continue
            px = lift(f, p, x)
            for g in range(m):
                if E.d[p][R[px][g]] != X.d[f.proj[p]][x] + G.norm[g]:
                    raise ValidationError("lift-norm", "d(p, p_x g) != d(pi p, x) + |g|", (p, x, g))
    return t


def validate_torsor_morphism(s: Torsor, t: Torsor, phi: Sequence[int]) -> None:
    """Fiber-preserving, equivariant and 1-Lipschitz; such a map must then be an isometry."""
    E, F = s.fibration.total, t.fibration.total
    if len(phi) != len(E):
        raise ValidationError("shape", "map is not defined on every point")
    for p in range(len(E)):
        if t.fibration.proj[phi[p]] != s.fibration.proj[p]:
            raise ValidationError("projection", "map does not commute with projections", (p,))
        for g in range(len(s.group)):
            if phi[s.right_action[p][g]] != t.right_action[phi[p]][g]:
                raise ValidationError("equivariance", "map is not equivariant", (p, g))
    for p in range(len(E)):
        for q in range(len(E)):
            if F.d[phi[p]][phi[q]] > E.d[p][q]:
                raise ValidationError("lipschitz", "map stretches a distance", (p, q))
    for p in range(len(E)):
        for q in range(len(E)):
            if F.d[phi[p]][phi[q]] != E.d[p][q]:
                raise ValidationError("rigidity", "a torsor morphism failed to be an isometry", (p, q))


def gauge_normalize(p: PrincipalAction, x0: int = 0) -> PrincipalAction:
    G, f = p.group, p.f
    n = len(p.base)
    hat = tuple(tuple(G.mul(f[y][x0], f[x][y], f[x0][x]) for y in range(n)) for x in range(n))
    return PrincipalAction(p.base, G, hat)


def holonomy(p: PrincipalAction, loop: Sequence[int]) -> int:
    """``f(x1, x0) f(x2, x1) ... f(x0, xn)`` for the loop ``(x0, x1, ..., xn, x0)``."""
    if len(loop) < 1 or loop[0] != loop[-1]:
        raise ValueError("a loop must start and end at the same point")
    G = p.group
    out = G.unit
    for a, b in zip(loop, loop[1:]):
        out = G.table[out][p.f[b][a]]
    return out


class Holonomy:
    """Normalized transports at a basepoint, with cached loop evaluation."""

    def __init__(self, p: PrincipalAction, x0: int = 0) -> None:
        self.x0 = x0
        self.principal = gauge_normalize(p, x0)
        self._cache: dict[tuple[int, ...], int] = {}

    def __call__(self, loop: Sequence[int]) -> int:
        key = tuple(loop)
        if key[0] != self.x0:
            raise ValueError("loop is not based at the holonomy basepoint")
        if key not in self._cache:
            self._cache[key] = holonomy(self.principal, key)
        return self._cache[key]


def _check_base(base: FiniteMetricSpace) -> None:
    if base.flavor is not Flavor.METRIC:
        raise ValueError(f"classification needs a metric base, got flavor {base.flavor.value}")
    if not base.is_finite:
        raise ValueError("classification needs a connected base (all distances finite)")
    if len(base) == 0:
        raise ValueError("classification needs a nonempty base")


class _Search:
    """Backtracking over normalized free coordinates with deficit pruning."""

    def __init__(self, base: FiniteMetricSpace, group: FiniteNormedGroup, x0: int) -> None:
        self.base, self.group, self.x0 = base, group, x0
        n = len(base)
        self.pairs = _free_pairs(n, x0)
        self.slot = {pr: k for k, pr in enumerate(self.pairs)}
        # single-variable bound from the triangle through x0
        self.domains = []
        for b, c in self.pairs:
            lim = degeneracy_degree(base, (x0, b, c))
            self.domains.append([g for g in range(len(group)) if group.norm[g] <= lim])
        # triangles a<b<c away from x0, checked when (b, c) is assigned
        self.checks: list[list[tuple[int, int, int, object]]] = [[] for _ in self.pairs]
        for k, (b, c) in enumerate(self.pairs):
            for a in range(b):
                if a == x0:
                    continue
                lim = degeneracy_degree(base, (a, b, c))
                self.checks[k].append((self.slot[(a, b)], self.slot[(a, c)], k, lim))

    def _ok(self, vals: list[int], k: int) -> bool:
        G = self.group
        for ab, ac, bc, lim in self.checks[k]:
            # cyclic product f(c,a) f(b,c) f(a,b)
            c = G.table[G.table[G.inv[vals[ac]]][vals[bc]]][vals[ab]]
            if G.norm[c] > lim:
                return False
        return True

    def solutions(self, prefix: Sequence[int] = (), rng: random.Random | None = None) -> Iterator[tuple[int, ...]]:
        m = len(self.pairs)
        vals = list(prefix) + [0] * (m - len(prefix))
        for k in range(len(prefix)):
            if vals[k] not in self.domains[k] or not self._ok(vals, k):
                return

        def rec(k: int):
            if k == m:
                yield tuple(vals)
                return
            dom = self.domains[k]
            if rng is not None:
                dom = list(dom)
                rng.shuffle(dom)
            for g in dom:
                vals[k] = g
                if self._ok(vals, k):
                    yield from rec(k + 1)

        yield from rec(len(prefix))


def _canonical_values(group: FiniteNormedGroup, vals: tuple[int, ...]) -> tuple[int, ...]:
    return canonical_conjugate(group, vals) if vals else vals


def enumerate_principal(
    base: FiniteMetricSpace, group: FiniteNormedGroup, x0: int = 0, threads: int = 1
) -> list[PrincipalAction]:
    """Representatives of the isomorphism classes of principal actions.

    Output is deterministic: the trivial class first, then the remaining
    canonical forms in lexicographic order of their free coordinates.
    """
    _check_base(base)
    search = _Search(base, group, x0)
    if not search.pairs:
        return [principal_from_values(base, group, (), x0)]

    def branch(g: int) -> set[tuple[int, ...]]:
        return {_canonical_values(group, s) for s in search.solutions((g,))}

    first = search.domains[0]
    if threads > 1 and len(first) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(branch, first))
    else:
        parts = [branch(g) for g in first]
    forms = set().union(*parts)
    trivial = tuple([group.unit] * len(search.pairs))
    ordered = [trivial] + sorted(forms - {trivial})
    return [principal_from_values(base, group, v, x0) for v in ordered]


def count_principal_solutions(base: FiniteMetricSpace, group: FiniteNormedGroup, x0: int = 0) -> int:
    """Number of normalized assignments before quotienting by conjugation."""
    _check_base(base)
    return sum(1 for _ in _Search(base, group, x0).solutions())


def random_principal(
    base: FiniteMetricSpace, group: FiniteNormedGroup, rng: random.Random, x0: int = 0
) -> PrincipalAction:
    """A uniformly-ordered first hit of the backtracking search; always valid."""
    _check_base(base)
    search = _Search(base, group, x0)
    vals = next(search.solutions(rng=rng))
    return principal_from_values(base, group, vals, x0)


def associated_action(p: PrincipalAction, perms: Sequence[tuple[int, ...]], fiber: FiniteMetricSpace) -> MetricAction:
    """Let the isometries ``perms[f(x, y)]`` act on a fixed fiber."""
    n = len(p.base)
    transport = tuple(tuple(tuple(perms[p.f[x][y]]) for y in range(n)) for x in range(n))
    return MetricAction(p.base, (fiber,) * n, transport)


@dataclass(frozen=True)
class FibrationClass:
    fibration: MetricFibration
    principal: PrincipalAction
    action: MetricAction
    trivial: bool
    perms: tuple[tuple[int, ...], ...] = field(repr=False, default=())


def fibration_classes(
    base: FiniteMetricSpace, fiber: FiniteMetricSpace, x0: int = 0, threads: int = 1, self_check: bool = True
) -> list[FibrationClass]:
    """Isomorphism classes of fibrations over ``base`` whose fibers are ``fiber``."""
    _check_base(base)
    if fiber.flavor is not Flavor.METRIC or not fiber.is_finite:
        raise ValueError("the fiber must be a finite metric space")
    group, perms = aut_group(fiber)
    out = []
    for k, p in enumerate(enumerate_principal(base, group, x0, threads)):
        act = validate_action(associated_action(p, perms, fiber))
        fib = validate_fibration(grothendieck(act))
        out.append(FibrationClass(fib, p, act, trivial=(k == 0), perms=tuple(perms)))
    if self_check:
        for i in range(len(out)):
            for j in range(i + 1, len(out)):
                if find_fibration_isomorphism(out[i].fibration, out[j].fibration) is not None:
                    raise RuntimeError(f"classes {i} and {j} are isomorphic; classification is inconsistent")
    return out


def classify_fibrations(base: FiniteMetricSpace, fiber: FiniteMetricSpace, threads: int = 1) -> list[MetricFibration]:
    return [c.fibration for c in fibration_classes(base, fiber, threads=threads)]


def unbounded_elements(group: FiniteNormedGroup) -> list[int]:
    """Elements of infinite norm; these never survive the deficit filter over a connected base."""
    return [g for g in range(len(group)) if group.norm[g] is INF]
