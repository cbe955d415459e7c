"""Metric actions, metric fibrations and the Grothendieck construction between them."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ValidationError
from .metric_core import INF, FiniteMetricSpace, Flavor, pair_label, validate_space

__all__ = [
    "FibrationMorphism",
    "MetricAction",
    "MetricFibration",
    "MetricTransformation",
    "action_from_fibration",
    "constant_action",
    "counit_morphism",
    "find_action_isomorphism",
    "find_fibration_isomorphism",
    "grothendieck",
    "hat_normalize",
    "is_trivial",
    "lift",
    "unit_transformation",
    "validate_action",
    "validate_fibration",
    "validate_fibration_morphism",
    "validate_transformation",
]

Perm = tuple[int, ...]


def _compose(p: Perm, q: Perm) -> Perm:
    """``p o q``: apply ``q`` first."""
    return tuple(p[i] for i in q)


def _invert(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


@dataclass(frozen=True)
class MetricAction:
    base: FiniteMetricSpace
    fibers: tuple[FiniteMetricSpace, ...]
    # transport[x][y][a] is the image in fiber y of point a of fiber x
    transport: tuple[tuple[Perm, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.base)
        if len(self.fibers) != n:
            raise ValueError(f"{len(self.fibers)} fibers for {n} base points")
        if len(self.transport) != n or any(len(row) != n for row in self.transport):
            raise ValueError("transport table is not indexed by ordered base pairs")


@dataclass(frozen=True)
class MetricFibration:
    total: FiniteMetricSpace
    base: FiniteMetricSpace
    proj: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.proj) != len(self.total):
            raise ValueError("projection must be defined on every total point")
        if any(not (0 <= p < len(self.base)) for p in self.proj):
            raise ValueError("projection hits a point outside the base")

    def fiber(self, x: int) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.proj) if p == x)


@dataclass(frozen=True)
class MetricTransformation:
    source: MetricAction
    target: MetricAction
    maps: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class FibrationMorphism:
    source: MetricFibration
    target: MetricFibration
    map: tuple[int, ...]


def constant_action(base: FiniteMetricSpace, fiber: FiniteMetricSpace) -> MetricAction:
    ident = tuple(range(len(fiber)))
    n = len(base)
    return MetricAction(base, (fiber,) * n, tuple((ident,) * n for _ in range(n)))


def validate_action(a: MetricAction) -> MetricAction:
    """Exhaustively check bijectivity, unit, inverse, isometry and the deficit bound."""
    X = a.base
    n = len(X)
    for x, fib in enumerate(a.fibers):
        try:
            validate_space(fib.d, fib.flavor, fib.labels)
        except ValidationError as exc:
            raise ValidationError("fiber", f"fiber over {X.labels[x]}: {exc}", (x,) + exc.witness) from None
    for x in range(n):
        for y in range(n):
            t = a.transport[x][y]
            m = len(a.fibers[y])
            if len(t) != len(a.fibers[x]) or sorted(t) != list(range(m)):
                raise ValidationError("bijection", f"F[{X.labels[x]},{X.labels[y]}] is not a bijection of fibers", (x, y))
    for x in range(n):
        if a.transport[x][x] != tuple(range(len(a.fibers[x]))):
            raise ValidationError("unit", f"F[{X.labels[x]},{X.labels[x]}] is not the identity", (x,))
    for x in range(n):
        for y in range(n):
            if _compose(a.transport[y][x], a.transport[x][y]) != tuple(range(len(a.fibers[x]))):
                raise ValidationError(
                    "inverse", f"F[{X.labels[y]},{X.labels[x]}] is not the inverse of F[{X.labels[x]},{X.labels[y]}]", (x, y)
                )
    for x in range(n):
        fx = a.fibers[x]
        for y in range(n):
            fy, t = a.fibers[y], a.transport[x][y]
            for p in range(len(fx)):
                for q in range(len(fx)):
                    if fy.d[t[p]][t[q]] != fx.d[p][q]:
                        raise ValidationError(
                            "isometry", f"F[{X.labels[x]},{X.labels[y]}] changes d({fx.labels[p]}, {fx.labels[q]})", (x, y, p, q)
                        )
    for x in range(n):
        for y in range(n):
            for z in range(n):
                if INF in (X.d[x][y], X.d[y][z]):
                    continue
                bound = X.d[x][y] + X.d[y][z] - X.d[x][z] if X.d[x][z] is not INF else None
                if bound is None:
                    continue
                fz = a.fibers[z]
                via = _compose(a.transport[y][z], a.transport[x][y])
                direct = a.transport[x][z]
                for p in range(len(a.fibers[x])):
                    gap = fz.d[via[p]][direct[p]]
                    if gap > bound:
                        raise ValidationError(
                            "deficit",
                            f"at ({X.labels[x]}, {X.labels[y]}, {X.labels[z]}) point {a.fibers[x].labels[p]} "
                            f"is displaced by {gap} > {bound}",
                            (x, y, z, p),
                        )
    return a


def grothendieck(a: MetricAction) -> MetricFibration:
    """Total space of pairs ``(x, p)`` with ``d = d_X(x, y) + d_{Fy}(F_xy p, q)``."""
    X = a.base
    pts = [(x, p) for x in range(len(X)) for p in range(len(a.fibers[x]))]
    labels = tuple(pair_label(X.labels[x], a.fibers[x].labels[p]) for x, p in pts)
    d = tuple(
        tuple(X.d[x][y] + a.fibers[y].d[a.transport[x][y][p]][q] for y, q in pts)
        for x, p in pts
    )
    flavor = X.flavor
    if any(f.flavor is Flavor.EXTENDED for f in a.fibers):
        flavor = Flavor.EXTENDED
    elif flavor is Flavor.METRIC and any(f.flavor is Flavor.QUASI for f in a.fibers):
        flavor = Flavor.QUASI
    total = FiniteMetricSpace(labels, d, flavor)
    return MetricFibration(total, X, tuple(x for x, _ in pts))


def _lift_candidates(f: MetricFibration, e: int, x: int) -> list[int]:
    E = f.total
    target = f.base.d[f.proj[e]][x]
    over = f.fiber(x)
    out = []
    for c in over:
        if E.d[e][c] != target:
            continue
        if all(E.d[e][o] == E.d[e][c] + E.d[c][o] for o in over):
            out.append(c)
    return out


def validate_fibration(f: MetricFibration) -> MetricFibration:
    """Check the projection is 1-Lipschitz and every lift exists and is unique."""
    E, X = f.total, f.base
    try:
        validate_space(E.d, E.flavor, E.labels)
    except ValidationError as exc:
        raise ValidationError("total", f"total space: {exc}", exc.witness) from None
    for i in range(len(E)):
        for j in range(len(E)):
            if X.d[f.proj[i]][f.proj[j]] > E.d[i][j]:
                raise ValidationError(
                    "lipschitz", f"projection stretches d({E.labels[i]}, {E.labels[j]}) = {E.d[i][j]}", (i, j)
                )
    for e in range(len(E)):
        for x in range(len(X)):
            if X.d[f.proj[e]][x] is INF:
                continue
            cands = _lift_candidates(f, e, x)
            if not cands:
                raise ValidationError("no-lift", f"no lift of {X.labels[x]} along {E.labels[e]}", (e, x))
            if len(cands) > 1:
                raise ValidationError(
                    "non-unique-lift", f"lift of {X.labels[x]} along {E.labels[e]} is not unique", (e, x) + tuple(cands)
                )
    return f


def lift(f: MetricFibration, e: int, x: int) -> int:
    cands = _lift_candidates(f, e, x)
    if len(cands) != 1:
        raise ValueError(f"lift of base point {x} along total point {e} is not unique ({len(cands)} candidates)")
    return cands[0]


def action_from_fibration(f: MetricFibration) -> MetricAction:
    """Fibers with the induced metric; transports move a point to its lift."""
    n = len(f.base)
    fibers_idx = [f.fiber(x) for x in range(n)]
    fibers = tuple(f.total.subspace(ix) for ix in fibers_idx)
    pos = [{e: k for k, e in enumerate(ix)} for ix in fibers_idx]
    transport = []
    for x in range(n):
        row = []
        for y in range(n):
            if x == y:
                row.append(tuple(range(len(fibers_idx[x]))))
            else:
                row.append(tuple(pos[y][lift(f, e, y)] for e in fibers_idx[x]))
        transport.append(tuple(row))
    return MetricAction(f.base, fibers, tuple(transport))


def _same_base(a: FiniteMetricSpace, b: FiniteMetricSpace) -> bool:
    return len(a) == len(b) and a.d == b.d


def find_fibration_isomorphism(f: MetricFibration, g: MetricFibration) -> tuple[int, ...] | None:
    """First fiber-preserving isometry ``total(f) -> total(g)`` in lexicographic search order."""
    if not _same_base(f.base, g.base):
        raise ValueError("fibrations live over different bases")
    n = len(f.base)
    ff = [f.fiber(x) for x in range(n)]
    gf = [g.fiber(x) for x in range(n)]
    if any(len(a) != len(b) for a, b in zip(ff, gf)):
        return None
    order = [e for x in range(n) for e in ff[x]]
    dE, dF = f.total.d, g.total.d
    image: dict[int, int] = {}
    used: set[int] = set()

    def extend(k: int) -> bool:
        if k == len(order):
            return True
        e = order[k]
        for c in gf[f.proj[e]]:
            if c in used:
                continue
            if all(dF[c][image[p]] == dE[e][p] and dF[image[p]][c] == dE[p][e] for p in order[:k]):
                image[e] = c
                used.add(c)
                if extend(k + 1):
                    return True
                used.discard(c)
                del image[e]
        return False

    if not extend(0):
        return None
    return tuple(image[e] for e in range(len(f.total)))


def find_action_isomorphism(a: MetricAction, b: MetricAction) -> MetricTransformation | None:
    """A transformation ``a => b`` that is an isometry on each fiber, or ``None``."""
    fa, fb = grothendieck(a), grothendieck(b)
    iso = find_fibration_isomorphism(fa, fb)
    if iso is None:
        return None
    n = len(a.base)
    off_a = [0] * n
    off_b = [0] * n
    for x in range(1, n):
        off_a[x] = off_a[x - 1] + len(a.fibers[x - 1])
        off_b[x] = off_b[x - 1] + len(b.fibers[x - 1])
    maps = tuple(
        tuple(iso[off_a[x] + p] - off_b[x] for p in range(len(a.fibers[x]))) for x in range(n)
    )
    return MetricTransformation(a, b, maps)


def validate_transformation(t: MetricTransformation, isometric: bool = False) -> MetricTransformation:
    """Check each fiber map is 1-Lipschitz and ``G_xy th_x = th_y F_xy``."""
    a, b = t.source, t.target
    if not _same_base(a.base, b.base):
        raise ValidationError("base", "transformation between actions over different bases")
    n = len(a.base)
    for x in range(n):
        th = t.maps[x]
        fa, fb = a.fibers[x], b.fibers[x]
        if len(th) != len(fa) or any(not (0 <= v < len(fb)) for v in th):
            raise ValidationError("shape", f"map over {a.base.labels[x]} has the wrong domain or codomain", (x,))
        for p in range(len(fa)):
            for q in range(len(fa)):
                if fb.d[th[p]][th[q]] > fa.d[p][q]:
                    raise ValidationError("lipschitz", f"map over {a.base.labels[x]} stretches a distance", (x, p, q))
                if isometric and fb.d[th[p]][th[q]] != fa.d[p][q]:
                    raise ValidationError("isometry", f"map over {a.base.labels[x]} changes a distance", (x, p, q))
    for x in range(n):
        for y in range(n):
            for p in range(len(a.fibers[x])):
                if b.transport[x][y][t.maps[x][p]] != t.maps[y][a.transport[x][y][p]]:
                    raise ValidationError("naturality", "transformation does not commute with transports", (x, y, p))
    return t


def validate_fibration_morphism(m: FibrationMorphism, isometric: bool = False) -> FibrationMorphism:
    """1-Lipschitz, over the base, and compatible with lifts."""
    f, g = m.source, m.target
    if not _same_base(f.base, g.base):
        raise ValidationError("base", "morphism between fibrations over different bases")
    E, F = f.total, g.total
    phi = m.map
    for e in range(len(E)):
        if g.proj[phi[e]] != f.proj[e]:
            raise ValidationError("projection", f"{E.labels[e]} changes fiber", (e,))
    for i in range(len(E)):
        for j in range(len(E)):
            if F.d[phi[i]][phi[j]] > E.d[i][j]:
                raise ValidationError("lipschitz", "morphism stretches a distance", (i, j))
            if isometric and F.d[phi[i]][phi[j]] != E.d[i][j]:
                raise ValidationError("isometry", "morphism changes a distance", (i, j))
    for e in range(len(E)):
        for x in range(len(f.base)):
            if f.base.d[f.proj[e]][x] is INF:
                continue
            if lift(g, phi[e], x) != phi[lift(f, e, x)]:
                raise ValidationError("lift", "morphism does not commute with lifts", (e, x))
    return m


def unit_transformation(a: MetricAction) -> MetricTransformation:
    """The canonical ``a => F(E(a))``; the identity on fiber coordinates."""
    back = action_from_fibration(grothendieck(a))
    return MetricTransformation(a, back, tuple(tuple(range(len(f))) for f in a.fibers))


def counit_morphism(f: MetricFibration) -> FibrationMorphism:
    """The canonical ``E(F(f)) -> f`` sending ``(x, a)`` to ``a``."""
    g = grothendieck(action_from_fibration(f))
    image = tuple(e for x in range(len(f.base)) for e in f.fiber(x))
    return FibrationMorphism(g, f, image)


def hat_normalize(a: MetricAction, x0: int = 0) -> MetricAction:
    """Move every fiber to the one over ``x0``: ``F^_xy = F_{y x0} F_xy F_{x0 x}``."""
    n = len(a.base)
    T = a.transport
    hat = tuple(
        tuple(_compose(T[y][x0], _compose(T[x][y], T[x0][x])) for y in range(n)) for x in range(n)
    )
    return MetricAction(a.base, (a.fibers[x0],) * n, hat)


def is_trivial(f: MetricFibration, x0: int = 0) -> bool:
    """True when ``f`` is isomorphic over the base to ``base x fiber``."""
    if not f.base.is_finite:
        raise ValueError("triviality is only defined over a connected base")
    if len(f.total) == 0:
        return True
    fib = f.total.subspace(f.fiber(x0))
    return find_fibration_isomorphism(f, grothendieck(constant_action(f.base, fib))) is not None


def fiber_distance_profile(a: MetricAction) -> list[Fraction]:
    return sorted({v for fib in a.fibers for row in fib.d for v in row if v is not INF})


def permute_fibers(a: MetricAction, relabel: Sequence[Perm]) -> MetricAction:
    """Reorder the points of each fiber; ``relabel[x][p]`` is the new index of old point ``p``."""
    n = len(a.base)
    fibers = []
    for x in range(n):
        r = relabel[x]
        inv = _invert(r)
        fib = a.fibers[x]
        fibers.append(
            FiniteMetricSpace(
                tuple(fib.labels[inv[i]] for i in range(len(fib))),
                tuple(tuple(fib.d[inv[i]][inv[j]] for j in range(len(fib))) for i in range(len(fib))),
                fib.flavor,
            )
        )
    transport = tuple(
        tuple(_compose(relabel[y], _compose(a.transport[x][y], _invert(relabel[x]))) for y in range(n))
        for x in range(n)
    )
    return MetricAction(a.base, tuple(fibers), transport)
