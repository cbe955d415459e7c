"""Magnitude of finite metric spaces at rational scale ``q``."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .metric_core import INF, FiniteMetricSpace, to_xr

__all__ = ["MagnitudeError", "ProductReport", "check_product", "magnitude_at", "solve_integer_system"]


class MagnitudeError(ValueError):
    def __init__(self, message: str, q: Fraction | None = None) -> None:
        super().__init__(message)
        self.q = q


def solve_integer_system(m: Sequence[Sequence[int]], rhs: Sequence[int]) -> list[Fraction]:
    """One exact solution of ``m w = rhs``.

    Fraction-free (Bareiss) elimination handles the invertible case. A singular
    but consistent system falls back to rational row reduction with free
    variables set to 0; an inconsistent one raises :class:`MagnitudeError`.
    """
    n = len(m)
    a = [list(row) + [rhs[i]] for i, row in enumerate(m)]
    prev = 1
    for k in range(n):
        piv = next((r for r in range(k, n) if a[r][k] != 0), None)
        if piv is None:
            return _solve_singular(m, rhs)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
        for i in range(k + 1, n):
            for j in range(k + 1, n + 1):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    w = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = Fraction(a[i][n]) - sum((a[i][j] * w[j] for j in range(i + 1, n)), Fraction(0))
        w[i] = s / a[i][i]
    return w


def _solve_singular(m: Sequence[Sequence[int]], rhs: Sequence[int]) -> list[Fraction]:
    n = len(m)
    a = [[Fraction(v) for v in row] + [Fraction(rhs[i])] for i, row in enumerate(m)]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, n) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        lead = a[r][c]
        a[r] = [v / lead for v in a[r]]
        for i in range(n):
            if i != r and a[i][c] != 0:
                factor = a[i][c]
                a[i] = [v - factor * u for v, u in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    if any(a[i][n] != 0 for i in range(r, n)):
        raise MagnitudeError("similarity matrix is singular and admits no weighting")
    w = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        w[c] = a[i][n]
    return w


def _integer_distances(space: FiniteMetricSpace) -> list[list[int]]:
    out = []
    for row in space.d:
        r = []
        for v in row:
            if v is INF or v.denominator != 1:
                raise MagnitudeError(f"magnitude needs integer distances, found {v}")
            r.append(int(v))
        out.append(r)
    return out


def magnitude_at(space: FiniteMetricSpace, q) -> Fraction:
    """Sum of a weighting ``w`` with ``Z w = 1`` for ``Z = (q^d(i,j))``, exactly.

    When ``Z`` is invertible this is the sum of the entries of its inverse. For
    a symmetric singular ``Z`` every weighting has the same sum, so the value
    is still well defined as long as one exists.
    """
    q = to_xr(q)
    if q is INF or not (0 < q < 1):
        raise MagnitudeError(f"q must lie strictly between 0 and 1, got {q}", None)
    if len(space) == 0:
        return Fraction(0)
    d = _integer_distances(space)
    top = max(max(r) for r in d)
    a, b = q.numerator, q.denominator
    # scale by b^top so that every entry a^d b^(top-d) is an integer
    m = [[a**v * b ** (top - v) for v in r] for r in d]
    rhs = [b**top] * len(space)
    try:
        w = solve_integer_system(m, rhs)
    except MagnitudeError:
        raise MagnitudeError(f"no weighting exists at q = {q}", q) from None
    return sum(w, Fraction(0))


@dataclass
class ProductReport:
    rows: list[tuple[Fraction, Fraction, Fraction, Fraction]] = field(default_factory=list)
    skipped: list[tuple[Fraction, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(t == b * f for _, t, b, f in self.rows)

    def lines(self) -> list[str]:
        out = []
        for q, t, b, f in self.rows:
            flag = "ok" if t == b * f else "MISMATCH"
            out.append(f"q={q}  total={t}  base*fiber={b}*{f}={b * f}  {flag}")
        for q, why in self.skipped:
            out.append(f"q={q}  skipped: {why}")
        return out


def check_product(
    total: FiniteMetricSpace, base: FiniteMetricSpace, fiber: FiniteMetricSpace, q_samples: Iterable
) -> ProductReport:
    """Compare ``Mag(total)`` with ``Mag(base) * Mag(fiber)`` at each sample."""
    rep = ProductReport()
    for q in q_samples:
        q = to_xr(q)
        try:
            vals = (magnitude_at(total, q), magnitude_at(base, q), magnitude_at(fiber, q))
        except MagnitudeError as exc:
            if exc.q is None:
                raise
            rep.skipped.append((q, str(exc)))
            continue
        rep.rows.append((q,) + vals)
    return rep
