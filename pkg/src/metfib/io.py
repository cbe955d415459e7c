"""Readers and writers for the plain-text file formats.

Every reader raises :class:`ParseError` with the offending line number.
Inputs may also be ``builtin:NAME`` references to the shipped corpus.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterator

from .cech import Cocycle
from .classification import PrincipalAction
from .errors import ParseError, ValidationError
from .fibrations import MetricAction, MetricFibration
from .metric_core import INF, FiniteMetricSpace, Flavor, WeightedGraph, to_xr, validate_space
from .metric_groups import FiniteNormedGroup, validate_group

__all__ = [
    "dump_action",
    "dump_cocycle",
    "dump_dmat",
    "dump_fibration",
    "dump_graph",
    "dump_group",
    "load_action",
    "load_cocycle",
    "load_fibration",
    "load_graph",
    "load_group",
    "load_space",
    "parse_action",
    "parse_cocycle",
    "parse_dmat",
    "parse_fibration",
    "parse_graph",
    "parse_group",
]

BUILTIN = "builtin:"


class _Lines:
    """Significant lines (comments and blanks dropped) with their line numbers."""

    def __init__(self, text: str, source: str | None) -> None:
        self.source = source
        self.items: list[tuple[int, str]] = []
        for no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                self.items.append((no, line))
        self.pos = 0

    def peek(self) -> tuple[int, str] | None:
        return self.items[self.pos] if self.pos < len(self.items) else None

    def next(self, what: str) -> tuple[int, str]:
        item = self.peek()
        if item is None:
            last = self.items[-1][0] if self.items else None
            raise ParseError(f"unexpected end of input, expected {what}", last, self.source)
        self.pos += 1
        return item

    def rest(self) -> Iterator[tuple[int, str]]:
        while self.pos < len(self.items):
            yield self.next("")

    def error(self, message: str, line: int | None) -> ParseError:
        return ParseError(message, line, self.source)


def _value(lines: _Lines, token: str, line: int):
    try:
        return to_xr(token)
    except (ValueError, TypeError) as exc:
        raise lines.error(f"bad distance {token!r}: {exc}", line) from None


def _dmat_block(lines: _Lines) -> tuple[tuple[str, ...], list[list], int]:
    no, head = lines.next("point count")
    try:
        n = int(head)
    except ValueError:
        raise lines.error(f"expected a point count, got {head!r}", no) from None
    if n < 0:
        raise lines.error("point count must be nonnegative", no)
    labels = tuple(str(i) for i in range(n))
    item = lines.peek()
    if item is not None and item[1].startswith("labels:"):
        lno, text = lines.next("labels")
        labels = tuple(text[len("labels:") :].split())
        if len(labels) != n:
            raise lines.error(f"{len(labels)} labels for {n} points", lno)
        if len(set(labels)) != n:
            raise lines.error("duplicate labels", lno)
    rows = []
    for _ in range(n):
        rno, text = lines.next("a matrix row")
        toks = text.split()
        if len(toks) != n:
            raise lines.error(f"row has {len(toks)} entries, expected {n}", rno)
        rows.append([_value(lines, t, rno) for t in toks])
    return labels, rows, no


def _infer_flavor(rows: list[list]) -> Flavor:
    if any(v is INF for r in rows for v in r):
        return Flavor.EXTENDED
    if any(rows[i][j] == 0 for i in range(len(rows)) for j in range(len(rows)) if i != j):
        return Flavor.QUASI
    return Flavor.METRIC


def _space_block(lines: _Lines, flavor: Flavor | None = None) -> FiniteMetricSpace:
    labels, rows, no = _dmat_block(lines)
    fl = flavor or _infer_flavor(rows)
    try:
        return validate_space(rows, fl, labels)
    except ValidationError as exc:
        raise ParseError(f"invalid space: {exc}", no, lines.source) from None


def _expect_end(lines: _Lines) -> None:
    item = lines.peek()
    if item is not None:
        raise lines.error(f"unexpected trailing content {item[1]!r}", item[0])


def parse_dmat_raw(text: str, source: str | None = None) -> tuple[tuple[str, ...], list[list]]:
    lines = _Lines(text, source)
    labels, rows, _ = _dmat_block(lines)
    _expect_end(lines)
    return labels, rows


def parse_dmat(text: str, source: str | None = None, flavor: Flavor | None = None) -> FiniteMetricSpace:
    """A validated space; the flavor is inferred from the entries unless given."""
    lines = _Lines(text, source)
    space = _space_block(lines, flavor)
    _expect_end(lines)
    return space


def parse_graph(text: str, source: str | None = None) -> WeightedGraph:
    lines = _Lines(text, source)
    names: list[str] = []
    edges = []
    for no, line in lines.rest():
        toks = line.split()
        if toks[0] == "v":
            if len(toks) != 2:
                raise lines.error("vertex line is 'v <name>'", no)
            if toks[1] in names:
                raise lines.error(f"duplicate vertex {toks[1]!r}", no)
            names.append(toks[1])
        elif toks[0] == "e":
            if len(toks) not in (3, 4):
                raise lines.error("edge line is 'e <a> <b> [weight]'", no)
            for t in toks[1:3]:
                if t not in names:
                    raise lines.error(f"edge uses undeclared vertex {t!r}", no)
            w = _value(lines, toks[3], no) if len(toks) == 4 else to_xr(1)
            if w is INF:
                raise lines.error("edge weights must be finite", no)
            edges.append((toks[1], toks[2], w, no))
        else:
            raise lines.error(f"unknown line kind {toks[0]!r}", no)
    seen = set()
    for a, b, _, no in edges:
        if a == b:
            raise lines.error(f"self-loop at {a!r}", no)
        key = frozenset((a, b))
        if key in seen:
            raise lines.error(f"duplicate edge {a}-{b}", no)
        seen.add(key)
    return WeightedGraph.build(names, [(a, b, w) for a, b, w, _ in edges])


def _group_block(lines: _Lines) -> FiniteNormedGroup:
    no, text = lines.next("'elements:' line")
    if not text.startswith("elements:"):
        raise lines.error("group block starts with 'elements:'", no)
    elements = text[len("elements:") :].split()
    if not elements:
        raise lines.error("a group needs at least one element", no)
    tno, text = lines.next("'table:' line")
    if text != "table:":
        raise lines.error("expected 'table:'", tno)
    table = []
    for _ in elements:
        rno, row = lines.next("a table row")
        toks = row.split()
        if len(toks) != len(elements):
            raise lines.error(f"table row has {len(toks)} entries, expected {len(elements)}", rno)
        for t in toks:
            if t not in elements:
                raise lines.error(f"unknown element {t!r}", rno)
        table.append(toks)
    nno, text = lines.next("'norm:' line")
    if not text.startswith("norm:"):
        raise lines.error("expected 'norm:'", nno)
    norm = [_value(lines, t, nno) for t in text[len("norm:") :].split()]
    if len(norm) != len(elements):
        raise lines.error(f"{len(norm)} norm values for {len(elements)} elements", nno)
    try:
        return validate_group(elements, table, norm)
    except ValidationError as exc:
        raise ParseError(f"invalid group: {exc}", no, lines.source) from None


def parse_group(text: str, source: str | None = None) -> FiniteNormedGroup:
    lines = _Lines(text, source)
    g = _group_block(lines)
    _expect_end(lines)
    return g


def parse_fibration(text: str, source: str | None = None) -> MetricFibration:
    """Total block, base block, then ``p <total label> <base label>`` lines."""
    lines = _Lines(text, source)
    total = _space_block(lines)
    base = _space_block(lines)
    proj: dict[int, int] = {}
    for no, line in lines.rest():
        toks = line.split()
        if toks[0] != "p" or len(toks) != 3:
            raise lines.error("projection line is 'p <total> <base>'", no)
        if toks[1] not in total.labels:
            raise lines.error(f"unknown total point {toks[1]!r}", no)
        if toks[2] not in base.labels:
            raise lines.error(f"unknown base point {toks[2]!r}", no)
        e = total.index(toks[1])
        if e in proj:
            raise lines.error(f"point {toks[1]!r} projected twice", no)
        proj[e] = base.index(toks[2])
    missing = [total.labels[e] for e in range(len(total)) if e not in proj]
    if missing:
        raise ParseError(f"no projection for {', '.join(missing)}", None, source)
    return MetricFibration(total, base, tuple(proj[e] for e in range(len(total))))


def parse_action(text: str, source: str | None = None) -> MetricAction:
    """Base block, one fiber block per base point, then ``t <x> <y> a->b ...`` lines.

    A missing direction of a pair is the inverse of the given one, diagonal
    transports default to the identity.
    """
    lines = _Lines(text, source)
    base = _space_block(lines)
    n = len(base)
    fibers = tuple(_space_block(lines) for _ in range(n))
    given: dict[tuple[int, int], tuple[int, ...]] = {}
    for no, line in lines.rest():
        toks = line.split()
        if toks[0] != "t" or len(toks) < 3:
            raise lines.error("transport line is 't <x> <y> a->b ...'", no)
        for t in toks[1:3]:
            if t not in base.labels:
                raise lines.error(f"unknown base point {t!r}", no)
        x, y = base.index(toks[1]), base.index(toks[2])
        if (x, y) in given:
            raise lines.error(f"transport {toks[1]} -> {toks[2]} given twice", no)
        fx, fy = fibers[x], fibers[y]
        image: dict[int, int] = {}
        for tok in toks[3:]:
            if "->" not in tok:
                raise lines.error(f"bad map entry {tok!r}", no)
            a, b = tok.split("->", 1)
            if a not in fx.labels or b not in fy.labels:
                raise lines.error(f"map entry {tok!r} names an unknown fiber point", no)
            ia = fx.index(a)
            if ia in image:
                raise lines.error(f"point {a!r} mapped twice", no)
            image[ia] = fy.index(b)
        if sorted(image) != list(range(len(fx))) or sorted(image.values()) != list(range(len(fy))):
            raise lines.error("transport is not a bijection between the fibers", no)
        given[(x, y)] = tuple(image[i] for i in range(len(fx)))
    transport = [[None] * n for _ in range(n)]
    for x in range(n):
        for y in range(n):
            if (x, y) in given:
                transport[x][y] = given[(x, y)]
            elif (y, x) in given:
                back = given[(y, x)]
                inv = [0] * len(back)
                for i, v in enumerate(back):
                    inv[v] = i
                transport[x][y] = tuple(inv)
            elif x == y:
                transport[x][y] = tuple(range(len(fibers[x])))
            else:
                raise ParseError(f"no transport between {base.labels[x]} and {base.labels[y]}", None, source)
    return MetricAction(base, fibers, tuple(tuple(r) for r in transport))


def parse_cocycle(text: str, source: str | None = None) -> Cocycle:
    """Base block, group block, then ``a <i> <j> <k> <element>`` lines.

    Missing values are derived from ``a_ijk a_kjl = a_ijl``; a contradiction or
    a value the given data does not determine is an error.
    """
    lines = _Lines(text, source)
    base = _space_block(lines)
    group = _group_block(lines)
    n = len(base)
    T, inv = group.table, group.inv
    # for each middle index j: potentials c with a_ijk = c_i^-1 c_k
    parent = [[i for i in range(n)] for _ in range(n)]
    pot = [[group.unit] * n for _ in range(n)]

    def rel(j: int, x: int) -> tuple[int, int]:
        """Root of ``x`` and ``p`` with ``c_x = c_root p``."""
        if parent[j][x] == x:
            return x, group.unit
        r, pp = rel(j, parent[j][x])
        pot[j][x] = T[pp][pot[j][x]]
        parent[j][x] = r
        return r, pot[j][x]

    for no, line in lines.rest():
        toks = line.split()
        if toks[0] != "a" or len(toks) != 5:
            raise lines.error("cocycle line is 'a <i> <j> <k> <element>'", no)
        for t in toks[1:4]:
            if t not in base.labels:
                raise lines.error(f"unknown base point {t!r}", no)
        if toks[4] not in group.elements:
            raise lines.error(f"unknown group element {toks[4]!r}", no)
        i, j, k = (base.index(t) for t in toks[1:4])
        g = group.index(toks[4])
        ri, pi = rel(j, i)
        rk, pk = rel(j, k)
        if ri == rk:
            if pk != T[pi][g]:
                raise lines.error(f"value contradicts earlier data at ({toks[1]}, {toks[2]}, {toks[3]})", no)
            continue
        # c_k = c_i g: attach rk below ri with c_rk = c_ri * pi g pk^-1
        parent[j][rk] = ri
        pot[j][rk] = T[T[pi][g]][inv[pk]]
    a = []
    for i in range(n):
        plane = []
        for j in range(n):
            row = []
            ri, pi = rel(j, i)
            for k in range(n):
                rk, pk = rel(j, k)
                if ri != rk:
                    raise ParseError(
                        f"value at ({base.labels[i]}, {base.labels[j]}, {base.labels[k]}) is not determined by the data",
                        None,
                        source,
                    )
                row.append(T[inv[pi]][pk])
            plane.append(tuple(row))
        a.append(tuple(plane))
    return Cocycle(base, group, tuple(a))


def _fmt(v) -> str:
    return "inf" if v is INF else str(v)


def _check_labels(labels) -> None:
    for lbl in labels:
        if not lbl or any(c.isspace() for c in lbl) or "#" in lbl:
            raise ValueError(f"label {lbl!r} cannot be written: no whitespace or '#' allowed")


def dump_dmat(x: FiniteMetricSpace) -> str:
    _check_labels(x.labels)
    out = [str(len(x))]
    if len(x):
        out.append("labels: " + " ".join(x.labels))
    out.extend(" ".join(_fmt(v) for v in row) for row in x.d)
    return "\n".join(out) + "\n"


def dump_graph(g: WeightedGraph) -> str:
    out = [f"v {v}" for v in g.vertices]
    out.extend(f"e {g.vertices[i]} {g.vertices[j]} {w}" for i, j, w in g.edges)
    return "\n".join(out) + "\n"


def dump_group(g: FiniteNormedGroup) -> str:
    out = ["elements: " + " ".join(g.elements), "table:"]
    out.extend(" ".join(g.elements[v] for v in row) for row in g.table)
    out.append("norm: " + " ".join(_fmt(v) for v in g.norm))
    return "\n".join(out) + "\n"


def dump_fibration(f: MetricFibration) -> str:
    out = ["# total", dump_dmat(f.total).rstrip("\n"), "# base", dump_dmat(f.base).rstrip("\n")]
    out.extend(f"p {f.total.labels[e]} {f.base.labels[f.proj[e]]}" for e in range(len(f.total)))
    return "\n".join(out) + "\n"


def dump_action(a: MetricAction) -> str:
    X = a.base
    out = ["# base", dump_dmat(X).rstrip("\n")]
    for x, fib in enumerate(a.fibers):
        out.append(f"# fiber over {X.labels[x]}")
        out.append(dump_dmat(fib).rstrip("\n"))
    for x in range(len(X)):
        for y in range(x + 1, len(X)):
            fx, fy = a.fibers[x], a.fibers[y]
            pairs = " ".join(f"{fx.labels[p]}->{fy.labels[q]}" for p, q in enumerate(a.transport[x][y]))
            out.append(f"t {X.labels[x]} {X.labels[y]} {pairs}".rstrip())
    return "\n".join(out) + "\n"


def dump_cocycle(c: Cocycle) -> str:
    X, G = c.base, c.group
    out = ["# base", dump_dmat(X).rstrip("\n"), "# group", dump_group(G).rstrip("\n")]
    n = len(X)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                out.append(f"a {X.labels[i]} {X.labels[j]} {X.labels[k]} {G.elements[c.a[i][j][k]]}")
    return "\n".join(out) + "\n"


def dump_principal(p: PrincipalAction) -> str:
    X, G = p.base, p.group
    out = []
    for x in range(len(X)):
        for y in range(x + 1, len(X)):
            out.append(f"f {X.labels[x]} {X.labels[y]} {G.elements[p.f[x][y]]}")
    return "\n".join(out) + ("\n" if out else "")


def _read(ref: str) -> tuple[str, str]:
    try:
        return Path(ref).read_text(), ref
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror or exc}", None, ref) from None


def _builtin(ref: str):
    from . import corpus

    name = ref[len(BUILTIN) :]
    try:
        return corpus.get(name)
    except KeyError as exc:
        raise ParseError(str(exc.args[0]), None, ref) from None


def load_space(ref: str, flavor: Flavor | None = None) -> FiniteMetricSpace:
    if ref.startswith(BUILTIN):
        obj = _builtin(ref)
        if isinstance(obj, MetricFibration):
            return obj.total
        if not isinstance(obj, FiniteMetricSpace):
            raise ParseError("builtin is not a metric space", None, ref)
        return obj
    text, src = _read(ref)
    if src.endswith(".wg"):
        from .metric_core import shortest_path_metric

        return shortest_path_metric(parse_graph(text, src))
    return parse_dmat(text, src, flavor)


def load_graph(ref: str) -> WeightedGraph:
    if ref.startswith(BUILTIN):
        from . import corpus

        try:
            return corpus.graph(ref[len(BUILTIN) :])
        except KeyError as exc:
            raise ParseError(str(exc.args[0]), None, ref) from None
    text, src = _read(ref)
    return parse_graph(text, src)


def load_group(ref: str) -> FiniteNormedGroup:
    if ref.startswith(BUILTIN):
        obj = _builtin(ref)
        if not isinstance(obj, FiniteNormedGroup):
            raise ParseError("builtin is not a group", None, ref)
        return obj
    text, src = _read(ref)
    return parse_group(text, src)


def load_fibration(ref: str) -> MetricFibration:
    if ref.startswith(BUILTIN):
        obj = _builtin(ref)
        if not isinstance(obj, MetricFibration):
            raise ParseError("builtin is not a fibration", None, ref)
        return obj
    text, src = _read(ref)
    return parse_fibration(text, src)


def load_action(ref: str) -> MetricAction:
    if ref.startswith(BUILTIN):
        obj = _builtin(ref)
        if not isinstance(obj, MetricAction):
            raise ParseError("builtin is not an action", None, ref)
        return obj
    text, src = _read(ref)
    return parse_action(text, src)


def load_cocycle(ref: str) -> Cocycle:
    text, src = _read(ref)
    return parse_cocycle(text, src)
