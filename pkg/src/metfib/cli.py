"""Command-line interface.

Exit codes: 0 success, 1 validation failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import corpus
from .cech import enumerate_cocycle_classes
from .classification import enumerate_principal, fibration_classes, holonomy, unbounded_elements, validate_principal
from .errors import ParseError, ValidationError
from .fibrations import MetricFibration, grothendieck, is_trivial, validate_action, validate_fibration
from .io import (
    dump_dmat,
    dump_fibration,
    dump_graph,
    dump_group,
    load_action,
    load_fibration,
    load_graph,
    load_group,
    load_space,
    parse_dmat_raw,
    _infer_flavor,
    _read,
)
from .magnitude import MagnitudeError, check_product, magnitude_at
from .metric_groups import FiniteNormedGroup
from .metric_core import Flavor, find_isometry, shortest_path_metric, to_xr, validate_space
from .pi1 import EdgePathGroup, abelianization, coline_complex, is_trivial_group, loop_norm_upper_bound

DEFAULT_Q = ("1/5", "1/3", "1/2", "2/3", "4/5")


class Report:
    """Ordered ``key: value`` entries rendered as aligned text or as plain ``key: value`` lines."""

    def __init__(self) -> None:
        self.entries: list[tuple[str, str]] = []
        self.blocks: list[str] = []

    def add(self, key: str, value) -> None:
        self.entries.append((key, str(value)))

    def block(self, text: str) -> None:
        self.blocks.append(text.rstrip("\n"))

    def render(self, fmt: str) -> str:
        out = []
        if fmt == "kv":
            out.extend(f"{k}: {v}" for k, v in self.entries)
        else:
            width = max((len(k) for k, _ in self.entries), default=0)
            out.extend(f"{k.ljust(width)}  {v}" for k, v in self.entries)
        out.extend(self.blocks)
        return "\n".join(out) + "\n"


def _labels(space, idx) -> str:
    return "(" + ",".join(space.labels[i] for i in idx) + ")"


def _point(space, label: str) -> int:
    try:
        return space.index(label)
    except KeyError:
        raise ParseError(f"unknown point {label!r}") from None


def cmd_check_metric(args, rep: Report) -> int:
    if args.file.startswith("builtin:"):
        space = load_space(args.file)
        labels, rows = space.labels, [list(r) for r in space.d]
    else:
        text, src = _read(args.file)
        labels, rows = parse_dmat_raw(text, src)
    flavor = {"metric": Flavor.METRIC, "quasi": Flavor.QUASI, "extended": Flavor.EXTENDED}.get(args.flavor)
    if flavor is None:
        flavor = _infer_flavor(rows)
    space = validate_space(rows, flavor, labels)
    rep.add("valid", "yes")
    rep.add("flavor", space.flavor.value)
    rep.add("points", len(space))
    rep.add("diameter", space.diameter)
    return 0


def cmd_graph_metric(args, rep: Report) -> int:
    g = load_graph(args.file)
    space = shortest_path_metric(g)
    rep.add("vertices", len(g.vertices))
    rep.add("edges", len(g.edges))
    rep.add("flavor", space.flavor.value)
    rep.block(dump_dmat(space))
    return 0


def cmd_check_fibration(args, rep: Report) -> int:
    f = validate_fibration(load_fibration(args.file))
    rep.add("valid", "yes")
    rep.add("total points", len(f.total))
    rep.add("base points", len(f.base))
    for x in range(len(f.base)):
        rep.add(f"fiber {f.base.labels[x]}", " ".join(f.total.labels[e] for e in f.fiber(x)))
    if f.base.is_finite:
        rep.add("trivial", "yes" if is_trivial(f) else "no")
    return 0


def cmd_check_action(args, rep: Report) -> int:
    a = validate_action(load_action(args.file))
    rep.add("valid", "yes")
    rep.add("base points", len(a.base))
    rep.add("fiber sizes", " ".join(str(len(f)) for f in a.fibers))
    return 0


def cmd_grothendieck(args, rep: Report) -> int:
    a = validate_action(load_action(args.file))
    f = validate_fibration(grothendieck(a))
    rep.add("total points", len(f.total))
    rep.block(dump_fibration(f))
    return 0


def _builtin_match(total) -> str | None:
    for name in corpus.SPACES:
        cand = corpus.get(name)
        if len(cand) == len(total) and find_isometry(total, cand) is not None:
            return name
    return None


def cmd_classify(args, rep: Report) -> int:
    base = load_space(args.base)
    fiber = load_space(args.fiber)
    classes = fibration_classes(base, fiber, threads=args.threads)
    n = len(classes)
    rep.add("classes", n)
    G = classes[0].principal.group if classes else None
    if G is not None and unbounded_elements(G):
        rep.add("unbounded isometries pruned", len(unbounded_elements(G)))
    epg = EdgePathGroup(coline_complex(base), 0)
    loops = epg.generator_loops()

    for k, c in enumerate(classes):
        tag = "trivial" if c.trivial else "nontrivial"
        match = _builtin_match(c.fibration.total)
        rep.add(f"class {k}", tag + (f" (isometric to {match})" if match else ""))
        hol = [
            f"{base.labels[u]}-{base.labels[v]}={G.elements[holonomy(c.principal, loop)]}"
            for loop, (u, v) in zip(loops, epg.pairs)
        ]
        rep.add(f"class {k} holonomy", " ".join(hol) if hol else "-")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for k, c in enumerate(classes):
            (out / f"class_{k}.fib").write_text(dump_fibration(c.fibration))
        rep.add("written", f"{n} files to {out}")
    return 0


def cmd_classify_principal(args, rep: Report) -> int:
    base = load_space(args.base)
    group = load_group(args.group)
    reps = enumerate_principal(base, group, threads=args.threads)
    rep.add("classes", len(reps))
    for k, p in enumerate(reps):
        validate_principal(p)
        pairs = [
            f"{base.labels[b]}-{base.labels[c]}={group.elements[p.f[b][c]]}"
            for b in range(len(base))
            for c in range(b + 1, len(base))
            if p.f[b][c] != group.unit
        ]
        rep.add(f"class {k}", " ".join(pairs) if pairs else "trivial")
    return 0


def _parse_loop(space, text: str) -> list[int]:
    return [_point(space, t) for t in text.replace(",", " ").split()]


def cmd_pi1(args, rep: Report) -> int:
    base = load_space(args.base)
    x0 = _point(base, args.basepoint) if args.basepoint else 0
    cx = coline_complex(base)
    epg = EdgePathGroup(cx, x0)
    pres = epg.presentation
    rep.add("basepoint", base.labels[x0])
    rep.add("filled triangles", len(cx.triangles))
    rep.add("generators", len(pres.generators))
    rep.add("relators", len(pres.relators))
    rep.add("presentation", pres)
    rep.add("abelianization", abelianization(pres))
    rep.add("triviality", is_trivial_group(pres, args.work_bound))
    for text in args.loop or ():
        loop = _parse_loop(base, text)
        if not loop or loop[0] != x0 or loop[-1] != x0:
            raise ParseError(f"loop {text!r} must start and end at {base.labels[x0]}")
        rep.add(f"norm bound {_labels(base, loop)}", loop_norm_upper_bound(base, loop, args.bound))
    return 0


def cmd_cech(args, rep: Report) -> int:
    base = load_space(args.base)
    group = load_group(args.group)
    cocycles = enumerate_cocycle_classes(base, group)
    principal = enumerate_principal(base, group, threads=args.threads)
    rep.add("cocycle classes", len(cocycles))
    rep.add("principal classes", len(principal))
    rep.add("agree", "yes" if len(cocycles) == len(principal) else "no")
    n = len(base)
    for k, c in enumerate(cocycles):
        vals = [
            f"a({base.labels[0]},{base.labels[j]},{base.labels[i]})={group.elements[c.a[0][j][i]]}"
            for i in range(1, n)
            for j in range(i + 1, n)
            if c.a[0][j][i] != group.unit
        ]
        rep.add(f"class {k}", " ".join(vals) if vals else "trivial")
    return 0 if len(cocycles) == len(principal) else 1


def cmd_magnitude(args, rep: Report) -> int:
    qs = [to_xr(q) for q in (args.q or DEFAULT_Q)]
    if args.check_product:
        if len(args.files) != 3:
            raise ParseError("--check-product takes exactly three inputs: TOTAL BASE FIBER")
        total, base, fiber = (load_space(f) for f in args.files)
        result = check_product(total, base, fiber, qs)
        for line in result.lines():
            rep.block(line)
        rep.add("product identity", "holds" if result.ok else "fails")
        return 0 if result.ok else 1
    if len(args.files) != 1:
        raise ParseError("magnitude takes one input (or three with --check-product)")
    space = load_space(args.files[0])
    for q in qs:
        try:
            rep.add(f"q={q}", magnitude_at(space, q))
        except MagnitudeError as exc:
            rep.add(f"q={q}", f"undefined ({exc})")
    return 0


def cmd_builtin(args, rep: Report) -> int:
    name = args.name
    try:
        obj = corpus.get(name)
    except KeyError as exc:
        raise ParseError(str(exc.args[0])) from None

    if isinstance(obj, FiniteNormedGroup):
        rep.add("kind", "group")
        rep.block(dump_group(obj))
    elif isinstance(obj, MetricFibration):
        validate_fibration(obj)
        rep.add("kind", "fibration")
        rep.add("trivial", "yes" if is_trivial(obj) else "no")
        rep.block(dump_fibration(obj))
    else:
        rep.add("kind", "space")
        rep.block(dump_graph(corpus.graph(name)))
        rep.block(dump_dmat(obj))
    return 0


def build_parser() -> argparse.ArgumentParser:
    # accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "kv"), default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="metfib", description="Metric fibrations over finite metric spaces.")
    p.add_argument("--format", choices=("text", "kv"), default="text")
    p.add_argument("--threads", type=int, default=1)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help, parents=[common])

    s = add("check-metric", "validate a distance matrix")
    s.add_argument("file")
    s.add_argument("--flavor", choices=("auto", "metric", "quasi", "extended"), default="auto")
    s.set_defaults(func=cmd_check_metric)

    s = add("graph-metric", "shortest-path metric of a weighted graph")
    s.add_argument("file")
    s.set_defaults(func=cmd_graph_metric)

    s = add("check-fibration", "validate a fibration")
    s.add_argument("file")
    s.set_defaults(func=cmd_check_fibration)

    s = add("check-action", "validate a metric action")
    s.add_argument("file")
    s.set_defaults(func=cmd_check_action)

    s = add("grothendieck", "total space of a metric action")
    s.add_argument("file")
    s.set_defaults(func=cmd_grothendieck)

    s = add("classify", "fibrations with a given fiber")
    s.add_argument("--base", required=True)
    s.add_argument("--fiber", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_classify)

    s = add("classify-principal", "principal actions with a given group")
    s.add_argument("--base", required=True)
    s.add_argument("--group", required=True)
    s.set_defaults(func=cmd_classify_principal)

    s = add("pi1", "fundamental metric group")
    s.add_argument("--base", required=True)
    s.add_argument("--basepoint")
    s.add_argument("--loop", action="append", help="comma separated point labels")
    s.add_argument("--bound", type=int, default=8, help="longest loop (entries) visited by the norm search")
    s.add_argument("--work-bound", type=int, default=100_000)
    s.set_defaults(func=cmd_pi1)

    s = add("cech", "cocycle classes")
    s.add_argument("--base", required=True)
    s.add_argument("--group", required=True)
    s.set_defaults(func=cmd_cech)

    s = add("magnitude", "magnitude at rational q")
    s.add_argument("files", nargs="+")
    s.add_argument("--q", action="append")
    s.add_argument("--check-product", action="store_true")
    s.set_defaults(func=cmd_magnitude)

    s = add("builtin", "print a builtin example")
    s.add_argument("name", choices=corpus.names())
    s.set_defaults(func=cmd_builtin)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    rep = Report()
    try:
        code = args.func(args, rep)
    except ValidationError as exc:
        rep.add("valid", "no")
        rep.add("violation", exc.kind)
        rep.add("detail", exc.message)
        if exc.witness:
            rep.add("witness", " ".join(str(w) for w in exc.witness))
        sys.stdout.write(rep.render(args.format))
        return 1
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, MagnitudeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(rep.render(args.format))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
