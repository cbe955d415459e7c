from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import space
from metfib import corpus
from metfib.cech import alpha, local_section, validate_cocycle
from metfib.classification import associated_action, enumerate_principal, principal_torsor, random_principal
from metfib.errors import ParseError
from metfib.fibrations import validate_action, validate_fibration
from metfib.io import (
    dump_action,
    dump_cocycle,
    dump_dmat,
    dump_fibration,
    dump_graph,
    dump_group,
    load_fibration,
    load_group,
    load_space,
    parse_action,
    parse_cocycle,
    parse_dmat,
    parse_fibration,
    parse_graph,
    parse_group,
)
from metfib.metric_core import INF, Flavor
from metfib.metric_groups import aut_group


def test_dmat_with_comments_labels_and_inf():
    text = "# two components\n3\nlabels: a b c\n0 1 inf\n1 0 inf  # row two\ninf inf 0\n"
    x = parse_dmat(text)
    assert x.labels == ("a", "b", "c")
    assert x.flavor is Flavor.EXTENDED and x.d[0][2] is INF
    assert parse_dmat(dump_dmat(x)) == x


def test_dmat_rational_entries():
    x = parse_dmat("2\n0 1/2\n1/2 0\n")
    assert x.d[0][1].denominator == 2


@pytest.mark.parametrize(
    "text,line",
    [
        ("x\n", 1),
        ("2\n0 1\n1\n", 3),
        ("2\n0 -1\n-1 0\n", 2),
        ("2\nlabels: a\n0 1\n1 0\n", 2),
        ("2\n0 1\n1 0\nextra\n", 4),
        ("2\n0 1\n", 2),
        ("3\n0 5 10\n5 0 1\n10 1 0\n", 1),
    ],
)
def test_dmat_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as exc:
        parse_dmat(text, "m.dmat")
    assert exc.value.line == line
    assert "m.dmat" in str(exc.value)


def test_graph_format():
    g = parse_graph("v a\nv b\nv c\ne a b\ne b c 3/2\n")
    assert [w for _, _, w in g.edges] == [1, 1.5]
    assert parse_graph(dump_graph(g)) == g
    for bad, line in [("v a\nv a\n", 2), ("v a\ne a b\n", 2), ("v a\nv b\ne a b\ne b a\n", 4), ("q a\n", 1), ("v a\ne a a\n", 2)]:
        with pytest.raises(ParseError) as exc:
            parse_graph(bad)
        assert exc.value.line == line


@pytest.mark.parametrize("name", corpus.GROUPS)
def test_group_round_trip(name):
    g = corpus.get(name)
    assert parse_group(dump_group(g)) == g


def test_group_errors():
    with pytest.raises(ParseError) as exc:
        parse_group("elements: e a\ntable:\ne a\na a\nnorm: 0 1\n")
    assert "invalid group" in str(exc.value)
    with pytest.raises(ParseError) as exc:
        parse_group("elements: e a\ntable:\ne a\na x\nnorm: 0 1\n")
    assert exc.value.line == 4


@pytest.mark.parametrize("name", corpus.FIBRATIONS)
def test_fibration_round_trip(name):
    f = corpus.get(name)
    g = parse_fibration(dump_fibration(f))
    assert g == f
    validate_fibration(g)


def test_fibration_missing_projection():
    text = "2\nlabels: a b\n0 1\n1 0\n1\nlabels: x\n0\np a x\n"
    with pytest.raises(ParseError) as exc:
        parse_fibration(text)
    assert "b" in str(exc.value)


@given(st.integers(0, 2**32 - 1), st.sampled_from(["K2", "K3", "C4", "P3"]), st.sampled_from(["K2", "K3", "P3"]))
@settings(max_examples=25, deadline=None)
def test_action_round_trip(seed, bname, fname):
    base, fiber = corpus.get(bname), corpus.get(fname)
    group, perms = aut_group(fiber)
    a = associated_action(random_principal(base, group, random.Random(seed)), perms, fiber)
    b = parse_action(dump_action(a))
    assert b == a
    validate_action(b)


def test_action_missing_transport():
    text = "2\nlabels: x y\n0 1\n1 0\n1\nlabels: p\n0\n1\nlabels: q\n0\n"
    with pytest.raises(ParseError) as exc:
        parse_action(text)
    assert "no transport" in str(exc.value)
    with pytest.raises(ParseError) as exc:
        parse_action(text + "t x y p->z\n")
    assert exc.value.line == 11


def test_cocycle_round_trip_and_sparse_input():
    t = principal_torsor(enumerate_principal(corpus.get("K3"), corpus.get("S3"))[1])
    c = alpha(t, local_section(t))
    assert parse_cocycle(dump_cocycle(c)).a == c.a
    # a_0jk alone determines everything
    head = dump_cocycle(c).split("\na ")[0]
    X, G = c.base, c.group
    lines = [f"a {X.labels[0]} {X.labels[j]} {X.labels[k]} {G.elements[c.a[0][j][k]]}" for j in range(3) for k in range(3)]
    sparse = parse_cocycle(head + "\n" + "\n".join(lines) + "\n")
    assert sparse.a == c.a
    validate_cocycle(sparse)


def test_cocycle_contradiction_and_gaps():
    t = principal_torsor(enumerate_principal(corpus.get("K2"), corpus.get("Z2"))[0])
    head = dump_cocycle(alpha(t, local_section(t))).split("\na ")[0]
    with pytest.raises(ParseError) as exc:
        parse_cocycle(head + "\na v1 v1 v2 0\na v2 v1 v1 1\n")
    assert "contradicts" in str(exc.value)
    with pytest.raises(ParseError) as exc:
        parse_cocycle(head + "\na v1 v1 v2 0\n")
    assert "not determined" in str(exc.value)


def test_loaders(tmp_path):
    assert load_space("builtin:C5") == corpus.get("C5")
    assert load_space("builtin:K33fib") == corpus.get("K33fib").total
    assert load_group("builtin:S3") == corpus.get("S3")
    assert load_fibration("builtin:prismfib") == corpus.get("prismfib")
    with pytest.raises(ParseError):
        load_space("builtin:nope")
    with pytest.raises(ParseError):
        load_group("builtin:K3")
    with pytest.raises(ParseError):
        load_space(str(tmp_path / "missing.dmat"))
    wg = tmp_path / "tri.wg"
    wg.write_text("v a\nv b\nv c\ne a b\ne b c\n")
    assert load_space(str(wg)).d[0][2] == 2


def test_labels_that_cannot_round_trip_are_refused():
    with pytest.raises(ValueError):
        dump_dmat(space([[0]], labels=["a b"]))
