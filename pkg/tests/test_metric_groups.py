from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metfib import corpus
from metfib.errors import ValidationError
from metfib.metric_core import INF
from metfib.metric_groups import (
    aut_group,
    canonical_conjugate,
    conjugacy_partition,
    cyclic_group,
    metric_from_norm,
    norm_from_metric,
    validate_group,
)


def test_cyclic_group_default_norm():
    g = cyclic_group(5)
    assert g.norm == (0, 1, 2, 2, 1)
    assert g.mul(2, 4) == 1
    assert g.inv[2] == 3
    assert g.is_abelian()


def test_aut_group_of_K3_is_S3_with_sup_norm():
    g, perms = aut_group(corpus.get("K3"))
    assert len(g) == 6
    assert not g.is_abelian()
    assert perms[g.unit] == (0, 1, 2)
    assert sorted(g.norm) == [0, 1, 1, 1, 1, 1]
    for f in range(6):
        for h in range(6):
            comp = tuple(perms[f][perms[h][i]] for i in range(3))
            assert perms[g.table[f][h]] == comp


def test_aut_group_of_C4_sup_norm():
    g, perms = aut_group(corpus.get("C4"))
    assert len(g) == 8
    # the antipodal rotation moves every vertex by 2
    anti = perms.index((2, 3, 0, 1))
    assert g.norm[anti] == 2


@pytest.mark.parametrize(
    "norm,kind",
    [
        ([1, 1, 1], "norm-unit"),
        ([0, 0, 1], "norm-positive"),
        ([0, 1, 2], "norm-inverse"),
        ([0, 1, 3, 1], "norm-subadditive"),
    ],
)
def test_bad_norms_are_rejected(norm, kind):
    n = len(norm)
    table = [[(a + b) % n for b in range(n)] for a in range(n)]
    with pytest.raises(ValidationError) as exc:
        validate_group([str(i) for i in range(n)], table, norm)
    assert exc.value.kind == kind


def test_non_conjugation_invariant_norm_is_rejected():
    g = corpus.get("S3")
    norm = [0 if x == g.unit else 1 for x in range(6)]
    # give one transposition a larger norm than its conjugates
    t = next(x for x in range(6) if x != g.unit and g.inv[x] == x)
    norm[t] = 2
    with pytest.raises(ValidationError) as exc:
        validate_group(g.elements, g.table, norm)
    assert exc.value.kind == "norm-conjugation"


@pytest.mark.parametrize(
    "table,kind",
    [
        ([[0, 1], [1, 1]], "inverse"),
        ([[1, 0], [0, 0]], "unit"),
        ([[0, 1], [1, 2]], "closure"),
    ],
)
def test_bad_tables_are_rejected(table, kind):
    with pytest.raises(ValidationError) as exc:
        validate_group(["a", "b"], table, [0, 1])
    assert exc.value.kind == kind


def test_non_associative_table_is_rejected():
    # a Latin square with unit 0 that is not a group
    t = [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]]
    with pytest.raises(ValidationError) as exc:
        validate_group(list("abcde"), t, [0, 1, 1, 1, 1])
    assert exc.value.kind == "associativity"


@pytest.mark.parametrize("name", corpus.GROUPS)
def test_round_trip_on_builtins(name):
    g = corpus.get(name)
    h = norm_from_metric(metric_from_norm(g), g.table)
    assert h.norm == g.norm
    assert h.elements == g.elements


@given(st.integers(1, 9), st.data())
@settings(max_examples=60, deadline=None)
def test_round_trip_on_random_cyclic_norms(n, data):
    # any symmetric subadditive weighting of Z/n is a valid norm on an abelian group
    half = [data.draw(st.integers(1, 4)) for _ in range(n // 2)]
    norm = [0] * n
    for k in range(1, n):
        norm[k] = half[min(k, n - k) - 1]
    try:
        g = cyclic_group(n, norm)
    except ValidationError as exc:
        assert exc.kind == "norm-subadditive"
        return
    x = metric_from_norm(g)
    for a, b, c in itertools.product(range(n), repeat=3):
        assert x.d[g.table[c][a]][g.table[c][b]] == x.d[a][b]
        assert x.d[a][c] <= x.d[a][b] + x.d[b][c]
    assert norm_from_metric(x, g.table).norm == g.norm


def test_norm_from_metric_rejects_non_invariant_metric():
    g = cyclic_group(4)
    from conftest import space

    # a path metric on Z/4 that ignores the group structure
    x = space([[0, 1, 2, 3], [1, 0, 1, 2], [2, 1, 0, 1], [3, 2, 1, 0]], labels=g.elements)
    with pytest.raises(ValidationError) as exc:
        norm_from_metric(x, g.table)
    assert exc.value.kind == "left-invariance"


def test_infinite_norm_gives_extended_metric():
    g = cyclic_group(2, [0, INF])
    assert metric_from_norm(g).flavor.value == "extended"


def test_conjugacy_partition_of_S3():
    g = corpus.get("S3")
    classes = conjugacy_partition(g, [(x,) for x in range(6)])
    assert sorted(len(c) for c in classes) == [1, 2, 3]
    for c in classes:
        assert all(canonical_conjugate(g, t) == c[0] for t in c)
    pairs = conjugacy_partition(g, itertools.product(range(6), repeat=2))
    # orbits of S3 acting on S3 x S3 by simultaneous conjugation
    assert sum(len(c) for c in pairs) == 36 and len(pairs) == 11
