from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import space
from metfib import corpus
from metfib.classification import associated_action, random_principal
from metfib.errors import ValidationError
from metfib.fibrations import (
    FibrationMorphism,
    MetricAction,
    MetricFibration,
    action_from_fibration,
    constant_action,
    counit_morphism,
    find_action_isomorphism,
    find_fibration_isomorphism,
    grothendieck,
    hat_normalize,
    is_trivial,
    lift,
    permute_fibers,
    unit_transformation,
    validate_action,
    validate_fibration,
    validate_fibration_morphism,
    validate_transformation,
)
from metfib.metric_core import WeightedGraph, find_isometry, l1_product, shortest_path_metric
from metfib.metric_groups import aut_group

ID2, SW = (0, 1), (1, 0)


def _action(base, fiber, moves):
    """Transports given on pairs ``x < y``; the rest follows by inversion."""
    n = len(base)
    t = [[tuple(range(len(fiber)))] * n for _ in range(n)]
    for (x, y), p in moves.items():
        t[x][y] = p
        inv = [0] * len(p)
        for i, v in enumerate(p):
            inv[v] = i
        t[y][x] = tuple(inv)
    return MetricAction(base, (fiber,) * n, tuple(tuple(r) for r in t))


@st.composite
def random_actions(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = random.Random(seed)
    base = corpus.get(draw(st.sampled_from(["K1", "K2", "K3", "P3", "C4", "C5", "K4"])))
    fiber = corpus.get(draw(st.sampled_from(["K1", "K2", "K3", "P3", "C4"])))
    group, perms = aut_group(fiber)
    act = associated_action(random_principal(base, group, rng), perms, fiber)
    relabel = []
    for _ in range(len(base)):
        r = list(range(len(fiber)))
        rng.shuffle(r)
        relabel.append(tuple(r))
    return permute_fibers(act, relabel)


def test_twisted_action_over_K3_gives_K33():
    k3, k2 = corpus.get("K3"), corpus.get("K2")
    a = validate_action(_action(k3, k2, {(0, 1): SW}))
    f = validate_fibration(grothendieck(a))
    assert find_isometry(f.total, corpus.get("K33")) is not None
    assert not is_trivial(f)


def test_constant_action_gives_product():
    k3, k2 = corpus.get("K3"), corpus.get("K2")
    f = grothendieck(constant_action(k3, k2))
    assert f.total.d == l1_product(k3, k2).d
    assert is_trivial(f)


def test_deficit_violation_is_reported():
    c4, k2 = corpus.get("C4"), corpus.get("K2")
    # 0-1-2 is geodesic in C4, so F_02 must equal F_12 F_01
    a = _action(c4, k2, {(0, 2): SW})
    with pytest.raises(ValidationError) as exc:
        validate_action(a)
    assert exc.value.kind == "deficit"


def test_bad_transports_are_reported():
    k2 = corpus.get("K2")
    base = corpus.get("K2")
    bad_unit = MetricAction(base, (k2, k2), ((SW, ID2), (ID2, ID2)))
    with pytest.raises(ValidationError) as exc:
        validate_action(bad_unit)
    assert exc.value.kind == "unit"
    bad_inv = MetricAction(base, (k2, k2), ((ID2, SW), (ID2, ID2)))
    with pytest.raises(ValidationError) as exc:
        validate_action(bad_inv)
    assert exc.value.kind == "inverse"
    p3 = corpus.get("P3")
    # moves an endpoint of P3 to the middle
    not_iso = MetricAction(base, (p3, p3), (((0, 1, 2), (1, 0, 2)), ((1, 0, 2), (0, 1, 2))))
    with pytest.raises(ValidationError) as exc:
        validate_action(not_iso)
    assert exc.value.kind == "isometry"
    not_bij = MetricAction(base, (k2, k2), ((ID2, (0, 0)), ((0, 0), ID2)))
    with pytest.raises(ValidationError) as exc:
        validate_action(not_bij)
    assert exc.value.kind == "bijection"


def test_cycle_projection_is_not_a_fibration():
    c6 = corpus.get("C6")
    f = MetricFibration(c6, corpus.get("K3"), tuple(i % 3 for i in range(6)))
    with pytest.raises(ValidationError) as exc:
        validate_fibration(f)
    assert exc.value.kind == "no-lift"


def test_lipschitz_violation():
    total = corpus.get("K2")
    f = MetricFibration(total, corpus.get("P3"), (0, 2))
    with pytest.raises(ValidationError) as exc:
        validate_fibration(f)
    assert exc.value.kind == "lipschitz"


def test_non_unique_lift_in_quasi_total():
    from metfib.metric_core import Flavor

    total = space([[0, 1, 1], [1, 0, 0], [1, 0, 0]], flavor=Flavor.QUASI)
    f = MetricFibration(total, corpus.get("K2"), (0, 1, 1))
    with pytest.raises(ValidationError) as exc:
        validate_fibration(f)
    assert exc.value.kind == "non-unique-lift"


def test_lift_in_K33fib():
    f = corpus.get("K33fib")
    validate_fibration(f)
    e = f.total.index("v1|0")
    got = f.total.labels[lift(f, e, f.base.index("v2"))]
    assert got == "v2|1"


@given(random_actions())
@settings(max_examples=40, deadline=None)
def test_grothendieck_output_is_a_fibration(a):
    validate_action(a)
    f = validate_fibration(grothendieck(a))
    back = action_from_fibration(f)
    validate_action(back)
    validate_transformation(unit_transformation(a), isometric=True)
    validate_fibration_morphism(counit_morphism(f), isometric=True)
    assert find_action_isomorphism(a, back) is not None


@given(random_actions())
@settings(max_examples=30, deadline=None)
def test_hat_normalization_is_isomorphic(a):
    h = validate_action(hat_normalize(a))
    x0 = 0
    assert all(h.transport[x0][x] == tuple(range(len(h.fibers[0]))) for x in range(len(a.base)))
    assert find_fibration_isomorphism(grothendieck(a), grothendieck(h)) is not None


def test_isomorphism_search_separates_classes():
    k3, k2 = corpus.get("K3"), corpus.get("K2")
    triv = grothendieck(constant_action(k3, k2))
    twist = grothendieck(_action(k3, k2, {(0, 1): SW}))
    other = grothendieck(_action(k3, k2, {(1, 2): SW}))
    assert find_fibration_isomorphism(triv, twist) is None
    iso = find_fibration_isomorphism(twist, other)
    assert iso is not None
    validate_fibration_morphism(FibrationMorphism(twist, other, iso), isometric=True)


def test_non_isometric_transformation_fails_strict_check():
    k1, k2 = corpus.get("K1"), corpus.get("K2")
    a = constant_action(k1, k2)
    collapse = type(unit_transformation(a))(a, a, ((0, 0),))
    validate_transformation(collapse)
    with pytest.raises(ValidationError):
        validate_transformation(collapse, isometric=True)


def test_is_trivial_rejects_infinite_base():
    g = shortest_path_metric(WeightedGraph.build(["a", "b"], []))
    f = MetricFibration(g, g, (0, 1))
    with pytest.raises(ValueError):
        is_trivial(f)


def test_builtin_fibrations_validate_and_differ():
    k, p = corpus.get("K33fib"), corpus.get("prismfib")
    validate_fibration(k)
    validate_fibration(p)
    assert is_trivial(p) and not is_trivial(k)
