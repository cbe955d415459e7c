from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metfib import corpus
from metfib.classification import (
    Holonomy,
    PrincipalAction,
    classify_fibrations,
    count_principal_solutions,
    enumerate_principal,
    fibration_classes,
    gauge_normalize,
    holonomy,
    principal_from_values,
    principal_to_action,
    principal_torsor,
    random_principal,
    unbounded_elements,
    validate_principal,
    validate_torsor,
    validate_torsor_morphism,
)
from metfib.errors import ValidationError
from metfib.fibrations import find_fibration_isomorphism, grothendieck, validate_action
from metfib.metric_core import INF, Flavor, WeightedGraph, shortest_path_metric
from metfib.metric_groups import cyclic_group

# Counts from an exhaustive search over all transport tables, quotiented by
# every gauge transformation f(x, y) -> g_y f(x, y) g_x^-1.
FROZEN_CLASS_COUNTS = {
    ("C3", "Z2"): 2, ("C3", "Z3"): 3, ("C3", "S3"): 3,
    ("C4", "Z2"): 1, ("C4", "Z3"): 1, ("C4", "S3"): 1,
    ("C5", "Z2"): 2, ("C5", "Z3"): 3, ("C5", "S3"): 3,
    ("K3", "Z2"): 2, ("K3", "Z3"): 3, ("K3", "S3"): 3,
    ("K4", "Z2"): 8, ("K4", "Z3"): 27, ("K4", "S3"): 49,
}  # fmt: skip


def brute_force_classes(base, group) -> int:
    """Orbit count of valid unnormalized transport tables under the full gauge group."""
    n = len(base)
    pairs = [(x, y) for x in range(n) for y in range(x + 1, n)]
    T, inv = group.table, group.inv
    valid = []
    for vals in itertools.product(range(len(group)), repeat=len(pairs)):
        f = [[group.unit] * n for _ in range(n)]
        for (x, y), g in zip(pairs, vals):
            f[x][y], f[y][x] = g, inv[g]
        try:
            validate_principal(PrincipalAction(base, group, tuple(map(tuple, f))))
        except ValidationError:
            continue
        valid.append(vals)
    seen, orbits = set(), 0
    for v in valid:
        if v in seen:
            continue
        orbits += 1
        for gs in itertools.product(range(len(group)), repeat=n):
            seen.add(tuple(T[T[gs[y]][g]][inv[gs[x]]] for (x, y), g in zip(pairs, v)))
    return orbits


@pytest.mark.parametrize("bname,gname", [("K3", "Z2"), ("K3", "Z3"), ("K3", "S3"), ("C4", "Z2"), ("C3", "Z3")])
def test_enumeration_matches_brute_force(bname, gname):
    base, group = corpus.get(bname), corpus.get(gname)
    assert len(enumerate_principal(base, group)) == brute_force_classes(base, group)


@pytest.mark.parametrize("key", sorted(FROZEN_CLASS_COUNTS))
def test_enumeration_matches_frozen_counts(key):
    base, group = corpus.get(key[0]), corpus.get(key[1])
    assert len(enumerate_principal(base, group)) == FROZEN_CLASS_COUNTS[key]


def test_enumeration_output_is_deterministic_and_trivial_first():
    base, group = corpus.get("K4"), corpus.get("S3")
    a = enumerate_principal(base, group)
    b = enumerate_principal(base, group, threads=4)
    assert [p.f for p in a] == [p.f for p in b]
    assert all(v == group.unit for v in a[0].values())
    for p in a:
        validate_principal(p)


def test_solution_count_before_quotient():
    # over K3 with Z2 the single free coordinate is unconstrained
    assert count_principal_solutions(corpus.get("K3"), corpus.get("Z2")) == 2
    # C4 is "flat": the free coordinates are forced
    assert count_principal_solutions(corpus.get("C4"), corpus.get("S3")) == 1


def test_deficit_violation_in_principal_action():
    c4, z2 = corpus.get("C4"), corpus.get("Z2")
    p = principal_from_values(c4, z2, (1, 0, 0))
    with pytest.raises(ValidationError) as exc:
        validate_principal(p)
    assert exc.value.kind == "deficit"


def test_principal_shape_errors():
    k2, z2 = corpus.get("K2"), corpus.get("Z2")
    with pytest.raises(ValidationError) as exc:
        validate_principal(PrincipalAction(k2, z2, ((1, 0), (0, 0))))
    assert exc.value.kind == "unit"
    z3 = corpus.get("Z3")
    with pytest.raises(ValidationError) as exc:
        validate_principal(PrincipalAction(k2, z3, ((0, 1), (1, 0))))
    assert exc.value.kind == "inverse"


@st.composite
def principals(draw):
    base = corpus.get(draw(st.sampled_from(["K2", "K3", "K4", "P3", "C4", "C5", "C6", "prism"])))
    group = corpus.get(draw(st.sampled_from(["Z2", "Z3", "Z4", "S3", "V4"])))
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    p = random_principal(base, group, rng)
    # undo the normalization with a random gauge
    gs = [rng.randrange(len(group)) for _ in range(len(base))]
    T, inv = group.table, group.inv
    n = len(base)
    f = tuple(tuple(T[T[gs[y]][p.f[x][y]]][inv[gs[x]]] for y in range(n)) for x in range(n))
    return PrincipalAction(base, group, f)


@given(principals())
@settings(max_examples=50, deadline=None)
def test_gauge_normalization_properties(p):
    validate_principal(p)
    h = validate_principal(gauge_normalize(p))
    assert all(h.f[0][x] == p.group.unit for x in range(len(p.base)))
    # isomorphic torsors
    assert find_fibration_isomorphism(grothendieck(principal_to_action(p)), grothendieck(principal_to_action(h))) is not None


@given(principals(), st.data())
@settings(max_examples=50, deadline=None)
def test_holonomy_is_conjugation_invariant_under_gauge(p, data):
    n = len(p.base)
    if n < 2:
        return
    loop = [0] + data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=5)) + [0]
    G = p.group
    h = holonomy(p, loop)
    g0 = data.draw(st.integers(0, len(G) - 1))
    T, inv = G.table, G.inv
    gs = [data.draw(st.integers(0, len(G) - 1)) for _ in range(n)]
    gs[0] = g0
    q = PrincipalAction(p.base, G, tuple(tuple(T[T[gs[y]][p.f[x][y]]][inv[gs[x]]] for y in range(n)) for x in range(n)))
    assert holonomy(q, loop) == T[T[g0][h]][inv[g0]]


def test_holonomy_cache_and_basepoint():
    p = enumerate_principal(corpus.get("K3"), corpus.get("Z2"))[1]
    hol = Holonomy(p)
    assert hol((0, 1, 2, 0)) == 1 and hol((0, 1, 2, 0)) == 1
    assert hol((0, 1, 0)) == 0
    with pytest.raises(ValueError):
        hol((1, 2, 1))
    with pytest.raises(ValueError):
        holonomy(p, (0, 1))


@given(principals())
@settings(max_examples=30, deadline=None)
def test_principal_torsor_is_valid(p):
    t = validate_torsor(principal_torsor(p))
    validate_torsor_morphism(t, t, tuple(range(len(t.fibration.total))))


def test_torsor_detects_broken_action():
    p = enumerate_principal(corpus.get("K2"), corpus.get("Z2"))[0]
    t = principal_torsor(p)
    # the generator jumps to the other fiber
    jump = type(t)(t.fibration, t.group, tuple((q, (q + 2) % 4) for q in range(4)))
    with pytest.raises(ValidationError) as exc:
        validate_torsor(jump)
    assert exc.value.kind == "fiber-preservation"
    stuck = type(t)(t.fibration, t.group, tuple((q, q) for q in range(4)))
    with pytest.raises(ValidationError) as exc:
        validate_torsor(stuck)
    assert exc.value.kind == "free-transitive"


def test_torsor_morphism_must_be_equivariant():
    p = enumerate_principal(corpus.get("K2"), corpus.get("Z3"))[0]
    t = principal_torsor(p)
    # swap two points of one fiber
    phi = (0, 2, 1, 3, 4, 5)
    with pytest.raises(ValidationError) as exc:
        validate_torsor_morphism(t, t, phi)
    assert exc.value.kind == "equivariance"


def test_fibration_classes_over_K3_with_fiber_K2():
    classes = fibration_classes(corpus.get("K3"), corpus.get("K2"))
    assert [c.trivial for c in classes] == [True, False]
    for c in classes:
        validate_action(c.action)
    # flipping P3 moves its ends by 2, more than any triangle of K3 allows
    assert len(classify_fibrations(corpus.get("K3"), corpus.get("P3"))) == 1


def test_fibration_classes_fiber_K3_over_K3():
    # fiber K3 has automorphism group S3 of sup norm 1
    assert len(fibration_classes(corpus.get("K3"), corpus.get("K3"))) == 3


def test_classification_rejects_bad_bases():
    ext = shortest_path_metric(WeightedGraph.build(["a", "b"], []))
    with pytest.raises(ValueError):
        enumerate_principal(ext, corpus.get("Z2"))
    quasi = shortest_path_metric(WeightedGraph.build(["a", "b"], [("a", "b", 0)]))
    assert quasi.flavor is Flavor.QUASI
    with pytest.raises(ValueError):
        enumerate_principal(quasi, corpus.get("Z2"))


def test_infinite_norm_elements_never_appear():
    g = cyclic_group(2, [0, INF])
    assert unbounded_elements(g) == [1]
    reps = enumerate_principal(corpus.get("K4"), g)
    assert len(reps) == 1


def test_single_point_base():
    reps = enumerate_principal(corpus.get("K1"), corpus.get("S3"))
    assert len(reps) == 1
