import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conemetric import Cone, DimensionError, InputError

from gen import law_cones, random_member

CONES = law_cones()


def test_orthant_membership():
    c = Cone.orthant(2)
    assert c.contains([0, 0])
    assert c.contains([1, 2])
    assert not c.contains([1, -2])


def test_second_order_membership():
    c = Cone.second_order(3)
    assert c.contains([3, 4, 5])
    assert not c.contains([3, 4, 4.9])


def test_interior():
    c = Cone.orthant(2)
    assert c.in_interior([1, 1])
    assert not c.in_interior([1, 0])
    assert Cone.second_order(3).in_interior([0, 0, 1])
    assert not Cone.second_order(3).in_interior([3, 4, 5])


def test_orders():
    c = Cone.orthant(2)
    assert c.leq([1, 2], [3, 6])
    assert not c.leq([3, 6], [2, 4])
    assert c.lt([1, 2], [3, 6])
    assert not c.lt([1, 2], [1, 2])
    assert c.ll([1, 2], [3, 6])
    assert not c.ll([1, 2], [1, 6])
    for cone in CONES.values():
        x = np.arange(cone.dim, dtype=float)
        assert cone.leq(x, x)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        Cone.orthant(2).contains([1, 2, 3])
    with pytest.raises(DimensionError):
        Cone.second_order(3).leq([1, 2, 3], [1, 2])


def test_polyhedral_identity_matches_orthant(rng):
    P = Cone.polyhedral(np.eye(3))
    O = Cone.orthant(3)
    Y = rng.normal(size=(500, 3))
    np.testing.assert_array_equal(P.contains(Y), O.contains(Y))
    np.testing.assert_array_equal(P.in_interior(Y), O.in_interior(Y))


@pytest.mark.parametrize(
    "A, message",
    [
        ([[1.0, 0.0], [-1.0, 0.0]], "not pointed"),
        ([[1.0, 1.0]], "not pointed"),
        ([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]], "empty interior"),
    ],
)
def test_polyhedral_rejects_bad_cones(A, message):
    with pytest.raises(InputError, match=message):
        Cone.polyhedral(A)


def test_constructor_validation():
    with pytest.raises(InputError):
        Cone("cube", 2)
    with pytest.raises(InputError):
        Cone.second_order(1)
    with pytest.raises(InputError):
        Cone.orthant(0)
    with pytest.raises(InputError):
        Cone.orthant(2, tol_mem=-1.0)


def test_tolerances_are_configurable():
    loose = Cone.orthant(2, tol_mem=1e-3)
    assert loose.contains([-5e-4, 1.0])
    assert not Cone.orthant(2).contains([-5e-4, 1.0])
    strict = Cone.orthant(2, tol_int=0.5)
    assert not strict.in_interior([0.4, 1.0])


@pytest.mark.parametrize("name", sorted(CONES))
def test_json_round_trip(name):
    cone = CONES[name]
    assert Cone.from_json(json.loads(json.dumps(cone.to_json()))) == cone
    tuned = Cone.from_json({**cone.to_json(), "tol_mem": 1e-6})
    assert tuned.tol_mem == 1e-6


@pytest.mark.parametrize("name", sorted(CONES))
def test_interior_point_is_interior(name):
    cone = CONES[name]
    assert cone.in_interior(cone.interior_point())


@pytest.mark.parametrize("name", sorted(CONES))
def test_closure_properties(name, rng):
    cone = CONES[name]
    for _ in range(1000):
        x, y = random_member(cone, rng), random_member(cone, rng)
        lam = rng.exponential(3.0)
        assert cone.contains(x + y)
        assert cone.contains(lam * x)
        assert cone.contains(0 * x)
    e = cone.interior_point()
    for _ in range(1000):
        x = e * rng.uniform(0.1, 2) + 0.01 * random_member(cone, rng)
        y = e * rng.uniform(0.1, 2) + 0.01 * random_member(cone, rng)
        assert cone.in_interior(x) and cone.in_interior(y)
        assert cone.in_interior(x + y)
        assert cone.in_interior(rng.uniform(0.5, 50.0) * x)


@pytest.mark.parametrize("name", sorted(CONES))
def test_pointedness(name, rng):
    cone = CONES[name]
    Y = rng.normal(size=(5000, cone.dim))
    both = cone.contains(Y) & cone.contains(-Y)
    assert not both.any()
    tiny = rng.normal(size=(200, cone.dim)) * cone.tol_mem * 0.1
    both = tiny[cone.contains(tiny) & cone.contains(-tiny)]
    assert np.all(np.linalg.norm(both, axis=-1) <= 10 * cone.tol_mem)


vectors3 = arrays(np.float64, 3, elements=st.floats(-100, 100, allow_nan=False))
increments3 = arrays(np.float64, 3, elements=st.floats(-1e-12, 100, allow_nan=False))


@settings(max_examples=300, deadline=None)
@given(x=vectors3, p=increments3, q=increments3)
def test_order_transitive_with_slack(x, p, q):
    cone = Cone.orthant(3)
    y, z = x + p, x + p + q
    assert cone.leq(x, x)
    if cone.leq(x, y) and cone.leq(y, z):
        lax = Cone.orthant(3, tol_mem=2 * cone.tol_mem)
        assert lax.leq(x, z)
