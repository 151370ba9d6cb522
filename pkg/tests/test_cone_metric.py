import itertools
import json

import numpy as np
import pytest

from conemetric import (
    Cone,
    FiniteConeSpace,
    InputError,
    ScalarizationContext,
    SpaceFormatError,
    all_pass,
    load_space,
    reduce,
    save_space,
    scalar_convergence_monitor,
    validate_cms,
    validate_rcms,
    validate_scalar_metric,
    validate_scalar_rectangular,
)

import gen


def by_axiom(reports):
    return {r.axiom: r for r in reports}


def brute_rc3_failures(D, leq):
    """Reference loop: p(x,y) <= p(x,z)+p(z,w)+p(w,y), z != w, {z,w} disjoint from {x,y}."""
    n = len(D)
    out = []
    for x, y, z, w in itertools.product(range(n), repeat=4):
        if z == w or z in (x, y) or w in (x, y):
            continue
        if not leq(D[x][y], D[x][z] + D[z][w] + D[w][y]):
            out.append((x, y, z, w))
    return out


def test_example_space_is_rectangular_but_not_cms(example_space):
    cms = by_axiom(validate_cms(example_space))
    assert [cms[a].status for a in ("M1", "M2", "M3")] == ["pass"] * 3
    m4 = cms["M4"]
    assert m4.status == "fail"
    assert m4.witnesses[0].points == ("1", "3", "2")
    assert m4.witnesses[0].lhs == (3.0, 6.0)
    assert m4.witnesses[0].rhs == (2.0, 4.0)
    assert [w.points for w in m4.witnesses] == [("1", "3", "2"), ("2", "3", "1")]
    assert all_pass(validate_rcms(example_space))


def test_example_values(example_space):
    assert example_space.p("1", "2").tolist() == [3, 6]
    assert example_space.p("3", "2").tolist() == [1, 2]
    assert example_space.p("4", "3").tolist() == [2, 4]


def test_one_point_space():
    s = FiniteConeSpace(("a",), Cone.orthant(1), np.zeros((1, 1, 1)))
    assert all_pass(validate_cms(s))
    assert all_pass(validate_rcms(s))


def test_line_metric_passes(line_space):
    assert all_pass(validate_cms(line_space))
    assert all_pass(validate_rcms(line_space))


def test_three_points_rc3_pass(rng):
    for _ in range(20):
        D = np.abs(rng.normal(size=(3, 3, 2)))
        D = D + D.transpose(1, 0, 2)
        D[np.arange(3), np.arange(3)] = 0
        s = FiniteConeSpace(("a", "b", "c"), Cone.orthant(2), D)
        assert by_axiom(validate_rcms(s))["RC3"].passed


def test_each_axiom_can_fail():
    bad = np.array([[[0.0], [-1.0]], [[2.0], [0.0]]])
    s = FiniteConeSpace(("a", "b"), Cone.orthant(1), bad)
    cms = by_axiom(validate_cms(s))
    assert cms["M1"].witnesses[0].points == ("a", "b")
    assert cms["M3"].witnesses[0].rhs == (2.0,)
    rc = by_axiom(validate_rcms(s))
    assert not rc["RC1"].passed and not rc["RC2"].passed

    coincident = np.zeros((2, 2, 1))
    s = FiniteConeSpace(("a", "b"), Cone.orthant(1), coincident)
    assert by_axiom(validate_cms(s))["M2"].witnesses[0].points == ("a", "b")


def test_rc3_matches_reference_loop(rng):
    cone = Cone.orthant(2)
    for _ in range(30):
        n = int(rng.integers(4, 7))
        D = rng.uniform(0.1, 5.0, size=(n, n, 2))
        D = D + D.transpose(1, 0, 2)
        D[np.arange(n), np.arange(n)] = 0
        s = FiniteConeSpace(tuple(map(str, range(n))), cone, D)
        got = [tuple(int(p) for p in w.points) for w in by_axiom(validate_rcms(s))["RC3"].witnesses]
        assert got == brute_rc3_failures(D, cone.leq)


def test_cms_implies_rcms(rng):
    for _ in range(50):
        s = gen.random_metric_space(rng)
        assert all_pass(validate_cms(s))
        assert all_pass(validate_rcms(s))


def test_generated_rectangular_spaces_are_not_all_metric(rng):
    spaces = [gen.random_rectangular_space(rng) for _ in range(30)]
    assert all(all_pass(validate_rcms(s)) for s in spaces)
    assert not all(all_pass(validate_cms(s)) for s in spaces)


def test_reduce_example(example_space):
    ctx = ScalarizationContext(Cone.orthant(2), (1, 1))
    D = reduce(example_space, ctx)
    assert D[0, 1] == 6 and D[0, 2] == 2 and D[0, 3] == 4
    assert np.all(np.diag(D) == 0)
    assert all_pass(validate_scalar_rectangular(D))
    m4 = by_axiom(validate_scalar_metric(D))["M4"]
    assert m4.witnesses[0].points == ("0", "2", "1")


def test_reduce_scalar_lift_is_identity(line_space):
    D = reduce(line_space, ScalarizationContext(Cone.orthant(1), (1,)))
    np.testing.assert_array_equal(D, line_space.dist[..., 0])


def test_reduce_cone_mismatch(example_space):
    with pytest.raises(InputError):
        reduce(example_space, ScalarizationContext(Cone.orthant(3)))


def test_reduce_homogeneous(rng):
    for _ in range(20):
        s = gen.random_rectangular_space(rng)
        ctx = gen.random_context(s.cone, rng)
        lam = rng.uniform(0.1, 10)
        np.testing.assert_allclose(reduce(s.scaled(lam), ctx), lam * reduce(s, ctx), rtol=1e-14)


def test_reduce_preserves_axioms_on_second_order_cone(rng):
    # p(x, y) = (|v|, ||v||_1 + ||v||_2) with v = x - y lies in the Lorentz cone and obeys M4
    pts = rng.normal(size=(6, 2))
    n = len(pts)
    D = np.zeros((n, n, 3))
    for i, j in itertools.product(range(n), repeat=2):
        v = pts[i] - pts[j]
        D[i, j] = [*np.abs(v), np.abs(v).sum() + np.linalg.norm(v)]
    s = FiniteConeSpace(tuple(map(str, range(n))), Cone.second_order(3), D)
    assert all_pass(validate_cms(s))
    ctx = ScalarizationContext(s.cone, (0.1, 0.2, 1.0))
    assert all_pass(validate_scalar_metric(reduce(s, ctx), slack=1e-9))


def test_scalar_validators_detect_failures():
    D = np.array([[0, 10, 1, 1], [10, 0, 1, 1], [1, 1, 0, 1], [1, 1, 1, 0]], dtype=float)
    rc3 = by_axiom(validate_scalar_rectangular(D))["RC3"]
    assert not rc3.passed
    assert rc3.witnesses[0].points == ("0", "1", "2", "3")
    assert rc3.witnesses[0].rhs == (3.0,)


def test_json_round_trip(tmp_path, example_space):
    path = tmp_path / "space.json"
    save_space(example_space, path)
    back = load_space(path)
    assert back.labels == example_space.labels and back.cone == example_space.cone
    np.testing.assert_array_equal(back.dist, example_space.dist)


def test_loader_enforces_structure(tmp_path, example_space):
    doc = example_space.to_json()
    doc["dist"][0][1] = [3, 7]
    path = tmp_path / "asym.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SpaceFormatError, match="dist\\[1\\]\\[2\\]"):
        load_space(path)
    lenient = load_space(path, strict=False)
    assert not by_axiom(validate_cms(lenient))["M3"].passed

    doc = example_space.to_json()
    doc["dist"][2][2] = [0, 1]
    path.write_text(json.dumps(doc))
    with pytest.raises(SpaceFormatError, match="not the zero vector"):
        load_space(path)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("cone"),
        lambda d: d.update(labels=["1", "1", "3", "4"]),
        lambda d: d.update(dist=[[[0, 0]]]),
        lambda d: d.update(cone={"type": "cube", "dim": 2}),
    ],
)
def test_loader_rejects_malformed(tmp_path, example_space, mutate):
    doc = example_space.to_json()
    mutate(doc)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(InputError):
        load_space(path)


def test_monitor_constant_trace():
    rep = scalar_convergence_monitor([2] * 10, np.ones((4, 4)) - np.eye(4))
    assert rep.tail_gaps.shape == (9,) and np.all(rep.tail_gaps == 0)
    assert rep.cauchy_from(0.0) == 0
    assert scalar_convergence_monitor([1], np.zeros((2, 2))).cauchy_from(1.0) is None


def test_monitor_geometric_trace():
    xs = [2.0**-n for n in range(40)]
    rep = scalar_convergence_monitor(xs, lambda a, b: abs(a - b))
    for n, g in enumerate(rep.tail_gaps):
        assert g <= 2.0 ** (-n + 1)
    assert rep.cauchy_from(1e-6) == 20


def test_monitor_window():
    xs = [0, 1, 2, 3, 4]
    rep = scalar_convergence_monitor(xs, lambda a, b: abs(a - b), window=2)
    assert rep.tail_gaps.tolist() == [2, 2, 2, 1]
    assert not rep.is_cauchy(0.5)


def test_monitor_example_trace(example_space):
    D = reduce(example_space, ScalarizationContext(example_space.cone))
    rep = scalar_convergence_monitor([2, 2, 2, 2], D)
    assert np.all(rep.tail_gaps == 0)


def test_monitor_empty():
    with pytest.raises(InputError):
        scalar_convergence_monitor([], lambda a, b: 0.0)
