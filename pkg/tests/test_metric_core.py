import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lipsub.errors import NotLipschitzError, PreconditionError
from lipsub.metric_core import (BitopModel, FiniteMetric, ScalarField, cantor_tree, closed_ball,
                                convergent_sequence, fan, from_matrices, hilbert_cube, interval_grid,
                                lip_constant, lip_witness, lq_ball, make_model, mcshane_extend,
                                parse_model_spec, point_model, validate_metric)

from conftest import random_metric_matrix


def brute_lip(values, D):
    best = 0.0
    for i, j in itertools.combinations(range(len(values)), 2):
        best = max(best, abs(values[i] - values[j]) / D[i, j])
    return best


def brute_mcshane(H, f, L, D, lo=-np.inf, hi=np.inf):
    out = np.array([min(f[k] + L * D[x, h] for k, h in enumerate(H)) for x in range(D.shape[0])])
    out = np.clip(out, lo, hi)
    out[H] = f
    return out


def dense_model(D):
    return from_matrices(D, D, 1.0)


# -- validate_metric


def test_valid_metric_has_empty_report(rng):
    rep = validate_metric(FiniteMetric.from_matrix(random_metric_matrix(rng, 10)))
    assert rep.ok and len(rep) == 0


def test_triangle_violation_names_triple():
    D = np.array([[0, 1, 3], [1, 0, 1], [3, 1, 0]], dtype=float)
    rep = validate_metric(D)
    kinds = {(k, idx) for k, idx, _ in rep.violations}
    assert ("triangle", (0, 1, 2)) in kinds


def test_asymmetry_listed():
    D = np.array([[0, 1], [2, 0]], dtype=float)
    assert any(k == "symmetry" for k, _, _ in validate_metric(D).violations)


def test_separation_and_identity_listed():
    D = np.array([[0.5, 0.0], [0.0, 0]], dtype=float)
    kinds = {k for k, _, _ in validate_metric(D).violations}
    assert {"identity", "separation"} <= kinds


def test_report_truncates():
    n = 8
    D = np.full((n, n), 10.0)
    np.fill_diagonal(D, 0)
    D[0, 1] = D[1, 0] = 100.0
    rep = validate_metric(D, max_report=1)
    assert rep.truncated and len(rep) == 1


# -- lip_constant


def test_lip_identity_on_grid():
    m = interval_grid(101)
    assert lip_constant(ScalarField(m, m.coords[:, 0])) == pytest.approx(1.0, abs=1e-12)


def test_lip_constant_field_is_zero():
    m = interval_grid(30)
    assert lip_constant(ScalarField(m, np.full(30, 3.0))) == 0.0


def test_lip_single_point_is_zero():
    assert lip_constant(ScalarField(point_model(), [2.0])) == 0.0


def test_squared_coordinate_on_ball_bounded_by_two():
    m = lq_ball(2.0, 8, 500, seed=3)
    f = ScalarField(m, m.coords[:, 0] ** 2)
    assert lip_constant(f) <= 2.0


def test_lip_matches_bruteforce_on_random_12_points(rng):
    D = random_metric_matrix(rng, 12)
    m = dense_model(D)
    v = rng.normal(size=12)
    assert lip_constant(ScalarField(m, v)) == pytest.approx(brute_lip(v, D), rel=1e-12)


def test_lip_is_cached_for_fine_metric(rng):
    m = interval_grid(20)
    f = ScalarField(m, rng.normal(size=20))
    first = f.lip_d
    assert "lip_d" in f.__dict__ and lip_constant(f) == first


def test_lip_witness_first_pair_in_row_major_order():
    m = interval_grid(5)
    v = np.array([0.0, 1.0, 2.0, 3.0, 4.0]) / 4
    L, pair = lip_witness(v, m.d)
    assert L == pytest.approx(1.0) and pair == (0, 1)


@given(st.integers(3, 15), st.integers(0, 2 ** 32 - 1))
def test_lip_permutation_invariant(n, seed):
    rng = np.random.default_rng(seed)
    D = random_metric_matrix(rng, n)
    v = rng.normal(size=n)
    p = rng.permutation(n)
    a = lip_constant(ScalarField(dense_model(D), v))
    b = lip_constant(ScalarField(dense_model(D[np.ix_(p, p)]), v[p]))
    assert a == pytest.approx(b, rel=1e-12)


# -- mcshane_extend


def test_extension_of_total_function_is_identity(rng):
    m = interval_grid(40)
    v = np.sin(3 * m.coords[:, 0])
    L = lip_constant(ScalarField(m, v))
    f = mcshane_extend(m, np.arange(40), v, L)
    assert np.array_equal(f.values, v)


def test_two_point_extension_keeps_constant():
    m = interval_grid(50)
    t1, t2 = 5, 30
    dist = m.d.block([t1], [t2])[0, 0]
    f = mcshane_extend(m, [t1, t2], [0.0, dist], 1.0, (0.0, dist))
    assert lip_constant(f) == pytest.approx(1.0)
    assert f.values.min() >= 0 and f.values.max() <= dist


def test_random_five_point_extension(rng):
    D = random_metric_matrix(rng, 40)
    m = dense_model(D)
    H = rng.choice(40, 5, replace=False)
    vals = rng.normal(size=5)
    L = brute_lip(vals, D[np.ix_(H, H)])
    f = mcshane_extend(m, H, vals, L)
    assert np.array_equal(f.values[H], vals)
    assert brute_lip(f.values, D) <= L * (1 + 1e-9)
    assert np.allclose(f.values, brute_mcshane(H, vals, L, D), atol=1e-12)


def test_extension_rejects_non_lipschitz_data():
    m = interval_grid(11)
    with pytest.raises(NotLipschitzError) as err:
        mcshane_extend(m, [0, 1], [0.0, 1.0], 1.0)
    assert err.value.pair == (0, 1)


def test_extension_rejects_empty_H():
    with pytest.raises(PreconditionError):
        mcshane_extend(interval_grid(5), [], [], 1.0)


def test_extension_rejects_data_outside_range():
    with pytest.raises(PreconditionError):
        mcshane_extend(interval_grid(5), [0], [2.0], 1.0, (0.0, 1.0))


@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 30), st.integers(1, 6))
def test_extension_contract_property(seed, n, h):
    rng = np.random.default_rng(seed)
    D = random_metric_matrix(rng, n)
    m = dense_model(D)
    H = rng.choice(n, min(h, n), replace=False)
    vals = rng.uniform(-1, 1, size=len(H))
    L = max(brute_lip(vals, D[np.ix_(H, H)]), 1e-3) * rng.uniform(1, 2)
    f = mcshane_extend(m, H, vals, L, (-1.0, 1.0))
    assert np.array_equal(f.values[H], vals)
    assert brute_lip(f.values, D) <= L * (1 + 1e-9)
    assert f.values.min() >= -1 and f.values.max() <= 1


@given(st.integers(0, 2 ** 32 - 1))
def test_unclamped_extension_keeps_exact_constant(seed):
    rng = np.random.default_rng(seed)
    D = random_metric_matrix(rng, 20)
    H = rng.choice(20, 4, replace=False)
    vals = rng.normal(size=4)
    L = brute_lip(vals, D[np.ix_(H, H)])
    f = mcshane_extend(dense_model(D), H, vals, L)
    assert lip_constant(f) == pytest.approx(L, rel=1e-9)


# -- closed_ball


def test_ball_on_line():
    m = interval_grid(11)
    B = closed_ball(m, [0], 0.5)
    assert B.tolist() == list(range(6))


def test_ball_radius_zero_is_H():
    m = interval_grid(11)
    assert closed_ball(m, [2, 7], 0.0).tolist() == [2, 7]


def test_ball_antipodal_sphere_samples_matches_scan():
    t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    X = np.column_stack([np.cos(t), np.sin(t)])
    D = np.linalg.norm(X[:, None] - X[None], axis=2)
    m = dense_model(D)
    r = 0.4
    expect = [x for x in range(64) if min(D[x, 0], D[x, 32]) <= r]
    assert closed_ball(m, [0, 32], r).tolist() == expect


def test_ball_empty_H_rejected():
    with pytest.raises(PreconditionError):
        closed_ball(interval_grid(4), [], 1.0)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0, 2), st.floats(0, 2))
def test_ball_monotone_in_radius(seed, r1, r2):
    rng = np.random.default_rng(seed)
    m = dense_model(random_metric_matrix(rng, 15))
    lo, hi = sorted((r1, r2))
    assert set(closed_ball(m, [0, 3], lo)) <= set(closed_ball(m, [0, 3], hi))


# -- generators


def test_cantor_tree_distances():
    m = cantor_tree(3)
    assert m.n == 8
    off = ~np.eye(8, dtype=bool)
    assert np.all(m.d.dist[off] == 1)
    assert set(np.unique(m.rho.dist[off])) == {0.5, 0.25, 0.125}


def test_hilbert_cube_corner_distance():
    m = hilbert_cube(2, 3)
    i = [k for k, c in enumerate(m.coords) if tuple(c) == (0, 0)][0]
    j = [k for k, c in enumerate(m.coords) if tuple(c) == (1, 1)][0]
    assert m.rho.dist[i, j] == pytest.approx(0.75)


def test_convergent_sequence_distances():
    m = convergent_sequence(4, 1)
    assert m.d.dist[1, 4] == 1 and m.rho.dist[1, 4] == pytest.approx(0.75)


def test_convergent_sequence_gap_below_one_rejected():
    with pytest.raises(PreconditionError):
        convergent_sequence(4, 0.5)


@pytest.mark.parametrize("spec", ["interval:50", "seq:6,1", "cantor:4", "lq:2,3,100", "lq:1,2,80,7",
                                  "cube:2,6", "fan:8", "point"])
def test_generated_models_valid(spec):
    m = make_model(spec)
    assert validate_metric(m.rho).ok and validate_metric(m.d).ok
    assert not m.check_finer()


def test_bad_specs_rejected():
    with pytest.raises(PreconditionError):
        make_model("interval:0")
    with pytest.raises(PreconditionError):
        make_model("lq:0.5,2,10")
    with pytest.raises(PreconditionError):
        parse_model_spec("nope:3")


def test_lq_ball_deterministic_and_inside():
    a, b = lq_ball(1.5, 3, 200, seed=4), lq_ball(1.5, 3, 200, seed=4)
    assert np.array_equal(a.coords, b.coords)
    assert np.all(np.linalg.norm(a.coords, ord=1.5, axis=1) <= 1 + 1e-12)


def test_fan_resolution_structure():
    m = fan(8)
    balls = [set(m.rho_ball(x, m.delta).tolist()) for x in range(m.n)]
    assert balls[0] == set(range(9))
    assert all(balls[k] == {0, k} for k in range(1, 9))


def test_model_json_round_trip():
    m = make_model("seq:5,2")
    back = BitopModel.loads(m.dumps())
    assert np.array_equal(back.rho.dist, m.rho.dist) and np.array_equal(back.d.dist, m.d.dist)
    assert back.delta == m.delta and back.spec == m.spec
    doc = json.loads(m.dumps())
    assert {"points", "rho_matrix", "d_matrix", "delta", "spec"} <= set(doc)
    assert back.dumps() == m.dumps()


def test_model_rejects_mismatched_points():
    a = FiniteMetric.from_matrix(np.zeros((1, 1)))
    b = FiniteMetric.from_matrix(np.array([[0, 1], [1, 0.0]]))
    with pytest.raises(PreconditionError):
        BitopModel(a, b, 1.0)
