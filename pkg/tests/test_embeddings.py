import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lipsub.convex_geometry import LqNorm, PolyhedralNorm, hexagon_norm, l1_norm, preset
from lipsub.embeddings import (EmbeddingMap, attaining_point, blowup_profile, check_pullback, construct_c0,
                               construct_ell1, cover_map, default_test_vectors, embed_euclid2_circle,
                               embed_euclid_via_cover, embed_polyhedral_bumps, embed_polyhedral_linf,
                               example_c0_in_ball, filling_curve_demo, hilbert_curve, mazur_map, mazur_ratios,
                               sphere_cover, transfer_lp, verify_isometry)
from lipsub.embeddings.euclidean import hilbert_d2xy
from lipsub.errors import (CoverageUncertified, DepthExhausted, DirectionNotLipschitz, FacesExceedCapacity,
                           PreconditionError, SiteSeparationError, WitnessInvalid)
from lipsub.fragmentation import cantor_truncation, find_witness
from lipsub.metric_core import (cantor_tree, convergent_sequence, hilbert_cube, interval_grid, lip_constant,
                                lq_ball, pairwise_lipschitz)


def sup_of(E, x):
    return float(np.max(np.abs(E.J(np.asarray(x, dtype=float)).values)))


# -- circle


def test_circle_unit_vector():
    E, _ = embed_euclid2_circle(101)
    f = E.J(np.array([1.0, 0.0])).values
    assert np.max(np.abs(f)) == 1.0 and np.argmax(np.abs(f)) == 0


def test_circle_amplitude():
    E, _ = embed_euclid2_circle(10_000)
    assert 5 - 1e-7 <= sup_of(E, [3, 4]) <= 5


def test_circle_lipschitz_bound():
    E, rep = embed_euclid2_circle(500)
    X = default_test_vectors(2)
    lips = pairwise_lipschitz(E.fields(X), E.model.d)
    assert np.all(lips <= math.pi * np.linalg.norm(X, axis=1) * (1 + 1e-12))
    assert rep.psi_lip <= math.pi


# -- polyhedral into l_inf^n


def test_l1_into_linf2_formula():
    E = embed_polyhedral_linf(l1_norm(2), 2)
    assert E.psi.tolist() == [[1, 1], [1, -1]]
    x, y = 0.3, -1.7
    assert E.J(np.array([x, y])).values.tolist() == [x + y, x - y]
    assert E.report.isometry_defect == 0


def test_hexagon_into_linf3_against_norm_oracle():
    N = hexagon_norm()
    E = embed_polyhedral_linf(N, 3)
    X = np.random.default_rng(1).normal(size=(1000, 2))
    sup = np.abs(E.fields(X)).max(axis=0)
    assert np.max(np.abs(sup - N.gauge_lp(X) if False else sup - N.norm(X))) <= 1e-9


def test_hexagon_into_linf2_refused():
    with pytest.raises(FacesExceedCapacity):
        embed_polyhedral_linf(hexagon_norm(), 2)


def test_surplus_coordinates_repeat_last():
    E = embed_polyhedral_linf(l1_norm(2), 4)
    assert E.psi[2].tolist() == E.psi[1].tolist() == E.psi[3].tolist()


# -- bumps


def test_bumps_l1_over_interval():
    E, basis, rep = embed_polyhedral_bumps(l1_norm(2), interval_grid(200))
    assert rep.isometry_defect <= 1e-9 and rep.coverage_defect <= 1e-9
    N = l1_norm(2)
    assert np.all(N.dual_norm(E.psi) <= 1 + 1e-9)
    supports = [set(np.flatnonzero(basis.matrix[:, k])) for k in range(basis.m)]
    assert not supports[0] & supports[1]


def test_single_site_one_dimensional():
    N = PolyhedralNorm(1, v_rep=[[1.0]])
    E, basis, rep = embed_polyhedral_bumps(N, interval_grid(20), sites=[10])
    x = -2.5
    assert np.allclose(E.J(np.array([x])).values, basis.matrix[:, 0] * x)
    assert rep.isometry_defect == 0


def test_adjacent_sites_rejected():
    with pytest.raises(SiteSeparationError):
        embed_polyhedral_bumps(l1_norm(2), interval_grid(200), sites=[50, 51])


# -- c0


def test_c0_example():
    basis, rep = construct_c0(convergent_sequence(6, 1), 1 / 8)
    assert np.abs(basis.combine([1, -1, 0.5, 0, 0, 0])).max() == 1
    assert rep.isometry_defect == 0 and rep.coverage_defect == 0


def test_c0_single_field_pins():
    basis, _ = construct_c0(convergent_sequence(6, 1), 1 / 8)
    f1 = basis.matrix[:, 0]
    sites = basis.meta["sites"]
    assert np.abs(f1).max() == 1 and f1[sites[0]] == 1
    assert all(f1[t] == 0 for t in sites[1:])


def test_c0_lipschitz_bound_and_lambda(rng):
    eps = 1 / 8
    basis, rep = construct_c0(convergent_sequence(6, 1), eps)
    A = rng.uniform(-1, 1, size=(100, basis.m))
    lips = pairwise_lipschitz(basis.combine(A), basis.model.d)
    assert np.all(lips <= 2 / eps * np.abs(A).max(axis=1) * (1 + 1e-12))
    assert np.all(basis.lip_constants() <= 1 / eps * (1 + 1e-12))
    assert rep.lam <= 2 / eps


def test_c0_on_interval_with_fine_eps():
    basis, rep = construct_c0(interval_grid(200), 0.02)
    A = np.random.default_rng(2).uniform(-1, 1, size=(200, basis.m))
    assert np.max(np.abs(np.abs(basis.combine(A)).max(axis=0) - np.abs(A).max(axis=1))) <= 1e-12
    assert rep.isometry_defect <= 1e-12


def test_c0_without_separated_points():
    with pytest.raises(WitnessInvalid) as err:
        construct_c0(interval_grid(10), 1.0)
    assert err.value.best_separation is not None


# -- l1


def test_ell1_example():
    m = cantor_tree(3)
    basis, rep = construct_ell1(m, find_witness(m, 0.25), 3)
    a = np.array([1, -2, 0.5])
    F = basis.combine(a)
    assert np.abs(F).max() == 3.5
    t = attaining_point(basis, a)
    assert abs(F[t]) == 3.5
    assert np.sign(basis.matrix[t]).tolist() == [1, -1, 1]


def test_ell1_single_coordinate():
    m = cantor_tree(3)
    basis, _ = construct_ell1(m, find_witness(m, 0.25), 3)
    f1 = basis.combine([1])
    assert np.abs(f1).max() == 1 and f1.min() >= -1 and f1.max() <= 1


def test_ell1_field_lipschitz_and_lambda():
    m = cantor_tree(4)
    basis, rep = construct_ell1(m, find_witness(m, 0.25), 4)
    assert np.all(basis.lip_constants() <= 4 * (1 + 1e-12))
    assert rep.lam <= 4 * (1 + 1e-12)


def test_ell1_on_hilbert_cube_with_weak_witness():
    m = cantor_tree(6)
    basis, rep = construct_ell1(m, find_witness(m, 0.3), 5)
    A = np.random.default_rng(5).uniform(-1, 1, size=(300, 5))
    assert np.max(np.abs(np.abs(basis.combine(A)).max(axis=0) - np.abs(A).sum(axis=1))) <= 1e-12


def test_ell1_depth_exhausted():
    m = cantor_tree(3)
    with pytest.raises(DepthExhausted):
        construct_ell1(m, find_witness(m, 0.25), 10)


# -- squared coordinates on the ball


def test_c0_ball_vertex_value():
    f, checks = example_c0_in_ball(4, 100, 0, [0, 0, 1])
    m = f.model
    k = [i for i, c in enumerate(m.coords) if np.array_equal(c, np.eye(4)[2])][0]
    assert f.values[k] == 1 and checks["sup_norm"] == 1


def test_c0_ball_zero():
    f, checks = example_c0_in_ball(3, 50, 0, [0, 0])
    assert f.sup_norm == 0 and checks["lip"] == 0


def test_c0_ball_lipschitz():
    _, checks = example_c0_in_ball(8, 2000, 0, [1, -0.5, 0.25, 0.1])
    assert checks["lip"] <= 2.0 and checks["bounded"]


def test_c0_ball_too_many_coeffs():
    with pytest.raises(PreconditionError):
        example_c0_in_ball(2, 10, 0, [1, 2, 3])


# -- Mazur


def test_mazur_identity_case():
    x = np.array([0.3, -0.2, 0.9])
    assert np.array_equal(mazur_map(x, 2, 2), x)


def test_mazur_example():
    assert np.allclose(mazur_map([0.6, -0.8], 2, 1), [0.36, -0.64])


@given(st.sampled_from([(1, 1), (1.5, 1), (2, 1), (2, 1.5), (3, 2), (3, 1), (1, 2), (2, 3)]),
       st.lists(st.floats(-1, 1), min_size=1, max_size=8))
def test_mazur_norm_identity_and_oddness(qs, x):
    q1, q2 = qs
    x = np.array(x)
    y = mazur_map(x, q1, q2)
    assert abs(np.sum(np.abs(y) ** q2) - np.sum(np.abs(x) ** q1)) <= 1e-12
    assert np.array_equal(mazur_map(-x, q1, q2), -y)


def test_mazur_downward_ratio_bounded():
    assert mazur_ratios(2, 1, dim=6, pairs=100_000, seed=0).max() <= 4


def test_mazur_upward_blows_up():
    prof = blowup_profile(1, 2)
    vals = [v for _, v in prof]
    assert all(b > a for a, b in zip(vals, vals[1:])) and vals[-1] > 100


# -- l_p transfer


def test_transfer_identity():
    m = lq_ball(2, 3, 300, 1)
    E, rep = transfer_lp(m, 2, 2)
    assert np.array_equal(E.psi, m.coords)


def test_transfer_odd_symmetry():
    m = lq_ball(2, 3, 300, 1)
    P = m.coords
    assert np.array_equal(mazur_map(-P, 2, 1), -mazur_map(P, 2, 1))


def test_transfer_defect_dim3():
    _, rep = transfer_lp(lq_ball(2, 3, 10_000, 0), 2, 1, lip_sample=5)
    assert rep.isometry_defect <= 0.05


def test_transfer_wrong_direction():
    with pytest.raises(DirectionNotLipschitz):
        transfer_lp(lq_ball(1, 3, 100, 0), 1, 2)


# -- stereographic cover


def test_cover_upper_half_circle():
    sc = sphere_cover(1, 64)
    assert np.all(sc.sphere_points[:, 1] >= -1e-12)
    t = np.linspace(0, np.pi, 200)
    upper = np.column_stack([np.cos(t), np.sin(t)])
    d = np.min(np.linalg.norm(upper[:, None] - sc.sphere_points[None], axis=2), axis=1)
    assert d.max() <= 2 * np.pi / 64


@pytest.mark.parametrize("grid", [8, 16, 64, 256])
def test_cover_symmetric_defect(grid):
    assert sphere_cover(1, grid).coverage_defect <= 2 * np.pi / grid


@pytest.mark.parametrize("n", [1, 2])
def test_cover_north_pole(n):
    centre = np.full((1, n), 0.5)
    pole = np.zeros(n + 1)
    pole[-1] = 1
    assert np.array_equal(cover_map(centre)[0], pole)


def test_cover_lipschitz_stable():
    lips = [sphere_cover(1, g).lipschitz for g in (16, 64, 256)]
    assert max(lips) <= 4 and max(lips) / min(lips) <= 1.05


def test_embed_via_cover_defect():
    E, rep = embed_euclid_via_cover(1, hilbert_cube(2, 64))
    assert rep.isometry_defect <= 0.1 and rep.n_tests == 200
    assert math.isfinite(rep.lam)
    s = sup_of(E, [2, 0])
    assert abs(s - 2) <= 2 * rep.coverage_defect


def test_embed_via_cover_coarse_grid_refused():
    with pytest.raises(CoverageUncertified) as err:
        embed_euclid_via_cover(2, hilbert_cube(2, 4), tolerance=0.05)
    assert err.value.defect > 0.05


# -- Hilbert curve


@pytest.mark.parametrize("order", [1, 2, 3, 5])
def test_hilbert_curve_is_a_path_through_every_cell(order):
    side = 1 << order
    cells = hilbert_d2xy(order, np.arange(side * side))
    assert len({tuple(c) for c in cells}) == side * side
    steps = np.abs(np.diff(cells, axis=0)).sum(axis=1)
    assert np.all(steps == 1)
    assert tuple(cells[0]) == (0, 0) and tuple(cells[-1]) == (side - 1, 0)


def test_hilbert_curve_centres():
    P = hilbert_curve(1)
    assert P.tolist() == [[0.25, 0.25], [0.25, 0.75], [0.75, 0.75], [0.75, 0.25]]


def test_filling_curve_growth_and_contrast():
    demo = filling_curve_demo([1, 2, 3, 4, 5])
    assert all(r >= 1.8 for _, _, r in demo["two_level_ratios"])
    assert demo["defect_monotone"]
    assert demo["circle_max_lip"] <= math.pi + 0.01


def test_filling_curve_levels_must_increase():
    with pytest.raises(PreconditionError):
        filling_curve_demo([3, 2])


# -- verifier


def test_verify_exact_construction():
    E = embed_polyhedral_linf(preset("linf_3"), 3)
    rep = verify_isometry(E)
    assert rep.isometry_defect <= 1e-9 and rep.coverage_defect <= 1e-9


@given(st.floats(0, 1))
def test_verify_scaling_is_linear(s):
    E = embed_polyhedral_linf(hexagon_norm(), 3)
    X = default_test_vectors(2)
    rep = verify_isometry(E.scaled(s), X)
    assert rep.isometry_defect == pytest.approx((1 - s) * E.norm.norm(X).max(), abs=1e-9)
    assert rep.coverage_defect == pytest.approx(1 - s, abs=1e-9)


@given(st.floats(0, 0.2), st.integers(0, 1000))
def test_verify_perturbation_bound(eta, seed):
    E = embed_polyhedral_linf(l1_norm(2), 3)
    X = default_test_vectors(2)
    P = eta * np.random.default_rng(seed).uniform(-1, 1, E.psi.shape)
    F = EmbeddingMap(E.model, E.psi + P, E.norm)
    rep = verify_isometry(F, X)
    assert rep.isometry_defect <= eta * np.abs(X).sum(axis=1).max() + 1e-12


def test_defect_and_coverage_vanish_together():
    N = l1_norm(2)
    full = embed_polyhedral_linf(N, 2)
    half = EmbeddingMap(full.model, np.array([[1.0, 1.0], [1.0, 1.0]]), N)
    X = default_test_vectors(2)
    a, b = verify_isometry(full, X), verify_isometry(half, X)
    assert a.isometry_defect <= 1e-9 and a.coverage_defect <= 1e-9
    assert b.isometry_defect > 1e-3 and b.coverage_defect > 1e-3


def test_verify_rejects_empty_vectors():
    E = embed_polyhedral_linf(l1_norm(2), 2)
    with pytest.raises(PreconditionError):
        verify_isometry(E, np.zeros((0, 2)))


def test_embedding_json_round_trip():
    E = embed_polyhedral_linf(hexagon_norm(), 3)
    back = EmbeddingMap.from_dict(E.to_dict())
    assert np.array_equal(back.psi, E.psi)
    X = default_test_vectors(2)
    assert verify_isometry(back, X).isometry_defect == verify_isometry(E, X).isometry_defect
    c = EmbeddingMap(E.model, E.psi, LqNorm(2, math.inf))
    assert EmbeddingMap.from_dict(c.to_dict()).norm.q == math.inf


def test_report_fields_nonnegative():
    _, rep = embed_euclid2_circle(50)
    doc = rep.to_dict()
    for key in ("isometry_defect", "coverage_defect", "lambda", "max_lip"):
        assert doc[key] >= 0 and math.isfinite(doc[key])


# -- pulling bases back along quotient maps


def test_pullback_preserves_sup_and_scales_lipschitz(rng):
    K1, K2 = cantor_tree(3), cantor_tree(6)
    basis, _ = construct_ell1(K1, find_witness(K1, 0.25), 3)
    res = check_pullback(basis, K2, cantor_truncation(6, 3), rng.uniform(-1, 1, size=(50, 3)))
    assert res["ok"] and res["sup_error"] == 0


def test_pullback_c0_along_rounding(rng):
    from lipsub.fragmentation import interval_rounding

    K1, K2 = interval_grid(51), interval_grid(101)
    basis, _ = construct_c0(K1, 0.05)
    res = check_pullback(basis, K2, interval_rounding(101, 51), rng.uniform(-1, 1, size=(50, basis.m)))
    assert res["ok"]
