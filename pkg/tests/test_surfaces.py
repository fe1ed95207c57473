import numpy as np
import pytest

from blochsurf.errors import DegenerateMap
from blochsurf.surfaces import (BumpBasis, PerturbationProfile, SurfaceModel,
                                TrigPolynomial, default_heights, eval_surface,
                                preset_truth, translate_model)


def random_model(rng, n_coeffs=7, n_bumps=8, amp=0.05):
    coeffs = np.zeros(n_coeffs)
    coeffs[0] = 1.5
    coeffs[1:] = amp * rng.uniform(-1, 1, n_coeffs - 1) / np.arange(1, n_coeffs)
    pert = PerturbationProfile(coeffs=amp * rng.uniform(-1, 1, n_bumps),
                               basis=BumpBasis(n_bumps), cell_index=0)
    zeta = TrigPolynomial(coeffs)
    t = np.linspace(-np.pi, np.pi, 1001)
    z = zeta.value(t) + pert.value(t)
    h, h0 = default_heights(float(z.min()), float(z.max()), 3.0)
    return SurfaceModel(periodic=zeta, perturbation=pert, floor=h,
                        ceiling=3.0, flatten_height=h0)


def test_case1_height_at_origin():
    model = preset_truth("case1")
    assert abs(eval_surface(model, 0.0) - 1.4375) < 1e-14


def test_case2_height_in_perturbed_cell():
    model = preset_truth("case2")
    assert abs(eval_surface(model, 4 * np.pi) - 1.375) < 1e-14


def test_case1_perturbation_vanishes_at_support_ends():
    model = preset_truth("case1")
    for t in (3.0 - 6 * np.pi, -3.0 - 6 * np.pi):
        assert abs(model.perturbation.value(t)) < 1e-14


def test_periodicity_outside_perturbed_cell():
    model = preset_truth("case1")
    t = np.linspace(-np.pi, np.pi, 400)  # cell 0; perturbation sits at cell -3
    assert np.max(np.abs(model.height(t + 2 * np.pi) - model.height(t))) < 1e-14


def test_flatten_fixed_plane_and_floor_to_surface():
    model = preset_truth("case2")
    t = np.linspace(-np.pi, np.pi, 50) + 4 * np.pi
    _, top = model.flatten(t, np.full_like(t, model.flatten_height))
    assert np.max(np.abs(top - model.flatten_height)) < 1e-14
    _, img = model.flatten(t, np.full_like(t, model.floor))
    assert np.max(np.abs(img - model.height(t))) < 1e-12


def test_flatten_collapses_to_identity_as_profile_approaches_floor():
    delta = 1e-9
    zeta = TrigPolynomial([1.0 + delta])
    pert = PerturbationProfile(coeffs=np.zeros(4), basis=BumpBasis(4))
    model = SurfaceModel(periodic=zeta, perturbation=pert, floor=1.0,
                         ceiling=3.0, flatten_height=2.0)
    x2 = np.linspace(1.0, 3.0, 33)
    x1 = np.linspace(-3.0, 3.0, 33)
    _, mapped = model.flatten(x1, x2)
    # the blend scales with (zeta - floor), so the map is the identity up to delta
    assert np.max(np.abs(mapped - x2)) <= delta + 1e-15


def test_coefficients_identity_above_blend_height():
    model = preset_truth("case1")
    fields = model.coefficient_fields()
    x1 = np.linspace(-20.0, 20.0, 64)
    x2 = np.full_like(x1, model.flatten_height + 1e-9)
    a11, a12, a22, c = fields.evaluate(x1, x2)
    assert np.allclose(a11, 1.0) and np.allclose(a22, 1.0)
    assert np.allclose(a12, 0.0) and np.allclose(c, 1.0)


def test_coefficient_fields_match_finite_difference_jacobian():
    rng = np.random.default_rng(3)
    model = random_model(rng)
    fields = model.coefficient_fields()
    pts1 = rng.uniform(-np.pi, np.pi, 60)
    pts2 = rng.uniform(model.floor + 1e-3, model.ceiling - 1e-3, 60)
    a11, a12, a22, c = fields.evaluate(pts1, pts2)
    eps = 1e-6
    _, p2p = model.flatten(pts1 + eps, pts2)
    _, p2m = model.flatten(pts1 - eps, pts2)
    d21 = (p2p - p2m) / (2 * eps)
    _, q2p = model.flatten(pts1, pts2 + eps)
    _, q2m = model.flatten(pts1, pts2 - eps)
    d22 = (q2p - q2m) / (2 * eps)
    det = d22
    assert np.max(np.abs(c - det) / np.abs(det)) < 1e-6
    assert np.max(np.abs(a11 - det) / np.abs(det)) < 1e-6
    assert np.max(np.abs(a12 + d21) / np.maximum(np.abs(d21), 1e-3)) < 1e-5
    ref22 = (1 + d21 ** 2) / det
    assert np.max(np.abs(a22 - ref22) / np.abs(ref22)) < 1e-6


def test_difference_fields_supported_in_perturbed_cell():
    model = preset_truth("case2")
    per = model.coefficient_fields(perturbed=True)
    base = model.coefficient_fields(perturbed=False)
    # outside cell J=2 the two coefficient sets agree exactly
    x1 = np.linspace(-np.pi, np.pi, 40)  # cell 0
    x2 = np.linspace(model.floor + 0.01, model.ceiling - 0.01, 40)
    for a, b in zip(per.evaluate(x1, x2), base.evaluate(x1, x2)):
        assert np.max(np.abs(a - b)) < 1e-14


def test_translate_recenters_support():
    model = preset_truth("case2")
    shifted = translate_model(model, 2)
    assert shifted.perturbation.cell_index == 0
    t = np.linspace(-np.pi, np.pi, 301)
    assert np.max(np.abs(shifted.height(t) - model.height(t + 4 * np.pi))) < 1e-12


def test_translate_identity_and_constant_invariance():
    model = preset_truth("case1")
    same = translate_model(model, 0)
    t = np.linspace(-30, 30, 500)
    assert np.max(np.abs(same.height(t) - model.height(t))) == 0.0
    # constant periodic part is shift-invariant
    assert np.allclose(same.periodic.coeffs, model.periodic.coeffs)


def test_translate_matches_shifted_evaluation():
    rng = np.random.default_rng(11)
    model = random_model(rng)
    shifted = translate_model(model, 3)
    t = rng.uniform(-40, 40, 200)
    assert np.max(np.abs(shifted.height(t) - model.height(t + 6 * np.pi))) < 1e-12


def test_degenerate_map_detected():
    zeta = TrigPolynomial([1.5])
    pert = PerturbationProfile(coeffs=np.zeros(3), basis=BumpBasis(3))
    with pytest.raises(DegenerateMap):
        SurfaceModel(periodic=zeta, perturbation=pert, floor=1.0,
                     ceiling=3.0, flatten_height=2.0)


def test_height_ordering_validated():
    zeta = TrigPolynomial([1.5])
    pert = PerturbationProfile(coeffs=np.zeros(3), basis=BumpBasis(3))
    with pytest.raises(ValueError):
        SurfaceModel(periodic=zeta, perturbation=pert, floor=1.6,
                     ceiling=3.0, flatten_height=2.8)


def test_bump_basis_compact_support_and_smooth_ends():
    basis = BumpBasis(6, width=0.6)
    t = np.array([-np.pi, np.pi, 3.2, -3.2])
    assert np.max(np.abs(basis.design_matrix(t))) == 0.0
    # each bump's own value and derivative vanish at its own support ends
    for n, c in enumerate(basis.centers):
        for edge in (c - basis.width + 1e-12, c + basis.width - 1e-12):
            assert abs(basis.design_matrix(np.array([edge]))[0, n]) < 1e-100
            assert abs(basis.design_matrix(np.array([edge]),
                                           derivative=True)[0, n]) < 1e-80
