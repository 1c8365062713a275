"""
Tests for the generated semigroup, the resolvent, the angle of analyticity and
dissipativity on the sector.
"""

import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from scipy import linalg

from src.errors import InvalidInputError
from src.operators import KernelOperator, direct_sum, e_lambda, random_symmetric_contraction
from src.semigroup import (
    angle_profile,
    boundary_points,
    contraction_norms,
    dissipativity_check,
    dissipativity_value,
    exp_semigroup,
    exp_semigroup_spectral,
    expm_pade,
    first_order_ratios,
    generator_approx_check,
    make_generator,
    phi_p,
    resolvent_check,
    resolvent_defect,
    scalar_angle,
    semigroup_law_defect,
    spectral_norm_estimate,
    zeta,
)
from src.space import CFunction, make_space

from conftest import random_cvec


def test_phi_p_examples():
    assert phi_p(4) == pytest.approx(math.pi / 3, abs=1e-15)
    assert phi_p(2) == pytest.approx(math.pi / 2, abs=1e-15)
    assert phi_p(4 / 3) == pytest.approx(math.pi / 3, abs=1e-14)
    for p in (1.0, 0.5, math.inf, math.nan):
        with pytest.raises(InvalidInputError):
            phi_p(p)


@seed(5)
@settings(max_examples=200, deadline=None)
@given(p=st.floats(1.01, 100.0))
def test_phi_p_dual_symmetry(p):
    q = p / (p - 1.0)
    assert phi_p(p) == pytest.approx(phi_p(q), abs=1e-12)
    assert 0 < phi_p(p) <= math.pi / 2


def test_zeta_examples():
    assert zeta(np.array([0j]), 3)[0] == 1
    assert zeta(np.array([1 + 0j]), 3)[0] == 0
    assert zeta(np.array([-1 + 0j]), 2)[0] == pytest.approx(4)


def test_make_generator_rejects_noncontractive():
    T = KernelOperator(make_space([1.0, 1.0]), np.array([[0.6, 0.5], [0.5, 0.6]]))
    with pytest.raises(InvalidInputError):
        make_generator(T)


@pytest.mark.parametrize("scale", [1e-3, 0.1, 1.0, 5.0, 20.0])
def test_expm_pade_matches_scipy(rng, scale):
    M = scale * (rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))) / 6
    expected = linalg.expm(M)
    assert np.allclose(expm_pade(M), expected, rtol=1e-10, atol=1e-10 * np.abs(expected).max())


def test_exp_semigroup_agrees_with_spectral_oracle():
    for k in range(20):
        G = make_generator(random_symmetric_contraction(2 + k, k))
        for t in (0.01, 0.5, 3.0):
            pade = exp_semigroup(G, t).entries
            spectral = exp_semigroup_spectral(G, t).entries
            assert np.abs(pade - spectral).max() <= 1e-11


def test_exp_semigroup_edges():
    G = make_generator(random_symmetric_contraction(4, 0))
    assert np.array_equal(exp_semigroup(G, 0).entries, np.eye(4))
    with pytest.raises(InvalidInputError):
        exp_semigroup(G, -1.0)
    with pytest.raises(InvalidInputError):
        exp_semigroup(G, math.inf)


def test_contraction_and_semigroup_law():
    for k in range(15):
        G = make_generator(random_symmetric_contraction(3 + k, k))
        for t in (0.01, 0.1, 1.0, 10.0):
            l1, linf = contraction_norms(G, t)
            assert l1 <= 1 + 1e-12 and linf <= 1 + 1e-12
        assert semigroup_law_defect(G, 0.3, 1.7) <= 1e-12


def test_spectral_norm_estimate():
    M = np.diag([3.0, 1.0, 0.5])
    assert spectral_norm_estimate(M) == pytest.approx(3.0, rel=1e-10)
    assert spectral_norm_estimate(np.zeros((2, 2))) == 0.0


def test_resolvent(rng):
    for k in range(10):
        G = make_generator(random_symmetric_contraction(2 + k, k))
        f = CFunction(G.space, random_cvec(rng, G.n))
        assert resolvent_defect(G, f) <= 1e-10
        assert resolvent_check(G, f)
    with pytest.raises(InvalidInputError):
        resolvent_defect(G, f, quad_points=4)


def test_generator_first_order_decay():
    G = make_generator(e_lambda(1))
    errors = generator_approx_check(G, CFunction(G.space, [1, 0]), [0.1, 0.05, 0.025, 0.0125])
    ratios = first_order_ratios(errors)
    assert len(ratios) == 3
    assert all(0.45 <= r <= 0.55 for r in ratios)
    with pytest.raises(InvalidInputError):
        generator_approx_check(G, CFunction(G.space, [1, 0]), [0.1, 0.2])


@pytest.mark.parametrize("p", [1.5, 3.0, 4.0])
def test_scalar_angle_matches_closed_form(p):
    report = scalar_angle(p)
    assert report.gap <= 1e-3
    assert report.to_dict()["symmetry_ok"]
    assert abs(report.witness_z) <= 1 and report.witness_z.imag <= 0


def test_angle_profile_changes_sign_at_phi_p():
    phi = phi_p(3)
    below, above = angle_profile(3, [phi - 0.05, phi + 0.1])
    assert below["min_normalized_value"] >= -1e-9
    assert above["min_normalized_value"] < 0


def test_e1_dissipativity_value_is_half_zeta():
    G = make_generator(e_lambda(1))
    z = 0.4 - 0.3j
    raw, _ = dissipativity_value(G, 3, 0.0, CFunction(G.space, [z, 1]))
    assert raw == pytest.approx(0.5 * zeta(np.array([z]), 3)[0].real, abs=1e-15)


def test_dissipativity_sharp_at_phi_p():
    G = make_generator(e_lambda(1))
    witness = scalar_angle(3, radial=30, angular=61, approach=30).witness_z
    phi = phi_p(3)
    assert dissipativity_check(G, 3, phi, samples=20, witness_z=witness).verdict == "pass"
    past = dissipativity_check(G, 3, phi + 0.1, samples=20, witness_z=witness)
    assert past.verdict == "violated"


def test_boundary_points():
    points = boundary_points(1 - 1j, radii=(0.1, 0.01))
    assert points[0] == 1 - 1j
    assert points[1:3] == pytest.approx([1 - 0.1j, 1 - 0.01j])
    assert points[3:] == [z.conjugate() for z in points[:3]]
    assert boundary_points(1.0, radii=(0.5,))[1] == 0.5


def test_dissipativity_boundary_on_e_lambda_block():
    p = 3.0
    base = random_symmetric_contraction(5, 2)
    c = 2.0 * float(base.space.weights.max())
    G = make_generator(direct_sum(KernelOperator(make_space([c, c]), e_lambda(np.exp(2.1j)).entries), base))
    witness = scalar_angle(p, radial=30, angular=61, approach=30).witness_z
    at_angle = dissipativity_check(G, p, phi_p(p), samples=20, witness_z=witness)
    assert at_angle.verdict == "pass"
    assert at_angle.min_value <= 1e-6
    past = dissipativity_check(G, p, phi_p(p) + 0.05, samples=20, witness_z=witness)
    assert past.verdict == "violated"


def test_dissipativity_hilbert_space_angle():
    assert phi_p(2) == pytest.approx(math.pi / 2, abs=1e-15)
    witness = scalar_angle(2, radial=30, angular=61, approach=30).witness_z
    for k in range(3):
        G = make_generator(random_symmetric_contraction(6, k))
        assert dissipativity_check(G, 2, math.pi / 2, samples=30, seed=k, witness_z=witness).verdict == "pass"
    G = make_generator(e_lambda(1))
    assert dissipativity_check(G, 2, math.pi / 2, samples=20, witness_z=witness).verdict == "pass"
    assert dissipativity_check(G, 2, math.pi / 2 + 0.05, samples=20, witness_z=witness).verdict == "violated"


def test_dissipativity_random_generators():
    for k in range(5):
        G = make_generator(random_symmetric_contraction(6, k))
        report = dissipativity_check(G, 4, phi_p(4), samples=30, seed=k, witness_z=0.5 - 0.5j)
        assert report.verdict == "pass"
    with pytest.raises(InvalidInputError):
        dissipativity_check(G, 1.0, 0.1)
