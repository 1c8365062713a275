"""
Tests for form families and the scalar, Z2 and full form checks.
"""

import math

import numpy as np
import pytest

from src.errors import InvalidInputError, ParseError
from src.forms import (
    CheckReport,
    FormFamily,
    family_analyticity,
    family_from_text,
    full_check,
    full_form_value,
    lambda_grid,
    random_affine_family,
    reduction_crosscheck,
    scalar_check,
    scalar_value,
    z2_criterion_check,
    z2_form_scale,
    z2_form_value,
    z2_operator_form_value,
    zero_operator_check,
)
from src.operators import KernelOperator, direct_sum, e_lambda, identity, random_symmetric_contraction
from src.sampling import GridSampler
from src.semigroup import boundary_points, phi_p, scalar_angle
from src.space import CFunction, make_space
from src.verify_suite import VERIFY_GRID, VERIFY_LAMBDAS

from conftest import random_cvec

SMALL_GRID = GridSampler(radial=5, angular=8)


def test_analyticity_family_values():
    family = family_analyticity(3, 0.0)
    F, G = family.evaluate_point([2])
    assert F[0] == 2 and G[0] == pytest.approx(4)
    assert family.evaluate_point([0])[1][0] == 0

    F, G = family_analyticity(1.5, 0.3).evaluate_point([0])
    assert G[0] == 0

    F, G = family_analyticity(4, math.pi / 2).evaluate_point([1j])
    assert G[0] == pytest.approx(1, abs=1e-15)
    F, G = family_analyticity(4, math.pi / 2, sign=-1).evaluate_point([1j])
    assert G[0] == pytest.approx(-1, abs=1e-15)


def test_analyticity_family_domain():
    with pytest.raises(InvalidInputError):
        family_analyticity(1.0, 0.1)
    with pytest.raises(InvalidInputError):
        family_analyticity(3, 0.1, sign=2)


def test_family_from_text():
    family = family_from_text(2, "x1 : conj(x1), abspow(x1, 2) : x2 * phase(0.5)")
    assert family.d == 2 and family.m == 2
    assert family.to_dict()["pairs"][0] == ["x1", "conj(x1)"]
    with pytest.raises(InvalidInputError):
        family_from_text(1, "x1")
    with pytest.raises(ParseError):
        family_from_text(1, "x1 : x2")
    with pytest.raises(InvalidInputError):
        FormFamily(d=1, pairs=())


def test_scalar_value_is_cosine_law():
    family = family_analyticity(3, 0.4)
    raw, scale = scalar_value(family, [2 * np.exp(0.7j)])
    assert raw == pytest.approx(8 * math.cos(0.4))
    assert scale == pytest.approx(8)


def test_scalar_check_verdicts():
    assert scalar_check(family_analyticity(3, math.pi / 2 - 0.1), SMALL_GRID).verdict == "pass"
    report = scalar_check(family_analyticity(3, math.pi / 2 + 0.1), SMALL_GRID)
    assert report.verdict == "violated"
    assert report.min_value == pytest.approx(math.cos(math.pi / 2 + 0.1), abs=1e-9)
    assert report.to_dict()["note"]


def test_z2_value_examples():
    family = family_from_text(1, "x1 : x1")
    assert z2_form_value(family, 1, [1], [-1]) == pytest.approx(2)
    assert z2_form_value(family, 1, [1], [1]) == 0
    assert z2_form_scale(family, [1], [-1]) == pytest.approx(4)


def test_z2_form_vanishes_on_kernel(rng):
    family = family_analyticity(3, 1.0)
    lam = np.exp(0.9j)
    z = random_cvec(rng, 1)
    assert abs(z2_form_value(family, lam, z, lam * z)) <= 1e-12 * (1 + abs(z[0]) ** 3)


def test_z2_form_is_affine_in_operator(rng):
    family = random_affine_family(2, 3, seed=4)
    z, w = random_cvec(rng, 2), random_cvec(rng, 2)
    lam1, lam2 = np.exp(0.3j), np.exp(2.1j)
    mixed = 0.25 * e_lambda(lam1) + 0.75 * e_lambda(lam2)
    expected = 0.25 * z2_form_value(family, lam1, z, w) + 0.75 * z2_form_value(family, lam2, z, w)
    assert z2_operator_form_value(family, mixed, z, w) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_z2_hilbert_space_case():
    report = z2_criterion_check(family_analyticity(2, 0.0), 36, SMALL_GRID)
    assert report.verdict == "pass"
    assert zero_operator_check(family_analyticity(2, 0.0), SMALL_GRID).verdict == "pass"


def test_z2_sharp_angle_p3():
    phi = phi_p(3)
    at_angle = z2_criterion_check(family_analyticity(3, phi, 1), VERIFY_LAMBDAS, VERIFY_GRID)
    assert at_angle.verdict == "pass"
    past = z2_criterion_check(family_analyticity(3, phi + 0.05, 1), VERIFY_LAMBDAS, VERIFY_GRID)
    assert past.verdict == "violated"

    family = family_analyticity(3, phi + 0.05, 1)
    lam = complex(*past.witness["lambda"])
    z = [complex(*c) for c in past.witness["z"]]
    w = [complex(*c) for c in past.witness["w"]]
    replay = z2_form_value(family, lam, z, w) / z2_form_scale(family, z, w)
    assert replay == pytest.approx(past.min_value, rel=1e-12, abs=1e-15)


def test_z2_threads_do_not_change_result():
    family = family_analyticity(4, 1.1)
    one = z2_criterion_check(family, 24, SMALL_GRID, refine=False, threads=1)
    many = z2_criterion_check(family, 24, SMALL_GRID, refine=False, threads=4)
    assert one.to_dict() == many.to_dict()


def test_z2_modes():
    family = family_analyticity(3, 0.2)
    assert z2_criterion_check(family, sampler=SMALL_GRID, mode="markovian").details["lambda_count"] == 1
    report = z2_criterion_check(family_analyticity(3, math.pi / 2 + 0.1), sampler=SMALL_GRID, mode="sub_markovian")
    assert report.verdict == "violated"
    assert "scalar" in report.details
    with pytest.raises(InvalidInputError):
        z2_criterion_check(family, sampler=SMALL_GRID, mode="unitary")
    with pytest.raises(InvalidInputError):
        lambda_grid(0)


def test_full_form_identity_operator_is_zero(rng):
    T = random_symmetric_contraction(6, 2)
    fs = [CFunction(T.space, random_cvec(rng, 6))]
    assert full_form_value(family_analyticity(3, 1.0), identity(T.space), fs) == 0
    with pytest.raises(InvalidInputError):
        full_form_value(family_analyticity(3, 1.0), T, fs * 2)


def test_full_check_and_witness_replay():
    T = random_symmetric_contraction(8, 3)
    family = family_analyticity(3, phi_p(3))
    report = full_check(family, T, samples=40, seed=5)
    assert report.verdict == "pass"
    fs = [CFunction(T.space, [complex(*c) for c in row]) for row in report.witness["f"]]
    assert full_form_value(family, T, fs) == pytest.approx(report.raw_value, rel=1e-12, abs=1e-12)
    assert full_check(family, T, samples=40, seed=5, threads=3).to_dict() == report.to_dict()
    with pytest.raises(InvalidInputError):
        full_check(family, T, samples=0)


def test_reduction_crosscheck(rng):
    for k in range(10):
        T = random_symmetric_contraction(int(rng.integers(2, 15)), k)
        family = random_affine_family(2, 2, seed=k)
        fs = [CFunction(T.space, random_cvec(rng, T.n)) for _ in range(2)]
        result = reduction_crosscheck(family, T, fs)
        assert result.ok
        assert result.direct == pytest.approx(full_form_value(family, T, fs))


@pytest.mark.parametrize("mode", ["sub_markovian", "markovian"])
def test_reduction_crosscheck_modes(rng, mode):
    family = family_analyticity(3, phi_p(3))
    for k in range(5):
        T = random_symmetric_contraction(int(rng.integers(2, 12)), k, mode)
        fs = [CFunction(T.space, random_cvec(rng, T.n))]
        result = reduction_crosscheck(family, T, fs, mode=mode)
        assert result.ok
        assert result.to_dict()["mode"] == mode
        assert result.direct == pytest.approx(full_form_value(family, T, fs))
        if mode == "markovian":
            assert result.scalar_min == 0


def test_reduction_crosscheck_mode_needs_matching_operator(rng):
    T = random_symmetric_contraction(4, 1)
    fs = [CFunction(T.space, random_cvec(rng, 4))]
    family = family_analyticity(3, 1.0)
    with pytest.raises(InvalidInputError):
        reduction_crosscheck(family, T, fs, mode="markovian")
    with pytest.raises(InvalidInputError):
        reduction_crosscheck(family, T, fs, mode="ergodic")


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_z2_criterion_agrees_with_scalar_angle(p):
    bound = scalar_angle(p, radial=30, angular=61, approach=30).phi_numeric
    for sign in (1, -1):
        below = z2_criterion_check(family_analyticity(p, bound - 0.05, sign), VERIFY_LAMBDAS, VERIFY_GRID)
        assert below.verdict == "pass"
    above = z2_criterion_check(family_analyticity(p, bound + 0.05, 1), VERIFY_LAMBDAS, VERIFY_GRID)
    assert above.verdict == "violated"


def test_full_check_boundary_functions_on_e_lambda_block():
    p = 3.0
    lam = complex(np.exp(0.9j))
    base = random_symmetric_contraction(5, 4)
    c = 2.0 * float(base.space.weights.max())
    T = direct_sum(KernelOperator(make_space([c, c]), e_lambda(lam).entries), base)
    extra = []
    for z in boundary_points(scalar_angle(p, radial=30, angular=61, approach=30).witness_z):
        values = np.zeros(T.n, dtype=complex)
        values[0], values[1] = z, lam
        extra.append([CFunction(T.space, values)])

    at_angle = full_check(family_analyticity(p, phi_p(p), 1), T, samples=10, seed=1, extra_functions=extra)
    assert at_angle.verdict == "pass"
    assert at_angle.samples == 10 + len(extra)
    assert at_angle.details["extra_functions"] == len(extra)

    past_family = family_analyticity(p, phi_p(p) + 0.05, 1)
    past = full_check(past_family, T, samples=10, seed=1, extra_functions=extra)
    assert past.verdict == "violated"
    assert min(full_form_value(past_family, T, fs) for fs in extra) < 0


def test_report_verdict_uses_tolerance():
    report = CheckReport(kind="scalar", min_value=-1e-12, raw_value=-1e-12, scale=1.0, witness={},
                         samples=1, seed=None, tolerance=1e-9)
    assert report.verdict == "pass" and "note" not in report.to_dict()
    report.min_value = -1e-6
    assert report.verdict == "violated"
