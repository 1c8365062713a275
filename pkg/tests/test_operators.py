"""
Tests for kernel operators: classification, modulus, adjoint, restriction,
Markov embeddings, the two-point operators and the random generators.
"""

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from src.errors import InvalidInputError
from src.operators import (
    KernelOperator,
    adjoint,
    apply,
    apply_stack,
    apply_values,
    c2_membership,
    c2_operator,
    classify,
    conjugate,
    direct_sum,
    e_lambda,
    e_lambda_stack,
    extend,
    identity,
    imag_part,
    l1_norm,
    linf_norm,
    markov_embedding,
    modulus,
    modulus_oracle,
    multiply_indicator,
    pushforward_check,
    random_symmetric_contraction,
    real_part,
    restrict,
    restrict_function,
    zero,
)
from src.space import CFunction, duality_pair, make_space, sesquilinear_pair, z2_space

from conftest import random_cvec


def uniform(n):
    return make_space([1.0] * n)


def test_apply_examples(rng):
    f = random_cvec(rng, 2)
    space = z2_space()
    assert np.array_equal(apply(identity(space), f).values, f)
    assert np.array_equal(apply(e_lambda(1), f).values, f[::-1])
    assert np.array_equal(apply(zero(space), f).values, np.zeros(2))


def test_apply_batched_paths_agree(rng):
    T = random_symmetric_contraction(6, 3)
    V = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
    batched = apply_values(T, V)
    for k in range(4):
        assert np.allclose(batched[:, k], apply(T, V[:, k]).values, rtol=0, atol=1e-14)
    lams = np.exp(2j * np.pi * rng.random(3))
    U = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    stacked = apply_stack(e_lambda_stack(lams), U)
    for k, lam in enumerate(lams):
        assert np.allclose(stacked[:, k], apply(e_lambda(lam), U[:, k]).values, rtol=0, atol=1e-15)


def test_kernel_shape_and_finiteness():
    with pytest.raises(InvalidInputError):
        KernelOperator(uniform(2), np.zeros((2, 3)))
    with pytest.raises(InvalidInputError):
        KernelOperator(uniform(1), np.array([[np.nan]]))


def test_classify_examples():
    n = 4
    averaging = KernelOperator(uniform(n), np.full((n, n), 1.0 / n))
    found = classify(averaging)
    assert found.symmetric and found.markovian

    found = classify(e_lambda(1j))
    assert found.symmetric and found.dunford_schwartz and not found.sub_markovian
    assert classify(e_lambda(1)).sub_markovian

    found = classify(KernelOperator(uniform(2), np.array([[0.6, 0.5], [0.5, 0.6]])))
    assert found.symmetric and not found.dunford_schwartz
    assert found.witnesses["linf_contraction"].index == (0,)
    assert found.witnesses["linf_contraction"].defect == pytest.approx(0.1)


def test_classify_tolerance():
    T = KernelOperator(uniform(2), np.array([[0.5, 0.5 + 1e-12], [0.5 + 1e-12, 0.5]]))
    assert classify(T, tol=1e-9).markovian
    assert not classify(T, tol=0.0).dunford_schwartz
    with pytest.raises(InvalidInputError):
        classify(T, tol=-1.0)


def test_symmetry_uses_weights():
    space = make_space([1.0, 2.0])
    # mu_0 t_01 = 0.4 = mu_1 t_10
    T = KernelOperator(space, np.array([[0.0, 0.4], [0.2, 0.0]]))
    assert classify(T).symmetric
    assert not classify(KernelOperator(space, np.array([[0.0, 0.4], [0.4, 0.0]]))).symmetric


def test_symmetry_matches_sesquilinear_identity(rng):
    for k in range(50):
        T = random_symmetric_contraction(int(rng.integers(2, 30)), k)
        f, g = random_cvec(rng, T.n), random_cvec(rng, T.n)
        lhs = sesquilinear_pair(T.space, apply(T, f), g)
        rhs = sesquilinear_pair(T.space, f, apply(T, g))
        assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))


def test_entrywise_parts(rng):
    T = random_symmetric_contraction(6, 11)
    recombined = real_part(T) + imag_part(T) * 1j
    assert np.array_equal(recombined.entries, T.entries)
    f = random_cvec(rng, T.n)
    expected = np.conj(apply(T, np.conj(f)).values)
    assert np.allclose(apply(conjugate(T), f).values, expected, rtol=0, atol=1e-13)


def test_symmetric_kernels_have_equal_l1_and_linf_norms():
    for k in range(30):
        T = random_symmetric_contraction(5 + k % 7, k)
        assert l1_norm(T) == pytest.approx(linf_norm(T), rel=1e-12)


def test_modulus_examples():
    T = KernelOperator(uniform(2), np.array([[0.5, -0.3], [-0.3, 0.5]]))
    assert np.array_equal(modulus(T).entries, np.array([[0.5, 0.3], [0.3, 0.5]]))
    assert np.allclose(modulus(e_lambda(np.exp(0.7j))).entries, e_lambda(1).entries, rtol=0, atol=1e-15)
    P = random_symmetric_contraction(5, 1, "sub_markovian")
    assert np.array_equal(modulus(P).entries, P.entries)


def test_modulus_dominates_and_keeps_class(rng):
    for k in range(30):
        T = random_symmetric_contraction(int(rng.integers(2, 25)), k)
        f = random_cvec(rng, T.n)
        lhs = np.abs(apply(T, f).values)
        rhs = apply(modulus(T), np.abs(f)).values.real
        assert np.all(lhs <= rhs + 1e-12 * (1 + rhs))
        assert classify(modulus(T)).dunford_schwartz


def test_modulus_oracle(rng):
    T = random_symmetric_contraction(8, 4)
    f = rng.uniform(0.1, 2.0, 8)
    oracle = modulus_oracle(T, f, samples=500, seed=2)
    assert oracle.overshoot() <= 1e-12
    assert oracle.attainment_gap() <= 1e-12
    with pytest.raises(InvalidInputError):
        modulus_oracle(T, -f)


def test_adjoint_examples(rng):
    t = rng.standard_normal((3, 3))
    assert np.array_equal(adjoint(KernelOperator(uniform(3), t)).entries, t.T)
    T = random_symmetric_contraction(6, 9)
    assert np.allclose(adjoint(T).entries, conjugate(T).entries, rtol=0, atol=1e-15)
    f, g = random_cvec(rng, 6), random_cvec(rng, 6)
    S = adjoint(T)
    assert duality_pair(T.space, apply(T, f), g) == pytest.approx(duality_pair(T.space, f, apply(S, g)), abs=1e-13)


def test_restrict_examples(rng):
    T = random_symmetric_contraction(5, 2)
    sub, TB = restrict(T, range(5))
    assert sub.matches(T.space) and np.array_equal(TB.entries, T.entries)

    found = classify(restrict(T, [0, 2, 3])[1])
    assert found.symmetric and found.dunford_schwartz

    chain = KernelOperator(uniform(3), np.full((3, 3), 1.0 / 3.0))
    restricted = classify(restrict(chain, [0, 1])[1])
    assert restricted.sub_markovian and not restricted.markovian

    with pytest.raises(InvalidInputError):
        restrict(T, [])
    with pytest.raises(InvalidInputError):
        restrict(T, [7])


def test_restriction_identity(rng):
    for k in range(30):
        T = random_symmetric_contraction(int(rng.integers(2, 20)), k)
        B = np.flatnonzero(rng.random(T.n) < 0.5)
        if B.size == 0:
            B = np.array([0])
        sub, TB = restrict(T, B)
        f = CFunction(T.space, random_cvec(rng, T.n))
        g = CFunction(T.space, random_cvec(rng, T.n))
        Mf, Mg = multiply_indicator(f, B), multiply_indicator(g, B)
        lhs = duality_pair(T.space, Mf - apply(T, Mf), Mg)
        rf, rg = restrict_function(f, B, sub), restrict_function(g, B, sub)
        rhs = duality_pair(sub, rf - apply(TB, rf), rg)
        assert abs(lhs - rhs) <= 1e-13 * (1 + abs(lhs))
        assert np.array_equal(extend(rf, B, T.space).values, Mf.values)


def test_direct_sum_keeps_blocks_and_class():
    block = e_lambda(np.exp(0.4j))
    T = random_symmetric_contraction(4, 3)
    S = direct_sum(block, T)
    assert S.n == 6
    assert np.array_equal(S.space.weights, np.concatenate([[0.5, 0.5], T.space.weights]))
    assert np.array_equal(S.entries[:2, :2], block.entries)
    assert np.array_equal(S.entries[2:, 2:], T.entries)
    assert not S.entries[:2, 2:].any() and not S.entries[2:, :2].any()
    found = classify(S)
    assert found.symmetric and found.dunford_schwartz


def test_pushforward_examples(rng):
    X = make_space([0.5, 0.5])
    Xp = make_space([0.25] * 4)
    f = CFunction(X, random_cvec(rng, 2))
    assert pushforward_check([0, 0, 1, 1], Xp, X, "abs2", f, tol=1e-14)
    assert pushforward_check([0, 1], X, X, "conj", f, tol=1e-14)
    with pytest.raises(InvalidInputError):
        pushforward_check([0, 0, 0, 1], Xp, X, "abs2", f)
    with pytest.raises(InvalidInputError):
        markov_embedding([0, 0, 0, 0], Xp, X)
    with pytest.raises(InvalidInputError):
        pushforward_check([0, 0, 1, 1], Xp, X, "cube", f)


@pytest.mark.parametrize("name", ["abs2", "conj", "abspow1.5"])
def test_pushforward_catalog(rng, name):
    target = make_space([0.3, 1.2, 0.5])
    source = make_space([0.1, 0.2, 1.2, 0.25, 0.25])
    f = CFunction(target, random_cvec(rng, 3))
    assert pushforward_check([0, 0, 1, 2, 2], source, target, name, f, tol=1e-14)


def test_e_lambda_examples():
    assert np.array_equal(e_lambda(1).entries, np.array([[0, 1], [1, 0]]))
    assert np.array_equal(e_lambda(1j).entries, np.array([[0, -1j], [1j, 0]]))
    with pytest.raises(InvalidInputError):
        e_lambda(0.9)


def test_c2_membership_examples():
    assert c2_membership(0, 0, np.exp(0.3j))
    assert c2_membership(0.5, -0.5, 0.5)
    assert not c2_membership(0.9, 0, 0.2)


@seed(3)
@settings(max_examples=200, deadline=None)
@given(a=st.floats(-1, 1), b=st.floats(-1, 1), r=st.floats(0, 1), theta=st.floats(0, 6.3))
def test_c2_membership_matches_classification(a, b, r, theta):
    w = r * np.exp(1j * theta)
    margin = abs(max(abs(a), abs(b)) - (1 - r))
    if margin < 1e-9:
        return
    assert c2_membership(a, b, w) == classify(c2_operator(a, b, w), tol=0.0).dunford_schwartz


@pytest.mark.parametrize("cls", ["general", "sub_markovian", "markovian"])
def test_random_generator_classes(cls):
    for k in range(100):
        n = 1 + k % 12
        found = classify(random_symmetric_contraction(n, k, cls))
        assert found.symmetric and found.dunford_schwartz
        if cls != "general":
            assert found.sub_markovian
        if cls == "markovian":
            assert found.markovian


def test_random_generator_edge_cases():
    T = random_symmetric_contraction(1, 5, "markovian")
    assert np.array_equal(T.entries, np.array([[1.0]]))
    a, b = random_symmetric_contraction(7, 11), random_symmetric_contraction(7, 11)
    assert np.array_equal(a.entries, b.entries) and a.space.matches(b.space)
    with pytest.raises(InvalidInputError):
        random_symmetric_contraction(0, 1)
    with pytest.raises(InvalidInputError):
        random_symmetric_contraction(3, 1, "unitary")
