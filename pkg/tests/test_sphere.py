import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lohesim.diagnostics import diameter
from lohesim.sphere import (
    Ensemble,
    adjacency_diameter,
    adjacency_max,
    check_omegas,
    ensemble_with_gram_defect,
    frobenius_apply_bound,
    gram,
    inf_norm,
    inner,
    norm,
    omega_diameter,
    random_ensemble,
    random_skew_hermitian,
    resolve_adjacency,
    ring_with_chords,
    rotation_generator,
)
from lohesim.validation import (
    ValidationError,
    check_adjacency,
    check_scalar,
    check_skew_hermitian,
    check_states,
)

from conftest import random_states

seeds = st.integers(0, 2**32 - 1)


def test_inner_identity():
    assert inner(np.array([1, 0]), np.array([1, 0])) == 1 + 0j


def test_inner_conjugates_first_slot():
    assert inner(np.array([1j]), np.array([1.0])) == -1j


def test_inner_unit_vector():
    z = np.array([1, 1j]) / math.sqrt(2)
    assert inner(z, z) == pytest.approx(1.0, abs=1e-15)


def test_inner_dimension_mismatch():
    with pytest.raises(ValidationError):
        inner(np.ones(2), np.ones(3))


def test_gram_matches_pairwise_inner(rng):
    Z = random_states(rng, 4, 3)
    G = gram(Z)
    for i in range(4):
        for j in range(4):
            assert G[i, j] == pytest.approx(inner(Z[i], Z[j]), abs=1e-15)


@given(seeds, st.integers(1, 5))
def test_inner_conjugate_symmetric_and_norm(seed, d):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=d) + 1j * rng.normal(size=d)
    z = rng.normal(size=d) + 1j * rng.normal(size=d)
    assert inner(w, z) == pytest.approx(np.conj(inner(z, w)), abs=1e-12)
    zz = inner(z, z)
    assert zz.imag == 0 or abs(zz.imag) < 1e-14
    assert zz.real == pytest.approx(norm(z) ** 2, rel=1e-12)


@given(seeds, st.integers(1, 5))
def test_unit_distance_identity(seed, d):
    z, w = random_states(np.random.default_rng(seed), 2, d)
    lhs = np.linalg.norm(z - w) ** 2
    assert lhs == pytest.approx(2 * (1 - inner(z, w).real), abs=1e-12)
    assert abs(inner(z, w).imag) <= np.linalg.norm(z - w) + 1e-15


def test_frobenius_examples():
    assert frobenius_apply_bound(np.eye(2), np.array([1.0, 0.0])) == pytest.approx((1.0, math.sqrt(2)))
    assert frobenius_apply_bound(np.zeros((2, 2)), np.array([1.0, 0.0])) == (0.0, 0.0)


def test_frobenius_bound_1000_draws():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        d = int(rng.integers(1, 6))
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        lhs, rhs = frobenius_apply_bound(A, v)
        # equality cases (d == 1, rank one) may differ by rounding
        assert lhs <= rhs * (1 + 4 * np.finfo(float).eps)


def test_frobenius_dimension_mismatch():
    with pytest.raises(ValidationError):
        frobenius_apply_bound(np.eye(2), np.ones(3))


@given(seeds, st.integers(1, 5), st.floats(0.01, 10))
def test_skew_hermitian_generator(seed, d, scale):
    om = random_skew_hermitian(np.random.default_rng(seed), d, scale)
    check_skew_hermitian(om)
    assert inf_norm(om) == pytest.approx(scale, rel=1e-12)
    z = random_states(np.random.default_rng(seed + 1), 1, d)[0]
    assert abs(inner(om @ z, z).real) < 1e-12


def test_real_skew_generator_is_real():
    om = random_skew_hermitian(np.random.default_rng(0), 3, 1.0, real=True)
    assert not np.any(om.imag)
    np.testing.assert_array_equal(om, -om.T)


def test_inf_norm_is_max_row_sum():
    M = np.array([[1, -2], [3j, 0.5]])
    assert inf_norm(M) == 3.5


def test_omega_and_adjacency_scalars():
    a, b = rotation_generator(1.0), rotation_generator(1.25)
    assert omega_diameter([a, b, a]) == pytest.approx(0.25)
    A = np.array([[1.0, 2.0], [2.0, 0.0]])
    assert adjacency_max(A) == 2.0
    assert adjacency_diameter(A) == 2.0


def test_ring_with_chords_structure():
    A = ring_with_chords(6)
    check_adjacency(A, 6)
    assert A[0, 1] == pytest.approx(1.3)
    assert A[0, 3] == pytest.approx(1.15)
    assert A[0, 2] == 1.0
    assert np.all(np.diag(A) == 1.0)


def test_validation_errors():
    with pytest.raises(ValidationError):
        check_states(np.array([[2.0, 0.0]]))
    with pytest.raises(ValidationError):
        check_skew_hermitian(np.eye(2))
    with pytest.raises(ValidationError):
        check_adjacency(np.array([[0, 1], [0.5, 0]]))
    with pytest.raises(ValidationError):
        check_adjacency(np.array([[0, -1], [-1, 0]]))
    with pytest.raises(ValidationError):
        check_scalar(float("nan"), "x")
    with pytest.raises(ValidationError):
        check_scalar(-1.0, "tau", min_val=0.0)


def test_check_omegas_shorthands():
    assert check_omegas(None, 3, 2).shape == (3, 2, 2)
    assert not np.any(check_omegas("zero", 3, 2))
    shared = check_omegas(rotation_generator(2.0), 3, 2)
    assert np.all(shared == rotation_generator(2.0))
    with pytest.raises(ValidationError):
        check_omegas(np.zeros((2, 2, 2)), 3, 2)
    np.testing.assert_array_equal(resolve_adjacency("complete", 3), np.ones((3, 3)))


def test_ensemble_is_read_only():
    e = Ensemble.on_sphere([[1.0, 0.0]])
    with pytest.raises(ValueError):
        e.states[0, 0] = 2.0
    assert e.N == 1 and e.d == 2
    with pytest.raises(ValidationError):
        Ensemble.on_sphere([[1.0, 1.0]])


def test_random_ensemble_zero_spread():
    Z = random_ensemble(3, 4, 2, 0.0).states
    assert np.all(Z == Z[0])


def test_random_ensemble_reference_case():
    e = random_ensemble(1, 5, 2, 0.12)
    assert diameter(e) <= 0.12
    np.testing.assert_allclose(np.linalg.norm(e.states, axis=1), 1.0, atol=1e-15)


def test_random_ensemble_deterministic():
    a = random_ensemble(9, 6, 3, 0.5).states
    b = random_ensemble(9, 6, 3, 0.5).states
    assert a.tobytes() == b.tobytes()


@given(seeds, st.integers(1, 8), st.integers(1, 4), st.floats(0.0, 2.0))
def test_random_ensemble_respects_spread(seed, N, d, spread):
    e = random_ensemble(seed, N, d, spread)
    assert diameter(e) <= spread + 1e-12
    assert e.norm_deviation() <= 1e-12


def test_random_ensemble_real():
    assert not np.any(random_ensemble(0, 4, 3, 1.0, real=True).states.imag)


def test_random_ensemble_rejects_bad_spread():
    with pytest.raises(ValidationError):
        random_ensemble(0, 3, 2, 2.5)


@given(seeds, st.floats(0.01, 0.9))
def test_gram_defect_target(seed, target):
    from lohesim.diagnostics import gram_defect

    e = ensemble_with_gram_defect(seed, 4, 2, target)
    assert gram_defect(e).Lmax == pytest.approx(target, abs=1e-12)
