import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wkfi.spd import (
    DimensionError,
    DomainError,
    SpdMatrix,
    as_vector,
    convex_combine,
    log_det,
    quad_form,
    random_spd,
    spd_from_sigma_rho,
    sym_eigvalsh,
    trace_inverse_product,
)


def test_cholesky_reconstructs():
    A = SpdMatrix([[4.0, 2.0, 0.4], [2.0, 3.0, 0.5], [0.4, 0.5, 2.0]])
    L = A.chol
    np.testing.assert_allclose(L @ L.T, A.entries, rtol=1e-14)
    assert np.all(np.triu(L, 1) == 0.0)


def test_symmetrized_from_lower_triangle():
    A = SpdMatrix([[2.0, 99.0], [0.5, 1.0]])
    np.testing.assert_array_equal(A.entries, [[2.0, 0.5], [0.5, 1.0]])


@pytest.mark.parametrize(
    "bad",
    [
        [[1.0, 2.0], [2.0, 1.0]],  # indefinite
        [[1.0, 1.0], [1.0, 1.0]],  # singular
        [[0.0]],
        [[np.nan]],
        [[1e-20, 0.0], [0.0, 1.0]],  # pivot below the relative threshold
    ],
)
def test_rejects_non_spd(bad):
    with pytest.raises(DomainError):
        SpdMatrix(bad)


@pytest.mark.parametrize("a", [np.eye(4), np.ones((2, 3)), np.zeros((0, 0)), np.ones(3)])
def test_rejects_bad_shape(a):
    with pytest.raises(DimensionError):
        SpdMatrix(a)


def test_read_only_entries():
    A = SpdMatrix(np.eye(2))
    with pytest.raises(ValueError):
        A.entries[0, 0] = 5.0


def test_sigma_rho():
    A = spd_from_sigma_rho(2.0, 0.5)
    np.testing.assert_allclose(A.entries, [[4.0, 2.0], [2.0, 4.0]])
    with pytest.raises(DomainError):
        spd_from_sigma_rho(1.0, 1.0)
    with pytest.raises(DomainError):
        spd_from_sigma_rho(-1.0, 0.0)


def test_log_det_matches_numpy(rng):
    for dim in (1, 2, 3):
        A = random_spd(rng, dim)
        assert log_det(A) == pytest.approx(np.linalg.slogdet(A.entries)[1], rel=1e-13)


def test_log_det_known_value():
    # det [[1, .5], [.5, 1]] = 3/4
    assert log_det(SpdMatrix([[1.0, 0.5], [0.5, 1.0]])) == pytest.approx(-0.2876820724517809, abs=1e-15)


def test_quad_form_batched(rng):
    A = random_spd(rng, 3)
    T = rng.normal(size=(5, 3))
    q = quad_form(A, T)
    np.testing.assert_allclose(q, [x @ A.entries @ x for x in T], rtol=1e-13)
    assert quad_form(A, T[0]) == pytest.approx(q[0])


def test_trace_inverse_product(rng):
    A, B = random_spd(rng, 3), random_spd(rng, 3)
    expected = np.trace(np.linalg.solve(A.entries, B.entries))
    assert trace_inverse_product(A, B) == pytest.approx(expected, rel=1e-12)
    assert trace_inverse_product(A, A) == pytest.approx(3.0, rel=1e-13)


def test_convex_combine_endpoints(rng):
    A, B = random_spd(rng, 2), random_spd(rng, 2)
    assert convex_combine(A, B, 1.0) is A
    assert convex_combine(A, B, 0.0) is B
    np.testing.assert_allclose(convex_combine(A, B, 0.25).entries, 0.25 * A.entries + 0.75 * B.entries)
    with pytest.raises(DomainError):
        convex_combine(A, B, 1.5)


def test_as_vector_checks_length():
    np.testing.assert_array_equal(as_vector(2.0, 1), [2.0])
    with pytest.raises(DimensionError):
        as_vector([1.0, 2.0], 3)


def test_random_spd_eigenvalues_in_range(rng):
    for _ in range(50):
        ev = sym_eigvalsh(random_spd(rng, 3).entries)
        assert 0.2 - 1e-12 <= ev[0] and ev[-1] <= 3.0 + 1e-12


def test_equality_and_hash():
    assert SpdMatrix([[2.0]]) == SpdMatrix([[2.0]])
    assert len({SpdMatrix([[2.0]]), SpdMatrix([[2.0]])}) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_solve_property(dim, seed):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, dim)
    b = rng.normal(size=dim)
    np.testing.assert_allclose(A.entries @ A.solve(b), b, atol=1e-12)
