"""Spectral primitives: support projectors, square roots, norms, tensor algebra."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairsamp.linalg import (
    NotHermitianError,
    NotPositiveError,
    as_operator,
    operator_norm,
    partial_trace,
    projector,
    sqrt_pinv_sqrt,
    support_projector,
    tensor,
    trace_norm,
)


def random_psd(dim, rng, scale=1.0):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (g @ g.conj().T)


class TestSupportProjector:
    def test_diagonal(self):
        np.testing.assert_allclose(support_projector(np.diag([0.0, 2.0])), np.diag([0.0, 1.0]), atol=1e-12)

    def test_full_support(self):
        np.testing.assert_allclose(support_projector(np.eye(3)), np.eye(3), atol=1e-12)

    def test_rank_one(self):
        unnormalized = np.array([1.0, 1.0])
        h = 0.5 * np.outer(unnormalized, unnormalized)  # eigenvalues {1, 0}
        p = projector(unnormalized / np.sqrt(2.0))
        np.testing.assert_allclose(support_projector(h), p, atol=1e-12)

    def test_idempotent(self, rng):
        h = random_psd(5, rng)
        pi = support_projector(h)
        np.testing.assert_allclose(pi @ pi, pi, atol=1e-10)
        np.testing.assert_allclose(pi @ h @ pi, h, atol=1e-10)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            support_projector(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_negative(self):
        with pytest.raises(NotPositiveError):
            support_projector(np.diag([-1e-3, 1.0]))


class TestSqrtPinvSqrt:
    def test_diagonal(self):
        sq, pinv = sqrt_pinv_sqrt(np.diag([4.0, 9.0]))
        np.testing.assert_allclose(sq, np.diag([2.0, 3.0]), atol=1e-12)
        np.testing.assert_allclose(pinv, np.diag([0.5, 1.0 / 3.0]), atol=1e-12)

    def test_zero_eigenvalue_maps_to_zero(self):
        sq, pinv = sqrt_pinv_sqrt(np.diag([0.0, 1.0]))
        np.testing.assert_allclose(sq, np.diag([0.0, 1.0]), atol=1e-12)
        np.testing.assert_allclose(pinv, np.diag([0.0, 1.0]), atol=1e-12)

    def test_scaled_projector(self):
        p = projector(np.array([1.0, 1.0]) / np.sqrt(2.0))
        sq, pinv = sqrt_pinv_sqrt(0.5 * p)
        np.testing.assert_allclose(sq, p / np.sqrt(2.0), atol=1e-12)
        np.testing.assert_allclose(pinv, p * np.sqrt(2.0), atol=1e-12)

    def test_small_negative_drift_is_clamped(self):
        sq, _ = sqrt_pinv_sqrt(np.diag([-1e-12, 1.0]))
        np.testing.assert_allclose(sq, np.diag([0.0, 1.0]), atol=1e-12)

    def test_large_negative_raises(self):
        with pytest.raises(NotPositiveError):
            sqrt_pinv_sqrt(np.diag([-1e-3, 1.0]))


class TestNorms:
    def test_operator_norm_diagonal(self):
        assert operator_norm(np.diag([1.0, -3.0])) == pytest.approx(3.0, abs=1e-12)

    def test_trace_norm_diagonal(self):
        assert trace_norm(np.diag([1.0, -3.0])) == pytest.approx(4.0, abs=1e-12)

    def test_projector_norm_one(self, rng):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        p = projector(v / np.linalg.norm(v))
        assert operator_norm(p) == pytest.approx(1.0, abs=1e-12)

    def test_trace_norm_rectangular(self):
        block = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
        assert trace_norm(block) == pytest.approx(3.0, abs=1e-12)

    def test_submultiplicative(self, rng):
        a = random_psd(4, rng)
        b = random_psd(4, rng)
        assert operator_norm(a @ b) <= operator_norm(a) * operator_norm(b) + 1e-10


class TestTensorPartialTrace:
    def test_tensor_identities(self):
        np.testing.assert_allclose(tensor([np.eye(2), np.eye(3)]), np.eye(6), atol=0)

    def test_tensor_diag(self):
        np.testing.assert_allclose(
            tensor([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]), np.diag([0.0, 1.0, 0.0, 0.0]), atol=0
        )

    def test_tensor_sigma_z(self):
        sz = np.diag([1.0, -1.0])
        np.testing.assert_allclose(tensor([sz, sz]), np.diag([1.0, -1.0, -1.0, 1.0]), atol=0)

    def test_tensor_empty_raises(self):
        with pytest.raises(ValueError):
            tensor([])

    def test_singlet_marginals(self):
        v = np.zeros(4, dtype=complex)
        v[1], v[2] = 1.0 / np.sqrt(2.0), -1.0 / np.sqrt(2.0)
        singlet = projector(v)
        for keep in ([0], [1]):
            np.testing.assert_allclose(
                partial_trace(singlet, [2, 2], keep), np.eye(2) / 2.0, atol=1e-12
            )

    def test_product_state(self, rng):
        rho = random_psd(2, rng)
        rho /= np.trace(rho).real
        sigma = random_psd(3, rng)
        np.testing.assert_allclose(
            partial_trace(tensor([rho, sigma]), [2, 3], [0]), rho * np.trace(sigma).real, atol=1e-10
        )

    def test_identity_partial_trace(self):
        np.testing.assert_allclose(partial_trace(np.eye(4), [2, 2], [0]), 2.0 * np.eye(2), atol=0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            partial_trace(np.eye(4), [2, 3], [0])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 16))
def test_sqrt_reconstructs(seed, dim):
    rng = np.random.default_rng(seed)
    h = random_psd(dim, rng)
    sq, _ = sqrt_pinv_sqrt(h)
    assert np.max(np.abs(sq @ sq - h)) <= 1e-8 * max(1.0, operator_norm(h))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 16), rank=st.integers(1, 16))
def test_pinv_recovers_support(seed, dim, rank):
    rng = np.random.default_rng(seed)
    r = min(rank, dim)
    g = rng.normal(size=(dim, r)) + 1j * rng.normal(size=(dim, r))
    h = g @ g.conj().T
    _, pinv = sqrt_pinv_sqrt(h)
    assert np.max(np.abs(pinv @ h @ pinv - support_projector(h))) <= 1e-8


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d1=st.integers(2, 4), d2=st.integers(2, 4))
def test_tensor_partial_trace_roundtrip(seed, d1, d2):
    rng = np.random.default_rng(seed)
    a = random_psd(d1, rng)
    b = random_psd(d2, rng)
    back = partial_trace(tensor([a, b]), [d1, d2], [0])
    assert np.max(np.abs(back - a * np.trace(b).real)) <= 1e-10 * max(1.0, operator_norm(a) * np.trace(b).real)


def test_dimension_cap():
    with pytest.raises(ValueError):
        as_operator(np.eye(5000))
