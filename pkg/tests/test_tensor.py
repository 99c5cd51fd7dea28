import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from linfty.errors import DomainError
from linfty.tensor import (
    InfiniteDilation,
    ahlfors,
    conformal_tensor,
    dilation,
    dilation_gradient,
    dilation_hessian_projected,
    interface_gap,
    nullspace_projection,
    numerical_rank,
    radial_projections,
    rank_one_inverse,
)
from linfty.operators import _matrix_jacobian

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def vectors(n):
    return arrays(float, n, elements=finite).filter(lambda v: np.linalg.norm(v) > 1e-3)


class TestRadialProjections:
    def test_axis(self):
        along, perp = radial_projections([1.0, 0.0])
        np.testing.assert_array_equal(along, np.diag([1.0, 0.0]))
        np.testing.assert_array_equal(perp, np.diag([0.0, 1.0]))

    def test_diagonal(self):
        along, _ = radial_projections(np.array([1.0, 1.0]) / math.sqrt(2))
        np.testing.assert_allclose(along, np.full((2, 2), 0.5), atol=1e-15)

    def test_origin(self):
        with pytest.raises(DomainError):
            radial_projections([0.0, 0.0, 0.0])

    @given(vectors(3))
    def test_projection_identities(self, x):
        along, perp = radial_projections(x)
        for Q in (along, perp):
            np.testing.assert_allclose(Q @ Q, Q, atol=1e-12)
            np.testing.assert_allclose(Q, Q.T, atol=1e-12)
        np.testing.assert_allclose(along @ perp, 0.0, atol=1e-12)
        np.testing.assert_allclose(along + perp, np.eye(3), atol=1e-12)


class TestNullspaceProjection:
    def test_full_rank(self):
        np.testing.assert_array_equal(nullspace_projection(np.eye(3)), np.zeros((3, 3)))

    def test_rank_one(self):
        np.testing.assert_allclose(nullspace_projection(np.diag([1.0, 0.0])), np.diag([0.0, 1.0]), atol=1e-15)

    def test_column(self):
        np.testing.assert_allclose(nullspace_projection(np.array([[1.0], [0.0]])), np.diag([0.0, 1.0]),
                                   atol=1e-15)

    def test_zero_is_identity(self):
        np.testing.assert_array_equal(nullspace_projection(np.zeros((3, 2))), np.eye(3))

    @given(arrays(float, (4, 2), elements=finite))
    def test_properties(self, P):
        proj = nullspace_projection(P)
        np.testing.assert_allclose(proj @ proj, proj, atol=1e-10)
        np.testing.assert_allclose(proj, proj.T, atol=1e-12)
        scale = max(1.0, np.abs(P).max())
        np.testing.assert_allclose(proj @ P, 0.0, atol=1e-9 * scale)
        assert round(np.trace(proj)) == 4 - numerical_rank(P)


class TestAhlfors:
    def test_identity(self):
        np.testing.assert_array_equal(ahlfors(np.eye(3)), np.zeros((3, 3)))

    def test_diag(self):
        np.testing.assert_array_equal(ahlfors(np.diag([2.0, 0.0])), np.diag([1.0, -1.0]))

    def test_non_square(self):
        with pytest.raises(DomainError):
            ahlfors(np.ones((2, 3)))

    @given(arrays(float, (3, 3), elements=finite))
    def test_traceless_symmetric(self, A):
        S = ahlfors(A)
        assert abs(np.trace(S)) <= 1e-12 * max(1.0, np.abs(A).max())
        np.testing.assert_array_equal(S, S.T)


class TestDilation:
    def test_identity(self):
        assert dilation(np.eye(3)) == pytest.approx(3.0, abs=1e-14)

    def test_diag(self):
        assert dilation(np.diag([2.0, 1.0])) == pytest.approx(2.5, abs=1e-14)

    def test_rank_deficient_is_tagged(self):
        K = dilation(np.diag([1.0, 0.0]))
        assert isinstance(K, InfiniteDilation)
        assert K.rank == 1 and float(K) == math.inf

    def test_rectangular(self):
        # 3x2 with orthonormal columns: conformal, K = n
        P = np.linalg.qr(np.random.default_rng(1).standard_normal((3, 2)))[0]
        assert dilation(P) == pytest.approx(2.0, abs=1e-12)

    def test_invariances(self, rng):
        for _ in range(200):
            P = rng.standard_normal((3, 3))
            R = np.linalg.qr(rng.standard_normal((3, 3)))[0]
            c = rng.uniform(0.1, 10) * rng.choice([-1, 1])
            K = dilation(P)
            assert dilation(c * P) == pytest.approx(K, rel=1e-10)
            assert dilation(R @ P) == pytest.approx(K, rel=1e-10)
            assert K >= 3 - 1e-10

    def test_gradient_at_identity(self):
        np.testing.assert_allclose(dilation_gradient(np.eye(2)), 0.0, atol=1e-15)

    def test_gradient_fd(self):
        P = np.diag([2.0, 1.0])
        fd = _matrix_jacobian(lambda Q: float(dilation(Q)), P, 1e-5)
        np.testing.assert_allclose(dilation_gradient(P), fd, rtol=1e-6, atol=1e-9)

    def test_gradient_fd_rectangular(self, rng):
        P = rng.standard_normal((3, 2))
        fd = _matrix_jacobian(lambda Q: float(dilation(Q)), P, 1e-5)
        err = np.abs(dilation_gradient(P) - fd).max() / np.abs(fd).max()
        assert err <= 1e-6

    def test_square_gradient_closed_form(self, rng):
        # 2 P^{-T} S(P^T P) / det(P^T P)^{1/n}
        P = rng.standard_normal((3, 3))
        C = P.T @ P
        other = 2 * np.linalg.inv(P).T @ ahlfors(C) / np.linalg.det(C) ** (1 / 3)
        np.testing.assert_allclose(dilation_gradient(P), other, rtol=1e-10, atol=1e-12)

    def test_euler_relation(self, rng):
        for _ in range(100):
            P = rng.standard_normal((3, 2))
            assert abs(np.sum(dilation_gradient(P) * P)) <= 1e-10 * max(1.0, dilation(P))

    def test_gradient_rank_deficient(self):
        with pytest.raises(DomainError):
            dilation_gradient(np.diag([1.0, 0.0]))


class TestDilationHessian:
    def test_conformal_tensor_entry(self):
        assert conformal_tensor(2)[0, 0, 0, 0] == 1.0

    def test_first_summand_vanishes_at_identity(self):
        # only the E-term survives at a conformal point
        H = dilation_hessian_projected(np.eye(2))
        E = conformal_tensor(2)
        expected = 2.0 * np.einsum("am,bl,ik,kjlm->aibj", np.eye(2), np.eye(2), np.eye(2), E)
        np.testing.assert_allclose(H, expected, atol=1e-14)

    @pytest.mark.parametrize("P", [np.diag([2.0, 1.0]),
                                   np.array([[1.0, 0.3], [-0.2, 0.8], [0.5, 0.1]])])
    def test_projected_matches_fd(self, P):
        KP = dilation_gradient(P)
        proj = nullspace_projection(KP)
        fd = _matrix_jacobian(dilation_gradient, P, 1e-5)
        ours = np.einsum("ga,aibj->gibj", proj, dilation_hessian_projected(P))
        theirs = np.einsum("ga,aibj->gibj", proj, fd)
        assert np.abs(ours - theirs).max() <= 1e-5 * max(1.0, np.abs(theirs).max())

    def test_full_hessian_at_conformal_point(self, rng):
        R = np.linalg.qr(rng.standard_normal((3, 3)))[0]
        P = 1.7 * R
        fd = _matrix_jacobian(dilation_gradient, P, 1e-5)
        np.testing.assert_allclose(dilation_hessian_projected(P), fd, atol=1e-7)


class TestRank:
    def test_values(self):
        assert numerical_rank(np.eye(3)) == 3
        assert numerical_rank(np.diag([1.0, 0.0])) == 1
        assert numerical_rank(np.zeros((2, 2))) == 0

    def test_gap(self):
        assert interface_gap(np.eye(2)) == pytest.approx(1e10)
        assert interface_gap(np.diag([1.0, 1e-9])) == pytest.approx(10.0)
        assert interface_gap(np.diag([1.0, 1e-20])) == pytest.approx(1e10)


class TestRankOneInverse:
    def test_zero(self):
        np.testing.assert_array_equal(rank_one_inverse(0.0, [1.0, 2.0]), np.eye(2))

    def test_axis(self):
        np.testing.assert_allclose(rank_one_inverse(1.0, [1.0, 0.0]), np.diag([0.5, 1.0]))

    def test_eigenvalue(self, rng):
        x = rng.standard_normal(4)
        x /= np.linalg.norm(x)
        assert x @ rank_one_inverse(3.0, x) @ x == pytest.approx(0.25, abs=1e-14)

    def test_singular(self):
        with pytest.raises(DomainError):
            rank_one_inverse(-1.0, [1.0, 0.0])

    @settings(max_examples=200)
    @given(st.floats(-0.99, 20), vectors(3))
    def test_product(self, gamma, x):
        along, _ = radial_projections(x)
        prod = (np.eye(3) + gamma * along) @ rank_one_inverse(gamma, x)
        np.testing.assert_allclose(prod, np.eye(3), atol=1e-12 * max(1.0, 1.0 / (1 + gamma)))
