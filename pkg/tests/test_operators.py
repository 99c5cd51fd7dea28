import numpy as np
import pytest

from linfty import operators as ops
from linfty import solutions as S
from linfty.errors import DomainError
from linfty.operators import HamiltonianModel, MapModel, _matrix_jacobian
from linfty.tensor import nullspace_projection, radial_projections


def random_point(rng, n, lo=0.2, hi=0.9):
    d = rng.standard_normal(n)
    return rng.uniform(lo, hi) * d / np.linalg.norm(d)


class TestIdentity:
    @pytest.mark.parametrize("n", [2, 3])
    def test_all_operators_vanish(self, n, rng):
        u = S.identity_map(n)
        x = random_point(rng, n)
        assert np.all(ops.infinity_laplacian(u, x) == 0)
        assert np.all(ops.q_infinity(u, x) == 0)
        assert np.all(ops.linear_system_residual(2.0, u, x) == 0)
        t, nrm = ops.infinity_laplacian_decoupled(u, x)
        assert np.all(t == 0) and np.all(nrm == 0)
        t, nrm = ops.q_infinity_decoupled(u, x)
        assert np.all(t == 0) and np.all(nrm == 0)

    def test_aronsson_norm_squared(self, rng):
        u = S.identity_map(3)
        H = HamiltonianModel.norm_squared(3, 3)
        assert np.all(ops.aronsson_system(H, u, random_point(rng, 3)) == 0)


class TestInfinityLaplacian:
    @pytest.mark.parametrize("n,N", [(2, 2), (3, 3), (2, 3), (3, 2)])
    def test_decoupling_and_orthogonality(self, make_polynomial, rng, n, N):
        for _ in range(20):
            u = make_polynomial(n, N)
            x = rng.uniform(-1, 1, n)
            full = ops.infinity_laplacian(u, x)
            t, nrm = ops.infinity_laplacian_decoupled(u, x)
            np.testing.assert_allclose(t + nrm, full, atol=1e-10)
            assert abs(t @ nrm) <= 1e-10

    def test_trig_near_origin(self, rng):
        u = S.trig_map()
        for _ in range(50):
            x = random_point(rng, 2, 0.01, 0.3)
            if abs(x[0] - x[1]) < 1e-3:
                continue
            assert np.linalg.norm(ops.infinity_laplacian(u, x)) <= 1e-8

    def test_power_map_is_not_a_solution(self):
        u = S.power_map(1.0, 2)
        assert np.linalg.norm(ops.infinity_laplacian(u, np.array([0.3, 0.4]))) > 1e-2

    def test_near_interface_flag(self):
        u = S.trig_map()
        # smallest singular value ~1e-8: kept, but only 100x above the cutoff
        Du_close, _ = u.derivatives(np.array([0.2, 0.2 + 1e-8]))
        Du_on, _ = u.derivatives(np.array([0.2, 0.2]))
        Du_off, _ = u.derivatives(np.array([0.2, -0.2]))
        assert ops.near_interface(Du_close)
        assert not ops.near_interface(Du_on)
        assert not ops.near_interface(Du_off)


class TestAronsson:
    def test_norm_squared_structure(self, make_polynomial, rng):
        for n, N in [(2, 2), (2, 3), (3, 3)]:
            H = HamiltonianModel.norm_squared(N, n)
            for _ in range(30):
                u = make_polynomial(n, N)
                x = rng.uniform(-1, 1, n)
                Du, D2u = u.derivatives(x)
                direct = (4.0 * np.einsum("ai,bj,bij->a", Du, Du, D2u)
                          + 2.0 * np.sum(Du * Du) * nullspace_projection(2.0 * Du) @ np.einsum("bii->b", D2u))
                np.testing.assert_allclose(ops.aronsson_system(H, u, x), direct, atol=1e-10)
                t, nrm = ops.infinity_laplacian_decoupled(u, x)
                np.testing.assert_allclose(ops.aronsson_system(H, u, x), 4 * t + 2 * nrm, atol=1e-10)

    def test_scalar_reduction(self, make_polynomial, rng):
        H = HamiltonianModel.norm_squared(1, 3)
        for _ in range(30):
            u = make_polynomial(3, 1)
            x = rng.uniform(-1, 1, 3)
            Du, D2u = u.derivatives(x)
            brute = sum(Du[0, i] * Du[0, j] * D2u[0, i, j] for i in range(3) for j in range(3))
            assert ops.infinity_laplacian(u, x)[0] == pytest.approx(brute, abs=1e-12)
            assert ops.aronsson_system(H, u, x)[0] == pytest.approx(4 * brute, abs=1e-12)

    def test_fd_hamiltonian_matches_analytic(self, make_polynomial, rng):
        H = HamiltonianModel.norm_squared(2, 2)
        Hfd = HamiltonianModel.from_value("fd", 2, 2, H.value)
        assert Hfd.provenance["hessian"] == ops.FINITE_DIFFERENCE
        u = make_polynomial(2, 2)
        x = rng.uniform(-1, 1, 2)
        np.testing.assert_allclose(ops.aronsson_system(Hfd, u, x), ops.aronsson_system(H, u, x), atol=1e-5)

    def test_hamiltonian_hessian_symmetry(self, rng):
        H = HamiltonianModel.dilation(2, 2)
        P = rng.standard_normal((2, 2))
        HPP = H.hessian(P)
        np.testing.assert_allclose(HPP, HPP.transpose(2, 3, 0, 1), atol=1e-6 * np.abs(HPP).max())
        fd = _matrix_jacobian(H.value, P, 1e-5)
        np.testing.assert_allclose(H.gradient(P), fd, atol=1e-6 * np.abs(fd).max())

    def test_dilation_weighted_variant_on_power_maps(self, rng):
        # K-weighted form of the quasiconformal system; v^gamma solves it too
        H = HamiltonianModel.dilation(2, 2)
        u = S.power_map(1.0, 2)
        for _ in range(10):
            x = random_point(rng, 2)
            Du, D2u = u.derivatives(x)
            r = np.linalg.norm(ops.aronsson_system(H, u, x)) / ops.normalization(Du, D2u)
            assert r <= 1e-6


class TestQInfinity:
    @pytest.mark.parametrize("n", [2, 3])
    def test_decoupling(self, make_polynomial, rng, n):
        checked = 0
        for _ in range(30):
            u = make_polynomial(n, n)
            x = rng.uniform(-0.5, 0.5, n)
            try:
                full = ops.q_infinity(u, x)
            except DomainError:
                continue
            t, nrm = ops.q_infinity_decoupled(u, x)
            np.testing.assert_allclose(t + nrm, full, atol=1e-9 * max(1.0, np.abs(full).max()))
            assert abs(t @ nrm) <= 1e-10 * max(1.0, np.linalg.norm(t) * np.linalg.norm(nrm))
            checked += 1
        assert checked > 20

    @pytest.mark.parametrize("gamma", [-0.5, 0.5, 1.0, 2.0])
    def test_power_maps(self, rng, gamma):
        u = S.power_map(gamma, 2)
        for _ in range(20):
            x = random_point(rng, 2)
            Du, D2u = u.derivatives(x)
            scale = ops.normalization(Du, D2u)
            t, nrm = ops.q_infinity_decoupled(u, x)
            assert np.linalg.norm(t) / scale <= 1e-6
            assert np.linalg.norm(nrm) / scale <= 1e-6

    def test_rank_deficient(self):
        u = S.trig_map()
        with pytest.raises(DomainError):
            ops.q_infinity(u, np.array([0.1, 0.1]))


class TestLinearSystem:
    def test_coefficient_tensor_properties(self, rng):
        for _ in range(1000):
            n = rng.integers(2, 5)
            mu = rng.uniform(1.01, 6)
            x = rng.standard_normal(n)
            P = rng.standard_normal((n, n))
            A = ops.coefficient_tensor(mu, x)
            np.testing.assert_allclose(A, A.transpose(2, 3, 0, 1), atol=1e-14)
            q = np.einsum("aibj,ai,bj->", A, P, P)
            along, perp = radial_projections(x)
            lin = np.sum((np.eye(n) - mu * along) * P)
            assert q >= -1e-12
            assert q == pytest.approx(lin ** 2, rel=1e-10, abs=1e-12)
            assert q - np.sum((perp + (1 - mu) * along) * P) ** 2 >= -1e-12
            assert q <= n * (1 + mu) ** 2 * np.sum(P * P)

    def test_errors(self):
        with pytest.raises(DomainError):
            ops.coefficient_tensor(2.0, np.zeros(2))
        with pytest.raises(DomainError):
            ops.coefficient_tensor(1.0, np.ones(2))

    def test_mu_map(self, rng):
        u = S.mu_map(2.0, 3)
        for _ in range(20):
            x = random_point(rng, 3)
            assert np.linalg.norm(ops.linear_system_residual(2.0, u, x)) <= 1e-8


class TestMapModel:
    def test_from_value(self, rng):
        u = S.power_map(1.0, 2)
        v = MapModel.from_value("fd-power", 2, 2, u.value, domain=u.domain)
        assert not v.analytic and u.analytic
        x = np.array([0.3, -0.4])
        np.testing.assert_allclose(v.gradient(x), u.gradient(x), atol=1e-8)
        np.testing.assert_allclose(v.hessian(x), u.hessian(x), atol=1e-5)

    def test_check_point(self):
        u = S.power_map(1.0, 2)
        with pytest.raises(DomainError):
            u.check_point(np.zeros(3))
        with pytest.raises(DomainError):
            u.check_point(np.zeros(2))

    def test_residual_record(self):
        u = S.power_map(1.0, 2)
        x = np.array([0.3, 0.4])
        r = ops.residual(ops.infinity_laplacian, u, x)
        assert r.norm == pytest.approx(np.linalg.norm(r.value))
        np.testing.assert_array_equal(r.point, x)
