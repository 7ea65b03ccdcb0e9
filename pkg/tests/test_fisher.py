import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density
from oracles import binomial_fisher_fd
from qcrb.core import ParametricModel, Povm, hermitian_basis, random_povm
from qcrb.errors import DimensionError, SingularStateError
from qcrb.fisher import average_info, fisher_info, helstrom_info, helstrom_info_fidelity, sld, sld_raw
from qcrb.models import bloch_line, full_bloch, pure_state

Z_BASIS = Povm.from_basis(np.eye(2))


def random_model(d, p, rng):
    """Affine model around a full-rank state, generators small enough to stay positive nearby."""
    base = random_density(d, rng)
    basis = hermitian_basis(d)[1:]
    gens = [0.05 * sum(c * b for c, b in zip(rng.normal(size=len(basis)), basis)) for _ in range(p)]
    return ParametricModel(p, lambda th: base + sum(t * g for t, g in zip(th, gens)), lambda th: gens)


class TestFisherInfo:
    @pytest.mark.parametrize("t", [0.0, 0.6, -0.3])
    def test_binomial(self, t):
        got = fisher_info(bloch_line(), [t], Z_BASIS).matrix
        assert got[0, 0] == pytest.approx(1 / (1 - t * t), rel=1e-12)
        oracle = binomial_fisher_fd(lambda s: np.array([(1 + s) / 2, (1 - s) / 2]), t, 1e-5)
        assert got[0, 0] == pytest.approx(oracle, rel=1e-6)

    def test_full_bloch_origin_z_basis(self):
        assert np.allclose(fisher_info(full_bloch(), [0, 0, 0], Z_BASIS).matrix, np.diag([0, 0, 1]))

    def test_psd_and_symmetric(self, rng):
        model = full_bloch()
        for _ in range(20):
            m = fisher_info(model, [0.1, 0.2, -0.3], random_povm(2, 4, rng)).matrix
            assert np.allclose(m, m.T) and np.linalg.eigvalsh(m)[0] >= -1e-10

    def test_coarse_graining_monotone(self, rng):
        model = full_bloch()
        theta = [0.3, -0.2, 0.1]
        for _ in range(30):
            povm = random_povm(2, 5, rng)
            fine = fisher_info(model, theta, povm).matrix
            coarse = fisher_info(model, theta, povm.merge(0, 1)).matrix
            assert np.linalg.eigvalsh(fine - coarse)[0] >= -1e-8

    def test_reparametrization(self, rng):
        # phi = (r cos a, r sin a, z) style map applied to the Bloch vector
        model = full_bloch()

        def to_theta(phi):
            return np.array([phi[0] * np.cos(phi[1]), phi[0] * np.sin(phi[1]), phi[2]])

        phi0 = np.array([0.4, 0.7, 0.2])
        step = 1e-6
        jac = np.column_stack([(to_theta(phi0 + e) - to_theta(phi0 - e)) / (2 * step) for e in step * np.eye(3)])
        reparam = ParametricModel(3, lambda ph: model.state_fn(to_theta(ph)))
        povm = random_povm(2, 4, rng)
        direct = fisher_info(reparam, phi0, povm).matrix
        pulled = jac.T @ fisher_info(model, to_theta(phi0), povm).matrix @ jac
        assert np.allclose(direct, pulled, atol=1e-6)


class TestSld:
    def test_maximally_mixed(self):
        lam = sld(bloch_line(), [0.0]).lambdas[0]
        assert np.allclose(lam, np.diag([1, -1]))

    def test_diagonal_family(self):
        lam = sld(bloch_line(), [0.5]).lambdas[0]
        assert np.allclose(lam, np.diag([1 / 1.5, -1 / 0.5]))

    def test_residual(self, rng):
        model = random_model(3, 2, rng)
        theta = np.zeros(2)
        s = sld(model, theta)
        assert s.residual(model.matrix(theta), model.derivatives(theta)) < 1e-10

    def test_singular_rejected(self):
        model = full_bloch()
        with pytest.raises(SingularStateError):
            sld_raw(model.matrix([0, 0, 1]), model.derivatives([0, 0, 1]))


class TestHelstrom:
    def test_full_bloch_origin(self):
        assert np.allclose(helstrom_info(full_bloch(), [0, 0, 0]).matrix, np.eye(3), atol=1e-10)

    def test_fidelity_hessian_origin(self):
        assert np.allclose(helstrom_info_fidelity(full_bloch(), [0, 0, 0]).matrix, np.eye(3), atol=1e-4)

    def test_commuting_line(self):
        assert helstrom_info(bloch_line(), [0.6]).matrix[0, 0] == pytest.approx(1 / 0.64, rel=1e-10)
        assert helstrom_info_fidelity(bloch_line(), [0.6]).matrix[0, 0] == pytest.approx(1 / 0.64, rel=1e-3)

    @given(st.integers(0, 10_000), st.sampled_from([2, 3]))
    @settings(max_examples=50, deadline=None)
    def test_sld_matches_fidelity_hessian(self, seed, d):
        rng = np.random.default_rng(seed)
        model = random_model(d, 2, rng)
        a = helstrom_info(model, np.zeros(2), method="sld").matrix
        b = helstrom_info(model, np.zeros(2), method="fidelity").matrix
        assert np.linalg.norm(a - b) <= 1e-3 * np.linalg.norm(a)

    def test_dominates_measurements(self, rng):
        model = full_bloch()
        theta = [0.1, 0.4, -0.2]
        h = helstrom_info(model, theta).matrix
        for _ in range(50):
            m = fisher_info(model, theta, random_povm(2, 4, rng)).matrix
            assert np.linalg.eigvalsh(h - m)[0] >= -1e-6

    def test_pure_state_fallback(self):
        # the pure-state model is singular; H comes from the fidelity Hessian
        h = helstrom_info(pure_state(2), [0.0, 0.0]).matrix
        assert np.allclose(h, 4 * np.eye(2), atol=1e-3)


class TestAverageInfo:
    def test_single_copy(self, rng):
        povm = random_povm(2, 3, rng)
        theta = [0.2, 0.1, 0.3]
        assert np.allclose(average_info(full_bloch(), theta, povm, 1).matrix,
                           fisher_info(full_bloch(), theta, povm).matrix)

    def test_product_additivity(self, rng):
        povm = random_povm(2, 3, rng)
        theta = [0.2, 0.1, 0.3]
        avg = average_info(full_bloch(), theta, povm.tensor_power(3), 3).matrix
        assert np.allclose(avg, fisher_info(full_bloch(), theta, povm).matrix, atol=1e-10)

    def test_gill_massar_collective(self, rng):
        model = pure_state(2)
        theta = np.array([0.3, -0.2])
        hinv = np.linalg.inv(helstrom_info(model, theta).matrix)
        for _ in range(10):
            avg = average_info(model, theta, random_povm(4, 6, rng), 2).matrix
            assert np.trace(hinv @ avg) <= 1 + 1e-6

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionError):
            average_info(full_bloch(), [0, 0, 0], random_povm(2, 3, rng), 2)
