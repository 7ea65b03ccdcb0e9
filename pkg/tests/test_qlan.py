import numpy as np
import pytest

from qcrb.core import ParametricModel
from qcrb.errors import DegeneracyError, DimensionError, DomainError, ValidationError
from qcrb.fisher import helstrom_info
from qcrb.gaussian import SymplecticForm, multimode_minimax
from qcrb.holevo import holevo_bound
from qcrb.models import diagonal, full_bloch
from qcrb.qlan import (LocalModel, canonical_l_map, clt_basis, clt_empirical_check, l_map, limit_model,
                       quantum_clt_covariance)

MU2 = np.diag([0.7, 0.3])
MU3 = np.diag([0.5, 0.3, 0.2])


class TestBasis:
    def test_qubit_operators(self):
        b = clt_basis(MU2)
        assert b.labels == ("Q12", "P12", "C1")
        assert np.allclose(b["C1"], np.diag([0.3, -0.7]))
        norm = np.sqrt(2 * 0.4)
        assert np.allclose(b["Q12"], np.array([[0, 1], [1, 0]]) / norm)
        assert np.allclose(b["P12"], np.array([[0, -1j], [1j, 0]]) / norm)

    @pytest.mark.parametrize("rho0", [MU2, MU3])
    def test_centered(self, rho0):
        for x in clt_basis(rho0).operators:
            assert abs(np.trace(rho0 @ x)) < 1e-12
            assert np.allclose(x, x.conj().T)

    def test_qutrit_rank(self):
        b = clt_basis(MU3)
        assert len(b.operators) == 8 and b.gram_rank() == 9

    def test_degenerate_rejected(self):
        with pytest.raises(DegeneracyError):
            clt_basis(np.eye(2) / 2)

    def test_increasing_rejected(self):
        with pytest.raises(DegeneracyError):
            clt_basis(np.diag([0.3, 0.7]))

    def test_non_diagonal_rejected(self):
        with pytest.raises(ValidationError):
            clt_basis(np.array([[0.7, 0.1], [0.1, 0.3]]))


class TestCovariance:
    def test_positive_diagonal(self):
        b = clt_basis(MU3)
        cov = quantum_clt_covariance(MU3, b)
        assert np.all(np.diag(cov).real > 0)

    def test_qubit_pair_imaginary_part(self):
        cov = quantum_clt_covariance(MU2, clt_basis(MU2))
        assert cov[0, 1].imag == pytest.approx(0.5) and cov[1, 0].imag == pytest.approx(-0.5)

    def test_classical_block_commutes(self):
        cov = quantum_clt_covariance(MU3, clt_basis(MU3))
        assert np.allclose(cov[6:, 6:].imag, 0)


class TestLimitModel:
    def test_classical_variance(self):
        assert np.allclose(limit_model(MU2).classical_cov, [[0.21]])

    def test_classical_multinomial(self):
        lim = limit_model(MU3)
        mu = np.array([0.5, 0.3])
        assert np.array_equal(lim.classical_cov, np.diag(mu) - np.outer(mu, mu))
        assert np.allclose(lim.covariance[6:, 6:], lim.classical_cov, atol=1e-15)

    def test_qubit_both_variance_rules(self):
        lim = limit_model(MU2)
        assert lim.gap_variances[0] == pytest.approx(1.25)
        assert np.allclose(lim.quantum_blocks[0], 1.25 * np.eye(2))

    def test_qutrit_variance_rules_differ(self):
        lim = limit_model(MU3)
        # pair (1,2): mu sum 0.8, gap 0.2
        assert lim.quantum_blocks[0][0, 0] == pytest.approx(0.8 / 0.4)
        assert lim.gap_variances[0] == pytest.approx(1 / 0.4)

    @pytest.mark.parametrize("rho0", [MU2, MU3, np.diag([0.4, 0.3, 0.2, 0.1])])
    def test_canonical_symplectic(self, rho0):
        lim = limit_model(rho0)
        d = rho0.shape[0]
        p = d * (d - 1) // 2
        assert np.allclose(lim.symplectic_matrix, SymplecticForm(p, d - 1).matrix, atol=1e-10)

    def test_limit_state_valid(self):
        limit_model(MU3).shift()

    def test_mean_map_matches_l_map(self, rng):
        lim = limit_model(MU3)
        h = rng.normal(size=8)
        assert np.allclose(lim.mean_map(h), canonical_l_map(lim.basis).T @ h)


class TestLMap:
    def test_full_chart_invertible(self):
        l_mat = l_map(diagonal([0.5, 0.3, 0.2]), np.zeros(8))
        assert np.linalg.matrix_rank(l_mat) == 8

    def test_diagonal_submodel(self):
        model = ParametricModel(1, lambda t: np.diag([0.7 + t[0], 0.3 - t[0]]))
        l_mat = l_map(model, [0.0])
        oracle = np.trace(np.diag([1.0, -1.0]) @ clt_basis(MU2)["C1"]).real
        assert np.allclose(l_mat, [[0.0, 0.0, oracle]], atol=1e-8)
        assert oracle == pytest.approx(1.0)

    def test_constant_direction(self):
        model = ParametricModel(2, lambda t: np.diag([0.7 + t[0], 0.3 - t[0]]))
        assert np.allclose(l_map(model, [0.0, 0.0])[1], 0.0)

    def test_reference_mismatch(self):
        with pytest.raises(ValidationError):
            l_map(full_bloch(), [0, 0, 0.2], clt_basis(MU2))


class TestHolevoMinimaxChain:
    @pytest.mark.parametrize("r", [0.4, 0.5])
    def test_full_bloch(self, r):
        model = full_bloch()
        theta = np.array([0.0, 0.0, r])
        g = helstrom_info(model, theta).matrix / 4
        lim = limit_model(model.matrix(theta))
        shift = lim.shift(l_map(model, theta, lim.basis))
        assert multimode_minimax(shift, g)["risk"] == pytest.approx(holevo_bound(model, theta, g).value, rel=1e-3)

    def test_qutrit_random_weight(self, rng):
        model = diagonal([0.5, 0.3, 0.2])
        a = rng.normal(size=(8, 8))
        g = a @ a.T + np.eye(8)
        shift = limit_model(MU3).shift()
        expected = holevo_bound(model, np.zeros(8), g).value
        assert multimode_minimax(shift, g)["risk"] == pytest.approx(expected, rel=1e-3)


class TestLocalModel:
    def test_radius_enforced(self):
        with pytest.raises(DomainError):
            LocalModel(np.array([0.7, 0.3]), np.array([2.0, 0, 0]), 100)

    def test_dimension(self):
        with pytest.raises(DimensionError):
            LocalModel(np.array([0.7, 0.3]), np.zeros(2), 100)

    def test_state(self):
        rho = LocalModel(np.array([0.7, 0.3]), np.array([1.0, 0.0, 0.0]), 100).state()
        assert np.allclose(rho, np.diag([0.8, 0.2]))


class TestEmpiricalClt:
    def test_classical_observable(self):
        rep = clt_empirical_check(MU2, np.zeros(3), 10_000, 5000, seed=1, observables=["C1"])
        row = rep.rows[0]
        assert row["variance"] == pytest.approx(0.21, rel=0.05) and row["ks"] < 0.03

    def test_mean_shift(self):
        rep = clt_empirical_check(MU2, np.array([1.0, 0.0, 0.0]), 10_000, 2000, seed=2, observables=["C1"])
        row = rep.rows[0]
        assert abs(row["mean"] - 1.0) < 3 * row["mean_se"]

    def test_quadrature_reports_both_rules(self):
        rep = clt_empirical_check(MU3, np.zeros(8), 2000, 2000, seed=3, observables=["Q12"])
        row = rep.rows[0]
        assert row["closer_rule"] == "trace"
        assert row["variance"] == pytest.approx(row["variance_trace_rule"], rel=0.1)

    def test_ks_decreases_with_n(self):
        ks = [clt_empirical_check(MU2, np.zeros(3), n, 4000, seed=4, observables=["C1"]).rows[0]["ks"]
              for n in (100, 1000, 10_000)]
        inversions = sum(b > a for a, b in zip(ks, ks[1:]))
        assert inversions <= 1 and ks[-1] < ks[0]

    def test_reproducible(self):
        a = clt_empirical_check(MU2, np.zeros(3), 200, 1000, seed=9).to_rows()
        b = clt_empirical_check(MU2, np.zeros(3), 200, 1000, seed=9).to_rows()
        assert a == b

    def test_minimum_sizes(self):
        with pytest.raises(ValidationError):
            clt_empirical_check(MU2, np.zeros(3), 50, 1000, seed=0)
