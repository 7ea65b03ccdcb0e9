import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density
from oracles import holevo_sdp
from qcrb.core import PAULIS, Povm, random_povm
from qcrb.errors import InfeasibleError, ValidationError
from qcrb.fisher import fisher_info, helstrom_info
from qcrb.holevo import (HolevoSolution, WeightMatrix, _objective, dual_from_primal, holevo_bound,
                         holevo_problem, psd_sqrt_real, support_structure_check, verify_dual_bound,
                         weight_from_dual, z_matrix)
from qcrb.models import affine, bloch_line, equatorial, full_bloch, pure_state
from qcrb.core import hermitian_basis

BLOCH_THETA = np.array([0.2, -0.3, 0.4])


def quarter_h(model, theta):
    return helstrom_info(model, theta).matrix / 4


def random_affine(d, p, rng):
    base = random_density(d, rng)
    basis = hermitian_basis(d)[1:]
    gens = [0.05 * sum(c * b for c, b in zip(rng.normal(size=len(basis)), basis)) for _ in range(p)]
    return affine(base, gens)


def random_weight(p, rng):
    a = rng.normal(size=(p, p))
    return a @ a.T + 0.2 * np.eye(p)


class TestZMatrix:
    def test_paulis_at_mixed(self):
        z = z_matrix(full_bloch(), [0, 0, 0], PAULIS)
        assert np.allclose(z.real, np.eye(3))

    def test_single_observable(self, rng):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        a = a + a.conj().T
        z = z_matrix(full_bloch(), BLOCH_THETA, [a])
        assert z.shape == (1, 1) and z[0, 0].real >= 0 and abs(z[0, 0].imag) < 1e-12

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_gram_structure(self, seed):
        rng = np.random.default_rng(seed)
        xs = []
        for _ in range(3):
            a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            xs.append(a + a.conj().T)
        z = z_matrix(full_bloch(), BLOCH_THETA, xs)
        assert np.allclose(z, z.conj().T, atol=1e-10)
        assert np.linalg.eigvalsh(z)[0] >= -1e-10


class TestHolevoBound:
    @pytest.mark.parametrize("r", [0.1, 0.5, 0.9])
    def test_full_bloch_closed_form(self, r):
        theta = np.array([0.0, r, 0.0])
        sol = holevo_bound(full_bloch(), theta, quarter_h(full_bloch(), theta))
        assert sol.value == pytest.approx((3 + 2 * r) / 4, abs=1e-3)

    def test_equatorial(self):
        theta = np.array([0.3, 0.4])
        assert holevo_bound(equatorial(), theta, quarter_h(equatorial(), theta)).value == pytest.approx(0.5, abs=1e-3)

    def test_pure_qubit(self):
        theta = np.array([0.2, -0.1])
        assert holevo_bound(pure_state(2), theta, quarter_h(pure_state(2), theta)).value == pytest.approx(1.0, abs=1e-3)

    @pytest.mark.parametrize("t,g", [(0.0, 1.0), (0.6, 2.5), (-0.3, 0.1)])
    def test_scalar_reduces_to_cramer_rao(self, t, g):
        h = helstrom_info(bloch_line(), [t]).matrix[0, 0]
        assert holevo_bound(bloch_line(), [t], [[g]]).value == pytest.approx(g / h, rel=1e-6)

    @pytest.mark.parametrize("seed,d,p", [(0, 2, 3), (1, 3, 2), (2, 3, 3), (3, 3, 4)])
    def test_matches_sdp_oracle(self, seed, d, p):
        rng = np.random.default_rng(seed)
        model = random_affine(d, p, rng)
        g = random_weight(p, rng)
        theta = np.zeros(p)
        expected, _ = holevo_sdp(model.matrix(theta), model.derivatives(theta), g)
        assert holevo_bound(model, theta, g).value == pytest.approx(expected, rel=1e-5)

    def test_invariants(self):
        sol = holevo_bound(full_bloch(), BLOCH_THETA, quarter_h(full_bloch(), BLOCH_THETA))
        rep = sol.invariant_report()
        assert rep["unbiasedness_residual"] < 1e-6
        assert rep["v_minus_z_min_eig"] >= -1e-6
        assert rep["value_minus_trace_gv"] < 1e-6
        assert rep["dual_gap"] < 1e-8

    @pytest.mark.parametrize("c", [0.1, 2.0, 10.0])
    def test_homogeneity(self, c):
        g = quarter_h(full_bloch(), BLOCH_THETA)
        base = holevo_bound(full_bloch(), BLOCH_THETA, g).value
        assert holevo_bound(full_bloch(), BLOCH_THETA, c * g).value == pytest.approx(c * base, rel=1e-8)

    @given(st.integers(0, 10_000))
    @settings(max_examples=15, deadline=None)
    def test_dominates_helstrom(self, seed):
        rng = np.random.default_rng(seed)
        model = random_affine(2, 3, rng)
        g = random_weight(3, rng)
        theta = np.zeros(3)
        helstrom = np.trace(g @ np.linalg.inv(helstrom_info(model, theta).matrix))
        assert holevo_bound(model, theta, g).value >= helstrom - 1e-8

    def test_lower_bounds_measurements(self, rng):
        model = full_bloch()
        g = quarter_h(model, BLOCH_THETA)
        c = holevo_bound(model, BLOCH_THETA, g).value
        for _ in range(50):
            info = fisher_info(model, BLOCH_THETA, random_povm(2, 4, rng)).matrix
            if np.linalg.cond(info) < 1e10:
                assert np.trace(g @ np.linalg.inv(info)) >= c - 1e-5

    def test_deterministic(self):
        g = quarter_h(full_bloch(), BLOCH_THETA)
        a = holevo_bound(full_bloch(), BLOCH_THETA, g).value
        b = holevo_bound(full_bloch(), BLOCH_THETA, g).value
        assert abs(a - b) < 1e-9

    def test_round_trip(self):
        sol = holevo_bound(equatorial(), [0.1, 0.2], np.eye(2))
        again = HolevoSolution.from_dict(sol.to_dict())
        assert again.value == sol.value and np.allclose(again.v_opt, sol.v_opt)

    def test_tampered_payload_rejected(self):
        data = holevo_bound(equatorial(), [0.1, 0.2], np.eye(2)).to_dict()
        data["dual_value"] = data["value"] + 0.1
        with pytest.raises(ValidationError):
            HolevoSolution.from_dict(data)

    def test_singular_weight(self):
        with pytest.raises(InfeasibleError):
            holevo_bound(full_bloch(), BLOCH_THETA, np.diag([1.0, 1.0, 0.0]))

    def test_singular_model(self):
        model = affine(np.eye(2) / 2, [PAULIS[2] / 2, PAULIS[2] / 2])
        with pytest.raises(InfeasibleError):
            holevo_bound(model, [0.0, 0.0], np.eye(2))


class TestObjectiveGradient:
    def test_smoothed_gradient_matches_finite_differences(self, rng):
        model = full_bloch()
        m, a, _, _ = holevo_problem(model.matrix(BLOCH_THETA), model.derivatives(BLOCH_THETA))
        g = random_weight(3, rng)
        r = psd_sqrt_real(g)
        y = rng.normal(size=a.shape)
        eps = 1e-2
        _, grad = _objective(y, m, r, g, eps)
        step = 1e-6
        fd = np.zeros_like(y)
        for idx in np.ndindex(*y.shape):
            e = np.zeros_like(y)
            e[idx] = step
            fd[idx] = (_objective(y + e, m, r, g, eps)[0] - _objective(y - e, m, r, g, eps)[0]) / (2 * step)
        assert np.allclose(grad, fd, rtol=1e-5, atol=1e-6)


class TestDual:
    def test_scalar(self):
        g = 2.0
        sol = holevo_bound(bloch_line(), [0.4], [[g]])
        k0, ck = dual_from_primal(sol)
        cg = sol.value
        assert sol.v_opt[0, 0] == pytest.approx(cg / g, rel=1e-8)
        assert k0.matrix[0, 0] == pytest.approx(cg**2 / g, rel=1e-8)
        assert ck == pytest.approx(cg)
        h = helstrom_info(bloch_line(), [0.4]).matrix[0, 0]
        for frac in (0.2, 0.7, 1.0):
            assert k0.matrix[0, 0] * frac * h <= ck + 1e-9

    def test_full_bloch_dual_value(self):
        theta = np.array([0.5, 0.0, 0.0])
        sol = holevo_bound(full_bloch(), theta, quarter_h(full_bloch(), theta))
        assert dual_from_primal(sol)[1] == pytest.approx(1.0, abs=1e-3)

    def test_converse_map(self):
        g = quarter_h(full_bloch(), BLOCH_THETA)
        sol = holevo_bound(full_bloch(), BLOCH_THETA, g)
        k0, _ = dual_from_primal(sol)
        assert np.allclose(weight_from_dual(k0.matrix, sol.v_opt), g, atol=1e-6)

    def test_random_povms_respect_cap(self, rng):
        theta = np.array([0.0, 0.0, 0.5])
        sol = holevo_bound(full_bloch(), theta, quarter_h(full_bloch(), theta))
        k0, ck = dual_from_primal(sol)
        rep = verify_dual_bound(full_bloch(), theta, k0, ck, [random_povm(2, 4, rng) for _ in range(200)])
        assert rep["violations"] == 0 and rep["max_value"] <= ck + 1e-6

    def test_trivial_povm(self):
        sol = holevo_bound(equatorial(), [0.2, 0.1], np.eye(2))
        k0, ck = dual_from_primal(sol)
        rep = verify_dual_bound(equatorial(), [0.2, 0.1], k0, ck, [Povm.trivial(2)])
        assert rep["max_value"] == pytest.approx(0.0, abs=1e-14)

    def test_best_projective_single_copy_value(self):
        # single-copy projective measurements reach exactly half the dual cap here
        theta = np.array([0.3, 0.0])
        sol = holevo_bound(equatorial(), theta, quarter_h(equatorial(), theta))
        k0, ck = dual_from_primal(sol)
        angles = np.linspace(0, np.pi, 181)
        povms = [Povm.from_basis(np.linalg.eigh(np.cos(a) * PAULIS[0] + np.sin(a) * PAULIS[1])[1]) for a in angles]
        rep = verify_dual_bound(equatorial(), theta, k0, ck, povms)
        assert rep["violations"] == 0
        assert rep["max_value"] == pytest.approx(ck / 2, rel=1e-3)

    def test_weight_from_dual_shape(self):
        assert np.allclose(weight_from_dual(np.eye(2), 2 * np.eye(2)), 0.25 * np.eye(2))


class TestSupportStructure:
    def test_scalar(self):
        rep = support_structure_check(bloch_line(), [0.3], [[[1.0]], [[3.0]]])
        assert rep["ok"]

    def test_equatorial_random_weights(self, rng):
        rep = support_structure_check(equatorial(), [0.2, -0.3], [random_weight(2, rng) for _ in range(10)])
        assert rep["ok"] and rep["min_cross_slack"] >= -1e-5 and rep["min_midpoint_slack"] >= -1e-5

    def test_needs_two(self):
        with pytest.raises(ValidationError):
            support_structure_check(bloch_line(), [0.3], [[[1.0]]])


class TestWeightMatrix:
    def test_asymmetric(self):
        with pytest.raises(ValidationError):
            WeightMatrix(np.array([[1.0, 0.5], [0.0, 1.0]]))
