"""Acceptance criteria. Run with ``pytest tests/test_acceptance.py -s`` to see one
PASS/FAIL line per criterion."""
import time

import numpy as np
import pytest

from qcrb.core import Povm, random_povm
from qcrb.gaussian import GaussianShift, SymplecticForm, multimode_minimax, sample_covariant_measurement, single_mode_minimax
from qcrb.holevo import dual_from_primal, holevo_bound, verify_dual_bound
from qcrb.models import bloch_line, equatorial, full_bloch, pure_state
from qcrb.qlan import clt_empirical_check, l_map, limit_model
from qcrb.simulate import Estimator, MeasurementScheme, covariant_info_check, risk_experiment
from qcrb.vantrees import asymptotic_bound, box_cos2_prior, fidelity_loss, quadratic_loss

RADII = np.arange(1, 10) / 10
EQUATORIAL_POINTS = [(0.0, 0.0), (0.3, 0.1), (-0.5, 0.4), (0.1, -0.8), (0.6, 0.6)]


def report(k, ok, detail):
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
    assert ok, detail


def fid_bound(model, theta):
    theta = np.asarray(theta, dtype=float)
    return holevo_bound(model, theta, fidelity_loss(model).g0(theta))


def random_povms(d, n, seed):
    rng = np.random.default_rng(seed)
    return [random_povm(d, int(rng.integers(2, 7)), rng) for _ in range(n)]


def test_criterion_1_full_bloch():
    model = full_bloch()
    errs, times = [], []
    for r in RADII:
        t0 = time.perf_counter()
        val = fid_bound(model, [0.0, 0.0, r]).value
        times.append(time.perf_counter() - t0)
        errs.append(abs(val - (3 + 2 * r) / 4))
    report(1, max(errs) < 1e-3 and max(times) < 10,
           f"full Bloch C_G0 = (3+2r)/4, max error {max(errs):.2e}, slowest point {max(times):.2f}s")


def test_criterion_2_equatorial():
    errs = [abs(fid_bound(equatorial(), th).value - 0.5) for th in EQUATORIAL_POINTS]
    report(2, max(errs) < 1e-3, f"equatorial C_G0 = 1/2 at {len(errs)} points, max error {max(errs):.2e}")


@pytest.mark.parametrize("d", [2, 3])
def test_criterion_3_pure(d):
    model = pure_state(d)
    val = fid_bound(model, model.reference()).value
    rel = abs(val - (d - 1)) / (d - 1)
    report(3, rel < 1e-2, f"pure d={d} C_G0 = {val:.6f}, relative error {rel:.2e}")


@pytest.mark.parametrize("model,theta", [
    *[(full_bloch(), [0.0, 0.0, r]) for r in (0.1, 0.5, 0.9)],
    *[(equatorial(), th) for th in EQUATORIAL_POINTS[:3]],
    (pure_state(2), None),
], ids=lambda x: getattr(x, "name", None) or str(x))
def test_criterion_4_dual(model, theta):
    theta = model.reference() if theta is None else np.asarray(theta, dtype=float)
    k0, c_k = dual_from_primal(fid_bound(model, theta))
    out = verify_dual_bound(model, theta, k0, c_k, random_povms(2, 500, 4))
    report(4, out["violations"] == 0,
           f"{model.name} dual: {out['violations']} violations in 500 POVMs, "
           f"max trace(K0 I_M) {out['max_value']:.4f} <= C^K {c_k:.4f}")


def test_criterion_5_covariant():
    t0 = time.perf_counter()
    out = covariant_info_check(2, 10_000, 5)
    elapsed = time.perf_counter() - t0
    tr_err = abs(out["trace_hinv_info"] - 1.0)
    ok = out["max_entry_deviation"] < 0.02 and tr_err < 0.02 and elapsed < 60
    report(5, ok, f"random-basis info vs H/2 deviation {out['max_entry_deviation']:.4f}, "
                  f"trace error {tr_err:.1e}, {elapsed:.1f}s")


def test_criterion_6_random_basis_mle():
    rep = risk_experiment(pure_state(2), np.zeros(2), MeasurementScheme.random_basis(), Estimator(), "fidelity",
                          10_000, 2000, 6, bound=1.0)
    ok = rep.empirical_risk >= 1.0 - 3 * rep.std_error and rep.empirical_risk <= 1.3
    report(6, ok, f"N x risk = {rep.empirical_risk:.4f} +- {rep.std_error:.4f} in [1 - 3SE, 1.3]")


def test_criterion_7_single_mode():
    rng = np.random.default_rng(7)
    errs, samp = [], []
    for i in range(100):
        a = rng.normal(size=(2, 2))
        g = a @ a.T + 0.1 * np.eye(2)
        b = rng.normal(size=(2, 2)) + 0.1 * np.eye(2)
        v = b @ b.T
        v *= 0.5 / np.sqrt(np.linalg.det(v)) * (1 + 2 * rng.random())
        closed = np.trace(g @ v) + np.sqrt(np.linalg.det(g))
        shift = GaussianShift(v, np.eye(2), SymplecticForm(1))
        solved = multimode_minimax(shift, g)
        # a symplectic L (squeeze x rotation) forces y = L^-1, so the risk must not move
        phi, sq = rng.uniform(0, np.pi), np.exp(rng.normal(scale=0.5))
        l_mat = np.diag([sq, 1 / sq]) @ np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
        moved = multimode_minimax(GaussianShift(l_mat @ v @ l_mat.T, l_mat, SymplecticForm(1)), g)["risk"]
        errs += [abs(single_mode_minimax(g, v)["risk"] - closed), abs(solved["risk"] - closed),
                 abs(moved - closed)]
        if i < 5:
            h = rng.normal(size=2)
            dev = sample_covariant_measurement(shift, solved["measurement"], h, 100_000, rng) - h
            samp.append(abs(np.einsum("na,ab,nb->n", dev, g, dev).mean() / closed - 1))
    ok = max(errs) < 1e-10 and max(samp) < 0.02
    report(7, ok, f"single-mode closed form vs solver max error {max(errs):.1e}, "
                  f"sampled risk max relative deviation {max(samp):.4f}")


@pytest.mark.parametrize("r", [0.5])
def test_criterion_8_qlan_holevo(r):
    model = full_bloch()
    theta = np.array([0.0, 0.0, r])
    g = fidelity_loss(model).g0(theta)
    lim = limit_model(model.matrix(theta))
    gauss = multimode_minimax(lim.shift(l_map(model, theta, lim.basis)), g)["risk"]
    hol = holevo_bound(model, theta, g).value
    report(8, abs(gauss - hol) < 1e-3, f"limit Gaussian minimax {gauss:.6f} vs Holevo {hol:.6f}")


def test_criterion_9_clt():
    row = clt_empirical_check(np.diag([0.7, 0.3]), np.zeros(3), 10_000, 5000, seed=9, observables=["C1"]).rows[0]
    ok = abs(row["variance"] / 0.21 - 1) < 0.05 and row["ks"] < 0.03
    report(9, ok, f"C1 variance {row['variance']:.4f} (0.21 +- 5%), KS {row['ks']:.4f} < 0.03")


def test_criterion_10_bayes():
    model = bloch_line()
    prior = box_cos2_prior([-0.5], [0.5])
    loss = quadratic_loss(np.eye(1))
    bound = asymptotic_bound(model, prior, loss).value
    z = MeasurementScheme.per_copy_fixed(Povm.from_basis(np.eye(2)))
    rep = risk_experiment(model, prior, z, Estimator(), loss, 10_000, 2000, 10, bound=bound)
    ok = abs(bound - 0.96733) < 1e-3 and rep.empirical_risk >= bound - 3 * rep.std_error
    report(10, ok, f"asymptotic Bayes bound {bound:.5f} (0.96733), "
                   f"N x Bayes risk {rep.empirical_risk:.4f} +- {rep.std_error:.4f}")
