"""Holevo bound C_G, its optimizers, and the dual information bound C^K.

The bound is the value of

    min_y  trace Re(R y M y^T R) + trace |Im(R y M y^T R)|,   y A^T = I,

with R = G^(1/2), M the Hermitian Gram matrix trace(rho B_a B_b) of a centered
operator basis and A the derivative pairing trace(d_i rho B_a). The Gaussian
minimax problem has exactly the same form with M = V + (i/2) S, so both share
:func:`solve_weighted_trace_abs`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize

from .core import ParametricModel, Povm, abs_hermitian, hermitian_basis, matrix_from_json, matrix_to_json
from .errors import ConvergenceError, InfeasibleError, SingularError, ValidationError
from .fisher import fisher_info_raw, helstrom_from_slds, sld_raw

MAX_ITERATIONS = 50_000
SMOOTHING_STAGES = 7
CONSTRAINT_TOL = 1e-8


def _sym(a):
    return 0.5 * (a + a.T)


def psd_sqrt_real(g: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh(_sym(g))
    return (u * np.sqrt(np.clip(w, 0, None))) @ u.T


@dataclass(frozen=True)
class WeightMatrix:
    """Symmetric positive-definite loss weight (also used for K in the dual)."""

    matrix: np.ndarray

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if g.shape[0] != g.shape[1]:
            raise ValidationError("weight matrix must be square")
        if not np.allclose(g, g.T, atol=1e-10 * max(1.0, np.abs(g).max()), rtol=0):
            raise ValidationError("weight matrix is not symmetric")
        g = _sym(g)
        if np.linalg.eigvalsh(g)[0] <= 1e-10:
            raise InfeasibleError("weight matrix is not positive definite")
        g.setflags(write=False)
        object.__setattr__(self, "matrix", g)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _as_weight(g) -> WeightMatrix:
    return g if isinstance(g, WeightMatrix) else WeightMatrix(np.asarray(g, dtype=float))


def _objective(y, m, r, g, eps):
    """Smoothed objective and its gradient with respect to y.

    |x| is replaced by sqrt(x^2 + eps^2) on the eigenvalues of i Im W; the
    gradient of a spectral function is U diag(phi') U^* even at degeneracies.
    """
    z = y @ m @ y.T
    w = r @ z @ r
    t = 0.5 * (w - w.T)
    lam, u = np.linalg.eigh(t)
    phi = np.sqrt(lam**2 + eps**2) if eps > 0 else np.abs(lam)
    value = float(np.trace(w).real + phi.sum())
    with np.errstate(invalid="ignore", divide="ignore"):
        dphi = np.where(phi > 0, lam / np.where(phi > 0, phi, 1.0), 0.0)
    dmat = (u * dphi) @ u.conj().T
    rdr = r @ dmat @ r
    e = g + 0.5 * (rdr - rdr.T)
    grad = (e.T @ y @ m.T + e @ y @ m).real
    return value, grad


def trace_abs_objective(y, m, g) -> float:
    """Exact (unsmoothed) objective value at y."""
    g = np.asarray(g, dtype=float)
    return _objective(np.asarray(y, dtype=float), m, psd_sqrt_real(g), g, 0.0)[0]


@dataclass
class SolverResult:
    y: np.ndarray
    value: float
    w: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def solve_weighted_trace_abs(m, a, g, y_start=None, stages: int = SMOOTHING_STAGES,
                             max_iterations: int = MAX_ITERATIONS) -> SolverResult:
    """Minimize trace Re W + trace |Im W|, W = R y M y^T R, subject to y A^T = I.

    The affine constraint is eliminated with y = y0 + z N^T, N spanning the
    null space of A. The smoothing width descends geometrically from 1e-2 to
    1e-8 (relative to the objective scale); each stage is solved by L-BFGS
    warm-started from the previous one.
    """
    m = np.asarray(m, dtype=complex)
    a = np.atleast_2d(np.asarray(a, dtype=float))
    g = _as_weight(g).matrix
    k, n = a.shape
    if g.shape != (k, k):
        raise ValidationError(f"weight is {g.shape}, expected {(k, k)}")
    sv = np.linalg.svd(a, compute_uv=False)
    if k > n or sv[-1] <= 1e-10 * max(1.0, sv[0]):
        raise InfeasibleError("unbiasedness constraints are infeasible (rank-deficient derivative map)")
    r = psd_sqrt_real(g)
    y0 = np.linalg.solve(a @ a.T, a)
    nmat = null_space(a)
    free = nmat.shape[1]

    def unpack(zvec):
        return y0 + zvec.reshape(k, free) @ nmat.T if free else y0

    if y_start is not None and free:
        z = ((np.asarray(y_start, dtype=float) - y0) @ nmat).ravel()
    else:
        z = np.zeros(k * free)

    scale = max(abs(_objective(unpack(z), m, r, g, 0.0)[0]), 1e-300)
    history = []
    iterations = 0
    converged = True
    if free:
        for stage in range(stages):
            eps = scale * 10.0 ** (-2 - stage)

            def fun(zvec, eps=eps):
                val, grad_y = _objective(unpack(zvec), m, r, g, eps)
                return val, (grad_y @ nmat).ravel()

            budget = max(1, max_iterations - iterations)
            res = minimize(fun, z, jac=True, method="L-BFGS-B",
                           options={"maxiter": budget, "maxcor": 30, "ftol": 1e-15,
                                    "gtol": 1e-13 * scale, "maxls": 50})
            iterations += int(res.nit)
            if np.all(np.isfinite(res.x)) and res.fun <= fun(z)[0] + 1e-15 * scale:
                z = res.x
            history.append({"eps": eps, "value": float(res.fun), "iterations": int(res.nit),
                            "message": str(res.message)})
            if iterations >= max_iterations:
                converged = False
                break

    y = unpack(z)
    value, _ = _objective(y, m, r, g, 0.0)
    w = r @ (y @ m @ y.T) @ r
    residual = float(np.max(np.abs(y @ a.T - np.eye(k))))
    diagnostics = {
        "iterations": iterations,
        "stages": history,
        "constraint_violation": residual,
        "free_dimension": k * free,
    }
    if not np.isfinite(value) or residual > CONSTRAINT_TOL or not converged:
        raise ConvergenceError("Holevo solver did not converge", diagnostics)
    return SolverResult(y=y, value=float(value), w=w, diagnostics=diagnostics)


def optimal_v(w: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Closed-form inner minimizer V0 = G^-1/2 (Re W + |Im W|) G^-1/2."""
    rinv = np.linalg.inv(psd_sqrt_real(g))
    absim = abs_hermitian(0.5 * (w - w.T)).real
    return _sym(rinv @ (w.real + absim) @ rinv)


def z_matrix(model: ParametricModel, theta, xs: Sequence[np.ndarray]) -> np.ndarray:
    """Z_ij = trace(rho X_i X_j)."""
    rho = model.matrix(theta)
    return np.array([[np.trace(rho @ xi @ xj) for xj in xs] for xi in xs])


@dataclass(frozen=True)
class HolevoSolution:
    value: float
    x_opt: tuple
    z_matrix: np.ndarray
    v_opt: np.ndarray
    dual_k: np.ndarray
    dual_value: float
    weight: np.ndarray
    rho: np.ndarray
    drho: tuple
    convergence: dict

    def invariant_report(self) -> dict:
        p = len(self.x_opt)
        unb = np.array([[np.trace(dr @ x).real for x in self.x_opt] for dr in self.drho])
        gap = self.v_opt - self.z_matrix
        return {
            "unbiasedness_residual": float(np.max(np.abs(unb - np.eye(p)))),
            "v_minus_z_min_eig": float(np.linalg.eigvalsh(0.5 * (gap + gap.conj().T))[0]),
            "value_minus_trace_gv": float(abs(self.value - np.trace(self.weight @ self.v_opt))),
            "dual_gap": float(abs(self.dual_value - self.value)),
        }

    def validate(self) -> "HolevoSolution":
        rep = self.invariant_report()
        scale = max(1.0, abs(self.value))
        if rep["unbiasedness_residual"] > 1e-6:
            raise ValidationError(f"unbiasedness residual {rep['unbiasedness_residual']:.2e}")
        if rep["v_minus_z_min_eig"] < -1e-6 * scale:
            raise ValidationError(f"V - Z not PSD ({rep['v_minus_z_min_eig']:.2e})")
        if rep["value_minus_trace_gv"] > 1e-6 * scale:
            raise ValidationError("value differs from trace(G V)")
        if rep["dual_gap"] > 1e-8 * scale:
            raise ValidationError("dual value differs from primal value")
        return self

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "x_opt": [matrix_to_json(x) for x in self.x_opt],
            "z_matrix": matrix_to_json(self.z_matrix),
            "v_opt": self.v_opt.tolist(),
            "dual_k": self.dual_k.tolist(),
            "dual_value": self.dual_value,
            "weight": self.weight.tolist(),
            "rho": matrix_to_json(self.rho),
            "drho": [matrix_to_json(d) for d in self.drho],
            "convergence": self.convergence,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HolevoSolution":
        return cls(
            value=float(data["value"]),
            x_opt=tuple(matrix_from_json(x) for x in data["x_opt"]),
            z_matrix=matrix_from_json(data["z_matrix"]),
            v_opt=np.asarray(data["v_opt"], dtype=float),
            dual_k=np.asarray(data["dual_k"], dtype=float),
            dual_value=float(data["dual_value"]),
            weight=np.asarray(data["weight"], dtype=float),
            rho=matrix_from_json(data["rho"]),
            drho=tuple(matrix_from_json(d) for d in data["drho"]),
            convergence=dict(data.get("convergence", {})),
        ).validate()


def holevo_problem(rho: np.ndarray, drhos) -> tuple:
    """Gram matrix M, derivative pairing A and the traceless basis used for y."""
    d = rho.shape[0]
    basis = hermitian_basis(d)[1:]
    centered = [b - np.trace(rho @ b).real * np.eye(d) for b in basis]
    m = np.array([[np.trace(rho @ ba @ bb) for bb in centered] for ba in centered])
    a = np.array([[np.trace(dr @ b).real for b in basis] for dr in drhos])
    return m, a, basis, centered


def sld_start(rho, drhos, basis) -> Optional[np.ndarray]:
    """Coordinates of X = H^-1 L, the Helstrom-bound solution, as a warm start."""
    lams = sld_raw(rho, drhos, allow_singular=True)
    h = helstrom_from_slds(rho, lams)
    if np.linalg.cond(h) > 1e12:
        return None
    coeffs = np.array([[np.trace(lam @ b).real for b in basis] for lam in lams])
    return np.linalg.solve(h, coeffs)


def holevo_bound(model: ParametricModel, theta, g) -> HolevoSolution:
    """C_G(theta) with optimal X, V, and the dual pair (K0, C^K0)."""
    g = _as_weight(g).matrix
    theta = model.check(theta)
    if g.shape != (model.param_dim, model.param_dim):
        raise ValidationError(f"weight must be {model.param_dim}x{model.param_dim}")
    rho = model.matrix(theta)
    drhos = model.derivatives(theta)
    m, a, basis, centered = holevo_problem(rho, drhos)
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[-1] <= 1e-10 * max(1.0, sv[0]):
        raise InfeasibleError("no locally unbiased observables exist (singular model)")
    start = sld_start(rho, drhos, basis)
    result = solve_weighted_trace_abs(m, a, g, y_start=start)
    xs = tuple(sum(c * b for c, b in zip(row, centered)) for row in result.y)
    z = result.y @ m @ result.y.T
    v0 = optimal_v(result.w, g)
    k0 = _sym(v0 @ g @ v0)
    return HolevoSolution(
        value=result.value,
        x_opt=xs,
        z_matrix=z,
        v_opt=v0,
        dual_k=k0,
        dual_value=result.value,
        weight=g.copy(),
        rho=rho,
        drho=tuple(drhos),
        convergence=result.diagnostics,
    ).validate()


def dual_from_primal(sol: HolevoSolution, g=None) -> tuple:
    """(K0, C^K0) with K0 = V0 G V0 and C^K0 = C_G."""
    gm = sol.weight if g is None else _as_weight(g).matrix
    if np.linalg.eigvalsh(sol.v_opt)[0] <= 1e-12 * max(1.0, np.abs(sol.v_opt).max()):
        raise SingularError("optimal V is singular; the dual weight is undefined")
    return WeightMatrix(_sym(sol.v_opt @ gm @ sol.v_opt)), sol.value


def weight_from_dual(k0, v0) -> np.ndarray:
    """Converse map G0 = I0 K0 I0 with I0 = V0^-1."""
    i0 = np.linalg.inv(v0)
    return _sym(i0 @ np.asarray(k0, dtype=float) @ i0)


def verify_dual_bound(model: ParametricModel, theta, k0, c_k: float, povms: Sequence[Povm],
                      tol: float = 1e-6) -> dict:
    """Check trace(K0 I_M) <= C^K0 for each POVM."""
    k = _as_weight(k0).matrix
    rho = model.matrix(theta)
    drhos = model.derivatives(theta)
    values = np.array([np.trace(k @ fisher_info_raw(rho, drhos, pv.stacked())) for pv in povms])
    worst = int(np.argmax(values)) if len(values) else -1
    return {
        "bound": float(c_k),
        "n_povms": len(povms),
        "max_value": float(values.max()) if len(values) else 0.0,
        "argmax": worst,
        "violations": int(np.sum(values > c_k + tol)),
        "values": values.tolist(),
    }


def support_structure_check(model: ParametricModel, theta, g_grid: Sequence, tol: float = 1e-5) -> dict:
    """Every V0(G) must satisfy trace(G' V0(G)) >= C_G' across the grid, and so
    must midpoints of pairs of V0's."""
    if len(g_grid) < 2:
        raise ValidationError("support check needs at least two weights")
    sols = [holevo_bound(model, theta, g) for g in g_grid]
    values = np.array([s.value for s in sols])
    gs = [s.weight for s in sols]
    vs = [s.v_opt for s in sols]
    cross = np.array([[np.trace(gp @ v) for v in vs] for gp in gs]) - values[:, None]
    mids = []
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            vm = 0.5 * (vs[i] + vs[j])
            mids.append(min(np.trace(gp @ vm) - c for gp, c in zip(gs, values)))
    return {
        "values": values.tolist(),
        "min_cross_slack": float(cross.min()),
        "min_midpoint_slack": float(min(mids)),
        "ok": bool(cross.min() >= -tol and min(mids) >= -tol),
    }
