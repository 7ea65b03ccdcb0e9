"""Classical-quantum Gaussian shift models at the covariance level.

A shift model is the family of Gaussian states with fixed covariance V and
mean L h. Its symplectic form has the canonical block layout
Diag(Omega, ..., Omega, 0, ..., 0) with Omega = [[0, 1], [-1, 0]].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, UncertaintyError, ValidationError
from .holevo import WeightMatrix, psd_sqrt_real, solve_weighted_trace_abs

UNCERTAINTY_TOL = 1e-9
UNBIASED_TOL = 1e-8
CHOLESKY_CLAMP = 1e-12
OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _sym(a):
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class SymplecticForm:
    """Canonical symplectic matrix with ``quantum_modes`` Omega blocks and
    ``classical`` zero rows/columns."""

    quantum_modes: int
    classical: int = 0

    def __post_init__(self):
        if self.quantum_modes < 0 or self.classical < 0:
            raise ValidationError("mode counts must be non-negative")

    @property
    def dim(self) -> int:
        return 2 * self.quantum_modes + self.classical

    @property
    def matrix(self) -> np.ndarray:
        s = np.zeros((self.dim, self.dim))
        for j in range(self.quantum_modes):
            s[2 * j: 2 * j + 2, 2 * j: 2 * j + 2] = OMEGA
        return s

    @classmethod
    def from_matrix(cls, s, tol: float = 1e-10) -> "SymplecticForm":
        s = np.atleast_2d(np.asarray(s, dtype=float))
        if s.shape[0] != s.shape[1]:
            raise DimensionError("symplectic form must be square")
        if np.max(np.abs(s + s.T), initial=0.0) > 1e-12:
            raise ValidationError("symplectic form is not antisymmetric")
        m = s.shape[0]
        p = 0
        while 2 * p + 1 < m and abs(s[2 * p, 2 * p + 1] - 1) <= tol:
            p += 1
        form = cls(p, m - 2 * p)
        if np.max(np.abs(form.matrix - s), initial=0.0) > tol:
            raise ValidationError("matrix does not have the canonical Diag(Omega,...,0,...) layout")
        return form


def uncertainty_check(v, s) -> dict:
    """Smallest eigenvalue of V + (i/2) S; valid when it is >= -1e-9."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    s = s.matrix if isinstance(s, SymplecticForm) else np.atleast_2d(np.asarray(s, dtype=float))
    if v.shape != s.shape:
        raise DimensionError(f"covariance {v.shape} and symplectic form {s.shape} differ")
    lam = float(np.linalg.eigvalsh(_sym(v) + 0.5j * s)[0])
    return {"valid": lam >= -UNCERTAINTY_TOL, "min_eigenvalue": lam}


@dataclass(frozen=True)
class GaussianState:
    mean: np.ndarray
    covariance: np.ndarray
    symplectic: SymplecticForm

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        x = np.asarray(self.mean, dtype=float).ravel()
        if v.shape != (self.symplectic.dim,) * 2 or x.size != self.symplectic.dim:
            raise DimensionError("mean, covariance and symplectic form have inconsistent sizes")
        if np.max(np.abs(v - v.T)) > 1e-12 * max(1.0, np.abs(v).max()):
            raise ValidationError("covariance is not symmetric")
        check = uncertainty_check(v, self.symplectic)
        if not check["valid"]:
            raise UncertaintyError(f"V + (i/2)S has eigenvalue {check['min_eigenvalue']:.3e} < 0")
        object.__setattr__(self, "covariance", _sym(v))
        object.__setattr__(self, "mean", x)


@dataclass(frozen=True)
class GaussianShift:
    """Family {Phi(L h, V)}; L is m x k with independent columns."""

    covariance: np.ndarray
    l_matrix: np.ndarray
    symplectic: SymplecticForm

    def __post_init__(self):
        GaussianState(np.zeros(self.symplectic.dim), self.covariance, self.symplectic)
        v = _sym(np.atleast_2d(np.asarray(self.covariance, dtype=float)))
        l_mat = np.atleast_2d(np.asarray(self.l_matrix, dtype=float))
        if l_mat.shape[0] != self.symplectic.dim:
            raise DimensionError(f"L has {l_mat.shape[0]} rows, expected {self.symplectic.dim}")
        object.__setattr__(self, "covariance", v)
        object.__setattr__(self, "l_matrix", l_mat)

    @property
    def k(self) -> int:
        return self.l_matrix.shape[1]

    @property
    def m(self) -> int:
        return self.symplectic.dim

    def state(self, h) -> GaussianState:
        return GaussianState(self.l_matrix @ np.asarray(h, dtype=float), self.covariance, self.symplectic)

    def to_dict(self) -> dict:
        return {
            "covariance": self.covariance.tolist(),
            "L": self.l_matrix.tolist(),
            "quantum_modes": self.symplectic.quantum_modes,
            "classical": self.symplectic.classical,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianShift":
        return cls(np.array(data["covariance"]), np.array(data["L"]),
                   SymplecticForm(data["quantum_modes"], data["classical"]))


@dataclass(frozen=True)
class LinearMeasurement:
    """Y = y X measured jointly with auxiliary variables of covariance ``aux_covariance``."""

    y_coeffs: np.ndarray
    aux_covariance: np.ndarray

    def check(self, shift: GaussianShift) -> "LinearMeasurement":
        y = self.y_coeffs
        bias = float(np.max(np.abs(y @ shift.l_matrix - np.eye(shift.k))))
        if bias > UNBIASED_TOL:
            raise ValidationError(f"measurement is biased: |yL - I| = {bias:.3e}")
        s_y = y @ shift.symplectic.matrix @ y.T
        lam = float(np.linalg.eigvalsh(self.aux_covariance + 0.5j * s_y)[0])
        if lam < -UNCERTAINTY_TOL * max(1.0, np.abs(s_y).max()):
            raise UncertaintyError(f"auxiliary covariance violates uncertainty ({lam:.3e})")
        return self

    def output_covariance(self, shift: GaussianShift) -> np.ndarray:
        y = self.y_coeffs
        return _sym(y @ shift.covariance @ y.T + self.aux_covariance)

    def to_dict(self) -> dict:
        return {"y_coeffs": self.y_coeffs.tolist(), "aux_covariance": self.aux_covariance.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "LinearMeasurement":
        return cls(np.array(data["y_coeffs"], dtype=float), np.array(data["aux_covariance"], dtype=float))


def abs_antisymmetric(s) -> np.ndarray:
    """|S| = (S^T S)^(1/2) for a real antisymmetric S."""
    s = np.atleast_2d(np.asarray(s, dtype=float))
    return psd_sqrt_real(_sym(s.T @ s))


def single_mode_minimax(g, v) -> dict:
    """Closed-form minimax risk Tr(G V) + sqrt(det G) and the optimal added noise Y0."""
    g = WeightMatrix(np.asarray(g, dtype=float)).matrix
    v = np.asarray(v, dtype=float)
    if g.shape != (2, 2) or v.shape != (2, 2):
        raise DimensionError("single-mode inputs must be 2 x 2")
    if np.linalg.det(v) < 0.25 - UNCERTAINTY_TOL or not uncertainty_check(v, OMEGA)["valid"]:
        raise UncertaintyError(f"det V = {np.linalg.det(v):.6g} < 1/4")
    gvals, o = np.linalg.eigh(g)
    g1, g2 = gvals
    y0 = 0.5 * o @ np.diag([np.sqrt(g2 / g1), np.sqrt(g1 / g2)]) @ o.T
    return {"risk": float(np.trace(g @ v) + np.sqrt(g1 * g2)), "Y0": _sym(y0)}


def abs_symplectic_lemma(v, s) -> dict:
    """Tr V >= Tr|S| / 2 for any V >= (i/2) S."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if not uncertainty_check(v, s)["valid"]:
        raise UncertaintyError("V does not satisfy V >= (i/2)S")
    return {"lhs": float(np.trace(v)), "rhs": float(0.5 * np.trace(abs_antisymmetric(s)))}


def optimal_aux_covariance(s_y, g) -> np.ndarray:
    """Minimiser of Tr(G A) over A >= (i/2) S^Y: G^(-1/2) |G^(1/2) S^Y G^(1/2)| G^(-1/2) / 2."""
    r = psd_sqrt_real(g)
    r_inv = np.linalg.inv(r)
    return _sym(0.5 * r_inv @ abs_antisymmetric(r @ s_y @ r) @ r_inv)


def minimax_objective(shift: GaussianShift, y, g) -> float:
    r = psd_sqrt_real(g)
    v_y = y @ shift.covariance @ y.T
    s_y = y @ shift.symplectic.matrix @ y.T
    return float(np.trace(r @ v_y @ r) + 0.5 * np.trace(abs_antisymmetric(r @ s_y @ r)))


def multimode_minimax(shift: GaussianShift, g) -> dict:
    """Minimax risk over unbiased linear measurements y L = I.

    Minimises Tr(sqrt(G) y V y^T sqrt(G)) + Tr|sqrt(G) y S y^T sqrt(G)|/2 with the
    same smoothed solver as the Holevo bound (M = V + iS/2, constraint matrix L^T).
    """
    g = WeightMatrix(np.asarray(g, dtype=float)).matrix
    if g.shape != (shift.k, shift.k):
        raise DimensionError(f"weight is {g.shape}, expected {(shift.k, shift.k)}")
    m_mat = shift.covariance + 0.5j * shift.symplectic.matrix
    res = solve_weighted_trace_abs(m_mat, shift.l_matrix.T, g)
    y = res.y
    s_y = y @ shift.symplectic.matrix @ y.T
    meas = LinearMeasurement(y, optimal_aux_covariance(s_y, g)).check(shift)
    return {"risk": res.value, "measurement": meas, "diagnostics": res.diagnostics}


def _clamped_factor(cov: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh(_sym(cov))
    if w[0] < -1e-9 * max(1.0, abs(w[-1])):
        raise UncertaintyError("output covariance is not positive semidefinite")
    w = np.maximum(w, CHOLESKY_CLAMP * max(1.0, abs(w[-1])))
    return np.linalg.cholesky(_sym((u * w) @ u.T))


def sample_covariant_measurement(shift: GaussianShift, measurement: LinearMeasurement, h,
                                 n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Outcomes of the covariant measurement: Normal(h, y V y^T + aux), shape (n, k)."""
    measurement.check(shift)
    h = np.asarray(h, dtype=float).ravel()
    if h.size != shift.k:
        raise DimensionError(f"h has {h.size} entries, expected {shift.k}")
    chol = _clamped_factor(measurement.output_covariance(shift))
    return h + rng.standard_normal((int(n_samples), shift.k)) @ chol.T


__all__ = [
    "OMEGA", "SymplecticForm", "GaussianState", "GaussianShift", "LinearMeasurement",
    "uncertainty_check", "single_mode_minimax", "abs_symplectic_lemma", "abs_antisymmetric",
    "optimal_aux_covariance", "minimax_objective", "multimode_minimax",
    "sample_covariant_measurement",
]
