"""Classical Fisher information of measurement outcomes and the Helstrom matrix.

The Helstrom matrix has two independent routes: symmetric logarithmic
derivatives (exact, needs a nonsingular state) and the Hessian of the fidelity
(any state). Tests hold them against each other.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .core import ParametricModel, Povm, fidelity, hermitian_part
from .errors import DimensionError, ResourceError, SingularModelError, SingularStateError, ValidationError

P_ZERO = 1e-12
DP_ZERO = 1e-8
SINGULAR_EIG = 1e-10
HESSIAN_STEP = 1e-3
MAX_COLLECTIVE_DIM = 4096


class InfoKind(str, enum.Enum):
    MEASUREMENT = "Measurement"
    HELSTROM = "Helstrom"
    AVERAGE_PER_COPY = "AveragePerCopy"


@dataclass(frozen=True)
class InfoMatrix:
    matrix: np.ndarray
    kind: InfoKind

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if not np.allclose(m, m.T, atol=1e-8, rtol=0):
            raise ValidationError("information matrix is not symmetric")
        m = 0.5 * (m + m.T)
        if np.linalg.eigvalsh(m)[0] < -1e-8 * max(1.0, np.abs(m).max()):
            raise ValidationError("information matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def inv(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)


@dataclass(frozen=True)
class SldSet:
    lambdas: tuple

    def residual(self, rho, drhos) -> float:
        return max(
            float(np.max(np.abs(0.5 * (lam @ rho + rho @ lam) - dr)))
            for lam, dr in zip(self.lambdas, drhos)
        )


def fisher_info_raw(rho: np.ndarray, drhos, effects: np.ndarray) -> np.ndarray:
    """Fisher information sum_x d_i p_x d_j p_x / p_x for stacked effects (n, d, d)."""
    p = np.einsum("ij,xji->x", rho, effects).real
    dp = np.array([np.einsum("ij,xji->x", dr, effects).real for dr in drhos])
    zero = p <= P_ZERO
    if np.any(zero):
        if np.any(np.abs(dp[:, zero]) > DP_ZERO):
            raise SingularModelError("zero-probability outcome has a nonzero derivative")
        p, dp = p[~zero], dp[:, ~zero]
    return (dp / p) @ dp.T


def fisher_info(model: ParametricModel, theta, povm: Povm) -> InfoMatrix:
    rho = model.matrix(theta)
    if rho.shape[0] != povm.dim:
        raise DimensionError(f"model dim {rho.shape[0]} != POVM dim {povm.dim}")
    return InfoMatrix(fisher_info_raw(rho, model.derivatives(theta), povm.stacked()), InfoKind.MEASUREMENT)


def sld_raw(rho: np.ndarray, drhos, allow_singular: bool = False) -> list:
    """Solve d_i rho = (L rho + rho L)/2 in the eigenbasis of rho.

    With ``allow_singular`` the kernel-kernel block is set to zero; this is the
    exact SLD whenever the derivatives have no kernel-kernel component, which
    includes every pure-state model.
    """
    mu, u = np.linalg.eigh(hermitian_part(rho))
    if mu[0] <= SINGULAR_EIG and not allow_singular:
        raise SingularStateError(f"state is singular (smallest eigenvalue {mu[0]:.3e})")
    denom = mu[:, None] + mu[None, :]
    live = denom > SINGULAR_EIG
    out = []
    for dr in drhos:
        d_eig = u.conj().T @ dr @ u
        lam = np.where(live, 2 * d_eig / np.where(live, denom, 1.0), 0.0)
        out.append(hermitian_part(u @ lam @ u.conj().T))
    return out


def sld(model: ParametricModel, theta) -> SldSet:
    return SldSet(tuple(sld_raw(model.matrix(theta), model.derivatives(theta))))


def helstrom_from_slds(rho: np.ndarray, lambdas) -> np.ndarray:
    p = len(lambdas)
    h = np.empty((p, p))
    for i in range(p):
        for j in range(i, p):
            h[i, j] = h[j, i] = np.trace(rho @ lambdas[i] @ lambdas[j]).real
    return h


def _infidelity(model, theta, delta):
    return 1.0 - fidelity(model.matrix(theta), model.matrix(theta + delta))


def _fidelity_hessian(model, theta, h):
    p = model.param_dim
    hess = np.empty((p, p))
    eye = np.eye(p) * h
    for i in range(p):
        hess[i, i] = (_infidelity(model, theta, eye[i]) + _infidelity(model, theta, -eye[i])) / h**2
        for j in range(i + 1, p):
            s = (
                _infidelity(model, theta, eye[i] + eye[j])
                - _infidelity(model, theta, eye[i] - eye[j])
                - _infidelity(model, theta, -eye[i] + eye[j])
                + _infidelity(model, theta, -eye[i] - eye[j])
            ) / (4 * h**2)
            hess[i, j] = hess[j, i] = s
    return hess


def helstrom_info_fidelity(model: ParametricModel, theta, step: float = HESSIAN_STEP) -> InfoMatrix:
    """H = 2 x Hessian of 1 - Fid, central differences with one Richardson step."""
    theta = model.check(theta)
    coarse = _fidelity_hessian(model, theta, step)
    fine = _fidelity_hessian(model, theta, step / 2)
    return InfoMatrix(2 * (4 * fine - coarse) / 3, InfoKind.HELSTROM)


def helstrom_info(model: ParametricModel, theta, method: str = "auto") -> InfoMatrix:
    """Helstrom matrix Re trace(rho L_i L_j); falls back to the fidelity Hessian
    for singular states when ``method='auto'``."""
    rho = model.matrix(theta)
    if method in ("auto", "sld"):
        try:
            lams = sld_raw(rho, model.derivatives(theta))
            return InfoMatrix(helstrom_from_slds(rho, lams), InfoKind.HELSTROM)
        except SingularStateError:
            if method == "sld":
                raise
    if method in ("auto", "fidelity"):
        try:
            return helstrom_info_fidelity(model, theta)
        except Exception as exc:
            raise SingularStateError(f"Helstrom matrix unavailable at theta={theta}: {exc}") from exc
    raise ValueError(f"unknown method {method!r}")


def _kron_all(mats):
    return reduce(np.kron, mats)


def tensor_power_derivatives(rho: np.ndarray, drhos, n: int):
    """rho^{(x)n} and its parameter derivatives by the product rule."""
    big = _kron_all([rho] * n)
    dbig = [sum(_kron_all([dr if s == k else rho for s in range(n)]) for k in range(n)) for dr in drhos]
    return big, dbig


def average_info(model: ParametricModel, theta, collective_povm: Povm, n: int) -> InfoMatrix:
    rho = model.matrix(theta)
    d = rho.shape[0]
    if d**n > MAX_COLLECTIVE_DIM:
        raise ResourceError(f"d^N = {d ** n} exceeds the dense limit {MAX_COLLECTIVE_DIM}")
    if collective_povm.dim != d**n:
        raise DimensionError(f"collective POVM dim {collective_povm.dim} != d^N = {d ** n}")
    big, dbig = tensor_power_derivatives(rho, model.derivatives(theta), n)
    return InfoMatrix(fisher_info_raw(big, dbig, collective_povm.stacked()) / n, InfoKind.AVERAGE_PER_COPY)
