"""Built-in parametric models used by the examples and the CLI.

Each factory returns a :class:`~qcrb.core.ParametricModel`. Models that admit
an exactly quadratic form of the fidelity loss also carry ``fidelity_embedding``
(see :func:`fidelity_embedding`).
"""
from __future__ import annotations

import re
from functools import partial

import numpy as np

from .core import PAULIS, ParametricModel, bloch_matrix, hermitian_part, matrix_from_json
from .errors import DomainError, ValidationError

_BALL_TOL = 1e-12


def _in_ball(theta, radius=1.0):
    return float(np.linalg.norm(theta)) <= radius + _BALL_TOL


def _bloch_vector(rho: np.ndarray) -> np.ndarray:
    return np.array([np.trace(rho @ s).real for s in PAULIS])


def _shrink(v: np.ndarray, radius: float = 1 - 1e-9) -> np.ndarray:
    n = np.linalg.norm(v)
    return v if n <= radius else v * (radius / n)


def full_bloch() -> ParametricModel:
    """Completely unknown qubit, rho = (1 + theta . sigma)/2, theta in the unit ball."""
    derivs = [0.5 * s for s in PAULIS]
    return ParametricModel(
        param_dim=3,
        state_fn=bloch_matrix,
        deriv_fn=lambda th: derivs,
        contains=_in_ball,
        domain="closed unit ball in R^3",
        name="full_bloch",
        project=lambda rho: _shrink(_bloch_vector(rho)),
        bounds=((-1, 1),) * 3,
    )


def equatorial() -> ParametricModel:
    """Qubit with theta_3 = 0 known."""
    derivs = [0.5 * PAULIS[0], 0.5 * PAULIS[1]]
    return ParametricModel(
        param_dim=2,
        state_fn=lambda th: bloch_matrix([th[0], th[1], 0.0]),
        deriv_fn=lambda th: derivs,
        contains=_in_ball,
        domain="closed unit disc in R^2",
        name="equatorial",
        project=lambda rho: _shrink(_bloch_vector(rho)[:2]),
        bounds=((-1, 1),) * 2,
    )


def bloch_line() -> ParametricModel:
    """One-parameter commuting family rho(t) = (1 + t sigma_3)/2, |t| <= 1."""
    derivs = [0.5 * PAULIS[2]]
    return ParametricModel(
        param_dim=1,
        state_fn=lambda th: bloch_matrix([0.0, 0.0, th[0]]),
        deriv_fn=lambda th: derivs,
        contains=_in_ball,
        domain="[-1, 1]",
        name="bloch_line",
        project=lambda rho: _shrink(_bloch_vector(rho)[2:]),
        bounds=((-1, 1),),
    )


def _pure_vector(theta: np.ndarray, d: int) -> np.ndarray:
    z = theta[0::2] + 1j * theta[1::2]
    v = np.concatenate(([1.0 + 0j], z))
    return v / np.linalg.norm(v)


def _pure_state_fn(theta, d):
    v = _pure_vector(np.asarray(theta, dtype=float), d)
    return np.outer(v, v.conj())


def _pure_deriv_fn(theta, d):
    theta = np.asarray(theta, dtype=float)
    z = theta[0::2] + 1j * theta[1::2]
    v = np.concatenate(([1.0 + 0j], z))
    n = np.linalg.norm(v)
    phi = v / n
    out = []
    for i in range(theta.size):
        k = i // 2
        dv = np.zeros(d, dtype=complex)
        dv[k + 1] = 1.0 if i % 2 == 0 else 1j
        dn = (z[k].real if i % 2 == 0 else z[k].imag) / n
        dphi = dv / n - v * dn / n**2
        out.append(np.outer(dphi, phi.conj()) + np.outer(phi, dphi.conj()))
    return out


def _pure_project(rho, d):
    w, u = np.linalg.eigh(hermitian_part(rho))
    v = u[:, -1]
    if abs(v[0]) < 1e-12:
        v = v + 1e-12
    z = v[1:] / v[0]
    out = np.empty(2 * (d - 1))
    out[0::2], out[1::2] = z.real, z.imag
    return out


def pure_state(d: int) -> ParametricModel:
    """Completely unknown pure state of dimension d, p = 2(d-1).

    Chart around |0>: phi(z) = (1, z_1, ..., z_{d-1}) / norm with
    z_k = theta_{2k} + i theta_{2k+1}. It covers every state not orthogonal
    to |0>, so no boundary appears for estimates near the reference point.
    """
    if d < 2:
        raise ValidationError("pure_state needs d >= 2")
    return ParametricModel(
        param_dim=2 * (d - 1),
        state_fn=partial(_pure_state_fn, d=d),
        deriv_fn=partial(_pure_deriv_fn, d=d),
        domain=f"R^{2 * (d - 1)} (chart around |0>)",
        name=f"pure_state({d})",
        project=partial(_pure_project, d=d),
        bounds=((-3, 3),) * (2 * (d - 1)),
    )


def local_chart_matrix(mu, h) -> np.ndarray:
    """The (u, zeta) chart around diag(mu); h = (u_1..u_{d-1}, Re z_12, Im z_12, ...).

    Lower-triangular entry (k, j) holds zeta_{j,k}; the upper one its conjugate.
    """
    mu = np.asarray(mu, dtype=float)
    d = mu.size
    h = np.asarray(h, dtype=float)
    u = h[: d - 1]
    rho = np.diag(np.concatenate((mu[:-1] + u, [mu[-1] - u.sum()]))).astype(complex)
    idx = d - 1
    for j in range(d):
        for k in range(j + 1, d):
            zeta = h[idx] + 1j * h[idx + 1]
            rho[k, j] = zeta
            rho[j, k] = np.conj(zeta)
            idx += 2
    return rho


def diagonal(mu) -> ParametricModel:
    """Full local model around rho_0 = diag(mu), in the (u, zeta) chart."""
    mu = np.asarray(mu, dtype=float)
    if abs(mu.sum() - 1) > 1e-10 or mu.min() <= 0:
        raise ValidationError("mu must be a strictly positive probability vector")
    d = mu.size
    p = d * d - 1
    basis = []
    for i in range(p):
        e = np.zeros(p)
        e[i] = 1.0
        basis.append(local_chart_matrix(mu, e) - np.diag(mu))

    def contains(h):
        return np.linalg.eigvalsh(local_chart_matrix(mu, h))[0] >= -1e-12

    return ParametricModel(
        param_dim=p,
        state_fn=lambda h: local_chart_matrix(mu, h),
        deriv_fn=lambda h: basis,
        contains=contains,
        domain=f"local chart around diag({mu.tolist()})",
        name=f"diagonal({','.join(repr(float(m)) for m in mu)})",
    )


def affine(base, generators, name="custom") -> ParametricModel:
    """rho(theta) = base + sum_i theta_i generators[i]; generators traceless."""
    base = np.asarray(base, dtype=complex)
    gens = [np.asarray(g, dtype=complex) for g in generators]
    for g in gens:
        if abs(np.trace(g)) > 1e-10:
            raise ValidationError("affine model generators must be traceless")

    def fn(th):
        return base + sum(t * g for t, g in zip(th, gens))

    def contains(th):
        return np.linalg.eigvalsh(hermitian_part(fn(th)))[0] >= -1e-12

    return ParametricModel(
        param_dim=len(gens),
        state_fn=fn,
        deriv_fn=lambda th: gens,
        contains=contains,
        domain="positive region of the affine family",
        name=name,
    )


def affine_from_dict(data: dict) -> ParametricModel:
    return affine(
        matrix_from_json(data["base"]),
        [matrix_from_json(g) for g in data["generators"]],
        name=data.get("name", "custom"),
    )


def fidelity_embedding(model: ParametricModel):
    """Return (psi, weight) with 1 - Fid(rho(a), rho(b)) = weight * |psi(a) - psi(b)|^2.

    Exists for the Bloch-ball families (weight 1/4) and for pure-state models
    (weight 1/2); raises DomainError otherwise.
    """
    name = model.name
    if name in ("full_bloch", "equatorial", "bloch_line"):
        pad = {"full_bloch": lambda t: t, "equatorial": lambda t: np.array([t[0], t[1], 0.0]),
               "bloch_line": lambda t: np.array([0.0, 0.0, t[0]])}[name]

        def psi(theta):
            b = pad(np.asarray(theta, dtype=float))
            return np.concatenate((b, [np.sqrt(max(0.0, 1 - b @ b))]))

        return psi, 0.25
    if name.startswith("pure_state"):
        def psi(theta):
            rho = model.state_fn(np.asarray(theta, dtype=float))
            return np.concatenate((rho.real.ravel(), rho.imag.ravel()))

        return psi, 0.5
    raise DomainError(f"no quadratic fidelity embedding known for model {name!r}")


_NAMED = re.compile(r"^(?P<head>[a-z_]+)(\((?P<args>[^)]*)\))?$")


def model_from_name(spec: str) -> ParametricModel:
    """Parse ``full_bloch``, ``equatorial``, ``bloch_line``, ``pure_state(d)``
    or ``diagonal(mu1,mu2,...)``."""
    m = _NAMED.match(spec.strip().replace(" ", ""))
    if not m:
        raise ValidationError(f"unknown model {spec!r}")
    head, args = m.group("head"), m.group("args")
    simple = {"full_bloch": full_bloch, "equatorial": equatorial, "bloch_line": bloch_line}
    if head in simple and args is None:
        return simple[head]()
    if head == "pure_state" and args:
        return pure_state(int(args))
    if head == "diagonal" and args:
        return diagonal([float(a) for a in args.split(",")])
    raise ValidationError(f"unknown model {spec!r}")
