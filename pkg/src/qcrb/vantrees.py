"""Bayesian van Trees bounds and the asymptotic bound E_pi C_{G0}.

Expectations over a prior are computed by Gauss-Legendre quadrature on the
prior's support (tensor grids on boxes, spherical coordinates on balls) with
node doubling until successive estimates agree to a relative 1e-3.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import gamma as gamma_fn

from .core import ParametricModel
from .errors import (ConvergenceError, DegenerateBoundError, DimensionError, DivergenceError,
                     PriorError, ValidationError)
from .fisher import InfoMatrix
from .holevo import holevo_bound
from .models import fidelity_embedding

QUAD_TOL = 1e-3
BASE_NODES = 8
MAX_LEVEL = 4
NORM_TOL = 1e-4
BOUNDARY_TOL = 1e-8
J_STEP = 1e-4
JACOBIAN_STEP = 1e-6
DIVERGENCE_LIMIT = 1e12


# ---------------------------------------------------------------- supports

@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValidationError("box needs lower < upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    def nodes(self, n: int):
        x, w = np.polynomial.legendre.leggauss(n)
        axes, weights = [], []
        for lo, hi in zip(self.lower, self.upper):
            half = 0.5 * (hi - lo)
            axes.append(lo + half * (x + 1))
            weights.append(half * w)
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        wts = np.ones(1)
        for w_ax in weights:
            wts = np.multiply.outer(wts, w_ax).ravel()
        return pts, wts

    def boundary_points(self, n: int = 9) -> np.ndarray:
        grid = self.nodes(n)[0]
        out = []
        for i in range(self.dim):
            for edge in (self.lower[i], self.upper[i]):
                pts = grid.copy()
                pts[:, i] = edge
                out.append(pts)
        return np.concatenate(out)

    def contains(self, theta) -> np.ndarray:
        theta = np.atleast_2d(theta)
        return np.all((theta >= self.lower) & (theta <= self.upper), axis=-1)

    def to_dict(self) -> dict:
        return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True)
class Ball:
    radius: float
    dim: int
    center: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.radius <= 0 or self.dim < 1:
            raise ValidationError("ball needs positive radius and dim >= 1")
        c = np.zeros(self.dim) if self.center is None else np.asarray(self.center, dtype=float)
        if c.shape != (self.dim,):
            raise DimensionError("ball center has the wrong length")
        object.__setattr__(self, "center", c)

    def nodes(self, n: int):
        """Gauss-Legendre in radius (and polar cosine), uniform in azimuth."""
        r, p = self.radius, self.dim
        if p == 1:
            pts, wts = Box([-r], [r]).nodes(n)
            return pts + self.center, wts
        x, w = np.polynomial.legendre.leggauss(n)
        rad, w_rad = 0.5 * r * (x + 1), 0.5 * r * w
        if p == 2:
            m = 2 * n
            phi = 2 * np.pi * np.arange(m) / m
            rr, pp = np.meshgrid(rad, phi, indexing="ij")
            wts = np.outer(w_rad * rad, np.full(m, 2 * np.pi / m)).ravel()
            pts = np.stack((rr * np.cos(pp), rr * np.sin(pp)), axis=-1).reshape(-1, 2)
            return pts + self.center, wts
        if p == 3:
            m = 2 * n
            phi = 2 * np.pi * np.arange(m) / m
            rr, cc, pp = np.meshgrid(rad, x, phi, indexing="ij")
            ss = np.sqrt(1 - cc**2)
            pts = np.stack((rr * ss * np.cos(pp), rr * ss * np.sin(pp), rr * cc), axis=-1).reshape(-1, 3)
            wts = np.multiply.outer(np.multiply.outer(w_rad * rad**2, w), np.full(m, 2 * np.pi / m)).ravel()
            return pts + self.center, wts
        pts, wts = Box(self.center - r, self.center + r).nodes(n)
        keep = np.linalg.norm(pts - self.center, axis=1) <= r
        return pts[keep], wts[keep]

    def boundary_points(self, n: int = 64) -> np.ndarray:
        rng = np.random.default_rng(0)
        v = rng.standard_normal((n, self.dim))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return self.center + self.radius * v

    def contains(self, theta) -> np.ndarray:
        return np.linalg.norm(np.atleast_2d(theta) - self.center, axis=-1) <= self.radius

    def to_dict(self) -> dict:
        return {"kind": "ball", "radius": self.radius, "dim": self.dim, "center": self.center.tolist()}


# ---------------------------------------------------------------- priors

@dataclass(frozen=True)
class Prior:
    """Density on a compact support; ``unnormalized`` and ``gradient_fn`` act on
    arrays of points with shape (n, p)."""

    support: object
    unnormalized: Callable
    gradient_fn: Optional[Callable] = None
    name: str = "custom"
    normalizer: Optional[float] = None

    def __post_init__(self):
        if self.normalizer is None:
            z = integrate(lambda th: np.ones(len(th)), self, weight=self.unnormalized).value
            if not np.isfinite(z) or z <= 0:
                raise PriorError("prior does not normalize")
            object.__setattr__(self, "normalizer", float(z))

    @property
    def dim(self) -> int:
        return self.support.dim

    def density(self, theta) -> np.ndarray:
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        inside = self.support.contains(theta)
        return np.where(inside, self.unnormalized(theta), 0.0) / self.normalizer

    def gradient(self, theta) -> np.ndarray:
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        if self.gradient_fn is not None:
            inside = self.support.contains(theta)[:, None]
            return np.where(inside, self.gradient_fn(theta), 0.0) / self.normalizer
        h = J_STEP
        eye = np.eye(self.dim) * h
        return np.stack([(self.density(theta + e) - self.density(theta - e)) / (2 * h) for e in eye], axis=-1)

    def boundary_max(self) -> float:
        pts = self.support.boundary_points()
        return float(np.max(np.abs(self.unnormalized(pts)))) / self.normalizer

    @property
    def admissible(self) -> bool:
        return self.boundary_max() < BOUNDARY_TOL

    def check(self) -> dict:
        total = float(integrate(lambda th: np.ones(len(th)), self).value)
        report = {"integral": total, "boundary_max": self.boundary_max()}
        report["ok"] = abs(total - 1) < NORM_TOL and report["boundary_max"] < BOUNDARY_TOL
        return report

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Rejection sampling from the bounding box of the support."""
        nodes = self.support.nodes(4 * BASE_NODES)[0]
        bound = 1.2 * float(np.max(self.density(nodes)))
        if isinstance(self.support, Box):
            lo, hi = self.support.lower, self.support.upper
        else:
            lo, hi = self.support.center - self.support.radius, self.support.center + self.support.radius
        out = []
        have = 0
        while have < n:
            cand = lo + (hi - lo) * rng.random((max(64, 2 * (n - have)), self.dim))
            accept = rng.random(len(cand)) * bound < self.density(cand)
            out.append(cand[accept])
            have += int(accept.sum())
        return np.concatenate(out)[:n]

    def to_dict(self) -> dict:
        return {"name": self.name, "support": self.support.to_dict(), "normalizer": self.normalizer}


def box_cos2_prior(lower, upper) -> Prior:
    """prod_i cos^2(pi (t_i - a_i)/(b_i - a_i) - pi/2) on [a, b]."""
    box = Box(lower, upper)
    width = box.upper - box.lower

    def arg(th):
        return np.pi * (th - box.lower) / width

    def dens(th):
        return np.prod(np.sin(arg(th)) ** 2, axis=-1)

    def grad(th):
        s = np.sin(arg(th)) ** 2
        ds = np.pi / width * np.sin(2 * arg(th))
        out = np.empty_like(th)
        for i in range(box.dim):
            out[:, i] = ds[:, i] * np.prod(np.delete(s, i, axis=1), axis=1)
        return out

    return Prior(box, dens, grad, name=f"cos2({box.lower.tolist()},{box.upper.tolist()})",
                 normalizer=float(np.prod(width / 2)))


def ball_bump_prior(radius: float, dim: int, center=None) -> Prior:
    """(1 - |t - c|^2 / r^2)^2 on the ball of radius r."""
    ball = Ball(radius, dim, center)

    def dens(th):
        s2 = np.sum((th - ball.center) ** 2, axis=-1) / radius**2
        return np.clip(1 - s2, 0.0, None) ** 2

    def grad(th):
        s2 = np.sum((th - ball.center) ** 2, axis=-1) / radius**2
        return (-4 * np.clip(1 - s2, 0.0, None) / radius**2)[:, None] * (th - ball.center)

    sphere = 2 * np.pi ** (dim / 2) / gamma_fn(dim / 2)
    norm = sphere * radius**dim * 0.5 * beta_fn(dim / 2, 3)
    return Prior(ball, dens, grad, name=f"bump(r={radius},p={dim})", normalizer=float(norm))


def uniform_ball_prior(radius: float, dim: int) -> Prior:
    """Uniform density on a ball; not admissible (nonzero on the boundary)."""
    vol = np.pi ** (dim / 2) / gamma_fn(dim / 2 + 1) * radius**dim
    return Prior(Ball(radius, dim), lambda th: np.ones(len(th)), lambda th: np.zeros_like(th),
                 name=f"uniform(r={radius},p={dim})", normalizer=float(vol))


def _cutoff(s, s0, s1):
    """1 below s0, cos^2 ramp to 0 at s1, and its derivative."""
    t = np.clip((s - s0) / (s1 - s0), 0.0, 1.0)
    val = np.cos(0.5 * np.pi * t) ** 2
    dval = np.where((s > s0) & (s < s1), -0.5 * np.pi / (s1 - s0) * np.sin(np.pi * t), 0.0)
    return val, dval


def prior_squeeze(prior: Prior, eps: float, delta: float, domain_radius: float = 1.0) -> Prior:
    """Smooth truncation bounded by (1 + eps) pi and vanishing for |t| >= R - delta.

    ``delta`` is an upper bound on the truncation width: it is halved until
    the retained mass reaches 1 / (1 + eps), which the pointwise bound needs.
    """
    if not 0 < eps < 1:
        raise ValidationError("eps must lie in (0, 1)")
    if not 0 < delta < domain_radius:
        raise ValidationError("delta must lie in (0, domain radius)")
    base = prior
    while delta > 1e-6:
        s0, s1 = domain_radius - 2 * delta, domain_radius - delta

        def dens(th, s0=s0, s1=s1):
            chi, _ = _cutoff(np.linalg.norm(th, axis=-1), s0, s1)
            return base.density(th) * chi

        def grad(th, s0=s0, s1=s1):
            s = np.linalg.norm(th, axis=-1)
            chi, dchi = _cutoff(s, s0, s1)
            radial = th / np.where(s > 0, s, 1.0)[:, None]
            return base.gradient(th) * chi[:, None] + base.density(th)[:, None] * (dchi[:, None] * radial)

        support = base.support
        if isinstance(support, Ball):
            support = Ball(min(support.radius, s1), support.dim, support.center)
        out = Prior(support, dens, grad, name=f"squeeze({base.name},eps={eps},delta={delta:g})")
        if out.normalizer >= 1 / (1 + eps):
            return out
        delta /= 2
    raise PriorError("no truncation keeps the prior within (1 + eps) of the original")


# ---------------------------------------------------------------- quadrature

@dataclass(frozen=True)
class QuadResult:
    value: object
    error: float
    level: int
    n_nodes: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)


def _rel_change(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-12)))


def integrate(fn: Callable, prior: Prior, weight: Optional[Callable] = None, tol: float = QUAD_TOL,
              max_level: int = MAX_LEVEL, min_level: int = 0) -> QuadResult:
    """E_pi fn by node doubling; fn maps (n, p) points to (n, ...) values.

    Points with zero weight are not evaluated. ``weight`` replaces the prior
    density (used while normalizing).
    """
    dens = prior.density if weight is None else weight
    previous = None
    for level in range(min_level, max_level + 1):
        pts, wts = prior.support.nodes(BASE_NODES * 2**level)
        w = wts * dens(pts)
        live = w != 0
        vals = np.asarray(fn(pts[live]), dtype=float)
        value = np.tensordot(w[live], vals, axes=(0, 0))
        if previous is not None:
            err = _rel_change(value, previous)
            if err < tol or level == max_level:
                if err >= tol:
                    raise ConvergenceError("quadrature did not reach the requested tolerance",
                                           {"relative_change": err, "level": level})
                return QuadResult(value, err, level, int(live.sum()), pts[live], w[live], vals)
        previous = value
    raise ConvergenceError("quadrature needs at least two levels", {"level": max_level})


# ---------------------------------------------------------------- losses

@dataclass(frozen=True)
class LossSpec:
    """Loss (psi_hat - psi(t))^T G~(t) (psi_hat - psi(t))."""

    psi: Callable
    g_tilde: Callable
    jacobian_fn: Optional[Callable] = None
    name: str = "custom"

    def jacobian(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.jacobian_fn is not None:
            return np.atleast_2d(self.jacobian_fn(theta))
        return self.fd_jacobian(theta)

    def fd_jacobian(self, theta, step: float = JACOBIAN_STEP) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        cols = [(np.asarray(self.psi(theta + e)) - np.asarray(self.psi(theta - e))) / (2 * step)
                for e in np.eye(theta.size) * step]
        return np.stack(cols, axis=1)

    def g0(self, theta) -> np.ndarray:
        j = self.jacobian(theta)
        g0 = j.T @ np.atleast_2d(self.g_tilde(theta)) @ j
        return 0.5 * (g0 + g0.T)

    def loss(self, theta_hat, theta) -> float:
        diff = np.asarray(self.psi(theta_hat)) - np.asarray(self.psi(theta))
        return float(diff @ np.atleast_2d(self.g_tilde(theta)) @ diff)


def quadratic_loss(g) -> LossSpec:
    g = np.atleast_2d(np.asarray(g, dtype=float))
    return LossSpec(lambda th: np.asarray(th, dtype=float), lambda th: g,
                    lambda th: np.eye(g.shape[0]), name="quadratic")


def fidelity_loss(model: ParametricModel) -> LossSpec:
    """1 - fidelity written as weight * |psi(a) - psi(b)|^2."""
    psi, weight = fidelity_embedding(model)
    q = psi(model.reference()).size
    g = weight * np.eye(q)
    if model.name.startswith("pure_state"):
        def jac(th):
            return np.stack([np.concatenate((dr.real.ravel(), dr.imag.ravel()))
                             for dr in model.derivatives(th)], axis=1)
    else:
        pad = {"full_bloch": np.eye(3), "equatorial": np.eye(3)[:, :2], "bloch_line": np.eye(3)[:, 2:]}[model.name]

        def jac(th):
            b = pad @ np.asarray(th, dtype=float)
            top = np.sqrt(max(1e-300, 1 - b @ b))
            return np.vstack((pad, -(b @ pad) / top))
    return LossSpec(psi, lambda th: g, jac, name="fidelity")


# ---------------------------------------------------------------- C fields

@dataclass(frozen=True)
class CField:
    c: Callable
    name: str = "custom"

    def __call__(self, theta) -> np.ndarray:
        return np.atleast_2d(self.c(np.asarray(theta, dtype=float)))


def zero_c_field(q: int, p: int) -> CField:
    return CField(lambda th: np.zeros((q, p)), name="zero")


def _node_error(exc: Exception, theta) -> Exception:
    msg = f"at theta={np.round(theta, 12).tolist()}: {exc}"
    if isinstance(exc, ConvergenceError):
        return ConvergenceError(msg, exc.diagnostics)
    return type(exc)(msg)


def optimal_c_field(model: ParametricModel, loss: LossSpec) -> CField:
    """C(t) = G~ psi' V0(t), V0 the Holevo minimiser for G0 = psi'^T G~ psi'."""
    cache: dict = {}

    def c(theta):
        key = np.asarray(theta, dtype=float).tobytes()
        if key not in cache:
            try:
                v0 = holevo_bound(model, theta, loss.g0(theta)).v_opt
            except Exception as exc:
                raise _node_error(exc, theta) from exc
            cache[key] = np.atleast_2d(loss.g_tilde(theta)) @ loss.jacobian(theta) @ v0
        return cache[key]

    return CField(c, name="optimal")


# ---------------------------------------------------------------- bounds

def _divergence(c_field: CField, prior: Prior, theta, step: float) -> np.ndarray:
    """Row divergence sum_j d/dt_j (C pi)_ij by central differences."""
    p = theta.size
    out = 0.0
    for j in range(p):
        e = np.zeros(p)
        e[j] = step
        plus = c_field(theta + e)[:, j] * prior.density(theta + e)[0]
        minus = c_field(theta - e)[:, j] * prior.density(theta - e)[0]
        out = out + (plus - minus) / (2 * step)
    return np.atleast_1d(out)


def j_pi(prior: Prior, c_field: CField, loss: LossSpec, step: float = J_STEP, tol: float = QUAD_TOL,
         max_level: int = MAX_LEVEL) -> float:
    """E_pi[(C pi)'^T G~^-1 (C pi)' / pi^2]."""
    if not prior.admissible:
        raise DivergenceError(f"prior {prior.name} does not vanish on the boundary; J(pi) is infinite")

    def integrand(pts):
        out = np.empty(len(pts))
        dens = prior.density(pts)
        for n, th in enumerate(pts):
            v = _divergence(c_field, prior, th, step)
            g_inv = np.linalg.inv(np.atleast_2d(loss.g_tilde(th)))
            out[n] = v @ g_inv @ v / dens[n] ** 2
        if not np.all(np.isfinite(out)) or np.max(out, initial=0.0) > DIVERGENCE_LIMIT:
            raise DivergenceError("J(pi) integrand diverges")
        return out

    value = float(integrate(integrand, prior, tol=tol, max_level=max_level).value)
    if value > DIVERGENCE_LIMIT:
        raise DivergenceError(f"J(pi) = {value:.3e} exceeds {DIVERGENCE_LIMIT:.0e}")
    return value


@dataclass(frozen=True)
class VanTreesResult:
    value: float
    numerator: float
    information_term: float
    j_pi: float
    n: int

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> dict:
        return {"value": self.value, "numerator": self.numerator,
                "information_term": self.information_term, "j_pi": self.j_pi, "N": self.n}


def van_trees_rhs(model: ParametricModel, prior: Prior, loss: LossSpec, c_field: CField, n: int,
                  info_field: Callable, j_value: Optional[float] = None, tol: float = QUAD_TOL,
                  max_level: int = MAX_LEVEL) -> VanTreesResult:
    """(E tr C psi'^T)^2 / (E tr G~^-1 C I C^T + J(pi)/N), a lower bound on N E_pi tr G~ V."""
    if n < 1:
        raise ValidationError("N must be a positive integer")

    def integrand(pts):
        out = np.empty((len(pts), 2))
        for k, th in enumerate(pts):
            c = c_field(th)
            info = info_field(th)
            info = info.matrix if isinstance(info, InfoMatrix) else np.atleast_2d(info)
            g_inv = np.linalg.inv(np.atleast_2d(loss.g_tilde(th)))
            out[k, 0] = np.trace(c @ loss.jacobian(th).T)
            out[k, 1] = np.trace(g_inv @ c @ info @ c.T)
        return out

    num, info_term = integrate(integrand, prior, tol=tol, max_level=max_level).value
    jv = j_pi(prior, c_field, loss, tol=tol, max_level=max_level) if j_value is None else float(j_value)
    denom = info_term + jv / n
    if not denom > 0:
        raise DegenerateBoundError("van Trees denominator vanishes")
    return VanTreesResult(float(num**2 / denom), float(num), float(info_term), jv, int(n))


@dataclass(frozen=True)
class AsymptoticResult:
    value: float
    error: float
    n_nodes: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    holevo_values: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {"value": self.value, "quadrature_error": self.error, "n_nodes": self.n_nodes}

    def rows(self) -> list:
        running = np.cumsum(self.weights * self.holevo_values)
        return [{"theta": th.tolist(), "holevo": float(c), "weight": float(w), "running": float(r)}
                for th, c, w, r in zip(self.nodes, self.holevo_values, self.weights, running)]


def asymptotic_bound(model: ParametricModel, prior: Prior, loss: LossSpec, tol: float = QUAD_TOL,
                     max_level: int = MAX_LEVEL) -> AsymptoticResult:
    """E_pi C_{G0}(t) with G0 = psi'^T G~ psi'."""
    if prior.dim != model.param_dim:
        raise DimensionError(f"prior dim {prior.dim} != model dim {model.param_dim}")

    def integrand(pts):
        out = np.empty(len(pts))
        for k, th in enumerate(pts):
            try:
                out[k] = holevo_bound(model, th, loss.g0(th)).value
            except Exception as exc:
                raise _node_error(exc, th) from exc
        return out

    res = integrate(integrand, prior, tol=tol, max_level=max_level)
    return AsymptoticResult(float(res.value), res.error, res.n_nodes, res.nodes, res.weights, res.values)


def expectation(fn: Callable, prior: Prior, tol: float = QUAD_TOL) -> float:
    """E_pi fn for a scalar function of a single point."""
    return float(integrate(lambda pts: np.array([fn(t) for t in pts]), prior, tol=tol).value)


__all__ = [
    "Box", "Ball", "Prior", "box_cos2_prior", "ball_bump_prior", "uniform_ball_prior", "prior_squeeze",
    "integrate", "QuadResult", "LossSpec", "quadratic_loss", "fidelity_loss", "CField", "zero_c_field",
    "optimal_c_field", "j_pi", "van_trees_rhs", "VanTreesResult", "asymptotic_bound", "AsymptoticResult",
    "expectation",
]
