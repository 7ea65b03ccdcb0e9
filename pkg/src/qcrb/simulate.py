"""Monte Carlo measurement-and-estimation experiments on N i.i.d. copies."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.transform import Rotation

from .core import ParametricModel, Povm, fidelity, haar_unitaries, hermitian_basis, matrix_to_json
from .errors import DegenerateDataError, DomainError, ValidationError
from .fisher import fisher_info_raw, helstrom_from_slds, sld_raw
from .holevo import holevo_bound
from .models import pure_state
from .vantrees import LossSpec, Prior, asymptotic_bound, fidelity_loss

GRID_POINTS = 21
MLE_XTOL = 1e-9
MLE_FTOL = 1e-12
TINY = 1e-300


class SchemeKind(str, enum.Enum):
    PER_COPY_FIXED = "PerCopyFixed"
    RANDOM_BASIS = "RandomBasis"
    TWO_STEP_ADAPTIVE = "TwoStepAdaptive"


# ---------------------------------------------------------------- data

@dataclass(frozen=True)
class Dataset:
    """Outcomes of N copies.

    ``blocks`` are (effects, counts) pairs for copies measured with a common
    POVM; ``rank_one`` holds, for copies measured in individually drawn bases,
    the basis vector of the observed outcome (one row per copy).
    """

    dim: int
    blocks: tuple = ()
    rank_one: Optional[np.ndarray] = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rank_one is not None:
            v = np.asarray(self.rank_one, dtype=complex)
            outer = (v.conj()[:, :, None] * v[:, None, :]).reshape(len(v), -1)
            object.__setattr__(self, "rank_one", v)
            object.__setattr__(self, "_outer", outer)

    @property
    def n_copies(self) -> int:
        n = sum(int(c.sum()) for _, c in self.blocks)
        return n + (0 if self.rank_one is None else len(self.rank_one))

    def probabilities(self, rho: np.ndarray):
        block_p = [np.einsum("ij,xji->x", rho, e).real for e, _ in self.blocks]
        ro = None
        if self.rank_one is not None:
            ro = (self._outer @ np.asarray(rho, dtype=complex).ravel()).real
        return block_p, ro

    def log_likelihood(self, rho: np.ndarray) -> float:
        block_p, ro = self.probabilities(rho)
        total = 0.0
        for (_, counts), p in zip(self.blocks, block_p):
            live = counts > 0
            if np.any(p[live] <= 0):
                return -math.inf
            total += float(counts[live] @ np.log(p[live]))
        if ro is not None:
            if np.any(ro <= 0):
                return -math.inf
            total += float(np.sum(np.log(ro)))
        return total

    def linear_inversion(self) -> np.ndarray:
        """Unconstrained Hermitian estimate of rho (may be non-positive)."""
        d = self.dim
        parts, n_total = [], 0
        if self.rank_one is not None and len(self.rank_one):
            v = self.rank_one
            frame = (d + 1) * np.einsum("ni,nj->ij", v, v.conj()) / len(v) - np.eye(d)
            parts.append((frame, len(v)))
            n_total += len(v)
        if self.blocks:
            basis = hermitian_basis(d)
            rows, rhs = [], []
            for effects, counts in self.blocks:
                tot = counts.sum()
                if tot == 0:
                    continue
                rows.append(np.array([[np.trace(b @ e).real for b in basis] for e in effects]))
                rhs.append(counts / tot)
            if rows:
                a = np.vstack(rows)
                coef = np.linalg.lstsq(a, np.concatenate(rhs), rcond=None)[0]
                coef[0] = 1 / np.sqrt(d)
                est = sum(c * b for c, b in zip(coef, basis))
                n_blocks = int(sum(c.sum() for _, c in self.blocks))
                parts.append((est, n_blocks))
                n_total += n_blocks
        if not parts:
            raise DegenerateDataError("dataset is empty")
        return sum(m * n for m, n in parts) / n_total

    def to_dict(self) -> dict:
        out = {"dim": self.dim, "n_copies": self.n_copies,
               "blocks": [{"effects": [matrix_to_json(e) for e in eff], "counts": c.tolist()}
                          for eff, c in self.blocks],
               "diagnostics": dict(self.diagnostics)}
        if self.rank_one is not None:
            out["rank_one"] = matrix_to_json(self.rank_one)
        return out


# ---------------------------------------------------------------- schemes

def pauli_povm() -> Povm:
    """Six-outcome qubit POVM: the Pauli eigenprojectors weighted by 1/3."""
    vecs = [np.array(v, dtype=complex) / np.linalg.norm(v)
            for v in ([1, 0], [0, 1], [1, 1], [1, -1], [1, 1j], [1, -1j])]
    return Povm(tuple(np.outer(v, v.conj()) / 3 for v in vecs))


def informationally_complete_povm(d: int) -> Povm:
    """Pauli POVM for qubits; for d > 2 the symmetrised set of projectors onto
    |j>, (|j>+|k>)/sqrt2 and (|j>+i|k>)/sqrt2."""
    if d == 2:
        return pauli_povm()
    vecs = [np.eye(d, dtype=complex)[j] for j in range(d)]
    for j in range(d):
        for k in range(j + 1, d):
            for ph in (1, 1j):
                v = np.zeros(d, dtype=complex)
                v[j], v[k] = 1, ph
                vecs.append(v / np.sqrt(2))
    proj = [np.outer(v, v.conj()) for v in vecs]
    w, u = np.linalg.eigh(sum(proj))
    s = (u / np.sqrt(w)) @ u.conj().T
    return Povm(tuple(s @ p @ s for p in proj))


def projective_qubit(direction) -> Povm:
    """Projective qubit measurement along a Bloch direction."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    sig = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)
    a = np.einsum("i,ijk->jk", n, sig)
    return Povm(((np.eye(2) + a) / 2, (np.eye(2) - a) / 2))


@dataclass(frozen=True)
class MeasurementScheme:
    kind: SchemeKind
    povm: Optional[Povm] = None
    fraction: Optional[float] = None
    stage1_povm: Optional[Povm] = None
    tuning: Optional[Callable] = None
    description: str = ""

    def __post_init__(self):
        if self.kind == SchemeKind.PER_COPY_FIXED and self.povm is None:
            raise ValidationError("PerCopyFixed needs a POVM")
        if self.kind == SchemeKind.TWO_STEP_ADAPTIVE:
            if self.fraction is None or not 0 < self.fraction < 1:
                raise ValidationError("TwoStepAdaptive fraction must lie in (0, 1)")

    @classmethod
    def per_copy_fixed(cls, povm: Povm, description: str = "") -> "MeasurementScheme":
        return cls(SchemeKind.PER_COPY_FIXED, povm=povm, description=description or f"fixed {len(povm)}-outcome POVM")

    @classmethod
    def random_basis(cls) -> "MeasurementScheme":
        return cls(SchemeKind.RANDOM_BASIS, description="independent Haar-random basis per copy")


def _sample_fixed(rho, povm: Povm, n: int, rng) -> tuple:
    p = np.einsum("ij,xji->x", rho, povm.stacked()).real
    p = np.clip(p, 0.0, None)
    return povm.stacked(), rng.multinomial(n, p / p.sum())


def _sample_random_basis(rho, n: int, rng) -> np.ndarray:
    d = rho.shape[0]
    u = haar_unitaries(d, n, rng)
    p = np.einsum("nix,ij,njx->nx", u.conj(), rho, u).real
    p = np.clip(p, 0.0, None)
    cdf = np.cumsum(p, axis=1)
    draw = rng.random(n)[:, None] * cdf[:, -1:]
    x = np.minimum((draw >= cdf).sum(axis=1), d - 1)
    return u[np.arange(n), :, x]


def _as_rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_outcomes(model: ParametricModel, theta, scheme: MeasurementScheme, n: int, seed) -> Dataset:
    """Draw per-copy outcomes from the Born rule for N copies of rho(theta)."""
    if int(n) != n or n < 1:
        raise ValidationError("N must be a positive integer")
    n = int(n)
    rng = _as_rng(seed)
    rho = model.matrix(theta)
    d = rho.shape[0]
    if scheme.kind == SchemeKind.PER_COPY_FIXED:
        if scheme.povm.dim != d:
            raise ValidationError("POVM dimension does not match the model")
        return Dataset(d, (_sample_fixed(rho, scheme.povm, n, rng),))
    if scheme.kind == SchemeKind.RANDOM_BASIS:
        return Dataset(d, (), _sample_random_basis(rho, n, rng))
    return _sample_two_step(model, rho, scheme, n, rng)


def _sample_two_step(model, rho, scheme: MeasurementScheme, n: int, rng) -> Dataset:
    d = rho.shape[0]
    n1 = min(n, math.ceil(scheme.fraction * n))
    stage1 = scheme.stage1_povm or informationally_complete_povm(d)
    first = Dataset(d, (_sample_fixed(rho, stage1, n1, rng),))
    diag = {"stage1_copies": n1, "fallback": False}
    if n1 >= n:
        warnings.warn("two-step fraction leaves no copies for stage 2; using stage 1 only")
        diag["stage2_copies"] = 0
        return Dataset(d, first.blocks, diagnostics=diag)
    try:
        theta1 = mle_estimate(model, first)
        if not np.all(np.isfinite(theta1)) or not model.contains(theta1):
            raise DegenerateDataError("stage-1 estimate outside the model domain")
    except (DegenerateDataError, DomainError):
        theta1 = model.reference()
        diag["fallback"] = True
    povm2 = scheme.tuning(theta1)
    diag.update({"stage2_copies": n - n1, "theta_stage1": np.asarray(theta1).tolist()})
    return Dataset(d, first.blocks + (_sample_fixed(rho, povm2, n - n1, rng),), diagnostics=diag)


def best_projective_qubit(model: ParametricModel, weight: np.ndarray, theta, grid: int = 24) -> Povm:
    """Projective qubit measurement maximizing trace(weight I_M(theta)) on a direction grid."""
    rho = model.matrix(theta)
    drhos = model.derivatives(theta)
    best, best_val = None, -math.inf
    for ct in np.linspace(-1, 1, grid + 1):
        st = math.sqrt(max(0.0, 1 - ct * ct))
        for phi in np.linspace(0, np.pi, grid, endpoint=False):
            povm = projective_qubit([st * math.cos(phi), st * math.sin(phi), ct])
            try:
                info = fisher_info_raw(rho, drhos, povm.stacked())
            except Exception:
                continue
            val = float(np.trace(weight @ info))
            if val > best_val + 1e-12:
                best, best_val = povm, val
    return best


_PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)


def _triad_effects(angles, logits) -> np.ndarray:
    axes = Rotation.from_euler("zyz", angles).as_matrix().T
    w = np.exp(logits - np.max(logits))
    w /= w.sum()
    a = np.einsum("ki,ijl->kjl", axes, _PAULI)
    eye = np.eye(2)
    return np.concatenate([w[:, None, None] * (eye + a) / 2, w[:, None, None] * (eye - a) / 2])


def triad_povm(angles, logits) -> Povm:
    """Randomized projective qubit measurement along a rotated orthonormal triad
    of Bloch directions, axis k chosen with probability softmax(logits)_k."""
    return Povm(tuple(_triad_effects(np.asarray(angles, dtype=float), np.asarray(logits, dtype=float))))


def best_separable_qubit(model: ParametricModel, g0: np.ndarray, theta, starts: int = 3) -> Povm:
    """Weighted triad measurement minimizing trace(G0 I_M^-1) (multi-start Nelder-Mead)."""
    rho = model.matrix(theta)
    drhos = model.derivatives(theta)

    def risk(x):
        try:
            info = fisher_info_raw(rho, drhos, _triad_effects(x[:3], x[3:]))
            val = float(np.trace(g0 @ np.linalg.inv(info)))
        except Exception:
            return 1e12
        return val if np.isfinite(val) and val > 0 else 1e12

    rng = np.random.default_rng(0)
    best = None
    for s in range(starts):
        x0 = np.concatenate((rng.uniform(0, 2 * np.pi, 3), np.zeros(3))) if s else np.zeros(6)
        res = minimize(risk, x0, method="Nelder-Mead", options={"xatol": 1e-5, "fatol": 1e-9, "maxiter": 2000})
        if best is None or res.fun < best.fun:
            best = res
    return triad_povm(best.x[:3], best.x[3:])


def two_step_scheme(model: ParametricModel, loss: LossSpec, fraction: float,
                    tuning: Union[None, str, Callable] = None, stage1_povm: Optional[Povm] = None) -> MeasurementScheme:
    """Stage 1 estimates theta with an informationally complete POVM; stage 2
    measures the tuned per-copy POVM at the stage-1 estimate.

    Built-in tuning rules (qubits only): ``"separable"`` (default) minimizes
    trace(G0 I_M^-1) over weighted triads of projective measurements;
    ``"dual"`` picks the projective measurement maximizing trace(K0 I_M), K0
    the dual weight of the Holevo problem. The dual rule gives rank-one
    information, so it only suits one-parameter models.
    """
    tuning = "separable" if tuning is None else tuning
    if isinstance(tuning, str):
        if model.dim != 2:
            raise ValidationError("built-in tuning rules are implemented for qubit models only")
        rule = tuning
        if rule not in ("separable", "dual"):
            raise ValidationError(f"unknown tuning rule {rule!r}")

        def tuning(theta):
            g0 = loss.g0(theta)
            if rule == "separable":
                return best_separable_qubit(model, g0, theta)
            sol = holevo_bound(model, theta, g0)
            return best_projective_qubit(model, sol.v_opt @ g0 @ sol.v_opt, theta)

    return MeasurementScheme(SchemeKind.TWO_STEP_ADAPTIVE, fraction=fraction, stage1_povm=stage1_povm,
                             tuning=tuning, description=f"two-step adaptive, fraction {fraction}")


# ---------------------------------------------------------------- estimators

def _neg_loglik(model: ParametricModel, data: Dataset):
    def f(theta):
        if not model.contains(theta):
            return math.inf
        ll = data.log_likelihood(model.state_fn(theta))
        return -ll if np.isfinite(ll) else math.inf
    return f


def _grid_start(model: ParametricModel, f) -> np.ndarray:
    bounds = model.bounds or ((-1.0, 1.0),) * model.param_dim
    axes = [np.linspace(lo, hi, GRID_POINTS) for lo, hi in bounds]
    best, best_val = None, math.inf
    for pt in np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, model.param_dim):
        v = f(pt)
        if v < best_val:
            best, best_val = pt, v
    if best is None:
        raise DegenerateDataError("likelihood vanishes on the whole initialization grid")
    return best


@dataclass
class MleResult:
    theta: np.ndarray
    log_likelihood: float
    flat: bool
    start: np.ndarray


def mle_fit(model: ParametricModel, data: Dataset) -> MleResult:
    """Maximum likelihood: projected linear inversion (or a 21-point grid) then Nelder-Mead."""
    if data.n_copies == 0:
        raise DegenerateDataError("dataset is empty")
    f = _neg_loglik(model, data)
    start = None
    if model.project is not None:
        try:
            cand = np.asarray(model.project(data.linear_inversion()), dtype=float)
            if np.isfinite(f(cand)):
                start = cand
        except DegenerateDataError:
            raise
        except Exception:
            start = None
    if start is None:
        start = _grid_start(model, f)
    f0 = f(start)
    if not np.isfinite(f0):
        raise DegenerateDataError("all-zero likelihood")
    p = model.param_dim
    simplex = np.vstack([start] + [start + 1e-2 * e for e in np.eye(p)])
    res = minimize(f, start, method="Nelder-Mead",
                   options={"xatol": MLE_XTOL, "fatol": MLE_FTOL, "maxiter": 4000 * p,
                            "initial_simplex": simplex})
    theta = res.x if res.fun <= f0 else start
    fbest = min(res.fun, f0)
    curv = []
    for e in np.eye(p) * 1e-4:
        fp, fm = f(theta + e), f(theta - e)
        curv.append((fp + fm - 2 * fbest) / 1e-8 if np.isfinite(fp) and np.isfinite(fm) else math.inf)
    flat = bool(np.min(curv) < 1e-8)
    return MleResult(np.asarray(theta, dtype=float), -float(fbest), flat, np.asarray(start))


def mle_estimate(model: ParametricModel, data: Dataset) -> np.ndarray:
    return mle_fit(model, data).theta


class EstimatorKind(str, enum.Enum):
    MLE = "Mle"
    BAYES_MEAN = "BayesMean"


@dataclass(frozen=True)
class Estimator:
    kind: EstimatorKind = EstimatorKind.MLE
    prior: Optional[Prior] = None
    nodes: int = 24

    def __post_init__(self):
        if self.kind == EstimatorKind.BAYES_MEAN and self.prior is None:
            raise ValidationError("BayesMean needs a prior")

    def __call__(self, model: ParametricModel, data: Dataset) -> np.ndarray:
        fit = mle_fit(model, data)
        if self.kind == EstimatorKind.MLE:
            return fit.theta
        return bayes_mean(model, data, self.prior, fit, self.nodes)


def bayes_mean(model: ParametricModel, data: Dataset, prior: Prior, fit: Optional[MleResult] = None,
               nodes: int = 24) -> np.ndarray:
    """Posterior mean by Gauss-Legendre quadrature on a box of +-8 posterior
    standard deviations around the MLE, clipped to the prior support."""
    fit = fit or mle_fit(model, data)
    f = _neg_loglik(model, data)
    p = model.param_dim
    th = fit.theta
    h = 1e-4
    sd = np.empty(p)
    for i, e in enumerate(np.eye(p) * h):
        c = (f(th + e) + f(th - e) - 2 * f(th)) / h**2
        sd[i] = 1 / math.sqrt(c) if np.isfinite(c) and c > 0 else 0.1
    sup = prior.support
    lo_s = sup.lower if hasattr(sup, "lower") else sup.center - sup.radius
    hi_s = sup.upper if hasattr(sup, "upper") else sup.center + sup.radius
    lo, hi = np.maximum(th - 8 * sd, lo_s), np.minimum(th + 8 * sd, hi_s)
    if np.any(hi <= lo):
        lo, hi = lo_s, hi_s
    x, w = np.polynomial.legendre.leggauss(nodes)
    axes = [a + 0.5 * (b - a) * (x + 1) for a, b in zip(lo, hi)]
    wax = [0.5 * (b - a) * w for a, b in zip(lo, hi)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, p)
    wts = np.ones(1)
    for wa in wax:
        wts = np.multiply.outer(wts, wa).ravel()
    dens = prior.density(pts)
    ll = np.array([-f(t) if d > 0 else -math.inf for t, d in zip(pts, dens)])
    if not np.any(np.isfinite(ll)):
        raise DegenerateDataError("posterior vanishes on the quadrature grid")
    post = wts * dens * np.exp(ll - np.max(ll[np.isfinite(ll)]))
    return (post @ pts) / post.sum()


# ---------------------------------------------------------------- risk

@dataclass(frozen=True)
class RiskReport:
    n_copies: int
    reps: int
    empirical_risk: float
    std_error: float
    bound: Optional[float]
    loss_kind: str
    violation: bool
    loss_sum: float = 0.0
    loss_sumsq: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_losses(cls, losses, n: int, bound, loss_kind: str, diagnostics=None) -> "RiskReport":
        losses = np.asarray(losses, dtype=float)
        return cls._build(n, len(losses), float(losses.sum()), float(losses @ losses), bound, loss_kind,
                          diagnostics or {})

    @classmethod
    def _build(cls, n, reps, s, ss, bound, loss_kind, diagnostics) -> "RiskReport":
        mean = s / reps
        var = max(0.0, (ss - reps * mean**2) / (reps - 1)) if reps > 1 else 0.0
        risk = n * mean
        se = n * math.sqrt(var / reps)
        violation = bound is not None and risk < bound - 3 * se
        return cls(n, reps, risk, se, bound, loss_kind, bool(violation), s, ss, diagnostics)

    def merge(self, other: "RiskReport") -> "RiskReport":
        if other.n_copies != self.n_copies or other.loss_kind != self.loss_kind:
            raise ValidationError("cannot merge reports of different experiments")
        return RiskReport._build(self.n_copies, self.reps + other.reps, self.loss_sum + other.loss_sum,
                                 self.loss_sumsq + other.loss_sumsq, self.bound, self.loss_kind,
                                 dict(self.diagnostics))

    def to_dict(self) -> dict:
        return {"N": self.n_copies, "reps": self.reps, "empirical_risk": self.empirical_risk,
                "std_error": self.std_error, "bound": self.bound, "loss_kind": self.loss_kind,
                "violation": self.violation, "diagnostics": dict(self.diagnostics)}


def _loss_fn(model: ParametricModel, loss: Union[str, LossSpec]):
    if isinstance(loss, str):
        if loss != "fidelity":
            raise ValidationError(f"unknown loss {loss!r}")
        return lambda est, th: 1.0 - fidelity(model.state_fn(est), model.matrix(th)), "fidelity"
    return loss.loss, loss.name


def _loss_spec(model, loss):
    return fidelity_loss(model) if isinstance(loss, str) else loss


def default_bound(model: ParametricModel, theta_or_prior, loss) -> Optional[float]:
    """Holevo bound C_{G0} at theta, or E_pi C_{G0} under a prior."""
    spec = _loss_spec(model, loss)
    if isinstance(theta_or_prior, Prior):
        return asymptotic_bound(model, theta_or_prior, spec).value
    return holevo_bound(model, theta_or_prior, spec.g0(theta_or_prior)).value


def risk_experiment(model: ParametricModel, theta_or_prior, scheme: MeasurementScheme,
                    estimator: Optional[Estimator], loss: Union[str, LossSpec], n: int, reps: int, seed: int,
                    bound: Union[None, float, str] = "auto") -> RiskReport:
    """N x average loss over ``reps`` independent experiments.

    Repetition r uses the substream SeedSequence([seed, r]), so results do
    not depend on execution order.
    """
    if reps < 2:
        raise ValidationError("need at least two repetitions")
    estimator = estimator or Estimator()
    loss_fn, loss_kind = _loss_fn(model, loss)
    bayes = isinstance(theta_or_prior, Prior)
    if not bayes:
        theta_fixed = model.check(theta_or_prior)
    losses = np.empty(reps)
    fallback = 0
    for r in range(reps):
        rng = np.random.default_rng(np.random.SeedSequence([seed, r]))
        theta = theta_or_prior.sample(1, rng)[0] if bayes else theta_fixed
        data = sample_outcomes(model, theta, scheme, n, rng)
        fallback += int(data.diagnostics.get("fallback", False))
        est = estimator(model, data)
        losses[r] = loss_fn(est, theta)
    if bound == "auto":
        try:
            bound = default_bound(model, theta_or_prior, loss)
        except Exception:
            bound = None
    diag = {"scheme": scheme.description, "estimator": estimator.kind.value, "seed": seed,
            "stage1_fallbacks": fallback}
    return RiskReport.from_losses(losses, n, bound, loss_kind, diag)


# ---------------------------------------------------------------- covariant information

def covariant_info_check(d: int, n_bases: int, seed: int) -> dict:
    """Average Fisher information of Haar-random basis measurements at |0>."""
    if d < 2:
        raise ValidationError("d must be at least 2")
    model = pure_state(d)
    theta = model.reference()
    rho = model.matrix(theta)
    drhos = model.derivatives(theta)
    h = helstrom_from_slds(rho, sld_raw(rho, drhos, allow_singular=True))
    rng = np.random.default_rng(seed)
    u = haar_unitaries(d, n_bases, rng)
    p = np.einsum("nix,ij,njx->nx", u.conj(), rho, u).real
    dp = np.stack([np.einsum("nix,ij,njx->nx", u.conj(), dr, u).real for dr in drhos], axis=-1)
    per_basis = np.einsum("nxa,nxb->nab", dp / np.maximum(p, TINY)[..., None], dp)
    info = per_basis.mean(axis=0)
    h_inv = np.linalg.inv(h)
    half = 0.5 * h
    traces = np.einsum("ab,nba->n", h_inv, per_basis)
    return {
        "d": d,
        "n_bases": n_bases,
        "info": info,
        "helstrom": h,
        "ratio": info @ h_inv,
        "trace_hinv_info": float(np.trace(h_inv @ info)),
        "trace_hinv_info_se": float(traces.std(ddof=1) / math.sqrt(n_bases)),
        "max_single_basis_trace": float(traces.max()),
        "max_entry_deviation": float(np.max(np.abs(info - half)) / np.max(np.abs(half))),
    }


__all__ = [
    "SchemeKind", "Dataset", "MeasurementScheme", "pauli_povm", "informationally_complete_povm",
    "projective_qubit", "sample_outcomes", "best_projective_qubit", "triad_povm", "best_separable_qubit", "two_step_scheme", "mle_fit",
    "mle_estimate", "MleResult", "EstimatorKind", "Estimator", "bayes_mean", "RiskReport",
    "default_bound", "risk_experiment", "covariant_info_check",
]
