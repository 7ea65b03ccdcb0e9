"""Local asymptotic normality: CLT basis, limit Gaussian model and L map.

Around a diagonal state rho0 = diag(mu) with mu strictly decreasing, the
collective observables built from the operators

    Q_jk = (|j><k| + |k><j|) / sqrt(2 (mu_j - mu_k))
    P_jk = i (|k><j| - |j><k|) / sqrt(2 (mu_j - mu_k))
    C_i  = |i><i| - mu_i 1

converge to a classical-quantum Gaussian shift. Basis order is all (Q, P)
pairs for j < k in lexicographic order followed by C_1..C_{d-1}, which puts the
limit symplectic form in canonical layout.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .core import ParametricModel, QuantumState
from .errors import DegeneracyError, DimensionError, DomainError, ValidationError
from .gaussian import GaussianShift, SymplecticForm
from .models import local_chart_matrix

GAP_TOL = 1e-6
DIAG_TOL = 1e-10
LOCAL_EPS = 0.1


def _spectrum(rho0) -> np.ndarray:
    rho = rho0.matrix if isinstance(rho0, QuantumState) else QuantumState(np.asarray(rho0)).matrix
    off = rho - np.diag(np.diag(rho))
    if np.max(np.abs(off)) > DIAG_TOL:
        raise ValidationError("rho0 must be diagonal; diagonalize it first")
    mu = np.diag(rho).real.copy()
    if mu.min() <= GAP_TOL:
        raise DegeneracyError("rho0 has a zero eigenvalue")
    if np.any(np.diff(mu) >= -GAP_TOL):
        raise DegeneracyError("eigenvalues must be strictly decreasing with gaps above 1e-6")
    return mu


@dataclass(frozen=True)
class CltBasis:
    mu: np.ndarray
    operators: tuple
    labels: tuple
    pairs: tuple

    @property
    def dim(self) -> int:
        return self.mu.size

    @property
    def quantum_modes(self) -> int:
        return len(self.pairs)

    def gram_rank(self) -> int:
        ops = [np.eye(self.dim, dtype=complex)] + list(self.operators)
        flat = np.array([np.concatenate((o.real.ravel(), o.imag.ravel())) for o in ops])
        return int(np.linalg.matrix_rank(flat, tol=1e-10))

    def __getitem__(self, label: str) -> np.ndarray:
        return self.operators[self.labels.index(label)]


def clt_basis(rho0) -> CltBasis:
    mu = _spectrum(rho0)
    d = mu.size
    ops, labels, pairs = [], [], []
    for j in range(d):
        for k in range(j + 1, d):
            norm = np.sqrt(2 * (mu[j] - mu[k]))
            jk = np.zeros((d, d), dtype=complex)
            jk[j, k] = 1.0
            ops.append((jk + jk.T) / norm)
            ops.append(1j * (jk.T - jk) / norm)
            labels += [f"Q{j + 1}{k + 1}", f"P{j + 1}{k + 1}"]
            pairs.append((j, k))
    for i in range(d - 1):
        c = -mu[i] * np.eye(d, dtype=complex)
        c[i, i] += 1.0
        ops.append(c)
        labels.append(f"C{i + 1}")
    return CltBasis(mu, tuple(ops), tuple(labels), tuple(pairs))


def quantum_clt_covariance(rho0, basis: CltBasis) -> np.ndarray:
    """Matrix trace(rho0 X_a X_b); real part is the limit covariance and twice
    the imaginary part the limit symplectic form."""
    rho = np.diag(basis.mu).astype(complex) if rho0 is None else np.asarray(
        rho0.matrix if isinstance(rho0, QuantumState) else rho0, dtype=complex)
    m = len(basis.operators)
    out = np.empty((m, m), dtype=complex)
    for a in range(m):
        ra = rho @ basis.operators[a]
        for b in range(m):
            out[a, b] = np.trace(ra @ basis.operators[b])
    return 0.5 * (out + out.conj().T)


@dataclass(frozen=True)
class LimitGaussian:
    """Limit of the local i.i.d. model around diag(mu).

    ``quantum_blocks`` hold the covariance of each (Q, P) pair computed as
    Re trace(rho0 X^2) = (mu_j + mu_k) / (2 (mu_j - mu_k)); ``gap_variances``
    hold the alternative 1 / (2 (mu_j - mu_k)). The two agree when
    mu_j + mu_k = 1, in particular for qubits.
    """

    mu: np.ndarray
    basis: CltBasis
    classical_cov: np.ndarray
    quantum_blocks: tuple
    gap_variances: tuple
    covariance: np.ndarray = field(repr=False)
    symplectic_matrix: np.ndarray = field(repr=False)

    @property
    def symplectic(self) -> SymplecticForm:
        return SymplecticForm.from_matrix(self.symplectic_matrix)

    def mean_map(self, h) -> np.ndarray:
        """Mean of the limit variables (basis order) for local chart parameter h."""
        h = np.asarray(h, dtype=float)
        d = self.mu.size
        if h.size != d * d - 1:
            raise DimensionError(f"h must have {d * d - 1} entries")
        out = np.empty(d * d - 1)
        idx = d - 1
        for n, (j, k) in enumerate(self.basis.pairs):
            scale = np.sqrt((self.mu[j] - self.mu[k]) / 2)
            out[2 * n] = h[idx] / scale
            out[2 * n + 1] = h[idx + 1] / scale
            idx += 2
        out[2 * len(self.basis.pairs):] = h[: d - 1]
        return out

    def shift(self, l_matrix=None) -> GaussianShift:
        """Gaussian shift with mean L h; default L is the canonical chart (k = m)."""
        if l_matrix is None:
            l_matrix = canonical_l_map(self.basis)
        return GaussianShift(self.covariance, np.asarray(l_matrix).T, self.symplectic)

    def to_dict(self) -> dict:
        return {
            "mu": self.mu.tolist(),
            "labels": list(self.basis.labels),
            "classical_cov": self.classical_cov.tolist(),
            "quantum_blocks": [b.tolist() for b in self.quantum_blocks],
            "gap_variances": list(self.gap_variances),
            "covariance": self.covariance.tolist(),
            "symplectic": self.symplectic_matrix.tolist(),
        }


def limit_model(rho0) -> LimitGaussian:
    basis = clt_basis(rho0)
    mu = basis.mu
    cov = quantum_clt_covariance(None, basis)
    v = cov.real.copy()
    s = 2 * cov.imag
    s[np.abs(s) < 1e-14] = 0.0
    p = basis.quantum_modes
    classical = np.diag(mu[:-1]) - np.outer(mu[:-1], mu[:-1])
    blocks = tuple(v[2 * n: 2 * n + 2, 2 * n: 2 * n + 2].copy() for n in range(p))
    gaps = tuple(float(1 / (2 * (mu[j] - mu[k]))) for j, k in basis.pairs)
    SymplecticForm.from_matrix(s)
    return LimitGaussian(mu, basis, classical, blocks, gaps, v, s)


def canonical_l_map(basis: CltBasis) -> np.ndarray:
    """L for the full (u, zeta) chart around diag(mu)."""
    d = basis.dim
    derivs = [local_chart_matrix(basis.mu, e) - np.diag(basis.mu) for e in np.eye(d * d - 1)]
    return _l_from_derivs(derivs, basis)


def _l_from_derivs(derivs, basis: CltBasis) -> np.ndarray:
    return np.array([[np.trace(dr @ x).real for x in basis.operators] for dr in derivs])


def l_map(model: ParametricModel, theta0, basis: CltBasis | None = None) -> np.ndarray:
    """k x m matrix L[i][a] = trace(d_i rho(theta0) X_a); rho(theta0) must be diagonal."""
    rho = model.matrix(theta0)
    if basis is None:
        basis = clt_basis(rho)
    elif np.max(np.abs(rho - np.diag(basis.mu))) > 1e-8:
        raise ValidationError("model state at theta0 differs from the basis reference state")
    return _l_from_derivs(model.derivatives(theta0), basis)


@dataclass(frozen=True)
class LocalModel:
    """rho_{h / sqrt(N)} in the (u, zeta) chart; requires |h| <= N^eps."""

    mu: np.ndarray
    h: np.ndarray
    n: int
    eps: float = LOCAL_EPS

    def __post_init__(self):
        mu = _spectrum(np.diag(np.asarray(self.mu, dtype=float)))
        h = np.asarray(self.h, dtype=float).ravel()
        if h.size != mu.size**2 - 1:
            raise DimensionError(f"h must have {mu.size ** 2 - 1} entries")
        if np.linalg.norm(h) > self.n**self.eps + 1e-12:
            raise DomainError(f"|h| = {np.linalg.norm(h):.3g} exceeds N^eps = {self.n ** self.eps:.3g}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "h", h)

    def state(self) -> np.ndarray:
        rho = local_chart_matrix(self.mu, self.h / np.sqrt(self.n))
        if np.linalg.eigvalsh(rho)[0] < -1e-12:
            raise DomainError("local state is not positive semidefinite")
        return rho


@dataclass(frozen=True)
class CltReport:
    n: int
    reps: int
    rows: tuple

    def to_rows(self) -> list:
        return [dict(r) for r in self.rows]


def _spectral_law(op: np.ndarray, rho: np.ndarray):
    w, u = np.linalg.eigh(op)
    p = np.einsum("ia,ij,ja->a", u.conj(), rho, u).real
    p = np.clip(p, 0.0, None)
    return w, p / p.sum()


def clt_empirical_check(rho0, h, n: int, reps: int, seed: int, observables=None,
                        eps: float = LOCAL_EPS) -> CltReport:
    """Sample X_a(N)/sqrt(N) on rho_{h/sqrt N}^{(x)N} for each basis observable.

    Each collective observable is a sum of single-copy terms on distinct
    factors, so its law is that of the sum of N i.i.d. spectral outcomes; the
    counts are multinomial.
    """
    if n < 100 or reps < 1000:
        raise ValidationError("need N >= 100 and reps >= 1000")
    lim = limit_model(rho0)
    basis = lim.basis
    local = LocalModel(basis.mu, h, n, eps)
    rho = local.state()
    means = lim.mean_map(local.h)
    labels = basis.labels if observables is None else tuple(observables)
    streams = np.random.SeedSequence(seed).spawn(len(basis.labels))
    rows = []
    for a, label in enumerate(basis.labels):
        if label not in labels:
            continue
        rng = np.random.default_rng(streams[a])
        values, probs = _spectral_law(basis.operators[a], rho)
        counts = rng.multinomial(n, probs, size=reps)
        sample = counts @ values / np.sqrt(n)
        var_pred = float(lim.covariance[a, a])
        ks = stats.kstest(sample, "norm", args=(means[a], np.sqrt(var_pred))).statistic
        emp_var = float(sample.var(ddof=1))
        row = {
            "observable": label,
            "N": n,
            "reps": reps,
            "mean": float(sample.mean()),
            "mean_se": float(np.sqrt(emp_var / reps)),
            "predicted_mean": float(means[a]),
            "variance": emp_var,
            "predicted_variance": var_pred,
            "ks": float(ks),
        }
        if label[0] in "QP":
            gap = lim.gap_variances[a // 2]
            row["variance_trace_rule"] = var_pred
            row["variance_gap_rule"] = gap
            row["closer_rule"] = "trace" if abs(emp_var - var_pred) <= abs(emp_var - gap) else "gap"
        rows.append(row)
    return CltReport(n, reps, tuple(rows))
