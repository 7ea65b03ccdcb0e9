"""States, measurements, parametric models and fidelity for d-level systems.

Everything here is a small immutable value object over dense numpy arrays.
Matrices are validated once on construction; downstream code can rely on the
invariants without re-checking.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionError, DomainError, NumericalError, ValidationError

# Validity tolerance for states and POVM elements.
STATE_ATOL = 1e-10
# Tolerance on probability sums and POVM completeness.
DIST_ATOL = 1e-8
# Central finite-difference step for model derivatives.
FD_STEP = 1e-5
# Eigenvalues below this are treated as exact zeros inside square roots.
SQRT_CLAMP = 1e-13

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def is_hermitian(a: np.ndarray, atol: float = STATE_ATOL) -> bool:
    return bool(np.allclose(a, dagger(a), atol=atol, rtol=0.0))


def sqrt_psd(a: np.ndarray) -> np.ndarray:
    """Square root of a Hermitian PSD matrix, clamping tiny eigenvalues to 0."""
    w, u = np.linalg.eigh(hermitian_part(a))
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.min(w) < -1e-8 * scale:
        raise NumericalError(f"matrix has negative eigenvalue {np.min(w):.3e}")
    w = np.where(w < SQRT_CLAMP * scale, 0.0, w)
    return (u * np.sqrt(w)) @ dagger(u)


def abs_hermitian(a: np.ndarray) -> np.ndarray:
    """Matrix absolute value |A| of a Hermitian matrix."""
    w, u = np.linalg.eigh(hermitian_part(a))
    return (u * np.abs(w)) @ dagger(u)


@dataclass(frozen=True)
class QuantumState:
    """Density matrix of a d-level system."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DimensionError(f"density matrix must be square, got shape {m.shape}")
        if not is_hermitian(m):
            raise ValidationError("density matrix is not self-adjoint")
        tr = np.trace(m)
        if abs(tr.real - 1.0) > STATE_ATOL or abs(tr.imag) > STATE_ATOL:
            raise ValidationError(f"density matrix has trace {tr}")
        w = np.linalg.eigvalsh(hermitian_part(m))
        if w[0] < -STATE_ATOL:
            raise ValidationError(f"density matrix has negative eigenvalue {w[0]:.3e}")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def is_pure(self, atol: float = 1e-8) -> bool:
        return abs(np.trace(self.matrix @ self.matrix).real - 1.0) < atol

    @classmethod
    def pure(cls, vector: Sequence[complex]) -> "QuantumState":
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, d: int) -> "QuantumState":
        return cls(np.eye(d) / d)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "matrix": matrix_to_json(self.matrix)}

    @classmethod
    def from_dict(cls, data: dict) -> "QuantumState":
        return cls(matrix_from_json(data["matrix"]))


@dataclass(frozen=True)
class Povm:
    """Finite-outcome POVM; ``elements[x]`` is the effect of outcome x."""

    elements: tuple

    def __post_init__(self):
        els = [np.asarray(e, dtype=complex) for e in self.elements]
        if not els:
            raise ValidationError("POVM needs at least one element")
        d = els[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for e in els:
            if e.shape != (d, d):
                raise DimensionError("POVM elements must share one square shape")
            if not is_hermitian(e):
                raise ValidationError("POVM element is not self-adjoint")
            if np.linalg.eigvalsh(hermitian_part(e))[0] < -STATE_ATOL:
                raise ValidationError("POVM element is not positive")
            total += e
        if not np.allclose(total, np.eye(d), atol=DIST_ATOL, rtol=0.0):
            raise ValidationError("POVM elements do not sum to the identity")
        object.__setattr__(self, "elements", tuple(_frozen(e) for e in els))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    def stacked(self) -> np.ndarray:
        return np.stack(self.elements)

    @classmethod
    def from_basis(cls, vectors: np.ndarray) -> "Povm":
        """Projective measurement in the orthonormal basis given by the columns."""
        u = np.asarray(vectors, dtype=complex)
        return cls(tuple(np.outer(u[:, x], u[:, x].conj()) for x in range(u.shape[1])))

    @classmethod
    def trivial(cls, d: int) -> "Povm":
        return cls((np.eye(d, dtype=complex),))

    def merge(self, i: int, j: int) -> "Povm":
        """Coarse-grain by merging outcomes i and j."""
        keep = [e for k, e in enumerate(self.elements) if k not in (i, j)]
        return Povm(tuple(keep) + (self.elements[i] + self.elements[j],))

    def tensor_power(self, n: int) -> "Povm":
        els = list(self.elements)
        for _ in range(n - 1):
            els = [np.kron(a, b) for a in els for b in self.elements]
        return Povm(tuple(els))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "elements": [matrix_to_json(e) for e in self.elements]}

    @classmethod
    def from_dict(cls, data: dict) -> "Povm":
        return cls(tuple(matrix_from_json(e) for e in data["elements"]))


@dataclass(frozen=True)
class OutcomeDistribution:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if abs(p.sum() - 1.0) > DIST_ATOL:
            raise NumericalError(f"probabilities sum to {p.sum()!r}")
        if p.min() < -1e-12:
            raise NumericalError(f"negative probability {p.min():.3e}")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    def __len__(self) -> int:
        return len(self.probabilities)


@dataclass(frozen=True)
class ParametricModel:
    """Smooth family theta -> rho(theta).

    ``state_fn`` returns a raw density matrix. ``deriv_fn``, when given, returns
    the p partial derivatives; otherwise central differences are used.
    ``project`` maps an arbitrary density matrix to the closest chart point and
    is used by estimators to seed likelihood maximization.
    """

    param_dim: int
    state_fn: Callable[[np.ndarray], np.ndarray]
    deriv_fn: Optional[Callable[[np.ndarray], Sequence[np.ndarray]]] = None
    contains: Callable[[np.ndarray], bool] = field(default=lambda th: True)
    domain: str = "R^p"
    name: str = "custom"
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None
    bounds: Optional[tuple] = None

    def _theta(self, theta) -> np.ndarray:
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        if th.shape != (self.param_dim,):
            raise DimensionError(f"{self.name}: expected {self.param_dim} parameters, got {th.shape}")
        return th

    def check(self, theta) -> np.ndarray:
        th = self._theta(theta)
        if not self.contains(th):
            raise DomainError(f"{self.name}: theta={th.tolist()} outside {self.domain}")
        return th

    def matrix(self, theta) -> np.ndarray:
        return np.asarray(self.state_fn(self.check(theta)), dtype=complex)

    def state(self, theta) -> QuantumState:
        return QuantumState(self.matrix(theta))

    @property
    def dim(self) -> int:
        return self.matrix(self.reference()).shape[0]

    def reference(self) -> np.ndarray:
        return np.zeros(self.param_dim)

    def derivatives(self, theta) -> list:
        th = self.check(theta)
        if self.deriv_fn is not None:
            return [np.asarray(m, dtype=complex) for m in self.deriv_fn(th)]
        return self.fd_derivatives(th)

    def fd_derivatives(self, theta, step: float = FD_STEP) -> list:
        th = self._theta(theta)
        out = []
        for i in range(self.param_dim):
            e = np.zeros(self.param_dim)
            e[i] = step
            plus = np.asarray(self.state_fn(th + e), dtype=complex)
            minus = np.asarray(self.state_fn(th - e), dtype=complex)
            out.append(hermitian_part((plus - minus) / (2 * step)))
        return out


def born_distribution(state: QuantumState, povm: Povm) -> OutcomeDistribution:
    """Outcome probabilities trace(rho M(x))."""
    if state.dim != povm.dim:
        raise DimensionError(f"state dim {state.dim} != POVM dim {povm.dim}")
    traces = np.einsum("ij,xji->x", state.matrix, povm.stacked())
    if np.max(np.abs(traces.imag)) > DIST_ATOL:
        raise NumericalError("Born-rule trace has a non-negligible imaginary part")
    return OutcomeDistribution(traces.real)


def bloch_matrix(theta) -> np.ndarray:
    th = np.asarray(theta, dtype=float)
    return 0.5 * (np.eye(2) + sum(t * s for t, s in zip(th, PAULIS)))


def bloch_state(theta) -> QuantumState:
    th = np.asarray(theta, dtype=float)
    if th.shape != (3,):
        raise DimensionError("Bloch vector must have 3 components")
    if np.linalg.norm(th) > 1 + 1e-12:
        raise DomainError(f"Bloch vector norm {np.linalg.norm(th)} exceeds 1")
    return QuantumState(bloch_matrix(th))


def _as_matrix(x) -> np.ndarray:
    return x.matrix if isinstance(x, QuantumState) else np.asarray(x, dtype=complex)


def fidelity(a, b) -> float:
    """Fidelity (trace sqrt(a^1/2 b a^1/2))^2, computed as the squared nuclear
    norm of sqrt(a) sqrt(b), which is better conditioned near pure states."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionError(f"fidelity of states with shapes {ma.shape} and {mb.shape}")
    s = np.linalg.svd(sqrt_psd(ma) @ sqrt_psd(mb), compute_uv=False)
    return float(min(1.0, max(0.0, s.sum() ** 2)))


def bloch_fidelity(theta, theta_hat) -> float:
    t, th = np.asarray(theta, dtype=float), np.asarray(theta_hat, dtype=float)
    r2, rh2 = t @ t, th @ th
    if r2 > 1 + 1e-12 or rh2 > 1 + 1e-12:
        raise DomainError("Bloch vector outside the unit ball")
    return float(0.5 * (1 + t @ th + np.sqrt(max(0.0, 1 - rh2)) * np.sqrt(max(0.0, 1 - r2))))


def hermitian_basis(d: int) -> list:
    """Trace-orthonormal basis of d x d Hermitian matrices, identity first.

    Order: I/sqrt(d); then for each pair j<k the symmetric and antisymmetric
    off-diagonal elements; then the d-1 traceless diagonal elements.
    """
    if d < 2:
        raise DimensionError("hermitian_basis needs d >= 2")
    out = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            a = np.zeros((d, d), dtype=complex)
            a[j, k], a[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            out += [s, a]
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        out.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return out


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def haar_unitaries(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    return q * (diag / np.abs(diag))[:, None, :]


def random_povm(d: int, outcomes: int, rng: np.random.Generator) -> "Povm":
    """Random POVM E_x = S^(-1/2) A_x^* A_x S^(-1/2) from complex Gaussian A_x."""
    a = (rng.standard_normal((outcomes, d, d)) + 1j * rng.standard_normal((outcomes, d, d))) / np.sqrt(2)
    pos = np.einsum("xji,xjk->xik", a.conj(), a)
    w, u = np.linalg.eigh(pos.sum(axis=0))
    s = (u / np.sqrt(w)) @ u.conj().T
    return Povm(tuple(hermitian_part(s @ e @ s) for e in pos))


def matrix_to_json(m: np.ndarray) -> list:
    """Row-major nested list of [re, im] pairs."""
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in m]
    return [matrix_to_json(row) for row in m]


def matrix_from_json(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.shape[-1] != 2:
        raise ValidationError("complex matrices are serialized as [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]
