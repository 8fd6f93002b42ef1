"""Kets, density operators and their weighted low-rank factors.

The optical states are displaced thermal (Glauber) states in a truncated
Fock basis.  Their matrix elements are available in closed form:

    <m|rho|k> = exp(-|a|^2/(1+N)) (1+N)^-(k+1) (a/(1+N))^(m-k) sqrt(k!/m!)
                * sum_j C(m, k-j) x^j N^(k-j) / j!,     m >= k,

with ``x = |a|^2/(1+N)``.  This is the usual Laguerre form with the factor
``N^k`` pulled inside the sum, so it is finite at ``N = 0`` where it
reduces to the coherent-state projector.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import InvalidSpec, RankZero, TruncationError
from .linalg import as_matrix, hermitian_eig, is_hermitian

TRACE_ERROR = 0.99
TRACE_WARN = 0.999
DEFAULT_RANK_TOL = 1e-6


def ket(amplitudes) -> np.ndarray:
    """Normalized complex column state from raw amplitudes."""
    v = np.asarray(amplitudes, dtype=complex).ravel()
    norm = np.linalg.norm(v)
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("cannot normalize a zero or non-finite ket")
    return v / norm


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian PSD matrix with trace in (0, 1]."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if not is_hermitian(m):
            raise InvalidSpec("density operator must be Hermitian")
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if not 0.0 < tr <= 1.0 + 1e-12:
            raise InvalidSpec(f"density operator trace {tr} outside (0, 1]")
        try:
            np.linalg.cholesky(m + 1e-10 * np.eye(m.shape[0]))
        except np.linalg.LinAlgError:
            raise InvalidSpec("density operator has an eigenvalue below -1e-10") from None
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True)
class CoherentSpec:
    """Displaced thermal state: amplitude, mean thermal photons, Fock size."""

    alpha: complex
    n_thermal: float = 0.0
    dim: int = 10

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidSpec("Fock truncation needs dim >= 2")
        if not self.n_thermal >= 0.0:
            raise InvalidSpec("mean thermal photon number must be >= 0")

    @property
    def signal_photons(self) -> float:
        return abs(self.alpha) ** 2


def pure_density(psi) -> DensityOperator:
    v = ket(psi)
    return DensityOperator(np.outer(v, v.conj()))


def coherent_ket(alpha: complex, dim: int) -> np.ndarray:
    """Truncated coherent state, renormalized after truncation."""
    m = np.arange(dim)
    log_fact = np.array([math.lgamma(k + 1) for k in m])
    amp = np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * log_fact) * np.power(complex(alpha), m)
    return ket(amp)


def _thermal_sum(m: int, k: int, x: float, n: float) -> float:
    return sum(math.comb(m, k - j) * x**j * n ** (k - j) / math.factorial(j) for j in range(k + 1))


def _glauber_matrix(alpha: complex, n_thermal: float, dim: int) -> np.ndarray:
    a = complex(alpha)
    nb = float(n_thermal)
    x = abs(a) ** 2 / (1.0 + nb)
    pref = math.exp(-x)
    rho = np.zeros((dim, dim), dtype=complex)
    for m in range(dim):
        for k in range(m + 1):
            val = (
                pref
                * (1.0 + nb) ** -(k + 1)
                * (a / (1.0 + nb)) ** (m - k)
                * math.exp(0.5 * (math.lgamma(k + 1) - math.lgamma(m + 1)))
                * _thermal_sum(m, k, x, nb)
            )
            rho[m, k] = val
            rho[k, m] = val.conjugate()
    return rho


def _expm_matrix(alpha: complex, n_thermal: float, dim: int) -> np.ndarray:
    lower = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    disp = expm(alpha * lower.conj().T - np.conj(alpha) * lower)
    m = np.arange(dim)
    weights = n_thermal**m / (1.0 + n_thermal) ** (m + 1)
    return disp @ np.diag(weights) @ disp.conj().T


def displaced_thermal(spec: CoherentSpec, method: str = "glauber", normalize: bool = True) -> DensityOperator:
    """Truncated Fock-basis matrix of a displaced thermal state.

    ``method="glauber"`` truncates the exact infinite-dimensional matrix
    elements; ``method="expm"`` conjugates the truncated thermal state with
    a displacement built from truncated ladder operators.  With
    ``normalize`` the truncated matrix is rescaled to unit trace.

    Raises TruncationError when less than 99% of the trace survives.
    """
    if method == "glauber":
        rho = _glauber_matrix(spec.alpha, spec.n_thermal, spec.dim)
    elif method == "expm":
        rho = _expm_matrix(spec.alpha, spec.n_thermal, spec.dim)
    else:
        raise InvalidSpec(f"unknown construction method {method!r}")
    tr = np.trace(rho).real
    if tr < TRACE_ERROR:
        raise TruncationError(f"dim={spec.dim} keeps only {tr:.4f} of the trace")
    if tr < TRACE_WARN:
        warnings.warn(f"Fock truncation at dim={spec.dim} keeps {tr:.5f} of the trace", stacklevel=2)
    if normalize:
        rho = rho / tr
    return DensityOperator(rho)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # first component real positive; largest component when the first vanishes
    peak = np.max(np.abs(v))
    ref = v[0] if abs(v[0]) > 1e-8 * peak else v[np.argmax(np.abs(v))]
    return v * (abs(ref) / ref)


def factor_density(rho, q: float, rank_tol: float = DEFAULT_RANK_TOL, rank: int | None = None) -> np.ndarray:
    """n x k factor gamma with gamma gamma^* = q rho on the kept eigenspace.

    Columns are ``sqrt(q lambda_j) v_j`` in decreasing ``lambda_j``, keeping
    eigenvalues above ``rank_tol * lambda_max`` or exactly ``rank`` columns.
    """
    if not 0.0 < q <= 1.0:
        raise InvalidSpec(f"prior must lie in (0, 1], got {q}")
    if rank_tol <= 0:
        raise InvalidSpec("rank_tol must be positive")
    m = rho.matrix if isinstance(rho, DensityOperator) else as_matrix(rho)
    eig = hermitian_eig(m)
    lam = eig.eigenvalues
    if lam[0] <= 0.0:
        raise RankZero("density operator has no positive eigenvalue")
    k = int(np.count_nonzero(lam > rank_tol * lam[0])) if rank is None else int(rank)
    if not 1 <= k <= len(lam):
        raise RankZero(f"requested rank {k} is not available")
    cols = [_fix_phase(eig.eigenvectors[:, j]) * math.sqrt(q * max(lam[j], 0.0)) for j in range(k)]
    return np.column_stack(cols)


@dataclass(frozen=True, eq=False)
class FactorSet:
    """Weighted factors of the two hypotheses and the prior they carry."""

    gamma0: np.ndarray
    gamma1: np.ndarray
    q0: float

    def __post_init__(self):
        g0 = as_matrix(self.gamma0, square=False)
        g1 = as_matrix(self.gamma1, square=False)
        if g0.shape[0] != g1.shape[0]:
            raise InvalidSpec("factors live in different Hilbert spaces")
        if g0.shape[1] + g1.shape[1] > g0.shape[0]:
            raise InvalidSpec("k0 + k1 exceeds the Hilbert-space dimension")
        object.__setattr__(self, "gamma0", g0)
        object.__setattr__(self, "gamma1", g1)

    @property
    def k0(self) -> int:
        return self.gamma0.shape[1]

    @property
    def k1(self) -> int:
        return self.gamma1.shape[1]

    @property
    def dim(self) -> int:
        return self.gamma0.shape[0]

    @property
    def q1(self) -> float:
        return 1.0 - self.q0


def extract_rank2_parameters(fs: FactorSet):
    """Probabilities and inner products of a rank-2 + rank-2 factor set."""
    from .closedform import Rank2Parameters

    return Rank2Parameters.from_gram(gram_of(fs), fs.q0)


def gram_of(fs: FactorSet) -> np.ndarray:
    gamma = np.hstack([fs.gamma0, fs.gamma1])
    return gamma.conj().T @ gamma
