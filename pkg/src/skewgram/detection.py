"""Optimal binary detection by two independent routes.

``helstrom_solve`` diagonalizes the n x n decision operator
D = q1 rho1 - q0 rho0 directly.  ``sgm_solve`` works only with the
(k0+k1) x (k0+k1) skew Gram matrix of the weighted factors, then lifts its
eigenvectors back to the Hilbert space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ComplexRoots, DimensionMismatch, ShapeMismatch
from .linalg import as_matrix, general_eig_small, hermitian_eig, null_space
from .states import DEFAULT_RANK_TOL, DensityOperator, FactorSet, factor_density

ZERO_TOL = 1e-10
LIFT_TOL = 1e-14
CLUSTER_GAP = 1e-5


@dataclass(frozen=True, eq=False)
class BinaryEnsemble:
    rho0: DensityOperator
    rho1: DensityOperator
    q0: float
    q1: float | None = None

    def __post_init__(self):
        for name in ("rho0", "rho1"):
            v = getattr(self, name)
            if not isinstance(v, DensityOperator):
                object.__setattr__(self, name, DensityOperator(v))
        if self.q1 is None:
            object.__setattr__(self, "q1", 1.0 - self.q0)
        if not (0.0 <= self.q0 <= 1.0 and 0.0 <= self.q1 <= 1.0) or abs(self.q0 + self.q1 - 1.0) > 1e-12:
            raise ValueError(f"priors ({self.q0}, {self.q1}) do not form a distribution")
        if self.rho0.dim != self.rho1.dim:
            raise DimensionMismatch(f"rho0 is {self.rho0.dim}-dimensional, rho1 is {self.rho1.dim}")

    @property
    def dim(self) -> int:
        return self.rho0.dim

    def swapped(self) -> "BinaryEnsemble":
        return BinaryEnsemble(self.rho1, self.rho0, self.q1, self.q0)


@dataclass(frozen=True, eq=False)
class GramPair:
    """State matrix [gamma0, gamma1] with its Gram and skew Gram matrices."""

    state_matrix: np.ndarray
    k0: int
    k1: int
    gram: np.ndarray
    skew_gram: np.ndarray

    @property
    def g00(self) -> np.ndarray:
        return self.gram[: self.k0, : self.k0]

    @property
    def g01(self) -> np.ndarray:
        return self.gram[: self.k0, self.k0 :]

    @property
    def g10(self) -> np.ndarray:
        return self.gram[self.k0 :, : self.k0]

    @property
    def g11(self) -> np.ndarray:
        return self.gram[self.k0 :, self.k0 :]


@dataclass(frozen=True, eq=False)
class DetectionResult:
    """Eigenvalues, lifted eigenvectors and measurement of one solve.

    ``eigenvalues`` is the full spectrum that was computed (D for the
    Helstrom route, G_s for the skew Gram route), ascending.  ``eigenvectors``
    holds one column per nonzero eigenvalue in ``nonzero_eigenvalues``.
    ``spurious`` lists eigenvalues of G_s whose eigenvectors lift to the
    zero vector and therefore have no counterpart in D.
    """

    method: str
    eigenvalues: np.ndarray
    nonzero_eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    pi0: np.ndarray
    pi1: np.ndarray
    pc: float
    q0: float
    spurious: tuple = ()
    cross_check_residual: float | None = None
    notes: tuple = field(default=())

    @property
    def pe(self) -> float:
        return 1.0 - self.pc


def decision_operator(e: BinaryEnsemble) -> np.ndarray:
    d = e.q1 * e.rho1.matrix - e.q0 * e.rho0.matrix
    return 0.5 * (d + d.conj().T)


def _measurement(vals: np.ndarray, vecs: np.ndarray, n: int):
    pos = vals > 0
    pi1 = vecs[:, pos] @ vecs[:, pos].conj().T if pos.any() else np.zeros((n, n), complex)
    neg = vals < 0
    pi0 = vecs[:, neg] @ vecs[:, neg].conj().T if neg.any() else np.zeros((n, n), complex)
    return pi0, pi1


def _identically_zero(vals: np.ndarray, q0: float, q1: float) -> bool:
    return vals.size == 0 or np.max(np.abs(vals)) <= 1e-13 * max(q0, q1)


def helstrom_solve(e: BinaryEnsemble) -> DetectionResult:
    """Optimal measurement from the eigendecomposition of D."""
    d = decision_operator(e)
    eig = hermitian_eig(d)
    vals, vecs = eig.eigenvalues[::-1], eig.eigenvectors[:, ::-1]
    n = e.dim
    if _identically_zero(vals, e.q0, e.q1):
        # nothing to distinguish: always announce the likelier hypothesis
        eye = np.eye(n, dtype=complex)
        zero = np.zeros((n, n), complex)
        pi0, pi1 = (eye, zero) if e.q0 >= e.q1 else (zero, eye)
        return DetectionResult(
            "helstrom", vals, np.zeros(0), np.zeros((n, 0), complex), pi0, pi1,
            max(e.q0, e.q1), e.q0, notes=("decision operator vanishes",),
        )
    keep = np.abs(vals) > ZERO_TOL * np.max(np.abs(vals))
    nz, nzvecs = vals[keep], vecs[:, keep]
    pi0, pi1 = _measurement(nz, nzvecs, n)
    pc = e.q0 + float(np.sum(nz[nz > 0]))
    return DetectionResult("helstrom", vals, nz, nzvecs, pi0, pi1, pc, e.q0)


def factor_ensemble(e: BinaryEnsemble, rank_tol: float = DEFAULT_RANK_TOL, ranks=(None, None)) -> FactorSet:
    g0 = factor_density(e.rho0, e.q0, rank_tol, ranks[0])
    g1 = factor_density(e.rho1, e.q1, rank_tol, ranks[1])
    return FactorSet(g0, g1, e.q0)


def build_gram_pair(fs: FactorSet) -> GramPair:
    """Assemble Gamma, G = Gamma^* Gamma and the skew Gram matrix."""
    g0, g1 = fs.gamma0, fs.gamma1
    if g0.shape[0] != g1.shape[0]:
        raise DimensionMismatch("factors have different row counts")
    gamma = np.hstack([g0, g1])
    g00 = g0.conj().T @ g0
    g01 = g0.conj().T @ g1
    g11 = g1.conj().T @ g1
    g00 = 0.5 * (g00 + g00.conj().T)
    g11 = 0.5 * (g11 + g11.conj().T)
    gram = np.block([[g00, g01], [g01.conj().T, g11]])
    skew = np.block([[-g00, -g01], [g01.conj().T, g11]])
    for m in (gamma, gram, skew):
        m.setflags(write=False)
    return GramPair(gamma, fs.k0, fs.k1, gram, skew)


def gram_pair_from_gram(gram, k0: int, q0: float) -> GramPair:
    """A Gram pair realizing a given PSD Gram matrix in dimension k0+k1.

    The state matrix is the PSD square root of ``gram``.
    """
    g = as_matrix(gram)
    g = 0.5 * (g + g.conj().T)
    eig = hermitian_eig(g)
    root = eig.eigenvectors @ np.diag(np.sqrt(np.clip(eig.eigenvalues, 0.0, None))) @ eig.eigenvectors.conj().T
    k = g.shape[0]
    return build_gram_pair(FactorSet(root[:, :k0], root[:, k0:], q0))


def _clusters(values: np.ndarray, gap: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and v - values[groups[-1][-1]] <= gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _g_orthonormalize(x: np.ndarray, gram: np.ndarray) -> np.ndarray:
    m = x.conj().T @ gram @ x
    m = 0.5 * (m + m.conj().T)
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        x, _ = np.linalg.qr(x)
        return x
    return np.linalg.solve(chol, x.conj().T).conj().T


def _refine_cluster(gp: GramPair, center: float, size: int, scale: float, seed: int):
    """Inverse subspace iteration at ``center`` followed by Rayleigh-Ritz.

    The pencil (G G_s, G) is Hermitian-definite on the nonzero eigenspaces,
    so the Ritz values are real and the Ritz vectors G-orthonormal.
    """
    gs, g = gp.skew_gram, gp.gram
    k = gs.shape[0]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((k, size)) + 1j * rng.standard_normal((k, size))
    shift = center + 1e-11 * scale
    shifted = gs - shift * np.eye(k)
    vals = np.full(size, center)
    for _ in range(30):
        x = np.linalg.solve(shifted, x)
        x = _g_orthonormalize(x, g)
        a = x.conj().T @ g @ gs @ x
        ritz = hermitian_eig(0.5 * (a + a.conj().T))
        vals_new, y = ritz.eigenvalues[::-1], ritz.eigenvectors[:, ::-1]
        x = x @ y
        resid = np.linalg.norm(gs @ x - x * vals_new, axis=0)
        done = np.all(resid <= 1e-13 * scale * np.linalg.norm(x, axis=0)) and np.allclose(vals_new, vals, rtol=0, atol=1e-15 * scale)
        vals = vals_new
        if done:
            break
    return vals, x


def _hermitian_estimates(gp: GramPair) -> np.ndarray:
    """Spectrum of G_s = J G read off the Hermitian G^(1/2) J G^(1/2).

    Both matrices share their eigenvalues (AB and BA do), but the Hermitian
    form keeps full relative accuracy for small eigenvalues, which the
    characteristic polynomial cannot resolve once the spectrum spans many
    orders of magnitude.
    """
    eig = hermitian_eig(gp.gram)
    root = eig.eigenvectors * np.sqrt(np.clip(eig.eigenvalues, 0.0, None))
    root = root @ eig.eigenvectors.conj().T
    sign = np.concatenate([-np.ones(gp.k0), np.ones(gp.k1)])
    h = root @ (sign[:, None] * root)
    return np.sort(hermitian_eig(0.5 * (h + h.conj().T)).eigenvalues)


def _refine_spectrum(gp: GramPair, estimates: np.ndarray, scale: float, seed: int):
    is_zero = np.abs(estimates) <= 1e-8 * scale
    nonzero = estimates[~is_zero]
    vals_out, thetas = [], []
    for i, grp in enumerate(_clusters(nonzero, CLUSTER_GAP * scale)):
        center = float(np.mean(nonzero[grp]))
        vals, x = _refine_cluster(gp, center, len(grp), scale, seed=seed + i)
        vals_out.append(vals)
        thetas.append(x)
    k = gp.skew_gram.shape[0]
    vals = np.concatenate(vals_out) if vals_out else np.zeros(0)
    theta = np.hstack(thetas) if thetas else np.zeros((k, 0), complex)
    return vals, theta, int(is_zero.sum())


def _spectrum_consistent(gs: np.ndarray, vals: np.ndarray, scale: float) -> bool:
    # the first two power sums of the refined spectrum must reproduce
    # tr(G_s) and tr(G_s^2); a lost or doubled eigenvalue breaks them
    k = gs.shape[0]
    t1 = float(np.trace(gs).real)
    t2 = float(np.trace(gs @ gs).real)
    return abs(np.sum(vals) - t1) <= 1e-9 * k * scale and abs(np.sum(vals**2) - t2) <= 1e-9 * k * scale**2


def sgm_solve(gp: GramPair, q0: float, cross_check: BinaryEnsemble | None = None, seed: int = 0) -> DetectionResult:
    """Optimal measurement from the skew Gram matrix.

    Eigenvalue estimates come from the characteristic polynomial of G_s and
    are then polished per cluster.  When the polynomial cannot resolve the
    spectrum (complex roots, or polished values that miss tr(G_s) or
    tr(G_s^2)), the estimates are taken from the Hermitian form
    G^(1/2) J G^(1/2) instead and a note is added.  Each eigenvector theta
    is lifted to ``c Gamma theta`` with ``c = 1/sqrt(theta^* G theta)``.
    Eigenvalues whose eigenvectors have zero lift are reported in
    ``spurious`` and do not enter the measurement.  ``seed`` only picks the
    start vectors of the inverse iteration.
    """
    gs, g, gamma = gp.skew_gram, gp.gram, gp.state_matrix
    n, k = gamma.shape
    q1 = 1.0 - q0
    notes = []
    try:
        estimates = general_eig_small(gs)
    except ComplexRoots:
        estimates = None
    if estimates is None:
        notes.append("characteristic polynomial ill-conditioned; estimates from the Hermitian form")
        estimates = _hermitian_estimates(gp)
    scale = max(float(np.max(np.abs(estimates))), 1e-300) if k else 1e-300
    if k == 0 or _identically_zero(estimates, q0, q1):
        eye = np.eye(n, dtype=complex)
        zero = np.zeros((n, n), complex)
        pi0, pi1 = (eye, zero) if q0 >= q1 else (zero, eye)
        return DetectionResult("sgm", estimates, np.zeros(0), np.zeros((n, 0), complex), pi0, pi1,
                               max(q0, q1), q0, notes=("skew Gram matrix vanishes",))

    vals, theta, n_zero = _refine_spectrum(gp, estimates, scale, seed)
    if not notes and not _spectrum_consistent(gs, vals, scale):
        notes.append("characteristic polynomial ill-conditioned; estimates from the Hermitian form")
        vals, theta, n_zero = _refine_spectrum(gp, _hermitian_estimates(gp), scale, seed)

    spurious = []
    if n_zero:
        kernel = null_space(gs, ZERO_TOL)
        for j in range(kernel.shape[1]):
            th = kernel[:, j]
            if (th.conj() @ g @ th).real <= LIFT_TOL * np.linalg.norm(g):
                spurious.append(0.0)

    norms = np.real(np.einsum("ij,ik,kj->j", theta.conj(), g, theta))
    lifted = []
    keep = []
    for j, nrm in enumerate(norms):
        if nrm <= LIFT_TOL * np.linalg.norm(g):
            spurious.append(float(vals[j]))
            continue
        lifted.append(gamma @ theta[:, j] / math.sqrt(nrm))
        keep.append(j)
    if spurious:
        notes.append(f"{len(spurious)} skew Gram eigenvector(s) lift to zero")
    vals = vals[keep]
    vecs = np.column_stack(lifted) if lifted else np.zeros((n, 0), complex)
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]

    pi0, pi1 = _measurement(vals, vecs, n)
    pc = q0 + float(np.sum(vals[vals > 0]))

    full = np.sort(np.concatenate([vals, np.zeros(n_zero)]))
    residual = None
    if cross_check is not None:
        d = decision_operator(cross_check)
        residual = float(max((np.linalg.norm(d @ vecs[:, j] - vals[j] * vecs[:, j]) for j in range(len(vals))), default=0.0))
    return DetectionResult("sgm", full, vals, vecs, pi0, pi1, pc, q0, tuple(spurious), residual, tuple(notes))


@dataclass(frozen=True)
class MeasurementReport:
    pc_eigen: float
    pc_trace: float
    pc_deviation: float
    min_eig_pi0: float
    min_eig_pi1: float
    idempotency_error: float
    orthogonality_error: float

    @property
    def max_deviation(self) -> float:
        return max(self.pc_deviation, -min(self.min_eig_pi0, 0.0), -min(self.min_eig_pi1, 0.0),
                   self.idempotency_error, self.orthogonality_error)

    def ok(self, tol: float = 1e-9) -> bool:
        return self.max_deviation <= tol


def verify_measurement(result: DetectionResult, e: BinaryEnsemble) -> MeasurementReport:
    """Recompute P_c from traces and audit the measurement operators.

    The eigenvalue sum q0 + sum(eta > 0) presumes tr(rho0) = 1.  For
    rank-truncated states the comparison uses q0 tr(rho0) + sum(eta > 0)
    instead, which is what the traces actually give.
    """
    if result.pi0.shape != (e.dim, e.dim):
        raise DimensionMismatch("result and ensemble dimensions differ")
    pc_eigen = result.pc - e.q0 * (1.0 - e.rho0.trace)
    pc_trace = float((e.q0 * np.trace(e.rho0.matrix @ result.pi0) + e.q1 * np.trace(e.rho1.matrix @ result.pi1)).real)
    mins = []
    idem = 0.0
    for pi in (result.pi0, result.pi1):
        h = 0.5 * (pi + pi.conj().T)
        mins.append(float(np.min(np.linalg.eigvalsh(h))))
        idem = max(idem, float(np.linalg.norm(pi @ pi - pi)))
    orth = float(np.linalg.norm(result.pi0 @ result.pi1))
    return MeasurementReport(pc_eigen, pc_trace, abs(pc_eigen - pc_trace), mins[0], mins[1], idem, orth)


def is_gus(gp: GramPair, tol: float = 1e-9) -> bool:
    """Block-circulant test: G11 = G00 and G01 Hermitian, max-norm relative to G."""
    if gp.k0 != gp.k1:
        raise ShapeMismatch(f"k0={gp.k0} and k1={gp.k1} differ")
    scale = max(float(np.max(np.abs(gp.gram))), 1e-300)
    return bool(
        np.max(np.abs(gp.g11 - gp.g00)) <= tol * scale
        and np.max(np.abs(gp.g01 - gp.g01.conj().T)) <= tol * scale
    )
