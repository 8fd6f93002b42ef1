"""Instance builders shared by the test modules."""

import numpy as np

from skewgram import BinaryEnsemble, DensityOperator, FactorSet, GramPair, build_gram_pair, factor_ensemble


def random_state(rng, n, k):
    """Random rank-k density operator on C^n."""
    a = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    w = rng.uniform(0.05, 1.0, k)
    rho = (a * w) @ a.conj().T
    return DensityOperator(rho / np.trace(rho).real)


def random_ensemble(rng, n=None, k0=None, k1=None, q0=None):
    n = int(rng.integers(4, 13)) if n is None else n
    fixed = (k0, k1)
    while True:
        # the factor pair needs k0 + k1 <= n
        k0 = int(rng.integers(1, 4)) if fixed[0] is None else fixed[0]
        k1 = int(rng.integers(1, 4)) if fixed[1] is None else fixed[1]
        if k0 + k1 <= n:
            break
    q0 = float(rng.uniform(0.05, 0.95)) if q0 is None else q0
    return BinaryEnsemble(random_state(rng, n, k0), random_state(rng, n, k1), q0), (k0, k1)


def ensemble_and_pair(rng, **kw):
    e, ranks = random_ensemble(rng, **kw)
    return e, build_gram_pair(factor_ensemble(e, ranks=ranks))


def remark_pair() -> tuple[GramPair, float]:
    """Rank-deficient state matrix: columns e1, e2 | e1, e3 in C^4, equal priors."""
    eye = np.eye(4, dtype=complex)
    g0 = 0.5 * eye[:, [0, 1]]
    g1 = 0.5 * eye[:, [0, 2]]
    return build_gram_pair(FactorSet(g0, g1, 0.5)), 0.5


def ensemble_of(gp: GramPair, q0: float) -> BinaryEnsemble:
    g0 = gp.state_matrix[:, : gp.k0]
    g1 = gp.state_matrix[:, gp.k0:]
    return BinaryEnsemble(DensityOperator(g0 @ g0.conj().T / q0), DensityOperator(g1 @ g1.conj().T / (1 - q0)), q0)


def unitary(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def rank2_instance(rng, n=6, q0=None):
    """Random rank-2 pair; returns the ensemble and its exact parameters."""
    from skewgram import Rank2Parameters

    q0 = float(rng.uniform(0.1, 0.9)) if q0 is None else q0
    u, v = unitary(rng, n), unitary(rng, n)
    a, c, b, d = u[:, 0], u[:, 1], v[:, 0], v[:, 1]
    pa, pb = rng.uniform(0.05, 0.95, 2)
    rho0 = pa * np.outer(a, a.conj()) + (1 - pa) * np.outer(c, c.conj())
    rho1 = pb * np.outer(b, b.conj()) + (1 - pb) * np.outer(d, d.conj())
    rp = Rank2Parameters(q0, pa, 1 - pa, pb, 1 - pb, np.vdot(a, b), np.vdot(a, d), np.vdot(c, b), np.vdot(c, d))
    return BinaryEnsemble(DensityOperator(rho0), DensityOperator(rho1), q0), rp


def gus_instance(rng, n=6, pa=None):
    """Symmetric rank-2 pair rho1 = S rho0 S with S a Hermitian unitary (S^2 = I)."""
    from skewgram import GusParameters

    pa = float(rng.uniform(0.05, 0.95)) if pa is None else pa
    u = unitary(rng, n)
    # balanced signs keep span{a, c, Sa, Sc} four dimensional; a reflection
    # with a single -1 gives L = 0, where sqrt(L) turns 1e-17 rounding into 1e-8
    signs = np.where(np.arange(n) < n // 2, 1.0, -1.0)
    s = u @ np.diag(signs) @ u.conj().T
    w = unitary(rng, n)
    a, c = w[:, 0], w[:, 1]
    b, d = s @ a, s @ c
    rho0 = pa * np.outer(a, a.conj()) + (1 - pa) * np.outer(c, c.conj())
    rho1 = pa * np.outer(b, b.conj()) + (1 - pa) * np.outer(d, d.conj())
    gp = GusParameters(pa, np.vdot(a, b), np.vdot(a, d), np.vdot(c, d))
    return BinaryEnsemble(DensityOperator(rho0), DensityOperator(rho1), 0.5), gp


def comparison_ensemble(rng, q0, overlaps):
    """|a> against the uniform mixture of h orthonormal kets, randomly rotated."""
    ov = np.asarray(overlaps, dtype=complex)
    h = len(ov)
    n = h + 2
    u = unitary(rng, n)
    bs = u[:, :h]
    a = bs @ np.conj(ov) + np.sqrt(max(0.0, 1 - np.sum(np.abs(ov) ** 2))) * u[:, h]
    rho0 = np.outer(a, a.conj())
    rho1 = bs @ bs.conj().T / h
    return BinaryEnsemble(DensityOperator(rho0), DensityOperator(rho1), q0)
