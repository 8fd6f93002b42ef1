"""Dense complex linear algebra and polynomial roots for small matrices.

Everything here is sized for the skew Gram problem: matrices of order a
few tens at most, characteristic polynomials of degree <= 12.  Matrices
are plain ``numpy.ndarray`` objects of dtype ``complex128``.
"""

from __future__ import annotations

import cmath
import math
from typing import NamedTuple

import numpy as np

from .errors import (
    ComplexRoots,
    ImaginaryResidue,
    NegativeDiscriminant,
    NoConvergence,
    NotHermitian,
)

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
CLUSTER_TOL = 1e-9


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # unitary, columns match eigenvalues


class QuarticCoefficients(NamedTuple):
    """Monic quartic ``eta**4 + B eta**3 + C eta**2 + D eta + E``."""

    B: float
    C: float
    D: float
    E: float

    def as_poly(self) -> np.ndarray:
        return np.array([1.0, self.B, self.C, self.D, self.E])


def as_matrix(m, square: bool = True) -> np.ndarray:
    """Copy ``m`` into a finite complex 2-D array."""
    a = np.array(m, dtype=complex, copy=True)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(m)
    scale = max(np.linalg.norm(a), 1e-300)
    return bool(np.linalg.norm(a - a.conj().T) <= tol * scale)


def _fro(a: np.ndarray) -> float:
    # Frobenius norm that does not underflow for tiny entries
    mag = np.abs(a)
    peak = float(np.max(mag)) if a.size else 0.0
    if peak == 0.0:
        return 0.0
    # exact power-of-two scaling; dividing by a subnormal peak overflows
    e = math.frexp(peak)[1]
    return math.ldexp(float(np.linalg.norm(np.ldexp(mag, -e))), e)


def _offdiag_norm(a: np.ndarray) -> float:
    return _fro(a - np.diag(np.diagonal(a)))


def hermitian_eig(m, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> HermitianEig:
    """Full eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Eigenvalues come back in descending order.  Within clusters of
    (numerically) equal eigenvalues the eigenvectors are re-orthonormalized.

    Raises
    ------
    NotHermitian
        If ``m`` deviates from its adjoint by more than 1e-12 relative.
    NoConvergence
        If the off-diagonal mass does not drop below ``tol * ||m||`` within
        ``max_sweeps`` sweeps.
    """
    a = as_matrix(m)
    if not is_hermitian(a):
        raise NotHermitian("matrix is not Hermitian to 1e-12 relative")
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = _fro(a)
    if scale == 0.0:
        return HermitianEig(np.zeros(n), v)

    skip = np.finfo(float).eps * 1e-3 * scale
    for _ in range(max_sweeps):
        if _offdiag_norm(a) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= skip:
                    continue
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ rot
    else:
        if _offdiag_norm(a) > tol * scale:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.diagonal(a).real.copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]

    # Jacobi returns an arbitrary basis inside each degenerate cluster
    start = 0
    for i in range(1, n + 1):
        if i == n or abs(w[i] - w[i - 1]) > CLUSTER_TOL * scale:
            if i - start > 1:
                q_, _ = np.linalg.qr(v[:, start:i])
                v[:, start:i] = q_
            start = i
    return HermitianEig(w, v)


def matrix_rank(m, tol: float = 1e-9) -> int:
    """Count singular values above ``tol`` times the largest one.

    The singular values are read off the Hermitian matrix
    [[0, M], [M^*, 0]], whose eigenvalues are +-sigma.  Going through M^*M
    instead would square them and blur everything below about 1e-8.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = as_matrix(m, square=False)
    if a.size == 0:
        return 0
    r, c = a.shape
    aug = np.zeros((r + c, r + c), dtype=complex)
    aug[:r, r:] = a
    aug[r:, :r] = a.conj().T
    sv = hermitian_eig(aug).eigenvalues[: min(r, c)]
    if sv[0] <= 0.0:
        return 0
    return int(np.count_nonzero(sv > tol * sv[0]))


def char_poly(m, imag_tol: float = 1e-9) -> np.ndarray:
    """Coefficients of ``det(eta I - m)``, highest power first, as reals.

    Faddeev-LeVerrier recursion.  The spectrum is expected to be real, so the
    coefficients are too; imaginary parts are checked and dropped.
    """
    a = as_matrix(m)
    n = a.shape[0]
    eye = np.eye(n, dtype=complex)
    coeffs = np.empty(n + 1, dtype=complex)
    coeffs[0] = 1.0
    mk = np.zeros_like(a)
    for k in range(1, n + 1):
        mk = a @ mk + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(a @ mk) / k

    scale = np.linalg.norm(a)
    for j in range(1, n + 1):
        bound = imag_tol * math.comb(n, j) * scale**j
        if abs(coeffs[j].imag) > bound:
            raise ImaginaryResidue(
                f"coefficient {j} has imaginary part {coeffs[j].imag:.3e} (allowed {bound:.3e})"
            )
    return coeffs.real.copy()


def _newton_step(poly: np.ndarray, z: complex) -> complex:
    f = np.polyval(poly, z)
    df = np.polyval(np.polyder(poly), z)
    if df == 0:
        return z
    cand = z - f / df
    return cand if abs(np.polyval(poly, cand)) <= abs(f) else z


def solve_cubic(a: complex, b: complex, c: complex) -> list[complex]:
    """Three complex roots of ``x**3 + a x**2 + b x + c`` by Cardano."""
    p = b - a * a / 3.0
    q = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
    shift = -a / 3.0
    if p == 0 and q == 0:
        return [complex(shift)] * 3
    disc = cmath.sqrt(q * q / 4.0 + p**3 / 27.0)
    u3 = -q / 2.0 + disc
    alt = -q / 2.0 - disc
    if abs(alt) > abs(u3):
        u3 = alt
    u = u3 ** (1.0 / 3.0)
    omega = complex(-0.5, math.sqrt(3.0) / 2.0)
    roots = []
    for k in range(3):
        uk = u * omega**k
        roots.append(uk - p / (3.0 * uk) + shift)
    return roots


def _quartic_roots_complex(B: float, C: float, D: float, E: float) -> list[complex]:
    """Ferrari's method, complex arithmetic throughout, Newton-polished."""
    p = C - 3.0 * B * B / 8.0
    q = D - B * C / 2.0 + B**3 / 8.0
    r = E - B * D / 4.0 + B * B * C / 16.0 - 3.0 * B**4 / 256.0
    shift = -B / 4.0
    scale = max(1.0, abs(p), abs(q), abs(r))

    if abs(q) <= 1e-14 * scale:
        disc = cmath.sqrt(p * p - 4.0 * r)
        ys = []
        for z in ((-p + disc) / 2.0, (-p - disc) / 2.0):
            sz = cmath.sqrt(z)
            ys += [sz, -sz]
    else:
        ms = solve_cubic(p, p * p / 4.0 - r, -q * q / 8.0)
        m = max(ms, key=abs)
        s = cmath.sqrt(2.0 * m)
        ys = []
        for e1 in (1.0, -1.0):
            inner = cmath.sqrt(-(2.0 * p + 2.0 * m + e1 * 2.0 * q / s))
            for e2 in (1.0, -1.0):
                ys.append(0.5 * (e1 * s + e2 * inner))

    poly = np.array([1.0, B, C, D, E], dtype=complex)
    return [_newton_step(poly, y + shift) for y in ys]


def solve_quartic(c: QuarticCoefficients, imag_tol: float = 1e-8) -> np.ndarray:
    """Four real roots of a monic quartic, ascending.

    Raises ComplexRoots when a root's imaginary part exceeds
    ``imag_tol * max(1, |coefficients|)``.
    """
    B, C, D, E = (float(x) for x in c)
    roots = _quartic_roots_complex(B, C, D, E)
    scale = max(1.0, abs(B), abs(C), abs(D), abs(E))
    worst = max(abs(z.imag) for z in roots)
    if worst > imag_tol * scale:
        raise ComplexRoots(f"quartic has a root with imaginary part {worst:.3e}")
    return np.sort(np.array([z.real for z in roots]))


def solve_biquadratic(H: float, L: float, tol: float = 1e-12) -> np.ndarray:
    """Roots of ``eta**4 - H/4 eta**2 + L/16``, ascending."""
    disc = H * H - 4.0 * L
    if disc < -tol:
        raise NegativeDiscriminant(f"H^2 - 4L = {disc:.3e} < 0")
    root_disc = math.sqrt(max(disc, 0.0))
    hi = 0.5 * (H + root_disc)
    lo = 0.5 * (H - root_disc)
    if lo < -tol:
        raise ComplexRoots(f"biquadratic has imaginary roots (eta^2 = {lo / 4:.3e})")
    r_hi = 0.5 * math.sqrt(max(hi, 0.0))
    r_lo = 0.5 * math.sqrt(max(lo, 0.0))
    return np.array([-r_hi, -r_lo, r_lo, r_hi])


def durand_kerner(poly, tol: float = 1e-15, max_iter: int = 2000) -> np.ndarray:
    """All complex roots of a polynomial (highest power first)."""
    coeffs = np.asarray(poly, dtype=complex)
    coeffs = coeffs / coeffs[0]
    n = len(coeffs) - 1
    if n < 1:
        return np.zeros(0, dtype=complex)
    radius = 1.0 + max(abs(coeffs[1:]))
    z = radius * np.exp(1j * (2.0 * np.pi * np.arange(n) / n + 0.4))
    for _ in range(max_iter):
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        step = np.polyval(coeffs, z) / np.prod(diff, axis=1)
        z = z - step
        if np.max(np.abs(step)) <= tol * max(1.0, np.max(np.abs(z))):
            break
    return np.array([_newton_step(coeffs, zi) for zi in z])


def _poly_roots(poly: np.ndarray) -> list[complex]:
    deg = len(poly) - 1
    poly = poly / poly[0]
    if deg == 0:
        return []
    if deg == 1:
        return [complex(-poly[1])]
    if deg == 2:
        d = cmath.sqrt(poly[1] ** 2 - 4.0 * poly[2])
        return [(-poly[1] + d) / 2.0, (-poly[1] - d) / 2.0]
    if deg == 3:
        cplx = np.asarray(poly, dtype=complex)
        return [_newton_step(cplx, z) for z in solve_cubic(*poly[1:])]
    if deg == 4:
        return _quartic_roots_complex(*poly[1:])
    return list(durand_kerner(poly))


def general_eig_small(m, imag_tol: float = 1e-6, zero_tol: float = 1e-10) -> np.ndarray:
    """Eigenvalues of a small matrix with real spectrum, ascending.

    The characteristic polynomial is built first.  As many trailing
    coefficients as the nullity of ``m`` are dropped as exact zero roots and
    the rest is solved in closed form (degree <= 4) or by Durand-Kerner.
    The nullity is a lower bound on the multiplicity of zero (equal for a
    skew Gram matrix with nonsingular G); any further zero roots come back
    from the root finder as tiny values.  Thresholding the trailing
    coefficients instead would discard small but genuine eigenvalues.
    """
    a = as_matrix(m)
    n = a.shape[0]
    poly = char_poly(a)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n)

    zeros = n - matrix_rank(a, zero_tol)
    roots = _merge_multiple_roots(_poly_roots(poly[: n - zeros + 1]), imag_tol, scale)
    return np.sort(np.concatenate([roots, np.zeros(zeros)]))


def _merge_multiple_roots(roots, imag_tol: float, scale: float) -> np.ndarray:
    # a root of multiplicity m splits by about eps^(1/m) into a small complex
    # polygon; its mean is accurate to O(eps), so each cluster is replaced by
    # its mean and only then checked for an imaginary part
    z = sorted(roots, key=lambda v: v.real)
    radius = 1e-3 * scale
    groups: list[list[complex]] = []
    for v in z:
        if groups and abs(v - np.mean(groups[-1])) <= radius:
            groups[-1].append(v)
        else:
            groups.append([v])
    out = []
    for g in groups:
        m = len(g)
        center = complex(np.mean(g))
        spread = max(imag_tol, 10.0 * np.finfo(float).eps ** (1.0 / m))
        worst = max(abs(v.imag) for v in g) if m > 1 else abs(center.imag)
        if abs(center.imag) > imag_tol * scale or worst > spread * scale:
            raise ComplexRoots(f"eigenvalue with imaginary part {worst:.3e}")
        out.extend([center.real] * m)
    return np.array(out)


def null_space(a, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of ker(a) by Gaussian elimination with partial pivoting.

    Pivots smaller than ``tol * max|a|`` count as zero.
    """
    r = as_matrix(a, square=False)
    rows, cols = r.shape
    thresh = tol * max(np.max(np.abs(r)), 1e-300) if r.size else 0.0
    pivots: list[int] = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        k = row + int(np.argmax(np.abs(r[row:, col])))
        if abs(r[k, col]) <= thresh:
            r[row:, col] = 0.0
            continue
        r[[row, k]] = r[[k, row]]
        r[row] = r[row] / r[row, col]
        others = np.arange(rows) != row
        r[others] -= np.outer(r[others, col], r[row])
        pivots.append(col)
        row += 1

    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((cols, len(free)), dtype=complex)
    for j, f in enumerate(free):
        basis[f, j] = 1.0
        for i, pc in enumerate(pivots):
            basis[pc, j] = -r[i, f]
    if free:
        basis, _ = np.linalg.qr(basis)
    return basis
