"""Closed-form detection results.

Covers pure states, discrimination of a pure state against a uniform
mixture of orthonormal states (state comparison), the general
rank-2 + rank-2 problem through its quartic, and the symmetric
(block-circulant) rank-2 case whose quartic is biquadratic.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NonOrthogonalColumns, NotRank2, NumericFailure
from .linalg import QuarticCoefficients, char_poly, solve_biquadratic, solve_quartic

CLAMP_TOL = 1e-9


def _check_prior(q0: float) -> None:
    if not 0.0 < q0 < 1.0:
        raise DomainError(f"prior q0 must lie in (0, 1), got {q0}")


def _clamped_sqrt(v: float, what: str) -> float:
    if v < 0.0:
        if v < -CLAMP_TOL:
            raise DomainError(f"{what} is negative ({v:.3e})")
        warnings.warn(f"{what} = {v:.3e} clamped to 0", stacklevel=3)
        return 0.0
    return math.sqrt(v)


# -- pure states ------------------------------------------------------------


def pure_eigenvalues(q0: float, X: complex) -> tuple[float, float]:
    """Nonzero eigenvalues (eta_plus >= 0 >= eta_minus) for two pure states."""
    _check_prior(q0)
    if abs(X) > 1.0 + 1e-12:
        raise DomainError(f"|<a|b>| = {abs(X)} exceeds 1")
    q1 = 1.0 - q0
    root = _clamped_sqrt(_pure_discriminant(q0, X), "1 - 4 q0 q1 |X|^2")
    return 0.5 * ((q1 - q0) + root), 0.5 * ((q1 - q0) - root)


def _pure_discriminant(q0: float, X: complex) -> float:
    # 1 - 4 q0 q1 |X|^2 as a sum of terms that are nonnegative for |X| <= 1,
    # so that |X| = 1 gives exactly (q1 - q0)^2
    q1 = 1.0 - q0
    return (q1 - q0) ** 2 + 4.0 * q0 * q1 * (1.0 - abs(X) ** 2)


def pure_bound(q0: float, X: complex) -> float:
    """Helstrom bound on the correct-decision probability for pure states."""
    _check_prior(q0)
    if abs(X) > 1.0 + 1e-12:
        raise DomainError(f"|<a|b>| = {abs(X)} exceeds 1")
    return 0.5 * (1.0 + _clamped_sqrt(_pure_discriminant(q0, X), "1 - 4 q0 q1 |X|^2"))


def pure_skew_gram(q0: float, X: complex) -> np.ndarray:
    q1 = 1.0 - q0
    k = math.sqrt(q0 * q1)
    return np.array([[-q0, -k * X], [k * np.conj(X), q1]], dtype=complex)


# -- state comparison ---------------------------------------------------------


@dataclass(frozen=True)
class ComparisonSpec:
    """Pure |a> against the uniform mixture of h orthonormal kets |b_i>.

    Only ``||X||^2 = sum_i |<a|b_i>|^2`` enters the result.
    """

    q0: float
    h: int
    norm2: float

    def __post_init__(self):
        _check_prior(self.q0)
        if self.h < 1:
            raise DomainError("h must be at least 1")
        if not 0.0 <= self.norm2 <= 1.0 + 1e-12:
            raise DomainError(f"||X||^2 = {self.norm2} outside [0, 1]")

    @classmethod
    def from_overlaps(cls, q0: float, overlaps) -> "ComparisonSpec":
        ov = np.atleast_1d(np.asarray(overlaps, dtype=complex))
        return cls(q0, len(ov), float(np.sum(np.abs(ov) ** 2)))

    @property
    def q1(self) -> float:
        return 1.0 - self.q0


def _comparison_root(spec: ComparisonSpec) -> float:
    q0, q1, h = spec.q0, spec.q1, spec.h
    # (q1/h + q0)^2 - 4 q0 q1 |X|^2 / h rewritten as a sum of nonnegative terms
    return math.sqrt((q1 / h - q0) ** 2 + 4.0 * q0 * q1 * (1.0 - spec.norm2) / h)


def comparison_eigenvalues(spec: ComparisonSpec) -> np.ndarray:
    """The h+1 nonzero eigenvalues, ascending."""
    q0, q1, h = spec.q0, spec.q1, spec.h
    root = _comparison_root(spec)
    vals = [q1 / h] * (h - 1) + [0.5 * (q1 / h - q0 + root), 0.5 * (q1 / h - q0 - root)]
    return np.sort(np.array(vals))


def comparison_pc(spec: ComparisonSpec) -> float:
    return 0.5 * (1.0 + spec.q1 * (spec.h - 1) / spec.h + _comparison_root(spec))


def comparison_pe_equal_priors(h: int, norm2: float) -> float:
    """Error probability when all h+1 kets are equally likely."""
    return (1.0 - math.sqrt(1.0 - norm2)) / (h + 1)


# -- rank 2 + rank 2 ----------------------------------------------------------


@dataclass(frozen=True)
class Rank2Parameters:
    """Seven-parameter description of a rank-2 + rank-2 binary problem.

    ``rho0 = p_a |a><a| + p_c |c><c|`` and ``rho1 = p_b |b><b| + p_d |d><d|``
    with <a|c> = <b|d> = 0; X, Y, W, Z are <a|b>, <a|d>, <c|b>, <c|d>.
    p_a + p_c may fall short of 1 when the states were rank-truncated.
    """

    q0: float
    p_a: float
    p_c: float
    p_b: float
    p_d: float
    X: complex
    Y: complex
    W: complex
    Z: complex

    def __post_init__(self):
        _check_prior(self.q0)
        for name in ("X", "Y", "W", "Z"):
            if abs(getattr(self, name)) > 1.0 + 1e-12:
                raise DomainError(f"|{name}| exceeds 1")
        weights = (self.p, self.q, self.r, self.s)
        if min(weights) < 0.0 or sum(weights) > 1.0 + 1e-9:
            raise DomainError("state weights must be >= 0 with total <= 1")

    @property
    def q1(self) -> float:
        return 1.0 - self.q0

    # weighted probabilities
    @property
    def p(self) -> float:
        return self.q0 * self.p_a

    @property
    def q(self) -> float:
        return self.q0 * self.p_c

    @property
    def r(self) -> float:
        return self.q1 * self.p_b

    @property
    def s(self) -> float:
        return self.q1 * self.p_d

    # weighted inner products
    @property
    def x(self) -> complex:
        return math.sqrt(self.p * self.r) * self.X

    @property
    def y(self) -> complex:
        return math.sqrt(self.p * self.s) * self.Y

    @property
    def w(self) -> complex:
        return math.sqrt(self.q * self.r) * self.W

    @property
    def z(self) -> complex:
        return math.sqrt(self.q * self.s) * self.Z

    def gram(self) -> np.ndarray:
        g00 = np.diag([self.p, self.q]).astype(complex)
        g11 = np.diag([self.r, self.s]).astype(complex)
        g01 = np.array([[self.x, self.y], [self.w, self.z]], dtype=complex)
        return np.block([[g00, g01], [g01.conj().T, g11]])

    def skew_gram(self) -> np.ndarray:
        gs = self.gram()
        gs[:2] *= -1.0
        return gs

    @classmethod
    def from_gram(cls, gram, q0: float, orth_tol: float = 1e-9) -> "Rank2Parameters":
        g = np.asarray(gram, dtype=complex)
        if g.shape != (4, 4):
            raise NotRank2(f"expected a 4x4 Gram matrix, got {g.shape}")
        scale = np.max(np.abs(g))
        if abs(g[0, 1]) > orth_tol * scale or abs(g[2, 3]) > orth_tol * scale:
            raise NonOrthogonalColumns("columns of a factor are not orthogonal")
        q1 = 1.0 - q0
        p, q, r, s = g[0, 0].real, g[1, 1].real, g[2, 2].real, g[3, 3].real

        def unweight(v, a, b):
            return complex(v / math.sqrt(a * b)) if a * b > 0 else 0j

        return cls(
            q0,
            p / q0,
            q / q0,
            r / q1,
            s / q1,
            unweight(g[0, 2], p, r),
            unweight(g[0, 3], p, s),
            unweight(g[1, 2], q, r),
            unweight(g[1, 3], q, s),
        )


def rank2_coefficients(rp: Rank2Parameters) -> QuarticCoefficients:
    """Quartic coefficients from the characteristic polynomial of the SGM."""
    c = char_poly(rp.skew_gram())
    return QuarticCoefficients(*(float(v) for v in c[1:]))


def rank2_coefficients_symbolic(rp: Rank2Parameters) -> QuarticCoefficients:
    """The same coefficients written out in the seven parameters."""
    p, q, r, s = rp.p, rp.q, rp.r, rp.s
    x, y, w, z = rp.x, rp.y, rp.w, rp.z
    ax, ay, aw, az = (abs(v) ** 2 for v in (x, y, w, z))
    B = p + q - r - s
    C = ax + aw + ay + az + p * q - p * r - q * r - p * s - q * s + r * s
    D = ax * (q - s) + aw * (p - s) + ay * (q - r) + az * (p - r) - p * q * r - p * q * s + p * r * s + q * r * s
    cross = 2.0 * (x * np.conj(w) * np.conj(y) * z).real
    E = ax * az + aw * ay - ax * q * s - aw * p * s - ay * q * r - az * p * r - cross + p * q * r * s
    return QuarticCoefficients(B, C, float(D), float(E))


def quartic_rs(c: QuarticCoefficients) -> tuple[float, float]:
    """Auxiliary R and S of the resolvent used by the positive-root sum."""
    B, C, D, E = c
    R = 2 * C**3 - 9 * B * D * C - 72 * E * C + 27 * D**2 + 27 * B**2 * E
    S = C**2 - 3 * B * D + 12 * E
    return R, S


class PositiveSum(NamedTuple):
    value: float
    R: float
    S: float
    fallback: bool  # True when the closed form was replaced by explicit roots


def rank2_positive_sum(c: QuarticCoefficients, tol: float = 1e-8) -> PositiveSum:
    """Sum of the two positive roots of the rank-2 quartic.

    Evaluated in complex arithmetic with principal branches, then checked
    against the explicit roots; a mismatch or a non-negligible imaginary
    part switches to the explicit roots and sets ``fallback``.
    """
    B, C, D, E = c
    R, S = quartic_rs(c)
    roots = solve_quartic(c)
    direct = float(np.sum(roots[roots > 0]))
    try:
        cbrt2 = 2.0 ** (1.0 / 3.0)
        t = complex(R + cmath.sqrt(R * R - 4.0 * S**3)) ** (1.0 / 3.0)
        inner = B * B / 4.0 - 2.0 * C / 3.0 + t / (3.0 * cbrt2) + cbrt2 * S / (3.0 * t)
        val = cmath.sqrt(inner) - B / 2.0
    except ZeroDivisionError:
        return PositiveSum(direct, R, S, True)
    if abs(val.imag) > tol or abs(val.real - direct) > tol:
        return PositiveSum(direct, R, S, True)
    return PositiveSum(val.real, R, S, False)


# -- symmetric rank 2 ---------------------------------------------------------


@dataclass(frozen=True)
class GusParameters:
    """Symmetric rank-2 pair with equal priors: p_a, p_c and X, Y, Z.

    X and Z are real.  ``p_c`` defaults to ``1 - p_a``.
    """

    p_a: float
    X: float
    Y: complex
    Z: float
    p_c: float | None = None

    def __post_init__(self):
        for name in ("X", "Z"):
            v = complex(getattr(self, name))
            if abs(v.imag) > 1e-9:
                raise DomainError(f"{name} must be real for a symmetric pair")
            object.__setattr__(self, name, v.real)
        if self.p_c is None:
            object.__setattr__(self, "p_c", 1.0 - self.p_a)
        if self.p_a < 0 or self.p_c < 0 or self.p_a + self.p_c > 1.0 + 1e-9:
            raise DomainError("p_a, p_c must be >= 0 with p_a + p_c <= 1")
        if abs(self.Y) > 1.0 + 1e-12 or abs(self.X) > 1.0 + 1e-12 or abs(self.Z) > 1.0 + 1e-12:
            raise DomainError("inner products must not exceed 1 in modulus")

    @classmethod
    def from_rank2(cls, rp: Rank2Parameters) -> "GusParameters":
        return cls(rp.p_a, complex(rp.X), complex(rp.Y), complex(rp.Z), p_c=rp.p_c)

    def to_rank2(self) -> Rank2Parameters:
        return Rank2Parameters(0.5, self.p_a, self.p_c, self.p_a, self.p_c, self.X, self.Y, np.conj(self.Y), self.Z)


def gus_hl(gp: GusParameters) -> tuple[float, float]:
    """H and L of the biquadratic; both forms of L are evaluated and compared."""
    pa, pc, X, Z = gp.p_a, gp.p_c, gp.X, gp.Z
    y2 = abs(gp.Y) ** 2
    H = pa**2 * (1 - X**2) + pc**2 * (1 - Z**2) - 2 * pa * pc * y2
    L_expanded = (pa * pc) ** 2 * (y2**2 - 2 * (1 + X * Z) * y2 + (1 - X**2) * (1 - Z**2))
    L_factored = (pa * pc) ** 2 * ((y2 - (1 + X * Z)) ** 2 - (X + Z) ** 2)
    if abs(L_expanded - L_factored) > 1e-12 * max(1.0, abs(L_expanded)):
        raise NumericFailure("the two forms of L disagree")
    return H, L_factored


def gus_eigenvalues(gp: GusParameters) -> np.ndarray:
    H, L = gus_hl(gp)
    return solve_biquadratic(H, L)


def gus_pc(gp: GusParameters) -> float:
    """Correct-decision probability 1/2 + 1/2 sqrt(H + 2 sqrt(L))."""
    H, L = gus_hl(gp)
    arg = H + 2.0 * _clamped_sqrt(L, "L")
    if arg > 1.0:
        warnings.warn(f"H + 2 sqrt(L) = {arg} clamped to 1", stacklevel=2)
        arg = 1.0
    return 0.5 + 0.5 * _clamped_sqrt(arg, "H + 2 sqrt(L)")


def gus_pc_pure(X: float) -> float:
    """p_a = 1 limit."""
    return 0.5 + 0.5 * math.sqrt(1.0 - X**2)


def gus_pc_orthogonal(gp: GusParameters) -> float:
    """Y = 0 limit: the two state pairs decouple."""
    return 0.5 + 0.5 * (gp.p_a * math.sqrt(1.0 - gp.X**2) + gp.p_c * math.sqrt(1.0 - gp.Z**2))
