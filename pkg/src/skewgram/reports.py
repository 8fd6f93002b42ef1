"""Solver runs packaged as plain, JSON-ready report dictionaries.

Every ``run_*`` function solves one problem by all applicable methods and
returns a dict with the input echo, per-method eigenvalues and P_c/P_e,
the spread of P_c across methods and any warnings raised on the way.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .closedform import (
    ComparisonSpec,
    GusParameters,
    Rank2Parameters,
    comparison_eigenvalues,
    comparison_pc,
    comparison_pe_equal_priors,
    gus_eigenvalues,
    gus_hl,
    gus_pc,
    gus_pc_orthogonal,
    pure_bound,
    pure_eigenvalues,
    quartic_rs,
    rank2_coefficients,
    rank2_positive_sum,
)
from .detection import (
    BinaryEnsemble,
    DetectionResult,
    GramPair,
    build_gram_pair,
    factor_ensemble,
    gram_pair_from_gram,
    helstrom_solve,
    is_gus,
    sgm_solve,
    verify_measurement,
)
from .errors import DomainError, NonOrthogonalColumns
from .linalg import solve_quartic
from .states import (
    DEFAULT_RANK_TOL,
    CoherentSpec,
    DensityOperator,
    FactorSet,
    displaced_thermal,
    gram_of,
)

SIG_DIGITS = 12
SCHEMA_VERSION = 1


# -- serialization ------------------------------------------------------------


def _round(x: float):
    if not math.isfinite(x):
        return None
    v = float(f"{x:.{SIG_DIGITS}g}")
    return 0.0 if v == 0.0 else v


def to_jsonable(obj):
    """Recursively round floats to 12 significant digits.

    Complex numbers with a negligible imaginary part become reals, the
    rest become ``{"re": .., "im": ..}``.
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        if abs(z.imag) <= 1e-13 * max(1.0, abs(z.real)):
            return _round(z.real)
        return {"re": _round(z.real), "im": _round(z.imag)}
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    return obj


# -- report assembly ----------------------------------------------------------


@dataclass
class ReportBuilder:
    command: str
    inputs: dict
    methods: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    reference: dict = field(default_factory=dict)

    def add(self, name: str, eigenvalues, pc: float, notes=()):
        entry = {"eigenvalues": np.sort(np.real(np.asarray(eigenvalues, dtype=complex))), "pc": pc, "pe": 1.0 - pc}
        if notes:
            entry["notes"] = list(notes)
        self.methods[name] = entry

    def add_result(self, name: str, res: DetectionResult):
        notes = list(res.notes)
        self.add(name, res.nonzero_eigenvalues, res.pc, notes)
        self.warnings.extend(f"{name}: {n}" for n in notes if "ill-conditioned" in n)
        if res.spurious:
            self.methods[name]["spurious"] = list(res.spurious)

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "inputs": self.inputs,
            "methods": self.methods,
        }
        if len(self.methods) >= 2:
            pcs = [m["pc"] for m in self.methods.values()]
            out["max_deviation"] = max(pcs) - min(pcs)
        if self.reference:
            out["reference"] = self.reference
        if self.details:
            out["details"] = self.details
        out["warnings"] = list(dict.fromkeys(self.warnings))
        return to_jsonable(out)


class capture_warnings:
    """Collect warning messages into ``sink`` while still letting them surface."""

    def __init__(self, sink: list):
        self.sink = sink
        self._ctx = warnings.catch_warnings(record=True)

    def __enter__(self):
        self._records = self._ctx.__enter__()
        warnings.simplefilter("always")
        return self

    def __exit__(self, *exc):
        for w in self._records:
            self.sink.append(str(w.message))
        return self._ctx.__exit__(*exc)


def _truncated_ensemble(fs: FactorSet) -> BinaryEnsemble:
    # the weighted factors define rho_i' = gamma_i gamma_i^* / q_i (trace <= 1)
    r0 = fs.gamma0 @ fs.gamma0.conj().T / fs.q0
    r1 = fs.gamma1 @ fs.gamma1.conj().T / fs.q1
    return BinaryEnsemble(DensityOperator(r0), DensityOperator(r1), fs.q0)


def _audit(res: DetectionResult, e: BinaryEnsemble) -> dict:
    rep = verify_measurement(res, e)
    return {"pc_trace": rep.pc_trace, "pc_deviation": rep.pc_deviation, "max_violation": rep.max_deviation}


def _oracle_pair(builder: ReportBuilder, gp: GramPair, q0: float, seed: int):
    """SGM solve on ``gp`` and Helstrom solve on the ensemble it spans."""
    fs = FactorSet(gp.state_matrix[:, : gp.k0], gp.state_matrix[:, gp.k0:], q0)
    ens = _truncated_ensemble(fs)
    sg = sgm_solve(gp, q0, cross_check=ens, seed=seed)
    hs = helstrom_solve(ens)
    builder.add_result("sgm", sg)
    builder.add_result("helstrom", hs)
    builder.details["audit"] = {"sgm": _audit(sg, ens), "helstrom": _audit(hs, ens)}
    builder.details["lift_residual"] = sg.cross_check_residual
    return sg, hs, ens


def _two_kets(X: complex) -> np.ndarray:
    """Columns |a>, |b> in C^2 with <a|b> = X."""
    X = complex(X)
    a = np.array([1.0, 0.0], dtype=complex)
    b = np.array([X, math.sqrt(max(0.0, 1.0 - abs(X) ** 2))], dtype=complex)
    return np.column_stack([a, b])


# -- commands -------------------------------------------------------------------


def run_pure(q0: float, overlap: complex, seed: int = 0) -> dict:
    """Two pure states with <a|b> = overlap."""
    rb = ReportBuilder("pure", {"q0": q0, "overlap": complex(overlap)})
    with capture_warnings(rb.warnings):
        if abs(overlap) > 1.0 + 1e-12:
            raise DomainError(f"|overlap| = {abs(overlap)} exceeds 1")
        pc = pure_bound(q0, overlap)
        rb.add("closed_form", pure_eigenvalues(q0, overlap), pc)
        kets = _two_kets(overlap)
        q1 = 1.0 - q0
        fs = FactorSet(kets[:, :1] * math.sqrt(q0), kets[:, 1:] * math.sqrt(q1), q0)
        _oracle_pair(rb, build_gram_pair(fs), q0, seed)
    return rb.to_dict()


def comparison_instance(q0: float, overlaps) -> FactorSet:
    """|a> in C^(h+1) with <a|b_i> = X_i against the orthonormal b_i = e_i."""
    ov = np.atleast_1d(np.asarray(overlaps, dtype=complex))
    h = len(ov)
    norm2 = float(np.sum(np.abs(ov) ** 2))
    if norm2 > 1.0 + 1e-12:
        raise DomainError(f"sum |X_i|^2 = {norm2} exceeds 1")
    a = np.zeros(h + 1, dtype=complex)
    a[0] = math.sqrt(max(0.0, 1.0 - norm2))
    a[1:] = np.conj(ov)
    b = np.eye(h + 1, dtype=complex)[:, 1:]
    q1 = 1.0 - q0
    return FactorSet(a[:, None] * math.sqrt(q0), b * math.sqrt(q1 / h), q0)


def run_compare(q0: float | None, h: int, overlaps=None, norm2: float | None = None, seed: int = 0) -> dict:
    """Pure state against a uniform mixture of h orthonormal states."""
    if q0 is None:
        q0 = 1.0 / (h + 1)
    if overlaps is None:
        if norm2 is None:
            raise DomainError("give either the overlaps or their squared norm")
        overlaps = [math.sqrt(norm2 / h)] * h
    overlaps = [complex(v) for v in overlaps]
    if len(overlaps) != h:
        raise DomainError(f"expected {h} overlaps, got {len(overlaps)}")
    rb = ReportBuilder("compare", {"q0": q0, "h": h, "overlaps": overlaps})
    with capture_warnings(rb.warnings):
        spec = ComparisonSpec.from_overlaps(q0, overlaps)
        rb.add("closed_form", comparison_eigenvalues(spec), comparison_pc(spec))
        rb.details["norm2"] = spec.norm2
        if abs(q0 - 1.0 / (h + 1)) <= 1e-12:
            rb.details["pe_equal_priors"] = comparison_pe_equal_priors(h, spec.norm2)
        _oracle_pair(rb, build_gram_pair(comparison_instance(q0, overlaps)), q0, seed)
    return rb.to_dict()


def _rank2_details(rp: Rank2Parameters, rb: ReportBuilder) -> None:
    coeffs = rank2_coefficients(rp)
    R, S = quartic_rs(coeffs)
    roots = solve_quartic(coeffs)
    ps = rank2_positive_sum(coeffs)
    rb.add("closed_form_quartic", roots, rp.q0 + ps.value, ["explicit roots used"] if ps.fallback else ())
    rb.details["parameters"] = _param_dict(rp)
    rb.details["quartic"] = {
        "B": coeffs.B, "C": coeffs.C, "D": coeffs.D, "E": coeffs.E,
        "R": R, "S": S, "positive_sum": ps.value, "fallback": ps.fallback,
    }
    if ps.fallback:
        rb.warnings.append("closed-form positive-root sum replaced by explicit quartic roots")


def _param_dict(rp: Rank2Parameters) -> dict:
    return {k: getattr(rp, k) for k in ("q0", "p_a", "p_c", "p_b", "p_d", "X", "Y", "W", "Z")}


def _gus_details(gp: GusParameters, rb: ReportBuilder) -> None:
    H, L = gus_hl(gp)
    pc = gus_pc(gp)
    eig = gus_eigenvalues(gp)
    rb.add("closed_form_gus", eig, pc)
    rb.add("biquadratic", eig, 0.5 + float(np.sum(eig[eig > 0])))
    info = {"H": H, "L": L, "quartic_C": -0.25 * H, "quartic_E": L / 16.0}
    yzero = GusParameters(gp.p_a, gp.X, 0.0, gp.Z, p_c=gp.p_c)
    H0, L0 = gus_hl(yzero)
    info["orthogonal_limit"] = {"H": H0, "L": L0, "pc": gus_pc_orthogonal(yzero)}
    rb.details["gus"] = info


def parse_complex(v) -> complex:
    """``1.5``, ``"1.5"``, ``"re,im"``, ``[re, im]`` or ``{"re":, "im":}``."""
    if isinstance(v, dict):
        return complex(float(v["re"]), float(v.get("im", 0.0)))
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise DomainError(f"complex pair needs two entries, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        parts = v.split(",")
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
        raise DomainError(f"cannot parse complex value {v!r}")
    return complex(v)


def rank2_from_mapping(data: dict) -> Rank2Parameters:
    try:
        return Rank2Parameters(
            float(data["q0"]),
            float(data["p_a"]),
            float(data["p_c"]),
            float(data["p_b"]),
            float(data["p_d"]),
            *(parse_complex(data[k]) for k in ("X", "Y", "W", "Z")),
        )
    except KeyError as exc:
        raise DomainError(f"rank-2 parameters lack field {exc.args[0]!r}") from None


def run_rank2(rp: Rank2Parameters, seed: int = 0) -> dict:
    """Rank-2 + rank-2 problem given directly by its seven parameters."""
    rb = ReportBuilder("rank2", {"parameters": _param_dict(rp)})
    with capture_warnings(rb.warnings):
        _rank2_details(rp, rb)
        gp = gram_pair_from_gram(rp.gram(), 2, rp.q0)
        _oracle_pair(rb, gp, rp.q0, seed)
    return rb.to_dict()


def run_gus(gp_in: GusParameters, seed: int = 0) -> dict:
    """Symmetric rank-2 pair with equal priors."""
    rb = ReportBuilder("gus", {"p_a": gp_in.p_a, "p_c": gp_in.p_c, "X": gp_in.X, "Y": complex(gp_in.Y), "Z": gp_in.Z})
    with capture_warnings(rb.warnings):
        _gus_details(gp_in, rb)
        rp = gp_in.to_rank2()
        gp = gram_pair_from_gram(rp.gram(), 2, 0.5)
        _oracle_pair(rb, gp, 0.5, seed)
    return rb.to_dict()


@dataclass
class CoherentRun:
    """Intermediate objects of one coherent-state pipeline run."""

    ensemble: BinaryEnsemble
    factors: FactorSet
    gram_pair: GramPair
    rank2: Rank2Parameters | None
    gus: bool | None
    report: dict


def run_coherent_full(
    alpha0: complex,
    alpha1: complex,
    n_thermal: float = 0.0,
    dim: int = 10,
    q0: float = 0.5,
    rank: int | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
    method: str = "glauber",
    normalize: bool = True,
    seed: int = 0,
) -> CoherentRun:
    """Displaced thermal states, factored, solved by every applicable method."""
    inputs = {
        "alpha0": complex(alpha0), "alpha1": complex(alpha1), "n_thermal": n_thermal, "dim": dim,
        "q0": q0, "rank": rank, "rank_tol": rank_tol, "construction": method, "normalize": normalize,
    }
    rb = ReportBuilder("coherent", inputs)
    if dim < 4:
        raise DomainError("the coherent pipeline needs dim >= 4")
    if not 0.0 < q0 < 1.0:
        raise DomainError(f"prior q0 must lie in (0, 1), got {q0}")
    rp = None
    gus = None
    with capture_warnings(rb.warnings):
        rho0 = displaced_thermal(CoherentSpec(alpha0, n_thermal, dim), method, normalize)
        rho1 = displaced_thermal(CoherentSpec(alpha1, n_thermal, dim), method, normalize)
        full = BinaryEnsemble(rho0, rho1, q0)
        fs = factor_ensemble(full, rank_tol, (rank, rank))
        gp = build_gram_pair(fs)
        rb.details["ranks"] = [fs.k0, fs.k1]
        g = gram_of(fs)
        rb.details["trace_retained"] = [
            float(np.trace(g[: fs.k0, : fs.k0]).real) / q0,
            float(np.trace(g[fs.k0:, fs.k0:]).real) / (1.0 - q0),
        ]
        rb.details["gram"] = {"g00": gp.g00, "g01": gp.g01, "g11": gp.g11}
        _oracle_pair(rb, gp, q0, seed)
        rb.reference["helstrom_untruncated_pc"] = helstrom_solve(full).pc

        if fs.k0 == fs.k1 == 1:
            n0, n1 = g[0, 0].real / q0, g[1, 1].real / (1.0 - q0)
            if abs(n0 - 1.0) <= 1e-9 and abs(n1 - 1.0) <= 1e-9:
                X = g[0, 1] / math.sqrt(g[0, 0].real * g[1, 1].real)
                rb.add("closed_form_pure", pure_eigenvalues(q0, X), pure_bound(q0, X))
                rb.details["overlap"] = X
        if fs.k0 == fs.k1:
            gus = is_gus(gp)
            rb.details["gus_detected"] = gus
        if fs.k0 == fs.k1 == 2:
            try:
                rp = Rank2Parameters.from_gram(gp.gram, q0)
            except NonOrthogonalColumns:
                rb.warnings.append("factor columns not orthogonal; rank-2 closed form skipped")
            if rp is not None:
                _rank2_details(rp, rb)
                if gus:
                    _gus_details(GusParameters.from_rank2(rp), rb)
    return CoherentRun(full, fs, gp, rp, gus, rb.to_dict())


def run_coherent(*args, **kwargs) -> dict:
    return run_coherent_full(*args, **kwargs).report
