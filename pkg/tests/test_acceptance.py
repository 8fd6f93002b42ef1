"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a single pass/fail line that is repeated in the pytest
terminal summary.  Criteria that the published numbers cannot meet are left
failing; the reasons are printed with the line.
"""

import json
import math
import time

import numpy as np
import pytest

from skewgram import (
    ComparisonSpec,
    comparison_pc,
    decision_operator,
    gus_pc,
    helstrom_solve,
    pure_bound,
    sgm_solve,
    verify_measurement,
)
from skewgram.cli import main
from skewgram.linalg import matrix_rank
from skewgram.reference import load_reference
from skewgram.reports import run_coherent_full

from helpers import comparison_ensemble, ensemble_and_pair, ensemble_of, gus_instance, remark_pair

NONSYM = ["coherent", "--alpha0", "-1.2247", "--alpha1", "1.3038", "--n-thermal", "0.05", "--dim", "10",
          "--q0", "0.4", "--rank", "2"]


def printed(entry_id):
    for e in load_reference()["entries"]:
        if e["id"] == entry_id:
            return e["printed"]
    raise KeyError(entry_id)


@pytest.fixture(scope="module")
def nonsym():
    return run_coherent_full(-1.2247, 1.3038, 0.05, 10, 0.4, 2)


@pytest.fixture(scope="module")
def sym():
    return run_coherent_full(-1.26491, 1.26491, 0.05, 10, 0.5, 2)


def test_criterion_1_nonsymmetric_end_to_end(capsys, criterion):
    t0 = time.perf_counter()
    code = main(NONSYM)
    elapsed = time.perf_counter() - t0
    rep = json.loads(capsys.readouterr().out)
    pc = rep["methods"]["sgm"]["pc"]
    pe = rep["methods"]["sgm"]["pe"]
    gram_err = 0.0
    for block in ("g00", "g01", "g11"):
        got = np.abs(np.array(rep["details"]["gram"][block], dtype=float))
        gram_err = max(gram_err, float(np.max(np.abs(got - np.abs(printed(f"nonsym.gram.{block}"))))))
    ok = code == 0 and abs(pc - 0.997268) <= 5e-5 and abs(pe - 0.00273197) <= 5e-5 and gram_err <= 5e-4 and elapsed < 1.0
    criterion(1, ok, f"pc={pc:.7f} pe={pe:.8f} gram max err={gram_err:.1e} runtime={elapsed:.3f}s")
    assert ok


def test_criterion_2_quartic_machinery(nonsym, criterion):
    q = nonsym.report["details"]["quartic"]
    got = {"B": q["B"], "C": q["C"], "D": q["D"], "E": q["E"], "R": q["R"], "S": q["S"]}
    want = dict(zip("BCDE", printed("nonsym.coefficients")))
    want["R"] = printed("nonsym.R")
    want["S"] = printed("nonsym.S")
    diffs = {k: abs(got[k] - want[k]) for k in want}
    ps = q["positive_sum"]
    bad = sorted(k for k, d in diffs.items() if d > 5e-5)
    ok = not bad and abs(ps - 0.59728) <= 5e-5
    detail = " ".join(f"{k}={got[k]:.6g}({diffs[k]:.1e})" for k in "BCDERS")
    note = f"; off by more than 5e-5: {','.join(bad)} (printed values expand a root list that disagrees with the printed spectrum)" if bad else ""
    criterion(2, ok, f"{detail} eta1+eta2={ps:.7f}{note}")
    assert ok


def test_criterion_3_pure_state_references(nonsym, sym, criterion):
    # "the same inner product": X as extracted from each example's Gram pair;
    # the printed X carries 4 digits, which alone moves P_e by ~1e-7
    rows = []
    ok = True
    for run, q0, want in ((nonsym, 0.4, 0.000401349), (sym, 0.5, 0.000415467)):
        X = abs(run.rank2.X)
        pe = 1.0 - pure_bound(q0, X)
        d = abs(pe - want)
        ok &= d <= 1e-8
        rounded = round(X, 5)
        literal = 1.0 - pure_bound(q0, rounded)
        rows.append(f"q0={q0} X={X:.7f} pe={pe:.9f} diff={d:.1e} (printed X={rounded}: pe={literal:.9f})")
    criterion(3, ok, "; ".join(rows))
    assert ok


def test_criterion_4_symmetric_case(sym, criterion):
    rep = sym.report
    detected = rep["details"]["gus_detected"] is True
    gus = rep["details"]["gus"]
    H, L = gus["H"], gus["L"]
    rel_H = abs(H - 0.907538) / 0.907538
    rel_L = abs(L - 0.0017714) / 0.0017714
    paths = [rep["methods"][m]["pc"] for m in ("helstrom", "biquadratic", "closed_form_gus")]
    spread = max(paths) - min(paths)
    # the three printed P_c values are reported by paper-check
    ref_ids = {e["id"]: e["status"] for e in load_reference()["entries"]}
    triple = all(i in ref_ids for i in ("sym.pc.first", "sym.pc.closed_form", "sym.pc.spectrum"))
    ok = detected and rel_H <= 2e-3 and rel_L <= 2e-3 and spread <= 1e-9 and triple
    orth = gus["orthogonal_limit"]
    detail = (f"gus={detected} H={H:.6f}(rel {rel_H:.1e}) L={L:.7f}(rel {rel_L:.1e}) path spread={spread:.1e}; "
              f"Y=0 limit gives H={orth['H']:.6f} L={orth['L']:.7f}, and the printed -H/4={printed('sym.quartic_C')} "
              f"L/16={printed('sym.quartic_E')} match the full values (computed -H/4={-H / 4:.6f} L/16={L / 16:.6g})")
    criterion(4, ok, detail)
    assert ok


def test_criterion_5_theorem_suite(criterion):
    rng = np.random.default_rng(5)
    worst_eig = worst_pc = 0.0
    mismatched = 0
    t0 = time.perf_counter()
    for _ in range(1000):
        e, gp = ensemble_and_pair(rng)
        h = helstrom_solve(e)
        s = sgm_solve(gp, e.q0)
        if h.nonzero_eigenvalues.size != s.nonzero_eigenvalues.size:
            mismatched += 1
            continue
        worst_eig = max(worst_eig, float(np.max(np.abs(h.nonzero_eigenvalues - s.nonzero_eigenvalues))))
        worst_pc = max(worst_pc, abs(h.pc - s.pc))
    elapsed = time.perf_counter() - t0
    ok = mismatched == 0 and worst_eig <= 1e-9 and worst_pc <= 1e-9 and elapsed < 30.0
    criterion(5, ok, f"1000 ensembles: eig err={worst_eig:.1e} pc err={worst_pc:.1e} count mismatches={mismatched} runtime={elapsed:.1f}s")
    assert ok


def test_criterion_6_remark(criterion):
    gp, q0 = remark_pair()
    e = ensemble_of(gp, q0)
    rs = matrix_rank(gp.skew_gram, 1e-9)
    rd = matrix_rank(decision_operator(e), 1e-9)
    s = sgm_solve(gp, q0)
    ok = rs == 3 and rd == 2 and len(s.spurious) == 1
    criterion(6, ok, f"rank(G_s)={rs} rank(D)={rd} spurious={list(s.spurious)}")
    assert ok


def test_criterion_7_closed_form_oracles(criterion):
    rng = np.random.default_rng(7)
    worst_cmp = worst_gus = 0.0
    for _ in range(200):
        h = int(rng.integers(1, 6))
        q0 = float(rng.uniform(0.05, 0.95))
        ov = rng.standard_normal(h) + 1j * rng.standard_normal(h)
        ov *= rng.uniform(0.0, 1.0) / np.linalg.norm(ov)
        e = comparison_ensemble(rng, q0, ov)
        spec = ComparisonSpec.from_overlaps(q0, ov)
        worst_cmp = max(worst_cmp, abs(comparison_pc(spec) - helstrom_solve(e).pc))
        e, gp = gus_instance(rng)
        worst_gus = max(worst_gus, abs(gus_pc(gp) - helstrom_solve(e).pc))
    ok = worst_cmp <= 1e-9 and worst_gus <= 1e-9
    criterion(7, ok, f"200+200 instances: comparison err={worst_cmp:.1e} gus err={worst_gus:.1e}")
    assert ok


def test_criterion_8_measurement_audit(nonsym, sym, criterion):
    rng = np.random.default_rng(8)
    cases = []
    for _ in range(300):
        e, gp = ensemble_and_pair(rng)
        cases += [(helstrom_solve(e), e), (sgm_solve(gp, e.q0), e)]
    for _ in range(50):
        e, _ = gus_instance(rng)
        cases.append((helstrom_solve(e), e))
    for run in (nonsym, sym):
        from skewgram.reports import _truncated_ensemble

        e = _truncated_ensemble(run.factors)
        cases += [(helstrom_solve(e), e), (sgm_solve(run.gram_pair, e.q0), e)]
    worst_pc = worst_psd = 0.0
    for res, e in cases:
        rep = verify_measurement(res, e)
        worst_pc = max(worst_pc, rep.pc_deviation)
        worst_psd = max(worst_psd, -min(rep.min_eig_pi0, rep.min_eig_pi1, 0.0))
    ok = worst_pc <= 1e-9 and worst_psd <= 1e-10
    criterion(8, ok, f"{len(cases)} solved instances: trace vs eigen pc err={worst_pc:.1e} worst negative eig={worst_psd:.1e}")
    assert ok


def test_criterion_9_paper_check(capsys, criterion):
    code = main(["paper-check"])
    rep = json.loads(capsys.readouterr().out)
    ids = {d["id"] for d in rep["documented"]}
    needed = {
        "quartic roots": {"nonsym.quartic_roots"},
        "sign": {"text.pure_sign"},
        "shorthand s": {"text.shorthand_s"},
        "symbolic D/E": {"text.symbolic_D", "text.symbolic_E"},
        "P_c triple": {"sym.pc.first", "sym.pc.closed_form"},
    }
    missing = [k for k, v in needed.items() if not v <= ids]
    ok = code == 0 and bool(ids) and not missing
    s = rep["summary"]
    criterion(9, ok, f"exit={code} pass={s['pass']} fail={s['fail']} documented={s['documented']} missing={missing}")
    assert ok
