"""Acceptance suite: one PASS/FAIL line per criterion, printed at the end of the run.

Criteria that cannot be met as stated are still evaluated and reported as
FAIL; the corresponding assertion is a strict xfail so the run stays green.
"""
import subprocess
import sys
from functools import lru_cache

import pytest

from psido.suites import Context, PROBES

SEED = 7


@lru_cache(maxsize=None)
def result(name):
    return PROBES[name](Context(seed=SEED))


def record(log, number, title, ok, detail):
    log[number] = f"[{number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}"


def test_01_group_axioms(acceptance_log):
    r = result("group")
    m = r.measured
    record(acceptance_log, 1, "group axioms, 1000 triples", r.passed,
           f"max assoc {m['associativity']:.1e}, homomorphism {m['map_t_homomorphism']:.1e} (tol 1e-12)")
    assert r.passed


def test_02_intertwining(acceptance_log):
    r = result("intertwining")
    worst = max(r.measured["sup_error"].values())
    record(acceptance_log, 2, "intertwining D t_* f = t_* f'", r.passed,
           f"{len(r.measured['sup_error'])} functions, sup error {worst:.1e} (tol 1e-6)")
    assert r.passed and len(r.measured["sup_error"]) == 10


def test_03_transform(acceptance_log):
    r = result("transform")
    m = r.measured
    record(acceptance_log, 3, "transform", r.passed,
           f"round trip {max(m['roundtrip']):.1e}; Plancherel {m['plancherel']} on 3 grids; "
           f"half variant {[round(h, 4) for h in m['plancherel_half']]} (2^n, not pi^n)")
    assert r.passed


def test_04_quantization(acceptance_log):
    r = result("dual_path")
    worst = max(r.measured["relative_error"].values())
    record(acceptance_log, 4, "quantization dual path", r.passed,
           f"{len(r.measured['relative_error'])} symbols x 20 inputs, max rel {worst:.1e} (tol 1e-7); "
           f"skipped {sorted(r.measured['skipped'])} (singular at a grid node)")
    assert r.passed


def test_05_calculus(acceptance_log):
    r = result("calculus")
    worst = max(r.measured["exact_defect"].values())
    slopes = [f"{f['slope']:.2f}<={f['bound']:.2f}" for f in r.measured["residual_fits"].values()]
    record(acceptance_log, 5, "calculus exactness and residual order", r.passed,
           f"exact defect {worst:.1e} (tol 1e-7); slopes {slopes}")
    assert r.passed


def test_06_parametrix(acceptance_log):
    r = result("parametrix")
    m = r.measured
    record(acceptance_log, 6, "parametrix", r.passed,
           f"||AB f - f|| at xi0=16: {[f'{v:.1e}' for v in m['right']]}; BA/AB within 10x: {m['tracking']}")
    assert r.passed


def test_07_calderon_vaillancourt(acceptance_log):
    r = result("cv")
    m = r.measured
    var = {k: round(v["variation"], 4) for k, v in m["symbols"].items() if not k.startswith("control")}
    ok = r.passed and m["control_growth_target_met"]
    record(acceptance_log, 7, "Calderon-Vaillancourt", ok,
           f"variation {var} (tol 0.10); order-1/4 control grows {m['control_growth']:.3f}, "
           f"below the 0.50 target, which exceeds the 4^(1/4)-1 = 0.414 ceiling")
    # stability of the order-0 norms and detection of the growing control
    assert r.passed


@pytest.mark.xfail(strict=True, reason="order-1/4 growth over a 4x band is at most 4^(1/4) - 1 = 41%")
def test_07b_control_growth_at_least_half():
    assert result("cv").measured["control_growth"] >= 0.5


def test_08_gohberg(acceptance_log):
    r = result("compactness")
    m = r.measured
    record(acceptance_log, 8, "Gohberg compactness", r.passed,
           ", ".join(f"{k}: {v['verdict']}" for k, v in m.items())
           + f"; sigma floor for d=0.3 is {m['gohberg(0.3)']['lower_bound']:.3f} >= 0.27")
    assert r.passed


def test_09_index(acceptance_log):
    r = result("index")
    m = r.measured
    record(acceptance_log, 9, "index", r.passed,
           ", ".join(f"{k}: {v['index']:+d}" for k, v in m.items())
           + f"; max residual {max(v['residual'] for v in m.values()):.1e}; +2 case is the normalized "
             "square (the literal squared ratio winds 4)")
    assert r.passed


def test_10_multipliers(acceptance_log):
    r = result("multipliers")
    m = r.measured
    record(acceptance_log, 10, "multipliers", r.passed,
           f"S^2-I {m['hilbert_square']:.1e}; kernel vs fourier {m['hilbert_paths']:.1e} (tol 2e-3); "
           f"100 PC inverses {m['pc_inverse']:.1e}; zero limit Fredholm={m['zero_limit_fredholm']}")
    assert r.passed


def test_11_sobolev(acceptance_log):
    r = result("sobolev")
    m = r.measured
    brackets = {k: [round(min(v["min_ratio"]), 3), round(max(v["max_ratio"]), 3)]
                for k, v in m["equivalence"].items()}
    record(acceptance_log, 11, "Sobolev", r.passed,
           f"lifting {m['lifting']:.1e}; H0/L2-1 {m['h0']:.1e}; ratio ranges {brackets}")
    assert r.passed


def test_12_determinism(acceptance_log, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        proc = subprocess.run([sys.executable, "-m", "psido.cli", "run", "--suite", "all",
                               "--seed", str(SEED), "--out", str(out)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(out)
    files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*.json"))
    same = all((outs[0] / f).read_bytes() == (outs[1] / f).read_bytes() for f in files)
    record(acceptance_log, 12, "determinism", same and len(files) > 1,
           f"{len(files)} JSON files byte-identical across two seeded runs: {same}")
    assert same and len(files) > 1
