"""Acceptance gate.  Every check prints one PASS/FAIL line and the lines are
repeated in the terminal summary."""
import math

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from dqkd import ProtocolConfig, build_mub, field_of_order, verify_mub
from dqkd.cli import main
from dqkd.montecarlo import (analytic_ir_detect, analytic_pe, qdc_curve, qdc_undetected,
                             run_session, scan_dimensions, simulate_records)
from dqkd.pauli import verify_appendix
from dqkd.protocol import (CONTROLLED_SHIFT, INTERCEPT_RESEND, MESSAGE, NONE, STRATEGIES, Col,
                           ProtocolContext, run_once)


def report(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def sigma(hat, p, n):
    return abs(hat - p) / math.sqrt(p * (1 - p) / n)


def test_1_mub_correctness():
    dims = (2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27, 32)
    devs = {d: verify_mub(build_mub(field_of_order(d))).max_deviation for d in dims}
    worst = max(devs, key=devs.get)
    report("1 MUB correctness", all(v <= 1e-9 for v in devs.values()),
           f"worst deviation {devs[worst]:.2e} at d={worst} over {len(dims)} dimensions")


def test_2_operator_identities():
    failed = {}
    for d in (2, 3, 4, 5, 8, 9, 16):
        rep = verify_appendix(field_of_order(d), 1e-9)
        if not rep.all_passed:
            failed[d] = rep.failures()
    negative = {d: verify_appendix(field_of_order(d), 1e-9, corrected=False).failures()
                for d in (4, 8, 16)}
    caught = [d for d, f in negative.items() if f]
    report("2 operator identities", not failed and bool(caught),
           f"corrected sign failures {failed or 'none'}; wrong sign fails at d={caught}")


def _sweep(d, eve):
    """Message runs for every (k, t, a); intercept-resend also sweeps Eve's basis."""
    cfg = ProtocolConfig(field_of_order(d), eve=eve)
    ctx = ProtocolContext(cfg)
    rng = np.random.default_rng(d)
    eve_bases = range(1, d + 1) if eve == INTERCEPT_RESEND else [None]
    bob_ok = eve_ok = total = 0
    for k in range(1, d + 1):
        for t in range(d):
            for a in range(d):
                for kb in eve_bases:
                    rec = run_once(cfg, ctx.tab, rng, k=k, t=t, mode=MESSAGE, a=a, eve_basis=kb)
                    total += 1
                    bob_ok += rec.decoded_a == a
                    eve_ok += eve == NONE or rec.eve_decoded == a
    return bob_ok, eve_ok, total


@pytest.mark.parametrize("eve", STRATEGIES)
def test_3_determinism(eve):
    bob = eve_ = total = 0
    for d in (2, 3, 4, 8):
        b, e, n = _sweep(d, eve)
        bob, eve_, total = bob + b, eve_ + e, total + n
    report(f"3 determinism [{eve}]", bob == total and eve_ == total,
           f"Bob decoded {bob}/{total}, Eve decoded {eve_}/{total}")


@pytest.mark.parametrize("d", (3, 2, 4, 5))
def test_4_pe_reproduction(d):
    s = run_session(ProtocolConfig(field_of_order(d), c=0.5, eve=CONTROLLED_SHIFT, seed=2024), 204_800)
    z = sigma(s.pe_hat, analytic_pe(d), s.n_control)
    report(f"4 P_E d={d}", s.n_control >= 100_000 and z <= 4,
           f"{s.pe_hat:.5f} vs {analytic_pe(d):.6f} ({z:.2f} sigma, {s.n_control} control runs)")


def test_5_fig2_shape():
    rows = scan_dimensions([2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32])
    pe = {r.d: r.pe_analytic for r in rows}
    best = max(pe, key=pe.get)
    report("5 P_E versus d", best == 3 and all(pe[d] > pe[2] for d in (3, 4, 5)),
           f"argmax d={best}; P_E(2..5) = " + ", ".join(f"{pe[d]:.5f}" for d in (2, 3, 4, 5)))


def test_6_intercept_resend():
    s = run_session(ProtocolConfig(field_of_order(2), c=0.5, eve=INTERCEPT_RESEND, seed=2024), 204_800)
    z = sigma(s.pe_hat, analytic_ir_detect(2), s.n_control)
    report("6 intercept-resend d=2", s.n_control >= 100_000 and z <= 4,
           f"{s.pe_hat:.5f} vs 0.1875 ({z:.2f} sigma)")


@pytest.mark.parametrize("d", (3, 4, 5))
def test_7_control_case_structure(d):
    rec = simulate_records(ProtocolConfig(field_of_order(d), eve=CONTROLLED_SHIFT, seed=77), 400_000)
    coincident = (rec[:, Col.MODE] == 0) & (rec[:, Col.COINCIDENT] == 1)
    k1 = coincident & (rec[:, Col.BOB_K] == 1)
    k2 = coincident & (rec[:, Col.BOB_K] >= 2)
    k1_detections = int(rec[k1, Col.DETECTED].sum())
    mismatch = float(np.mean(rec[k2, Col.ALICE_OUTCOME] != rec[k2, Col.BOB_T]))
    z = sigma(mismatch, (d - 1) / d, int(k2.sum()))
    report(f"7 control cases d={d}", k1_detections == 0 and z <= 4,
           f"k=1 detections {k1_detections}/{int(k1.sum())}; k>=2 mismatch {mismatch:.4f} "
           f"vs {(d - 1) / d:.4f} ({z:.2f} sigma)")


def test_8_qdc_curve():
    worst = 0.0
    for d in (2, 3, 5):
        pe = analytic_pe(d)
        for c in [i / 10 for i in range(1, 10)]:
            series = sum((1 - c) * (c * (1 - pe)) ** n for n in range(200))
            worst = max(worst, abs(qdc_undetected(c, pe) - series))
    bits, c = 128, 0.5
    detect = {d: qdc_curve(c, d, [bits])[0].detect for d in (2, 3, 4, 5)}
    best = max(detect, key=detect.get)
    report("8 QDC curve", worst <= 1e-12 and best == 2,
           f"series gap {worst:.1e}; 1 - success at I={bits} maximal at d={best}")


@pytest.mark.parametrize("argv", [
    ["simulate", "--d", "3", "--runs", "50000", "--attack", "controlled-shift", "--seed", "42"],
    ["simulate", "--d", "2", "--runs", "50000", "--attack", "intercept-resend", "--seed", "7",
     "--workers", "4"],
    ["scan", "--dims", "2,3,4,5,7,8,9", "--runs", "10000", "--seed", "1"],
    ["scan", "--dims", "2,3,4", "--runs", "10000", "--seed", "1", "--format", "json"],
])
def test_9_reproducibility(tmp_path, argv):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}"
        assert main(argv + ["--out", str(path)]) == 0
        outs.append(path.read_bytes())
    report(f"9 reproducibility [{' '.join(argv[:3])}]", outs[0] == outs[1],
           f"{len(outs[0])} bytes, identical={outs[0] == outs[1]}")
