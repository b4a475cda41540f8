"""Session statistics, closed-form security figures, dimension scans and the
direct-communication (QDC) survival curve."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from statistics import NormalDist
from typing import Optional, Sequence

import numpy as np

from .galois import factor_prime_power, field_of_order
from .protocol import (CONTROLLED_SHIFT, INTERCEPT_RESEND, NONE, NSLOTS, Col,
                       ProtocolConfig, ProtocolContext)
from . import kernel

BLOCK = 8192
Z95 = NormalDist().inv_cdf(0.975)


def analytic_pe(d: int) -> float:
    """Per-control-run probability of exposing the controlled-shift attack."""
    factor_prime_power(d)
    return (d - 1) ** 2 / d ** 3


def analytic_ir_detect(d: int) -> float:
    """Per-control-run probability of exposing intercept-resend."""
    factor_prime_power(d)
    return (d * d - 1) * (d - 1) / d ** 4


def eve_info(d: int) -> float:
    """Bits Eve learns on each message run."""
    factor_prime_power(d)
    return math.log2(d)


def expected_detection(attack: str, d: int) -> float:
    if attack == CONTROLLED_SHIFT:
        return analytic_pe(d)
    if attack == INTERCEPT_RESEND:
        return analytic_ir_detect(d)
    return 0.0


def wilson_interval(successes: int, total: int, z: float = Z95) -> tuple[float, float]:
    if total == 0:
        return 0.0, 1.0
    phat = successes / total
    denom = 1 + z * z / total
    centre = (phat + z * z / (2 * total)) / denom
    half = z * math.sqrt(phat * (1 - phat) / total + z * z / (4 * total * total)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == total else min(1.0, centre + half)
    return lo, hi


def _block_uniforms(seed: int, index: int, size: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.default_rng(ss).random((size, NSLOTS))


def simulate_records(config: ProtocolConfig, n: int, workers: int = 1,
                     ctx: Optional[ProtocolContext] = None) -> np.ndarray:
    """Raw (n, NCOLS) run table.

    Runs are cut into fixed blocks, each with its own child seed, so the
    result does not depend on `workers`.
    """
    if n < 1:
        raise ValueError("need at least one run")
    ctx = ctx or ProtocolContext(config)
    starts = list(range(0, n, BLOCK))

    def one_block(i: int) -> np.ndarray:
        start = starts[i]
        size = min(BLOCK, n - start)
        uniforms = _block_uniforms(config.seed, i, size)
        symbols = None
        if config.message is not None:
            msg = np.asarray(config.message, dtype=np.int64)
            symbols = msg[np.arange(start, start + size) % len(msg)]
        return kernel.simulate_runs(ctx, uniforms, symbols)

    if workers > 1 and len(starts) > 1:
        # the compiled kernel releases the GIL
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one_block, range(len(starts))))
    else:
        parts = [one_block(i) for i in range(len(starts))]
    return np.concatenate(parts)


@dataclass
class SessionStats:
    d: int
    c: float
    attack: str
    seed: int
    n_runs: int
    n_control: int
    n_coincident: int
    n_detected: int
    n_message: int
    pe_hat: Optional[float]
    pe_ci_lo: float
    pe_ci_hi: float
    pe_coincident_hat: Optional[float]
    pe_coincident_ci_lo: float
    pe_coincident_ci_hi: float
    eve_message_accuracy: Optional[float]
    bob_message_accuracy: Optional[float]
    pe_analytic: float
    ir_analytic: float
    i_e: float
    expected_detection: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def sigma_distance(self) -> float:
        """|pe_hat - expected| in binomial standard deviations of the expectation."""
        p = self.expected_detection
        if not self.n_control:
            return math.nan
        sd = math.sqrt(p * (1 - p) / self.n_control)
        if sd == 0:
            return 0.0 if self.n_detected == 0 else math.inf
        return abs(self.pe_hat - p) / sd


def summarize(config: ProtocolConfig, rec: np.ndarray) -> SessionStats:
    d = config.d
    control = rec[:, Col.MODE] == 0
    message = ~control
    n_control = int(control.sum())
    n_coincident = int(rec[control, Col.COINCIDENT].sum())
    n_detected = int(rec[control, Col.DETECTED].sum())
    n_message = int(message.sum())
    lo, hi = wilson_interval(n_detected, n_control)
    clo, chi = wilson_interval(n_detected, n_coincident)
    eve_acc = bob_acc = None
    if n_message:
        enc = rec[message, Col.ENCODED_A]
        bob_acc = float(np.mean(rec[message, Col.DECODED_A] == enc))
        if config.eve != NONE:
            eve_acc = float(np.mean(rec[message, Col.EVE_DECODED] == enc))
    return SessionStats(
        d=d, c=config.c, attack=config.eve, seed=config.seed, n_runs=len(rec),
        n_control=n_control, n_coincident=n_coincident, n_detected=n_detected,
        n_message=n_message,
        pe_hat=n_detected / n_control if n_control else None,
        pe_ci_lo=lo, pe_ci_hi=hi,
        pe_coincident_hat=n_detected / n_coincident if n_coincident else None,
        pe_coincident_ci_lo=clo, pe_coincident_ci_hi=chi,
        eve_message_accuracy=eve_acc, bob_message_accuracy=bob_acc,
        pe_analytic=analytic_pe(d), ir_analytic=analytic_ir_detect(d), i_e=eve_info(d),
        expected_detection=expected_detection(config.eve, d),
    )


def run_session(config: ProtocolConfig, n: int, workers: int = 1) -> SessionStats:
    return summarize(config, simulate_records(config, n, workers))


@dataclass
class ScanRow:
    d: int
    pe_analytic: float
    pe_hat: Optional[float]
    ci_lo: Optional[float]
    ci_hi: Optional[float]
    n_control: int


SCAN_HEADER = ("d", "pe_analytic", "pe_hat", "ci_lo", "ci_hi", "n_control")


def scan_dimensions(dims: Sequence[int], n: int = 0, c: float = 0.5, seed: int = 0,
                    workers: int = 1, max_d: int = 32) -> list[ScanRow]:
    """Analytic P_E per dimension, plus a controlled-shift estimate when n > 0."""
    for d in dims:
        factor_prime_power(d)
        if d > max_d:
            raise ValueError(f"dimension {d} exceeds the scan limit {max_d}")
    rows = []
    for d in dims:
        if n > 0:
            cfg = ProtocolConfig(field_of_order(d), c=c, eve=CONTROLLED_SHIFT, seed=seed)
            st = run_session(cfg, n, workers)
            rows.append(ScanRow(d, analytic_pe(d), st.pe_hat, st.pe_ci_lo, st.pe_ci_hi,
                                st.n_control))
        else:
            rows.append(ScanRow(d, analytic_pe(d), None, None, None, 0))
    return rows


def scan_to_csv(rows: Sequence[ScanRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_HEADER)
    for r in rows:
        w.writerow(["" if v is None else v for v in (r.d, r.pe_analytic, r.pe_hat,
                                                      r.ci_lo, r.ci_hi, r.n_control)])
    return buf.getvalue()


def scan_to_json(rows: Sequence[ScanRow]) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2) + "\n"


# -- direct communication ----------------------------------------------------

def qdc_undetected(c: float, pe: float) -> float:
    """Probability Eve reaches a message run without being caught on the
    control runs before it: (1-c) / (1 - c(1-pe))."""
    if not 0 < c <= 1:
        raise ValueError(f"c={c} must lie in (0, 1]")
    if not 0 <= pe <= 1:
        raise ValueError(f"pe={pe} must lie in [0, 1]")
    if c == 1 and pe == 0:
        raise ZeroDivisionError("degenerate: c = 1 and pe = 0")
    return (1 - c) / (1 - c * (1 - pe))


def qdc_success(c: float, pe: float, bits: float, eve_bits: float) -> float:
    """Probability Eve eavesdrops `bits` of message at `eve_bits` per run undetected."""
    if bits < 0:
        raise ValueError("bits must be non-negative")
    if eve_bits <= 0:
        raise ValueError("eve_bits must be positive")
    return qdc_undetected(c, pe) ** (bits / eve_bits)


@dataclass
class QdcPoint:
    bits: float
    success: float
    detect: float


def qdc_curve(c: float, d: int, bits: Sequence[float]) -> list[QdcPoint]:
    pe, ie = analytic_pe(d), eve_info(d)
    out = []
    for b in bits:
        s = qdc_success(c, pe, b, ie)
        out.append(QdcPoint(bits=b, success=s, detect=1 - s))
    return out
