"""Dense state-vector simulation of one carrier qudit and an optional ancilla.

Joint states are length d*d vectors indexed (t_B, t_E) row-major, Bob's
system first.  Every sampling routine takes an explicit generator and draws
exactly one uniform from it via ``rng.random()``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mub import MubTable, QuditState

JointState = np.ndarray

BOB, EVE = "B", "E"


@dataclass
class MeasurementOutcome:
    outcome_t: int
    post_state: np.ndarray
    probabilities: np.ndarray


def sample_index(probs: np.ndarray, u: float) -> int:
    """Smallest j with u < cumsum(probs)[j]; the last index absorbs rounding."""
    acc = 0.0
    for j in range(len(probs) - 1):
        acc += probs[j]
        if u < acc:
            return j
    return len(probs) - 1


def apply(op: np.ndarray, s: QuditState) -> QuditState:
    if op.shape != (len(s), len(s)):
        raise ValueError(f"operator of shape {op.shape} cannot act on dimension {len(s)}")
    return op @ s


def _dim(s: JointState) -> int:
    d = int(round(np.sqrt(len(s))))
    if d * d != len(s):
        raise ValueError(f"joint state length {len(s)} is not a square")
    return d


def product_state(b: QuditState, e: QuditState) -> JointState:
    return np.kron(b, e)


def apply_local(op: np.ndarray, which: str, s: JointState) -> JointState:
    d = _dim(s)
    if op.shape != (d, d):
        raise ValueError(f"operator of shape {op.shape} cannot act on dimension {d}")
    m = s.reshape(d, d)
    if which == BOB:
        return (op @ m).reshape(-1)
    if which == EVE:
        return (m @ op.T).reshape(-1)
    raise ValueError(f"subsystem must be {BOB!r} or {EVE!r}, got {which!r}")


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def basis_probabilities(s: QuditState, tab: MubTable, k: int) -> np.ndarray:
    amps = tab.vectors[k].conj() @ s
    return np.abs(amps) ** 2


def measure_in_basis(s: QuditState, tab: MubTable, k: int, rng) -> MeasurementOutcome:
    probs = basis_probabilities(s, tab, k)
    t = sample_index(probs, rng.random())
    return MeasurementOutcome(t, tab.vectors[k, t].copy(), probs)


def measure_subsystem(s: JointState, which: str, tab: MubTable, k: int, rng) -> MeasurementOutcome:
    d = _dim(s)
    m = s.reshape(d, d)
    basis = tab.vectors[k].conj()
    if which == BOB:
        partial = basis @ m          # [outcome, e]
    elif which == EVE:
        partial = (m @ basis.T).T    # [outcome, b]
    else:
        raise ValueError(f"subsystem must be {BOB!r} or {EVE!r}, got {which!r}")
    probs = np.sum(np.abs(partial) ** 2, axis=1)
    t = sample_index(probs, rng.random())
    rest = partial[t] / np.sqrt(probs[t])
    if which == BOB:
        post = np.kron(tab.vectors[k, t], rest)
    else:
        post = np.kron(rest, tab.vectors[k, t])
    return MeasurementOutcome(t, post, probs)


@lru_cache(maxsize=16)
def _controlled_shift_unitary(tab: MubTable, inverse: bool) -> np.ndarray:
    # |v1_a>|v1_b> -> |v1_a>|v1_(b -+ a)>, as a permutation in the dual-dual basis
    f = tab.field
    d = f.d
    shifted = f.add_table if inverse else f.sub_table
    perm = np.zeros((d * d, d * d))
    for a in range(d):
        for b in range(d):
            perm[a * d + shifted[b, a], a * d + b] = 1
    dual = tab.basis_matrix(1)
    change = np.kron(dual, dual)
    u = change @ perm @ change.conj().T
    u.setflags(write=False)
    return u


def controlled_shift_unitary(tab: MubTable, inverse: bool = False) -> np.ndarray:
    return _controlled_shift_unitary(tab, bool(inverse))


def controlled_shift(s: JointState, tab: MubTable, inverse: bool = False) -> JointState:
    """Shift the ancilla's dual-basis label by the carrier's dual-basis label.

    Direct: |v1_a>|v1_b> -> |v1_a>|v1_(b-a)>.  Inverse: -> |v1_a>|v1_(b+a)>.
    """
    if len(s) != tab.d ** 2:
        raise ValueError(f"joint state length {len(s)} does not match d={tab.d}")
    return controlled_shift_unitary(tab, inverse) @ s
