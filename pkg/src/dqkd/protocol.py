"""Two-way d-ary protocol: Bob's preparation, Alice's control/message choice,
Bob's decoding, the public comparison, and two eavesdropping strategies.

Every run consumes one row of ``NSLOTS`` uniforms, one fixed slot per random
decision, whether or not that decision is reached.  The step functions below
and the batched kernel in `dqkd.kernel` read the same slots, so a row fed to
either produces the same transcript.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import IntEnum
from typing import Iterable, Optional

import numpy as np

from .galois import FieldSpec
from .mub import MubTable, QuditState, _omega_powers, build_mub
from .pauli import z_shift
from .qstate import (BOB, EVE, JointState, controlled_shift, measure_in_basis,
                     measure_subsystem, product_state)

NONE, INTERCEPT_RESEND, CONTROLLED_SHIFT = "none", "intercept_resend", "controlled_shift"
STRATEGIES = (NONE, INTERCEPT_RESEND, CONTROLLED_SHIFT)
STRATEGY_CODES = {NONE: 0, INTERCEPT_RESEND: 1, CONTROLLED_SHIFT: 2}

CONTROL, MESSAGE = "control", "message"


class Slot(IntEnum):
    BOB_BASIS = 0
    BOB_VECTOR = 1
    MODE = 2
    ALICE_BASIS = 3
    ALICE_MEASURE = 4
    SYMBOL = 5
    EVE_BASIS = 6
    EVE_FORWARD_MEASURE = 7
    EVE_BACKWARD_BASIS = 8
    EVE_BACKWARD_MEASURE = 9
    BOB_MEASURE = 10


NSLOTS = len(Slot)


class Col(IntEnum):
    MODE = 0            # 0 control, 1 message
    BOB_K = 1
    BOB_T = 2
    ALICE_BASIS = 3
    ALICE_OUTCOME = 4
    ENCODED_A = 5
    BOB_OUTCOME = 6
    DECODED_A = 7
    EVE_DECODED = 8
    COINCIDENT = 9
    DETECTED = 10


NCOLS = len(Col)
ABSENT = -1


def normalize_strategy(tag: str) -> str:
    s = tag.strip().lower().replace("-", "_")
    if s not in STRATEGIES:
        raise ValueError(f"unknown strategy {tag!r}; expected one of {', '.join(STRATEGIES)}")
    return s


@dataclass(frozen=True)
class ProtocolConfig:
    field: FieldSpec
    c: float = 0.5
    eve: str = NONE
    seed: int = 0
    message: Optional[tuple[int, ...]] = None
    ir_independent_bases: bool = False

    def __post_init__(self):
        if not 0 < self.c <= 1:
            raise ValueError(f"control probability c={self.c} must lie in (0, 1]")
        object.__setattr__(self, "eve", normalize_strategy(self.eve))
        if self.message is not None:
            msg = tuple(int(a) for a in self.message)
            if not msg or any(not 0 <= a < self.field.d for a in msg):
                raise ValueError(f"message symbols must lie in 0..{self.field.d - 1}")
            object.__setattr__(self, "message", msg)

    @property
    def d(self) -> int:
        return self.field.d


@dataclass
class RunRecord:
    mode: str
    bob_k: int
    bob_t: int
    bob_outcome: int
    alice_basis: Optional[int] = None
    alice_outcome: Optional[int] = None
    encoded_a: Optional[int] = None
    decoded_a: Optional[int] = None
    eve_decoded: Optional[int] = None
    coincident: bool = False
    detected: bool = False

    def to_row(self) -> np.ndarray:
        row = np.full(NCOLS, ABSENT, dtype=np.int64)
        row[Col.MODE] = 0 if self.mode == CONTROL else 1
        for col, val in ((Col.BOB_K, self.bob_k), (Col.BOB_T, self.bob_t),
                         (Col.ALICE_BASIS, self.alice_basis),
                         (Col.ALICE_OUTCOME, self.alice_outcome),
                         (Col.ENCODED_A, self.encoded_a), (Col.BOB_OUTCOME, self.bob_outcome),
                         (Col.DECODED_A, self.decoded_a), (Col.EVE_DECODED, self.eve_decoded)):
            if val is not None:
                row[col] = val
        row[Col.COINCIDENT] = int(self.coincident)
        row[Col.DETECTED] = int(self.detected)
        return row

    @classmethod
    def from_row(cls, row) -> "RunRecord":
        def opt(col):
            v = int(row[col])
            return None if v == ABSENT else v
        return cls(mode=CONTROL if row[Col.MODE] == 0 else MESSAGE,
                   bob_k=int(row[Col.BOB_K]), bob_t=int(row[Col.BOB_T]),
                   bob_outcome=int(row[Col.BOB_OUTCOME]),
                   alice_basis=opt(Col.ALICE_BASIS), alice_outcome=opt(Col.ALICE_OUTCOME),
                   encoded_a=opt(Col.ENCODED_A), decoded_a=opt(Col.DECODED_A),
                   eve_decoded=opt(Col.EVE_DECODED),
                   coincident=bool(row[Col.COINCIDENT]), detected=bool(row[Col.DETECTED]))

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def write_transcript(records: Iterable[RunRecord], path) -> None:
    """JSON-lines, one record per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_transcript(path) -> list[RunRecord]:
    with open(path, encoding="utf-8") as fh:
        return [RunRecord(**json.loads(line)) for line in fh if line.strip()]


def draw_index(u: float, n: int) -> int:
    return min(int(u * n), n - 1)


# -- the parties --------------------------------------------------------------

def bob_prepare(f: FieldSpec, tab: MubTable, rng) -> tuple[int, int, QuditState]:
    """Uniform k in 1..d and t in 0..d-1; the computational basis is never sent."""
    k = 1 + draw_index(rng.random(), f.d)
    t = draw_index(rng.random(), f.d)
    return k, t, tab.vectors[k, t].copy()


@dataclass
class AliceAction:
    mode: str
    basis: Optional[int] = None
    outcome: Optional[int] = None
    symbol: Optional[int] = None


def alice_act(state: np.ndarray, config: ProtocolConfig, tab: MubTable, rng,
              symbol: Optional[int] = None) -> tuple[AliceAction, np.ndarray]:
    """Control mode with probability c (measure in a random basis 1..d and
    resend), otherwise encode a symbol with the Z shift.

    `state` is either Bob's qudit alone or Bob's qudit joined with Eve's
    ancilla; Alice only touches Bob's part.  ``symbol=None`` draws uniformly.
    """
    d = config.d
    joint = len(state) == d * d
    if rng.random() < config.c:
        k = 1 + draw_index(rng.random(), d)
        if joint:
            res = measure_subsystem(state, BOB, tab, k, rng)
        else:
            res = measure_in_basis(state, tab, k, rng)
        return AliceAction(CONTROL, basis=k, outcome=res.outcome_t), res.post_state
    a = draw_index(rng.random(), d) if symbol is None else symbol
    z = z_shift(config.field, a)
    if joint:
        out = (z @ state.reshape(d, d)).reshape(-1)
    else:
        out = z @ state
    return AliceAction(MESSAGE, symbol=a), out


def bob_decode(f: FieldSpec, k: int, t: int, state: np.ndarray, tab: MubTable, rng) -> tuple[int, int]:
    """Measure in the preparation basis k; returns (b, t - b)."""
    if k < 1:
        raise ValueError("Bob never prepares in the computational basis")
    if len(state) == f.d * f.d:
        b = measure_subsystem(state, BOB, tab, k, rng).outcome_t
    else:
        b = measure_in_basis(state, tab, k, rng).outcome_t
    return b, int(f.sub_table[t, b])


@dataclass
class EveMemory:
    basis: Optional[int] = None
    forward_outcome: Optional[int] = None
    decoded: Optional[int] = None


def eve_channel(leg: str, config: ProtocolConfig, carrier: np.ndarray, memory: EveMemory,
                tab: MubTable, rng) -> tuple[np.ndarray, EveMemory]:
    """One leg of Eve's attack.

    intercept_resend: forward draws a basis, measures, resends the eigenstate;
    backward measures in the same basis (or a fresh one with
    ``ir_independent_bases``) and guesses forward_outcome - backward_outcome.

    controlled_shift: forward attaches a fresh ancilla |v1_0> and applies the
    inverse controlled shift; backward applies the direct shift and measures
    the ancilla in the dual basis, whose outcome is her guess.
    """
    strategy = config.eve
    f = config.field
    if strategy == NONE:
        return carrier, memory
    if leg not in ("forward", "backward"):
        raise ValueError(f"leg must be 'forward' or 'backward', got {leg!r}")
    if strategy == INTERCEPT_RESEND:
        if leg == "forward":
            memory.basis = 1 + draw_index(rng.random(), f.d)
            res = measure_in_basis(carrier, tab, memory.basis, rng)
            memory.forward_outcome = res.outcome_t
            return res.post_state, memory
        basis = memory.basis
        if config.ir_independent_bases:
            basis = 1 + draw_index(rng.random(), f.d)
        res = measure_in_basis(carrier, tab, basis, rng)
        memory.decoded = int(f.sub_table[memory.forward_outcome, res.outcome_t])
        return res.post_state, memory
    if strategy == CONTROLLED_SHIFT:
        if leg == "forward":
            joint = product_state(carrier, tab.vectors[1, 0])
            return controlled_shift(joint, tab, inverse=True), memory
        joint = controlled_shift(carrier, tab, inverse=False)
        res = measure_subsystem(joint, EVE, tab, 1, rng)
        memory.decoded = res.outcome_t
        return res.post_state, memory
    raise ValueError(f"unknown strategy {strategy!r}")


def reconcile(record: RunRecord) -> bool:
    """Detection on a control run: bases coincide and Alice's outcome differs
    from Bob's prepared label or from Bob's final outcome."""
    if record.mode != CONTROL:
        raise ValueError("only control-mode runs are compared publicly")
    record.coincident = record.alice_basis == record.bob_k
    record.detected = record.coincident and (
        record.alice_outcome != record.bob_t or record.bob_outcome != record.alice_outcome)
    return record.detected


# -- one run from a row of uniforms ------------------------------------------

class _Draws:
    """Generator stand-in returning preset uniforms in order."""

    def __init__(self, *values: float):
        self._values = list(values)

    def random(self) -> float:
        return self._values.pop(0)


def forced_row(config: ProtocolConfig, row: np.ndarray, *, k=None, t=None, mode=None,
               a=None, eve_basis=None) -> np.ndarray:
    """Overwrite slots of a uniform row so the run takes the given choices."""
    d = config.d
    row = np.array(row, dtype=float)
    mid = lambda i: (i + 0.5) / d  # noqa: E731
    if k is not None:
        row[Slot.BOB_BASIS] = mid(k - 1)
    if t is not None:
        row[Slot.BOB_VECTOR] = mid(t)
    if mode == CONTROL:
        row[Slot.MODE] = config.c / 2
    elif mode == MESSAGE:
        if config.c >= 1:
            raise ValueError("message mode is unreachable when c = 1")
        row[Slot.MODE] = (1 + config.c) / 2
    if a is not None:
        row[Slot.SYMBOL] = mid(a)
    if eve_basis is not None:
        row[Slot.EVE_BASIS] = mid(eve_basis - 1)
    return row


def run_from_row(config: ProtocolConfig, tab: MubTable, row: np.ndarray,
                 symbol: Optional[int] = None) -> RunRecord:
    f = config.field
    k, t, state = bob_prepare(f, tab, _Draws(row[Slot.BOB_BASIS], row[Slot.BOB_VECTOR]))

    memory = EveMemory()
    state, memory = eve_channel("forward", config, state, memory, tab,
                                _Draws(row[Slot.EVE_BASIS], row[Slot.EVE_FORWARD_MEASURE]))

    if row[Slot.MODE] < config.c:
        alice_rng = _Draws(row[Slot.MODE], row[Slot.ALICE_BASIS], row[Slot.ALICE_MEASURE])
    else:
        alice_rng = _Draws(row[Slot.MODE], row[Slot.SYMBOL])
    action, state = alice_act(state, config, tab, alice_rng, symbol=symbol)

    if config.eve == INTERCEPT_RESEND and config.ir_independent_bases:
        back_rng = _Draws(row[Slot.EVE_BACKWARD_BASIS], row[Slot.EVE_BACKWARD_MEASURE])
    else:
        back_rng = _Draws(row[Slot.EVE_BACKWARD_MEASURE])
    state, memory = eve_channel("backward", config, state, memory, tab, back_rng)

    b, a_hat = bob_decode(f, k, t, state, tab, _Draws(row[Slot.BOB_MEASURE]))
    rec = RunRecord(mode=action.mode, bob_k=k, bob_t=t, bob_outcome=b,
                    eve_decoded=memory.decoded)
    if action.mode == MESSAGE:
        rec.encoded_a = action.symbol
        rec.decoded_a = a_hat
    else:
        rec.alice_basis = action.basis
        rec.alice_outcome = action.outcome
        reconcile(rec)
    return rec


def run_once(config: ProtocolConfig, tab: MubTable, rng, symbol: Optional[int] = None,
             **forced) -> RunRecord:
    """One full run drawing a fresh row of uniforms from `rng`.

    Keyword overrides (k, t, mode, a, eve_basis) pin individual choices.
    """
    row = rng.random(NSLOTS)
    if forced:
        row = forced_row(config, row, **forced)
    return run_from_row(config, tab, row, symbol)


@dataclass
class ProtocolContext:
    """Config plus the dense tables the batched kernel reads."""

    config: ProtocolConfig
    tab: MubTable = field(init=False)
    zphase: np.ndarray = field(init=False)

    def __post_init__(self):
        f = self.config.field
        self.tab = build_mub(f)
        # zphase[a, q] = omega^(q*a)
        self.zphase = np.ascontiguousarray(_omega_powers(f.p)[f.mul_table % f.p])

    @property
    def strategy_code(self) -> int:
        return STRATEGY_CODES[self.config.eve]
