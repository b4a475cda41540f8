"""The d+1 mutually unbiased bases of a prime-power dimension.

Basis 0 is the computational basis.  For k >= 1 the vector t of basis k has
amplitude

    omega^(-q*t) * sqrt(omega^((k-1)*q*q)) / sqrt(d)

on computational state q, with all arithmetic in the exponent done in GF(d)
and omega = exp(2 pi i / p).  For odd p the square root is a division by two
in the field.  For p = 2 the square root is a fourth root of unity whose sign
is fixed digit by digit (see `sqrt_phase`).
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .galois import FieldSpec, is_prime

QuditState = np.ndarray


def root_of_unity(p: int) -> complex:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p == 2:
        return -1 + 0j
    return cmath.exp(2j * math.pi / p)


@lru_cache(maxsize=None)
def _omega_powers(p: int) -> np.ndarray:
    w = np.exp(2j * np.pi * np.arange(p) / p)
    if p == 2:
        w = np.array([1, -1], dtype=complex)
    w.setflags(write=False)
    return w


def omega_pow(f: FieldSpec, g: int) -> complex:
    """omega raised to a field element; only the low digit g mod p matters."""
    if not 0 <= g < f.d:
        raise ValueError(f"element {g} out of range for GF({f.d})")
    return complex(_omega_powers(f.p)[g % f.p])


_I_POWERS = (1, 1j, -1, -1j)


def i_pow(g: int) -> complex:
    """i raised to the integer label of a field element (reduced mod 4)."""
    return _I_POWERS[g % 4]


def sqrt_phase(f: FieldSpec, k: int, q: int, corrected: bool = True) -> complex:
    """The square root of omega^((k-1)*q*q) used in basis k.

    p odd: omega^(((k-1)*q*q) / 2) with the division done in the field.

    p = 2: product over the nonzero digits q_n of
        i^((k-1)*2^n*2^n) * (-1)^(low digit of (k-1)*2^n*(q mod 2^n))
    where 2^n is the field element x^n.  With ``corrected=False`` the (-1)
    factors are dropped, leaving the bare i-power product; this older choice
    of sign is kept only as a negative control.
    """
    if not 1 <= k <= f.d:
        raise ValueError(f"basis index {k} has no phase (need 1 <= k <= {f.d})")
    if not 0 <= q < f.d:
        raise ValueError(f"element {q} out of range for GF({f.d})")
    mul = f.mul_table
    km1 = k - 1
    if f.p != 2:
        e = mul[mul[km1, q], q]
        half = f.inv_table[2 % f.p]
        return omega_pow(f, int(mul[e, half]))
    out = 1 + 0j
    for n in range(f.m):
        if not (q >> n) & 1:
            continue
        xn = 1 << n
        out *= i_pow(int(mul[mul[km1, xn], xn]))
        if corrected:
            low = q & (xn - 1)
            if mul[mul[km1, xn], low] & 1:
                out = -out
    return out


def sqrt_phase_rewritten(f: FieldSpec, k: int, q: int) -> complex:
    """Second closed form of the p = 2 phase (pairwise (-1) factors), used as a cross-check.

    prod_n (-1)^(sum_{h<n} q_n q_h ((k-1)*2^n*2^h)_0) * i^(q_n ((k-1)*2^n*2^n))
    """
    if f.p != 2:
        raise ValueError("even-characteristic only")
    mul = f.mul_table
    km1 = k - 1
    sign = 0
    out = 1 + 0j
    for n in range(f.m):
        if not (q >> n) & 1:
            continue
        xn = 1 << n
        for h in range(n):
            if (q >> h) & 1:
                sign += int(mul[mul[km1, xn], 1 << h]) & 1
        out *= i_pow(int(mul[mul[km1, xn], xn]))
    return -out if sign & 1 else out


def mub_vector(f: FieldSpec, k: int, t: int, corrected: bool = True) -> QuditState:
    d = f.d
    if not 0 <= k <= d:
        raise ValueError(f"basis index {k} out of range 0..{d}")
    if not 0 <= t < d:
        raise ValueError(f"vector index {t} out of range 0..{d - 1}")
    v = np.zeros(d, dtype=complex)
    if k == 0:
        v[t] = 1
        return v
    w = _omega_powers(f.p)
    neg_qt = f.neg_table[f.mul_table[:, t]]
    for q in range(d):
        v[q] = w[neg_qt[q] % f.p] * sqrt_phase(f, k, q, corrected)
    return v / math.sqrt(d)


@dataclass(frozen=True, eq=False)
class MubTable:
    """All d+1 bases; ``vectors[k, t]`` is vector t of basis k."""

    field: FieldSpec
    vectors: np.ndarray

    @property
    def d(self) -> int:
        return self.field.d

    def vector(self, k: int, t: int) -> QuditState:
        return self.vectors[k, t]

    def basis_matrix(self, k: int) -> np.ndarray:
        """Columns are the vectors of basis k."""
        return self.vectors[k].T

    def to_json(self) -> str:
        bases = [[[[float(z.real), float(z.imag)] for z in vec] for vec in basis]
                 for basis in self.vectors]
        return json.dumps({"p": self.field.p, "m": self.field.m, "d": self.d,
                           "reduction_poly": list(self.field.reduction_poly),
                           "bases": bases})


def build_mub(f: FieldSpec, corrected: bool = True) -> MubTable:
    d = f.d
    vecs = np.empty((d + 1, d, d), dtype=complex)
    for k in range(d + 1):
        for t in range(d):
            vecs[k, t] = mub_vector(f, k, t, corrected)
    vecs.setflags(write=False)
    return MubTable(field=f, vectors=vecs)


@dataclass
class MubReport:
    max_deviation: float
    worst_pair: tuple[int, int, int, int]
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def verify_mub(tab: MubTable, tol: float = 1e-9) -> MubReport:
    """Largest departure of |<v^k_t|v^k'_t'>| from its unbiasedness target over all pairs."""
    d = tab.d
    flat = tab.vectors.reshape((d + 1) * d, d)
    gram = np.abs(flat.conj() @ flat.T)
    kk = np.repeat(np.arange(d + 1), d)
    tt = np.tile(np.arange(d), d + 1)
    same_k = kk[:, None] == kk[None, :]
    same_t = tt[:, None] == tt[None, :]
    target = np.where(same_k, np.where(same_t, 1.0, 0.0), 1 / math.sqrt(d))
    dev = np.abs(gram - target)
    i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
    return MubReport(max_deviation=float(dev[i, j]),
                     worst_pair=(int(kk[i]), int(tt[i]), int(kk[j]), int(tt[j])),
                     tol=tol)
