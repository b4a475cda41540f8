"""Arithmetic in GF(p^m) with elements labelled by the integers 0..d-1.

An element with coefficient digits (g_0, ..., g_{m-1}) over GF(p) is stored as
the integer sum(g_n * p**n).  Digit n is the coefficient of x**n in the
polynomial representation, so the label 2**n (for p = 2) is the monomial x**n.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

MAX_ORDER = 256


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def factor_prime_power(d: int) -> tuple[int, int]:
    """Return (p, m) with d == p**m, or raise ValueError."""
    if d < 2:
        raise ValueError(f"{d} is not a prime power")
    p = next(f for f in range(2, d + 1) if d % f == 0)
    m, rest = 0, d
    while rest % p == 0:
        rest //= p
        m += 1
    if rest != 1:
        raise ValueError(f"{d} is not a prime power")
    return p, m


# -- polynomials over GF(p), coefficient lists low degree first --------------

def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], b: list[int], p: int) -> list[int]:
    a = _poly_trim([x % p for x in a])
    b = _poly_trim([x % p for x in b])
    inv_lead = pow(b[-1], -1, p)
    while len(a) >= len(b):
        shift = len(a) - len(b)
        coef = a[-1] * inv_lead % p
        for i, bc in enumerate(b):
            a[i + shift] = (a[i + shift] - coef * bc) % p
        _poly_trim(a)
    return a


def is_irreducible(poly: list[int], p: int) -> bool:
    """Exhaustive check: no monic polynomial of degree 1..deg/2 divides `poly`."""
    deg = len(poly) - 1
    if deg < 1:
        return False
    for fdeg in range(1, deg // 2 + 1):
        for low in itertools.product(range(p), repeat=fdeg):
            if not _poly_mod(list(poly), list(low) + [1], p):
                return False
    return True


def smallest_irreducible(p: int, m: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree m.

    Candidates are ordered by their coefficient tuple (c_0, c_1, ..., c_{m-1}).
    """
    for low in itertools.product(range(p), repeat=m):
        poly = list(low) + [1]
        if is_irreducible(poly, p):
            return tuple(poly)
    raise AssertionError(f"no irreducible polynomial of degree {m} over GF({p})")


@dataclass(frozen=True)
class FieldSpec:
    p: int
    m: int
    d: int
    reduction_poly: tuple[int, ...] = ()

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.m < 1:
            raise ValueError(f"bad degree {self.m}")
        if self.d != self.p ** self.m:
            raise ValueError(f"d={self.d} does not equal {self.p}**{self.m}")
        if self.m == 1:
            if self.reduction_poly:
                raise ValueError("prime fields take no reduction polynomial")
        elif (len(self.reduction_poly) != self.m + 1
              or self.reduction_poly[-1] != 1
              or not is_irreducible(list(self.reduction_poly), self.p)):
            raise ValueError(f"{self.reduction_poly} is not a monic irreducible of degree {self.m}")

    def digits(self, g: int) -> tuple[int, ...]:
        _check(self, g)
        out = []
        for _ in range(self.m):
            g, r = divmod(g, self.p)
            out.append(r)
        return tuple(out)

    def pack(self, digits) -> int:
        g = 0
        for n, c in enumerate(digits):
            if not 0 <= c < self.p:
                raise ValueError(f"digit {c} out of range for p={self.p}")
            g += c * self.p ** n
        return g

    def elements(self) -> range:
        return range(self.d)

    @cached_property
    def add_table(self) -> np.ndarray:
        d = self.d
        tab = np.empty((d, d), dtype=np.int64)
        for a in range(d):
            for b in range(d):
                tab[a, b] = _poly_add(self, a, b)
        tab.setflags(write=False)
        return tab

    @cached_property
    def mul_table(self) -> np.ndarray:
        d = self.d
        tab = np.empty((d, d), dtype=np.int64)
        for a in range(d):
            for b in range(a, d):
                tab[a, b] = tab[b, a] = _poly_mul(self, a, b)
        tab.setflags(write=False)
        return tab

    @cached_property
    def neg_table(self) -> np.ndarray:
        tab = np.array([self.pack([(-c) % self.p for c in self.digits(a)])
                        for a in range(self.d)], dtype=np.int64)
        tab.setflags(write=False)
        return tab

    @cached_property
    def sub_table(self) -> np.ndarray:
        tab = self.add_table[:, self.neg_table]
        tab.setflags(write=False)
        return tab

    @cached_property
    def inv_table(self) -> np.ndarray:
        inv = np.zeros(self.d, dtype=np.int64)
        rows, cols = np.nonzero(self.mul_table == 1)
        inv[rows] = cols
        inv.setflags(write=False)
        return inv

    def __repr__(self):
        return f"FieldSpec(p={self.p}, m={self.m}, d={self.d}, reduction_poly={self.reduction_poly})"


def make_field(p: int, m: int = 1) -> FieldSpec:
    if not isinstance(p, int) or not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"bad degree {m}")
    if p ** m > MAX_ORDER:
        raise ValueError(f"field order {p}**{m} exceeds supported maximum {MAX_ORDER}")
    poly = smallest_irreducible(p, m) if m > 1 else ()
    return FieldSpec(p=p, m=m, d=p ** m, reduction_poly=poly)


def field_of_order(d: int) -> FieldSpec:
    p, m = factor_prime_power(d)
    return make_field(p, m)


def _check(f: FieldSpec, *xs: int) -> None:
    for x in xs:
        if not 0 <= x < f.d:
            raise ValueError(f"element {x} out of range for GF({f.d})")


# -- reference (polynomial) path; the tables above are built from these ------

def _poly_add(f: FieldSpec, a: int, b: int) -> int:
    return f.pack([(x + y) % f.p for x, y in zip(f.digits(a), f.digits(b))])


def _poly_mul(f: FieldSpec, a: int, b: int) -> int:
    if f.m == 1:
        return a * b % f.p
    da, db = f.digits(a), f.digits(b)
    prod = [0] * (2 * f.m - 1)
    for i, x in enumerate(da):
        if x:
            for j, y in enumerate(db):
                prod[i + j] += x * y
    rem = _poly_mod(prod, list(f.reduction_poly), f.p)
    return f.pack(rem + [0] * (f.m - len(rem)))


# -- public element operations -----------------------------------------------

def gf_add(f: FieldSpec, a: int, b: int) -> int:
    _check(f, a, b)
    return int(f.add_table[a, b])


def gf_neg(f: FieldSpec, a: int) -> int:
    _check(f, a)
    return int(f.neg_table[a])


def gf_sub(f: FieldSpec, a: int, b: int) -> int:
    _check(f, a, b)
    return int(f.sub_table[a, b])


def gf_mul(f: FieldSpec, a: int, b: int) -> int:
    _check(f, a, b)
    return int(f.mul_table[a, b])


def gf_inv(f: FieldSpec, a: int) -> int:
    _check(f, a)
    if a == 0:
        raise ZeroDivisionError("zero divisor")
    return int(f.inv_table[a])


def gf_div(f: FieldSpec, a: int, b: int) -> int:
    return gf_mul(f, a, gf_inv(f, b))


def gf_pow(f: FieldSpec, a: int, e: int) -> int:
    _check(f, a)
    out = 1
    for _ in range(e):
        out = int(f.mul_table[out, a])
    return out
