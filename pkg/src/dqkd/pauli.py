"""Generalized Pauli operators, the commuting subgroups U^k_l, and an
exhaustive numerical check of the algebraic identities behind the MUB
construction.

The identity suite is a second route to the bases: it checks the operator
algebra independently of how `mub.build_mub` evaluates the vectors, and
the two must agree.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .galois import FieldSpec
from .mub import build_mub, i_pow, omega_pow, sqrt_phase

Operator = np.ndarray


def _check(f: FieldSpec, *xs: int) -> None:
    for x in xs:
        if not 0 <= x < f.d:
            raise ValueError(f"element {x} out of range for GF({f.d})")


def pauli_v(f: FieldSpec, j: int, l: int) -> Operator:
    """V^j_l = sum_t omega^((t+l)*j) |t+l><t|."""
    _check(f, j, l)
    d = f.d
    out = np.zeros((d, d), dtype=complex)
    rows = f.add_table[:, l]
    for t in range(d):
        out[rows[t], t] = omega_pow(f, int(f.mul_table[rows[t], j]))
    return out


def z_shift(f: FieldSpec, a: int) -> Operator:
    """diag(omega^(t*a)): Alice's encoding of symbol a."""
    _check(f, a)
    return np.diag([omega_pow(f, int(f.mul_table[t, a])) for t in range(f.d)])


def phi(f: FieldSpec, k: int, kp: int, l: int) -> int:
    """Sign function of the p = 2 phase algebra; returns +1 or -1."""
    if f.p != 2:
        raise ValueError("even-characteristic only")
    _check(f, l)
    if not (1 <= k <= f.d and 1 <= kp <= f.d):
        raise ValueError(f"basis indices must lie in 1..{f.d}")
    mul = f.mul_table
    total = 0
    for n in range(f.m):
        if (l >> n) & 1:
            xn = 1 << n
            total += int(mul[mul[k - 1, xn], xn]) * int(mul[mul[kp - 1, xn], xn])
    return -1 if total & 1 else 1


def u_operator(f: FieldSpec, k: int, l: int, corrected: bool = True) -> Operator:
    """Element l of the k-th commuting subgroup.

    For k >= 1 this is the phase-corrected V^((k-1)*l)_l, with the phase the
    square root of omega^(-(k-1)*l*l); that root is the complex conjugate of
    `sqrt_phase(k, l)`.  For k = 0 the subgroup is taken to be the diagonal
    shifts V^l_0.
    """
    _check(f, l)
    if not 0 <= k <= f.d:
        raise ValueError(f"basis index {k} out of range 0..{f.d}")
    if k == 0:
        return pauli_v(f, l, 0)
    phase = np.conj(sqrt_phase(f, k, l, corrected))
    return phase * pauli_v(f, int(f.mul_table[k - 1, l]), l)


def is_unitary(op: Operator, tol: float = 1e-9) -> bool:
    return bool(np.max(np.abs(op @ op.conj().T - np.eye(op.shape[0]))) <= tol)


@dataclass
class IdentityCheck:
    name: str
    max_deviation: float = 0.0
    cases: int = 0
    skipped: str | None = None

    def update(self, dev: float, n: int = 1) -> None:
        self.max_deviation = max(self.max_deviation, float(dev))
        self.cases += n


@dataclass
class AppendixReport:
    d: int
    tol: float
    corrected: bool
    checks: dict[str, IdentityCheck] = field(default_factory=dict)

    def passed(self, name: str) -> bool:
        c = self.checks[name]
        return c.skipped is not None or c.max_deviation <= self.tol

    @property
    def all_passed(self) -> bool:
        return all(self.passed(n) for n in self.checks)

    def failures(self) -> list[str]:
        return [n for n in self.checks if not self.passed(n)]

    def to_dict(self) -> dict:
        out = {}
        for name, c in self.checks.items():
            if c.skipped is not None:
                out[name] = {"status": f"skipped ({c.skipped})"}
            else:
                out[name] = {"max_deviation": c.max_deviation, "cases": c.cases,
                             "status": "pass" if self.passed(name) else "FAIL"}
        return {"d": self.d, "tol": self.tol, "corrected_sign": self.corrected,
                "passed": self.all_passed, "identities": out}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


IDENTITIES = (
    "unitarity",
    "composition_law",      # V^j_l V^j'_l' = omega^(-l*j') V^(j+j')_(l+l')
    "omega_additivity",     # omega^j omega^l = omega^(j+l)
    "character_sum",        # sum_j omega^(j*l) = d delta_(l,0)
    "sqrt_squares",         # sqrt_phase(k,q)^2 = omega^((k-1)*q*q)
    "subgroup_product",     # U^k_l U^k_l' = U^k_(l+l')
    "subgroup_diagonal",    # U^k_l = sum_t omega^(t*l) |v^k_t><v^k_t|
    "subgroup_phase",       # U^k_l ~ V^((k-1)*l)_l, phase 1 at l = 0
    "i_power_law",          # i^j i^l = (-1)^(j_0 l_0) i^(j+l)
    "sqrt_product_phi",     # sqrt_k(l) sqrt_k'(l) = phi(k,k',l) sqrt_(k+k'-1)(l)
    "phi_properties",       # phi(k,k',0)=1, symmetry, additivity, phi(k,k,q)=omega^((k-1)qq)
    "sqrt_product_shift",   # sqrt(q) sqrt(q') = omega^(-(k-1)qq') sqrt(q+q')
    "inner_product",        # phi-expansion of <v^k'_t'|v^k_t> and the MUB moduli
)


def verify_appendix(f: FieldSpec, tol: float = 1e-9, corrected: bool = True) -> AppendixReport:
    """Check every identity exhaustively over all index combinations of GF(d).

    Phases of the form omega^(x*y) in the composition law and the square-root
    product carry a field negation, omega^(-x*y), which is invisible when
    p = 2 and required for odd p.

    ``corrected=False`` swaps in the uncorrected p = 2 sign everywhere (both
    the bases and the subgroup phases) so the suite can demonstrate failure.
    """
    d, p = f.d, f.p
    add, mul, neg = f.add_table, f.mul_table, f.neg_table
    w = np.array([omega_pow(f, g) for g in range(d)])
    checks = {name: IdentityCheck(name) for name in IDENTITIES}
    tab = build_mub(f, corrected)

    def sq(k: int, q: int) -> complex:
        return sqrt_phase(f, k, q, corrected)

    sqt = np.array([[sq(k, q) for q in range(d)] for k in range(1, d + 1)])  # [k-1, q]

    # Pauli group
    V = np.array([[pauli_v(f, j, l) for l in range(d)] for j in range(d)])  # [j, l]
    eye = np.eye(d)
    flatV = V.reshape(d * d, d, d)
    checks["unitarity"].update(
        np.max(np.abs(flatV @ flatV.conj().transpose(0, 2, 1) - eye)), d * d)
    for j in range(d):
        for l in range(d):
            lhs = V[j, l] @ flatV  # all (j', l') at once
            jp = np.repeat(np.arange(d), d)
            lp = np.tile(np.arange(d), d)
            rhs = w[neg[mul[l, jp]]][:, None, None] * V[add[j, jp], add[l, lp]]
            checks["composition_law"].update(np.max(np.abs(lhs - rhs)), d * d)

    prod = w[:, None] * w[None, :]
    checks["omega_additivity"].update(np.max(np.abs(prod - w[add])), d * d)
    sums = w[mul].sum(axis=0)
    checks["character_sum"].update(np.max(np.abs(sums - d * (np.arange(d) == 0))), d)

    sq_target = w[mul[mul[np.arange(d)[:, None], np.arange(d)[None, :]], np.arange(d)[None, :]]]
    checks["sqrt_squares"].update(np.max(np.abs(sqt ** 2 - sq_target)), d * d)

    # commuting subgroups, k >= 1
    U = np.array([[np.conj(sqt[k - 1, l]) * V[mul[k - 1, l], l] for l in range(d)]
                  for k in range(1, d + 1)])
    checks["unitarity"].update(
        np.max(np.abs(U.reshape(-1, d, d) @ U.reshape(-1, d, d).conj().transpose(0, 2, 1) - eye)),
        d * d)
    for k in range(1, d + 1):
        vk = tab.vectors[k]
        proj = np.einsum("ti,tj->tij", vk, vk.conj())
        for l in range(d):
            lhs = U[k - 1, l] @ U[k - 1]
            checks["subgroup_product"].update(np.max(np.abs(lhs - U[k - 1, add[l]])), d)
            diag = np.tensordot(w[mul[:, l]], proj, axes=1)
            checks["subgroup_diagonal"].update(np.max(np.abs(U[k - 1, l] - diag)))
            # U = c * V with |c| = 1, and c = 1 when l = 0
            Vkl = V[mul[k - 1, l], l]
            r, c0 = np.nonzero(Vkl)[0][0], np.nonzero(Vkl)[1][0]
            c = U[k - 1, l][r, c0] / Vkl[r, c0]
            dev = max(abs(abs(c) - 1), np.max(np.abs(U[k - 1, l] - c * Vkl)))
            if l == 0:
                dev = max(dev, abs(c - 1))
            checks["subgroup_phase"].update(dev)

    # sqrt(q) sqrt(q') = omega^(-(k-1) q q') sqrt(q + q'); the minus sign is void for p = 2
    qq = np.arange(d)
    for k in range(1, d + 1):
        lhs = sqt[k - 1][:, None] * sqt[k - 1][None, :]
        rhs = w[neg[mul[mul[k - 1, qq][:, None], qq[None, :]]]] * sqt[k - 1][add]
        checks["sqrt_product_shift"].update(np.max(np.abs(lhs - rhs)), d * d)

    if p == 2:
        ipw = np.array([i_pow(g) for g in range(d)])
        lhs = ipw[:, None] * ipw[None, :]
        sign = np.where((qq[:, None] & qq[None, :] & 1) == 1, -1, 1)
        checks["i_power_law"].update(np.max(np.abs(lhs - sign * ipw[add])), d * d)

        ph = np.array([[[phi(f, k, kp, l) for l in range(d)] for kp in range(1, d + 1)]
                       for k in range(1, d + 1)])  # [k-1, k'-1, l]
        for k in range(1, d + 1):
            for kp in range(1, d + 1):
                ksum = add[k - 1, kp - 1] + 1
                lhs = sqt[k - 1] * sqt[kp - 1]
                rhs = ph[k - 1, kp - 1] * sqt[ksum - 1]
                checks["sqrt_product_phi"].update(np.max(np.abs(lhs - rhs)), d)
        dev = 0.0
        dev = max(dev, np.max(np.abs(ph[:, :, 0] - 1)))
        dev = max(dev, np.max(np.abs(ph - ph.transpose(1, 0, 2))))
        dev = max(dev, np.max(np.abs(ph[:, :, :, None] * ph[:, :, None, :] - ph[:, :, add])))
        ks = np.arange(d)
        diag_phi = ph[ks, ks]  # [k-1, q]
        dev = max(dev, np.max(np.abs(diag_phi - sq_target)))
        checks["phi_properties"].update(dev, d * d * d * d)

        # phi-expansion of the inner products, compared with the vectors themselves
        for k in range(1, d + 1):
            for kp in range(1, d + 1):
                ksum = add[k - 1, kp - 1] + 1
                coef = ph[k - 1, kp - 1] * ph[kp - 1, kp - 1] * sqt[ksum - 1]  # [q]
                # sum over q of coef[q] * omega^(q*(t+t'))
                tsum = add[:, :]                                    # [t, t']
                expansion = (w[mul[qq[None, None, :], tsum[:, :, None]]] * coef).sum(axis=2) / d
                direct = tab.vectors[kp].conj() @ tab.vectors[k].T   # [t', t]
                checks["inner_product"].update(np.max(np.abs(expansion.T - direct)), d * d)
    else:
        for name in ("i_power_law", "sqrt_product_phi", "phi_properties"):
            checks[name].skipped = "odd p"

    # moduli of all inner products against the unbiasedness target, both parities
    flat = tab.vectors.reshape(-1, d)
    gram = np.abs(flat.conj() @ flat.T)
    kk = np.repeat(np.arange(d + 1), d)
    tt = np.tile(np.arange(d), d + 1)
    target = np.where(kk[:, None] == kk[None, :],
                      (tt[:, None] == tt[None, :]).astype(float), 1 / math.sqrt(d))
    checks["inner_product"].update(np.max(np.abs(gram - target)), gram.size)

    return AppendixReport(d=d, tol=tol, corrected=corrected, checks=checks)


def subgroup_matrices(f: FieldSpec) -> np.ndarray:
    """All U^k_l for k = 0..d, shape (d+1, d, d, d)."""
    return np.array([[u_operator(f, k, l) for l in range(f.d)] for k in range(f.d + 1)])
