"""Pure numpy implementation of the batched run loop.

Mirrors ``_kernel.pyx`` line for line.  Ancilla states are kept in
(computational carrier) x (dual-basis ancilla) coordinates, so the
controlled shifts reduce to a change of basis on the carrier and a column
permutation, and Eve's dual-basis measurement reads column norms directly.
"""
import numpy as np

# slot and column layout; must agree with dqkd.protocol.Slot / Col
S_BOB_BASIS, S_BOB_VECTOR, S_MODE, S_ALICE_BASIS, S_ALICE_MEASURE, S_SYMBOL = range(6)
S_EVE_BASIS, S_EVE_FWD, S_EVE_BWD_BASIS, S_EVE_BWD, S_BOB_MEASURE = range(6, 11)
(C_MODE, C_BOB_K, C_BOB_T, C_ALICE_BASIS, C_ALICE_OUTCOME, C_ENCODED_A,
 C_BOB_OUTCOME, C_DECODED_A, C_EVE_DECODED, C_COINCIDENT, C_DETECTED) = range(11)
NSLOTS, NCOLS = 11, 11

LAYOUT = {"nslots": NSLOTS, "ncols": NCOLS}


def _idx(u, n):
    i = int(u * n)
    return n - 1 if i >= n else i


def _sample(probs, u):
    acc = 0.0
    n = len(probs)
    for j in range(n - 1):
        acc += probs[j]
        if u < acc:
            return j
    return n - 1


def simulate_runs(uniforms, symbols, vecs, sub, zphase, c, strategy, ir_independent):
    """Run len(uniforms) protocol rounds; returns an int64 (n, NCOLS) array.

    strategy: 0 none, 1 intercept-resend, 2 controlled-shift.
    symbols[i] >= 0 fixes Alice's symbol for run i; -1 draws it.
    """
    n = uniforms.shape[0]
    d = vecs.shape[1]
    out = np.full((n, NCOLS), -1, dtype=np.int64)
    conj_vecs = vecs.conj()
    dual = vecs[1]                 # dual[h, b] = <b|v1_h>
    conj_dual = conj_vecs[1]
    rows = np.arange(d)

    for i in range(n):
        u = uniforms[i]
        rec = out[i]
        k = 1 + _idx(u[S_BOB_BASIS], d)
        t = _idx(u[S_BOB_VECTOR], d)
        rec[C_BOB_K] = k
        rec[C_BOB_T] = t
        eve_basis = hf = -1

        if strategy == 2:
            J = np.zeros((d, d), dtype=complex)
            J[:, 0] = vecs[k, t]
            C = conj_dual @ J
            Cs = np.empty_like(C)
            for h in range(d):
                # inverse shift: ancilla label e -> e + h
                Cs[h, sub[rows, sub[0, h]]] = C[h]
            J = dual.T @ Cs
            psi = None
        else:
            psi = vecs[k, t].copy()
            if strategy == 1:
                eve_basis = 1 + _idx(u[S_EVE_BASIS], d)
                probs = np.abs(conj_vecs[eve_basis] @ psi) ** 2
                hf = _sample(probs, u[S_EVE_FWD])
                psi = vecs[eve_basis, hf].copy()

        if u[S_MODE] < c:
            rec[C_MODE] = 0
            kp = 1 + _idx(u[S_ALICE_BASIS], d)
            if psi is None:
                M = conj_vecs[kp] @ J
                probs = np.sum(np.abs(M) ** 2, axis=1)
                tp = _sample(probs, u[S_ALICE_MEASURE])
                J = np.outer(vecs[kp, tp], M[tp] / np.sqrt(probs[tp]))
            else:
                probs = np.abs(conj_vecs[kp] @ psi) ** 2
                tp = _sample(probs, u[S_ALICE_MEASURE])
                psi = vecs[kp, tp].copy()
            rec[C_ALICE_BASIS] = kp
            rec[C_ALICE_OUTCOME] = tp
        else:
            rec[C_MODE] = 1
            a = symbols[i] if symbols[i] >= 0 else _idx(u[S_SYMBOL], d)
            if psi is None:
                J = zphase[a][:, None] * J
            else:
                psi = zphase[a] * psi
            rec[C_ENCODED_A] = a

        if strategy == 1:
            kb = 1 + _idx(u[S_EVE_BWD_BASIS], d) if ir_independent else eve_basis
            probs = np.abs(conj_vecs[kb] @ psi) ** 2
            hb = _sample(probs, u[S_EVE_BWD])
            psi = vecs[kb, hb].copy()
            rec[C_EVE_DECODED] = sub[hf, hb]
        elif strategy == 2:
            C = conj_dual @ J
            Cs = np.empty_like(C)
            for h in range(d):
                # direct shift: ancilla label e -> e - h
                Cs[h, sub[rows, h]] = C[h]
            probs = np.sum(np.abs(Cs) ** 2, axis=0)
            e = _sample(probs, u[S_EVE_BWD])
            J = np.zeros((d, d), dtype=complex)
            J[:, e] = (dual.T @ Cs[:, e]) / np.sqrt(probs[e])
            rec[C_EVE_DECODED] = e

        if psi is None:
            M = conj_vecs[k] @ J
            probs = np.sum(np.abs(M) ** 2, axis=1)
        else:
            probs = np.abs(conj_vecs[k] @ psi) ** 2
        b = _sample(probs, u[S_BOB_MEASURE])
        rec[C_BOB_OUTCOME] = b

        if rec[C_MODE] == 1:
            rec[C_DECODED_A] = sub[t, b]
            rec[C_COINCIDENT] = 0
            rec[C_DETECTED] = 0
        else:
            coincident = rec[C_ALICE_BASIS] == k
            rec[C_COINCIDENT] = int(coincident)
            rec[C_DETECTED] = int(coincident and (rec[C_ALICE_OUTCOME] != t or b != rec[C_ALICE_OUTCOME]))
    return out
