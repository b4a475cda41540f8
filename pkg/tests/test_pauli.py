import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dqkd import field_of_order
from dqkd.galois import gf_mul
from dqkd.mub import omega_pow, sqrt_phase
from dqkd.pauli import (IDENTITIES, is_unitary, pauli_v, phi, subgroup_matrices, u_operator,
                        verify_appendix, z_shift)

W3 = cmath.exp(2j * math.pi / 3)
PHI_CHECKS = {"i_power_law", "sqrt_product_phi", "phi_properties"}


def test_pauli_examples(fields):
    f2 = fields(2)
    assert np.allclose(pauli_v(f2, 0, 0), np.eye(2))
    assert np.allclose(pauli_v(f2, 1, 0), np.diag([1, -1]))
    assert np.allclose(pauli_v(f2, 0, 1), [[0, 1], [1, 0]])
    assert np.allclose(pauli_v(fields(5), 0, 0), np.eye(5))


def test_z_shift_examples(fields):
    assert np.allclose(z_shift(fields(4), 0), np.eye(4))
    assert np.allclose(z_shift(fields(3), 1), np.diag([1, W3, W3 ** 2]))
    for d in (3, 4, 8):
        f = fields(d)
        for a in range(d):
            assert np.allclose(z_shift(f, a), pauli_v(f, a, 0))


@pytest.mark.parametrize("d", (2, 3, 4, 5, 8, 9))
def test_z_shift_moves_label(fields, tables, d):
    f, tab = fields(d), tables(d)
    for k in range(1, d + 1):
        for t in range(d):
            for a in range(d):
                got = z_shift(f, a) @ tab.vector(k, t)
                assert np.allclose(got, tab.vector(k, int(f.sub_table[t, a])), atol=1e-12)


@pytest.mark.parametrize("d", (2, 4, 8, 16))
def test_composition_law_characteristic_two(fields, d):
    # here the sign of the exponent is immaterial: V^j_l V^j'_l' = w^(l*j') V^(j+j')_(l+l')
    f = fields(d)
    rng = np.random.default_rng(d)
    for j, l, jp, lp in rng.integers(0, d, size=(200, 4)):
        lhs = pauli_v(f, j, l) @ pauli_v(f, jp, lp)
        rhs = omega_pow(f, gf_mul(f, l, jp)) * pauli_v(f, f.add_table[j, jp], f.add_table[l, lp])
        assert np.allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("d", (3, 5, 9))
def test_composition_law_odd_characteristic(fields, d):
    f = fields(d)
    for j in range(d):
        for l in range(d):
            for jp in range(d):
                lp = (j + 2 * l) % d
                lhs = pauli_v(f, j, l) @ pauli_v(f, jp, lp)
                phase = omega_pow(f, int(f.neg_table[f.mul_table[l, jp]]))
                rhs = phase * pauli_v(f, f.add_table[j, jp], f.add_table[l, lp])
                assert np.allclose(lhs, rhs, atol=1e-12)


def test_phi_examples(fields):
    for d in (2, 4, 8):
        f = fields(d)
        for k in range(1, d + 1):
            for kp in range(1, d + 1):
                assert phi(f, k, kp, 0) == 1
                for q in range(d):
                    assert phi(f, k, kp, q) == phi(f, kp, k, q)
                    assert phi(f, k, kp, q) in (1, -1)
        for k in range(1, d + 1):
            for q in range(d):
                assert phi(f, k, k, q) == pytest.approx(omega_pow(f, gf_mul(f, gf_mul(f, k - 1, q), q)))
    with pytest.raises(ValueError, match="even-characteristic only"):
        phi(fields(3), 1, 1, 0)


@given(st.sampled_from((2, 4, 8, 16)), st.data())
def test_phi_additive(d, data):
    f = field_of_order(d)
    k, kp = data.draw(st.integers(1, d)), data.draw(st.integers(1, d))
    q, qp = data.draw(st.integers(0, d - 1)), data.draw(st.integers(0, d - 1))
    assert phi(f, k, kp, q) * phi(f, k, kp, qp) == phi(f, k, kp, int(f.add_table[q, qp]))


@pytest.mark.parametrize("d", (2, 3, 4, 5, 8, 9))
def test_subgroups(fields, tables, d):
    f, tab = fields(d), tables(d)
    for k in range(d + 1):
        assert np.allclose(u_operator(f, k, 0), np.eye(d))
        for l in range(d):
            u = u_operator(f, k, l)
            assert is_unitary(u)
            # diagonal in basis k with eigenvalue omega^(t*l) on vector t
            proj = sum(omega_pow(f, gf_mul(f, t, l)) * np.outer(tab.vector(k, t), tab.vector(k, t).conj())
                       for t in range(d))
            assert np.allclose(u, proj, atol=1e-12)
            for lp in range(d):
                assert np.allclose(u @ u_operator(f, k, lp), u_operator(f, k, int(f.add_table[l, lp])),
                                   atol=1e-12)


def test_subgroup_uses_conjugate_root(fields):
    f = fields(4)
    for k in range(1, 5):
        for l in range(4):
            v = pauli_v(f, gf_mul(f, k - 1, l), l)
            assert np.allclose(u_operator(f, k, l), np.conj(sqrt_phase(f, k, l)) * v)


def test_subgroup_matrices_shape(fields):
    assert subgroup_matrices(fields(3)).shape == (4, 3, 3, 3)


@pytest.mark.parametrize("d", (2, 3, 4, 5, 8, 9, 16))
def test_appendix_suite(fields, d):
    rep = verify_appendix(fields(d), 1e-9)
    assert rep.all_passed, rep.failures()
    assert set(rep.checks) == set(IDENTITIES)
    skipped = {n for n, c in rep.checks.items() if c.skipped}
    assert skipped == (PHI_CHECKS if fields(d).p != 2 else set())
    if d == 2:
        assert max(c.max_deviation for c in rep.checks.values()) < 1e-12


@pytest.mark.parametrize("d", (4, 8, 16))
def test_wrong_sign_fails(fields, d):
    rep = verify_appendix(fields(d), 1e-9, corrected=False)
    assert not rep.all_passed
    assert {"subgroup_product", "subgroup_diagonal"} & set(rep.failures())


def test_report_json(fields):
    doc = json.loads(verify_appendix(fields(3)).to_json())
    assert doc["d"] == 3 and doc["passed"] is True
    assert doc["identities"]["phi_properties"]["status"] == "skipped (odd p)"
    assert doc["identities"]["unitarity"]["status"] == "pass"


@settings(max_examples=30)
@given(st.sampled_from((2, 3, 4, 5, 7, 8, 9)), st.data())
def test_operators_unitary(d, data):
    f = field_of_order(d)
    j, l = data.draw(st.integers(0, d - 1)), data.draw(st.integers(0, d - 1))
    k = data.draw(st.integers(0, d))
    assert is_unitary(pauli_v(f, j, l), 1e-12)
    assert is_unitary(u_operator(f, k, l), 1e-12)
    assert is_unitary(z_shift(f, j), 1e-12)


def test_out_of_range(fields):
    with pytest.raises(ValueError):
        pauli_v(fields(3), 3, 0)
    with pytest.raises(ValueError):
        u_operator(fields(3), 4, 0)
