import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dqkd import field_of_order
from dqkd.galois import gf_div, gf_mul
from dqkd.mub import (build_mub, i_pow, mub_vector, omega_pow, root_of_unity, sqrt_phase,
                      sqrt_phase_rewritten, verify_mub)

W3 = cmath.exp(2j * math.pi / 3)
MUB_DIMS = (2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27, 32)


def test_roots_of_unity():
    assert root_of_unity(2) == -1
    assert root_of_unity(3) == pytest.approx(W3)
    assert root_of_unity(5) == pytest.approx(cmath.exp(2j * math.pi / 5))
    with pytest.raises(ValueError):
        root_of_unity(4)


@pytest.mark.parametrize("d", (2, 3, 4, 9, 27))
def test_omega_pow_is_a_character(fields, d):
    f = fields(d)
    assert omega_pow(f, 0) == 1
    for a in range(d):
        assert omega_pow(f, a) == pytest.approx(root_of_unity(f.p) ** (a % f.p))
        for b in range(d):
            assert omega_pow(f, a) * omega_pow(f, b) == pytest.approx(
                omega_pow(f, int(f.add_table[a, b])))


def test_i_pow():
    assert [i_pow(g) for g in range(6)] == [1, 1j, -1, -1j, 1, 1j]


def test_sqrt_phase_examples(fields):
    assert sqrt_phase(fields(2), 2, 1) == pytest.approx(1j)
    assert sqrt_phase(fields(3), 2, 2) == pytest.approx(W3 ** 2)
    for d in (2, 3, 4, 8):
        for k in range(1, d + 1):
            assert sqrt_phase(fields(d), k, 0) == 1
    with pytest.raises(ValueError):
        sqrt_phase(fields(4), 0, 1)


@pytest.mark.parametrize("d", (2, 3, 4, 5, 8, 9, 16, 25, 27, 32))
def test_sqrt_phase_squares_to_target(fields, d):
    f = fields(d)
    for k in range(1, d + 1):
        for q in range(d):
            target = omega_pow(f, gf_mul(f, gf_mul(f, k - 1, q), q))
            assert sqrt_phase(f, k, q) ** 2 == pytest.approx(target, abs=1e-12)


@pytest.mark.parametrize("d", (2, 4, 8, 16, 32))
def test_two_closed_forms_agree(fields, d):
    f = fields(d)
    for k in range(1, d + 1):
        for q in range(d):
            assert sqrt_phase(f, k, q) == pytest.approx(sqrt_phase_rewritten(f, k, q), abs=1e-12)


@pytest.mark.parametrize("d", (3, 5, 7, 11, 13))
def test_prime_vectors_match_quadratic_oracle(d):
    # prime d: amplitudes omega^((k-1) q^2 / 2 - q t) with integer arithmetic mod d
    f = field_of_order(d)
    half = pow(2, -1, d)
    w = cmath.exp(2j * math.pi / d)
    for k in range(1, d + 1):
        for t in range(d):
            expect = np.array([w ** (((k - 1) * q * q * half - q * t) % d) for q in range(d)])
            assert np.allclose(mub_vector(f, k, t), expect / math.sqrt(d), atol=1e-12)


def test_qubit_bases(fields):
    f = fields(2)
    r = 1 / math.sqrt(2)
    assert np.allclose(mub_vector(f, 1, 0), [r, r])
    assert np.allclose(mub_vector(f, 1, 1), [r, -r])
    got = {tuple(np.round(mub_vector(f, 2, t), 12)) for t in range(2)}
    expect = {tuple(np.round(np.array([r, 1j * r]), 12)), tuple(np.round(np.array([r, -1j * r]), 12))}
    assert got == expect


@pytest.mark.parametrize("d", (2, 5, 8))
def test_computational_basis(fields, d):
    for t in range(d):
        assert np.array_equal(mub_vector(fields(d), 0, t), np.eye(d)[t])


def test_vector_index_errors(fields):
    with pytest.raises(ValueError):
        mub_vector(fields(3), 4, 0)
    with pytest.raises(ValueError):
        mub_vector(fields(3), 1, 3)


@pytest.mark.parametrize("d", MUB_DIMS)
def test_verify_mub(tables, d):
    rep = verify_mub(tables(d), 1e-9)
    assert rep.passed, rep
    assert rep.max_deviation <= (1e-12 if d == 2 else 1e-9)


def test_normalisation(tables):
    tab = tables(4)
    for k in range(5):
        for t in range(4):
            assert np.vdot(tab.vector(k, t), tab.vector(k, t)) == pytest.approx(1)


@pytest.mark.parametrize("d", (4, 8, 16, 32))
def test_uncorrected_sign_breaks_unbiasedness(fields, d):
    assert not verify_mub(build_mub(fields(d), corrected=False), 1e-9).passed


def test_uncorrected_sign_harmless_for_qubit(fields):
    assert verify_mub(build_mub(fields(2), corrected=False), 1e-12).passed


def test_json_export(tables):
    tab = tables(4)
    doc = json.loads(tab.to_json())
    assert (doc["p"], doc["m"], doc["d"]) == (2, 2, 4)
    assert doc["reduction_poly"] == [1, 1, 1]
    arr = np.array(doc["bases"])
    assert arr.shape == (5, 4, 4, 2)
    assert np.allclose(arr[..., 0] + 1j * arr[..., 1], tab.vectors)


@given(st.sampled_from((3, 4, 5, 8, 9)), st.data())
def test_halving_form_for_odd_characteristic(d, data):
    f = field_of_order(d)
    k = data.draw(st.integers(1, d))
    q = data.draw(st.integers(0, d - 1))
    if f.p == 2:
        assert abs(sqrt_phase(f, k, q)) == pytest.approx(1)
    else:
        e = gf_div(f, gf_mul(f, gf_mul(f, k - 1, q), q), 2)
        assert sqrt_phase(f, k, q) == pytest.approx(omega_pow(f, e))
