import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from u1phases.identities import dense_Cl, dense_f3_coefficients, dense_from_spectrum, dense_z_string
from u1phases.sectors import (
    binomial,
    bitstring,
    bk_coefficient,
    bk_spectrum,
    c_eigenvalue,
    c_spectrum,
    circular_distance,
    enumerate_sector,
    f3_coefficients_in_Cl_basis,
    f3_spectrum,
    mod2pi,
    project_onto_Cl,
    rank_state,
    spectrum_trace,
    trace_Bk_Cl,
    unrank_state,
    z_string_sector_trace,
)


# --- frozen values ------------------------------------------------------

def test_binomial_values():
    assert binomial(4, 2) == 6
    assert binomial(9, 0) == 1
    assert binomial(8, 4) == 70
    assert binomial(3, 5) == 0
    assert binomial(200, 100) == math.comb(200, 100)


def test_binomial_rejects_negative():
    with pytest.raises(ValueError):
        binomial(-1, 0)
    with pytest.raises(ValueError):
        binomial(3, -1)


def test_enumerate_sector_examples():
    assert enumerate_sector(3, 0).states == (0,)
    assert enumerate_sector(3, 1).states == (1, 2, 4)
    assert enumerate_sector(4, 2).labels() == ["0011", "0101", "0110", "1001", "1010", "1100"]


def test_enumerate_sector_matches_bruteforce():
    for n in range(1, 9):
        for m in range(n + 1):
            brute = [s for s in range(2**n) if bin(s).count("1") == m]
            basis = enumerate_sector(n, m)
            assert list(basis.states) == brute
            assert all(basis.position(s) == i for i, s in enumerate(brute))


def test_enumerate_sector_range_errors():
    with pytest.raises(ValueError):
        enumerate_sector(3, 4)
    with pytest.raises(ValueError):
        enumerate_sector(3, -1)


def test_enumerate_sector_large_n_small_sector():
    basis = enumerate_sector(40, 1)
    assert len(basis.states) == 40 and basis.states[-1] == 1 << 39


def test_sector_bits_table():
    bits = enumerate_sector(3, 1).bits
    assert bits.tolist() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_c_eigenvalue_examples():
    assert c_eigenvalue(3, 3, 1) == -1
    assert [c_eigenvalue(4, 3, m) for m in range(5)] == [4, -2, 0, 2, -4]
    for n in range(1, 8):
        for m in range(n + 1):
            assert c_eigenvalue(n, 1, m) == n - 2 * m


def test_c_eigenvalue_matches_dense_oracle():
    for n in range(1, 8):
        weights = np.array([bin(i).count("1") for i in range(2**n)])
        for l in range(n + 1):
            cl = dense_Cl(n, l)
            for m in range(n + 1):
                assert set(cl[weights == m].tolist()) == {c_eigenvalue(n, l, m)}


def test_z_string_sector_trace_matches_dense():
    n = 5
    weights = np.array([bin(i).count("1") for i in range(2**n)])
    for w in range(1, n + 1):
        zs = dense_z_string(n, range(w))
        for m in range(n + 1):
            assert z_string_sector_trace(n, w, m) == int(zs[weights == m].sum())


def test_bk_coefficient_examples():
    assert [bk_coefficient(4, 3, m) for m in range(4)] == [4, -3, 2, -1]
    assert bk_coefficient(4, 3, 4) == 0
    assert bk_coefficient(5, 0, 0) == 1
    assert [bk_coefficient(3, 3, m) for m in range(4)] == [1, -1, 1, -1]


def test_trace_bk_cl_examples():
    assert trace_Bk_Cl(4, 3, 1) == 0
    assert trace_Bk_Cl(4, 3, 3) == 32
    assert trace_Bk_Cl(6, 0, 0) == 1


def test_trace_bk_cl_matches_dense():
    for n in range(1, 8):
        for k in range(n + 1):
            bk = dense_from_spectrum(n, bk_spectrum(n, k))
            for l in range(n + 1):
                assert trace_Bk_Cl(n, k, l) == int(np.dot(bk, dense_Cl(n, l)))


def test_f3_coefficients_examples():
    assert f3_coefficients_in_Cl_basis(3) == [0, 0, 0, Fraction(1)]
    assert f3_coefficients_in_Cl_basis(4) == [0, 0, 0, Fraction(1, 2), 0]
    assert f3_coefficients_in_Cl_basis(5) == [0, 0, 0, Fraction(1, 4), 0, Fraction(1, 2)]


def test_f3_coefficients_match_dense_oracle():
    for n in range(3, 10):
        assert f3_coefficients_in_Cl_basis(n) == dense_f3_coefficients(n)


def test_f3_spectrum_shape():
    for n in range(3, 12):
        f = f3_spectrum(n)
        assert f[0] == n - 2 and f[1] == -1 and f[n - 1] == 1 and f[n] == -(n - 2)
        assert all(v == 0 for v in f[2:n - 1])
        assert spectrum_trace(f, n) == 0


def test_projection_reconstructs_spectrum():
    for n in range(3, 8):
        coeffs = project_onto_Cl(f3_spectrum(n), n)
        rebuilt = [sum(c * c_eigenvalue(n, l, m) for l, c in enumerate(coeffs)) for m in range(n + 1)]
        assert rebuilt == list(f3_spectrum(n))


def test_mod2pi_examples():
    assert mod2pi(3 * math.pi) == pytest.approx(math.pi)
    assert mod2pi(-math.pi) == math.pi
    assert mod2pi(0.0) == 0.0
    with pytest.raises(ValueError):
        mod2pi(float("nan"))
    with pytest.raises(ValueError):
        mod2pi(float("inf"))


def test_bitstring_is_msb_first():
    assert bitstring(1, 3) == "001"
    assert bitstring(6, 4) == "0110"


# --- properties ---------------------------------------------------------

@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_mod2pi_range_and_congruence(a):
    r = mod2pi(a)
    assert -math.pi < r <= math.pi
    assert circular_distance(r, a) < 1e-9


@given(st.integers(1, 16).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))).flatmap(
    lambda nm: st.tuples(st.just(nm[0]), st.just(nm[1]), st.integers(0, max(binomial(*nm) - 1, 0)))))
def test_rank_unrank_roundtrip(args):
    n, m, r = args
    s = unrank_state(n, m, r)
    assert bin(s).count("1") == m and s < 2**n
    assert rank_state(s) == r


@given(st.integers(1, 12), st.data())
def test_c_spectrum_reflection(n, data):
    l = data.draw(st.integers(0, n))
    spec = c_spectrum(n, l)
    assert all(spec[m] == (-1) ** l * spec[n - m] for m in range(n + 1))


@given(st.integers(1, 12), st.data())
def test_cl_orthogonality(n, data):
    l = data.draw(st.integers(0, n))
    lp = data.draw(st.integers(0, n))
    a, b = c_spectrum(n, l), c_spectrum(n, lp)
    got = sum(x * y * binomial(n, m) for m, (x, y) in enumerate(zip(a, b)))
    assert got == (2**n * binomial(n, l) if l == lp else 0)


def test_cl_orthogonality_dense_small():
    n = 4
    for l, lp in combinations(range(n + 1), 2):
        assert int(np.dot(dense_Cl(n, l), dense_Cl(n, lp))) == 0
