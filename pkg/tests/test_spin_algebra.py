import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floquet_dress.errors import InvalidArgumentError
from floquet_dress.spin import hermitian_eig, spin_matrices

from conftest import random_hermitian

spins = st.integers(min_value=0, max_value=20).map(lambda k: k / 2)


def test_spin_half_is_half_pauli():
    s = spin_matrices(0.5)
    assert np.array_equal(s.Fx, [[0, 0.5], [0.5, 0]])
    assert np.array_equal(s.Fz, np.diag([0.5, -0.5]))
    assert np.array_equal(s.Fy, [[0, -0.5j], [0.5j, 0]])


def test_spin_two_ladder_element():
    s = spin_matrices(2)
    # rows ordered m = 2, 1, 0, -1, -2
    assert s.Fx[1, 0] == pytest.approx(1.0, abs=1e-15)
    assert s.Fx[2, 1] == pytest.approx(0.5 * np.sqrt(6), abs=1e-15)


@given(spins)
def test_spin_algebra(F):
    s = spin_matrices(F)
    I = np.eye(s.dim)
    assert np.allclose(s.Fx @ s.Fy - s.Fy @ s.Fx, 1j * s.Fz, atol=1e-12, rtol=0)
    assert np.allclose(s.Fy @ s.Fz - s.Fz @ s.Fy, 1j * s.Fx, atol=1e-12, rtol=0)
    assert np.allclose(s.Fz @ s.Fx - s.Fx @ s.Fz, 1j * s.Fy, atol=1e-12, rtol=0)
    cas = s.Fx @ s.Fx + s.Fy @ s.Fy + s.Fz @ s.Fz
    assert np.allclose(cas, F * (F + 1) * I, atol=1e-12 * max(1, F * F), rtol=0)
    for M in (s.Fx, s.Fy, s.Fz):
        assert np.array_equal(M, M.conj().T)
    assert np.array_equal(np.diag(s.Fz).real, F - np.arange(s.dim))


@pytest.mark.parametrize("F", [0.25, -0.5, 10.5, "two", float("nan")])
def test_spin_rejects_bad_values(F):
    with pytest.raises(InvalidArgumentError):
        spin_matrices(F)


def test_eig_identity_and_pauli():
    assert np.array_equal(hermitian_eig(np.eye(5)).values, np.ones(5))
    assert np.allclose(hermitian_eig([[0, 1], [1, 0]]).values, [-1, 1], atol=1e-15)


def test_eig_matches_cubic_roots(rng):
    # characteristic polynomial of a 3x3 Hermitian, solved by the trigonometric formula
    for _ in range(50):
        H = random_hermitian(rng, 3)
        a = -np.trace(H).real
        b = 0.5 * ((np.trace(H) ** 2 - np.trace(H @ H)).real)
        c = -np.linalg.det(H).real
        p = b - a * a / 3
        q = 2 * a**3 / 27 - a * b / 3 + c
        r = np.sqrt(-p / 3)
        phi = np.arccos(np.clip(3 * q / (2 * p) * np.sqrt(-3 / p), -1, 1))
        roots = np.sort([2 * r * np.cos((phi - 2 * np.pi * k) / 3) - a / 3 for k in range(3)])
        assert np.allclose(hermitian_eig(H).values, roots, atol=1e-12 * np.linalg.norm(H), rtol=0)


def test_eig_contract_on_many_random_matrices(rng):
    for k in range(1000):
        n = int(rng.integers(1, 129)) if k % 10 == 0 else int(rng.integers(1, 24))
        H = random_hermitian(rng, n, scale=10 ** rng.uniform(-3, 6))
        e = hermitian_eig(H)
        V, w = e.vectors, e.values
        nrm = np.linalg.norm(H)
        assert np.all(np.diff(w) >= 0)
        assert np.linalg.norm(H - (V * w) @ V.conj().T) <= 1e-11 * nrm
        assert np.allclose(V.conj().T @ V, np.eye(n), atol=1e-12, rtol=0)
        piv = np.argmax(np.abs(V), axis=0)
        top = V[piv, np.arange(n)]
        assert np.all(top.imag == 0) and np.all(top.real > 0)


def test_eig_is_bitwise_deterministic(rng):
    H = random_hermitian(rng, 60)
    a, b = hermitian_eig(H), hermitian_eig(H.copy())
    assert a.values.tobytes() == b.values.tobytes()
    assert a.vectors.tobytes() == b.vectors.tobytes()


def test_eig_rejects_non_hermitian():
    with pytest.raises(InvalidArgumentError):
        hermitian_eig([[0, 1], [0, 0]])
    with pytest.raises(InvalidArgumentError):
        hermitian_eig(np.zeros((2, 3)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2**31 - 1))
def test_eig_residual_property(n, seed):
    H = random_hermitian(np.random.default_rng(seed), n)
    e = hermitian_eig(H)
    res = np.linalg.norm(H @ e.vectors - e.vectors * e.values, axis=0).max()
    assert res <= 1e-12 * np.linalg.norm(H)
