import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfsdd.errors import BranchError, CapacityError, NumericalError, ValidationError
from dfsdd.linalg import (
    apply_local,
    commutator,
    expm_hermitian,
    is_hermitian,
    is_unitary,
    kron,
    partial_trace,
    random_hermitian,
    state_fidelity,
    unitary_log,
)


def taylor_expm(a, terms=60):
    # plain power series, fine for small norms
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


def loop_partial_trace(rho, dims, keep):
    """Trace out by explicit index loops."""
    n = len(dims)
    idx = list(np.ndindex(*dims))
    every = list(range(n))
    keep = sorted(keep)
    d_keep = int(np.prod([dims[i] for i in keep]))
    out = np.zeros((d_keep, d_keep), dtype=complex)

    def flat(t, which):
        v = 0
        for i in which:
            v = v * dims[i] + t[i]
        return v

    for a in idx:
        for b in idx:
            if any(a[i] != b[i] for i in every if i not in keep):
                continue
            out[flat(a, keep), flat(b, keep)] += rho[flat(a, every), flat(b, every)]
    return out


def test_kron_ordering():
    a = np.array([[1, 2], [3, 4]])
    b = np.eye(3)
    assert np.array_equal(kron(a, b), np.kron(a, b))
    assert kron(a, b)[0, 3] == 2


def test_kron_capacity():
    with pytest.raises(CapacityError):
        kron(np.eye(64), np.eye(128))
    with pytest.raises(ValidationError):
        kron()


def test_hermitian_and_unitary_predicates(rng):
    h = random_hermitian(5, rng)
    assert is_hermitian(h)
    assert not is_hermitian(h + 1j * np.eye(5))
    assert is_unitary(expm_hermitian(h, 0.3))


def test_expm_matches_taylor(rng):
    h = random_hermitian(6, rng, scale=0.3)
    assert np.allclose(expm_hermitian(h, 0.7), taylor_expm(-0.7j * h), atol=1e-12)


def test_expm_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        expm_hermitian(np.array([[0, 1], [0, 0]]))


def test_expm_pauli_rotation():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    u = expm_hermitian(sx, math.pi / 2)
    assert np.allclose(u, -1j * sx)


def test_unitary_log_round_trip(rng):
    h = random_hermitian(8, rng, scale=0.4)
    u = expm_hermitian(h, 0.5)
    log_u = unitary_log(u)
    assert np.allclose(log_u, -0.5j * h, atol=1e-10)


def test_unitary_log_branch_cut():
    u = np.diag([1.0, -1.0]).astype(complex)
    with pytest.raises(BranchError):
        unitary_log(u)


def test_partial_trace_product_state(rng):
    a = random_hermitian(2, rng)
    b = random_hermitian(3, rng)
    rho = np.kron(a, b)
    assert np.allclose(partial_trace(rho, (2, 3), [0]), a * np.trace(b))
    assert np.allclose(partial_trace(rho, (2, 3), [1]), b * np.trace(a))


@pytest.mark.parametrize("keep", [[0], [1], [2], [0, 2], [1, 2]])
def test_partial_trace_matches_loops(rng, keep):
    dims = (2, 3, 2)
    rho = random_hermitian(12, rng)
    assert np.allclose(partial_trace(rho, dims, keep), loop_partial_trace(rho, dims, keep))


def test_partial_trace_validation():
    with pytest.raises(ValidationError):
        partial_trace(np.eye(4), (2, 3), [0])
    with pytest.raises(ValidationError):
        partial_trace(np.eye(4), (2, 2), [])
    with pytest.raises(ValidationError):
        partial_trace(np.eye(4), (2, 2), [2])


@settings(max_examples=25, deadline=None)
@given(factor=st.integers(0, 2), side=st.sampled_from(["left", "right"]), seed=st.integers(0, 10**6))
def test_apply_local_matches_kron(factor, side, seed):
    rng = np.random.default_rng(seed)
    dims = (2, 3, 2)
    op = rng.normal(size=(dims[factor],) * 2) + 1j * rng.normal(size=(dims[factor],) * 2)
    m = rng.normal(size=(12, 12)) + 0j
    eyes = [np.eye(d) for d in dims]
    eyes[factor] = op
    full = kron(*eyes)
    expected = full @ m if side == "left" else m @ full
    assert np.allclose(apply_local(op, m, dims, factor, side), expected)


def test_apply_local_vector(rng):
    dims = (3, 2)
    op = random_hermitian(2, rng)
    v = rng.normal(size=6) + 0j
    assert np.allclose(apply_local(op, v, dims, 1), np.kron(np.eye(3), op) @ v)


def test_state_fidelity():
    psi = np.array([1, 0], dtype=complex)
    assert state_fidelity(psi, np.outer(psi, psi)) == pytest.approx(1.0)
    assert state_fidelity(psi, np.eye(2) / 2) == pytest.approx(math.sqrt(0.5))
    with pytest.raises(NumericalError):
        state_fidelity(psi, np.diag([-0.5, 1.5]))


def test_commutator_of_paulis():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1, -1]).astype(complex)
    assert np.allclose(commutator(sx, sy), 2j * sz)
