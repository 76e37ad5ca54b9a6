import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfsdd.errors import CapacityError, ValidationError
from dfsdd.qubit_ops import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    QubitPermutation,
    basis_state,
    collective_spin,
    embed,
    exchange_unitary,
    heisenberg_coupling,
    ket,
    pauli_on,
    permutation_unitary,
    swap_gate,
)


def test_embed_site_order():
    assert np.allclose(embed(SIGMA_Z, 1, 2), np.kron(SIGMA_Z, np.eye(2)))
    assert np.allclose(pauli_on("x", 3, 3), np.kron(np.eye(4), SIGMA_X))


def test_embed_validation():
    with pytest.raises(ValidationError):
        embed(SIGMA_X, 0, 2)
    with pytest.raises(ValidationError):
        pauli_on("w", 1, 2)
    with pytest.raises(CapacityError):
        pauli_on("x", 1, 13)


def test_collective_spin_two_qubits():
    sz = collective_spin("z", 2)
    assert np.allclose(np.diag(sz), [2, 0, 0, -2])


def test_basis_state_and_ket():
    assert basis_state("10")[2] == 1
    v = ket({"01": 1, "10": -1})
    assert np.isclose(np.linalg.norm(v), 1)
    with pytest.raises(ValidationError):
        basis_state("012")


def test_permutation_moves_state_forward():
    # (1,2,3): the state on site 1 ends up on site 2
    p = QubitPermutation.cycle(3, 1, 2, 3)
    u = permutation_unitary(p)
    assert np.allclose(u @ basis_state("100"), basis_state("010"))
    assert p(1) == 2 and p(3) == 1
    assert str(p) == "(1,2,3)"


def test_permutation_conjugates_paulis():
    p = QubitPermutation.cycle(4, 1, 3, 4)
    u = permutation_unitary(p)
    inv = p.inverse()
    for i in range(1, 5):
        for a, s in zip("xyz", (SIGMA_X, SIGMA_Y, SIGMA_Z)):
            assert np.allclose(u.conj().T @ pauli_on(a, i, 4) @ u, pauli_on(a, inv(i), 4))


perms4 = st.permutations(range(4)).map(lambda t: QubitPermutation(tuple(t)))


@settings(max_examples=40, deadline=None)
@given(perms4, perms4)
def test_composition_is_homomorphism(p, q):
    assert np.allclose(permutation_unitary(p * q), permutation_unitary(p) @ permutation_unitary(q))


@settings(max_examples=30, deadline=None)
@given(perms4)
def test_inverse_and_powers(p):
    assert (p * p.inverse()).is_identity()
    order = 1
    while not (p**order).is_identity():
        order += 1
    assert order in (1, 2, 3, 4)
    assert (p ** -1) == p.inverse()


def test_permutation_validation():
    with pytest.raises(ValidationError):
        QubitPermutation((0, 0, 1))
    with pytest.raises(ValidationError):
        QubitPermutation.transposition(3, 2, 2)
    with pytest.raises(ValidationError):
        QubitPermutation.identity(3) * QubitPermutation.identity(4)


def test_permutation_unitary_is_cached_readonly():
    u = permutation_unitary(QubitPermutation.transposition(2, 1, 2))
    with pytest.raises(ValueError):
        u[0, 0] = 5


def test_heisenberg_exchange_is_swap_up_to_phase():
    for n, (i, j) in [(2, (1, 2)), (3, (1, 3)), (4, (2, 3))]:
        u = exchange_unitary(i, j, n)
        assert np.allclose(u, np.exp(-1j * np.pi / 4) * swap_gate(i, j, n))


def test_xy_exchange_adds_phase():
    u = exchange_unitary(1, 2, 2, generator="xy")
    assert np.allclose(u @ basis_state("01"), -1j * basis_state("10"))
    assert np.allclose(u @ basis_state("00"), basis_state("00"))
    with pytest.raises(ValidationError):
        exchange_unitary(1, 2, 2, generator="ising")


def test_heisenberg_coupling_spectrum():
    # singlet -3, triplet +1
    w = np.linalg.eigvalsh(heisenberg_coupling(1, 2, 2))
    assert np.allclose(sorted(w), [-3, 1, 1, 1])


def test_cycles_listing():
    p = QubitPermutation.from_pairs(4, [(1, 2), (3, 4)])
    assert p.cycles() == [(1, 2), (3, 4)]
    assert p.moved() == 4
    assert list(itertools.chain(*p.cycles())) == [1, 2, 3, 4]
