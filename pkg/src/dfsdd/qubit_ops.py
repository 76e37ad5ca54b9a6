"""Qubit operator zoo: embedded Paulis, collective spins, exchange gates.

Qubit sites are numbered from 1, as in the usual ``E_{1,2}`` notation.
Site 1 is the most significant tensor factor and ``sigma_z|0> = +|0>``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import CapacityError, ValidationError
from .linalg import MAX_DIM, expm_hermitian

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class PauliAxis(str, enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"

    @property
    def matrix(self) -> np.ndarray:
        return {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}[self.value]


AXES = (PauliAxis.X, PauliAxis.Y, PauliAxis.Z)


def _axis(axis) -> PauliAxis:
    try:
        return PauliAxis(axis.lower() if isinstance(axis, str) else axis)
    except ValueError:
        raise ValidationError(f"unknown Pauli axis {axis!r}") from None


def _check_site(i: int, n: int) -> None:
    if not 1 <= i <= n:
        raise ValidationError(f"site {i} out of range 1..{n}")


def _check_qubits(n: int) -> None:
    if n < 1:
        raise ValidationError("need at least one qubit")
    if 2**n > MAX_DIM:
        raise CapacityError(f"{n} qubits exceed the maximum dimension {MAX_DIM}")


def embed(op: np.ndarray, i: int, n: int) -> np.ndarray:
    """Single-qubit ``op`` on site ``i`` of ``n``, identity elsewhere."""
    _check_qubits(n)
    _check_site(i, n)
    left = np.eye(2 ** (i - 1), dtype=complex)
    right = np.eye(2 ** (n - i), dtype=complex)
    return np.kron(np.kron(left, op), right)


def pauli_on(axis, i: int, n: int) -> np.ndarray:
    return embed(_axis(axis).matrix, i, n)


def collective_spin(axis, n: int) -> np.ndarray:
    """``S_axis = sum_i sigma_axis^(i)`` on ``n`` qubits."""
    _check_qubits(n)
    a = _axis(axis)
    return sum(pauli_on(a, i, n) for i in range(1, n + 1))


def basis_state(bits: str) -> np.ndarray:
    """Computational basis ket, e.g. ``basis_state("0101")``."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValidationError(f"bad bit string {bits!r}")
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def ket(terms: dict[str, complex]) -> np.ndarray:
    """Normalized superposition from ``{bitstring: amplitude}``."""
    v = sum(amp * basis_state(bits) for bits, amp in terms.items())
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class QubitPermutation:
    """Site relabelling: the state on site ``i`` moves to site ``images[i]``.

    ``images`` is 0-based internally; constructors take 1-based sites.
    Composition ``p * q`` applies ``q`` first, so that
    ``permutation_unitary(p * q) == permutation_unitary(p) @ permutation_unitary(q)``.
    """

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise ValidationError(f"{self.images} is not a bijection")

    @property
    def n(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, n: int) -> "QubitPermutation":
        return cls(tuple(range(n)))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "QubitPermutation":
        _check_site(i, n)
        _check_site(j, n)
        if i == j:
            raise ValidationError("transposition needs two distinct sites")
        images = list(range(n))
        images[i - 1], images[j - 1] = j - 1, i - 1
        return cls(tuple(images))

    @classmethod
    def cycle(cls, n: int, *sites: int) -> "QubitPermutation":
        """Cycle notation ``(s1, s2, ..., sk)``: s1 -> s2 -> ... -> sk -> s1."""
        images = list(range(n))
        for s in sites:
            _check_site(s, n)
        if len(set(sites)) != len(sites):
            raise ValidationError("repeated site in cycle")
        for a, b in zip(sites, sites[1:] + sites[:1]):
            images[a - 1] = b - 1
        return cls(tuple(images))

    @classmethod
    def from_pairs(cls, n: int, pairs: Sequence[tuple[int, int]]) -> "QubitPermutation":
        """Product of exchanges on disjoint pairs (order irrelevant)."""
        p = cls.identity(n)
        for i, j in pairs:
            p = cls.transposition(n, i, j) * p
        return p

    def __mul__(self, other: "QubitPermutation") -> "QubitPermutation":
        if self.n != other.n:
            raise ValidationError("permutations act on different qubit counts")
        return QubitPermutation(tuple(self.images[k] for k in other.images))

    def __pow__(self, k: int) -> "QubitPermutation":
        p = QubitPermutation.identity(self.n)
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            p = base * p
        return p

    def __call__(self, site: int) -> int:
        """Image of a 1-based site."""
        return self.images[site - 1] + 1

    def inverse(self) -> "QubitPermutation":
        inv = [0] * self.n
        for i, j in enumerate(self.images):
            inv[j] = i
        return QubitPermutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def moved(self) -> int:
        """Number of sites whose state relocates."""
        return sum(i != j for i, j in enumerate(self.images))

    def cycles(self) -> list[tuple[int, ...]]:
        """Nontrivial cycles, 1-based."""
        seen, out = set(), []
        for start in range(self.n):
            if start in seen or self.images[start] == start:
                continue
            c, k = [], start
            while k not in seen:
                seen.add(k)
                c.append(k + 1)
                k = self.images[k]
            out.append(tuple(c))
        return out

    def __str__(self) -> str:
        cs = self.cycles()
        return "".join("(" + ",".join(map(str, c)) + ")" for c in cs) if cs else "()"


@lru_cache(maxsize=512)
def _permutation_matrix(images: tuple[int, ...]) -> np.ndarray:
    n = len(images)
    d = 2**n
    idx = np.arange(d)
    shifts = n - 1 - np.arange(n)
    bits = (idx[:, None] >> shifts) & 1
    new_bits = np.empty_like(bits)
    new_bits[:, list(images)] = bits
    target = new_bits @ (1 << shifts)
    u = np.zeros((d, d), dtype=complex)
    u[target, idx] = 1.0
    u.setflags(write=False)
    return u


def permutation_unitary(p: QubitPermutation) -> np.ndarray:
    """Unitary moving the state on site ``i`` to site ``p(i)``.

    The returned array is cached and read-only.
    """
    _check_qubits(p.n)
    return _permutation_matrix(p.images)


def swap_gate(i: int, j: int, n: int) -> np.ndarray:
    return permutation_unitary(QubitPermutation.transposition(n, i, j))


def _pair_check(i: int, j: int, n: int) -> None:
    _check_site(i, n)
    _check_site(j, n)
    if i == j:
        raise ValidationError("coupling needs two distinct sites")


def heisenberg_coupling(i: int, j: int, n: int) -> np.ndarray:
    """``sigma_x sigma_x + sigma_y sigma_y + sigma_z sigma_z`` on sites i, j."""
    _pair_check(i, j, n)
    return sum(pauli_on(a, i, n) @ pauli_on(a, j, n) for a in AXES)


def xy_coupling(i: int, j: int, n: int) -> np.ndarray:
    """``sigma_x sigma_x + sigma_y sigma_y`` on sites i, j."""
    _pair_check(i, j, n)
    return sum(pauli_on(a, i, n) @ pauli_on(a, j, n) for a in AXES[:2])


def exchange_unitary(i: int, j: int, n: int, generator: str = "heisenberg") -> np.ndarray:
    """Unitary generated by a coupling switched on with pulse area pi/4.

    The Heisenberg generator gives ``exp(-i pi/4) * swap_gate``. The XY
    generator maps ``|01> -> -i|10>`` and leaves ``|00>``, ``|11>`` alone.
    """
    if generator == "heisenberg":
        h = heisenberg_coupling(i, j, n)
    elif generator == "xy":
        h = xy_coupling(i, j, n)
    else:
        raise ValidationError(f"unknown exchange generator {generator!r}")
    return expm_hermitian(h, np.pi / 4)
