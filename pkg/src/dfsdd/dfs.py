"""Dark subspace of the collective spin operators."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NumericalError, ValidationError
from .qubit_ops import AXES, collective_spin, ket

KERNEL_THRESHOLD = 1e-8
MIN_GAP = 1e4

#: Named dark states on two and four qubits.
PSI1 = ket({"01": 1, "10": -1})
PSI2 = ket({"0101": 1, "1001": -1, "0110": -1, "1010": 1})
PSI3 = ket({"0011": 2, "0101": -1, "1001": -1, "0110": -1, "1010": -1, "1100": 2})

NAMED_STATES = {"psi1": PSI1, "psi2": PSI2, "psi3": PSI3}


@dataclass(frozen=True)
class DarkBasis:
    n_qubits: int
    vectors: tuple[np.ndarray, ...]

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    def matrix(self) -> np.ndarray:
        """Basis vectors as columns, shape ``(2**n, dimension)``."""
        if not self.vectors:
            return np.zeros((2**self.n_qubits, 0), dtype=complex)
        return np.column_stack(self.vectors)

    def projector(self) -> np.ndarray:
        b = self.matrix()
        return b @ b.conj().T


def _canonicalize(basis: np.ndarray) -> np.ndarray:
    """Gram-Schmidt on the span, seeded by the lexicographically first coordinates.

    Projecting unit vectors e_0, e_1, ... onto the span in index order and
    orthonormalizing gives a basis fixed by the span alone.
    """
    proj = basis @ basis.conj().T
    out = []
    for idx in range(proj.shape[0]):
        v = proj[:, idx].copy()
        for u in out:
            v -= np.vdot(u, v) * u
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            out.append(v / norm)
        if len(out) == basis.shape[1]:
            break
    return np.column_stack(out) if out else basis


@lru_cache(maxsize=16)
def _dark_columns(n: int) -> np.ndarray:
    stacked = np.vstack([collective_spin(a, n) for a in AXES])
    _, s, vh = np.linalg.svd(stacked)
    null = s < KERNEL_THRESHOLD
    if null.any() and (~null).any():
        if s[~null].min() / max(s[null].max(), 1e-300) < MIN_GAP:
            raise NumericalError("no clear gap between kernel and range singular values")
    kernel = vh[null].conj().T
    if kernel.shape[1] == 0:
        return kernel
    return _canonicalize(kernel)


def dark_subspace(n: int) -> DarkBasis:
    """Orthonormal basis of the joint kernel of ``S_x``, ``S_y``, ``S_z``."""
    if n < 1:
        raise ValidationError("need at least one qubit")
    cols = _dark_columns(n)
    return DarkBasis(n, tuple(cols[:, k].copy() for k in range(cols.shape[1])))


def dfs_dimension(n: int) -> int:
    return dark_subspace(n).dimension


def contains(basis: DarkBasis, psi: np.ndarray) -> float:
    """Norm of the projection of ``psi`` onto the span of ``basis``."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (2**basis.n_qubits,):
        raise ValidationError(f"state of length {psi.shape[0]} does not fit {basis.n_qubits} qubits")
    if basis.dimension == 0:
        return 0.0
    return float(np.linalg.norm(basis.matrix().conj().T @ psi))


def format_ket(psi: np.ndarray, n: int, digits: int = 6, cutoff: float = 1e-9) -> str:
    """Ket notation with amplitudes, e.g. ``+0.707107|01> -0.707107|10>``."""
    parts = []
    for idx, amp in enumerate(psi):
        if abs(amp) < cutoff:
            continue
        bits = format(idx, f"0{n}b")
        if abs(amp.imag) < cutoff:
            parts.append(f"{amp.real:+.{digits}f}|{bits}>")
        else:
            parts.append(f"({amp.real:+.{digits}f}{amp.imag:+.{digits}f}j)|{bits}>")
    return " ".join(parts) if parts else "0"
