"""Dense complex linear-algebra kernel.

Operators are plain square ``numpy`` arrays. Where the tensor structure
matters (partial traces, structured multiplication) the factor dimensions
are passed explicitly as ``dims``; factor indices are 0-based array axes,
with factor 0 the most significant one in the computational basis.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import BranchError, CapacityError, NumericalError, ValidationError

#: Largest matrix side length :func:`kron` will build.
MAX_DIM = 4096

HERMITIAN_RTOL = 1e-12


def kron(*ops: np.ndarray, max_dim: int | None = None) -> np.ndarray:
    """Tensor product of ``ops``, left factor most significant."""
    if not ops:
        raise ValidationError("kron needs at least one operand")
    limit = MAX_DIM if max_dim is None else max_dim
    side = int(np.prod([op.shape[0] for op in ops]))
    if side > limit:
        raise CapacityError(f"side length {side} exceeds maximum {limit}")
    return reduce(np.kron, ops)


def is_hermitian(m: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    scale = max(np.linalg.norm(m), 1.0)
    return np.linalg.norm(m - m.conj().T) < rtol * scale


def is_unitary(u: np.ndarray, atol: float = 1e-10) -> bool:
    return np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) < atol


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def expm_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Return ``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, 1e-10):
        raise ValidationError("expm_hermitian requires a Hermitian generator")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def unitary_log(u: np.ndarray, branch_tol: float = 1e-6) -> np.ndarray:
    """Principal skew-Hermitian logarithm of a unitary.

    Eigenphases are taken in (-pi, pi]. A phase within ``branch_tol`` of
    +-pi makes the branch ambiguous and raises :class:`BranchError`.
    """
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u, 1e-8):
        raise ValidationError("unitary_log requires a unitary matrix")
    # complex Schur form of a normal matrix is diagonal with unitary Z
    t, z = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diag(t))
    if np.any(np.pi - np.abs(phases) < branch_tol):
        raise BranchError("eigenphase at +-pi; shorten the evolution time")
    return (z * (1j * phases)) @ z.conj().T


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> None:
    if int(np.prod(dims)) != m.shape[0]:
        raise ValidationError(f"dims {tuple(dims)} do not match side length {m.shape[0]}")


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep`` (0-based factor indices).

    The kept factors stay in their original order.
    """
    keep = sorted(set(keep))
    if not keep:
        raise ValidationError("keep set must not be empty")
    n = len(dims)
    if keep[0] < 0 or keep[-1] >= n:
        raise ValidationError(f"keep indices {keep} out of range for {n} factors")
    _check_dims(rho, dims)
    t = np.asarray(rho).reshape(tuple(dims) * 2)
    # einsum labels: row axes 0..n-1, column axes n..2n-1; traced pairs share a label
    row = list(range(n))
    col = [n + i if i in keep else i for i in range(n)]
    out = keep + [n + i for i in keep]
    d = int(np.prod([dims[i] for i in keep]))
    return np.einsum(t, row + col, out).reshape(d, d)


def apply_local(
    op: np.ndarray,
    m: np.ndarray,
    dims: Sequence[int],
    factor: int,
    side: str = "left",
) -> np.ndarray:
    """Multiply ``m`` by ``op`` acting on one tensor factor only.

    ``side="left"`` gives ``(I..op..I) @ m``; ``side="right"`` gives
    ``m @ (I..op..I)``. Works for vectors (left only) and square matrices
    without building the full Kronecker product.
    """
    d = dims[factor]
    before = int(np.prod(dims[:factor]))
    after = int(np.prod(dims[factor + 1:]))
    if m.ndim == 1:
        if side != "left":
            raise ValidationError("vectors only support left multiplication")
        t = m.reshape(before, d, after)
        return np.einsum("ij,ajb->aib", op, t).reshape(-1)
    cols = m.shape[1]
    if side == "left":
        t = m.reshape(before, d, after, cols)
        return np.einsum("ij,ajbc->aibc", op, t).reshape(m.shape)
    t = m.reshape(m.shape[0], before, d, after)
    return np.einsum("rajb,ji->raib", t, op).reshape(m.shape)


def state_fidelity(psi: np.ndarray, rho: np.ndarray) -> float:
    """Return ``sqrt(<psi|rho|psi>)`` clamped to [0, 1]."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[0] != rho.shape[0]:
        raise ValidationError("state and density matrix dimensions differ")
    overlap = float(np.real(np.vdot(psi, rho @ psi)))
    if overlap < -1e-10:
        raise NumericalError(f"<psi|rho|psi> = {overlap:.3e} is negative")
    return float(np.sqrt(min(max(overlap, 0.0), 1.0)))


def normalize(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValidationError("cannot normalize the zero vector")
    return psi / norm


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / 2
