"""Average-Hamiltonian analysis of decoupling cycles.

Every operator here lives on ``qubits (x) bath_1 (x) ... (x) bath_N``. A
controller ``g`` acts as ``U(g) (x) I_B``, so conjugation reduces to an
index permutation of the qubit block.

Error generators follow one sign convention: ``h_p`` and ``h_c`` are
Hermitian and enter as ``log U = -i (m tau H_bar + tau**2 h_p + tau**3 h_c)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import PropertyViolation, ValidationError
from .linalg import commutator, expm_hermitian, is_hermitian, random_hermitian, unitary_log
from .qubit_ops import AXES, PauliAxis, QubitPermutation, _axis, collective_spin, pauli_on
from .sequences import DecouplingCycle


@dataclass
class SystemBathHamiltonian:
    """``H_0 = H_S + H_B + sum sigma_a^(i) (x) B_a^(i)``.

    ``terms`` holds ``(site, axis, B)`` with ``B`` acting on bath ``site``
    alone (shape ``bath_dims[site-1]``). A bath of dimension 1 means the
    site is uncoupled.
    """

    n_qubits: int
    bath_dims: tuple[int, ...]
    terms: list[tuple[int, PauliAxis, np.ndarray]] = field(default_factory=list)
    system_term: np.ndarray | None = None
    bath_term: np.ndarray | None = None

    def __post_init__(self):
        self.bath_dims = tuple(self.bath_dims)
        if len(self.bath_dims) != self.n_qubits:
            raise ValidationError("need one bath dimension per qubit site")
        clean = []
        for site, axis, b in self.terms:
            if not 1 <= site <= self.n_qubits:
                raise ValidationError(f"site {site} out of range")
            b = np.asarray(b, dtype=complex)
            if b.shape != (self.bath_dims[site - 1],) * 2:
                raise ValidationError(f"bath operator on site {site} has shape {b.shape}")
            if not is_hermitian(b):
                raise ValidationError(f"bath operator on site {site} is not Hermitian")
            clean.append((site, _axis(axis), b))
        self.terms = clean

    @property
    def bath_dim(self) -> int:
        return int(np.prod(self.bath_dims))

    @property
    def dim(self) -> int:
        return 2**self.n_qubits * self.bath_dim

    def embed_bath(self, site: int, b: np.ndarray) -> np.ndarray:
        """Operator on bath ``site`` lifted to the whole bath space."""
        left = int(np.prod(self.bath_dims[: site - 1]))
        right = int(np.prod(self.bath_dims[site:]))
        return np.kron(np.kron(np.eye(left), b), np.eye(right))

    def bath_operator(self, site: int, axis) -> np.ndarray:
        """Full-bath-space ``B_axis^(site)`` (zero if absent)."""
        a = _axis(axis)
        out = np.zeros((self.bath_dim, self.bath_dim), dtype=complex)
        for s, ax, b in self.terms:
            if s == site and ax is a:
                out = out + self.embed_bath(s, b)
        return out

    def interaction(self) -> np.ndarray:
        # each term is very sparse; densify once at the end
        n = self.n_qubits
        h = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for site, axis, b in self.terms:
            left = sp.identity(int(np.prod(self.bath_dims[: site - 1])), format="csr")
            right = sp.identity(int(np.prod(self.bath_dims[site:])), format="csr")
            bath = sp.kron(sp.kron(left, sp.csr_matrix(b)), right)
            h = h + sp.kron(sp.csr_matrix(pauli_on(axis, site, n)), bath, format="csr")
        return h.toarray()

    def operator(self) -> np.ndarray:
        h = self.interaction()
        if self.system_term is not None:
            h += np.kron(self.system_term, np.eye(self.bath_dim))
        if self.bath_term is not None:
            h += np.kron(np.eye(2**self.n_qubits), self.bath_term)
        return h

    @classmethod
    def random(
        cls,
        n_qubits: int,
        rng: np.random.Generator,
        bath_dim: int = 2,
        axes: Sequence = AXES,
        coupled_sites: Sequence[int] | None = None,
        system: bool = False,
        bath: bool = False,
    ) -> "SystemBathHamiltonian":
        """Random independent-bath model; uncoupled sites get a 1-dim bath."""
        sites = range(1, n_qubits + 1) if coupled_sites is None else coupled_sites
        dims = tuple(bath_dim if s in sites else 1 for s in range(1, n_qubits + 1))
        terms = [(s, a, random_hermitian(bath_dim, rng)) for s in sites for a in axes]
        model = cls(n_qubits, dims, terms)
        if system:
            model.system_term = random_hermitian(2**n_qubits, rng)
        if bath:
            model.bath_term = random_hermitian(model.bath_dim, rng)
        return model


def _index_map(p: QubitPermutation, bath_dim: int) -> np.ndarray:
    n = p.n
    idx = np.arange(2**n)
    shifts = n - 1 - np.arange(n)
    bits = (idx[:, None] >> shifts) & 1
    moved = np.empty_like(bits)
    moved[:, list(p.images)] = bits
    target = moved @ (1 << shifts)
    return (target[:, None] * bath_dim + np.arange(bath_dim)[None, :]).reshape(-1)


def conjugate(op: np.ndarray, g: QubitPermutation, bath_dim: int = 1) -> np.ndarray:
    """``(U(g) (x) I)^dag op (U(g) (x) I)`` by index permutation."""
    t = _index_map(g, bath_dim)
    if op.shape[0] != t.size:
        raise ValidationError(f"operator side {op.shape[0]} does not match {g.n} qubits x bath {bath_dim}")
    return op[np.ix_(t, t)]


def _check_cycle(cycle: DecouplingCycle, n_qubits: int) -> None:
    if cycle.n_qubits != n_qubits:
        raise ValidationError(f"cycle acts on {cycle.n_qubits} sites, model has {n_qubits}")


def conjugate_sum(op: np.ndarray, controllers: Sequence[QubitPermutation], bath_dim: int) -> np.ndarray:
    return sum(conjugate(op, g, bath_dim) for g in controllers)


def average_hamiltonian(
    model: SystemBathHamiltonian, cycle: DecouplingCycle, interaction_only: bool = False
) -> np.ndarray:
    """Interval-averaged Hamiltonian ``(1/m) sum_k g_k^dag H_0 g_k``."""
    _check_cycle(cycle, model.n_qubits)
    h = model.interaction() if interaction_only else model.operator()
    return conjugate_sum(h, cycle.controllers, model.bath_dim) / cycle.intervals


def collective_form(model: SystemBathHamiltonian) -> np.ndarray:
    """``sum_a S_a (x) B_a^env`` with ``B_a^env`` the site average of the bath operators."""
    n = model.n_qubits
    h = np.zeros((model.dim, model.dim), dtype=complex)
    for a in AXES:
        env = sum(model.bath_operator(s, a) for s in range(1, n + 1)) / n
        h += sp.kron(sp.csr_matrix(collective_spin(a, n)), sp.csr_matrix(env)).toarray()
    return h


@dataclass(frozen=True)
class CollectivityReport:
    max_violation: float
    worst_pair: tuple[int, int] | None
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_violation < self.tolerance


def verify_collectivity(
    h_eff: np.ndarray, n_qubits: int, bath_dim: int, tolerance: float = 1e-9
) -> CollectivityReport:
    """Largest change of ``h_eff`` under conjugation by any qubit transposition."""
    worst, pair = 0.0, None
    for i in range(1, n_qubits + 1):
        for j in range(i + 1, n_qubits + 1):
            p = QubitPermutation.transposition(n_qubits, i, j)
            v = float(np.linalg.norm(conjugate(h_eff, p, bath_dim) - h_eff))
            if pair is None or v > worst:
                worst, pair = v, (i, j)
    return CollectivityReport(worst, pair, tolerance)


@dataclass
class ErrorReport:
    """Average and error Hamiltonians of one cycle.

    ``h_bar`` is the unnormalized conjugate sum, ``h_eff = h_bar / m``.
    ``h_p`` and ``h_c`` are the Hermitian second- and third-order
    generators (see module docstring).
    """

    intervals: int
    h_eff: np.ndarray
    h_bar: np.ndarray
    h_p: np.ndarray
    h_c: np.ndarray
    h_p_symmetrized: np.ndarray
    residual_norms: dict[float, tuple[float, float]] = field(default_factory=dict)

    def error_norms(self, tau: float) -> dict[str, float]:
        """Frobenius sizes of the periodic and concatenated leading errors."""
        m = self.intervals
        return {
            "periodic_tau2_m_Hp": tau**2 * m * float(np.linalg.norm(self.h_p)),
            "concatenated_tau3_Hc": tau**3 * float(np.linalg.norm(self.h_c)),
        }

    def to_text(self) -> str:
        lines = [
            f"intervals: {self.intervals}",
            f"norm_H_eff: {np.linalg.norm(self.h_eff):.12g}",
            f"norm_H_p: {np.linalg.norm(self.h_p):.12g}",
            f"norm_H_c: {np.linalg.norm(self.h_c):.12g}",
            f"hermitian_H_eff: {is_hermitian(self.h_eff, 1e-10)}",
            f"hermitian_H_p: {is_hermitian(self.h_p, 1e-10)}",
            f"hermitian_H_c: {is_hermitian(self.h_c, 1e-10)}",
        ]
        for tau in sorted(self.residual_norms):
            r1, r2 = self.residual_norms[tau]
            lines.append(f"residual[tau={tau:.6g}]: {r1:.6e} {r2:.6e}")
        return "\n".join(lines) + "\n"


def _conjugates(model: SystemBathHamiltonian, cycle: DecouplingCycle) -> list[np.ndarray]:
    h = model.operator()
    return [conjugate(h, g, model.bath_dim) for g in cycle.controllers]


def second_order_commutators(conjugates: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_{j>k} [A_j, A_k]`` using running prefix sums."""
    total = np.zeros_like(conjugates[0])
    prefix = np.zeros_like(conjugates[0])
    for a in conjugates:
        total += commutator(a, prefix)
        prefix += a
    return total


def error_hamiltonians(model: SystemBathHamiltonian, cycle: DecouplingCycle) -> ErrorReport:
    """Second-order (periodic) and third-order (concatenated) error generators.

    With ``A_k = g_k^dag H_0 g_k`` and ``H_bar = sum A_k``::

        H_p = 1/2 sum_{j>k} [A_j, A_k]                      (anti-Hermitian)
        H_c = i/2 sum_k (m - 2k - 1) [H_bar, g_k^dag H_p g_k]

    so that ``log U_0 = -i tau H_bar - tau**2 H_p + O(tau**3)`` and the
    concatenated block has ``-tau**2 sum g_k^dag H_p g_k + tau**3 H_c``.
    The ``H_c`` expression assumes the controllers form a group.
    """
    _check_cycle(cycle, model.n_qubits)
    m = cycle.intervals
    d = model.bath_dim
    conj = _conjugates(model, cycle)
    h_bar = sum(conj)
    hp_anti = 0.5 * second_order_commutators(conj)
    hc_anti = np.zeros_like(h_bar)
    for k, g in enumerate(cycle.controllers):
        hc_anti += (m - 2 * k - 1) * commutator(h_bar, conjugate(hp_anti, g, d))
    hc_anti *= 0.5j
    h_p = -1j * hp_anti
    return ErrorReport(
        intervals=m,
        h_eff=h_bar / m,
        h_bar=h_bar,
        h_p=h_p,
        h_c=1j * hc_anti,
        h_p_symmetrized=conjugate_sum(h_p, cycle.controllers, d),
    )


def block_unitary(model: SystemBathHamiltonian, cycle: DecouplingCycle, tau: float) -> np.ndarray:
    """Exact ``U_0(T) = prod_k g_k^dag exp(-i H_0 tau) g_k`` with k = 0 acting first."""
    step = expm_hermitian(model.operator(), tau)
    u = np.eye(model.dim, dtype=complex)
    for g in cycle.controllers:
        u = conjugate(step, g, model.bath_dim) @ u
    return u


def concatenated_unitary(model: SystemBathHamiltonian, cycle: DecouplingCycle, tau: float) -> np.ndarray:
    """Exact ``U_c(mT) = prod_k g_k^dag U_0(T) g_k``."""
    u0 = block_unitary(model, cycle, tau)
    u = np.eye(model.dim, dtype=complex)
    for g in cycle.controllers:
        u = conjugate(u0, g, model.bath_dim) @ u
    return u


@dataclass(frozen=True)
class ResidualRow:
    """Frobenius distance between ``log U`` and truncated expansions.

    Periodic schedule: ``first`` and ``second`` truncate after the tau and
    tau**2 terms. Concatenated schedule: ``third`` keeps the tau, tau**2
    and tau**3 terms, and ``third_with_block_remainder`` also adds the
    symmetrized beyond-second-order part of each inner block.
    """

    tau: float
    first: float = float("nan")
    second: float = float("nan")
    third: float = float("nan")
    third_with_block_remainder: float = float("nan")


def bch_residual(
    model: SystemBathHamiltonian,
    cycle: DecouplingCycle,
    taus: Sequence[float],
    schedule: str = "periodic",
    report: ErrorReport | None = None,
) -> list[ResidualRow]:
    if schedule not in ("periodic", "concatenated"):
        raise ValidationError(f"unknown schedule {schedule!r}")
    report = report or error_hamiltonians(model, cycle)
    m, d = cycle.intervals, model.bath_dim
    rows = []
    for tau in taus:
        log_u0 = unitary_log(block_unitary(model, cycle, tau))
        first = -1j * tau * report.h_bar
        second = first - 1j * tau**2 * report.h_p
        if schedule == "periodic":
            r1 = float(np.linalg.norm(log_u0 - first))
            r2 = float(np.linalg.norm(log_u0 - second))
            report.residual_norms[tau] = (r1, r2)
            rows.append(ResidualRow(tau, first=r1, second=r2))
            continue
        log_uc = unitary_log(concatenated_unitary(model, cycle, tau))
        expansion = (
            -1j * m * tau * report.h_bar
            - 1j * tau**2 * report.h_p_symmetrized
            - 1j * tau**3 * report.h_c
        )
        remainder = conjugate_sum(log_u0 - second, cycle.controllers, d)
        rows.append(
            ResidualRow(
                tau,
                third=float(np.linalg.norm(log_uc - expansion)),
                third_with_block_remainder=float(np.linalg.norm(log_uc - expansion - remainder)),
            )
        )
    return rows


@dataclass
class CollectiveDecomposition:
    """``H_SB`` split into one collective and ``N - 1`` non-collective parts.

    ``collective[a]`` is ``B_a^{1+}``; ``noncollective[a][j]`` is ``B_a^{j-}``
    for ``j = 2..N``. All are full-bath-space operators.
    """

    n_qubits: int
    bath_dim: int
    collective: dict[PauliAxis, np.ndarray]
    noncollective: dict[PauliAxis, dict[int, np.ndarray]]

    def collective_part(self) -> np.ndarray:
        return sum(np.kron(collective_spin(a, self.n_qubits), b) for a, b in self.collective.items())

    def component(self, j: int, axis=None) -> np.ndarray:
        """``[sum_i s_i sigma^(i)] (x) B^{j-}`` with ``s_j = -1``, summed over axes."""
        if not 2 <= j <= self.n_qubits:
            raise ValidationError(f"non-collective index {j} outside 2..{self.n_qubits}")
        axes = AXES if axis is None else (_axis(axis),)
        n = self.n_qubits
        out = 0
        for a in axes:
            signed = collective_spin(a, n) - 2 * pauli_on(a, j, n)
            out = out + np.kron(signed, self.noncollective[a][j])
        return out

    def reassemble(self) -> np.ndarray:
        return self.collective_part() + sum(self.component(j) for j in range(2, self.n_qubits + 1))


def collective_decompose(model: SystemBathHamiltonian) -> CollectiveDecomposition:
    """Split into ``B^{1+} = 1/2 sum_{i>=2} B^(i) - (N-3)/2 B^(1)`` and ``B^{j-} = (B^(1) - B^(j)) / 2``."""
    n = model.n_qubits
    collective, noncollective = {}, {}
    for a in AXES:
        bs = [model.bath_operator(s, a) for s in range(1, n + 1)]
        collective[a] = 0.5 * sum(bs[1:], np.zeros_like(bs[0])) - 0.5 * (n - 3) * bs[0]
        noncollective[a] = {j: 0.5 * (bs[0] - bs[j - 1]) for j in range(2, n + 1)}
    return CollectiveDecomposition(n, model.bath_dim, collective, noncollective)


def elimination_factor(n: int) -> int:
    """Weight each site ends up with after summing a non-collective part over a cycle.

    Each part carries ``N - 1`` plus signs and one minus sign; visiting every
    site once spreads their sum ``N - 2`` evenly.
    """
    return n - 2


def eliminate_noncollective(
    decomposition: CollectiveDecomposition,
    j: int,
    cycle: DecouplingCycle,
    tolerance: float = 1e-10,
) -> np.ndarray:
    """Sum ``g_k^dag H^j g_k`` over the controllers and check it is collective.

    Raises :class:`PropertyViolation` unless the sum equals
    ``(N - 2) sum_a S_a (x) B_a^{j-}``.
    """
    n = decomposition.n_qubits
    _check_cycle(cycle, n)
    total = conjugate_sum(decomposition.component(j), cycle.controllers, decomposition.bath_dim)
    expected = elimination_factor(n) * sum(
        np.kron(collective_spin(a, n), decomposition.noncollective[a][j]) for a in AXES
    )
    err = float(np.linalg.norm(total - expected))
    if err > tolerance:
        raise PropertyViolation(f"elimination of component {j}", err, tolerance)
    return total


def noncollective_sum(
    decomposition: CollectiveDecomposition, j: int, controllers: Sequence[QubitPermutation]
) -> np.ndarray:
    """Raw conjugate sum of component ``j``, without any check."""
    return conjugate_sum(decomposition.component(j), controllers, decomposition.bath_dim)


def dark_annihilation(h_eff: np.ndarray, dark_vectors: Sequence[np.ndarray], bath_states: Sequence[np.ndarray]) -> float:
    """Largest ``||h_eff (psi (x) phi)||`` over the given dark and bath states."""
    worst = 0.0
    for psi in dark_vectors:
        for phi in bath_states:
            worst = max(worst, float(np.linalg.norm(h_eff @ np.kron(psi, phi))))
    return worst
