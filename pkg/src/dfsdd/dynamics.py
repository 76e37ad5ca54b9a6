"""Open-system simulation of decoupled qubits with pseudomode baths.

Each zero-temperature bath with Ornstein-Uhlenbeck correlation
``alpha(t) = (Gamma gamma / 2) exp(-gamma |t|)`` is represented exactly by
one damped bosonic mode at zero frequency, coupled with
``g = sqrt(Gamma gamma / 2)`` and damped by ``2 gamma`` (collapse operator
``sqrt(2 gamma) a``). The qubits plus modes then obey a Lindblad equation,
integrated here with fixed-step RK4 on the dense density matrix.

Units: hbar = 1, frequencies in units of omega, times in units of 1/omega.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg

from .avg_ham import conjugate
from .dfs import NAMED_STATES
from .errors import IntegratorError, ValidationError
from .linalg import MAX_DIM, apply_local, partial_trace, state_fidelity
from .qubit_ops import _axis, collective_spin, heisenberg_coupling, pauli_on, xy_coupling
from .sequences import (
    FINITE,
    IDEAL,
    DecouplingCycle,
    PulseTimeline,
    exchange_window,
    free_timeline,
    make_cycle,
    schedule_concatenated,
    schedule_periodic,
    step_count,
)

TRACE_TOL = 1e-6
NEGATIVITY_TOL = 1e-6

#: Reference parameters: Gamma = 0.1 omega, gamma = omega, J = pi omega.
DEFAULT_STRENGTH = 0.1
DEFAULT_RATE = 1.0
REFERENCE_COUPLING = math.pi


@dataclass
class BathSpec:
    """One Ornstein-Uhlenbeck bath, attached to ``site`` through ``sigma_axis``.

    ``strength`` is Gamma and ``rate`` is gamma; ``n_max`` is the photon
    number cutoff of the pseudomode (mode dimension ``n_max + 1``).
    """

    axis: str = "x"
    strength: float = DEFAULT_STRENGTH
    rate: float = DEFAULT_RATE
    n_max: int = 1
    enabled: bool = True
    site: int | None = None

    def __post_init__(self):
        self.axis = _axis(self.axis).value
        if self.strength < 0:
            raise ValidationError("bath strength must be non-negative")
        if self.rate <= 0:
            raise ValidationError("bath memory rate must be positive")
        if self.n_max < 1:
            raise ValidationError("pseudomode cutoff must be at least 1")

    @property
    def mode_coupling(self) -> float:
        return math.sqrt(self.strength * self.rate / 2)

    @property
    def damping(self) -> float:
        return 2 * self.rate


@dataclass
class SimulationConfig:
    n_qubits: int = 2
    omega: float = 1.0
    baths: list[BathSpec] | None = None
    cycle: str = "optimal"
    schedule: str = "periodic"
    tau: float = 0.25
    pulse_mode: str = FINITE
    coupling: float | None = REFERENCE_COUPLING
    t_final: float = 4.0
    dt: float | None = None
    initial_state: str | list = "psi1"
    shared_bath: bool = False
    ancilla_bath: bool = False
    samples: int = 200
    generator: str = "heisenberg"

    def __post_init__(self):
        if self.baths is not None:
            self.baths = [b if isinstance(b, BathSpec) else BathSpec(**b) for b in self.baths]
        if self.n_qubits < 1:
            raise ValidationError("need at least one qubit")
        if self.cycle not in ("optimal", "cyclic", "original4", "none"):
            raise ValidationError(f"unknown cycle {self.cycle!r}")
        if self.schedule not in ("periodic", "concatenated"):
            raise ValidationError(f"unknown schedule {self.schedule!r}")
        if self.pulse_mode not in (IDEAL, FINITE):
            raise ValidationError(f"unknown pulse mode {self.pulse_mode!r}")
        if self.pulse_mode == FINITE and self.cycle != "none" and not self.coupling:
            raise ValidationError("finite pulses need a positive coupling J")
        if self.tau <= 0 or self.t_final <= 0:
            raise ValidationError("tau and t_final must be positive")
        if self.samples < 1:
            raise ValidationError("samples must be positive")

    @property
    def step(self) -> float:
        """Integrator step: ``min(tau/20, 0.005/omega)`` unless set explicitly."""
        limit = min(self.tau / 20, 0.005 / self.omega)
        return limit if self.dt is None else min(self.dt, limit)

    def fingerprint(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def default_baths(n_sites: int, n_max: int, axis: str = "x") -> list[BathSpec]:
    return [BathSpec(axis=axis, n_max=n_max, site=s) for s in range(1, n_sites + 1)]


def default_n_max(n_qubits: int) -> int:
    return 2 if n_qubits <= 2 else 1


def bath_correlation_oracle(strength: float, rate: float, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form OU correlation and the pseudomode prediction ``g**2 exp(-kappa |t| / 2)``."""
    if rate <= 0:
        raise ValidationError("memory rate must be positive")
    t = np.asarray(t, dtype=float)
    closed = strength * rate / 2 * np.exp(-rate * np.abs(t))
    spec = BathSpec(strength=strength, rate=rate)
    pseudo = spec.mode_coupling**2 * np.exp(-spec.damping * np.abs(t) / 2)
    return closed, pseudo


def pseudomode_correlation(spec: BathSpec, t: np.ndarray) -> np.ndarray:
    """``g**2 <a(t) a^dag(0)>`` of the damped vacuum mode, by quantum regression.

    Propagates ``X(t) = exp(L t)[a^dag |0><0|]`` with the mode Liouvillian
    and returns ``g**2 Tr(a X(t))``.
    """
    d = spec.n_max + 1
    a = np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex)
    eye = np.eye(d)
    kappa = spec.damping
    n_op = a.conj().T @ a
    # column-stacking vec: vec(A X B) = (B^T kron A) vec(X)
    liou = (
        kappa * np.kron(a.conj(), a)
        - 0.5 * kappa * np.kron(eye, n_op)
        - 0.5 * kappa * np.kron(n_op.T, eye)
    )
    vac = np.zeros((d, d), dtype=complex)
    vac[0, 0] = 1
    x0 = (a.conj().T @ vac).reshape(-1, order="F")
    out = []
    for tk in np.atleast_1d(t):
        x = (scipy.linalg.expm(liou * abs(tk)) @ x0).reshape(d, d, order="F")
        out.append(np.trace(a @ x))
    return spec.mode_coupling**2 * np.real(np.array(out))


def dephasing_oracle(strength: float, rate: float, t: np.ndarray) -> np.ndarray:
    """Normalized coherence ``|rho_01(t)| / |rho_01(0)|`` under ``sigma_z`` coupling.

    Pure dephasing by a Gaussian bath gives ``exp(-4 Phi(t))`` with
    ``Phi(t) = int_0^t ds1 int_0^s1 ds2 alpha(s1 - s2)
    = (Gamma/2) [t - (1 - exp(-gamma t)) / gamma]``.
    """
    t = np.asarray(t, dtype=float)
    phi = strength / 2 * (t - (1 - np.exp(-rate * t)) / rate)
    return np.exp(-4 * phi)


@dataclass
class Model:
    """Assembled Hilbert space and generators for one configuration."""

    n_sites: int
    dims: tuple[int, ...]
    hamiltonian: np.ndarray
    jumps: list[tuple[int, np.ndarray, float]]
    couplings: list[float]
    cycle: DecouplingCycle | None
    generator: str = "heisenberg"
    _controls: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def mode_dim(self) -> int:
        return int(np.prod(self.dims[self.n_sites:]))

    def control(self, layer, coupling: float) -> np.ndarray:
        key = (tuple(layer), coupling)
        if key not in self._controls:
            pair_op = heisenberg_coupling if self.generator == "heisenberg" else xy_coupling
            h = sum(pair_op(i, j, self.n_sites) for i, j in layer)
            self._controls[key] = coupling * np.kron(h, np.eye(self.mode_dim))
        return self._controls[key]

    def effective(self, h: np.ndarray) -> np.ndarray:
        """``H - i sum_j (kappa_j / 2) a_j^dag a_j`` for the no-jump part."""
        out = h.astype(complex, copy=True)
        for factor, a, kappa in self.jumps:
            n_op = a.conj().T @ a
            left = int(np.prod(self.dims[:factor]))
            right = int(np.prod(self.dims[factor + 1:]))
            out -= 0.5j * kappa * np.kron(np.kron(np.eye(left), n_op), np.eye(right))
        return out


def _annihilation(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex)


def _resolve_cycle(config: SimulationConfig) -> DecouplingCycle | None:
    if config.cycle == "none":
        return None
    return make_cycle(config.cycle, config.n_qubits)


def build_model(config: SimulationConfig) -> Model:
    """Hamiltonian ``(omega/2) sum sigma_z + sum_j g_j sigma_a^(s_j) (a_j + a_j^dag)`` and collapse operators."""
    cycle = _resolve_cycle(config)
    n_sites = cycle.n_qubits if cycle is not None else config.n_qubits
    if config.baths is None:
        n_bath_sites = n_sites if config.ancilla_bath else config.n_qubits
        baths = default_baths(n_bath_sites, default_n_max(config.n_qubits))
    else:
        baths = [b for b in config.baths]
    baths = [b for b in baths if b.enabled]
    if config.shared_bath:
        baths = baths[:1]
    for k, b in enumerate(baths):
        site = b.site if b.site is not None else k + 1
        if not 1 <= site <= n_sites:
            raise ValidationError(f"bath site {site} outside 1..{n_sites}")
        b.site = site
    dims = (2,) * n_sites + tuple(b.n_max + 1 for b in baths)
    dim = int(np.prod(dims))
    if dim > MAX_DIM:
        raise ValidationError(f"total dimension {dim} exceeds maximum {MAX_DIM}")
    mode_dim = int(np.prod(dims[n_sites:]))
    h = np.kron(0.5 * config.omega * collective_spin("z", n_sites), np.eye(mode_dim))
    jumps, couplings = [], []
    for k, b in enumerate(baths):
        factor = n_sites + k
        d = dims[factor]
        a = _annihilation(d)
        left = int(np.prod(dims[n_sites:factor]))
        right = int(np.prod(dims[factor + 1:]))
        quad = np.kron(np.kron(np.eye(left), a + a.conj().T), np.eye(right))
        sys_op = collective_spin(b.axis, n_sites) if config.shared_bath else pauli_on(b.axis, b.site, n_sites)
        h = h + b.mode_coupling * np.kron(sys_op, quad)
        jumps.append((factor, a, b.damping))
        couplings.append(b.mode_coupling)
    return Model(n_sites, dims, h, jumps, couplings, cycle, config.generator)


def initial_system_state(config: SimulationConfig, n_sites: int) -> np.ndarray:
    spec = config.initial_state
    if isinstance(spec, str):
        if spec not in NAMED_STATES:
            raise ValidationError(f"unknown initial state {spec!r}")
        psi = NAMED_STATES[spec]
    else:
        psi = np.array([complex(*a) if isinstance(a, (list, tuple)) else complex(a) for a in spec])
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise ValidationError("initial amplitudes are all zero")
        psi = psi / norm
    n_given = int(round(math.log2(psi.size)))
    if 2**n_given != psi.size:
        raise ValidationError("amplitude count is not a power of two")
    if n_given == n_sites:
        return psi
    if n_given == n_sites - 1:
        # ancilla starts in |0>
        return np.kron(psi, np.array([1, 0], dtype=complex))
    raise ValidationError(f"initial state has {n_given} qubits, register has {n_sites}")


def build_timeline(config: SimulationConfig, cycle: DecouplingCycle | None) -> PulseTimeline:
    if cycle is None:
        return free_timeline(config.n_qubits, config.t_final)
    m = cycle.intervals
    block = m * config.tau if config.schedule == "periodic" else m * m * config.tau
    reps = config.t_final / block
    if abs(reps - round(reps)) > 1e-9 * max(1.0, reps) or round(reps) < 1:
        raise ValidationError(f"t_final={config.t_final} is not a multiple of the block duration {block}")
    reps = int(round(reps))
    if config.schedule == "periodic":
        return schedule_periodic(cycle, reps, config.tau, config.pulse_mode, config.coupling, config.generator)
    return schedule_concatenated(cycle, config.tau, config.pulse_mode, config.coupling, reps, config.generator)


@dataclass
class FidelityTrace:
    times: np.ndarray
    fidelities: np.ndarray
    boundary: np.ndarray
    fingerprint: str = ""
    min_eigenvalue: float = 0.0
    max_trace_error: float = 0.0

    @property
    def final(self) -> float:
        return float(self.fidelities[-1])

    def at(self, t: float) -> float:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9:
            raise ValidationError(f"no sample at t={t}")
        return float(self.fidelities[k])

    def boundary_samples(self) -> tuple[np.ndarray, np.ndarray]:
        return self.times[self.boundary], self.fidelities[self.boundary]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,fidelity\n")
        for t, f in zip(self.times, self.fidelities):
            buf.write(f"{t:.12g},{f:.12g}\n")
        return buf.getvalue()


def lindblad_rhs(model: Model, h_eff: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``-i (H_eff rho - rho H_eff^dag) + sum kappa a rho a^dag`` for Hermitian rho."""
    x = h_eff @ rho
    out = -1j * (x - x.conj().T)
    for factor, a, kappa in model.jumps:
        y = apply_local(a, rho, model.dims, factor, "left")
        y = apply_local(a.conj().T, y, model.dims, factor, "right")
        out += kappa * y
    return out


def _rk4(model: Model, h_eff: np.ndarray, rho: np.ndarray, duration: float, dt_max: float) -> np.ndarray:
    if duration <= 0:
        return rho
    steps = max(1, math.ceil(duration / dt_max - 1e-9))
    h = duration / steps
    for _ in range(steps):
        k1 = lindblad_rhs(model, h_eff, rho)
        k2 = lindblad_rhs(model, h_eff, rho + 0.5 * h * k1)
        k3 = lindblad_rhs(model, h_eff, rho + 0.5 * h * k2)
        k4 = lindblad_rhs(model, h_eff, rho + h * k3)
        rho = rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return rho


def evolve(config: SimulationConfig, timeline: PulseTimeline | None = None) -> FidelityTrace:
    """Integrate the master equation along the pulse timeline and record fidelities.

    Samples are taken at every cycle boundary and at ``config.samples + 1``
    uniform times. Fidelity is ``sqrt(<psi|rho_S|psi>)`` with ``rho_S`` the
    qubit state after tracing out the modes.
    """
    model = build_model(config)
    if timeline is None:
        timeline = build_timeline(config, model.cycle)
    t_final = timeline.duration
    psi = initial_system_state(config, model.n_sites)
    vac = np.zeros(model.mode_dim, dtype=complex)
    vac[0] = 1
    state = np.kron(psi, vac)
    rho = np.outer(state, state.conj())

    uniform = np.linspace(0.0, t_final, config.samples + 1)
    boundary_set = {round(b, 12) for b in timeline.boundaries}
    sample_times = sorted({round(t, 12) for t in uniform} | boundary_set)
    base_dt = config.step
    h_free = model.effective(model.hamiltonian)
    effective_cache = {}

    qubit_factors = range(model.n_sites)
    times, fids, flags = [], [], []
    worst_eig, worst_trace = 0.0, 0.0

    def record(t):
        nonlocal worst_eig, worst_trace
        tr = float(np.real(np.trace(rho)))
        worst_trace = max(worst_trace, abs(tr - 1))
        if abs(tr - 1) > TRACE_TOL:
            raise IntegratorError(f"trace drifted to {tr:.9f} at t={t:.6g}")
        rho_s = partial_trace(rho, model.dims, qubit_factors)
        eig = float(np.linalg.eigvalsh(0.5 * (rho_s + rho_s.conj().T)).min())
        worst_eig = min(worst_eig, eig)
        if eig < -NEGATIVITY_TOL:
            raise IntegratorError(f"reduced state eigenvalue {eig:.3e} at t={t:.6g}")
        times.append(t)
        fids.append(state_fidelity(psi, rho_s))
        flags.append(round(t, 12) in boundary_set)

    pending = iter(sample_times)
    next_sample = next(pending)
    if next_sample == 0.0:
        record(0.0)
        next_sample = next(pending, None)

    t = 0.0
    events = timeline.events
    for k, ev in enumerate(events):
        if ev.kind == "pulse":
            rho = conjugate(rho, ev.permutation.inverse(), model.mode_dim)
            continue
        if ev.kind == "free":
            h_eff, dt_max = h_free, base_dt
        else:
            key = (ev.layer, ev.coupling)
            if key not in effective_cache:
                effective_cache[key] = h_free + model.control(ev.layer, ev.coupling)
            h_eff = effective_cache[key]
            dt_max = min(base_dt, 0.02 / ev.coupling)
        end = ev.end
        while next_sample is not None and next_sample <= end + 1e-12:
            rho = _rk4(model, h_eff, rho, next_sample - t, dt_max)
            t = next_sample
            # a sample exactly at a pulse instant is taken after the pulse
            pulse_next = k + 1 < len(events) and events[k + 1].kind == "pulse" and abs(events[k + 1].start - t) < 1e-12
            if not pulse_next:
                record(t)
                next_sample = next(pending, None)
            else:
                break
        rho = _rk4(model, h_eff, rho, end - t, dt_max)
        t = end
    while next_sample is not None:
        record(t)
        next_sample = next(pending, None)
    return FidelityTrace(
        np.array(times),
        np.array(fids),
        np.array(flags, dtype=bool),
        config.fingerprint(),
        worst_eig,
        worst_trace,
    )


@dataclass(frozen=True)
class ScheduleRow:
    tau: float
    periodic: float
    concatenated: float
    horizon: float

    @property
    def periodic_higher(self) -> bool:
        return self.periodic > self.concatenated


#: Reference final fidelities (concatenated, periodic) keyed by 1/tau.
REFERENCE_FINALS = {20: (0.999745, 0.999765), 100: (0.999895, 0.999896), 250: (0.999901, 0.999900)}


def compare_schedules(base: SimulationConfig, taus: Sequence[float], supercycles: int = 1) -> list[ScheduleRow]:
    """Final fidelity of periodic vs concatenated ideal-pulse decoupling.

    Both schedules cover the same horizon: ``supercycles`` concatenated
    super-cycles of ``m**2 tau``, or ``m * supercycles`` periodic cycles.
    """
    if base.pulse_mode != IDEAL:
        raise ValidationError("schedule comparison uses ideal pulses")
    cycle = make_cycle(base.cycle, base.n_qubits)
    m = cycle.intervals
    rows = []
    for tau in taus:
        horizon = supercycles * m * m * tau
        runs = {}
        for schedule in ("periodic", "concatenated"):
            cfg = replace(base, tau=tau, schedule=schedule, t_final=horizon, samples=min(base.samples, 16))
            runs[schedule] = evolve(cfg).final
        rows.append(ScheduleRow(tau, runs["periodic"], runs["concatenated"], horizon))
    return rows


@dataclass(frozen=True)
class CycleRow:
    mode: str
    optimal: float
    original: float
    t_final: float
    tau_optimal: float
    tau_original: float

    @property
    def optimal_higher(self) -> bool:
        return self.optimal >= self.original


def _common_multiple(a: float, b: float, at_least: float) -> float:
    fa = Fraction(a).limit_denominator(10**6)
    fb = Fraction(b).limit_denominator(10**6)
    lcm = Fraction(math.lcm(fa.numerator * fb.denominator, fb.numerator * fa.denominator), fa.denominator * fb.denominator)
    k = max(1, math.ceil(at_least / lcm - 1e-9))
    return float(k * lcm)


def compare_cycles(base: SimulationConfig, reference_coupling: float = REFERENCE_COUPLING) -> list[CycleRow]:
    """Optimal four-qubit cycle against the one-exchange-at-a-time original.

    Every exchange layer takes ``pi / (4 J)`` at the reference coupling, so
    each scheme's interval is its layers-per-pulse times that window and
    the pulses run back to back. Ideal runs keep the same intervals. Both
    schemes are run to the first common multiple of their cycle durations
    at or after ``base.t_final``.
    """
    window = exchange_window(reference_coupling)
    cycles = {"optimal": make_cycle("optimal", 4), "original4": make_cycle("original4", 4)}
    taus = {k: max(len(p) for p in c.all_pulses) * window for k, c in cycles.items()}
    t_final = _common_multiple(4 * taus["optimal"], 4 * taus["original4"], base.t_final)
    rows = []
    for mode in (FINITE, IDEAL):
        finals = {}
        for kind, tau in taus.items():
            cfg = replace(
                base,
                n_qubits=4,
                cycle=kind,
                schedule="periodic",
                tau=tau,
                pulse_mode=mode,
                coupling=reference_coupling,
                t_final=t_final,
            )
            finals[kind] = evolve(cfg).final
        rows.append(CycleRow(mode, finals["optimal"], finals["original4"], t_final, taus["optimal"], taus["original4"]))
    return rows


def exchange_counts(kind: str, n: int) -> dict:
    c = make_cycle(kind, n)
    s = step_count(c)
    return {"intervals": c.intervals, **asdict(s)}


def simulate_dephasing(
    strength: float, rate: float, times: Sequence[float], n_max: int = 2, omega: float = 1.0
) -> np.ndarray:
    """Pseudomode simulation of the normalized coherence of one qubit under ``sigma_z`` coupling."""
    config = SimulationConfig(
        n_qubits=1,
        omega=omega,
        baths=[BathSpec("z", strength, rate, n_max)],
        cycle="none",
        tau=max(times[-1], 1e-3),
        t_final=max(times[-1], 1e-3),
        initial_state=[1, 1],
    )
    model = build_model(config)
    plus = np.array([1, 1], dtype=complex) / math.sqrt(2)
    vac = np.zeros(model.mode_dim, dtype=complex)
    vac[0] = 1
    state = np.kron(plus, vac)
    rho = np.outer(state, state.conj())
    h_eff = model.effective(model.hamiltonian)
    dt = min(0.005 / omega, config.step)
    out, t = [], 0.0
    for tk in times:
        rho = _rk4(model, h_eff, rho, tk - t, dt)
        t = tk
        rho_s = partial_trace(rho, model.dims, [0])
        out.append(2 * abs(rho_s[0, 1]))
    return np.array(out)
