"""Decoupling cycles built from two-qubit exchanges, and their schedules.

A cycle is a list of cumulative controller values ``g_0 = I, g_1, ...,
g_{m-1}`` held for equal intervals, together with the pulses that move the
register from one controller to the next. Each pulse is a list of layers;
a layer is a set of disjoint exchanges ``(i, j)`` that fire together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import SchedulingError, ValidationError
from .qubit_ops import QubitPermutation

Pair = tuple[int, int]
Layer = tuple[Pair, ...]
Pulse = tuple[Layer, ...]

IDEAL = "ideal"
FINITE = "finite"


def _pair(i: int, j: int) -> Pair:
    return (min(i, j), max(i, j))


def layer_permutation(n: int, layer: Iterable[Pair]) -> QubitPermutation:
    layer = tuple(layer)
    sites = [s for pair in layer for s in pair]
    if len(sites) != len(set(sites)):
        raise ValidationError(f"layer {layer} reuses a site")
    return QubitPermutation.from_pairs(n, layer)


def pulse_permutation(n: int, pulse: Pulse) -> QubitPermutation:
    """Net permutation of a pulse; its first layer acts first."""
    p = QubitPermutation.identity(n)
    for layer in pulse:
        p = layer_permutation(n, layer) * p
    return p


def involution_layers(p: QubitPermutation) -> Pulse:
    """Write ``p`` as at most two layers of disjoint exchanges.

    Every k-cycle ``c_0 -> c_1 -> ... -> c_{k-1}`` is the product of the
    reflections ``c_j <-> c_{-j}`` followed by ``c_j <-> c_{1-j}``.
    """
    first, second = [], []
    for c in p.cycles():
        k = len(c)
        for j in range(k):
            a, b = j, (-j) % k
            if a < b:
                first.append(_pair(c[a], c[b]))
            a, b = j, (1 - j) % k
            if a < b:
                second.append(_pair(c[a], c[b]))
    return tuple(layer for layer in (tuple(first), tuple(second)) if layer)


@dataclass(frozen=True)
class DecouplingCycle:
    """One state-transfer cycle.

    ``pulses[k]`` takes controller ``g_k`` to ``g_{k+1}``; ``closing_pulse``
    takes ``g_{m-1}`` back to the identity.
    """

    name: str
    n_qubits: int
    controllers: tuple[QubitPermutation, ...]
    pulses: tuple[Pulse, ...]
    closing_pulse: Pulse
    ancilla: bool = False

    def __post_init__(self):
        if not self.controllers or not self.controllers[0].is_identity():
            raise ValidationError("first controller must be the identity")
        if len(self.pulses) != len(self.controllers) - 1:
            raise ValidationError("need exactly one pulse between adjacent controllers")
        for k, pulse in enumerate(self.pulses):
            step = pulse_permutation(self.n_qubits, pulse)
            if step * self.controllers[k] != self.controllers[k + 1]:
                raise ValidationError(f"pulse {k} does not produce controller {k + 1}")
        closing = pulse_permutation(self.n_qubits, self.closing_pulse)
        if not (closing * self.controllers[-1]).is_identity():
            raise ValidationError("closing pulse does not return to the identity")

    @property
    def intervals(self) -> int:
        return len(self.controllers)

    @property
    def n_logical(self) -> int:
        return self.n_qubits - 1 if self.ancilla else self.n_qubits

    @property
    def all_pulses(self) -> tuple[Pulse, ...]:
        return self.pulses + (self.closing_pulse,)

    def pulse_lookup(self) -> dict[QubitPermutation, Pulse]:
        table = {}
        for pulse in self.all_pulses:
            table.setdefault(pulse_permutation(self.n_qubits, pulse), pulse)
        return table

    def is_group(self) -> bool:
        """Whether the controller set is closed under composition and inverse."""
        members = set(self.controllers)
        return all(a * b in members for a in members for b in members) and all(
            a.inverse() in members for a in members
        )

    def visits_every_site_once(self) -> bool:
        """Track labelled states: each must occupy every site exactly once."""
        n = self.n_qubits
        for site in range(1, n + 1):
            if sorted(g(site) for g in self.controllers) != list(range(1, n + 1)):
                return False
        return True


def optimal_cycle(n: int) -> DecouplingCycle:
    """Nearest-neighbour brick-wall cycle of alternating layers P1 and P2.

    ``P1 = E12 E34 ...`` and ``P2 = E23 E45 ... E_{N,1}``. An odd register
    gets an ancilla appended as the last site, giving ``n + 1`` intervals.
    """
    if n < 2:
        raise ValidationError("optimal_cycle needs at least two qubits")
    ancilla = n % 2 == 1
    s = n + 1 if ancilla else n
    p1 = tuple(_pair(i, i + 1) for i in range(1, s, 2))
    p2 = tuple(_pair(i, i + 1) for i in range(2, s - 1, 2)) + (_pair(s, 1),)
    layers = [p1, p2]
    controllers = [QubitPermutation.identity(s)]
    pulses = []
    for k in range(s - 1):
        pulse = (layers[k % 2],)
        pulses.append(pulse)
        controllers.append(pulse_permutation(s, pulse) * controllers[-1])
    closing = (layers[(s - 1) % 2],)
    return DecouplingCycle("optimal", s, tuple(controllers), tuple(pulses), closing, ancilla)


def cyclic_cycle(n: int) -> DecouplingCycle:
    """Powers of the ring shift ``P0 = (1, 2, ..., N)``.

    Each shift is realized sequentially as ``E_{1,N} ... E_{1,3} E_{1,2}``.
    """
    if n < 2:
        raise ValidationError("cyclic_cycle needs at least two qubits")
    shift = tuple(((1, j),) for j in range(2, n + 1))
    p0 = QubitPermutation.cycle(n, *range(1, n + 1))
    controllers = tuple(p0**k for k in range(n))
    return DecouplingCycle("cyclic", n, controllers, (shift,) * (n - 1), shift)


def original_cycle_4() -> DecouplingCycle:
    """Four-qubit ring shift realized as E12 E23 E34, one exchange at a time."""
    shift = (((3, 4),), ((2, 3),), ((1, 2),))
    p0 = QubitPermutation.cycle(4, 1, 2, 3, 4)
    controllers = tuple(p0**k for k in range(4))
    return DecouplingCycle("original4", 4, controllers, (shift,) * 3, shift)


CYCLE_KINDS = ("optimal", "cyclic", "original4")


def make_cycle(kind: str, n: int) -> DecouplingCycle:
    if kind == "optimal":
        return optimal_cycle(n)
    if kind == "cyclic":
        return cyclic_cycle(n)
    if kind == "original4":
        if n != 4:
            raise ValidationError("the original scheme is defined for four qubits only")
        return original_cycle_4()
    raise ValidationError(f"unknown cycle kind {kind!r}")


@dataclass(frozen=True)
class MoveCount:
    ops: int
    moves: int
    n_sites: int

    @property
    def closes_with_all_moves(self) -> bool:
        return self.moves == self.n_sites**2

    @property
    def meets_lower_bound(self) -> bool:
        return self.ops >= self.n_sites

    @property
    def is_optimal(self) -> bool:
        return self.closes_with_all_moves and self.ops == self.n_sites


def move_count(cycle: DecouplingCycle) -> MoveCount:
    """Permutation operators used per cycle and the state relocations they make.

    Each operator moves at most ``n`` states while a full cycle needs
    ``n**2`` moves, so at least ``n`` operators are required.
    """
    perms = [pulse_permutation(cycle.n_qubits, p) for p in cycle.all_pulses]
    return MoveCount(len(perms), sum(p.moved() for p in perms), cycle.n_qubits)


@dataclass(frozen=True)
class StepCount:
    """Gate accounting for one cycle.

    ``parallel_steps`` counts sequential exchange layers over the closed
    cycle. ``controller_exchanges`` counts the exchanges needed to step
    through the controller values, leaving out the closing pulse.
    """

    parallel_steps: int
    total_exchanges: int
    controller_exchanges: int
    closing_exchanges: int


def step_count(cycle: DecouplingCycle) -> StepCount:
    def exchanges(pulse):
        return sum(len(layer) for layer in pulse)

    return StepCount(
        parallel_steps=sum(len(p) for p in cycle.all_pulses),
        total_exchanges=sum(exchanges(p) for p in cycle.all_pulses),
        controller_exchanges=sum(exchanges(p) for p in cycle.pulses),
        closing_exchanges=exchanges(cycle.closing_pulse),
    )


# --- timelines -------------------------------------------------------------


@dataclass(frozen=True)
class Event:
    """One timeline entry.

    ``kind`` is ``"free"`` (evolution under the bare Hamiltonian),
    ``"pulse"`` (instantaneous permutation, zero duration) or
    ``"control"`` (exchange coupling ``J`` switched on for ``duration``
    on every pair of ``layer``).
    """

    start: float
    kind: str
    duration: float = 0.0
    permutation: QubitPermutation | None = None
    layer: Layer = ()
    coupling: float = 0.0

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class PulseTimeline:
    n_qubits: int
    events: tuple[Event, ...]
    duration: float
    boundaries: tuple[float, ...] = field(default=())
    generator: str = "heisenberg"

    def net_permutation(self) -> QubitPermutation:
        """Product of all permutations the timeline applies, in time order."""
        net = QubitPermutation.identity(self.n_qubits)
        for ev in self.events:
            if ev.kind == "pulse":
                net = ev.permutation * net
            elif ev.kind == "control":
                net = layer_permutation(self.n_qubits, ev.layer) * net
        return net

    def pulse_count(self) -> int:
        return sum(ev.kind in ("pulse", "control") for ev in self.events)

    def dumps(self) -> str:
        """Line-oriented text dump: ``start kind payload`` per event."""
        lines = [f"# n_qubits={self.n_qubits} duration={self.duration:.12g}"]
        for ev in self.events:
            if ev.kind == "free":
                payload = f"{ev.duration:.12g}"
            elif ev.kind == "pulse":
                payload = str(ev.permutation)
            else:
                pairs = ",".join(f"{i}-{j}" for i, j in ev.layer)
                payload = f"{pairs} J={ev.coupling:.12g} dur={ev.duration:.12g}"
            lines.append(f"{ev.start:.12g} {ev.kind} {payload}")
        for b in self.boundaries:
            lines.append(f"{b:.12g} boundary")
        return "\n".join(lines) + "\n"


def exchange_window(coupling: float) -> float:
    """Duration of a rectangular exchange pulse with area pi/4."""
    if coupling <= 0:
        raise ValidationError("exchange coupling must be positive")
    return math.pi / (4 * coupling)


def frames_timeline(
    frames: Sequence[QubitPermutation],
    tau: float,
    mode: str = IDEAL,
    coupling: float | None = None,
    lookup: dict[QubitPermutation, Pulse] | None = None,
    generator: str = "heisenberg",
) -> PulseTimeline:
    """Timeline holding each frame for ``tau``, with pulses in between.

    Finite-strength pulses end exactly at the nominal switching instant, so
    the register is back in its home frame at every boundary. A final
    pulse returns the last frame to the identity.
    """
    if tau <= 0:
        raise ValidationError("pulse interval must be positive")
    if not frames or not frames[0].is_identity():
        raise ValidationError("timelines start in the identity frame")
    if mode not in (IDEAL, FINITE):
        raise ValidationError(f"unknown pulse mode {mode!r}")
    n = frames[0].n
    window = exchange_window(coupling) if mode == FINITE else 0.0
    lookup = lookup or {}
    events: list[Event] = []
    boundaries = []
    t = 0.0
    for k, frame in enumerate(frames):
        nxt = frames[k + 1] if k + 1 < len(frames) else QubitPermutation.identity(n)
        step = nxt * frame.inverse()
        end = (k + 1) * tau
        if step.is_identity():
            events.append(Event(t, "free", end - t))
        elif mode == IDEAL:
            events.append(Event(t, "free", end - t))
            events.append(Event(end, "pulse", permutation=step))
        else:
            layers = lookup.get(step) or involution_layers(step)
            busy = len(layers) * window
            if busy > tau * (1 + 1e-12):
                raise SchedulingError(
                    f"{len(layers)} exchange layers of {window:.4g} do not fit in tau={tau:.4g}"
                )
            free = tau - busy
            if free > 1e-12 * tau:
                events.append(Event(t, "free", free))
            else:
                free = 0.0
            start = t + free
            for j, layer in enumerate(layers):
                events.append(Event(start + j * window, "control", window, layer=layer, coupling=coupling))
        if nxt.is_identity():
            boundaries.append(end)
        t = end
    events = _merge_free(events)
    return PulseTimeline(n, tuple(events), len(frames) * tau, tuple(boundaries), generator)


def _merge_free(events: list[Event]) -> list[Event]:
    out: list[Event] = []
    for ev in events:
        if ev.kind == "free" and out and out[-1].kind == "free":
            prev = out.pop()
            ev = Event(prev.start, "free", prev.duration + ev.duration)
        out.append(ev)
    return out


def schedule_periodic(
    cycle: DecouplingCycle,
    repeats: int,
    tau: float,
    mode: str = IDEAL,
    coupling: float | None = None,
    generator: str = "heisenberg",
) -> PulseTimeline:
    """``repeats`` back-to-back copies of the cycle."""
    if repeats < 1:
        raise ValidationError("need at least one repetition")
    frames = list(cycle.controllers) * repeats
    return frames_timeline(frames, tau, mode, coupling, cycle.pulse_lookup(), generator)


def concatenated_frames(cycle: DecouplingCycle) -> list[QubitPermutation]:
    """Frames of ``prod_k g_k^dag U_0(T) g_k``: block k holds ``g_j g_k`` for each j."""
    gs = cycle.controllers
    return [gj * gk for gk in gs for gj in gs]


def schedule_concatenated(
    cycle: DecouplingCycle,
    tau: float,
    mode: str = IDEAL,
    coupling: float | None = None,
    repeats: int = 1,
    generator: str = "heisenberg",
) -> PulseTimeline:
    """One level of concatenation: the cycle conjugated by each of its controllers.

    Adjacent pulses at block edges merge into a single permutation. Total
    duration is ``repeats * m**2 * tau``.
    """
    if repeats < 1:
        raise ValidationError("need at least one repetition")
    frames = concatenated_frames(cycle) * repeats
    return frames_timeline(frames, tau, mode, coupling, cycle.pulse_lookup(), generator)


def free_timeline(n_qubits: int, duration: float) -> PulseTimeline:
    """No control at all."""
    return PulseTimeline(n_qubits, (Event(0.0, "free", duration),), duration, ())
