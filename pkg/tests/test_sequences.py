import math

import pytest

from dfsdd.errors import SchedulingError, ValidationError
from dfsdd.qubit_ops import QubitPermutation
from dfsdd.sequences import (
    FINITE,
    IDEAL,
    DecouplingCycle,
    concatenated_frames,
    cyclic_cycle,
    exchange_window,
    frames_timeline,
    involution_layers,
    layer_permutation,
    make_cycle,
    move_count,
    optimal_cycle,
    original_cycle_4,
    pulse_permutation,
    schedule_concatenated,
    schedule_periodic,
    step_count,
)


def track_sites(cycle):
    """Follow each labelled state through the pulses by hand."""
    n = cycle.n_qubits
    where = {s: s for s in range(1, n + 1)}
    history = [dict(where)]
    for pulse in cycle.pulses:
        for layer in pulse:
            for i, j in layer:
                for s, pos in where.items():
                    if pos == i:
                        where[s] = j
                    elif pos == j:
                        where[s] = i
        history.append(dict(where))
    return history


@pytest.mark.parametrize("n", range(2, 9))
def test_optimal_visits_every_site_once(n):
    c = optimal_cycle(n)
    assert c.visits_every_site_once()
    assert c.is_group()
    # independent site tracking agrees with the controller list
    for g, where in zip(c.controllers, track_sites(c)):
        assert all(g(s) == where[s] for s in where)


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_optimal_even_uses_n_steps(n):
    c = optimal_cycle(n)
    assert not c.ancilla
    assert c.intervals == n
    assert step_count(c).parallel_steps == n


@pytest.mark.parametrize("n", [3, 5, 7])
def test_optimal_odd_adds_ancilla(n):
    c = optimal_cycle(n)
    assert c.ancilla and c.n_qubits == n + 1 and c.n_logical == n
    assert step_count(c).parallel_steps == n + 1


def test_optimal_four_structure():
    c = optimal_cycle(4)
    assert c.pulses[0] == (((1, 2), (3, 4)),)
    assert step_count(c).total_exchanges == 8
    assert [str(g) for g in c.controllers] == ["()", "(1,2)(3,4)", "(1,3)(2,4)", "(1,4)(2,3)"]


@pytest.mark.parametrize("n", [4, 6, 8])
def test_cyclic_uses_squared_steps(n):
    c = cyclic_cycle(n)
    assert step_count(c).controller_exchanges == (n - 1) ** 2
    assert c.visits_every_site_once()


def test_original_four():
    c = original_cycle_4()
    assert step_count(c).controller_exchanges == 9
    assert all(len(layer) == 1 for p in c.all_pulses for layer in p)
    assert c.visits_every_site_once()


def test_move_count_lower_bound():
    for n in (2, 4, 6):
        mc = move_count(optimal_cycle(n))
        assert mc.ops == n and mc.moves == n * n
        assert mc.meets_lower_bound and mc.is_optimal


def test_make_cycle_validation():
    with pytest.raises(ValidationError):
        make_cycle("random", 4)
    with pytest.raises(ValidationError):
        make_cycle("original4", 6)
    with pytest.raises(ValidationError):
        optimal_cycle(1)


def test_cycle_invariants_checked():
    ident = QubitPermutation.identity(2)
    swap = QubitPermutation.transposition(2, 1, 2)
    with pytest.raises(ValidationError):
        DecouplingCycle("bad", 2, (ident, swap), ((),), (((1, 2),),))


def test_involution_layers_realize_permutation():
    for sites in [(1, 2, 3), (1, 2, 3, 4, 5), (2, 5, 4)]:
        p = QubitPermutation.cycle(5, *sites)
        layers = involution_layers(p)
        assert len(layers) <= 2
        assert pulse_permutation(5, layers) == p


def test_layer_permutation_rejects_overlap():
    with pytest.raises(ValidationError):
        layer_permutation(3, ((1, 2), (2, 3)))


def test_exchange_window():
    assert exchange_window(math.pi) == pytest.approx(0.25)
    with pytest.raises(ValidationError):
        exchange_window(0.0)


@pytest.mark.parametrize("kind,n", [("optimal", 4), ("optimal", 5), ("cyclic", 4), ("original4", 4)])
@pytest.mark.parametrize("mode", [IDEAL, FINITE])
def test_periodic_timeline_closes(kind, n, mode):
    c = make_cycle(kind, n)
    layers = max(len(p) for p in c.all_pulses)
    tau = layers * exchange_window(math.pi) * 1.5
    tl = schedule_periodic(c, 2, tau, mode, math.pi)
    assert tl.net_permutation().is_identity()
    assert tl.duration == pytest.approx(2 * c.intervals * tau)
    assert tl.boundaries == pytest.approx([c.intervals * tau, 2 * c.intervals * tau])
    starts = [e.start for e in tl.events]
    assert starts == sorted(starts) and min(starts) >= 0


def test_finite_windows_end_on_the_switching_instant():
    c = optimal_cycle(2)
    tl = schedule_periodic(c, 1, 0.5, FINITE, math.pi)
    controls = [e for e in tl.events if e.kind == "control"]
    assert [e.end for e in controls] == pytest.approx([0.5, 1.0])


def test_finite_window_too_long():
    with pytest.raises(SchedulingError):
        schedule_periodic(original_cycle_4(), 1, 0.5, FINITE, math.pi)


def test_concatenated_timeline():
    c = optimal_cycle(4)
    frames = concatenated_frames(c)
    assert len(frames) == 16 and frames[0].is_identity()
    tl = schedule_concatenated(c, 0.1, IDEAL)
    assert tl.net_permutation().is_identity()
    assert tl.duration == pytest.approx(1.6)
    # boundaries are the instants where the register is back in its home frame
    assert tl.boundaries[-1] == pytest.approx(1.6)
    for b in tl.boundaries:
        k = round(b / 0.1)
        assert k == 16 or frames[k].is_identity()
    # adjacent block-edge pulses merge, so there are fewer pulses than frames
    assert tl.pulse_count() <= 16


def test_concatenated_finite_uses_involution_fallback():
    c = optimal_cycle(4)
    tl = schedule_concatenated(c, 0.5, FINITE, math.pi)
    assert tl.net_permutation().is_identity()


def test_timeline_dump_format():
    tl = schedule_periodic(optimal_cycle(2), 1, 0.5, IDEAL)
    text = tl.dumps()
    lines = text.strip().splitlines()
    assert lines[0].startswith("# n_qubits=2")
    assert "pulse (1,2)" in text
    assert lines[-1] == "1 boundary"


def test_frames_timeline_must_start_at_identity():
    p = QubitPermutation.transposition(2, 1, 2)
    with pytest.raises(ValidationError):
        frames_timeline([p], 0.1)
