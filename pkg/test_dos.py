"""Tests for DoS signals."""

import numpy as np
import pytest

from conftest import SCENARIOS
from quantrack.dos import DosBudget, DosSignal, generate_random
from quantrack.errors import DosSignalError


@pytest.fixture
def reference_signal():
    return DosSignal.load(str(SCENARIOS / "ring_dos.txt"), 0.1, 20.0)


def test_interval_membership():
    sig = DosSignal([(0.5, 0.3)], 0.1, 2.0)
    assert sig.is_jammed(5)
    assert sig.is_jammed(7)
    assert not sig.is_jammed(8)
    assert not sig.is_jammed(4)


def test_single_pulse_jams_one_instant():
    sig = DosSignal([(0.5, 0.0)], 0.1, 2.0)
    assert sig.is_jammed(5)
    assert not sig.is_jammed(6)
    assert sig.count_transitions(0.0, 2.0) == 1
    assert sig.duration(0.0, 2.0) == 0.0


def test_queries_outside_horizon_fail():
    sig = DosSignal.empty(0.1, 1.0)
    with pytest.raises(DosSignalError):
        sig.is_jammed(11)
    with pytest.raises(DosSignalError):
        sig.duration(0.5, 1.5)


def test_attack_before_first_sample_is_rejected():
    with pytest.raises(DosSignalError):
        DosSignal([(0.05, 0.2)], 0.1, 2.0)
    with pytest.raises(DosSignalError):
        DosSignal([(0.5, -0.1)], 0.1, 2.0)


def test_overlapping_intervals_merge():
    sig = DosSignal([(1.5, 1.0), (1.0, 1.0)], 0.1, 5.0)
    assert sig.intervals == ((1.0, 1.5),)
    assert len(sig) == 1


def test_reference_signal_counts(reference_signal):
    assert reference_signal.count_transitions(0.0, 20.0) == 42
    assert reference_signal.duration(0.0, 20.0) == pytest.approx(5.7, abs=1e-9)
    budget = reference_signal.averaged_budget()
    assert budget.inv_T == pytest.approx(0.285, abs=1e-9)
    assert budget.total == pytest.approx(0.495, abs=1e-9)


def test_simple_counts():
    empty = DosSignal.empty(0.1, 20.0)
    assert empty.count_transitions(0.0, 20.0) == 0
    assert empty.duration(0.0, 20.0) == 0.0
    assert empty.averaged_budget() == (0.0, 0.0, 0.0)
    one = DosSignal([(1.0, 2.0)], 0.1, 20.0)
    assert one.count_transitions(0.0, 20.0) == 1
    assert one.duration(0.0, 20.0) == pytest.approx(2.0)


def test_generator_hits_target():
    sig = generate_random(0.495, 0.1, 20.0, seed=3)
    assert 0.475 <= sig.averaged_budget().total <= 0.515
    assert generate_random(0.495, 0.1, 20.0, seed=3) == sig
    assert generate_random(0.0, 0.1, 20.0, seed=3).intervals == ()


def test_generator_reproduces_long_robot_attack():
    sig = generate_random(0.836, 0.1, 50.0, seed=2, duty_share=0.7081)
    assert sig.count_transitions(0.0, 50.0) == 122
    assert sig.duration(0.0, 50.0) == pytest.approx(29.6, abs=1e-3)
    assert sig.averaged_budget().total == pytest.approx(0.836, abs=1e-3)


def test_generator_rejects_bad_targets():
    with pytest.raises(DosSignalError):
        generate_random(1.0, 0.1, 20.0, seed=0)
    with pytest.raises(DosSignalError):
        generate_random(-0.1, 0.1, 20.0, seed=0)


def test_measurements_agree_with_rasterized_signal():
    delta, horizon = 0.1, 20.0
    sig = generate_random(0.6, delta, horizon, seed=9)
    dt = delta / 100
    grid = np.arange(int(round(horizon / dt)) + 1) * dt
    jammed = np.zeros_like(grid, dtype=bool)
    for h, tau in sig.intervals:
        jammed |= (grid >= h) & (grid < h + tau)
    starts = np.array([h for h, _ in sig.intervals])
    rng = np.random.default_rng(0)
    for _ in range(50):
        tau, t = np.sort(rng.uniform(delta, horizon, size=2))
        window = (grid >= tau) & (grid < t)
        # each interval edge inside the window costs at most one raster cell
        touching = sum(1 for h, length in sig.intervals if h < t and h + length > tau)
        assert abs(sig.duration(tau, t) - jammed[window].sum() * dt) <= delta / 50 + 2 * touching * dt
        assert sig.count_transitions(tau, t) == int(np.sum((starts >= tau) & (starts <= t)))


def test_minimal_budget_holds_on_every_grid_window(reference_signal):
    sig = reference_signal
    budget = sig.minimal_budget()
    assert isinstance(budget, DosBudget)
    grid = np.arange(sig.steps + 1) * sig.delta
    covered = np.array([sig.duration(0.0, t) for t in grid])
    starts = np.array(sig._starts)
    for i, tau in enumerate(grid):
        for j in range(i, len(grid), 7):
            t = grid[j]
            duration = covered[j] - covered[i]
            onsets = int(np.sum((starts >= tau - 1e-9) & (starts <= t + 1e-9)))
            assert duration <= budget.kappa + (t - tau) / budget.T + 1e-9
            assert onsets <= budget.eta + (t - tau) / budget.tau_D + 1e-9


def test_budget_validation():
    with pytest.raises(DosSignalError):
        DosBudget(eta=0.0, tau_D=0.0, kappa=0.0, T=2.0)
    with pytest.raises(DosSignalError):
        DosBudget(eta=0.0, tau_D=1.0, kappa=0.0, T=1.0)


def test_signal_file_round_trip(tmp_path):
    sig = generate_random(0.3, 0.1, 10.0, seed=4)
    path = tmp_path / "dos.txt"
    sig.save(str(path))
    assert DosSignal.load(str(path), 0.1, 10.0) == sig
    with pytest.raises(DosSignalError):
        DosSignal.from_text("0.5 0.1 0.2\n", 0.1, 10.0)


def test_counters_grow_with_the_window(reference_signal):
    ts = np.linspace(0.0, 20.0, 201)
    durations = [reference_signal.duration(0.0, t) for t in ts]
    counts = [reference_signal.count_transitions(0.0, t) for t in ts]
    assert np.all(np.diff(durations) >= 0)
    assert np.all(np.diff(counts) >= 0)
    assert counts[-1] == reference_signal.count_transitions(0.0, 20.0)
