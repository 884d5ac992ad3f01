import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import FROZEN
from pedsim.engine import (
    InvariantCounts,
    SimulationState,
    check_invariants,
    confine,
    initial_state,
    reference_step,
    run,
    step,
)
from pedsim.errors import ContractViolation, IntegrationDivergedError
from pedsim.forces import PedestrianState, WallSegment
from pedsim.params import builtin_parameter_set
from pedsim.scenario import build_bottleneck_scenario

P0 = builtin_parameter_set("P0")
# total time of the baseline crowd at 1.0 m, seed 1, pinned from one run
REGRESSION_TOTAL_TIME = 41.17869032215795


def lone_state(x, y, vx=0.0, vy=0.0, v0=1.34, width=0.8, exited=False):
    s = build_bottleneck_scenario(width)
    q = PedestrianState(0, (x, y), (vx, vy), v0, 0.15, exited=exited)
    return SimulationState.from_pedestrians(s, P0, [q], dt=0.05, seed=1)


def test_single_step_from_rest():
    new = step(lone_state(-2.5, 0.0))
    assert new.vel[0] == pytest.approx([FROZEN["step_vx"], 0.0], abs=1e-12)
    assert new.pos[0, 0] - (-2.5) == pytest.approx(FROZEN["step_dx"], abs=1e-12)
    assert new.time == 0.05


def test_step_leaves_input_untouched():
    old = lone_state(-2.5, 0.0)
    step(old)
    assert old.step_count == 0 and np.all(old.vel == 0.0)


def test_passage_time_interpolated():
    st0 = lone_state(0.39, 0.0, vx=0.4, v0=0.4)
    st0.step_count = 10
    new = step(st0)
    assert new.pos[0, 0] == pytest.approx(0.41, abs=1e-12)
    assert new.passage[0] == pytest.approx(0.5 + 0.5 * 0.05, abs=1e-12)


def test_exited_pedestrian_is_frozen():
    old = lone_state(3.0, 0.0, vx=1.0, exited=True)
    new = step(old)
    assert np.all(new.pos == old.pos) and np.all(new.vel == old.vel)
    assert not new.active[0]


def test_removal_after_removal_line():
    new = step(lone_state(1.39, 0.0, vx=1.0, v0=1.0))
    assert not new.active[0]


def test_non_finite_state_diverges():
    st0 = lone_state(-2.5, 0.0)
    st0.vel[0] = (math.inf, 0.0)
    with pytest.raises(IntegrationDivergedError) as info:
        step(st0)
    assert info.value.ped_id == 0 and info.value.step == 0


def test_step_rejects_bad_dt():
    with pytest.raises(ContractViolation):
        step(lone_state(-2.5, 0.0), dt=0.0)


def test_speed_clamp():
    new = step(lone_state(-2.5, 0.0, vx=3.0))
    assert math.hypot(*new.vel[0]) <= 1.3 * 1.34 + 1e-12


def test_lone_walker_completes():
    r = run(build_bottleneck_scenario(1.0), P0, 1, 1)
    assert r.completed and len(r.passage_times) == 1


def test_baseline_crowd_regression():
    r = run(build_bottleneck_scenario(1.0), P0, 100, 1, parameter_set="P0")
    assert r.completed
    assert len(r.passage_times) == 100
    assert list(r.passage_times) == sorted(r.passage_times)
    assert max(r.passage_times) == REGRESSION_TOTAL_TIME


def test_run_is_deterministic():
    s = build_bottleneck_scenario(0.5)
    a = run(s, P0, 40, 9)
    b = run(s, P0, 40, 9)
    assert a.passage_times == b.passage_times and a.steps == b.steps


def test_short_horizon_gives_incomplete_run():
    r = run(build_bottleneck_scenario(0.6), P0, 30, 2, t_max=3.0)
    assert not r.completed
    assert len(r.passage_times) < 30


def test_invariants_hold_during_a_run():
    r = run(build_bottleneck_scenario(0.4), builtin_parameter_set("P7"), 60, 4, invariants=True)
    assert r.invariants.total == 0


def test_invariant_checker_detects_penetration_and_speeding():
    st0 = lone_state(-1.0, 1.99, vx=5.0)
    counts = InvariantCounts()
    st0.pos[0] = (-1.0, 2.2)
    check_invariants(st0, counts)
    assert counts.wall_penetrations == 1 and counts.speed_excesses == 1


@pytest.mark.parametrize("set_id,width", [("P0", 0.6), ("P5", 0.4), ("P3", 1.0)])
def test_compiled_step_matches_reference(set_id, width):
    s = build_bottleneck_scenario(width)
    fast = initial_state(s, builtin_parameter_set(set_id), 100, 17)
    slow = fast.copy()
    for _ in range(40):
        fast = step(fast)
        slow = reference_step(slow)
        np.testing.assert_allclose(fast.pos, slow.pos, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(fast.vel, slow.vel, rtol=1e-9, atol=1e-12)
        assert np.array_equal(fast.active, slow.active)


def test_time_is_step_count_times_dt():
    st0 = initial_state(build_bottleneck_scenario(0.8), P0, 20, 3, dt=0.025)
    for k in range(1, 30):
        st0 = step(st0)
        assert st0.time == k * 0.025
        assert st0.step_count == k


def test_confine_projects_center_back():
    wall = WallSegment((0.0, 0.0), (0.0, 4.0), (-1.0, 0.0), 0.4)
    x, v = confine((0.1, 1.0), (0.5, 0.2), 0.15, [wall])
    assert x == pytest.approx([0.0, 1.0])
    assert v == pytest.approx([0.0, 0.2])


def test_confine_leaves_walkable_side_alone():
    wall = WallSegment((0.0, 0.0), (0.0, 4.0), (-1.0, 0.0), 0.4)
    x, v = confine((-0.1, 1.0), (0.5, 0.2), 0.15, [wall])
    assert x == pytest.approx([-0.1, 1.0]) and v == pytest.approx([0.5, 0.2])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0.4, 0.6, 1.0]), st.sampled_from(["P0", "P2", "P3", "P7"]))
def test_bounds_and_conservation_over_short_runs(seed, width, set_id):
    p = builtin_parameter_set(set_id)
    state = initial_state(build_bottleneck_scenario(width), p, 30, seed)
    counts = InvariantCounts()
    passed_before = np.zeros(30, dtype=bool)
    times_before = state.passage.copy()
    for _ in range(60):
        state = step(state)
        check_invariants(state, counts)
        speed = np.hypot(state.vel[:, 0], state.vel[:, 1])
        assert np.all(speed <= p.v_max_factor * state.desired_speed + 1e-12)
        passed = ~np.isnan(state.passage)
        # passage times are assigned once and never change
        assert np.all(passed[passed_before])
        assert np.array_equal(state.passage[passed_before], times_before[passed_before])
        passed_before, times_before = passed, state.passage.copy()
    assert counts.total == 0
