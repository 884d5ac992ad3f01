import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import FROZEN
from pedsim.errors import ConfigurationError, ContractViolation, DensityInfeasibleError
from pedsim.forces import PedestrianState
from pedsim.params import builtin_parameter_set
from pedsim.scenario import GeometryConfig, build_bottleneck_scenario, desired_direction, spawn_pedestrians

P0 = builtin_parameter_set("P0")
TOL_DEPTH = 1e-6


def at(x, y, radius=0.15):
    return PedestrianState(id=0, position=(x, y), velocity=(0, 0), desired_speed=1.34, radius=radius)


def test_width_0_8_geometry():
    s = build_bottleneck_scenario(0.8)
    assert s.opening_segment == ((0.0, -0.4), (0.0, 0.4))
    passage = {(w.a, w.b) for w in s.walls if w.a[1] == w.b[1] and abs(w.a[1]) == 0.4}
    assert passage == {((0.0, 0.4), (0.4, 0.4)), ((0.0, -0.4), (0.4, -0.4))}
    assert s.measurement_line == 0.4
    assert s.removal_line == pytest.approx(1.4)
    assert not s.impassable


def test_width_0_4_geometry():
    s = build_bottleneck_scenario(0.4)
    assert s.opening_segment == ((0.0, -0.2), (0.0, 0.2))


def test_corridor_walls_reach_back_of_spawn_region():
    s = build_bottleneck_scenario(1.0)
    corridor = [w for w in s.walls if abs(w.a[1]) == 2.0 and w.a[1] == w.b[1]]
    assert len(corridor) == 2
    x_back = -(2.5 + 100 / 12 + 1.0)
    for w in corridor:
        assert min(w.a[0], w.b[0]) <= x_back and max(w.a[0], w.b[0]) >= 0.0


def test_width_wider_than_corridor_rejected():
    with pytest.raises(ConfigurationError):
        build_bottleneck_scenario(3.9, GeometryConfig(corridor_halfwidth=2.0))


def test_non_positive_width_rejected():
    with pytest.raises(ContractViolation):
        build_bottleneck_scenario(0.0)


def test_narrow_opening_is_flagged_not_rejected():
    assert build_bottleneck_scenario(0.25).impassable


def test_geometry_values_must_be_positive():
    with pytest.raises(ConfigurationError):
        GeometryConfig(spawn_density=0.0)


def test_spawn_depth():
    s = build_bottleneck_scenario(0.8)
    assert GeometryConfig().spawn_depth(100) == pytest.approx(FROZEN["spawn_depth"], abs=TOL_DEPTH)
    r = s.spawn_region
    assert r.x_max == -2.5
    assert r.x_max - r.x_min == pytest.approx(FROZEN["spawn_depth"], abs=TOL_DEPTH)
    assert (r.y_min, r.y_max) == (-2.0, 2.0)


@pytest.mark.parametrize("width", [0.4, 0.6, 1.0])
def test_spawned_crowd_is_clear_and_at_rest(width):
    s = build_bottleneck_scenario(width)
    peds = spawn_pedestrians(s, 100, P0, seed=3)
    assert [q.id for q in peds] == list(range(100))
    pos = np.array([q.position for q in peds])
    r = s.spawn_region
    assert np.all((pos[:, 0] >= r.x_min) & (pos[:, 0] <= r.x_max))
    assert np.all((pos[:, 1] >= r.y_min) & (pos[:, 1] <= r.y_max))
    d = np.hypot(*(pos[:, None, :] - pos[None, :, :]).transpose(2, 0, 1))
    np.fill_diagonal(d, np.inf)
    assert d.min() >= 2 * P0.radius
    assert all(np.all(q.velocity == 0.0) for q in peds)
    assert all(q.desired_speed == 1.34 for q in peds)


def test_spawn_keeps_clear_of_walls():
    s = build_bottleneck_scenario(0.8)
    for q in spawn_pedestrians(s, 100, P0, seed=11):
        assert abs(q.position[1]) <= 2.0 - P0.radius


def test_spawn_is_deterministic():
    s = build_bottleneck_scenario(0.6)
    a = spawn_pedestrians(s, 100, P0, seed=42)
    b = spawn_pedestrians(s, 100, P0, seed=42)
    assert [tuple(q.position) for q in a] == [tuple(q.position) for q in b]
    c = spawn_pedestrians(s, 100, P0, seed=43)
    assert [tuple(q.position) for q in a] != [tuple(q.position) for q in c]


def test_single_pedestrian_spawn():
    peds = spawn_pedestrians(build_bottleneck_scenario(1.0), 1, P0, seed=1)
    assert len(peds) == 1 and np.all(peds[0].velocity == 0.0)


def test_desired_speed_spread():
    p = P0.with_(desired_speed_sd=0.26)
    speeds = [q.desired_speed for q in spawn_pedestrians(build_bottleneck_scenario(1.0), 100, p, seed=5)]
    assert min(speeds) > 0 and len(set(speeds)) > 1


def test_infeasible_density():
    cfg = GeometryConfig(spawn_density=40.0)
    with pytest.raises(DensityInfeasibleError):
        spawn_pedestrians(build_bottleneck_scenario(1.0, cfg), 20, P0, seed=1)


def test_direction_on_axis():
    for width in (0.4, 1.0):
        assert desired_direction(at(-2.5, 0.0), build_bottleneck_scenario(width)) == pytest.approx([1, 0])


def test_direction_downstream():
    assert desired_direction(at(1.0, 0.3), build_bottleneck_scenario(0.8)) == pytest.approx([1, 0])


def test_direction_toward_inset_opening():
    e = desired_direction(at(-2.5, 1.5), build_bottleneck_scenario(0.4))
    assert e == pytest.approx(FROZEN["direction"], abs=1e-6)


def test_direction_inside_passage():
    assert desired_direction(at(0.2, 0.1), build_bottleneck_scenario(0.6)) == pytest.approx([1, 0])


def test_direction_on_flank_face_aims_into_opening():
    # a walker pressed against the flank at x = 0 must still be led sideways
    e = desired_direction(at(0.0, 0.8), build_bottleneck_scenario(0.6))
    assert e[0] == pytest.approx(0.0, abs=1e-12)
    assert e[1] == pytest.approx(-1.0)


@settings(max_examples=500)
@given(
    st.floats(-15, 3, allow_nan=False),
    st.floats(-2, 2, allow_nan=False),
    st.sampled_from([0.25, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0]),
)
def test_direction_is_unit(x, y, width):
    e = desired_direction(at(x, y), build_bottleneck_scenario(width))
    assert math.hypot(*e) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("width", [0.4, 0.5, 0.6, 0.7, 0.8, 1.0])
def test_geometry_symmetric_about_axis(width):
    s = build_bottleneck_scenario(width)

    def mirror(w):
        pts = frozenset({(w.a[0], -w.a[1]), (w.b[0], -w.b[1])})
        side = None if w.outward_side is None else (w.outward_side[0], -w.outward_side[1])
        return pts, side, w.thickness

    def key(w):
        return frozenset({tuple(w.a), tuple(w.b)}), w.outward_side, w.thickness

    assert {key(w) for w in s.walls} == {mirror(w) for w in s.walls}
    r = s.spawn_region
    assert r.y_min == -r.y_max


@settings(max_examples=200)
@given(st.floats(-5, 0, allow_nan=False), st.floats(-2, 2, allow_nan=False))
def test_direction_mirrors_with_position(x, y):
    s = build_bottleneck_scenario(0.6)
    a, b = desired_direction(at(x, y), s), desired_direction(at(x, -y), s)
    assert a[0] == pytest.approx(b[0], abs=1e-12)
    assert a[1] == pytest.approx(-b[1], abs=1e-12)
