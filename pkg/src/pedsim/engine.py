"""Time stepping: forces, semi-implicit Euler, speed clamp, passage, removal."""

from __future__ import annotations

import copy
import math
import time as _time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import _kernels
from .errors import ContractViolation, DegenerateGeometryError, IntegrationDivergedError
from .forces import PedestrianState, total_acceleration
from .params import ModelParams
from .scenario import Scenario, spawn_pedestrians
from .spatial_index import build_grid, nearest_k

DEFAULT_DT = 0.05
DEFAULT_T_MAX = 600.0
# Allowed penetration of a center into a wall, as a fraction of the radius.
PENETRATION_TOLERANCE = 0.5

TrajectoryHook = Callable[[float, np.ndarray, np.ndarray, np.ndarray], None]


@dataclass
class InvariantCounts:
    wall_penetrations: int = 0
    speed_excesses: int = 0
    count_mismatches: int = 0

    @property
    def total(self) -> int:
        return self.wall_penetrations + self.speed_excesses + self.count_mismatches


@dataclass
class SimulationState:
    """Array-backed population; index ``k`` is pedestrian id ``k``."""

    scenario: Scenario
    params: ModelParams
    pos: np.ndarray
    vel: np.ndarray
    desired_speed: np.ndarray
    radius: np.ndarray
    active: np.ndarray
    passage: np.ndarray
    step_count: int = 0
    dt: float = DEFAULT_DT
    seed: int | None = None
    # steps each pedestrian has spent below the stall speed
    stall_steps: np.ndarray = field(default=None, repr=False)
    noise_rng: np.random.Generator = field(default=None, repr=False)
    _packed: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self._packed is None:
            self._packed = _kernels.pack_params(self.params)
        if self.stall_steps is None:
            self.stall_steps = np.zeros(self.pos.shape[0], dtype=np.int64)
        if self.noise_rng is None:
            # separate stream from the one used for spawning
            self.noise_rng = np.random.default_rng([0 if self.seed is None else self.seed, 1])

    @property
    def time(self) -> float:
        return self.step_count * self.dt

    @property
    def n(self) -> int:
        return self.pos.shape[0]

    @classmethod
    def from_pedestrians(cls, scenario, params, peds, dt=DEFAULT_DT, seed=None) -> "SimulationState":
        peds = sorted(peds, key=lambda p: p.id)
        if [p.id for p in peds] != list(range(len(peds))):
            raise ContractViolation("pedestrian ids must be 0..n-1")
        return cls(
            scenario=scenario,
            params=params,
            pos=np.array([p.position for p in peds], dtype=float).reshape(-1, 2),
            vel=np.array([p.velocity for p in peds], dtype=float).reshape(-1, 2),
            desired_speed=np.array([p.desired_speed for p in peds], dtype=float),
            radius=np.array([p.radius for p in peds], dtype=float),
            active=np.array([not p.exited for p in peds], dtype=bool),
            passage=np.array([np.nan if p.passage_time is None else p.passage_time for p in peds]),
            dt=dt,
            seed=seed,
        )

    @property
    def pedestrians(self) -> list[PedestrianState]:
        return [
            PedestrianState(
                id=k,
                position=self.pos[k].copy(),
                velocity=self.vel[k].copy(),
                desired_speed=float(self.desired_speed[k]),
                radius=float(self.radius[k]),
                exited=not bool(self.active[k]),
                passage_time=None if math.isnan(self.passage[k]) else float(self.passage[k]),
            )
            for k in range(self.n)
        ]

    def copy(self) -> "SimulationState":
        return replace(
            self,
            pos=self.pos.copy(),
            vel=self.vel.copy(),
            desired_speed=self.desired_speed.copy(),
            radius=self.radius.copy(),
            active=self.active.copy(),
            passage=self.passage.copy(),
            stall_steps=self.stall_steps.copy(),
            noise_rng=copy.deepcopy(self.noise_rng),
        )

    @property
    def n_passed(self) -> int:
        return int(np.count_nonzero(~np.isnan(self.passage)))


@dataclass(frozen=True)
class RunResult:
    parameter_set: str | None
    width: float
    seed: int
    n_pedestrians: int
    passage_times: tuple[float, ...]
    completed: bool
    wall_clock: float = 0.0
    steps: int = 0
    invariants: InvariantCounts | None = None


def initial_state(scenario: Scenario, params: ModelParams, n: int, seed: int, dt: float = DEFAULT_DT):
    peds = spawn_pedestrians(scenario, n, params, seed)
    return SimulationState.from_pedestrians(scenario, params, peds, dt=dt, seed=seed)


def compute_components(state: SimulationState) -> np.ndarray:
    """Force components, shape (n, 5, 2): driving, mean, iso, contact, side."""
    edes = np.zeros((state.n, 2))
    _kernels.desired_directions(
        state.pos, state.radius, state.active, state.scenario.width / 2.0, state.scenario.bottleneck_depth, edes
    )
    comp = np.zeros((state.n, 5, 2))
    bad = _kernels.accelerations(
        state.pos,
        state.vel,
        state.desired_speed,
        state.radius,
        state.active,
        state.scenario.walls_array(),
        edes,
        state._packed,
        comp,
    )
    if bad >= 0:
        raise DegenerateGeometryError(f"degenerate geometry around pedestrian {bad} at step {state.step_count}")
    return comp


def stall_noise(state: SimulationState) -> np.ndarray:
    """Random accelerations for this step; advances the stall timers and RNG.

    A pedestrian slower than ``stall_speed_fraction`` of its desired speed
    for at least ``stall_delay`` gets an isotropic Gaussian push whose
    velocity effect scales with sqrt(dt).  A full (n, 2) draw is taken every
    step so the random stream does not depend on who is stalled.
    """
    p = state.params
    out = np.zeros((state.n, 2))
    if p.stall_noise_strength == 0.0:
        return out
    speed = np.hypot(state.vel[:, 0], state.vel[:, 1])
    slow = state.active & (speed < p.stall_speed_fraction * state.desired_speed)
    state.stall_steps = np.where(slow, state.stall_steps + 1, 0)
    z = state.noise_rng.standard_normal((state.n, 2))
    stalled = slow & (state.stall_steps * state.dt >= p.stall_delay - 1e-9)
    out[stalled] = z[stalled] * (p.stall_noise_strength / math.sqrt(state.dt))
    return out


def _advance(state: SimulationState, walls: np.ndarray, edes: np.ndarray, comp: np.ndarray) -> None:
    sc = state.scenario
    _kernels.desired_directions(state.pos, state.radius, state.active, sc.width / 2.0, sc.bottleneck_depth, edes)
    bad = _kernels.accelerations(
        state.pos, state.vel, state.desired_speed, state.radius, state.active, walls, edes, state._packed, comp
    )
    if bad >= 0:
        raise DegenerateGeometryError(f"degenerate geometry around pedestrian {bad} at step {state.step_count}")
    noise = stall_noise(state)
    bad = _kernels.integrate(
        state.pos,
        state.vel,
        state.desired_speed,
        state.radius,
        state.active,
        state.passage,
        comp,
        noise,
        state._packed,
        walls,
        state.dt,
        state.time,
        sc.measurement_line,
        sc.removal_line,
    )
    if bad >= 0:
        raise IntegrationDivergedError(int(bad), state.step_count)
    state.step_count += 1


def step(state: SimulationState, dt: float | None = None) -> SimulationState:
    """One synchronous step; returns a new state and leaves ``state`` alone."""
    new = state.copy()
    if dt is not None:
        if not dt > 0:
            raise ContractViolation("dt must be positive")
        if dt != state.dt:
            # keep time == step_count * dt exact by rebasing the step counter
            if state.step_count:
                raise ContractViolation("dt cannot change mid-run")
            new.dt = dt
    n = new.n
    _advance(new, new.scenario.walls_array(), np.zeros((n, 2)), np.zeros((n, 5, 2)))
    return new


def confine(position, velocity, radius: float, walls) -> tuple[np.ndarray, np.ndarray]:
    """Move a center that slipped behind a sided wall back onto the wall line.

    Walls are rigid: besides the contact push, no center may end a step on
    the solid side of a wall.  The velocity component into the wall is
    removed.  Walls are processed in order.
    """
    x = np.array(position, dtype=float)
    v = np.array(velocity, dtype=float)
    for w in walls:
        if w.outward_side is None:
            continue
        a = np.asarray(w.a, dtype=float)
        ab = np.asarray(w.b, dtype=float) - a
        t = float((x - a) @ ab) / float(ab @ ab)
        if not 0.0 < t < 1.0:
            continue
        normal = np.asarray(w.outward_side, dtype=float)
        signed = float((x - a) @ normal)
        thickness = radius if w.thickness is None else w.thickness
        if -thickness < signed < 0.0:
            x = x - signed * normal
            vn = float(v @ normal)
            if vn < 0.0:
                v = v - vn * normal
    return x, v


def reference_step(state: SimulationState, cell_size: float | None = None) -> SimulationState:
    """Uncompiled step built from :mod:`pedsim.forces` and the hash grid.

    Much slower than :func:`step`; used to cross-check the compiled path.
    """
    from .scenario import desired_direction

    p = state.params
    cell_size = cell_size or 4.0 * p.b_social_iso
    peds = state.pedestrians
    active = [q for q in peds if not q.exited]
    grid = build_grid(((q.id, q.position) for q in active), cell_size)
    acc = np.zeros((state.n, 2))
    for q in active:
        nbrs = nearest_k(grid, q.position, p.neighbor_limit, exclude=q.id)
        fb = total_acceleration(q, active, state.scenario.walls, desired_direction(q, state.scenario), p, nbrs)
        acc[q.id] = fb.total
    new = state.copy()
    acc += stall_noise(new)
    dt = state.dt
    t0 = state.time
    sc = state.scenario
    for q in active:
        k = q.id
        if not np.all(np.isfinite(acc[k])):
            raise IntegrationDivergedError(k, state.step_count)
        v = q.velocity + acc[k] * dt
        vmax = p.v_max_factor * q.desired_speed
        sp = math.hypot(v[0], v[1])
        if sp > vmax:
            v = v * (vmax / sp)
        x_new, v = confine(q.position + v * dt, v, q.radius, sc.walls)
        new.vel[k] = v
        new.pos[k] = x_new
        if math.isnan(new.passage[k]) and q.position[0] < sc.measurement_line <= x_new[0]:
            frac = (sc.measurement_line - q.position[0]) / (x_new[0] - q.position[0])
            new.passage[k] = t0 + dt * frac
        if x_new[0] >= sc.removal_line:
            new.active[k] = False
    new.step_count += 1
    return new


def check_invariants(state: SimulationState, counts: InvariantCounts) -> None:
    sc = state.scenario
    pen, fast = _kernels.count_violations(
        state.pos,
        state.vel,
        state.desired_speed,
        state.radius,
        state.active,
        state._packed,
        sc.width / 2.0,
        sc.corridor_halfwidth,
        sc.bottleneck_depth,
        PENETRATION_TOLERANCE,
    )
    counts.wall_penetrations += int(pen)
    counts.speed_excesses += int(fast)
    # exited pedestrians must all have passed the measurement line
    exited = ~state.active
    if np.any(np.isnan(state.passage[exited])) or int(np.count_nonzero(state.active)) + int(
        np.count_nonzero(exited)
    ) != state.n:
        counts.count_mismatches += 1


def run(
    scenario: Scenario,
    params: ModelParams,
    n: int,
    seed: int,
    dt: float = DEFAULT_DT,
    t_max: float = DEFAULT_T_MAX,
    parameter_set: str | None = None,
    invariants: bool = False,
    trajectory: TrajectoryHook | None = None,
) -> RunResult:
    """Spawn ``n`` pedestrians and step until all have passed or ``t_max``."""
    if not dt > 0 or not t_max > 0:
        raise ContractViolation("dt and t_max must be positive")
    started = _time.perf_counter()
    state = initial_state(scenario, params, n, seed, dt)
    walls = scenario.walls_array()
    edes = np.zeros((n, 2))
    comp = np.zeros((n, 5, 2))
    counts = InvariantCounts() if invariants else None
    if trajectory is not None:
        trajectory(0.0, np.flatnonzero(state.active), state.pos, state.vel)
    while state.n_passed < n and state.time < t_max:
        _advance(state, walls, edes, comp)
        if counts is not None:
            check_invariants(state, counts)
        if trajectory is not None:
            trajectory(state.time, np.flatnonzero(state.active), state.pos, state.vel)
    passed = np.sort(state.passage[~np.isnan(state.passage)])
    return RunResult(
        parameter_set=parameter_set,
        width=scenario.width,
        seed=seed,
        n_pedestrians=n,
        passage_times=tuple(float(t) for t in passed),
        completed=len(passed) == n,
        wall_clock=_time.perf_counter() - started,
        steps=state.step_count,
        invariants=counts,
    )
