"""Reference force kernels for single pedestrians and pairs.

Everything here works on plain :class:`PedestrianState` objects and returns
accelerations as length-2 float arrays.  The compiled stepping loop in
:mod:`pedsim._kernels` implements the same formulas over whole arrays; the
functions here are kept deliberately plain so they can serve as its oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractViolation, DegenerateGeometryError
from .params import ModelParams, SidePreference

# Below this speed the walking direction falls back to the desired direction.
MIN_MOTION_SPEED = 0.01
# Cosine threshold for "nearly head-on" in the side-preference rule.
HEAD_ON_COS = 0.9


@dataclass
class PedestrianState:
    id: int
    position: np.ndarray
    velocity: np.ndarray
    desired_speed: float
    radius: float
    exited: bool = False
    passage_time: float | None = None

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(2)
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(2)
        if not (self.radius > 0 and self.desired_speed > 0):
            raise ContractViolation("radius and desired_speed must be positive")
        if not (np.all(np.isfinite(self.position)) and np.all(np.isfinite(self.velocity))):
            raise ContractViolation(f"pedestrian {self.id} has non-finite state")


@dataclass(frozen=True)
class WallSegment:
    """Straight wall from ``a`` to ``b``.

    ``outward_side`` is the unit normal pointing into the walkable side, or
    None when the wall has no preferred side.  ``thickness`` is how far the
    solid extends behind a sided wall; None means one pedestrian radius.
    """

    a: tuple[float, float]
    b: tuple[float, float]
    outward_side: tuple[float, float] | None = None
    thickness: float | None = None

    def __post_init__(self):
        if tuple(self.a) == tuple(self.b):
            raise ContractViolation("wall segment endpoints coincide")

    @property
    def length(self) -> float:
        return math.dist(self.a, self.b)


@dataclass
class ForceBreakdown:
    driving: np.ndarray
    social_mean: np.ndarray
    social_iso: np.ndarray
    contact: np.ndarray
    side_bias: np.ndarray
    total: np.ndarray = field(init=False)

    def __post_init__(self):
        self.total = self.driving + self.social_mean + self.social_iso + self.contact + self.side_bias


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(2)


def _unit_between(xi: np.ndarray, xj: np.ndarray) -> tuple[np.ndarray, float]:
    """Unit vector from j to i and the distance."""
    diff = xi - xj
    d = math.hypot(diff[0], diff[1])
    if d == 0.0:
        raise DegenerateGeometryError("coincident pedestrian positions")
    return diff / d, d


def driving_force(v, e, v0: float, tau: float) -> np.ndarray:
    v, e = _vec(v), _vec(e)
    if abs(math.hypot(e[0], e[1]) - 1.0) > 1e-9:
        raise ContractViolation("desired direction must be a unit vector")
    if not tau > 0:
        raise ContractViolation("tau must be positive")
    return (v0 * e - v) / tau


def anisotropy_weight(phi: float, lam: float) -> float:
    return lam + (1.0 - lam) * (1.0 + math.cos(phi)) / 2.0


def _anisotropy_from_cos(cos_phi: float, lam: float) -> float:
    return lam + (1.0 - lam) * (1.0 + cos_phi) / 2.0


def scaled_separation(s, e_motion, ls: float) -> np.ndarray:
    """Components of ``s`` along and across ``e_motion``, the first scaled by ``ls``."""
    s, e = _vec(s), _vec(e_motion)
    s_par = s[0] * e[0] + s[1] * e[1]
    s_perp = -s[0] * e[1] + s[1] * e[0]
    return np.array([ls * s_par, s_perp])


def motion_direction(ped: PedestrianState, e_desired=(1.0, 0.0)) -> np.ndarray:
    speed = math.hypot(ped.velocity[0], ped.velocity[1])
    if speed < MIN_MOTION_SPEED:
        return _vec(e_desired)
    return ped.velocity / speed


def effective_distance(s_scaled: np.ndarray, y_scaled: np.ndarray) -> float:
    ns = math.hypot(*s_scaled)
    nsy = math.hypot(*(s_scaled - y_scaled))
    ny = math.hypot(*y_scaled)
    return 0.5 * math.sqrt(max((ns + nsy) ** 2 - ny**2, 0.0))


def social_mean_force(
    i: PedestrianState, j: PedestrianState, p: ModelParams, e_desired=(1.0, 0.0)
) -> np.ndarray:
    """Anisotropic, velocity-dependent long-range repulsion of ``j`` on ``i``.

    ``e_desired`` stands in for the walking direction when ``i`` is
    (nearly) at rest.
    """
    n, d = _unit_between(i.position, j.position)
    e_i = motion_direction(i, e_desired)
    s = j.position - i.position
    s_t = scaled_separation(s, e_i, p.longitudinal_scale)
    y_t = scaled_separation((j.velocity - i.velocity) * p.velocity_dependence, e_i, p.longitudinal_scale)
    b = effective_distance(s_t, y_t)
    magnitude = p.a_social_mean * math.exp((i.radius + j.radius - b) / p.b_social_mean)
    cos_phi = (e_i[0] * s[0] + e_i[1] * s[1]) / d
    return magnitude * _anisotropy_from_cos(cos_phi, p.lambda_anisotropy) * n


def social_iso_force(i: PedestrianState, j: PedestrianState, p: ModelParams) -> np.ndarray:
    n, d = _unit_between(i.position, j.position)
    return p.a_social_iso * math.exp((i.radius + j.radius - d) / p.b_social_iso) * n


def contact_force_ped(i: PedestrianState, j: PedestrianState, p: ModelParams) -> np.ndarray:
    n, d = _unit_between(i.position, j.position)
    overlap = max(0.0, i.radius + j.radius - d)
    if overlap == 0.0:
        return np.zeros(2)
    t = np.array([-n[1], n[0]])
    dv_t = float((j.velocity - i.velocity) @ t)
    return p.k_physical_ped * overlap * n + p.friction_coefficient * overlap * dv_t * t


def wall_force(i: PedestrianState, w: WallSegment, p: ModelParams) -> np.ndarray:
    """Linear contact push away from a wall segment.

    A center that has slipped behind a sided wall, but not beyond its
    thickness, is still pushed back toward the walkable side so the wall
    cannot be tunneled through.
    """
    a, b = _vec(w.a), _vec(w.b)
    x = i.position
    ab = b - a
    t = float((x - a) @ ab) / float(ab @ ab)
    r = i.radius
    if w.outward_side is not None and 0.0 < t < 1.0:
        normal = _vec(w.outward_side)
        signed = float((x - a) @ normal)
        thickness = r if w.thickness is None else w.thickness
        if -thickness < signed <= 0.0:
            return p.k_physical_border * (r - signed) * normal
    t = min(max(t, 0.0), 1.0)
    q = a + t * ab
    diff = x - q
    d = math.hypot(diff[0], diff[1])
    overlap = max(0.0, r - d)
    if overlap == 0.0:
        return np.zeros(2)
    if d == 0.0:
        if w.outward_side is None:
            raise DegenerateGeometryError("pedestrian center lies on an unsided wall")
        return p.k_physical_border * overlap * _vec(w.outward_side)
    return p.k_physical_border * overlap * diff / d


def select_neighbors(i: PedestrianState, others: Iterable[PedestrianState], n: int) -> list[int]:
    """Ids of the ``n`` nearest non-exited pedestrians, ties to the lower id."""
    if n < 1:
        raise ContractViolation("neighbor limit must be >= 1")
    cands = []
    for o in others:
        if o.exited or o.id == i.id:
            continue
        diff = o.position - i.position
        cands.append((math.hypot(diff[0], diff[1]), o.id))
    cands.sort()
    return [pid for _, pid in cands[:n]]


def side_bias_force(
    i: PedestrianState, j: PedestrianState, f_mean_ij, p: ModelParams, e_desired=(1.0, 0.0)
) -> np.ndarray:
    if p.side_preference is SidePreference.NONE:
        return np.zeros(2)
    s = j.position - i.position
    d = math.hypot(s[0], s[1])
    if d == 0.0:
        return np.zeros(2)
    e_i = motion_direction(i, e_desired)
    cos_phi = float(e_i @ s) / d
    closing = float((j.velocity - i.velocity) @ s) < 0.0
    if not (cos_phi > HEAD_ON_COS and closing):
        return np.zeros(2)
    if p.side_preference is SidePreference.RIGHT:
        r_hat = np.array([e_i[1], -e_i[0]])
    else:
        r_hat = np.array([-e_i[1], e_i[0]])
    f = _vec(f_mean_ij)
    return p.side_bias_strength * math.hypot(f[0], f[1]) * r_hat


def total_acceleration(
    i: PedestrianState,
    population: Sequence[PedestrianState],
    walls: Sequence[WallSegment],
    e_desired,
    p: ModelParams,
    neighbors: Sequence[int] | None = None,
) -> ForceBreakdown:
    """Superpose every force term acting on ``i``.

    ``neighbors`` may be supplied precomputed (for instance from a spatial
    grid); otherwise :func:`select_neighbors` is used.
    """
    if i.exited:
        raise ContractViolation(f"pedestrian {i.id} has exited")
    e_desired = _vec(e_desired)
    by_id = {q.id: q for q in population}
    if neighbors is None:
        neighbors = select_neighbors(i, population, p.neighbor_limit)

    driving = driving_force(i.velocity, e_desired, i.desired_speed, p.tau)
    mean = np.zeros(2)
    iso = np.zeros(2)
    side = np.zeros(2)
    for jid in sorted(neighbors):
        j = by_id[jid]
        f_mean = social_mean_force(i, j, p, e_desired)
        mean = mean + f_mean
        iso = iso + social_iso_force(i, j, p)
        side = side + side_bias_force(i, j, f_mean, p, e_desired)

    contact = np.zeros(2)
    for j in sorted(population, key=lambda q: q.id):
        if j.id == i.id or j.exited:
            continue
        contact = contact + contact_force_ped(i, j, p)
    for w in walls:
        contact = contact + wall_force(i, w, p)
    return ForceBreakdown(driving, mean, iso, contact, side)
