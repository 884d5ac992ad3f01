"""Bottleneck geometry, initial crowd and routing.

Pedestrians walk in +x.  The bottleneck entrance plane is ``x = 0`` and the
passage runs to ``x = bottleneck_depth`` where passage times are measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractViolation, DensityInfeasibleError
from .forces import PedestrianState, WallSegment
from .params import ModelParams

CORNER_OVERLAP = 0.5

__all__ = [
    "GeometryConfig",
    "Rect",
    "Scenario",
    "WallSegment",
    "build_bottleneck_scenario",
    "desired_direction",
    "spawn_pedestrians",
]


@dataclass(frozen=True)
class GeometryConfig:
    corridor_halfwidth: float = 2.0
    bottleneck_depth: float = 0.4
    front_distance: float = 2.5
    spawn_width: float = 4.0
    spawn_density: float = 3.0
    removal_offset: float = 1.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not value > 0:
                raise ConfigurationError(f"{name} must be positive (got {value})")

    def spawn_depth(self, n: int) -> float:
        return n / (self.spawn_density * self.spawn_width)


@dataclass(frozen=True)
class Rect:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class Scenario:
    width: float
    walls: tuple[WallSegment, ...]
    spawn_region: Rect
    opening_segment: tuple[tuple[float, float], tuple[float, float]]
    measurement_line: float
    removal_line: float
    corridor_halfwidth: float
    bottleneck_depth: float
    config: GeometryConfig = field(default_factory=GeometryConfig)
    # True when the opening is narrower than one body (2 * default radius).
    impassable: bool = False

    def spawn_region_for(self, n: int) -> Rect:
        cfg = self.config
        depth = cfg.spawn_depth(n)
        return Rect(
            -cfg.front_distance - depth,
            -cfg.front_distance,
            -cfg.spawn_width / 2.0,
            cfg.spawn_width / 2.0,
        )

    def walls_array(self) -> np.ndarray:
        """Walls as rows ``(ax, ay, bx, by, nx, ny, sided, thickness)``.

        A thickness of -1 stands for "one pedestrian radius".
        """
        rows = []
        for w in self.walls:
            nx, ny = w.outward_side if w.outward_side is not None else (0.0, 0.0)
            sided = 0.0 if w.outward_side is None else 1.0
            rows.append((*w.a, *w.b, nx, ny, sided, -1.0 if w.thickness is None else w.thickness))
        return np.array(rows, dtype=float).reshape(-1, 8)


def build_bottleneck_scenario(
    width: float, cfg: GeometryConfig | None = None, n: int = 100, radius: float = 0.15
) -> Scenario:
    """Corridor, funnel wall and passage for a bottleneck of clear ``width``.

    ``n`` sizes the spawn region (and so the corridor length); ``radius``
    flags openings narrower than one body and bounds the widest opening.
    """
    cfg = cfg or GeometryConfig()
    if not width > 0:
        raise ContractViolation("width must be positive")
    H = cfg.corridor_halfwidth
    # each flank has to be at least one body wide to constrict anything
    if width >= 2.0 * (H - radius):
        raise ConfigurationError(
            f"width {width} m leaves no constriction in a {2 * H} m corridor (flanks narrower than one body)"
        )
    half = width / 2.0
    depth = cfg.bottleneck_depth
    x_start = -(cfg.front_distance + cfg.spawn_depth(n) + 1.0)
    # walls overrun each other by CORNER_OVERLAP so that concave corners are
    # closed for the wall contact rule; the corridor is closed at the back
    c = CORNER_OVERLAP
    side = H - half
    walls = (
        WallSegment((0.0, half), (0.0, H + c), (-1.0, 0.0), depth),
        WallSegment((0.0, -H - c), (0.0, -half), (-1.0, 0.0), depth),
        WallSegment((0.0, half), (depth, half), (0.0, -1.0), side),
        WallSegment((0.0, -half), (depth, -half), (0.0, 1.0), side),
        WallSegment((x_start - c, H), (c, H), (0.0, -1.0), c),
        WallSegment((x_start - c, -H), (c, -H), (0.0, 1.0), c),
        WallSegment((x_start, -H - c), (x_start, H + c), (1.0, 0.0), c),
    )
    scenario = Scenario(
        width=width,
        walls=walls,
        spawn_region=Rect(0, 0, 0, 0),
        opening_segment=((0.0, -half), (0.0, half)),
        measurement_line=depth,
        removal_line=depth + cfg.removal_offset,
        corridor_halfwidth=H,
        bottleneck_depth=depth,
        config=cfg,
        impassable=width <= 2.0 * radius,
    )
    object.__setattr__(scenario, "spawn_region", scenario.spawn_region_for(n))
    return scenario


def _point_segment_distance(x: float, y: float, w: WallSegment) -> float:
    ax, ay = w.a
    bx, by = w.b
    abx, aby = bx - ax, by - ay
    t = ((x - ax) * abx + (y - ay) * aby) / (abx * abx + aby * aby)
    t = min(max(t, 0.0), 1.0)
    return math.hypot(x - (ax + t * abx), y - (ay + t * aby))


def spawn_pedestrians(s: Scenario, n: int, params: ModelParams, seed: int) -> list[PedestrianState]:
    """Seeded random sequential placement of ``n`` resting pedestrians."""
    if n < 1:
        raise ContractViolation("n must be >= 1")
    rng = np.random.default_rng(seed)
    region = s.spawn_region_for(n)
    r = params.radius
    min_sq = (2.0 * r) ** 2
    placed: list[tuple[float, float]] = []
    attempts = 0
    max_attempts = 100_000 * n
    while len(placed) < n:
        if attempts >= max_attempts:
            raise DensityInfeasibleError(
                f"placed only {len(placed)} of {n} pedestrians after {attempts} attempts"
            )
        attempts += 1
        x = float(rng.uniform(region.x_min, region.x_max))
        y = float(rng.uniform(region.y_min, region.y_max))
        if any((x - px) ** 2 + (y - py) ** 2 < min_sq for px, py in placed):
            continue
        if any(_point_segment_distance(x, y, w) < r for w in s.walls):
            continue
        placed.append((x, y))

    if params.desired_speed_sd > 0:
        speeds = rng.normal(params.desired_speed_mean, params.desired_speed_sd, size=n)
        # truncated so that every walker still moves forward
        speeds = np.maximum(speeds, 0.1 * params.desired_speed_mean)
    else:
        speeds = np.full(n, params.desired_speed_mean)
    return [
        PedestrianState(id=k, position=placed[k], velocity=(0.0, 0.0), desired_speed=float(speeds[k]), radius=r)
        for k in range(n)
    ]


def desired_direction(ped: PedestrianState, s: Scenario) -> np.ndarray:
    """Head for the nearest reachable point of the opening, then straight on."""
    x, y = ped.position
    inset = max(s.width / 2.0 - ped.radius, 0.0)
    if x > s.bottleneck_depth or (x >= 0.0 and abs(y) <= inset):
        return np.array([1.0, 0.0])
    ty = min(max(y, -inset), inset)
    dx, dy = -x, ty - y
    norm = math.hypot(dx, dy)
    return np.array([dx / norm, dy / norm])
