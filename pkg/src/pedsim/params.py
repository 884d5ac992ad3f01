"""Model parameter record and the eight built-in parameter sets."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, fields, replace


class SidePreference(str, enum.Enum):
    RIGHT = "right"
    LEFT = "left"
    NONE = "none"


class ParameterSetId(str, enum.Enum):
    P0 = "P0"
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    P4 = "P4"
    P5 = "P5"
    P6 = "P6"
    P7 = "P7"

    @property
    def index(self) -> int:
        return int(self.value[1:])


@dataclass(frozen=True)
class ModelParams:
    """Full parameter record of the force model (SI units throughout)."""

    radius: float = 0.15
    a_social_mean: float = 0.5
    b_social_mean: float = 2.8
    k_physical_border: float = 100.0
    k_physical_ped: float = 100.0
    a_social_iso: float = 25.0
    b_social_iso: float = 0.2
    tau: float = 0.4
    friction_coefficient: float = 0.0
    side_preference: SidePreference = SidePreference.RIGHT
    velocity_dependence: float = 2.0
    lambda_anisotropy: float = 0.1
    longitudinal_scale: float = 0.25
    neighbor_limit: int = 5
    desired_speed_mean: float = 1.34
    desired_speed_sd: float = 0.0
    v_max_factor: float = 1.3
    side_bias_strength: float = 0.1
    # random push for pedestrians stuck below a fraction of their desired
    # speed for a while (m/s^1.5, Langevin scaling: velocity kick ~ sqrt(dt))
    stall_noise_strength: float = 2.25
    stall_speed_fraction: float = 0.5
    stall_delay: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "side_preference", SidePreference(self.side_preference))

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def as_lines(self) -> list[str]:
        """``key=value`` lines in field order."""
        out = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, enum.Enum):
                value = value.value
            out.append(f"{f.name}={value!r}" if isinstance(value, float) else f"{f.name}={value}")
        return out


# Single-field deltas against P0.
_DELTAS: dict[ParameterSetId, tuple[str, float | int]] = {
    ParameterSetId.P1: ("a_social_iso", 10.0),
    ParameterSetId.P2: ("a_social_iso", 100.0),
    ParameterSetId.P3: ("b_social_iso", 0.05),
    ParameterSetId.P4: ("b_social_iso", 0.3),
    ParameterSetId.P5: ("neighbor_limit", 15),
    ParameterSetId.P6: ("a_social_mean", 0.1),
    ParameterSetId.P7: ("a_social_mean", 2.5),
}


def builtin_parameter_set(set_id: ParameterSetId | str) -> ModelParams:
    set_id = ParameterSetId(set_id)
    base = ModelParams()
    if set_id is ParameterSetId.P0:
        return base
    name, value = _DELTAS[set_id]
    return base.with_(**{name: value})


def parameter_delta(set_id: ParameterSetId | str) -> tuple[str, float | int] | None:
    """The (field, value) changed relative to P0, or None for P0 itself."""
    return _DELTAS.get(ParameterSetId(set_id))


_POSITIVE = ("radius", "tau", "b_social_mean", "b_social_iso", "longitudinal_scale")
_NON_NEGATIVE = (
    "a_social_mean",
    "a_social_iso",
    "k_physical_border",
    "k_physical_ped",
    "friction_coefficient",
    "side_bias_strength",
    "velocity_dependence",
    "desired_speed_sd",
    "stall_noise_strength",
    "stall_delay",
)


def validate_params(p: ModelParams) -> list[str]:
    """Return one message per violated invariant; empty when valid."""
    violations = []
    for name in _POSITIVE:
        if not getattr(p, name) > 0:
            violations.append(f"{name} must be > 0 (got {getattr(p, name)})")
    for name in _NON_NEGATIVE:
        if not getattr(p, name) >= 0:
            violations.append(f"{name} must be >= 0 (got {getattr(p, name)})")
    if not 0.0 <= p.lambda_anisotropy <= 1.0:
        violations.append(f"lambda_anisotropy must lie in [0, 1] (got {p.lambda_anisotropy})")
    if isinstance(p.neighbor_limit, bool) or not isinstance(p.neighbor_limit, int) or p.neighbor_limit < 1:
        violations.append(f"neighbor_limit must be an integer >= 1 (got {p.neighbor_limit})")
    if not p.desired_speed_mean > 0:
        violations.append(f"desired_speed_mean must be > 0 (got {p.desired_speed_mean})")
    if not 0.0 <= p.stall_speed_fraction <= 1.0:
        violations.append(f"stall_speed_fraction must lie in [0, 1] (got {p.stall_speed_fraction})")
    if not p.v_max_factor > 0:
        violations.append(f"v_max_factor must be > 0 (got {p.v_max_factor})")
    return violations


PARAM_FIELDS = tuple(f.name for f in dataclasses.fields(ModelParams))
