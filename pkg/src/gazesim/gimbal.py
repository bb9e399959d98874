"""Simulated 2-DOF eye: gaze state, 9-way action space, motion smoothing.

The eye pans freely (azimuth wraps) and tilts within a mechanical range
(elevation clamps). Commands pass through an exponential moving average
before moving the gaze, mimicking velocity smoothing on real motors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .panorama import dir_from_angles, wrap_angle

#: (d_azimuth, d_elevation) unit commands for actions 0..7, counterclockwise
#: from east; action 8 is "stay".
_COMPASS = (
    (1.0, 0.0),    # 0: E
    (1.0, 1.0),    # 1: NE
    (0.0, 1.0),    # 2: N (up)
    (-1.0, 1.0),   # 3: NW
    (-1.0, 0.0),   # 4: W
    (-1.0, -1.0),  # 5: SW
    (0.0, -1.0),   # 6: S (down)
    (1.0, -1.0),   # 7: SE
)

NUM_ACTIONS = 9
STAY_ACTION = 8


@dataclass(frozen=True)
class GimbalConfig:
    """Eye motion parameters.

    step_size: commanded radians per env step (default 3 degrees).
    elev_limit: mechanical tilt half-range (default 60 degrees).
    smoothing_alpha: EMA weight on the newest command, in (0, 1].
    diagonal_normalized: scale diagonal commands by 1/sqrt(2).
    """

    step_size: float = math.radians(3.0)
    elev_limit: float = math.radians(60.0)
    smoothing_alpha: float = 0.3
    diagonal_normalized: bool = True

    def __post_init__(self):
        if self.step_size <= 0.0:
            raise ValueError("step_size must be > 0")
        if not (0.0 < self.elev_limit <= math.pi / 2):
            raise ValueError("elev_limit must lie in (0, pi/2]")
        if not (0.0 < self.smoothing_alpha <= 1.0):
            raise ValueError("smoothing_alpha must lie in (0, 1]")


@dataclass(frozen=True)
class GazeState:
    """Eye pose: wrapped azimuth, clamped elevation, smoothed velocity."""

    azimuth: float = 0.0
    elevation: float = 0.0
    smoothed_velocity: tuple[float, float] = (0.0, 0.0)

    def direction(self) -> np.ndarray:
        """Gaze direction as a world-frame unit 3-vector."""
        return dir_from_angles(self.azimuth, self.elevation)


def action_direction(action: int, config: GimbalConfig) -> tuple[float, float]:
    """Unit (d_azimuth, d_elevation) for a discrete action index 0..8."""
    if not 0 <= action < NUM_ACTIONS:
        raise ValueError(f"action index {action} out of range 0..8")
    if action == STAY_ACTION:
        return (0.0, 0.0)
    daz, del_ = _COMPASS[action]
    if config.diagonal_normalized and daz != 0.0 and del_ != 0.0:
        inv = 1.0 / math.sqrt(2.0)
        return (daz * inv, del_ * inv)
    return (daz, del_)


def step_gaze(state: GazeState, action: int, config: GimbalConfig) -> GazeState:
    """Advance the gaze one step: EMA-smooth the command, wrap and clamp."""
    daz, del_ = action_direction(action, config)
    cmd = (daz * config.step_size, del_ * config.step_size)
    a = config.smoothing_alpha
    vel = ((1.0 - a) * state.smoothed_velocity[0] + a * cmd[0],
           (1.0 - a) * state.smoothed_velocity[1] + a * cmd[1])
    az = wrap_angle(state.azimuth + vel[0])
    el = min(max(state.elevation + vel[1], -config.elev_limit), config.elev_limit)
    return GazeState(azimuth=az, elevation=el, smoothed_velocity=vel)


def random_init(rng: np.random.Generator) -> GazeState:
    """Random initial gaze: azimuth in +-90 deg, elevation in +-15 deg.

    Velocity starts at zero.
    """
    az = rng.uniform(-math.pi / 2, math.pi / 2)
    el = rng.uniform(-math.pi / 12, math.pi / 12)
    return GazeState(azimuth=az, elevation=el, smoothed_velocity=(0.0, 0.0))


def teleport(state: GazeState, azimuth: float, elevation: float,
             config: GimbalConfig) -> GazeState:
    """Place the gaze directly (used by oracle policies); zeroes velocity."""
    el = min(max(elevation, -config.elev_limit), config.elev_limit)
    return replace(state, azimuth=wrap_angle(azimuth), elevation=el,
                   smoothed_velocity=(0.0, 0.0))
