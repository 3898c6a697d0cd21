"""Layouts of the observation and action vectors.

The observation is a flat float64 vector of 29 sensor channels; the
action is (acceleration, brake, steering). Both sides of the package
(the simulator that produces observations and the agent that consumes
them) index through the constants below.
"""

from __future__ import annotations

import numpy as np

OBS_DIM = 29
ACTION_DIM = 3

# observation channel offsets
OBS_ANGLE = 0          # heading error vs track tangent, rad, [-pi, pi]
OBS_TRACK = slice(1, 20)   # 19 range finders, m, [0, 200]
OBS_TRACK_POS = 20     # lateral offset / half track width
OBS_SPEED_X = 21       # longitudinal speed, km/h
OBS_SPEED_Y = 22       # lateral speed, km/h
OBS_SPEED_Z = 23       # vertical speed, km/h (always 0 in 2D)
OBS_WHEEL_SPIN = slice(24, 28)  # wheel angular velocity, rad/s
OBS_RPM = 28           # engine proxy, normalized to [0, 1]

RANGE_FINDER_COUNT = 19
RANGE_FINDER_MAX = 200.0

# action components
ACT_ACCEL = 0   # [0, 1]
ACT_BRAKE = 1   # [0, 1]
ACT_STEER = 2   # [-1, 1]

ACTION_LOW = np.array([0.0, 0.0, -1.0])
ACTION_HIGH = np.array([1.0, 1.0, 1.0])


def clamp_action(action: np.ndarray) -> np.ndarray:
    return np.clip(action, ACTION_LOW, ACTION_HIGH)


def validate_observation(obs: np.ndarray) -> None:
    """Raise ValueError when a vector breaks the observation contract."""
    obs = np.asarray(obs)
    if obs.shape != (OBS_DIM,):
        raise ValueError(f"observation must have shape ({OBS_DIM},), got {obs.shape}")
    if not np.all(np.isfinite(obs)):
        raise ValueError("observation contains non-finite values")
    if not -np.pi <= obs[OBS_ANGLE] <= np.pi:
        raise ValueError(f"angle {obs[OBS_ANGLE]} outside [-pi, pi]")
    track = obs[OBS_TRACK]
    if np.any(track < 0.0) or np.any(track > RANGE_FINDER_MAX):
        raise ValueError("range finder reading outside [0, 200]")


def validate_action(action: np.ndarray) -> None:
    action = np.asarray(action)
    if action.shape != (ACTION_DIM,):
        raise ValueError(f"action must have shape ({ACTION_DIM},), got {action.shape}")
    if np.any(action < ACTION_LOW) or np.any(action > ACTION_HIGH):
        raise ValueError(f"action {action} outside its component ranges")
