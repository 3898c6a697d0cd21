"""2D driving environment on a closed track.

The core is purely functional: step(), observe() and compute_reward()
derive everything from their arguments, so independent episodes can run
side by side as long as each CarState is owned by one caller.

Dynamics are a kinematic bicycle with a longitudinal force balance:
heading integrates speed/wheelbase * tan(max_steer * steering), speed
integrates throttle and brake gains minus linear drag, clamped to
[0, v_max]. There is no tire slip; lateral speed is the per-step rate
of change of the lateral offset to the centerline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, UsageError
from .spaces import (
    ACT_ACCEL,
    ACT_BRAKE,
    ACT_STEER,
    OBS_ANGLE,
    OBS_DIM,
    OBS_RPM,
    OBS_SPEED_X,
    OBS_SPEED_Y,
    OBS_SPEED_Z,
    OBS_TRACK,
    OBS_TRACK_POS,
    OBS_WHEEL_SPIN,
    RANGE_FINDER_COUNT,
    RANGE_FINDER_MAX,
)
from .track import TrackDefinition, cast_rays, inside_track, project, wrap_angle

DT = 0.05  # 20 Hz control
MAX_EPISODE_STEPS = 60_000
WRONG_WAY_PATIENCE = 5  # consecutive steps with |angle| > pi/2 before terminating

KMH_PER_MS = 3.6

# ray headings relative to the car: -90 to +90 degrees in 10 degree steps
RAY_OFFSETS = np.radians(np.arange(-90.0, 91.0, 10.0))
assert len(RAY_OFFSETS) == RANGE_FINDER_COUNT


@dataclass(frozen=True)
class CarParams:
    wheelbase: float = 2.5          # m
    max_steer: float = math.radians(21.0)
    accel_gain: float = 8.0         # m/s^2 at full throttle
    brake_gain: float = 12.0        # m/s^2 at full brake
    drag: float = 0.08              # 1/s
    v_max: float = 85.0             # m/s
    wheel_radius: float = 0.33      # m


DEFAULT_CAR = CarParams()


@dataclass(frozen=True)
class RewardWeights:
    """Weights of the three penalty terms in the per-step reward."""

    alpha: float = 1.0    # lateral-speed share of V_x
    beta: float = 1.0     # V_x scaled by distance from center
    gamma_w: float = 0.1  # flat distance-from-center penalty

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma_w"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ConfigError(f"reward weight {name} must be finite and >= 0, got {v}")


DEFAULT_WEIGHTS = RewardWeights()


class Termination(Enum):
    RUNNING = "running"
    OUT_OF_TRACK = "out_of_track"
    WRONG_WAY = "wrong_way"
    STEP_CAP = "step_cap"


@dataclass
class CarState:
    position: np.ndarray       # (2,) m
    heading: float             # rad, wrapped to [-pi, pi)
    speed_long: float          # m/s, >= 0
    speed_lat: float           # m/s, signed, relative to the track tangent
    arc_progress: float        # cumulative m along the centerline (laps add up)
    steps: int
    wrong_way_count: int = 0


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    terminal: bool
    termination_reason: Termination


def reset(track: TrackDefinition, rng=None) -> CarState:
    """Place the car at rest on the centerline start, facing along the track."""
    del rng  # reserved for randomized starts
    return CarState(
        position=track.centerline[0].copy(),
        heading=float(wrap_angle(track.tangent_angle(0))),
        speed_long=0.0,
        speed_lat=0.0,
        arc_progress=0.0,
        steps=0,
    )


def compute_reward(obs: np.ndarray, weights: RewardWeights = DEFAULT_WEIGHTS) -> float:
    """Per-step gain: forward speed minus lateral-speed and off-center penalties.

    R = V_x cos(angle) - alpha V_x |sin(angle)|
        - gamma_w |trackPos| - beta V_x |trackPos|
    with V_x the longitudinal speed in km/h.
    """
    vx = obs[OBS_SPEED_X]
    angle = obs[OBS_ANGLE]
    pos = abs(obs[OBS_TRACK_POS])
    return float(
        vx * math.cos(angle)
        - weights.alpha * vx * abs(math.sin(angle))
        - weights.gamma_w * pos
        - weights.beta * vx * pos
    )


def range_finders(state: CarState, track: TrackDefinition) -> np.ndarray:
    """19 edge distances for rays spread -90..+90 degrees around the heading.

    Readings are capped at 200 m; a car outside the track reads all zeros.
    """
    if not inside_track(track, state.position):
        return np.zeros(RANGE_FINDER_COUNT)
    return cast_rays(track, state.position, state.heading + RAY_OFFSETS,
                     max_range=RANGE_FINDER_MAX)


def observe(state: CarState, track: TrackDefinition,
            car: CarParams = DEFAULT_CAR) -> np.ndarray:
    """Assemble the 29-channel observation for the current state."""
    _, lat, tangent = project(track, state.position)
    obs = np.zeros(OBS_DIM)
    obs[OBS_ANGLE] = wrap_angle(state.heading - tangent)
    obs[OBS_TRACK] = range_finders(state, track)
    obs[OBS_TRACK_POS] = lat / track.half_width
    obs[OBS_SPEED_X] = state.speed_long * KMH_PER_MS
    obs[OBS_SPEED_Y] = state.speed_lat * KMH_PER_MS
    obs[OBS_SPEED_Z] = 0.0
    obs[OBS_WHEEL_SPIN] = state.speed_long / car.wheel_radius
    obs[OBS_RPM] = state.speed_long / car.v_max
    return obs


def step(
    state: CarState,
    action: np.ndarray,
    track: TrackDefinition,
    dt: float = DT,
    weights: RewardWeights = DEFAULT_WEIGHTS,
    car: CarParams = DEFAULT_CAR,
    max_steps: int = MAX_EPISODE_STEPS,
) -> tuple[CarState, StepResult]:
    """Advance one control period; returns the new state and step outcome.

    Actions are expected pre-clamped to their ranges. Episodes end when
    the car leaves the track (|trackPos| > 1), faces backwards
    (|angle| > pi/2 for WRONG_WAY_PATIENCE consecutive steps), or hits
    the step cap.
    """
    if dt <= 0.0:
        raise UsageError(f"dt must be positive, got {dt}")
    accel = float(action[ACT_ACCEL])
    brake = float(action[ACT_BRAKE])
    steer = float(action[ACT_STEER])

    v = state.speed_long
    heading = wrap_angle(
        state.heading + (v / car.wheelbase) * math.tan(car.max_steer * steer) * dt)
    v_new = min(max(v + (car.accel_gain * accel - car.brake_gain * brake - car.drag * v) * dt,
                    0.0), car.v_max)
    position = state.position + v * dt * np.array([math.cos(state.heading),
                                                   math.sin(state.heading)])

    arc_old = state.arc_progress % track.total_length
    _, lat_old, _ = project(track, state.position)
    arc_new, lat_new, _ = project(track, position)
    half_lap = 0.5 * track.total_length
    delta_arc = (arc_new - arc_old + half_lap) % track.total_length - half_lap

    new_state = CarState(
        position=position,
        heading=float(heading),
        speed_long=v_new,
        speed_lat=(lat_new - lat_old) / dt,
        arc_progress=state.arc_progress + delta_arc,
        steps=state.steps + 1,
    )
    obs = observe(new_state, track, car)
    new_state.wrong_way_count = (
        state.wrong_way_count + 1 if abs(obs[OBS_ANGLE]) > 0.5 * math.pi else 0)

    if abs(obs[OBS_TRACK_POS]) > 1.0:
        reason = Termination.OUT_OF_TRACK
    elif new_state.wrong_way_count >= WRONG_WAY_PATIENCE:
        reason = Termination.WRONG_WAY
    elif new_state.steps >= max_steps:
        reason = Termination.STEP_CAP
    else:
        reason = Termination.RUNNING
    reward = compute_reward(obs, weights)
    return new_state, StepResult(obs, reward, reason is not Termination.RUNNING, reason)


@dataclass
class EpisodeMetrics:
    mean_speed_kmh: float
    mean_step_gain: float
    total_distance_m: float
    total_reward: float
    var_dist_center_m2: float
    episode_steps: int


def episode_metrics(
    track: TrackDefinition,
    results: list[StepResult],
    states: list[CarState],
) -> EpisodeMetrics:
    """Summarize one completed episode.

    `states` holds the reset state followed by every post-step state, so
    len(states) == len(results) + 1. Mean speed counts the longitudinal
    component only; distance from center is trackPos denormalized back
    to meters.
    """
    if not results:
        raise UsageError("cannot summarize an empty episode")
    if len(states) != len(results) + 1:
        raise UsageError(
            f"expected {len(results) + 1} states for {len(results)} steps, got {len(states)}")
    speeds = np.array([r.observation[OBS_SPEED_X] for r in results])
    rewards = np.array([r.reward for r in results])
    dist_center = np.array(
        [r.observation[OBS_TRACK_POS] * track.half_width for r in results])
    return EpisodeMetrics(
        mean_speed_kmh=float(speeds.mean()),
        mean_step_gain=float(rewards.mean()),
        total_distance_m=float(states[-1].arc_progress - states[0].arc_progress),
        total_reward=float(rewards.sum()),
        var_dist_center_m2=float(dist_center.var()),
        episode_steps=len(results),
    )
