"""Jerk-limited tweezer trajectories.

Every trajectory is a chain of cubic segments in the tweezer plane. A segment
stores its polynomial coefficients per axis, ``x(tau) = c0 + c1 tau + c2 tau^2
+ c3 tau^3`` with ``tau = t - t0``, so position, velocity, acceleration and jerk
are all exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

CONTINUITY_TOL = 1e-12


@dataclass(frozen=True)
class TrajectorySegment:
    t0: float
    duration: float
    coeffs_x: tuple[float, float, float, float]
    coeffs_y: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.duration < 0:
            raise InvalidArgumentError(f"segment duration must be >= 0, got {self.duration}")

    @property
    def t1(self) -> float:
        return self.t0 + self.duration

    def coeffs(self) -> np.ndarray:
        """Coefficients as a ``(2, 4)`` array, rows x and y."""
        return np.array([self.coeffs_x, self.coeffs_y], dtype=float)

    def evaluate(self, t):
        """Position, velocity, acceleration at (array of) ``t``; each ``(..., 2)``."""
        tau = np.asarray(t, dtype=float) - self.t0
        c = self.coeffs()
        tau = tau[..., None]
        x = c[:, 0] + tau * (c[:, 1] + tau * (c[:, 2] + tau * c[:, 3]))
        v = c[:, 1] + tau * (2 * c[:, 2] + 3 * tau * c[:, 3])
        a = 2 * c[:, 2] + 6 * tau * c[:, 3]
        return x, v, a

    def jerk(self) -> np.ndarray:
        return 6.0 * self.coeffs()[:, 3]

    def shifted(self, dt: float = 0.0, dx=(0.0, 0.0)) -> "TrajectorySegment":
        cx, cy = list(self.coeffs_x), list(self.coeffs_y)
        cx[0] += dx[0]
        cy[0] += dx[1]
        return TrajectorySegment(self.t0 + dt, self.duration, tuple(cx), tuple(cy))


@dataclass(frozen=True)
class MotionState:
    t: float
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray


@dataclass
class Trajectory:
    segments: list[TrajectorySegment] = field(default_factory=list)
    label: str = ""

    def __post_init__(self):
        for prev, nxt in zip(self.segments, self.segments[1:]):
            if abs(prev.t1 - nxt.t0) > CONTINUITY_TOL:
                raise InvalidArgumentError(
                    f"segments of {self.label!r} are not contiguous at t={prev.t1}")

    @property
    def t_start(self) -> float:
        return self.segments[0].t0 if self.segments else 0.0

    @property
    def t_end(self) -> float:
        return self.segments[-1].t1 if self.segments else 0.0

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def end_state(self) -> MotionState:
        return sample(self, self.t_end)

    def continuity_gaps(self) -> list[tuple[float, float]]:
        """(position gap, velocity gap) at every internal boundary."""
        gaps = []
        for prev, nxt in zip(self.segments, self.segments[1:]):
            x0, v0, _ = prev.evaluate(prev.t1)
            x1, v1, _ = nxt.evaluate(nxt.t0)
            gaps.append((float(np.max(np.abs(x1 - x0))), float(np.max(np.abs(v1 - v0)))))
        return gaps

    def then(self, other: "Trajectory") -> "Trajectory":
        """Append ``other`` after this trajectory, rebased in time and position.

        ``other`` is interpreted relative to its own start: it is shifted so it
        begins at ``self.t_end`` at the current end position.
        """
        if not self.segments:
            return Trajectory(list(other.segments), self.label or other.label)
        if not other.segments:
            return Trajectory(list(self.segments), self.label)
        end = self.end_state()
        x_other, _, _ = other.segments[0].evaluate(other.t_start)
        dt = self.t_end - other.t_start
        dx = end.x - x_other
        segs = list(self.segments) + [s.shifted(dt, dx) for s in other.segments]
        return Trajectory(segs, self.label)

    def to_json_obj(self) -> list[dict]:
        return [
            {"t0": s.t0, "duration": s.duration,
             "coeffs_x": list(s.coeffs_x), "coeffs_y": list(s.coeffs_y)}
            for s in self.segments
        ]

    @classmethod
    def from_json_obj(cls, obj, label: str = "") -> "Trajectory":
        segs = [
            TrajectorySegment(float(d["t0"]), float(d["duration"]),
                              tuple(float(c) for c in d["coeffs_x"]),
                              tuple(float(c) for c in d["coeffs_y"]))
            for d in obj
        ]
        return cls(segs, label)

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def _unit(direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    n = np.linalg.norm(d)
    if n == 0:
        raise InvalidArgumentError("direction must be non-zero")
    return d / n


def _segment_1d(t0, duration, coeffs, direction, origin) -> TrajectorySegment:
    u = _unit(direction)
    c = np.asarray(coeffs, dtype=float)
    cx = c * u[0]
    cy = c * u[1]
    cx[0] += origin[0]
    cy[0] += origin[1]
    return TrajectorySegment(t0, duration, tuple(float(v) for v in cx), tuple(float(v) for v in cy))


def make_rest_to_rest_move(d: float, T: float, direction=(1.0, 0.0), x0=(0.0, 0.0),
                           t0: float = 0.0, label: str = "") -> Trajectory:
    """Cubic move ``x(t) = d (3 s^2 - 2 s^3)``, ``s = t/T``, starting and ending at rest.

    The jerk is constant with magnitude ``12 |d| / T**3``.
    """
    if not T > 0:
        raise InvalidArgumentError(f"move duration must be positive, got {T}")
    coeffs = (0.0, 0.0, 3.0 * d / T**2, -2.0 * d / T**3)
    return Trajectory([_segment_1d(t0, T, coeffs, direction, x0)], label)


def make_velocity_ramp(dv: float, jerk: float, v0: float = 0.0, direction=(1.0, 0.0),
                       x0=(0.0, 0.0), t0: float = 0.0, label: str = "") -> Trajectory:
    """Constant-jerk cubic taking the speed from ``v0`` to ``v0 + dv``.

    Boundary conditions are ``v(0) = v0``, ``v(T) = v0 + dv`` and ``a(T) = 0``, so
    a constant-velocity segment can follow with continuous acceleration; the
    initial acceleration is ``2 dv / T``. ``T = sqrt(2 |dv| / jerk)`` and the
    distance covered beyond ``v0 T`` is ``2 dv T / 3``.
    """
    if not jerk > 0:
        raise InvalidArgumentError(f"jerk must be positive, got {jerk}")
    T = math.sqrt(2.0 * abs(dv) / jerk)
    if T == 0.0:
        return Trajectory([_segment_1d(t0, 0.0, (0.0, v0, 0.0, 0.0), direction, x0)], label)
    c3 = -dv / (3.0 * T**2)
    coeffs = (0.0, v0, -3.0 * c3 * T, c3)
    return Trajectory([_segment_1d(t0, T, coeffs, direction, x0)], label)


def make_constant_velocity(v: float, duration: float, direction=(1.0, 0.0), x0=(0.0, 0.0),
                           t0: float = 0.0, label: str = "") -> Trajectory:
    return Trajectory([_segment_1d(t0, duration, (0.0, v, 0.0, 0.0), direction, x0)], label)


def make_hold(duration: float, x0=(0.0, 0.0), t0: float = 0.0, label: str = "") -> Trajectory:
    return Trajectory([TrajectorySegment(t0, duration, (x0[0], 0.0, 0.0, 0.0),
                                         (x0[1], 0.0, 0.0, 0.0))], label)


def sample(traj: Trajectory, t: float) -> MotionState:
    """Exact motion state at time ``t``.

    Before the first segment the initial state is returned; after the last one
    the atom keeps flying at its final velocity with zero acceleration.
    """
    if not traj.segments:
        z = np.zeros(2)
        return MotionState(t, z, z.copy(), z.copy())
    first, last = traj.segments[0], traj.segments[-1]
    if t <= first.t0:
        x, v, a = first.evaluate(first.t0)
        return MotionState(t, x, v, a)
    if t >= last.t1:
        x, v, _ = last.evaluate(last.t1)
        return MotionState(t, x + v * (t - last.t1), v, np.zeros(2))
    starts = [s.t0 for s in traj.segments]
    i = max(0, int(np.searchsorted(starts, t, side="right")) - 1)
    x, v, a = traj.segments[i].evaluate(t)
    return MotionState(t, x, v, a)


def positions(traj: Trajectory, times) -> np.ndarray:
    """Vectorised positions ``(len(times), 2)`` with the same edge rules as ``sample``."""
    times = np.asarray(times, dtype=float)
    out = np.empty(times.shape + (2,))
    if not traj.segments:
        out[:] = 0.0
        return out
    first, last = traj.segments[0], traj.segments[-1]
    x_first, _, _ = first.evaluate(first.t0)
    x_last, v_last, _ = last.evaluate(last.t1)
    before = times <= first.t0
    after = times >= last.t1
    out[before] = x_first
    out[after] = x_last + v_last * (times[after] - last.t1)[:, None]
    inside = ~(before | after)
    if np.any(inside):
        starts = np.array([s.t0 for s in traj.segments])
        seg_idx = np.clip(np.searchsorted(starts, times[inside], side="right") - 1, 0, None)
        ti = times[inside]
        res = np.empty((ti.size, 2))
        for i in np.unique(seg_idx):
            mask = seg_idx == i
            res[mask], _, _ = traj.segments[i].evaluate(ti[mask])
        out[inside] = res
    return out


def zone_transfer_cost(dv: float, jerk: float) -> tuple[float, float]:
    """Time and distance to change velocity by ``dv`` at constant ``jerk``."""
    ramp = make_velocity_ramp(abs(dv), jerk)
    seg = ramp.segments[0]
    if seg.duration == 0.0:
        return 0.0, 0.0
    x_end, _, _ = seg.evaluate(seg.t1)
    return seg.duration, float(np.linalg.norm(x_end))


def rest_to_rest_jerk(d: float, T: float) -> float:
    if not T > 0:
        raise InvalidArgumentError(f"move duration must be positive, got {T}")
    return 12.0 * abs(d) / T**3
