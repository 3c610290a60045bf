"""Exact simulation of the planar linear system ``dY/dt = A_{I_t} Y`` with telegraph switching.

Between jumps the flow is applied in closed form, so the only error is
floating-point rounding.  The state is kept in log-polar form: an angle on
the circle and ``log |Y|``, which stays finite over horizons where ``|Y|``
itself would overflow.

Internally the angle is split into a projective part ``phi`` in ``[0, pi)``
and a half-turn bit.  The radial dynamics only see ``phi``, so trajectories
started from antipodal points have bit-identical log-radius paths.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg2 import TraceZeroMatrix2

__all__ = [
    "SwitchedLinearSystem",
    "LogPolarState",
    "LogPolarTrajectory",
    "sample_holding_time",
    "flow_linear",
    "simulate",
    "angular_velocity",
    "radial_rate",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SwitchedLinearSystem:
    """Two trace-zero generators and the rates of leaving each mode."""

    A0: TraceZeroMatrix2
    A1: TraceZeroMatrix2
    k0: float = 1.0
    k1: float = 1.0

    def __post_init__(self):
        for name in ("k0", "k1"):
            k = float(getattr(self, name))
            if not (k > 0.0 and math.isfinite(k)):
                raise ValueError(f"switching rate {name} must be positive and finite, got {k!r}")
            object.__setattr__(self, name, k)

    def matrix(self, mode: int) -> TraceZeroMatrix2:
        return self.A1 if mode else self.A0

    def rate(self, mode: int) -> float:
        return self.k1 if mode else self.k0

    def swapped(self) -> "SwitchedLinearSystem":
        return SwitchedLinearSystem(self.A1, self.A0, self.k1, self.k0)

    def to_dict(self) -> dict:
        return {
            "type": "linear",
            "A0": self.A0.to_list(),
            "A1": self.A1.to_list(),
            "k0": self.k0,
            "k1": self.k1,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SwitchedLinearSystem":
        return cls(
            TraceZeroMatrix2.from_array(d["A0"]),
            TraceZeroMatrix2.from_array(d["A1"]),
            float(d.get("k0", 1.0)),
            float(d.get("k1", 1.0)),
        )


@dataclass(frozen=True)
class LogPolarState:
    """Angle ``theta`` in ``[0, 2pi)``, ``log |Y|``, current mode and time."""

    theta: float
    log_r: float = 0.0
    mode: int = 0
    time: float = 0.0

    def __post_init__(self):
        if self.mode not in (0, 1):
            raise ValueError(f"mode must be 0 or 1, got {self.mode!r}")
        if not (math.isfinite(self.theta) and math.isfinite(self.log_r)):
            raise ValueError("theta and log_r must be finite")
        object.__setattr__(self, "theta", math.fmod(self.theta, TWO_PI) % TWO_PI)

    @classmethod
    def from_vector(cls, y, mode: int = 0, time: float = 0.0) -> "LogPolarState":
        y1, y2 = float(y[0]), float(y[1])
        r = math.hypot(y1, y2)
        if r == 0.0:
            raise ValueError("the origin has no direction")
        return cls(math.atan2(y2, y1), math.log(r), mode, time)

    def vector(self) -> np.ndarray:
        r = math.exp(self.log_r)
        return np.array([r * math.cos(self.theta), r * math.sin(self.theta)])


def _split(theta: float) -> tuple[float, int]:
    """``theta`` in ``[0, 2pi)`` -> (projective angle in ``[0, pi)``, half-turn bit)."""
    if theta >= math.pi:
        return theta - math.pi, 1
    return theta, 0


def _join(phi: float, parity: int) -> float:
    return phi + math.pi if parity else phi


def _reduce(alpha: float, parity: int) -> tuple[float, int]:
    """Map an ``atan2`` result onto ``[0, pi)``, toggling the half-turn bit as needed."""
    if alpha < 0.0:
        alpha += math.pi
        parity ^= 1
    if alpha >= math.pi:
        alpha -= math.pi
        parity ^= 1
    return alpha, parity


class _Mode:
    """Per-mode constants for the hot loop."""

    __slots__ = ("a", "b", "c", "w", "rotation", "turn_rate", "rate")

    def __init__(self, A: TraceZeroMatrix2, rate: float):
        self.a, self.b, self.c = A.a, A.b, A.c
        self.w = A.omega
        self.rotation = A.a == 0.0 and A.b == -A.c
        self.turn_rate = A.c
        self.rate = rate

    def flow(self, phi: float, parity: int, log_r: float, t: float) -> tuple[float, int, float]:
        if t == 0.0:
            return phi, parity, log_r
        if self.rotation:
            # isometry: the radius is untouched and the angle turns uniformly
            s = phi + self.turn_rate * t
            half_turns = math.floor(s / math.pi)
            phi = s - half_turns * math.pi
            parity ^= half_turns & 1
            if not 0.0 <= phi < math.pi:
                phi, parity = _reduce(phi, parity)
            return phi, parity, log_r
        wt = self.w * t
        co = math.cos(wt)
        si = math.sin(wt) / self.w
        ux, uy = math.cos(phi), math.sin(phi)
        vx = (co + si * self.a) * ux + si * self.b * uy
        vy = si * self.c * ux + (co - si * self.a) * uy
        phi, parity = _reduce(math.atan2(vy, vx), parity)
        return phi, parity, log_r + math.log(math.hypot(vx, vy))


def sample_holding_time(rate: float, rng: np.random.Generator) -> float:
    """Exponential holding time with the given rate, by inversion of a uniform draw.

    The draw ``u`` is taken in ``(0, 1)`` so the result is strictly positive.
    """
    if not rate > 0.0:
        raise ValueError(f"rate must be positive, got {rate!r}")
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return -math.log1p(-u) / rate


def flow_linear(A: TraceZeroMatrix2, t: float, state: LogPolarState) -> LogPolarState:
    """Advance ``state`` by time ``t >= 0`` under ``dY/dt = A Y`` exactly."""
    if t < 0.0:
        raise ValueError("flow time must be nonnegative")
    phi, parity = _split(state.theta)
    phi, parity, log_r = _Mode(A, 1.0).flow(phi, parity, state.log_r, t)
    return LogPolarState(_join(phi, parity), log_r, state.mode, state.time + t)


def angular_velocity(A: TraceZeroMatrix2, theta):
    """``d theta/dt = <A u, u_perp>`` at angle ``theta`` (scalar or array)."""
    return 0.5 * (A.c - A.b) + 0.5 * (A.c + A.b) * np.cos(2.0 * theta) - A.a * np.sin(2.0 * theta)


def radial_rate(A: TraceZeroMatrix2, theta):
    """``d log|Y|/dt = <A u, u>`` at angle ``theta`` (scalar or array)."""
    return A.a * np.cos(2.0 * theta) + 0.5 * (A.b + A.c) * np.sin(2.0 * theta)


@dataclass
class LogPolarTrajectory:
    """Segment skeleton of one run plus states sampled on an output grid.

    Segment ``j`` starts at ``seg_time[j]`` in state
    ``(seg_theta[j], seg_log_r[j], seg_mode[j])`` and lasts until
    ``seg_time[j + 1]`` (or ``horizon``).  Every segment after the first
    starts with a jump.
    """

    system: SwitchedLinearSystem
    horizon: float
    seg_time: np.ndarray
    seg_theta: np.ndarray
    seg_log_r: np.ndarray
    seg_mode: np.ndarray
    grid: np.ndarray
    theta: np.ndarray
    log_r: np.ndarray
    mode: np.ndarray
    final: LogPolarState
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def jump_times(self) -> np.ndarray:
        return self.seg_time[1:]

    @property
    def n_jumps(self) -> int:
        return len(self.seg_time) - 1

    def jumps(self) -> list[tuple[float, LogPolarState]]:
        return [
            (float(t), LogPolarState(float(th), float(lr), int(m), float(t)))
            for t, th, lr, m in zip(
                self.seg_time[1:], self.seg_theta[1:], self.seg_log_r[1:], self.seg_mode[1:]
            )
        ]

    def segment_durations(self) -> np.ndarray:
        return np.diff(np.append(self.seg_time, self.horizon))

    def header(self) -> dict:
        return {"system": self.system.to_dict(), "horizon": self.horizon, "seed": self.seed, **self.meta}

    def write_csv(self, path) -> None:
        """Grid samples as ``time,theta,log_r,mode``; metadata in ``#`` comment lines."""
        with open(path, "w", newline="") as fh:
            fh.write("# " + json.dumps(self.header(), sort_keys=True) + "\n")
            w = csv.writer(fh)
            w.writerow(["time", "theta", "log_r", "mode"])
            for row in zip(self.grid, self.theta, self.log_r, self.mode):
                w.writerow([repr(float(row[0])), repr(float(row[1])), repr(float(row[2])), int(row[3])])

    def to_json(self) -> dict:
        return {
            "metadata": self.header(),
            "jumps": [
                {"time": float(t), "theta": float(th), "log_r": float(lr), "mode": int(m)}
                for t, th, lr, m in zip(
                    self.seg_time[1:], self.seg_theta[1:], self.seg_log_r[1:], self.seg_mode[1:]
                )
            ],
            "final": {
                "time": self.final.time,
                "theta": self.final.theta,
                "log_r": self.final.log_r,
                "mode": self.final.mode,
            },
        }


class LinearWalker:
    """Incremental simulator; keeps the residual holding time across calls."""

    def __init__(self, system: SwitchedLinearSystem, initial: LogPolarState, rng: np.random.Generator):
        self.system = system
        self.rng = rng
        self.modes = (_Mode(system.A0, system.k0), _Mode(system.A1, system.k1))
        self.phi, self.parity = _split(initial.theta)
        self.log_r = initial.log_r
        self.mode = initial.mode
        self.time = initial.time
        self.next_jump = self.time + sample_holding_time(self.modes[self.mode].rate, rng)

    @property
    def theta(self) -> float:
        return _join(self.phi, self.parity)

    def state(self) -> LogPolarState:
        return LogPolarState(self.theta, self.log_r, self.mode, self.time)

    def peek(self, t: float) -> tuple[float, float]:
        """(theta, log_r) at time ``t`` inside the current segment, without advancing."""
        phi, parity, log_r = self.modes[self.mode].flow(self.phi, self.parity, self.log_r, t - self.time)
        return _join(phi, parity), log_r

    def jump(self) -> None:
        """Flow to the pending jump time and switch mode."""
        m = self.modes[self.mode]
        self.phi, self.parity, self.log_r = m.flow(self.phi, self.parity, self.log_r, self.next_jump - self.time)
        self.time = self.next_jump
        self.mode ^= 1
        self.next_jump = self.time + sample_holding_time(self.modes[self.mode].rate, self.rng)

    def advance(self, t_stop: float) -> None:
        """Run to ``t_stop``; a jump scheduled exactly at ``t_stop`` is left pending."""
        while self.next_jump < t_stop:
            self.jump()
        self.phi, self.parity, self.log_r = self.modes[self.mode].flow(
            self.phi, self.parity, self.log_r, t_stop - self.time
        )
        self.time = t_stop


def simulate(
    system: SwitchedLinearSystem,
    initial: LogPolarState,
    horizon: float,
    output_grid: Sequence[float] = (),
    rng: np.random.Generator | None = None,
    seed: int | None = None,
) -> LogPolarTrajectory:
    """Simulate on ``[initial.time, initial.time + horizon]``.

    Either ``rng`` or ``seed`` must be given.  Grid points are absolute times
    and are evaluated from the start of the segment that contains them.
    """
    if not horizon > 0.0:
        raise ValueError("horizon must be positive")
    if rng is None:
        if seed is None:
            raise ValueError("pass either rng or seed")
        rng = np.random.default_rng(seed)
    t0 = initial.time
    t_end = t0 + horizon
    grid = np.asarray(output_grid, dtype=float)
    if grid.size and (grid.min() < t0 or grid.max() > t_end or np.any(np.diff(grid) < 0)):
        raise ValueError("output grid must be sorted and lie within the simulated window")

    walker = LinearWalker(system, initial, rng)
    seg = [(walker.time, walker.theta, walker.log_r, walker.mode)]
    g_theta = np.empty(grid.size)
    g_log_r = np.empty(grid.size)
    g_mode = np.empty(grid.size, dtype=np.int8)
    gi = 0

    def fill_until(t_limit: float, inclusive: bool) -> None:
        nonlocal gi
        while gi < grid.size and (grid[gi] < t_limit or (inclusive and grid[gi] == t_limit)):
            g_theta[gi], g_log_r[gi] = walker.peek(grid[gi])
            g_mode[gi] = walker.mode
            gi += 1

    while walker.next_jump < t_end:
        fill_until(walker.next_jump, inclusive=False)
        walker.jump()
        seg.append((walker.time, walker.theta, walker.log_r, walker.mode))
    fill_until(t_end, inclusive=True)
    walker.advance(t_end)

    seg_arr = np.array(seg, dtype=float)
    return LogPolarTrajectory(
        system=system,
        horizon=t_end,
        seg_time=seg_arr[:, 0],
        seg_theta=seg_arr[:, 1],
        seg_log_r=seg_arr[:, 2],
        seg_mode=seg_arr[:, 3].astype(np.int8),
        grid=grid,
        theta=g_theta,
        log_r=g_log_r,
        mode=g_mode,
        final=walker.state(),
        seed=seed,
    )
