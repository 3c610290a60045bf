"""Predator-prey dynamics switched between two Lotka-Volterra regimes.

Each regime ``(a, b, c, d)`` drives::

    dx/dt = x (a - b y)
    dy/dt = y (-c + d x)

and the active regime is flipped by a two-state Markov chain, with constant
rates ``k0, k1`` or with state-dependent rates bounded by ``rate_bound``
(sampled by thinning).  Integration happens in ``(log x, log y)`` so the
densities stay positive however far they swing.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _lv_kernel as K
from .linalg2 import TraceZeroMatrix2, is_proportional
from .switched_linear import sample_holding_time

__all__ = [
    "LVRegime",
    "SwitchedLVSystem",
    "LVState",
    "Equilibrium",
    "IntegratorConfig",
    "StepUnderflowError",
    "RateBoundError",
    "equilibrium",
    "has_common_equilibrium",
    "first_integral",
    "linearize",
    "check_noncollinear",
    "flow_lv",
    "simulate_lv",
    "sample_jump_state_dependent",
    "LVWalker",
    "LVTrajectory",
    "DEMO_SYSTEM",
]


class StepUnderflowError(RuntimeError):
    """The integrator could not meet its tolerance without shrinking below ``h_min``."""


class RateBoundError(RuntimeError):
    """A state-dependent rate exceeded the declared bound used for thinning."""


@dataclass(frozen=True)
class LVRegime:
    """Prey growth ``a``, predation ``b``, predator death ``c``, conversion ``d``."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            val = float(getattr(self, name))
            if not (val > 0.0 and math.isfinite(val)):
                raise ValueError(f"regime coefficient {name} must be strictly positive, got {val!r}")
            object.__setattr__(self, name, val)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def vector_field(self, x: float, y: float) -> tuple[float, float]:
        return x * (self.a - self.b * y), y * (-self.c + self.d * x)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}


RateFn = Callable[[float, float], float]


@dataclass(frozen=True)
class SwitchedLVSystem:
    """Two regimes plus switching rates.

    With ``rate_fns = (f0, f1)`` the rate of leaving mode ``i`` at ``(x, y)``
    is ``f_i(x, y)``, which must stay in ``(0, rate_bound]``.
    """

    regime0: LVRegime
    regime1: LVRegime
    k0: float = 1.0
    k1: float = 1.0
    rate_fns: tuple[RateFn, RateFn] | None = None
    rate_bound: float | None = None

    def __post_init__(self):
        for name in ("k0", "k1"):
            k = float(getattr(self, name))
            if not (k > 0.0 and math.isfinite(k)):
                raise ValueError(f"switching rate {name} must be positive and finite, got {k!r}")
            object.__setattr__(self, name, k)
        if self.rate_fns is not None:
            if self.rate_bound is None or not self.rate_bound > 0.0:
                raise ValueError("state-dependent rates need a positive rate_bound")

    def regime(self, mode: int) -> LVRegime:
        return self.regime1 if mode else self.regime0

    def rate(self, mode: int) -> float:
        return self.k1 if mode else self.k0

    @property
    def state_dependent(self) -> bool:
        return self.rate_fns is not None

    def stationary_mode_probabilities(self) -> tuple[float, float]:
        s = self.k0 + self.k1
        return self.k1 / s, self.k0 / s

    def to_dict(self) -> dict:
        if self.state_dependent:
            raise ValueError("state-dependent rate functions are not serializable")
        return {
            "type": "lv",
            "regime0": self.regime0.to_dict(),
            "regime1": self.regime1.to_dict(),
            "k0": self.k0,
            "k1": self.k1,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SwitchedLVSystem":
        return cls(
            LVRegime(**d["regime0"]),
            LVRegime(**d["regime1"]),
            float(d.get("k0", 1.0)),
            float(d.get("k1", 1.0)),
        )


DEMO_SYSTEM = SwitchedLVSystem(LVRegime(1.0, 1.0, 1.0, 1.0), LVRegime(2.0, 2.0, 1.0, 1.0), 1.0, 1.0)


@dataclass(frozen=True)
class LVState:
    log_x: float
    log_y: float
    mode: int = 0
    time: float = 0.0

    def __post_init__(self):
        if self.mode not in (0, 1):
            raise ValueError(f"mode must be 0 or 1, got {self.mode!r}")
        if not (math.isfinite(self.log_x) and math.isfinite(self.log_y)):
            raise ValueError("log densities must be finite")

    @classmethod
    def from_xy(cls, x: float, y: float, mode: int = 0, time: float = 0.0) -> "LVState":
        if not (x > 0.0 and y > 0.0):
            raise ValueError("densities must be strictly positive")
        return cls(math.log(x), math.log(y), mode, time)

    @property
    def x(self) -> float:
        return math.exp(self.log_x)

    @property
    def y(self) -> float:
        return math.exp(self.log_y)


@dataclass(frozen=True)
class Equilibrium:
    p: float
    q: float

    def distance(self, x: float, y: float) -> float:
        return math.hypot(x - self.p, y - self.q)


@dataclass(frozen=True)
class IntegratorConfig:
    """Step control for :func:`flow_lv`; ``tol_h`` is relative H drift per unit time."""

    tol_h: float = 1e-8
    h_init: float = 1e-2
    h_max: float = 0.05
    h_min: float = 1e-12

    def to_dict(self) -> dict:
        return {"tol_h": self.tol_h, "h_init": self.h_init, "h_max": self.h_max, "h_min": self.h_min}


def equilibrium(r: LVRegime) -> Equilibrium:
    """The interior rest point ``(c/d, a/b)``."""
    return Equilibrium(r.c / r.d, r.a / r.b)


def _close(x: float, y: float, tol: float) -> bool:
    return abs(x - y) <= tol * max(abs(x), abs(y))


def has_common_equilibrium(r0: LVRegime, r1: LVRegime, tol: float = 1e-9) -> bool:
    e0, e1 = equilibrium(r0), equilibrium(r1)
    return _close(e0.p, e1.p, tol) and _close(e0.q, e1.q, tol)


def first_integral(r: LVRegime, state: LVState) -> float:
    """``H = d x - c log x + b y - a log y``, conserved by the flow of ``r``."""
    return K.first_integral(r.a, r.b, r.c, r.d, state.log_x, state.log_y)


def linearize(r: LVRegime, eq: Equilibrium) -> TraceZeroMatrix2:
    """Jacobian ``[[0, -b p], [d q, 0]]`` of the regime's field at ``eq``."""
    return TraceZeroMatrix2(0.0, -r.b * eq.p, r.d * eq.q)


def check_noncollinear(r0: LVRegime, r1: LVRegime, tol: float = 1e-9) -> bool:
    """Whether ``b1 d0 != b0 d1`` (scale-free), for regimes sharing their equilibrium.

    With a common equilibrium this is equivalent to neither field being a
    multiple of the other.
    """
    if not has_common_equilibrium(r0, r1):
        raise ValueError("regimes do not share an equilibrium")
    return not _close(r1.b * r0.d, r0.b * r1.d, tol)


def _regime_args(r: LVRegime):
    return r.a, r.b, r.c, r.d


def flow_lv(
    r: LVRegime, state: LVState, duration: float, config: IntegratorConfig = IntegratorConfig()
) -> LVState:
    """Integrate one regime for ``duration`` time units.

    Raises
    ------
    StepUnderflowError
        If the drift tolerance cannot be met above ``config.h_min``.
    """
    if duration < 0.0:
        raise ValueError("duration must be nonnegative")
    if duration == 0.0:
        return state
    stats = K.new_stats(state.log_x, state.log_y)
    u, v, t, _, status, _ = K.integrate(
        *_regime_args(r), state.log_x, state.log_y, state.time, state.time + duration,
        config.h_init, config.tol_h, config.h_min, config.h_max,
        K.EMPTY, K.EMPTY, K.EMPTY, 0, 0.0, 0.0, 0.0, stats,
    )
    if status == K.UNDERFLOW:
        raise StepUnderflowError(f"step size fell below {config.h_min} at t={t} (log x={u}, log y={v})")
    return LVState(u, v, state.mode, state.time + duration)


def _accept_candidate(rate_fn: RateFn, bound: float, x: float, y: float, rng: np.random.Generator) -> bool:
    rate = float(rate_fn(x, y))
    if not rate <= bound:
        raise RateBoundError(f"rate {rate!r} at ({x!r}, {y!r}) exceeds the thinning bound {bound!r}")
    if not rate > 0.0:
        raise RateBoundError(f"rate {rate!r} at ({x!r}, {y!r}) is not positive")
    return rng.random() * bound < rate


def sample_jump_state_dependent(
    rate_fn: RateFn,
    bound: float,
    advance: Callable[[float], tuple[float, float]],
    rng: np.random.Generator,
) -> float:
    """Time to the next jump when the jump rate depends on the state.

    Candidates arrive at rate ``bound``; ``advance(dt)`` moves the flow on by
    ``dt`` and returns the new ``(x, y)``, where the candidate is accepted
    with probability ``rate_fn(x, y) / bound``.
    """
    t = 0.0
    while True:
        dt = sample_holding_time(bound, rng)
        x, y = advance(dt)
        t += dt
        if _accept_candidate(rate_fn, bound, x, y, rng):
            return t


@dataclass
class SegmentRecord:
    start: float
    duration: float
    mode: int
    h_start: float
    dh: float

    @property
    def drift_rate(self) -> float:
        """Relative H drift per unit time over the segment."""
        if self.duration == 0.0:
            return 0.0
        return abs(self.dh) / (abs(self.h_start) * self.duration)


class LVWalker:
    """Incremental simulator of the switched system.

    Tracks running extrema of ``log x`` and ``log y`` at integrator-substep
    resolution and the H drift of every inter-jump segment.
    """

    def __init__(
        self,
        system: SwitchedLVSystem,
        initial: LVState,
        rng: np.random.Generator,
        config: IntegratorConfig = IntegratorConfig(),
        keep_segments: bool = False,
    ):
        self.system = system
        self.rng = rng
        self.config = config
        self.u, self.v = initial.log_x, initial.log_y
        self.mode = initial.mode
        self.time = initial.time
        self.h = config.h_init
        self.stats = K.new_stats(self.u, self.v)
        self.n_jumps = 0
        self.keep_segments = keep_segments
        self.segments: list[SegmentRecord] = []
        self.max_drift_rate = 0.0
        self._seg_start = self.time
        self._seg_h = self._h_active()
        self._seg_dh = 0.0
        self.next_event = self.time + self._draw_gap()

    def _draw_gap(self) -> float:
        if self.system.state_dependent:
            return sample_holding_time(self.system.rate_bound, self.rng)
        return sample_holding_time(self.system.rate(self.mode), self.rng)

    def _h_active(self) -> float:
        r = self.system.regime(self.mode)
        return K.first_integral(r.a, r.b, r.c, r.d, self.u, self.v)

    def state(self) -> LVState:
        return LVState(self.u, self.v, self.mode, self.time)

    @property
    def extrema(self) -> tuple[float, float, float, float]:
        """(min log x, max log x, min log y, max log y) so far."""
        s = self.stats
        return s[K.UMIN], s[K.UMAX], s[K.VMIN], s[K.VMAX]

    def _close_segment(self) -> None:
        rec = SegmentRecord(self._seg_start, self.time - self._seg_start, self.mode, self._seg_h, self._seg_dh)
        self.max_drift_rate = max(self.max_drift_rate, rec.drift_rate)
        if self.keep_segments:
            self.segments.append(rec)

    def _integrate(self, t_stop, grid_t, grid_u, grid_v, idx, exit_ball):
        r = self.system.regime(self.mode)
        before = self.stats[K.DH_TOTAL]
        cx, cy, r2 = exit_ball if exit_ball is not None else (0.0, 0.0, 0.0)
        u, v, t, h, status, idx = K.integrate(
            r.a, r.b, r.c, r.d, self.u, self.v, self.time, t_stop, self.h,
            self.config.tol_h, self.config.h_min, self.config.h_max,
            grid_t, grid_u, grid_v, idx, cx, cy, r2, self.stats,
        )
        self._seg_dh += self.stats[K.DH_TOTAL] - before
        if status == K.UNDERFLOW:
            raise StepUnderflowError(
                f"step size fell below {self.config.h_min} at t={t} (log x={u}, log y={v}, mode {self.mode})"
            )
        self.u, self.v, self.time, self.h = u, v, t, h
        return status, idx

    def _event(self) -> None:
        """Handle the pending jump or thinning candidate at the current time."""
        jump = True
        if self.system.state_dependent:
            jump = _accept_candidate(
                self.system.rate_fns[self.mode], self.system.rate_bound,
                math.exp(self.u), math.exp(self.v), self.rng,
            )
        if jump:
            self._close_segment()
            self.mode ^= 1
            self.n_jumps += 1
            self._seg_start = self.time
            self._seg_h = self._h_active()
            self._seg_dh = 0.0
        self.next_event = self.time + self._draw_gap()

    def advance(
        self,
        t_stop: float,
        grid: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] | None = None,
        grid_idx: int = 0,
        exit_ball: tuple[float, float, float] | None = None,
    ) -> tuple[bool, int]:
        """Run to ``t_stop`` or until the exit ball is left.

        ``grid = (times, log_x, log_y, mode)`` output buffers are filled from
        ``grid_idx`` on.  ``exit_ball = (cx, cy, radius**2)``.
        Returns ``(exited, grid_idx)``.
        """
        if grid is None:
            gt, gu, gv, gm = K.EMPTY, K.EMPTY, K.EMPTY, None
        else:
            gt, gu, gv, gm = grid
        while True:
            seg_end = self.next_event if self.next_event < t_stop else t_stop
            first = grid_idx
            status, grid_idx = self._integrate(seg_end, gt, gu, gv, grid_idx, exit_ball)
            if gm is not None:
                gm[first:grid_idx] = self.mode
            if status == K.EXITED:
                return True, grid_idx
            if self.time >= t_stop:
                return False, grid_idx
            self._event()

    def finish(self) -> None:
        """Close the open segment so its drift is recorded."""
        self._close_segment()
        self._seg_start = self.time
        self._seg_h = self._h_active()
        self._seg_dh = 0.0


@dataclass
class LVTrajectory:
    system: SwitchedLVSystem
    grid: np.ndarray
    log_x: np.ndarray
    log_y: np.ndarray
    mode: np.ndarray
    final: LVState
    n_jumps: int
    max_drift_rate: float
    extrema: tuple[float, float, float, float]
    segments: list = field(default_factory=list)
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def x(self) -> np.ndarray:
        return np.exp(self.log_x)

    @property
    def y(self) -> np.ndarray:
        return np.exp(self.log_y)

    def h_active(self) -> np.ndarray:
        out = np.empty(len(self.grid))
        for i in range(len(self.grid)):
            r = self.system.regime(int(self.mode[i]))
            out[i] = K.first_integral(r.a, r.b, r.c, r.d, self.log_x[i], self.log_y[i])
        return out

    def header(self) -> dict:
        sysd = self.system.to_dict() if not self.system.state_dependent else {"type": "lv", "state_dependent": True}
        return {"system": sysd, "seed": self.seed, "n_jumps": self.n_jumps,
                "max_drift_rate": self.max_drift_rate, **self.meta}

    def write_csv(self, path) -> None:
        """Columns ``time,x,y,log_x,log_y,mode,H_active``; metadata in a ``#`` line."""
        H = self.h_active()
        with open(path, "w", newline="") as fh:
            fh.write("# " + json.dumps(self.header(), sort_keys=True) + "\n")
            w = csv.writer(fh)
            w.writerow(["time", "x", "y", "log_x", "log_y", "mode", "H_active"])
            for i in range(len(self.grid)):
                w.writerow([
                    repr(float(self.grid[i])), repr(math.exp(self.log_x[i])), repr(math.exp(self.log_y[i])),
                    repr(float(self.log_x[i])), repr(float(self.log_y[i])), int(self.mode[i]), repr(float(H[i])),
                ])


def simulate_lv(
    system: SwitchedLVSystem,
    initial: LVState,
    horizon: float,
    output_grid: Sequence[float] = (),
    rng: np.random.Generator | None = None,
    seed: int | None = None,
    config: IntegratorConfig = IntegratorConfig(),
    keep_segments: bool = False,
) -> LVTrajectory:
    """Simulate on ``[initial.time, initial.time + horizon]``, sampling ``output_grid`` by dense output."""
    if not horizon > 0.0:
        raise ValueError("horizon must be positive")
    if rng is None:
        if seed is None:
            raise ValueError("pass either rng or seed")
        rng = np.random.default_rng(seed)
    t0 = initial.time
    t_end = t0 + horizon
    gt = np.ascontiguousarray(output_grid, dtype=float)
    if gt.size and (gt.min() < t0 or gt.max() > t_end or np.any(np.diff(gt) < 0)):
        raise ValueError("output grid must be sorted and lie within the simulated window")
    gu = np.empty(gt.size)
    gv = np.empty(gt.size)
    gm = np.empty(gt.size, dtype=np.int8)
    idx = 0
    while idx < gt.size and gt[idx] <= t0:
        gu[idx], gv[idx], gm[idx] = initial.log_x, initial.log_y, initial.mode
        idx += 1
    walker = LVWalker(system, initial, rng, config, keep_segments)
    walker.advance(t_end, (gt, gu, gv, gm), idx)
    walker.finish()
    return LVTrajectory(
        system=system, grid=gt, log_x=gu, log_y=gv, mode=gm, final=walker.state(),
        n_jumps=walker.n_jumps, max_drift_rate=walker.max_drift_rate, extrema=walker.extrema,
        segments=walker.segments, seed=seed, meta={"integrator": config.to_dict(), "horizon": horizon},
    )


def linearized_pair(system: SwitchedLVSystem) -> tuple[TraceZeroMatrix2, TraceZeroMatrix2]:
    """Jacobians of both regimes at the shared equilibrium."""
    if not has_common_equilibrium(system.regime0, system.regime1):
        raise ValueError("regimes do not share an equilibrium")
    eq = equilibrium(system.regime0)
    return linearize(system.regime0, eq), linearize(system.regime1, eq)


def noncollinear_by_jacobians(system: SwitchedLVSystem) -> bool:
    A0, A1 = linearized_pair(system)
    return not is_proportional(A0, A1)
