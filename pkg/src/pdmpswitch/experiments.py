"""Monte Carlo experiments on the switched Lotka-Volterra system.

Every experiment is a batch of independent trajectories.  Trajectory ``i``
draws from the stream ``(root_seed, *prefix, i)`` and returns a plain record;
records are folded into a summary in index order, so results do not depend
on the number of worker processes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from .lotka_volterra import (
    Equilibrium,
    IntegratorConfig,
    LVState,
    LVWalker,
    SwitchedLVSystem,
    check_noncollinear,
    equilibrium,
    has_common_equilibrium,
)
from .streams import check_seed, map_ordered, stream

__all__ = [
    "BatchConfig",
    "BatchResult",
    "run_batch",
    "ExitTimeReport",
    "exit_time_mc",
    "start_distance_sweep",
    "distance_trend",
    "OscillationReport",
    "oscillation_mc",
    "oscillation_batch",
    "TransienceReport",
    "transience_mc",
    "kaplan_meier",
    "tail_fit",
    "log10_v",
    "CensoringError",
]

LN10 = math.log(10.0)


class CensoringError(RuntimeError):
    """Too many runs hit the horizon cap for the tail fit to mean anything."""


# ---------------------------------------------------------------- batches


@dataclass(frozen=True)
class BatchConfig:
    root_seed: int
    n_trajectories: int
    params: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        check_seed(self.root_seed)
        if self.n_trajectories < 0:
            raise ValueError("n_trajectories must be nonnegative")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class BatchResult:
    experiment: str
    records: list[dict]
    summary: dict
    complete: bool = True
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "complete": self.complete,
            "error": self.error,
            "n_records": len(self.records),
            "summary": self.summary,
        }

    def summary_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, allow_nan=True).encode()


def _guarded(task: Callable, system, params, root_seed, key) -> dict:
    try:
        return task(system, params, stream(root_seed, *key))
    except Exception as exc:  # reported as a failed batch, never swallowed
        return {"error": f"{type(exc).__name__}: {exc}"}


def run_batch(
    config: BatchConfig,
    experiment: str,
    system: SwitchedLVSystem,
    prefix: tuple[int, ...] = (),
) -> BatchResult:
    """Run ``config.n_trajectories`` trajectories of a registered experiment.

    A failing trajectory stops the fold: the records before it are kept and
    the result is flagged incomplete.
    """
    task, summarize = EXPERIMENTS[experiment]
    args = [(task, system, config.params, config.root_seed, (*prefix, i)) for i in range(config.n_trajectories)]
    raw = map_ordered(_guarded, args, config.workers)
    records: list[dict] = []
    error = None
    for i, rec in enumerate(raw):
        if "error" in rec:
            error = f"trajectory {i}: {rec['error']}"
            break
        records.append(rec)
    summary = summarize(records, config.params) if records or config.n_trajectories == 0 else {}
    return BatchResult(experiment, records, summary, error is None, error)


# ---------------------------------------------------------------- exit times


def kaplan_meier(times: np.ndarray, censored: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Product-limit survival estimate at the distinct event times."""
    times = np.asarray(times, dtype=float)
    censored = np.asarray(censored, dtype=bool)
    order = np.lexsort((censored, times))
    t, c = times[order], censored[order]
    at_risk = len(t)
    s = 1.0
    out_t, out_s = [], []
    i = 0
    while i < len(t):
        j = i
        deaths = 0
        while j < len(t) and t[j] == t[i]:
            deaths += not c[j]
            j += 1
        if deaths:
            s *= 1.0 - deaths / at_risk
            out_t.append(t[i])
            out_s.append(s)
        at_risk -= j - i
        i = j
    return np.array(out_t), np.array(out_s)


def tail_fit(t: np.ndarray, s: np.ndarray, start: float) -> tuple[float, float, float, int]:
    """Least-squares line through ``log S`` for ``t > start`` with ``S > 0``.

    Returns ``(rate, intercept, r2, n_points)`` where ``rate`` is minus the slope.
    """
    mask = (t > start) & (s > 0.0)
    n = int(mask.sum())
    if n < 3:
        return math.nan, math.nan, math.nan, n
    x, y = t[mask], np.log(s[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else math.nan
    return float(-slope), float(intercept), r2, n


def _log_mean_exp(x: np.ndarray) -> float:
    m = float(x.max())
    return m + math.log(float(np.exp(x - m).mean()))


@dataclass
class ExitTimeReport:
    """Exit times from the ``epsilon`` ball started ``start_distance`` from the equilibrium.

    ``b_grid`` rows hold ``b``, ``log E[b^tau]`` (empirical, censored runs at
    the cap) and ``diverges``, set when ``log b`` is at least the fitted tail
    rate, beyond which the geometric tail makes the moment infinite.
    """

    epsilon: float
    start_distance: float
    horizon_cap: float
    samples: np.ndarray
    censored: np.ndarray
    exit_distance: np.ndarray
    fitted_tail_rate: float
    fit_intercept: float
    fit_r2: float
    n_tail_points: int
    b_grid: list[dict]
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def n_censored(self) -> int:
        return int(self.censored.sum())

    @property
    def censor_fraction(self) -> float:
        return self.n_censored / self.n if self.n else 0.0

    @property
    def valid(self) -> bool:
        """False when more than half the runs were censored."""
        return self.censor_fraction <= 0.5

    @property
    def mean(self) -> float:
        return float(self.samples.mean()) if self.n else math.nan

    @property
    def stderr(self) -> float:
        return float(self.samples.std(ddof=1) / math.sqrt(self.n)) if self.n > 1 else math.nan

    def survival(self) -> tuple[np.ndarray, np.ndarray]:
        return kaplan_meier(self.samples, self.censored)

    def to_dict(self, include_samples: bool = False) -> dict:
        d = {
            "epsilon": self.epsilon,
            "start_distance": self.start_distance,
            "horizon_cap": self.horizon_cap,
            "n": self.n,
            "n_censored": self.n_censored,
            "censor_fraction": self.censor_fraction,
            "valid": self.valid,
            "mean_tau": self.mean,
            "stderr_tau": self.stderr,
            "median_tau": float(np.median(self.samples)) if self.n else math.nan,
            "max_tau": float(self.samples.max()) if self.n else math.nan,
            "fitted_tail_rate": self.fitted_tail_rate,
            "fit_intercept": self.fit_intercept,
            "fit_r2": self.fit_r2,
            "n_tail_points": self.n_tail_points,
            "b_grid": self.b_grid,
            "params": self.params,
        }
        if include_samples:
            d["samples"] = [float(v) for v in self.samples]
            d["censored"] = [bool(v) for v in self.censored]
        return d


B_FRACTIONS = (0.25, 0.5, 0.75, 0.95, 1.25)


def _exit_params(system: SwitchedLVSystem, eq: Equilibrium | None, epsilon: float, start_distance: float,
                 horizon_cap: float, initial_mode: int | None, config: IntegratorConfig) -> dict:
    if eq is None:
        eq = equilibrium(system.regime0)
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    if not start_distance > 0.0:
        raise ValueError("start_distance must be positive")
    if not horizon_cap > 0.0:
        raise ValueError("horizon_cap must be positive")
    if start_distance < epsilon and start_distance >= min(eq.p, eq.q):
        raise ValueError("start circle leaves the positive quadrant")
    if initial_mode not in (None, 0, 1):
        raise ValueError("initial_mode must be None (stationary), 0 or 1")
    return {
        "p": eq.p, "q": eq.q, "epsilon": epsilon, "start_distance": start_distance,
        "horizon_cap": horizon_cap, "initial_mode": initial_mode, "integrator": config.to_dict(),
    }


def _initial_mode(system: SwitchedLVSystem, fixed: int | None, rng: np.random.Generator) -> int:
    if fixed is not None:
        return fixed
    p0, _ = system.stationary_mode_probabilities()
    return 0 if rng.random() < p0 else 1


def _exit_trajectory(system: SwitchedLVSystem, params: dict, rng: np.random.Generator) -> dict:
    p, q, eps, r = params["p"], params["q"], params["epsilon"], params["start_distance"]
    phi = rng.uniform(0.0, 2.0 * math.pi)
    mode = _initial_mode(system, params["initial_mode"], rng)
    if r >= eps:
        return {"tau": 0.0, "censored": False, "exit_distance": r, "mode0": mode}
    x, y = p + r * math.cos(phi), q + r * math.sin(phi)
    walker = LVWalker(system, LVState.from_xy(x, y, mode), rng, IntegratorConfig(**params["integrator"]))
    exited, _ = walker.advance(params["horizon_cap"], exit_ball=(p, q, eps * eps))
    dist = math.hypot(math.exp(walker.u) - p, math.exp(walker.v) - q)
    tau = walker.time if exited else params["horizon_cap"]
    return {"tau": tau, "censored": not exited, "exit_distance": dist, "mode0": mode}


def _exit_report(records: list[dict], params: dict) -> ExitTimeReport:
    tau = np.array([r["tau"] for r in records], dtype=float)
    cens = np.array([r["censored"] for r in records], dtype=bool)
    dist = np.array([r["exit_distance"] for r in records], dtype=float)
    rate = icpt = r2 = math.nan
    n_tail = 0
    b_grid: list[dict] = []
    if len(tau) and tau.max() > 0.0:
        t, s = kaplan_meier(tau, cens)
        rate, icpt, r2, n_tail = tail_fit(t, s, float(np.median(tau)))
        if math.isfinite(rate) and rate > 0.0:
            for f in B_FRACTIONS:
                log_b = f * rate
                b_grid.append({
                    "b": math.exp(log_b),
                    "log_mean_b_tau": _log_mean_exp(log_b * tau),
                    "diverges": bool(f >= 1.0),
                })
    return ExitTimeReport(
        params["epsilon"], params["start_distance"], params["horizon_cap"], tau, cens, dist,
        rate, icpt, r2, n_tail, b_grid, dict(params),
    )


def _exit_summary(records: list[dict], params: dict) -> dict:
    rep = _exit_report(records, params)
    d = rep.to_dict()
    d["status"] = "ok" if rep.valid else "failure: more than half of the runs censored"
    return d


def _require_case_one(system: SwitchedLVSystem) -> None:
    if not has_common_equilibrium(system.regime0, system.regime1):
        raise ValueError("experiment needs regimes with a common equilibrium")
    if not check_noncollinear(system.regime0, system.regime1):
        raise ValueError("experiment needs non-collinear regimes")


def exit_time_mc(
    system: SwitchedLVSystem,
    eq: Equilibrium | None = None,
    epsilon: float = 0.1,
    start_distance: float = 1e-3,
    n: int = 1000,
    horizon_cap: float = 1e3,
    root_seed: int = 0,
    workers: int = 1,
    initial_mode: int | None = None,
    config: IntegratorConfig = IntegratorConfig(),
    prefix: tuple[int, ...] = (),
    strict: bool = False,
) -> ExitTimeReport:
    """Sample exit times from the ``epsilon`` ball around the common equilibrium.

    Runs start at ``start_distance`` in a uniform direction, with the mode
    drawn from the stationary law unless ``initial_mode`` is given.  Exit is
    located on the dense output; runs still inside at ``horizon_cap`` are
    censored.  With ``strict`` a censoring fraction above one half raises
    :class:`CensoringError`; otherwise the report's ``valid`` flag is False.
    """
    _require_case_one(system)
    params = _exit_params(system, eq, epsilon, start_distance, horizon_cap, initial_mode, config)
    res = run_batch(BatchConfig(root_seed, n, params, workers), "exit-times", system, prefix)
    if not res.complete:
        raise RuntimeError(res.error)
    rep = _exit_report(res.records, params)
    if strict and not rep.valid:
        raise CensoringError(f"{rep.n_censored} of {rep.n} runs censored at {horizon_cap}")
    return rep


def start_distance_sweep(
    system: SwitchedLVSystem,
    eq: Equilibrium | None = None,
    epsilon: float = 0.1,
    distances: Sequence[float] = (0.05, 0.01, 0.001),
    n: int = 200,
    horizon_cap: float = 1e3,
    root_seed: int = 0,
    workers: int = 1,
    initial_mode: int | None = None,
    config: IntegratorConfig = IntegratorConfig(),
) -> list[ExitTimeReport]:
    """One :func:`exit_time_mc` per distance; distance ``j`` uses stream prefix ``(j,)``."""
    if len(distances) == 0:
        raise ValueError("need at least one start distance")
    for r in distances:
        if not 0.0 < r < epsilon:
            raise ValueError(f"start distances must lie strictly between 0 and epsilon, got {r}")
    return [
        exit_time_mc(system, eq, epsilon, r, n, horizon_cap, root_seed, workers, initial_mode, config, (j,))
        for j, r in enumerate(distances)
    ]


def distance_trend(reports: Sequence[ExitTimeReport], level: float = 0.95) -> dict:
    """Check that mean exit time does not drop as the start distance shrinks.

    A drop between consecutive distances counts only if it is significant at
    one-sided ``level``.
    """
    reps = sorted(reports, key=lambda r: -r.start_distance)
    z = NormalDist().inv_cdf(level)
    steps = []
    for far, near in zip(reps, reps[1:]):
        diff = near.mean - far.mean
        se = math.hypot(near.stderr, far.stderr)
        steps.append({
            "from": far.start_distance, "to": near.start_distance, "diff": diff, "stderr": se,
            "significant_drop": bool(diff < -z * se),
        })
    return {
        "distances": [r.start_distance for r in reps],
        "mean_tau": [r.mean for r in reps],
        "stderr_tau": [r.stderr for r in reps],
        "steps": steps,
        "nondecreasing": not any(s["significant_drop"] for s in steps),
        "level": level,
    }


# ---------------------------------------------------------------- oscillation


@dataclass
class OscillationReport:
    """Running extrema of ``x`` and ``y`` (as base-10 logs) at checkpoints.

    Extrema are tracked at every accepted integrator step; ``sampled_*``
    holds the plain values at the checkpoints for comparison.
    """

    checkpoints: np.ndarray
    log10_max_x: np.ndarray
    log10_min_x: np.ndarray
    log10_max_y: np.ndarray
    log10_min_y: np.ndarray
    sampled_log10_x: np.ndarray
    sampled_log10_y: np.ndarray
    n_jumps: int = 0
    max_drift_rate: float = 0.0

    @property
    def decades_x(self) -> np.ndarray:
        return self.log10_max_x - self.log10_min_x

    @property
    def decades_y(self) -> np.ndarray:
        return self.log10_max_y - self.log10_min_y

    @property
    def decades_spanned_x(self) -> float:
        return float(self.decades_x[-1]) if len(self.checkpoints) else 0.0

    @property
    def decades_spanned_y(self) -> float:
        return float(self.decades_y[-1]) if len(self.checkpoints) else 0.0

    def to_dict(self) -> dict:
        return {
            "checkpoints": self.checkpoints.tolist(),
            "log10_max_x": self.log10_max_x.tolist(),
            "log10_min_x": self.log10_min_x.tolist(),
            "log10_max_y": self.log10_max_y.tolist(),
            "log10_min_y": self.log10_min_y.tolist(),
            "decades_spanned_x": self.decades_spanned_x,
            "decades_spanned_y": self.decades_spanned_y,
            "n_jumps": self.n_jumps,
            "max_drift_rate": self.max_drift_rate,
        }


def _checkpoints(initial: LVState, horizon: float, checkpoints: Sequence[float] | None) -> np.ndarray:
    if not horizon > 0.0:
        raise ValueError("horizon must be positive")
    if checkpoints is None or len(checkpoints) == 0:
        cp = initial.time + horizon * np.logspace(-3, 0, 13)
    else:
        cp = np.asarray(checkpoints, dtype=float)
    if np.any(np.diff(cp) <= 0) or cp[0] <= initial.time or cp[-1] > initial.time + horizon * (1 + 1e-12):
        raise ValueError("checkpoints must increase strictly inside (t0, t0 + horizon]")
    return cp


def _run_oscillation(system: SwitchedLVSystem, initial: LVState, cp: np.ndarray,
                     rng: np.random.Generator, config: IntegratorConfig) -> OscillationReport:
    walker = LVWalker(system, initial, rng, config)
    m = len(cp)
    ext = np.empty((m, 4))
    sx = np.empty(m)
    sy = np.empty(m)
    for j, t in enumerate(cp):
        walker.advance(float(t))
        ext[j] = walker.extrema
        sx[j], sy[j] = walker.u, walker.v
    walker.finish()
    ext /= LN10
    return OscillationReport(
        cp, ext[:, 1], ext[:, 0], ext[:, 3], ext[:, 2], sx / LN10, sy / LN10,
        walker.n_jumps, walker.max_drift_rate,
    )


def oscillation_mc(
    system: SwitchedLVSystem,
    initial: LVState,
    horizon: float = 1e4,
    checkpoints: Sequence[float] | None = None,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
    config: IntegratorConfig = IntegratorConfig(),
) -> OscillationReport:
    """Track how far ``x`` and ``y`` swing along one trajectory.

    ``checkpoints`` default to 13 log-spaced times ending at the horizon.
    """
    if rng is None:
        if seed is None:
            raise ValueError("pass either rng or seed")
        rng = stream(seed)
    return _run_oscillation(system, initial, _checkpoints(initial, horizon, checkpoints), rng, config)


def _initial_from_params(params: dict) -> LVState:
    return LVState.from_xy(params["x0"], params["y0"], params["mode0"])


def _oscillation_trajectory(system: SwitchedLVSystem, params: dict, rng: np.random.Generator) -> dict:
    init = _initial_from_params(params)
    rep = _run_oscillation(system, init, np.asarray(params["checkpoints"]), rng, IntegratorConfig(**params["integrator"]))
    return {
        "decades_x": rep.decades_spanned_x,
        "decades_y": rep.decades_spanned_y,
        "decades_x_path": rep.decades_x.tolist(),
        "decades_y_path": rep.decades_y.tolist(),
        "max_drift_rate": rep.max_drift_rate,
        "n_jumps": rep.n_jumps,
    }


def _oscillation_summary(records: list[dict], params: dict) -> dict:
    thr = params["threshold_decades"]
    dx = np.array([r["decades_x"] for r in records])
    dy = np.array([r["decades_y"] for r in records])
    both = (dx >= thr) & (dy >= thr)
    frac = float(both.mean()) if len(records) else math.nan
    return {
        "n": len(records),
        "threshold_decades": thr,
        "required_fraction": params["required_fraction"],
        "fraction_passing": frac,
        "pass": bool(len(records) > 0 and frac >= params["required_fraction"]),
        "median_decades_x": float(np.median(dx)) if len(records) else math.nan,
        "median_decades_y": float(np.median(dy)) if len(records) else math.nan,
        "min_decades_x": float(dx.min()) if len(records) else math.nan,
        "min_decades_y": float(dy.min()) if len(records) else math.nan,
        "checkpoints": list(params["checkpoints"]),
        "median_decades_x_path": np.median([r["decades_x_path"] for r in records], axis=0).tolist() if records else [],
        "median_decades_y_path": np.median([r["decades_y_path"] for r in records], axis=0).tolist() if records else [],
        "max_drift_rate": float(max((r["max_drift_rate"] for r in records), default=0.0)),
    }


def _trajectory_params(initial: LVState, horizon: float, checkpoints, config: IntegratorConfig) -> dict:
    cp = _checkpoints(initial, horizon, checkpoints)
    return {
        "x0": initial.x, "y0": initial.y, "mode0": initial.mode, "horizon": horizon,
        "checkpoints": [float(t) for t in cp], "integrator": config.to_dict(),
    }


def oscillation_batch(
    system: SwitchedLVSystem,
    initial: LVState,
    horizon: float = 1e4,
    n: int = 100,
    root_seed: int = 0,
    workers: int = 1,
    threshold_decades: float = 2.0,
    required_fraction: float = 0.95,
    checkpoints: Sequence[float] | None = None,
    config: IntegratorConfig = IntegratorConfig(),
) -> BatchResult:
    """``n`` seeded oscillation runs; passes when enough span the threshold in both species."""
    params = _trajectory_params(initial, horizon, checkpoints, config)
    params.update(threshold_decades=threshold_decades, required_fraction=required_fraction)
    return run_batch(BatchConfig(root_seed, n, params, workers), "oscillation", system)


# ---------------------------------------------------------------- transience


def log10_v(log_x, log_y):
    """``log10(x + 1/x + y + 1/y)`` computed without overflow."""
    u = np.abs(np.asarray(log_x, dtype=float))
    v = np.abs(np.asarray(log_y, dtype=float))
    m = np.maximum(u, v)
    s = np.exp(u - m) + np.exp(-u - m) + np.exp(v - m) + np.exp(-v - m)
    return (m + np.log(s)) / LN10


@dataclass
class TransienceReport:
    """Exploratory statistics of ``V = x + y + 1/x + 1/y`` (kept as ``log10 V``)."""

    checkpoints: np.ndarray
    log10_v: np.ndarray  # shape (n, len(checkpoints))
    reference_time: float
    label: str = "conjecture evidence"

    @property
    def median_log10_v(self) -> np.ndarray:
        return np.median(self.log10_v, axis=0)

    @property
    def terminal_log10_v(self) -> np.ndarray:
        return self.log10_v[:, -1]

    def fraction_trending_up(self) -> float:
        """Share of runs whose ``log V`` has positive least-squares slope over the last half."""
        t = self.checkpoints
        mask = t >= t[0] + 0.5 * (t[-1] - t[0])
        if mask.sum() < 2:
            mask[-2:] = True
        slopes = np.polyfit(t[mask], self.log10_v[:, mask].T, 1)[0]
        return float(np.mean(slopes > 0))

    def growth_ratio_log10(self) -> float:
        """``log10`` of median terminal V over median V at the reference time."""
        j = int(np.argmin(np.abs(self.checkpoints - self.reference_time)))
        return float(np.median(self.terminal_log10_v) - self.median_log10_v[j])

    def to_dict(self) -> dict:
        if self.log10_v.shape[0] == 0:
            return {"label": self.label, "n": 0, "checkpoints": self.checkpoints.tolist(),
                    "reference_time": self.reference_time}
        ratio = self.growth_ratio_log10()
        return {
            "label": self.label,
            "n": int(self.log10_v.shape[0]),
            "checkpoints": self.checkpoints.tolist(),
            "median_log10_v": self.median_log10_v.tolist(),
            "median_terminal_log10_v": float(np.median(self.terminal_log10_v)),
            "reference_time": self.reference_time,
            "growth_ratio_log10": ratio,
            "exceeds_10x": bool(ratio > 1.0),
            "fraction_trending_up": self.fraction_trending_up(),
            "min_log10_v": float(self.log10_v.min()),
        }


def _transience_trajectory(system: SwitchedLVSystem, params: dict, rng: np.random.Generator) -> dict:
    walker = LVWalker(system, _initial_from_params(params), rng, IntegratorConfig(**params["integrator"]))
    out = []
    for t in params["checkpoints"]:
        walker.advance(t)
        out.append(float(log10_v(walker.u, walker.v)))
    return {"log10_v": out}


def _transience_report(records: list[dict], params: dict) -> TransienceReport:
    cp = np.asarray(params["checkpoints"], dtype=float)
    lv = np.array([r["log10_v"] for r in records], dtype=float).reshape(len(records), len(cp))
    return TransienceReport(cp, lv, params["reference_time"])


def _transience_summary(records: list[dict], params: dict) -> dict:
    return _transience_report(records, params).to_dict()


def transience_mc(
    system: SwitchedLVSystem,
    initial: LVState,
    horizon: float = 1e4,
    checkpoints: Sequence[float] | None = None,
    n: int = 100,
    root_seed: int = 0,
    workers: int = 1,
    reference_time: float = 1e2,
    config: IntegratorConfig = IntegratorConfig(),
) -> TransienceReport:
    """Track ``V`` over ``n`` runs.  This gathers evidence only; nothing is proved or asserted."""
    params = _trajectory_params(initial, horizon, checkpoints, config)
    params["reference_time"] = reference_time
    res = run_batch(BatchConfig(root_seed, n, params, workers), "transience", system)
    if not res.complete:
        raise RuntimeError(res.error)
    return _transience_report(res.records, params)


EXPERIMENTS: dict[str, tuple[Callable, Callable]] = {
    "exit-times": (_exit_trajectory, _exit_summary),
    "oscillation": (_oscillation_trajectory, _oscillation_summary),
    "transience": (_transience_trajectory, _transience_summary),
}
