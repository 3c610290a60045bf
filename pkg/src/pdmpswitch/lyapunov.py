"""Growth rate of the switched linear system, two independent ways.

* :func:`estimate_lambda_mc` averages ``(log|Y_T| - log|Y_burn|) / (T - burn)``
  over independent replicates.
* :func:`estimate_lambda_quadrature` solves the stationary transport equations
  of the angular process ``(Theta, I)`` on the circle,

      d/dtheta [v_i rho_i] = k_{1-i} rho_{1-i} - k_i rho_i ,

  and integrates the radial rate against the resulting densities.

The densities are pi-periodic (the dynamics only see directions), so the
solve runs on a half circle with Fourier collocation and an odd node count,
then the trigonometric interpolant is sampled on the requested grid.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .linalg2 import normal_form
from .streams import map_ordered, stream
from .switched_linear import (
    LinearWalker,
    LogPolarState,
    LogPolarTrajectory,
    SwitchedLinearSystem,
    angular_velocity,
    radial_rate,
)

__all__ = [
    "GrowthRateEstimate",
    "AngularDensityPair",
    "DirectionSweep",
    "estimate_lambda_mc",
    "estimate_lambda_quadrature",
    "empirical_angular_histogram",
    "initial_direction_sweep",
    "balance_residual",
    "total_variation",
]

TWO_PI = 2.0 * math.pi


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class GrowthRateEstimate:
    """Point estimate of the top Lyapunov exponent with a normal-theory interval."""

    lambda_hat: float
    stderr: float
    ci_low: float
    ci_high: float
    method: str  # "time_average" | "quadrature"
    provenance: dict = field(default_factory=dict)
    replicates: tuple[float, ...] = ()

    def __post_init__(self):
        if self.method not in ("time_average", "quadrature"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.stderr < 0:
            raise ValueError("standard error must be nonnegative")
        if self.stderr == 0 and self.method == "time_average" and len(set(self.replicates)) > 1:
            raise ValueError("zero standard error with scattered replicates")
        if not self.ci_low <= self.lambda_hat <= self.ci_high:
            raise ValueError("interval must contain the estimate")

    @property
    def lambda2(self) -> float:
        """The second exponent; the two sum to zero for trace-zero generators."""
        return -self.lambda_hat

    def interval(self, level: float = 0.95) -> tuple[float, float]:
        z = NormalDist().inv_cdf(0.5 + level / 2.0)
        return self.lambda_hat - z * self.stderr, self.lambda_hat + z * self.stderr

    def to_dict(self) -> dict:
        return {
            "lambda_hat": self.lambda_hat,
            "lambda2": self.lambda2,
            "stderr": self.stderr,
            "ci95": [self.ci_low, self.ci_high],
            "method": self.method,
            **self.provenance,
        }


@dataclass(frozen=True)
class AngularDensityPair:
    """Densities of the invariant law on (angle, mode), w.r.t. angle measure.

    ``grid`` holds ``n`` equally spaced angles on ``[0, 2pi)``.  For histograms
    the grid holds bin centres and the values are bin averages.
    """

    grid: np.ndarray
    rho0: np.ndarray
    rho1: np.ndarray

    @property
    def n(self) -> int:
        return len(self.grid)

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n

    def total_mass(self) -> float:
        return float(self.spacing * (self.rho0.sum() + self.rho1.sum()))

    def bin_masses(self, n_bins: int) -> np.ndarray:
        """Mass in each of ``n_bins`` equal bins starting at angle 0, shape ``(2, n_bins)``.

        The grid values are read as samples of a trigonometric polynomial,
        which is integrated exactly over each bin.
        """
        edges = np.linspace(0.0, TWO_PI, n_bins + 1)
        out = np.empty((2, n_bins))
        for i, rho in enumerate((self.rho0, self.rho1)):
            coef = np.fft.rfft(rho) / self.n
            k = np.arange(len(coef))
            coef *= np.exp(-1j * k * self.grid[0])
            if self.n % 2 == 0:
                coef[-1] *= 0.5  # split the Nyquist term symmetrically
            prim = np.empty(n_bins + 1)
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = (np.exp(1j * np.outer(edges, k[1:])) - 1.0) / (1j * k[1:])
            prim[:] = coef[0].real * edges + 2.0 * (terms @ coef[1:]).real
            out[i] = np.diff(prim)
        return out

    def write_csv(self, path, meta: dict | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if meta:
                fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
            w = csv.writer(fh)
            w.writerow(["theta", "rho0", "rho1"])
            for row in zip(self.grid, self.rho0, self.rho1):
                w.writerow([repr(float(x)) for x in row])


def _half_period_nodes(n_grid: int) -> int:
    m = n_grid // 2
    return m if m % 2 else m + 1


def _fourier_diff_matrix(m: int, period: float) -> np.ndarray:
    """Spectral first-derivative matrix on ``m`` (odd) equispaced nodes of one period."""
    h = TWO_PI / m
    j = np.arange(1, m)
    col = np.zeros(m)
    col[1:] = 0.5 * (-1.0) ** j / np.sin(j * h / 2.0)
    return scipy.linalg.toeplitz(col, -col) * (TWO_PI / period)


def _trig_resample(values: np.ndarray, period: float, points: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of samples on ``[0, period)`` at ``points``."""
    m = len(values)
    coef = np.fft.fft(values) / m
    k = np.fft.fftfreq(m, d=1.0 / m)
    phase = np.exp(1j * np.outer(points, k) * (TWO_PI / period))
    return (phase @ coef).real


def _check_rotation_sense(v: np.ndarray, which: int) -> None:
    if np.any(v == 0.0) or not (np.all(v > 0) or np.all(v < 0)):
        raise ValueError(
            f"angular velocity of mode {which} vanishes on the circle: the spectral condition a^2 + bc < 0 fails"
        )


def _stationary_half_period(system: SwitchedLinearSystem, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    theta = math.pi * np.arange(m) / m
    v0 = angular_velocity(system.A0, theta)
    v1 = angular_velocity(system.A1, theta)
    _check_rotation_sense(v0, 0)
    _check_rotation_sense(v1, 1)
    D = _fourier_diff_matrix(m, math.pi)
    eye = np.eye(m)
    k0, k1 = system.k0, system.k1
    M = np.block([[D * v0[None, :] + k0 * eye, -k1 * eye], [-k0 * eye, D * v1[None, :] + k1 * eye]])
    # the balance rows sum to a derivative of a periodic function, so one is
    # redundant; it is replaced by the normalization over the half circle
    M[-1, :] = math.pi / m
    rhs = np.zeros(2 * m)
    rhs[-1] = 0.5
    try:
        lu = scipy.linalg.lu_factor(M, check_finite=True)
    except (ValueError, scipy.linalg.LinAlgError) as exc:  # pragma: no cover
        raise np.linalg.LinAlgError("stationary system could not be factored") from exc
    if np.any(np.abs(np.diag(lu[0])) < 1e-13 * np.abs(np.diag(lu[0])).max()):
        raise np.linalg.LinAlgError("stationary system is singular")
    sol = scipy.linalg.lu_solve(lu, rhs)
    return theta, sol[:m], sol[m:]


def estimate_lambda_quadrature(
    system: SwitchedLinearSystem, n_grid: int = 1024
) -> tuple[AngularDensityPair, GrowthRateEstimate]:
    """Stationary angular densities and ``Lambda = sum_i oint <A_i u, u> rho_i dtheta``.

    Raises
    ------
    ValueError
        If either generator has a real eigenvector (angular velocity vanishes).
    numpy.linalg.LinAlgError
        If the discretized system is singular.
    """
    if n_grid < 64:
        raise ValueError("n_grid must be at least 64")
    m = _half_period_nodes(n_grid)
    _, h0, h1 = _stationary_half_period(system, m)
    grid = TWO_PI * np.arange(n_grid) / n_grid
    rho0 = _trig_resample(h0, math.pi, grid)
    rho1 = _trig_resample(h1, math.pi, grid)
    dens = AngularDensityPair(grid, rho0, rho1)
    h = TWO_PI / n_grid
    lam = float(h * np.sum(radial_rate(system.A0, grid) * rho0 + radial_rate(system.A1, grid) * rho1))
    est = GrowthRateEstimate(
        lam, 0.0, lam, lam, "quadrature", {"grid_size": n_grid, "collocation_nodes": m}
    )
    return dens, est


def balance_residual(system: SwitchedLinearSystem, dens: AngularDensityPair, order: int = 4) -> float:
    """Max over the grid and both modes of the transport-equation residual.

    The flux derivative is taken by a periodic central difference of the
    given ``order`` (2 or 4).  The second-order stencil's own truncation
    error is about 1e-6 at 1024 points, which would mask the solution error.
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    h = dens.spacing
    out = 0.0
    rhos = (dens.rho0, dens.rho1)
    rates = (system.k0, system.k1)
    for i in (0, 1):
        flux = angular_velocity(system.matrix(i), dens.grid) * rhos[i]
        if order == 2:
            dflux = (np.roll(flux, -1) - np.roll(flux, 1)) / (2.0 * h)
        else:
            dflux = (-np.roll(flux, -2) + 8.0 * np.roll(flux, -1) - 8.0 * np.roll(flux, 1) + np.roll(flux, 2)) / (12.0 * h)
        res = dflux - (rates[1 - i] * rhos[1 - i] - rates[i] * rhos[i])
        out = max(out, float(np.abs(res).max()))
    return out


def _replicate_log_growth(system: SwitchedLinearSystem, theta0: float, mode0: int, horizon: float,
                          burn_in: float, root_seed: int, key: tuple) -> float:
    walker = LinearWalker(system, LogPolarState(theta0, 0.0, mode0), stream(root_seed, *key))
    walker.advance(burn_in)
    start = walker.log_r
    walker.advance(horizon)
    return (walker.log_r - start) / (horizon - burn_in)


def _summarize(values: Sequence[float], provenance: dict) -> GrowthRateEstimate:
    x = np.asarray(values, dtype=float)
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(len(x)))
    z = NormalDist().inv_cdf(0.975)
    return GrowthRateEstimate(
        mean, se, mean - z * se, mean + z * se, "time_average", provenance, tuple(float(v) for v in x)
    )


def estimate_lambda_mc(
    system: SwitchedLinearSystem,
    theta0: float = 0.0,
    mode0: int = 0,
    horizon: float = 1e4,
    burn_in: float | None = None,
    n_reps: int = 64,
    seed: int = 0,
    workers: int = 1,
    stream_key: tuple[int, ...] = (),
) -> GrowthRateEstimate:
    """Time-average estimate of the growth rate over ``n_reps`` independent runs.

    Replicate ``r`` uses the stream ``(seed, *stream_key, r)``; ``burn_in``
    defaults to 10% of the horizon.
    """
    if burn_in is None:
        burn_in = 0.1 * horizon
    if not horizon > burn_in >= 0.0:
        raise ValueError("need horizon > burn_in >= 0")
    if n_reps < 2:
        raise ValueError("need at least two replicates")
    args = [(system, theta0, mode0, horizon, burn_in, seed, (*stream_key, r)) for r in range(n_reps)]
    values = map_ordered(_replicate_log_growth, args, workers)
    prov = {"horizon": horizon, "burn_in": burn_in, "n_reps": n_reps, "seed": seed, "theta0": theta0, "mode0": mode0}
    return _summarize(values, prov)


@dataclass(frozen=True)
class DirectionSweep:
    directions: tuple[float, ...]
    estimates: tuple[GrowthRateEstimate, ...]

    @property
    def max_discrepancy(self) -> float:
        vals = [e.lambda_hat for e in self.estimates]
        return float(max(vals) - min(vals))

    def all_overlap(self, level: float = 0.95) -> bool:
        ivs = [e.interval(level) for e in self.estimates]
        return max(lo for lo, _ in ivs) <= min(hi for _, hi in ivs)


def initial_direction_sweep(
    system: SwitchedLinearSystem,
    directions: Sequence[float],
    mode0: int = 0,
    horizon: float = 1e4,
    burn_in: float | None = None,
    n_reps: int = 64,
    seed: int = 0,
    common_random_numbers: bool = True,
    workers: int = 1,
) -> DirectionSweep:
    """Run :func:`estimate_lambda_mc` from each initial angle.

    With ``common_random_numbers`` every direction reuses the same switching
    streams, so differences between estimates come only from the initial
    direction.  Otherwise direction ``j`` draws from the streams ``(seed, j, r)``.
    """
    if len(directions) < 2:
        raise ValueError("need at least two directions")
    ests = []
    for j, th in enumerate(directions):
        key = () if common_random_numbers else (j,)
        ests.append(estimate_lambda_mc(system, th, mode0, horizon, burn_in, n_reps, seed, workers, key))
    return DirectionSweep(tuple(float(d) for d in directions), tuple(ests))


def _arc_cumulative(x: np.ndarray, start: np.ndarray, width: np.ndarray) -> np.ndarray:
    """Measure of ``[0, x]`` covered by the periodic arcs ``[start, start + width] + 2pi Z``.

    ``x`` has shape ``(s, 1)``; ``start`` in ``[0, 2pi)`` and ``width`` have shape ``(nb,)``.
    """
    turns = np.floor(x / TWO_PI)
    r = x - turns * TWO_PI
    g = np.clip(r - start, 0.0, width) + np.clip(r - start + TWO_PI, 0.0, width)
    g -= np.minimum(TWO_PI - start, width)
    return turns * width + g


def _phase_map(G: np.ndarray, theta: np.ndarray) -> np.ndarray:
    return np.mod(np.arctan2(G[1, 0] * np.cos(theta) + G[1, 1] * np.sin(theta),
                             G[0, 0] * np.cos(theta) + G[0, 1] * np.sin(theta)), TWO_PI)


def empirical_angular_histogram(
    trajectories: Iterable[LogPolarTrajectory],
    n_bins: int = 128,
    burn_in: float = 0.0,
    min_occupation: float = 1.0,
    chunk: int = 4096,
) -> AngularDensityPair:
    """Exact time-weighted occupation histogram of (angle, mode) after ``burn_in``.

    Within a segment the flow is a uniform rotation in normal-form
    coordinates, so the time spent in each angular bin follows from mapping
    the bin edges into that phase and dividing arc lengths by ``omega``.
    """
    edges = np.linspace(0.0, TWO_PI, n_bins + 1)
    occ = np.zeros((2, n_bins))
    total = 0.0
    for traj in trajectories:
        t_lo_all = traj.seg_time
        t_hi_all = np.append(traj.seg_time[1:], traj.horizon)
        lo = np.maximum(t_lo_all, burn_in)
        hi = t_hi_all
        keep = hi > lo
        for mode in (0, 1):
            sel = keep & (traj.seg_mode == mode)
            if not np.any(sel):
                continue
            A = traj.system.matrix(mode)
            G, _ = normal_form(A)
            w = A.omega
            sense = 1.0 if np.linalg.det(G) > 0 else -1.0
            psi_edges = _phase_map(G, edges)
            if sense > 0:
                start, end = psi_edges[:-1], psi_edges[1:]
            else:
                start, end = psi_edges[1:], psi_edges[:-1]
            width = np.mod(end - start, TWO_PI)
            psi0 = _phase_map(G, traj.seg_theta[sel])
            t0 = t_lo_all[sel]
            a_off = w * (lo[sel] - t0)
            b_off = w * (hi[sel] - t0)
            for s in range(0, len(psi0), chunk):
                p = psi0[s:s + chunk, None]
                occ[mode] += (
                    _arc_cumulative(p + b_off[s:s + chunk, None], start, width)
                    - _arc_cumulative(p + a_off[s:s + chunk, None], start, width)
                ).sum(axis=0) / w
            total += float(np.sum(hi[sel] - lo[sel]))
    if total < min_occupation or total <= 0.0:
        raise InsufficientDataError(f"occupation time {total} below the minimum {min_occupation}")
    h = TWO_PI / n_bins
    centres = edges[:-1] + 0.5 * h
    return AngularDensityPair(centres, occ[0] / (total * h), occ[1] / (total * h))


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    """Half the L1 distance between two discrete laws of equal shape."""
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
