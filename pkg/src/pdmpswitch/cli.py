"""Command-line front end.

Each subcommand reads an optional JSON config, fills in defaults, runs one
analysis and writes a JSON summary and/or CSV data to ``--out``.  Exit codes:
0 success, 1 a checked contract failed, 2 invalid input or usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import ConfigError, RunConfig
from .experiments import (
    BatchConfig,
    _exit_params,
    _exit_report,
    _require_case_one,
    distance_trend,
    oscillation_batch,
    run_batch,
    start_distance_sweep,
    transience_mc,
)
from .linalg2 import SpectralConditionError, TraceZeroMatrix2, is_proportional, trace_criterion
from .lotka_volterra import (
    IntegratorConfig,
    LVState,
    SwitchedLVSystem,
    check_noncollinear,
    equilibrium,
    has_common_equilibrium,
    linearize,
    simulate_lv,
)
from .lyapunov import balance_residual, estimate_lambda_mc, estimate_lambda_quadrature
from .streams import stream
from .switched_linear import LogPolarState, SwitchedLinearSystem, simulate

SUBCOMMANDS = ("check", "lyapunov", "density", "simulate", "exit-times", "oscillation", "transience", "sweep")


class Output:
    """Collects what a subcommand writes, honouring ``--format``."""

    def __init__(self, out_dir: Path, fmt: str, quiet: bool):
        self.dir = out_dir
        self.fmt = fmt
        self.quiet = quiet

    @property
    def csv(self) -> bool:
        return self.fmt in ("csv", "both")

    @property
    def json(self) -> bool:
        return self.fmt in ("json", "both")

    def path(self, name: str) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        return self.dir / name

    def say(self, line: str) -> None:
        if not self.quiet:
            print(line)


def _clean(obj):
    """Make ``obj`` strict-JSON safe: numpy scalars to Python, NaN/inf to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _write_summary(out: Output, rc: RunConfig, result: dict, passed) -> None:
    doc = {"command": rc.experiment, "pass": passed, "config": rc.echo(), "result": result}
    if out.json:
        with open(out.path(f"{rc.experiment}.json"), "w") as fh:
            json.dump(_clean(doc), fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")


def _write_rows(out: Output, name: str, header: list[str], rows, meta: dict | None = None) -> None:
    with open(out.path(name), "w", newline="") as fh:
        if meta is not None:
            fh.write("# " + json.dumps(_clean(meta), sort_keys=True) + "\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _linear_pair(system) -> SwitchedLinearSystem:
    """The linear system itself, or the linearization of a common-equilibrium LV pair."""
    if isinstance(system, SwitchedLinearSystem):
        return system
    if not has_common_equilibrium(system.regime0, system.regime1):
        raise ConfigError("LV regimes have no common equilibrium to linearize at")
    eq = equilibrium(system.regime0)
    return SwitchedLinearSystem(linearize(system.regime0, eq), linearize(system.regime1, eq), system.k0, system.k1)


def _integrator(params: dict) -> IntegratorConfig:
    return IntegratorConfig(**params["integrator"])


# ---------------------------------------------------------------- check


def _matrix_report(A: TraceZeroMatrix2) -> dict:
    d = {"matrix": A.to_list(), "a2_plus_bc": A.determinant_neg, "imaginary_spectrum": A.imaginary_spectrum}
    d["omega"] = A.omega if A.imaginary_spectrum else None
    return d


def _pair_report(A0: TraceZeroMatrix2, A1: TraceZeroMatrix2, tol: float) -> dict:
    rep = {"A0": _matrix_report(A0), "A1": _matrix_report(A1), "proportional": is_proportional(A0, A1, tol)}
    warnings = []
    if A0.imaginary_spectrum and A1.imaginary_spectrum:
        phi_sq, distinct = trace_criterion(A0, A1, tol)
        rep["phi_star_sq"] = phi_sq
        rep["distinct_moduli"] = distinct
        if not distinct:
            warnings.append("pair is proportional: the growth rate is necessarily 0")
    else:
        rep["phi_star_sq"] = None
        rep["distinct_moduli"] = None
        warnings.append("spectral condition a^2 + bc < 0 fails: positivity result does not apply")
    rep["warnings"] = warnings
    return rep


def cmd_check(rc: RunConfig, out: Output, workers: int) -> int:
    system = rc.build_system()
    tol = rc.params["tol"]
    if isinstance(system, SwitchedLinearSystem):
        result = {"type": "linear", **_pair_report(system.A0, system.A1, tol)}
    else:
        r0, r1 = system.regime0, system.regime1
        e0, e1 = equilibrium(r0), equilibrium(r1)
        common = has_common_equilibrium(r0, r1, tol)
        result = {
            "type": "lv",
            "equilibria": [[e0.p, e0.q], [e1.p, e1.q]],
            "common_equilibrium": common,
        }
        if common:
            lin = _linear_pair(system)
            result["noncollinear"] = check_noncollinear(r0, r1, tol)
            result["linearizations"] = [lin.A0.to_list(), lin.A1.to_list()]
            result["linearized_pair"] = _pair_report(lin.A0, lin.A1, tol)
        else:
            result["noncollinear"] = None
            result["linearizations"] = None
    _write_summary(out, rc, result, None)
    if result["type"] == "linear":
        out.say(f"check: omega=({result['A0']['omega']}, {result['A1']['omega']}) "
                f"proportional={result['proportional']} phi*^2={result['phi_star_sq']}")
        for w in result["warnings"]:
            out.say(f"warning: {w}")
    else:
        out.say(f"check: equilibria={result['equilibria']} common={result['common_equilibrium']} "
                f"noncollinear={result['noncollinear']} linearizations={result['linearizations']}")
    return 0


# ---------------------------------------------------------------- lyapunov / density


def lyapunov_agreement(mc: float, stderr: float, quad: float, n_stderr: float, floor: float) -> bool:
    """MC and quadrature agree when within ``n_stderr`` standard errors, plus an absolute floor."""
    return abs(mc - quad) <= n_stderr * stderr + floor


def cmd_lyapunov(rc: RunConfig, out: Output, workers: int) -> int:
    system = _linear_pair(rc.build_system())
    p = rc.params
    dens, quad = estimate_lambda_quadrature(system, p["n_grid"])
    mc = estimate_lambda_mc(system, p["theta0"], p["mode0"], p["horizon"], p["burn_in"], p["n_reps"], rc.seed, workers)
    agree = lyapunov_agreement(mc.lambda_hat, mc.stderr, quad.lambda_hat, p["agreement_stderr"], p["agreement_floor"])
    _, distinct = trace_criterion(system.A0, system.A1)
    lo99, _ = mc.interval(0.99)
    result = {
        "monte_carlo": mc.to_dict(),
        "quadrature": quad.to_dict(),
        "difference": mc.lambda_hat - quad.lambda_hat,
        "agreement": agree,
        "distinct_moduli": distinct,
        "ci99_low": lo99,
        "positive_at_99": bool(lo99 > 0.0),
    }
    _write_summary(out, rc, result, agree)
    if out.csv:
        _write_rows(out, "lyapunov_replicates.csv", ["replicate", "lambda"], enumerate(mc.replicates))
        dens.write_csv(out.path("lyapunov_density.csv"), {"n_grid": p["n_grid"]})
    out.say(f"lyapunov: MC {mc.lambda_hat:.6g} +/- {mc.stderr:.2g}, quadrature {quad.lambda_hat:.6g}, "
            f"agreement {'pass' if agree else 'FAIL'}")
    return 0 if agree else 1


def cmd_density(rc: RunConfig, out: Output, workers: int) -> int:
    system = _linear_pair(rc.build_system())
    p = rc.params
    dens, est = estimate_lambda_quadrature(system, p["n_grid"])
    _, est2 = estimate_lambda_quadrature(system, p["compare_grid"])
    resid = balance_residual(system, dens)
    diff = abs(est.lambda_hat - est2.lambda_hat)
    ok = bool(diff <= p["tol"] and resid <= p["tol"])
    result = {
        "lambda": est.lambda_hat,
        "lambda_compare_grid": est2.lambda_hat,
        "grid_difference": diff,
        "balance_residual": resid,
        "total_mass": dens.total_mass(),
    }
    _write_summary(out, rc, result, ok)
    if out.csv:
        dens.write_csv(out.path("density.csv"), {"n_grid": p["n_grid"], "lambda": est.lambda_hat})
    out.say(f"density: Lambda {est.lambda_hat:.10g} (grid diff {diff:.2g}, residual {resid:.2g}) "
            f"{'pass' if ok else 'FAIL'}")
    return 0 if ok else 1


# ---------------------------------------------------------------- simulate


def cmd_simulate(rc: RunConfig, out: Output, workers: int) -> int:
    system = rc.build_system()
    p = rc.params
    horizon = float(p["horizon"])
    if horizon < 0.0:
        raise ConfigError("horizon must be nonnegative")
    grid = np.linspace(0.0, horizon, int(p["n_output"])) if horizon > 0 else np.empty(0)
    rng = stream(rc.seed)
    meta = {"config": rc.echo()}
    if isinstance(system, SwitchedLinearSystem):
        header = ["time", "theta", "log_r", "mode"]
        if horizon == 0.0:
            rows, result, ok = [], {"n_jumps": 0, "n_rows": 0}, True
        else:
            tr = simulate(system, LogPolarState(p["theta0"], 0.0, p["mode0"]), horizon, grid, rng=rng)
            rows = zip(tr.grid, tr.theta, tr.log_r, (int(m) for m in tr.mode))
            result = {"n_jumps": tr.n_jumps, "n_rows": len(tr.grid), "final_log_r": tr.final.log_r,
                      "growth_rate": tr.final.log_r / horizon}
            ok = True
    else:
        header = ["time", "x", "y", "log_x", "log_y", "mode", "H_active"]
        tol = p["integrator"]["tol_h"]
        if horizon == 0.0:
            rows, result, ok = [], {"n_jumps": 0, "n_rows": 0}, True
        else:
            init = LVState.from_xy(p["x0"], p["y0"], p["mode0"])
            tr = simulate_lv(system, init, horizon, grid, rng=rng, config=_integrator(p))
            H = tr.h_active()
            rows = zip(tr.grid, np.exp(tr.log_x), np.exp(tr.log_y), tr.log_x, tr.log_y,
                       (int(m) for m in tr.mode), H)
            ok = bool(tr.max_drift_rate <= tol)
            ext = np.array(tr.extrema) / math.log(10.0)
            result = {"n_jumps": tr.n_jumps, "n_rows": len(tr.grid), "max_drift_rate": tr.max_drift_rate,
                      "drift_tolerance": tol, "log10_extrema": ext.tolist()}
    _write_summary(out, rc, result, ok)
    if out.csv:
        _write_rows(out, "trajectory.csv", header, rows, meta)
    out.say(f"simulate: {result['n_rows']} rows, {result['n_jumps']} jumps{'' if ok else ', drift FAIL'}")
    return 0 if ok else 1


# ---------------------------------------------------------------- LV experiments


def _lv_system(rc: RunConfig) -> SwitchedLVSystem:
    system = rc.build_system()
    if not isinstance(system, SwitchedLVSystem):
        raise ConfigError(f"{rc.experiment} needs an LV system")
    try:
        _require_case_one(system)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return system


def _exit_pass(summary: dict, p: dict) -> bool:
    ok = summary["valid"] and summary["n_censored"] <= p["max_censored"]
    r2 = summary["fit_r2"]
    if r2 is not None and not (isinstance(r2, float) and math.isnan(r2)):
        ok = ok and r2 >= p["min_r2"]
    return bool(ok)


def cmd_exit_times(rc: RunConfig, out: Output, workers: int) -> int:
    system = _lv_system(rc)
    p = rc.params
    params = _exit_params(system, None, p["epsilon"], p["start_distance"], p["horizon_cap"],
                          p["initial_mode"], _integrator(p))
    res = run_batch(BatchConfig(rc.seed, int(p["n"]), params, workers), "exit-times", system)
    rep = _exit_report(res.records, params)
    summary = rep.to_dict()
    summary.pop("params")
    summary["thresholds"] = {"max_censored": p["max_censored"], "min_r2": p["min_r2"]}
    ok = res.complete and _exit_pass(_clean(summary), p)
    summary["batch_complete"] = res.complete
    summary["batch_error"] = res.error
    _write_summary(out, rc, summary, ok)
    if out.csv:
        t, s = rep.survival()
        _write_rows(out, "survival.csv", ["time", "survival"], zip(t, s))
        _write_rows(out, "exit_times.csv", ["trajectory", "tau", "censored", "exit_distance"],
                    ((i, r["tau"], int(r["censored"]), r["exit_distance"]) for i, r in enumerate(res.records)))
    out.say(f"exit-times: n={rep.n} censored={rep.n_censored} mean={rep.mean:.6g} "
            f"tail rate={rep.fitted_tail_rate:.4g} R2={rep.fit_r2:.4f} {'pass' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_oscillation(rc: RunConfig, out: Output, workers: int) -> int:
    system = _lv_system(rc)
    p = rc.params
    init = LVState.from_xy(p["x0"], p["y0"], p["mode0"])
    res = oscillation_batch(system, init, p["horizon"], int(p["n"]), rc.seed, workers,
                            p["threshold_decades"], p["required_fraction"], p["checkpoints"], _integrator(p))
    summary = dict(res.summary)
    ok = bool(res.complete and summary.get("pass", False)) if p["n"] > 0 else True
    summary.update(batch_complete=res.complete, batch_error=res.error)
    _write_summary(out, rc, summary, ok)
    if out.csv:
        _write_rows(out, "oscillation.csv", ["trajectory", "decades_x", "decades_y"],
                    ((i, r["decades_x"], r["decades_y"]) for i, r in enumerate(res.records)))
    out.say(f"oscillation: {summary.get('fraction_passing')} of runs span >= {p['threshold_decades']} decades "
            f"in both species {'pass' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_transience(rc: RunConfig, out: Output, workers: int) -> int:
    system = _lv_system(rc)
    p = rc.params
    init = LVState.from_xy(p["x0"], p["y0"], p["mode0"])
    rep = transience_mc(system, init, p["horizon"], p["checkpoints"], int(p["n"]), rc.seed, workers,
                        p["reference_time"], _integrator(p))
    summary = rep.to_dict()
    _write_summary(out, rc, summary, None)
    if out.csv:
        rows = [[i, *row] for i, row in enumerate(rep.log10_v.tolist())]
        _write_rows(out, "transience.csv", ["trajectory", *[f"log10_V_t={t:g}" for t in rep.checkpoints]], rows)
    if rep.log10_v.shape[0]:
        out.say(f"transience (conjecture evidence): median log10 V rises by {summary['growth_ratio_log10']:.3g} "
                f"from t={rep.reference_time:g} to t={rep.checkpoints[-1]:g}")
    return 0


# ---------------------------------------------------------------- sweep


def curve_shape(values) -> str:
    """``increasing``, ``decreasing``, ``unimodal`` (one interior peak) or ``other``."""
    d = np.sign(np.diff(np.asarray(values, dtype=float)))
    if len(d) == 0 or np.all(d >= 0):
        return "increasing"
    if np.all(d <= 0):
        return "decreasing"
    peak = int(np.argmax(values))
    if np.all(d[:peak] >= 0) and np.all(d[peak:] <= 0):
        return "unimodal"
    return "other"


def cmd_sweep(rc: RunConfig, out: Output, workers: int) -> int:
    p = rc.params
    system = rc.build_system()
    if p["kind"] == "rates":
        lin = _linear_pair(system)
        rows = []
        for k in p["values"]:
            k = float(k)
            _, est = estimate_lambda_quadrature(SwitchedLinearSystem(lin.A0, lin.A1, k, k), p["n_grid"])
            rows.append((k, est.lambda_hat))
        lam = [r[1] for r in rows]
        result = {"kind": "rates", "k": [r[0] for r in rows], "lambda": lam, "shape": curve_shape(lam)}
        ok = None
        if out.csv:
            _write_rows(out, "sweep.csv", ["k", "lambda"], rows)
        out.say(f"sweep: Lambda over k0=k1 in {result['k']}: {result['shape']}")
    elif p["kind"] == "start-distance":
        lv = _lv_system(rc)
        reps = start_distance_sweep(lv, None, p["epsilon"], [float(v) for v in p["values"]], int(p["n"]),
                                    p["horizon_cap"], rc.seed, workers, p["initial_mode"], _integrator(p))
        trend = distance_trend(reps)
        result = {"kind": "start-distance", "trend": trend, "reports": [r.to_dict() for r in reps]}
        for r in result["reports"]:
            r.pop("params")
        ok = trend["nondecreasing"]
        if out.csv:
            _write_rows(out, "sweep.csv", ["start_distance", "mean_tau", "stderr_tau", "n_censored"],
                        ((r.start_distance, r.mean, r.stderr, r.n_censored) for r in reps))
        out.say(f"sweep: mean exit time vs start distance {'nondecreasing' if ok else 'DROPS'} as distance shrinks")
    else:
        raise ConfigError('params.kind must be "rates" or "start-distance"')
    _write_summary(out, rc, result, ok)
    return 0 if ok in (None, True) else 1


COMMANDS = {
    "check": cmd_check,
    "lyapunov": cmd_lyapunov,
    "density": cmd_density,
    "simulate": cmd_simulate,
    "exit-times": cmd_exit_times,
    "oscillation": cmd_oscillation,
    "transience": cmd_transience,
    "sweep": cmd_sweep,
}


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _workers(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("workers must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdmpswitch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file (defaults are used when omitted)")
        sp.add_argument("--seed", type=_seed, help="root seed, overrides the config")
        sp.add_argument("--out", default="results", help="output directory (default: results)")
        sp.add_argument("--format", choices=("csv", "json", "both"), default="both")
        sp.add_argument("--workers", type=_workers, default=1)
        sp.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = cfgmod.load(args.config) if args.config else None
        rc = cfgmod.resolve(args.command, raw, args.seed)
        out = Output(Path(args.out), args.format, args.quiet)
        return COMMANDS[args.command](rc, out, args.workers)
    except (ConfigError, SpectralConditionError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
