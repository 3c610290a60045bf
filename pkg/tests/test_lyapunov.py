import csv
import math

import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from pdmpswitch.linalg2 import TraceZeroMatrix2, similarity
from pdmpswitch.lyapunov import (
    AngularDensityPair,
    GrowthRateEstimate,
    InsufficientDataError,
    balance_residual,
    empirical_angular_histogram,
    estimate_lambda_mc,
    estimate_lambda_quadrature,
    initial_direction_sweep,
    total_variation,
)
from pdmpswitch.switched_linear import LogPolarState, SwitchedLinearSystem, angular_velocity, radial_rate, simulate

R = TraceZeroMatrix2.rotation(1.0)
M = TraceZeroMatrix2(1.0, -2.0, 1.0)
J1 = TraceZeroMatrix2(0.0, -2.0, 1.0)
GENERIC = SwitchedLinearSystem(R, M)
DEMO = SwitchedLinearSystem(R, J1)

# Frozen from the spectral solver and cross-checked below against an
# independent finite-difference solve.
DEMO_LAMBDA = 0.008697371811685


def fd_lambda(system: SwitchedLinearSystem, n: int = 2**15) -> float:
    """Second-order central finite differences on the full circle, sparse solve."""
    th = 2 * np.pi * np.arange(n) / n
    h = 2 * np.pi / n
    D = sp.diags([np.full(n - 1, 0.5 / h), np.full(n - 1, -0.5 / h)], [1, -1], format="lil")
    D[0, n - 1] = -0.5 / h
    D[n - 1, 0] = 0.5 / h
    D = D.tocsr()
    v0 = sp.diags(angular_velocity(system.A0, th))
    v1 = sp.diags(angular_velocity(system.A1, th))
    I = sp.identity(n)
    k0, k1 = system.k0, system.k1
    A = sp.bmat([[D @ v0 + k0 * I, -k1 * I], [-k0 * I, D @ v1 + k1 * I]], format="lil")
    A[2 * n - 1, :] = h
    rhs = np.zeros(2 * n)
    rhs[-1] = 1.0
    x = spla.spsolve(A.tocsc(), rhs)
    return float(h * np.sum(radial_rate(system.A0, th) * x[:n] + radial_rate(system.A1, th) * x[n:]))


class TestEstimateType:
    def test_interval_must_contain(self):
        with pytest.raises(ValueError):
            GrowthRateEstimate(1.0, 0.1, 1.1, 1.2, "quadrature")

    def test_method_tag(self):
        with pytest.raises(ValueError):
            GrowthRateEstimate(0.0, 0.0, 0.0, 0.0, "guess")

    def test_zero_stderr_needs_identical_replicates(self):
        with pytest.raises(ValueError):
            GrowthRateEstimate(0.5, 0.0, 0.5, 0.5, "time_average", {}, (0.0, 1.0))
        GrowthRateEstimate(0.0, 0.0, 0.0, 0.0, "time_average", {}, (0.0, 0.0))

    def test_second_exponent(self):
        assert GrowthRateEstimate(0.2, 0.0, 0.2, 0.2, "quadrature").lambda2 == -0.2


class TestQuadrature:
    def test_demo_value_against_independent_solver(self):
        _, est = estimate_lambda_quadrature(DEMO, 1024)
        assert est.lambda_hat == pytest.approx(DEMO_LAMBDA, abs=1e-13)
        assert fd_lambda(DEMO) == pytest.approx(DEMO_LAMBDA, abs=1e-6)

    def test_generic_against_independent_solver(self):
        _, est = estimate_lambda_quadrature(GENERIC, 1024)
        assert est.lambda_hat > 0
        assert fd_lambda(GENERIC) == pytest.approx(est.lambda_hat, abs=1e-6)

    def test_rotations_uniform(self):
        dens, est = estimate_lambda_quadrature(SwitchedLinearSystem(R, R), 256)
        np.testing.assert_allclose(dens.rho0, 1 / (4 * np.pi), atol=1e-13)
        np.testing.assert_allclose(dens.rho1, 1 / (4 * np.pi), atol=1e-13)
        assert abs(est.lambda_hat) <= 1e-15

    def test_same_matrix_density(self):
        # one flow only: the angle density is proportional to 1/|v|, modes split k1:k0
        s = SwitchedLinearSystem(M, M, 1.0, 3.0)
        dens, est = estimate_lambda_quadrature(s, 512)
        inv = 1.0 / np.abs(angular_velocity(M, dens.grid))
        inv /= inv.sum() * dens.spacing
        np.testing.assert_allclose(dens.rho0, 0.75 * inv, atol=1e-10)
        np.testing.assert_allclose(dens.rho1, 0.25 * inv, atol=1e-10)
        assert abs(est.lambda_hat) <= 1e-10

    def test_density_invariants(self):
        dens, _ = estimate_lambda_quadrature(GENERIC, 1024)
        assert dens.total_mass() == pytest.approx(1.0, abs=1e-10)
        assert dens.rho0.min() >= 0 and dens.rho1.min() >= 0
        half = dens.n // 2
        np.testing.assert_allclose(dens.rho0[:half], dens.rho0[half:], atol=1e-10)
        assert balance_residual(GENERIC, dens) <= 1e-6

    def test_grid_convergence(self):
        _, a = estimate_lambda_quadrature(GENERIC, 512)
        _, b = estimate_lambda_quadrature(GENERIC, 1024)
        assert abs(a.lambda_hat - b.lambda_hat) <= 1e-6

    def test_swap_labels(self):
        s = SwitchedLinearSystem(R, M, 0.7, 1.9)
        _, a = estimate_lambda_quadrature(s, 1024)
        _, b = estimate_lambda_quadrature(s.swapped(), 1024)
        assert abs(a.lambda_hat - b.lambda_hat) <= 1e-10

    def test_similarity(self):
        P = np.array([[1.2, 0.3], [-0.4, 0.8]])
        s = SwitchedLinearSystem(similarity(P, R), similarity(P, M))
        _, a = estimate_lambda_quadrature(GENERIC, 1024)
        _, b = estimate_lambda_quadrature(s, 1024)
        assert abs(a.lambda_hat - b.lambda_hat) <= 1e-8

    def test_real_spectrum_rejected(self):
        with pytest.raises(ValueError):
            estimate_lambda_quadrature(SwitchedLinearSystem(R, TraceZeroMatrix2(1.0, 1.0, 1.0)), 256)

    def test_small_grid_rejected(self):
        with pytest.raises(ValueError):
            estimate_lambda_quadrature(GENERIC, 32)

    def test_bin_masses_sum(self):
        dens, _ = estimate_lambda_quadrature(GENERIC, 1024)
        masses = dens.bin_masses(128)
        assert masses.sum() == pytest.approx(1.0, abs=1e-10)
        # the exact bin integral agrees with a per-bin trapezoid rule on a fine grid
        fine, _ = estimate_lambda_quadrature(GENERIC, 2**14)
        assert fine.grid[0] == 0.0
        f = np.append(fine.rho0, fine.rho0[0]).copy()
        idx = np.arange(0, fine.n + 1, fine.n // 128)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]))]) * fine.spacing
        np.testing.assert_allclose(masses[0], np.diff(cum[idx]), atol=1e-9)

    def test_residual_orders(self):
        dens, _ = estimate_lambda_quadrature(GENERIC, 1024)
        assert balance_residual(GENERIC, dens, 4) < balance_residual(GENERIC, dens, 2)
        with pytest.raises(ValueError):
            balance_residual(GENERIC, dens, 3)

    def test_csv(self, tmp_path):
        dens, _ = estimate_lambda_quadrature(GENERIC, 128)
        p = tmp_path / "d.csv"
        dens.write_csv(p, {"n_grid": 128})
        rows = list(csv.reader(p.read_text().splitlines()[1:]))
        assert rows[0] == ["theta", "rho0", "rho1"] and len(rows) == 129


class TestMonteCarlo:
    def test_rotation_pairs_exactly_zero(self):
        for s in (SwitchedLinearSystem(R, R), SwitchedLinearSystem(R, TraceZeroMatrix2.rotation(2.0))):
            est = estimate_lambda_mc(s, horizon=200.0, n_reps=4, seed=1)
            assert est.lambda_hat == 0.0 and est.stderr == 0.0

    def test_generic_positive_and_agrees(self):
        _, quad = estimate_lambda_quadrature(GENERIC, 1024)
        est = estimate_lambda_mc(GENERIC, horizon=1e4, n_reps=64, seed=2024)
        assert est.interval(0.99)[0] > 0
        assert abs(est.lambda_hat - quad.lambda_hat) <= 2 * est.stderr

    def test_deterministic_and_worker_independent(self):
        a = estimate_lambda_mc(GENERIC, horizon=300.0, n_reps=6, seed=5)
        b = estimate_lambda_mc(GENERIC, horizon=300.0, n_reps=6, seed=5, workers=2)
        assert a.replicates == b.replicates

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            estimate_lambda_mc(GENERIC, horizon=10.0, burn_in=10.0)
        with pytest.raises(ValueError):
            estimate_lambda_mc(GENERIC, horizon=10.0, n_reps=1)

    def test_antipodal_directions_identical(self):
        sw = initial_direction_sweep(GENERIC, [0.4, 0.4 + math.pi], horizon=500.0, n_reps=4, seed=3)
        # 0.4 + pi carries its own rounding, so agreement is to the last few bits
        np.testing.assert_allclose(sw.estimates[0].replicates, sw.estimates[1].replicates, rtol=1e-12)

    def test_sweep_needs_two(self):
        with pytest.raises(ValueError):
            initial_direction_sweep(GENERIC, [0.0])

    def test_proportional_sweep_zero(self):
        sw = initial_direction_sweep(SwitchedLinearSystem(R, TraceZeroMatrix2.rotation(3.0)),
                                     [0.0, 1.0, 2.0], horizon=100.0, n_reps=3)
        assert all(e.lambda_hat == 0.0 for e in sw.estimates)


class TestHistogram:
    def test_rotation_flat(self):
        # no switching in practice: occupancy is flat up to the last partial turn
        s = SwitchedLinearSystem(R, R, 1e-12, 1e-12)
        tr = simulate(s, LogPolarState(0.3), 2000.0, seed=0)
        assert tr.n_jumps == 0
        hist = empirical_angular_histogram([tr], 64)
        assert np.abs(hist.rho0 - 1 / (2 * np.pi)).max() <= 1 / 2000

    def test_matches_quadrature(self):
        trajs = [simulate(GENERIC, LogPolarState(0.0), 1e4, seed=100 + i) for i in range(10)]
        hist = empirical_angular_histogram(trajs, 128, burn_in=100.0)
        dens, _ = estimate_lambda_quadrature(GENERIC, 1024)
        assert hist.total_mass() == pytest.approx(1.0, abs=1e-12)
        assert total_variation(hist.bin_masses(128), dens.bin_masses(128)) <= 0.02

    def test_time_weighted_single_segment(self):
        # brute-force occupancy by fine time sampling of one long segment
        s = SwitchedLinearSystem(M, M, 1e-9, 1e-9)
        tr = simulate(s, LogPolarState(0.3), 50.0, seed=1)
        assert tr.n_jumps == 0
        hist = empirical_angular_histogram([tr], 32)
        grid = np.linspace(0, 50, 2_000_001)[:-1] + 50 / 4_000_000
        fine = simulate(s, LogPolarState(0.3), 50.0, grid, seed=1)
        counts = np.bincount((fine.theta / (2 * np.pi / 32)).astype(int) % 32, minlength=32) / len(grid)
        np.testing.assert_allclose(hist.rho0 * (2 * np.pi / 32), counts, atol=2e-5)

    def test_empty(self):
        with pytest.raises(InsufficientDataError):
            empirical_angular_histogram([], 16)


def test_dens_type_spacing():
    d = AngularDensityPair(np.linspace(0, 2 * np.pi, 8, endpoint=False), np.ones(8), np.ones(8))
    assert d.spacing == pytest.approx(np.pi / 4)
