import csv
import json
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from oracles import random_elliptic
from pdmpswitch.linalg2 import TraceZeroMatrix2, quadratic_invariant
from pdmpswitch.streams import stream
from pdmpswitch.switched_linear import (
    LinearWalker,
    LogPolarState,
    SwitchedLinearSystem,
    angular_velocity,
    flow_linear,
    radial_rate,
    sample_holding_time,
    simulate,
)

R = TraceZeroMatrix2.rotation(1.0)
M = TraceZeroMatrix2(1.0, -2.0, 1.0)
GENERIC = SwitchedLinearSystem(R, M)


class _FixedUniform:
    def __init__(self, *values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


class TestSystem:
    def test_rates_positive(self):
        with pytest.raises(ValueError):
            SwitchedLinearSystem(R, M, 0.0, 1.0)

    def test_dict_round_trip(self):
        s = SwitchedLinearSystem(R, M, 0.5, 2.0)
        d = s.to_dict()
        assert d["A1"] == [1.0, -2.0, 1.0, -1.0]
        assert SwitchedLinearSystem.from_dict(json.loads(json.dumps(d))) == s


class TestState:
    def test_angle_reduced(self):
        s = LogPolarState(-0.5)
        assert 0.0 <= s.theta < 2 * math.pi
        assert s.theta == pytest.approx(2 * math.pi - 0.5)

    def test_from_vector(self):
        s = LogPolarState.from_vector([0.0, -3.0])
        assert s.theta == pytest.approx(1.5 * math.pi)
        assert s.log_r == pytest.approx(math.log(3.0))
        np.testing.assert_allclose(s.vector(), [0.0, -3.0], atol=1e-15)


class TestHoldingTime:
    def test_inverse_cdf_quantile(self):
        assert sample_holding_time(2.0, _FixedUniform(1 - math.exp(-1))) == pytest.approx(0.5, rel=1e-15)

    def test_zero_draw_is_redrawn(self):
        assert sample_holding_time(1.0, _FixedUniform(0.0, 0.5)) == pytest.approx(math.log(2.0))

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            sample_holding_time(0.0, stream(1))

    def test_mean(self):
        rng = stream(3)
        x = np.array([sample_holding_time(2.0, rng) for _ in range(200_000)])
        assert x.min() > 0.0
        assert abs(x.mean() - 0.5) <= 3 * 0.5 / math.sqrt(len(x))


class TestFlow:
    def test_rotation_is_isometry(self):
        s = flow_linear(TraceZeroMatrix2.rotation(2.0), 1.3, LogPolarState(0.4, 2.5))
        assert s.log_r == 2.5
        assert s.theta == pytest.approx(0.4 + 2.6)

    def test_zero_time(self):
        s0 = LogPolarState(1.0, 0.2, 1, 3.0)
        s1 = flow_linear(M, 0.0, s0)
        assert s1.theta == pytest.approx(s0.theta, abs=1e-15) and s1.log_r == pytest.approx(s0.log_r, abs=1e-15)

    def test_against_fine_integration(self):
        s0 = LogPolarState(0.7, 0.3)
        s1 = flow_linear(M, 2.0, s0)
        sol = solve_ivp(lambda t, y: M.to_array() @ y, (0, 2.0), s0.vector(), method="DOP853",
                        rtol=1e-13, atol=1e-15, max_step=1e-3)
        y = sol.y[:, -1]
        assert np.linalg.norm(s1.vector() - y) <= 1e-8 * np.linalg.norm(y)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            flow_linear(M, -1.0, LogPolarState(0.0))

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32), st.floats(0, 20), st.floats(0, 2 * math.pi))
    def test_matches_matrix_exponential(self, seed, t, theta):
        A = TraceZeroMatrix2(*random_elliptic(np.random.default_rng(seed), 5.0))
        s0 = LogPolarState(theta)
        y = scipy.linalg.expm(t * A.to_array()) @ s0.vector()
        s1 = flow_linear(A, t, s0)
        assert abs(s1.log_r - math.log(np.linalg.norm(y))) <= 1e-9 * max(1.0, abs(s1.log_r))
        u = y / np.linalg.norm(y)
        assert abs(math.cos(s1.theta) - u[0]) + abs(math.sin(s1.theta) - u[1]) <= 1e-9


class TestRates:
    def test_rotation(self):
        th = np.linspace(0, 2 * np.pi, 17)
        np.testing.assert_allclose(angular_velocity(TraceZeroMatrix2.rotation(3.0), th), 3.0, atol=1e-15)
        np.testing.assert_allclose(radial_rate(TraceZeroMatrix2.rotation(3.0), th), 0.0, atol=1e-15)

    def test_definitions(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            A = TraceZeroMatrix2(*rng.normal(size=3))
            th = rng.uniform(0, 2 * np.pi)
            u = np.array([math.cos(th), math.sin(th)])
            up = np.array([-math.sin(th), math.cos(th)])
            Au = A.to_array() @ u
            assert angular_velocity(A, th) == pytest.approx(Au @ up, abs=1e-14)
            assert radial_rate(A, th) == pytest.approx(Au @ u, abs=1e-14)

    def test_example_value(self):
        assert radial_rate(M, 0.0) == pytest.approx(1.0)

    def test_never_zero_for_elliptic(self):
        rng = np.random.default_rng(1)
        th = np.linspace(0, 2 * np.pi, 10_000, endpoint=False)
        for _ in range(50):
            A = TraceZeroMatrix2(*random_elliptic(rng, 3.0))
            v = angular_velocity(A, th)
            assert np.all(v > 0) or np.all(v < 0)

    def test_vanishes_on_real_eigenvector(self):
        A = TraceZeroMatrix2(1.0, 1.0, 1.0)
        w, V = np.linalg.eigh(A.to_array())
        th = math.atan2(V[1, 0], V[0, 0])
        assert angular_velocity(A, th) == pytest.approx(0.0, abs=1e-14)

    def test_uniform_average_and_quarter_turn(self):
        th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        assert radial_rate(M, th).mean() == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(radial_rate(M, th) + radial_rate(M, th + np.pi / 2), 0.0, atol=1e-14)


class TestSimulate:
    def test_deterministic(self):
        grid = np.linspace(0, 50, 101)
        a = simulate(GENERIC, LogPolarState(0.3), 50.0, grid, seed=9)
        b = simulate(GENERIC, LogPolarState(0.3), 50.0, grid, seed=9)
        assert np.array_equal(a.log_r, b.log_r) and np.array_equal(a.theta, b.theta)
        assert np.array_equal(a.seg_time, b.seg_time)

    def test_skeleton(self):
        tr = simulate(GENERIC, LogPolarState(0.3), 200.0, seed=2)
        assert np.all(np.diff(tr.seg_time) > 0)
        assert np.array_equal(tr.seg_mode, np.arange(len(tr.seg_mode)) % 2)
        assert tr.n_jumps == len(tr.jumps())

    def test_short_horizon_single_segment(self):
        rng = stream(5)
        first = sample_holding_time(1.0, stream(5))
        tr = simulate(GENERIC, LogPolarState(0.3), 0.5 * first, rng=rng)
        assert tr.n_jumps == 0

    def test_jump_counts_poisson(self):
        k, T, n = 1.5, 4.0, 10_000
        sys_ = SwitchedLinearSystem(R, M, k, k)
        counts = np.array([simulate(sys_, LogPolarState(0.0), T, rng=stream(77, i)).n_jumps for i in range(n)])
        assert abs(counts.mean() - k * T) <= 3 * math.sqrt(k * T / n)

    def test_reconstruction_against_matrix_product(self):
        tr = simulate(GENERIC, LogPolarState(0.3, 0.1), 30.0, seed=4)
        y = LogPolarState(0.3, 0.1).vector()
        bounds = np.append(tr.seg_time, tr.horizon)
        for j in range(len(tr.seg_time)):
            A = GENERIC.matrix(int(tr.seg_mode[j]))
            y = scipy.linalg.expm((bounds[j + 1] - bounds[j]) * A.to_array()) @ y
        assert tr.final.log_r == pytest.approx(math.log(np.linalg.norm(y)), abs=1e-9)

    def test_antipodal_symmetry(self):
        grid = np.linspace(0, 100, 201)
        a = simulate(GENERIC, LogPolarState(0.5), 100.0, grid, seed=8)
        b = simulate(GENERIC, LogPolarState(0.5 + math.pi), 100.0, grid, seed=8)
        assert np.array_equal(a.log_r, b.log_r)
        d = np.mod(b.theta - a.theta, 2 * np.pi)
        np.testing.assert_allclose(d, np.pi, atol=1e-9)

    def test_scale_equivariance(self):
        grid = np.linspace(0, 40, 81)
        a = simulate(GENERIC, LogPolarState(1.0, 0.0), 40.0, grid, seed=3)
        b = simulate(GENERIC, LogPolarState(1.0, 5.0), 40.0, grid, seed=3)
        np.testing.assert_allclose(b.log_r - a.log_r, 5.0, atol=1e-12)
        assert np.array_equal(a.theta, b.theta)

    def test_quadratic_invariant_between_jumps(self):
        grid = np.linspace(0, 60, 2001)
        tr = simulate(GENERIC, LogPolarState(0.2), 60.0, grid, seed=6)
        seg = np.searchsorted(tr.seg_time, grid, side="right") - 1
        for j in np.unique(seg):
            idx = np.flatnonzero(seg == j)
            if len(idx) < 2:
                continue
            Q = quadratic_invariant(GENERIC.matrix(int(tr.seg_mode[j])))
            vals = np.array([Q(np.exp(tr.log_r[i]) * np.array([math.cos(tr.theta[i]), math.sin(tr.theta[i])]))
                             for i in idx])
            assert np.abs(vals - vals[0]).max() <= 1e-9 * abs(vals[0])

    def test_rotations_keep_radius(self):
        sys_ = SwitchedLinearSystem(R, TraceZeroMatrix2.rotation(2.0))
        tr = simulate(sys_, LogPolarState(0.1), 500.0, np.linspace(0, 500, 11), seed=1)
        assert np.all(tr.log_r == 0.0) and tr.final.log_r == 0.0

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            simulate(GENERIC, LogPolarState(0.0), 1.0, [0.5, 2.0], seed=0)
        with pytest.raises(ValueError):
            simulate(GENERIC, LogPolarState(0.0), 0.0, seed=0)

    def test_jump_exactly_at_stop_stays_pending(self):
        w = LinearWalker(GENERIC, LogPolarState(0.0), stream(12))
        t_jump = w.next_jump
        w.advance(t_jump)
        assert w.mode == 0 and w.next_jump == t_jump
        w.advance(t_jump + 1e-9)
        assert w.mode == 1

    def test_csv_and_json(self, tmp_path):
        tr = simulate(GENERIC, LogPolarState(0.3), 5.0, np.linspace(0, 5, 6), seed=13)
        p = tmp_path / "traj.csv"
        tr.write_csv(p)
        lines = p.read_text().splitlines()
        meta = json.loads(lines[0][2:])
        assert meta["seed"] == 13 and meta["system"]["type"] == "linear"
        rows = list(csv.reader(lines[1:]))
        assert rows[0] == ["time", "theta", "log_r", "mode"]
        assert len(rows) == 7
        assert float(rows[-1][2]) == tr.log_r[-1]
        js = tr.to_json()
        assert len(js["jumps"]) == tr.n_jumps
