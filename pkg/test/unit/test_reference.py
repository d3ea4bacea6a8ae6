# -*- coding: utf-8 -*-
# --------------------------
# Copyright © 2022 -            Qentinel Group.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ---------------------------

import math
import numpy as np
import pytest
from UASolver.internal.config import SolverConfig
from UASolver.internal.decomposition import MultiscaleField
from UASolver.internal.exceptions import (UAConfigurationError, UAMidpointSolveError,
                                          UARangeError, UAValidationError)
from UASolver.internal.integrator import Trajectory, integrate
from UASolver.keywords import config
from UASolver.internal.problems import linear_decay
from UASolver.internal.reference import (ErrorReport, averaged_method, direct_im2nd,
                                         error_at_final, hamiltonian_error_series,
                                         reference_guard, rk45_reference, validated_reference)
from UASolver.internal.scales import ScaleVector


@pytest.fixture
def registry():
    yield config
    config.reset_config()


def _trajectory(values, times=(0.0, 1.0), invariant=None):
    x = np.array(values, dtype=float)
    traj = Trajectory(np.array(times, dtype=float), x, x.copy())
    if invariant is not None:
        traj.invariant = np.array(invariant, dtype=float)
    return traj


class TestRk45Reference:

    @staticmethod
    def test_linear_decay_to_ten_digits():
        problem = linear_decay(0.5, 0.4)
        traj = rk45_reference(problem.field, problem.scales, [1.0], 1.0, step=1e-3)
        assert traj.final_state[0] == pytest.approx(math.exp(-1.0), abs=1e-10)
        assert traj.final_time == 1.0
        assert traj.meta["mode"] == "fixed"
        assert traj.meta["steps"] == 1000
        assert traj.method == "reference"

    @staticmethod
    def test_fifth_order():
        problem = linear_decay(0.95, 0.9)
        errors = []
        for step in (0.04, 0.02):
            traj = rk45_reference(problem.field, problem.scales, [1.0], 1.0, step=step)
            errors.append(abs(traj.final_state[0] - math.exp(-1.0)))
        assert 25.0 < errors[0] / errors[1] < 40.0

    @staticmethod
    def test_store_every():
        problem = linear_decay(0.5, 0.4)
        traj = rk45_reference(problem.field, problem.scales, [1.0], 1.0, step=1e-3,
                              store_every=100)
        assert len(traj.times) == 11
        assert traj.times[-1] == 1.0
        assert traj.times[1] == pytest.approx(0.1)

    @staticmethod
    def test_restart_from_offset():
        problem = linear_decay(0.5, 0.4)
        traj = rk45_reference(problem.field, problem.scales, [1.0], 1.5, step=1e-3, t0=0.5)
        assert traj.times[0] == 0.5
        assert traj.final_state[0] == pytest.approx(math.exp(-1.0), abs=1e-10)

    @staticmethod
    def test_adaptive_mode():
        problem = linear_decay(0.5, 0.4)
        traj = rk45_reference(problem.field, problem.scales, [1.0], 1.0, rtol=1e-10)
        assert traj.meta["mode"] == "adaptive"
        assert traj.final_state[0] == pytest.approx(math.exp(-1.0), abs=1e-8)

    @staticmethod
    def test_needs_step_or_tolerance():
        problem = linear_decay(0.5, 0.4)
        with pytest.raises(UAValidationError):
            rk45_reference(problem.field, problem.scales, [1.0], 1.0)

    @staticmethod
    def test_validated_reference_error_bar():
        problem = linear_decay(0.5, 0.4)
        ref, error_bar = validated_reference(problem.field, problem.scales, [1.0], 1.0, 1e-2)
        assert error_bar < 1e-11
        assert ref.meta["error_bar"] == error_bar


class TestReferenceGuard:

    @staticmethod
    def test_step_must_resolve_finest_period():
        scales = ScaleVector((0.1, 0.01))
        assert reference_guard(scales, 4e-4, 1.0) == 2500
        with pytest.raises(UAConfigurationError) as e:
            reference_guard(scales, 1e-3, 1.0)
        assert e.value.cost_estimate is None

    @staticmethod
    def test_step_count_limit(registry):
        registry.set_config("MaxReferenceSteps", 100)
        problem = linear_decay(0.5, 0.4)
        with pytest.raises(UAConfigurationError) as e:
            rk45_reference(problem.field, problem.scales, [1.0], 1.0, step=1e-3)
        assert e.value.cost_estimate == 1000.0

    @staticmethod
    def test_samples_per_period_is_configurable(registry):
        registry.set_config("RefSamplesPerPeriod", 5)
        assert reference_guard(ScaleVector((0.1, 0.01)), 1e-3, 1.0) == 1000


class TestDirectSolve:

    @staticmethod
    def test_failed_step_ends_run():
        field = MultiscaleField(1, 2, lambda phases, x: 50.0 * np.asarray(x), "growth")
        cfg = SolverConfig(dt=0.1, t_final=1.0)
        traj = direct_im2nd(field, ScaleVector((0.1, 0.01)), cfg, [1.0])
        assert traj.failed
        assert traj.meta["failed_step"] == 0
        assert len(traj.times) == 1
        with pytest.raises(UAMidpointSolveError):
            direct_im2nd(field, ScaleVector((0.1, 0.01)), cfg, [1.0], raise_on_failure=True)

    @staticmethod
    def test_quad_nodes_override():
        problem = linear_decay(0.1, 0.01)
        cfg = SolverConfig(dt=0.1, t_final=1.0)
        traj = direct_im2nd(problem.field, problem.scales, cfg, [1.0], quad_nodes=2)
        assert traj.meta["quad_nodes"] == 2
        assert not traj.failed
        assert traj.final_state[0] == pytest.approx(((1 - 0.05) / (1 + 0.05))**10, rel=1e-10)

    @staticmethod
    def test_scale_count_must_match():
        problem = linear_decay(0.1, 0.01)
        with pytest.raises(UAValidationError):
            direct_im2nd(problem.field, ScaleVector((0.1, )), SolverConfig(dt=0.1, t_final=1.0),
                         [1.0])


class TestAveragedMethod:

    @staticmethod
    def test_equals_ua_without_fluctuations():
        problem = linear_decay(0.1, 0.01)
        cfg = SolverConfig(dt=0.1, t_final=1.0)
        decomp = problem.decompose(cfg)
        averaged = averaged_method(decomp, cfg, [1.0])
        ua = integrate(decomp, problem.scales, cfg, [1.0])
        assert averaged.method == "averaged"
        assert averaged.final_state == pytest.approx(ua.final_state, abs=1e-12)


class TestErrors:

    @staticmethod
    def test_error_at_final():
        a = _trajectory([[0.0, 0.0], [3.0, 4.0]])
        b = _trajectory([[0.0, 0.0], [0.0, 0.0]])
        assert error_at_final(a, a) == 0.0
        assert error_at_final(a, b) == pytest.approx(5.0)

    @staticmethod
    def test_error_needs_shared_final_time():
        a = _trajectory([[0.0], [1.0]], times=(0.0, 2.0))
        b = _trajectory([[0.0], [1.0]])
        with pytest.raises(UARangeError):
            error_at_final(a, b)

    @staticmethod
    def test_hamiltonian_error_series():
        traj = _trajectory([[0.0], [1.0], [2.0]], times=(0.0, 0.5, 1.0),
                           invariant=[2.0, 2.5, 1.0])
        series = hamiltonian_error_series(traj)
        assert series[0] == (0.0, 0.0, 0.0)
        assert series[1] == pytest.approx((0.5, 0.5, 0.25))
        assert series[2] == pytest.approx((1.0, 1.0, 0.5))
        with pytest.raises(UAValidationError):
            hamiltonian_error_series(_trajectory([[0.0], [1.0]]))

    @staticmethod
    def test_error_report():
        report = ErrorReport("hh3", "ua", (0.1, 0.01), 0.1, 1e-4, extra=dict(mode="reference"))
        row = report.as_row()
        assert row["eps1"] == 0.1
        assert row["eps2"] == 0.01
        assert row["mode"] == "reference"
        assert row["error_l2_final"] == 1e-4
        with pytest.raises(UAValidationError):
            ErrorReport("hh3", "ua", (0.1, 0.01), 0.1, -1.0)
        with pytest.raises(UAValidationError):
            ErrorReport("hh3", "ua", (0.1, 0.01), 0.1, math.nan)
