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
from UASolver.internal.decomposition import (antiderivative_g, decompose, fluctuation,
                                             jacobian_g)
from UASolver.internal.exceptions import UAConfigurationError, UAValidationError
from UASolver.internal.problems import (PROBLEMS, exp_sin_scalar, get_problem,
                                        hamiltonian_4scale, henon_heiles_3scale, linear_decay)

CFG = SolverConfig(dt=0.1, t_final=1.0)
W = np.array([0.3, -0.2, 0.15, 0.4, -0.1, 0.25])


@pytest.fixture(scope="module")
def hh3():
    return henon_heiles_3scale(0.1, 0.01)


def _w_derivative(problem, w, t, h=1e-6):
    p, q = problem.from_w(w, t)
    dp, dq = problem.canonical_field(p, q)
    plus = problem.to_w(p + h * dp, q + h * dq, t + h)
    minus = problem.to_w(p - h * dp, q - h * dq, t - h)
    return (plus - minus) / (2.0 * h)


class TestHenonHeiles:

    @staticmethod
    def test_rotation_is_identity_at_start(hh3):
        p, q = np.array([1.0, 2.0, 3.0]), np.array([4.0, 5.0, 6.0])
        assert hh3.to_w(p, q, 0.0) == pytest.approx(np.array([4.0, 1.0, 5.0, 2.0, 6.0, 3.0]))

    @staticmethod
    def test_rotation_round_trip(hh3):
        p, q = np.array([0.1, -0.2, 0.3]), np.array([0.4, 0.5, -0.6])
        back_p, back_q = hh3.from_w(hh3.to_w(p, q, 0.37), 0.37)
        assert back_p == pytest.approx(p, abs=1e-14)
        assert back_q == pytest.approx(q, abs=1e-14)

    @staticmethod
    def test_hamiltonian_at_initial_state(hh3):
        assert hh3.invariant(np.array(hh3.x0), 0.0) == pytest.approx(1.600704, abs=1e-12)
        stiffer = henon_heiles_3scale(0.1, 0.001)
        ratio = stiffer.invariant(np.array(stiffer.x0), 0.0) / hh3.invariant(
            np.array(hh3.x0), 0.0)
        assert 9.0 < ratio < 10.0

    @staticmethod
    def test_hamiltonian_is_rotation_invariant(hh3):
        p, q = np.array([0.1, -0.2, 0.3]), np.array([0.4, 0.5, -0.6])
        expected = hh3.hamiltonian(p, q)
        for t in (0.0, 0.013, 0.37):
            assert hh3.invariant(hh3.to_w(p, q, t), t) == pytest.approx(expected, rel=1e-13)

    @staticmethod
    def test_field_formulas(hh3):
        t1, t2 = 0.21, 0.68
        A, B = 2 * math.pi * t1, 2 * math.pi * t2
        w1, w2, w3, w4, w5, w6 = W
        Q1 = w1 * math.cos(B) + w2 * math.sin(B)
        Q2 = w3 * math.cos(A) + w4 * math.sin(A)
        force = 2 * Q2 * w5 + Q1**2 - Q2**2
        expected = np.array([
            2 * math.sin(B) * Q1 * Q2, -2 * math.cos(B) * Q1 * Q2,
            math.sin(A) * force, -math.cos(A) * force, w6, w5**2 - w5 - Q2**2
        ])
        assert hh3.field.eval((t1, t2), W) == pytest.approx(expected, abs=1e-14)

    @staticmethod
    def test_field_matches_canonical_flow(hh3):
        problem = henon_heiles_3scale(0.5, 0.3)
        t = 0.37
        assert problem.field.eval(problem.scales.phases(t), W) == pytest.approx(
            _w_derivative(problem, W, t), abs=1e-6)

    @staticmethod
    def test_mean_field(hh3):
        decomp = hh3.decompose(CFG)
        assert decomp.provider == "analytic"
        w1, w2, w3, w4, w5, w6 = W
        expected = np.array([0.0, 0.0, w4 * w5, -w3 * w5, w6, w5**2 - w5 - (w3**2 + w4**2) / 2])
        assert decomp.mean(W) == pytest.approx(expected, abs=1e-14)

    @staticmethod
    def test_antiderivative_closed_forms(hh3):
        decomp = hh3.decompose(CFG)
        t1, t2 = 0.21, 0.68
        A, B = 2 * math.pi * t1, 2 * math.pi * t2
        w1, w2, w3, w4 = W[:4]
        Q2 = w3 * math.cos(A) + w4 * math.sin(A)
        g1 = w2 * (w3 * math.sin(A) + w4 * (1 - math.cos(A))) / (2 * math.pi)
        g2 = Q2 * (w1 * (1 - math.cos(2 * B)) - w2 * math.sin(2 * B)) / (4 * math.pi)
        assert antiderivative_g(decomp, 1, (t1, t2), W)[0] == pytest.approx(g1, abs=1e-14)
        assert antiderivative_g(decomp, 2, (t1, t2), W)[0] == pytest.approx(g2, abs=1e-14)

    @staticmethod
    def test_closed_forms_agree_with_quadrature(hh3):
        analytic = hh3.decompose(CFG)
        numeric = decompose(hh3.field, CFG.replace(provider="numeric", quad_nodes=16))
        assert numeric.provider == "numeric"
        for phases in ((0.21, 0.68), (0.5, 0.05), (0.93, 0.4)):
            for k in (1, 2):
                assert antiderivative_g(numeric, k, phases, W) == pytest.approx(
                    antiderivative_g(analytic, k, phases, W), abs=1e-10)
                assert fluctuation(numeric, k, phases, W) == pytest.approx(
                    fluctuation(analytic, k, phases, W), abs=1e-10)
                assert jacobian_g(numeric, k, phases, W) == pytest.approx(
                    jacobian_g(analytic, k, phases, W), abs=1e-9)
        assert numeric.mean(W) == pytest.approx(analytic.mean(W), abs=1e-12)


class TestFourScaleChain:

    @staticmethod
    def test_field_matches_canonical_flow():
        problem = hamiltonian_4scale(0.5, 0.3, 0.2)
        w = np.array([0.3, -0.2, 0.15, 0.4, -0.1, 0.25, 0.05, -0.35])
        t = 0.37
        assert problem.field.eval(problem.scales.phases(t), w) == pytest.approx(
            _w_derivative(problem, w, t), abs=1e-6)

    @staticmethod
    def test_closed_forms_pass_self_check():
        problem = get_problem("hh4")
        decomp = problem.decompose(CFG)
        assert decomp.provider == "analytic"
        assert decomp.n == 3
        assert decomp.d == 8
        assert problem.scales.finest_period == pytest.approx(2 * math.pi * 3e-6)

    @staticmethod
    def test_hamiltonian_is_rotation_invariant():
        problem = hamiltonian_4scale(0.5, 0.3, 0.2)
        p, q = np.array([0.1, -0.2, 0.3, 0.05]), np.array([0.4, 0.5, -0.6, 0.2])
        expected = problem.hamiltonian(p, q)
        w = problem.to_w(p, q, 0.91)
        assert problem.invariant(w, 0.91) == pytest.approx(expected, rel=1e-13)


class TestOtherProblems:

    @staticmethod
    def test_exp_sin_has_no_closed_forms():
        problem = exp_sin_scalar(7e-2, 1.1e-4)
        assert problem.analytic is None
        assert problem.invariant is None
        value = problem.field.eval((0.0, 0.0), np.array([0.48]))
        assert value == pytest.approx(np.array([0.24]))
        assert problem.decompose(CFG).provider == "numeric"

    @staticmethod
    def test_linear_decay_dimension():
        problem = linear_decay(0.1, 0.01, d=3)
        assert problem.d == 3
        assert problem.x0 == (1.0, 1.0, 1.0)
        decomp = problem.decompose(CFG)
        assert decomp.provider == "analytic"
        assert jacobian_g(decomp, 2, (0.3, 0.6), np.ones(3)).shape == (3, 3)
        with pytest.raises(UAValidationError):
            linear_decay(0.1, 0.01, d=0)


class TestRegistry:

    @staticmethod
    def test_registered_names():
        assert set(PROBLEMS) == {"hh3", "hh4", "expsin", "linear-decay"}

    @staticmethod
    def test_defaults_and_overrides():
        assert get_problem(" HH3 ").scales.eps == pytest.approx((0.1, 0.01))
        assert get_problem("hh3", [0.05, 0.001]).scales.eps == pytest.approx((0.05, 0.001))

    @staticmethod
    def test_unknown_problem():
        with pytest.raises(UAConfigurationError, match="Available"):
            get_problem("lorenz")

    @staticmethod
    def test_wrong_number_of_scales():
        with pytest.raises(UAValidationError):
            get_problem("hh3", [0.1])
        with pytest.raises(UAValidationError):
            get_problem("hh3", [0.01, 0.1])
