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
from scipy import integrate
from UASolver.internal.config import SolverConfig
from UASolver.internal.decomposition import (AnalyticForms, IrrationalCollapse, MultiscaleField,
                                             RationalCollapse, antiderivative_g,
                                             coarse_phase_derivative_g, collapse_field,
                                             collapsed_scale_mean, decompose, fluctuation,
                                             jacobian_g, periodicity_defect, validate_analytic)
from UASolver.internal.exceptions import UAEvaluationError, UAValidationError
from UASolver.internal.problems import exp_sin_scalar
from UASolver.internal.scales import ScaleVector

TWO_PI = 2 * math.pi
# modified Bessel function I0(1)
BESSEL_I0_1 = 1.2660658777520082


def _sine_field():
    return MultiscaleField(1, 1, lambda phases, x: math.sin(TWO_PI * phases[0]) * np.asarray(x),
                           "sine")


def _sine_forms(scale=1.0):

    def anti(phases, x):
        return scale * (1.0 - math.cos(TWO_PI * phases[0])) / TWO_PI * np.asarray(x)

    def anti_jac(phases, x):
        return np.array([[scale * (1.0 - math.cos(TWO_PI * phases[0])) / TWO_PI]])

    return AnalyticForms(mean=lambda x: np.zeros(1),
                         fluct=(lambda phases, x: math.sin(TWO_PI * phases[0]) * np.asarray(x), ),
                         anti=(anti, ),
                         anti_jac=(anti_jac, ))


def _product_field():
    return MultiscaleField(
        1, 2, lambda phases, x: math.cos(TWO_PI * phases[0]) * math.cos(TWO_PI * phases[1]) *
        np.asarray(x), "product")


class TestNumericDecomposition:

    @staticmethod
    def test_exp_sin_mean_slope():
        problem = exp_sin_scalar(7e-2, 1.1e-4)
        decomp = problem.decompose(SolverConfig(dt=0.1, t_final=1.0, quad_nodes=16))
        assert decomp.provider == "numeric"
        assert decomp.mean(np.array([1.0]))[0] == pytest.approx(1.5 - BESSEL_I0_1**2, abs=1e-9)

    @staticmethod
    def test_exp_sin_at_zero_phase():
        problem = exp_sin_scalar(7e-2, 1.1e-4)
        assert problem.field.eval((0.0, 0.0), np.array([0.8]))[0] == pytest.approx(0.4)

    @staticmethod
    def test_reconstruction_and_zero_mean():
        problem = exp_sin_scalar(7e-2, 1.1e-4)
        decomp = problem.decompose(SolverConfig(dt=0.1, t_final=1.0))
        rng = np.random.default_rng(3)
        for _ in range(5):
            phases = tuple(rng.random(2))
            x = rng.uniform(-1, 1, 1)
            total = decomp.mean(x) + fluctuation(decomp, 1, phases, x) + fluctuation(
                decomp, 2, phases, x)
            assert total == pytest.approx(problem.field.eval(phases, x), abs=1e-12)
        nodes = np.arange(8) / 8
        x = np.array([0.7])
        mean_2 = sum(fluctuation(decomp, 2, (0.3, s), x) for s in nodes) / 8
        assert abs(mean_2[0]) < 1e-12

    @staticmethod
    def test_antiderivative_vanishes_at_zero_phase():
        problem = exp_sin_scalar(7e-2, 1.1e-4)
        decomp = problem.decompose(SolverConfig(dt=0.1, t_final=1.0))
        x = np.array([0.48])
        assert antiderivative_g(decomp, 2, (0.4, 0.0), x)[0] == 0.0
        assert np.all(jacobian_g(decomp, 2, (0.4, 0.0), x) == 0.0)
        assert abs(antiderivative_g(decomp, 1, (1.0, ), x)[0]) < 1e-13
        assert abs(antiderivative_g(decomp, 2, (0.4, 1.0), x)[0]) < 1e-13

    @staticmethod
    def test_exp_sin_antiderivative_against_quadrature():
        problem = exp_sin_scalar(7e-2, 1.1e-4)
        decomp = problem.decompose(SolverConfig(dt=0.1, t_final=1.0, quad_nodes=32))
        partial, _ = integrate.quad(lambda s: math.exp(math.sin(TWO_PI * s)), 0.0, 0.5,
                                    epsabs=1e-14, epsrel=1e-14)
        expected = -(partial - BESSEL_I0_1 / 2)
        value = antiderivative_g(decomp, 2, (0.0, 0.5), np.array([1.0]))[0]
        assert value == pytest.approx(expected, abs=1e-12)

    @staticmethod
    def test_antiderivative_converges_as_nodes_double():
        partial, _ = integrate.quad(lambda s: math.exp(math.sin(TWO_PI * s)), 0.0, 0.3,
                                    epsabs=1e-14, epsrel=1e-14)
        expected = -(partial - 0.3 * BESSEL_I0_1)
        errors = []
        for nodes in (4, 8, 16):
            decomp = exp_sin_scalar(7e-2, 1.1e-4).decompose(
                SolverConfig(dt=0.1, t_final=1.0, quad_nodes=nodes))
            value = antiderivative_g(decomp, 2, (0.0, 0.3), np.array([1.0]))[0]
            errors.append(abs(value - expected))
        assert errors[1] < errors[0] / 10
        assert errors[2] < errors[1] / 10

    @staticmethod
    def test_numeric_jacobian_error_is_second_order_in_step():
        field = MultiscaleField(1, 1, lambda phases, x: math.sin(TWO_PI * phases[0]) * np.exp(x),
                                "sine-exp")
        theta, x = 0.3, np.array([0.4])
        exact = (1.0 - math.cos(TWO_PI * theta)) / TWO_PI * math.exp(0.4)
        discrepancies = []
        for dx in (1e-2, 5e-3):
            decomp = decompose(field, SolverConfig(dt=0.1, t_final=1.0, provider="numeric",
                                                   fd_dx=dx))
            discrepancies.append(abs(jacobian_g(decomp, 1, (theta, ), x)[0, 0] - exact))
        assert discrepancies[0] / discrepancies[1] == pytest.approx(4.0, rel=1e-2)

    @staticmethod
    def test_coarse_phase_derivative():
        decomp = decompose(_product_field(), SolverConfig(dt=0.1, t_final=1.0,
                                                          provider="numeric"))
        x = np.array([2.0])
        phases = (0.15, 0.35)
        expected = -2.0 * math.sin(TWO_PI * phases[0]) * math.sin(TWO_PI * phases[1])
        value = coarse_phase_derivative_g(decomp, 2, 1, phases, x)
        assert value[0] == pytest.approx(expected, abs=1e-8)
        assert coarse_phase_derivative_g(decomp, 2, 1, (0.15, 0.0), x)[0] == 0.0
        with pytest.raises(UAValidationError):
            coarse_phase_derivative_g(decomp, 2, 2, phases, x)
        with pytest.raises(UAValidationError):
            coarse_phase_derivative_g(decomp, 1, 1, (0.15, ), x)

    @staticmethod
    def test_level_out_of_range():
        problem = exp_sin_scalar(7e-2, 1.1e-4)
        decomp = problem.decompose(SolverConfig(dt=0.1, t_final=1.0))
        with pytest.raises(UAValidationError):
            antiderivative_g(decomp, 3, (0.1, 0.2), np.array([1.0]))

    @staticmethod
    def test_numeric_antiderivative_of_sine():
        decomp = decompose(_sine_field(), SolverConfig(dt=0.1, t_final=1.0, provider="numeric"))
        x = np.array([2.0])
        theta = 0.3
        expected = 2.0 * (1.0 - math.cos(TWO_PI * theta)) / TWO_PI
        assert antiderivative_g(decomp, 1, (theta, ), x)[0] == pytest.approx(expected, abs=1e-12)
        assert jacobian_g(decomp, 1, (theta, ), x)[0, 0] == pytest.approx(expected / 2.0,
                                                                         abs=1e-9)


class TestAnalyticForms:

    @staticmethod
    def test_valid_forms_pass_self_check():
        cfg = SolverConfig(dt=0.1, t_final=1.0)
        residuals = validate_analytic(_sine_field(), _sine_forms(), cfg)
        assert set(residuals) == {"reconstruction", "zero_mean", "periodicity",
                                  "antiderivative", "jacobian"}
        decomp = decompose(_sine_field(), cfg, _sine_forms())
        assert decomp.provider == "analytic"

    @staticmethod
    def test_wrong_antiderivative_is_rejected():
        with pytest.raises(UAValidationError, match="failed self-check"):
            decompose(_sine_field(), SolverConfig(dt=0.1, t_final=1.0), _sine_forms(scale=2.0))

    @staticmethod
    def test_analytic_provider_needs_forms():
        with pytest.raises(UAValidationError):
            decompose(_sine_field(), SolverConfig(dt=0.1, t_final=1.0, provider="analytic"))

    @staticmethod
    def test_numeric_provider_ignores_forms():
        decomp = decompose(_sine_field(), SolverConfig(dt=0.1, t_final=1.0, provider="numeric"),
                           _sine_forms(scale=2.0))
        assert decomp.provider == "numeric"

    @staticmethod
    def test_wrong_number_of_levels():
        forms = _sine_forms()
        field = MultiscaleField(1, 2, lambda phases, x: np.zeros(1))
        with pytest.raises(UAValidationError):
            validate_analytic(field, forms, SolverConfig(dt=0.1, t_final=1.0))


class TestFieldChecks:

    @staticmethod
    def test_non_periodic_field_is_rejected():
        field = MultiscaleField(1, 1, lambda phases, x: phases[0] * np.asarray(x), "ramp")
        assert periodicity_defect(field) > 1e-3
        with pytest.raises(UAValidationError, match="not 1-periodic"):
            decompose(field, SolverConfig(dt=0.1, t_final=1.0))

    @staticmethod
    def test_periodic_field_has_no_defect():
        assert periodicity_defect(exp_sin_scalar(7e-2, 1.1e-4).field) < 1e-12

    @staticmethod
    def test_non_finite_value_reports_point():
        field = MultiscaleField(1, 1, lambda phases, x: np.array([math.inf]), "bad")
        with pytest.raises(UAEvaluationError) as e:
            field.eval((0.25, ), np.array([1.0]))
        assert e.value.point[0] == (0.25, )


class TestCollapse:

    @staticmethod
    def test_rational_collapse_is_reduced():
        collapse = RationalCollapse(2, 4)
        assert (collapse.m1, collapse.m2) == (1, 2)
        assert collapse.ratio == 0.5
        with pytest.raises(UAValidationError):
            RationalCollapse(0, 1)
        with pytest.raises(UAValidationError):
            RationalCollapse(1.5, 2)

    @staticmethod
    def test_merged_field():
        field = _product_field()
        merged, scales = collapse_field(field, ScaleVector((0.1, 0.05)), RationalCollapse(1, 2))
        assert merged.n == 1
        assert scales.eps == pytest.approx((0.1, ))
        x = np.array([1.5])
        for theta in (0.0, 0.2, 0.7):
            expected = field.eval((theta, (2 * theta) % 1.0), x)
            assert merged.eval((theta, ), x) == pytest.approx(expected)

    @staticmethod
    def test_merged_scales_must_match_ratio():
        with pytest.raises(UAValidationError):
            collapse_field(_product_field(), ScaleVector((0.1, 0.04)), RationalCollapse(1, 2))

    @staticmethod
    def test_merged_scale_keeps_ordering():
        field = MultiscaleField(
            1, 3, lambda phases, x: math.cos(TWO_PI * phases[0]) * math.cos(
                TWO_PI * phases[1]) * math.cos(TWO_PI * phases[2]) * np.asarray(x), "triple")
        merged, scales = collapse_field(field, ScaleVector((0.1, 0.05, 0.025)),
                                        RationalCollapse(1, 2))
        assert merged.n == 2
        assert scales.eps == pytest.approx((0.1, 0.05))
        with pytest.raises(UAValidationError, match="ordering"):
            collapse_field(field, ScaleVector((0.1, 0.06, 0.04)), RationalCollapse(2, 3))
        with pytest.raises(UAValidationError, match="ordering"):
            collapse_field(_product_field(), ScaleVector((0.6, 0.4)), RationalCollapse(2, 3))

    @staticmethod
    def test_collapsed_means():
        field = _product_field()
        x = np.array([2.0])
        diagonal = collapsed_scale_mean(field, 2, RationalCollapse(1, 1))
        assert diagonal((), x)[0] == pytest.approx(1.0, abs=1e-14)
        torus = collapsed_scale_mean(field, 2, IrrationalCollapse())
        assert torus((), x)[0] == pytest.approx(0.0, abs=1e-14)
        with pytest.raises(UAValidationError):
            collapsed_scale_mean(field, 1, IrrationalCollapse())
