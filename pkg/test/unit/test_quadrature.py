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
from UASolver.internal import quadrature
from UASolver.internal.exceptions import UAValidationError


def test_rectangle_rule():
    points, weights = quadrature.rectangle_rule(8)
    assert points[0] == 0.0
    assert points[-1] == pytest.approx(7 / 8)
    assert weights.sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        points[0] = 0.5


def test_gauss_legendre_is_exact_for_degree_2n_minus_1():
    points, weights = quadrature.gauss_legendre(5, 0.0, 2.0)
    assert weights.sum() == pytest.approx(2.0)
    assert np.all((points > 0.0) & (points < 2.0))
    assert float(np.dot(weights, points**9)) == pytest.approx(102.4, rel=1e-12)


def test_invalid_node_count():
    with pytest.raises(UAValidationError):
        quadrature.rectangle_rule(0)
    with pytest.raises(UAValidationError):
        quadrature.gauss_legendre(0)


def test_periodic_mean_of_trigonometric_polynomial():
    mean = quadrature.periodic_mean(
        lambda s: np.array([math.cos(2 * math.pi * s)**2, math.sin(2 * math.pi * s)]), 8)
    assert mean == pytest.approx(np.array([0.5, 0.0]), abs=1e-15)


def test_integrate():
    value = quadrature.integrate(lambda s: np.array([math.exp(s)]), 0.0, 1.0, 8)
    assert value[0] == pytest.approx(math.e - 1.0, rel=1e-13)
    assert quadrature.integrate(lambda s: np.array([1.0]), 0.3, 0.3, 4)[0] == 0.0


def test_periodic_antiderivative_matches_gauss_legendre():
    # modified Bessel function I0(1), the mean of exp(sin(2 pi s))
    mean = 1.2660658777520082
    nodes = 32
    points, _ = quadrature.rectangle_rule(nodes)
    samples = np.array([[math.exp(math.sin(2 * math.pi * s))] for s in points])
    for t in (0.1, 0.37, 0.5, 0.83, 1.0):
        spectral = quadrature.periodic_antiderivative(samples, t)
        gauss = quadrature.integrate(
            lambda s: np.array([math.exp(math.sin(2 * math.pi * s)) - mean]), 0.0, t, nodes)
        assert spectral == pytest.approx(gauss, abs=1e-12)


def test_periodic_antiderivative_of_sine():
    points, _ = quadrature.rectangle_rule(8)
    samples = np.sin(2 * math.pi * points)
    for t in (0.0, 0.25, 0.6):
        expected = (1.0 - math.cos(2 * math.pi * t)) / (2 * math.pi)
        assert quadrature.periodic_antiderivative(samples, t) == pytest.approx(expected,
                                                                               abs=1e-15)
