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
import pytest
from UASolver.internal.exceptions import UAValidationError
from UASolver.internal.scales import ScaleVector


def test_scale_vector_properties():
    scales = ScaleVector((0.1, 0.01))
    assert scales.n == 2
    assert scales.effective == (0.1, 0.01)
    assert scales.ratios == pytest.approx((0.1, ))
    assert scales.max_ratio == pytest.approx(0.1)
    assert scales.finest_period == 0.01
    assert str(scales) == "(0.1, 0.01)"


def test_phase_scale_sets_periods():
    scales = ScaleVector((1e-3, 1.1e-4, 3e-6), phase_scale=2 * math.pi)
    assert scales.finest_period == pytest.approx(1.885e-5, rel=1e-3)
    assert scales.eps == (1e-3, 1.1e-4, 3e-6)
    assert scales.with_eps((0.5, 0.1, 0.01)).phase_scale == 2 * math.pi


@pytest.mark.parametrize("eps", [(), (0.0, ), (1.0, ), (0.01, 0.1), (0.1, -0.01)])
def test_invalid_scales(eps):
    with pytest.raises(UAValidationError):
        ScaleVector(eps)


def test_equal_scales_are_allowed():
    assert ScaleVector((0.1, 0.1)).max_ratio == 1.0


def test_phase_wraps_into_unit_interval():
    scales = ScaleVector((0.5, ))
    assert scales.phase(0.25, 1) == pytest.approx(0.5)
    assert scales.phase(1.0, 1) == 0.0
    assert scales.phase(-0.125, 1) == pytest.approx(0.75)
    assert scales.phases(0.0) == (0.0, )


def test_phase_of_tiny_scale_keeps_digits():
    scales = ScaleVector((1e-3, 1e-12))
    theta = scales.phase(1.0 + 0.25e-12, 2)
    assert 0.0 <= theta < 1.0
    assert scales.phase(0.25e-12, 2) == pytest.approx(0.25)


def test_from_value():
    assert ScaleVector.from_value("0.1, 0.01").eps == (0.1, 0.01)
    assert ScaleVector.from_value([0.2]).eps == (0.2, )
    scales = ScaleVector((0.3, ))
    assert ScaleVector.from_value(scales) is scales
