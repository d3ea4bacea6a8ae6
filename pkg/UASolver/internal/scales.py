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
"""Multiscale parameters and the fast phases derived from them.

Fields in this package are 1-periodic in every phase. Problems written
with cos(t/eps) style arguments (period 2*pi*eps) pass
``phase_scale=2*pi`` so that the effective scale eps*phase_scale is the
true period of the phase while ``eps`` keeps the problem's own values.
"""
from __future__ import annotations
from dataclasses import dataclass
from typing import Any, Sequence, Union

import math
from UASolver.internal import util
from UASolver.internal.exceptions import UAValidationError


@dataclass(frozen=True)
class ScaleVector:
    eps: tuple[float, ...]
    phase_scale: float = 1.0

    def __post_init__(self) -> None:
        eps = tuple(float(e) for e in self.eps)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "phase_scale", util.positive_float(self.phase_scale))
        if not eps:
            raise UAValidationError('At least one scale is needed')
        for e in eps:
            if not 0.0 < e < 1.0:
                raise UAValidationError('Scales must satisfy 0 < eps < 1, got {}'.format(eps))
        for coarse, fine in zip(eps, eps[1:]):
            if fine > coarse:
                raise UAValidationError('Scales must be nonincreasing, got {}'.format(eps))

    @classmethod
    def from_value(cls, value: Union[ScaleVector, str, Sequence[Any]],
                   phase_scale: float = 1.0) -> ScaleVector:
        if isinstance(value, ScaleVector):
            return value
        return cls(tuple(util.parse_floats(value)), phase_scale)

    @property
    def n(self) -> int:
        return len(self.eps)

    @property
    def effective(self) -> tuple[float, ...]:
        """Scales in units where every phase has period one."""
        return tuple(e * self.phase_scale for e in self.eps)

    @property
    def ratios(self) -> tuple[float, ...]:
        """Separation ratios eps_k / eps_(k-1), k = 2..n."""
        return tuple(fine / coarse for coarse, fine in zip(self.eps, self.eps[1:]))

    @property
    def max_ratio(self) -> float:
        return max(self.ratios, default=0.0)

    @property
    def finest_period(self) -> float:
        return min(self.effective)

    def phase(self, t: float, k: int) -> float:
        """Phase t/eps_k reduced to [0, 1). k is 1-based.

        t is reduced modulo the period before the division, so the phase
        keeps its digits even for tiny scales.
        """
        period = self.effective[k - 1]
        theta = math.fmod(t, period) / period
        if theta < 0.0:
            theta += 1.0
        if theta >= 1.0:
            theta = 0.0
        return theta

    def phases(self, t: float) -> tuple[float, ...]:
        return tuple(self.phase(t, k) for k in range(1, self.n + 1))

    def with_eps(self, eps: Sequence[float]) -> ScaleVector:
        return ScaleVector(tuple(eps), self.phase_scale)

    def __str__(self) -> str:
        return "({})".format(", ".join("{:g}".format(e) for e in self.eps))
