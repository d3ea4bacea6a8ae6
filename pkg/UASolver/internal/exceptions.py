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
from __future__ import annotations
from typing import Any, Optional, Sequence


class UASolverException(Exception):
    """
    Base class for other UASolver exceptions

    """


class UAValidationError(UASolverException, ValueError):
    """Raise when scales, fields, configuration values or collapse
    arguments are invalid, or when closed forms fail their self-check."""


class UAEvaluationError(UASolverException):
    """Raise when a field returns non-finite values. Carries the
    offending point."""

    def __init__(self, message: str, point: Any = None) -> None:
        super().__init__(message)
        self.point = point


class UANonConvergenceError(UASolverException):
    """Raise when fixed point iteration runs out of iterations."""

    def __init__(self,
                 message: str,
                 residuals: Optional[Sequence[float]] = None,
                 level: Optional[int] = None) -> None:
        super().__init__(message)
        self.residuals = list(residuals or [])
        self.level = level


class UAInvertibilityError(UANonConvergenceError):
    """Raise when the inverse Jacobian iteration of a map does not
    converge, ie. scale is not small enough for the Neumann series."""


class UAMidpointSolveError(UANonConvergenceError):
    """Raise when the implicit midpoint step can not be solved."""

    def __init__(self,
                 message: str,
                 residuals: Optional[Sequence[float]] = None,
                 step: Optional[int] = None) -> None:
        super().__init__(message, residuals)
        self.step = step


class UARangeError(UASolverException):
    """Raise when requested time window is not covered by trajectory."""


class UAConfigurationError(UASolverException):
    """Raise when experiment can not be run as configured, for example
    reference would be too expensive or problem is unknown."""

    def __init__(self, message: str, cost_estimate: Optional[float] = None) -> None:
        super().__init__(message)
        self.cost_estimate = cost_estimate


class UAGateFailure(UASolverException):
    """Raise when at least one experiment gate fails."""

    def __init__(self, message: str, verdicts: Optional[dict[str, bool]] = None) -> None:
        super().__init__(message)
        self.verdicts = dict(verdicts or {})
