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
from typing import Any, Iterable, Sequence, Union

import numpy as np
from UASolver.internal.exceptions import UAEvaluationError, UAValidationError

PROVIDERS: tuple[str, ...] = ("auto", "analytic", "numeric")
COARSE_PHASE_MODES: tuple[str, ...] = ("auto", "on", "off")


def par2bool(s: Union[bool, int, str]) -> bool:
    """
    Returns boolean (True, False) from given parameter.
    Accepts booleans, strings or integers.
    """
    if isinstance(s, str):
        s = s.lower()
    return s in ["true", "1", "on", True, 1]


def positive_float(value: Union[int, float, str]) -> float:
    """Adapter for tolerances and step sizes."""
    try:
        val = float(value)
    except (TypeError, ValueError) as e:
        raise UAValidationError('Expected a number, got {}'.format(value)) from e
    if not np.isfinite(val) or val <= 0:
        raise UAValidationError('Value must be positive and finite, got {}'.format(value))
    return val


def positive_int(value: Union[int, float, str]) -> int:
    """Adapter for node counts and iteration caps. Accepts 1e7 style input."""
    try:
        val = float(value)
    except (TypeError, ValueError) as e:
        raise UAValidationError('Expected an integer, got {}'.format(value)) from e
    if not val.is_integer() or val < 1:
        raise UAValidationError('Value must be an integer >= 1, got {}'.format(value))
    return int(val)


def non_negative_int(value: Union[int, float, str]) -> int:
    if str(value).strip() == '0':
        return 0
    return positive_int(value)


def provider_validation(provider: str) -> str:
    _provider = str(provider).strip().lower()
    if _provider not in PROVIDERS:
        raise UAValidationError('Provider must be one of {}, got {}'.format(
            ', '.join(PROVIDERS), provider))
    return _provider


def coarse_phase_validation(mode: Union[str, bool]) -> str:
    if isinstance(mode, bool):
        return "on" if mode else "off"
    _mode = str(mode).strip().lower()
    if _mode not in COARSE_PHASE_MODES:
        raise UAValidationError('Coarse phase terms must be one of {}, got {}'.format(
            ', '.join(COARSE_PHASE_MODES), mode))
    return _mode


def as_state(x: Union[Sequence[float], np.ndarray, float]) -> np.ndarray:
    """Returns a fresh float vector from scalar or sequence."""
    state = np.array(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(state)):
        raise UAValidationError('State must be finite, got {}'.format(x))
    return state


def check_finite(value: np.ndarray, point: Any, what: str = "Field evaluation") -> np.ndarray:
    if not np.all(np.isfinite(value)):
        raise UAEvaluationError('{} is not finite at {}'.format(what, point), point=point)
    return value


def max_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


def stack_residual(new: Iterable[np.ndarray], old: Iterable[np.ndarray]) -> float:
    """Max-norm change over a stack of vectors."""
    return max((max_norm(a - b) for a, b in zip(new, old)), default=0.0)


def stack_scale(vectors: Iterable[np.ndarray]) -> float:
    """Scale used for relative fixed point tolerances, never below one."""
    return max([1.0] + [max_norm(v) for v in vectors])


def parse_floats(value: Union[str, float, int, Sequence[Any]]) -> list[float]:
    """Parses '0.1, 0.01', '0.1 0.01' or sequences into list of floats.

    Used by keywords that receive scale vectors and states from robot files.
    """
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, str):
        parts = value.replace(',', ' ').split()
        return [float(p) for p in parts]
    return [float(v) for v in value]
