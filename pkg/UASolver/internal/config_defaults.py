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
"""
Default values for configuration items.
parameter name - (parameter value, adapter function)

All accepted parameter names must be defined here as the config
module allows only modifying existing parameters.

Given parameter is passed to adapter function, if defined, before storage.
If value should be stored as is, set adapter function to None.

Usage from test script:
SetConfig    FpTol    1e-12

Usage from code:
from UASolver.internal.config_defaults import CONFIG
val = CONFIG["QuadNodes"]
"""
from __future__ import annotations
from typing import Any

from UASolver.internal import util
from UASolver.internal.config import Config

CONFIG_DEFAULTS: dict[str, Any] = {
    "FpTol": (1e-14, util.positive_float),
    "FpMaxIter": (100, util.positive_int),
    "QuadNodes": (8, util.positive_int),
    "FdDx": (1e-3, util.positive_float),
    "MidpointTol": (1e-12, util.positive_float),
    "MidpointMaxIter": (100, util.positive_int),
    "Provider": ("auto", util.provider_validation),
    "CoarsePhaseTerms": ("auto", util.coarse_phase_validation),
    "ValidationPoints": (20, util.positive_int),
    "Seed": (2020, util.non_negative_int),
    "Workers": (1, util.positive_int),
    "RefSamplesPerPeriod": (20, util.positive_int),
    "MaxReferenceSteps": (10_000_000, util.positive_int),
}

CONFIG: Config = Config(CONFIG_DEFAULTS)
