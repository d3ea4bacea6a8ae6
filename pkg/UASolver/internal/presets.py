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
"""Experiment presets shipped with the package as JSON documents."""
from __future__ import annotations
from typing import Optional

import os
from UASolver.internal.exceptions import UAConfigurationError
from UASolver.internal.experiment import ExperimentSpec

PRESET_DIR: str = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                               "presets")


def list_presets() -> list[str]:
    return sorted(f[:-len(".json")] for f in os.listdir(PRESET_DIR) if f.endswith(".json"))


def preset_path(name: str) -> str:
    path = os.path.join(PRESET_DIR, "{}.json".format(name))
    if not os.path.isfile(path):
        raise UAConfigurationError('Unknown preset {}. Available: {}'.format(
            name, ', '.join(list_presets())))
    return path


def load_preset(name: str) -> ExperimentSpec:
    return ExperimentSpec.from_json(preset_path(name))


def load_spec(config: Optional[str] = None,
              preset: Optional[str] = None,
              kind: Optional[str] = None) -> ExperimentSpec:
    """Experiment from a config file or a preset name, exactly one of them.

    With ``kind`` the experiment must be of that kind.
    """
    if (config is None) == (preset is None):
        raise UAConfigurationError('Give either a config file or a preset name')
    spec = ExperimentSpec.from_json(config) if config is not None else load_preset(str(preset))
    if kind is not None and spec.kind != kind:
        raise UAConfigurationError('Experiment {} is a {} experiment, not {}'.format(
            spec.name, spec.kind, kind))
    return spec
